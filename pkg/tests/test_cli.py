import json
import math
import os
import subprocess
import sys

import pytest

from wkbdet.cli import EXIT_DOMAIN, EXIT_NUMERIC, EXIT_OK, EXIT_SECTOR, dumps, main, parse_complex


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    recs = [json.loads(ln) for ln in out.splitlines() if ln.strip()]
    return code, recs, err


def run_process(*argv, env=None):
    e = dict(os.environ)
    e.update(env or {})
    return subprocess.run([sys.executable, "-m", "wkbdet.cli", *argv], capture_output=True,
                          text=True, env=e, timeout=600)


class TestFormatting:
    def test_dumps(self):
        assert dumps(5.0) == "5.0"
        assert dumps(0.1) == "0.10000000000000001"
        assert dumps(1 + 2j) == "[1.0,2.0]"
        assert dumps({"a": [1, True, None]}) == '{"a":[1,true,null]}'

    def test_parse_complex(self):
        assert parse_complex("2") == 2
        assert parse_complex("-1,3") == complex(-1, 3)
        with pytest.raises(Exception):
            parse_complex("1,2,3")


class TestAction:
    def test_closed(self, capsys):
        code, recs, _ = run(capsys, "action", "--N", "4", "--M", "2", "--v", "5", "--lambda", "0.5",
                            "--method", "closed")
        assert code == EXIT_OK
        assert abs(recs[0]["value"] + 3.2955402597792) < 1e-12

    def test_numeric_agrees(self, capsys):
        _, recs, _ = run(capsys, "action", "--N", "4", "--M", "2", "--v", "5", "--lambda", "0.5",
                         "--method", "numeric")
        assert abs(recs[0]["value"] + 3.2955402597792) < 1e-8
        assert recs[0]["error_estimate"] > 0

    def test_binomial_line(self, capsys):
        _, recs, _ = run(capsys, "action", "--N", "4", "--M", "2", "--v", "1", "--lambda", "0")
        assert recs[0]["value"] == pytest.approx(-1 / 3, abs=1e-15)

    def test_perfect_square(self, capsys):
        _, recs, _ = run(capsys, "action", "--N", "4", "--M", "2", "--v", "2", "--lambda", "1")
        assert abs(recs[0]["value"]) < 1e-12

    def test_asymptotic(self, capsys):
        _, recs, _ = run(capsys, "action", "--N", "4", "--M", "2", "--v", "100", "--lambda", "1",
                         "--method", "asymptotic")
        assert recs[0]["method"] == "asymptotic"


class TestExitCodes:
    def test_domain(self, capsys):
        code, recs, err = run(capsys, "action", "--N", "5", "--M", "2", "--v", "1")
        assert code == EXIT_DOMAIN and not recs and "domain error" in err

    def test_argparse(self, capsys):
        with pytest.raises(SystemExit) as e:
            main(["action", "--N", "four"])
        assert e.value.code == 2

    def test_numerical(self, capsys):
        code, _, err = run(capsys, "det", "--N", "4", "--M", "2", "--v", "2", "--lambda", "0.5",
                           "--method", "recessive", "--tol", "1e-17")
        assert code == EXIT_NUMERIC and "numerical failure" in err

    def test_sector(self, capsys):
        code, _, err = run(capsys, "det", "--N", "4", "--M", "2", "--v=-1,1", "--lambda", "0.5")
        assert code == EXIT_SECTOR and "sector" in err

    def test_io(self, capsys, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code, _, err = run(capsys, "stokes", "--N", "4", "--M", "2", "--out", str(blocker / "x"))
        assert code == EXIT_DOMAIN and "I/O" in err

    def test_refused_audit(self, capsys):
        code, _, _ = run(capsys, "asymp", "--N", "6", "--M", "2", "--audit")
        assert code == EXIT_DOMAIN


class TestCommands:
    def test_det_harmonic(self, capsys):
        code, recs, _ = run(capsys, "det", "--N", "2", "--lambda", "0", "1,1")
        assert code == EXIT_OK and len(recs) == 4
        assert [r["inputs"]["parity"] for r in recs] == ["even", "odd", "even", "odd"]
        even0 = recs[0]["value"][0]
        assert even0 == pytest.approx(2 * math.sqrt(math.pi) / math.gamma(0.25), rel=1e-14)

    def test_det_recessive_complex(self, capsys):
        _, recs, _ = run(capsys, "det", "--N", "4", "--M", "2", "--v", "2", "--lambda", "1,0.5",
                         "--parity", "odd")
        assert recs[0]["method"] == "recessive-solution"

    def test_wronskian_harmonic(self, capsys):
        _, recs, _ = run(capsys, "wronskian", "--N", "2", "--M", "2", "--lambda", "0.3,0.1")
        assert recs[0]["relative"] < 1e-13

    def test_wronskian_ladder(self, capsys):
        _, recs, _ = run(capsys, "wronskian", "--N", "4", "--M", "2", "--lambda", "0.7",
                         "--ladder", "2,3")
        assert [r["inputs"]["v"] for r in recs] == [2.0, 3.0]
        assert all(r["relative"] < 1e-6 for r in recs)

    def test_asymp_ladder(self, capsys):
        _, recs, _ = run(capsys, "asymp", "--N", "4", "--M", "2", "--ladder", "10,20")
        dev = [abs(r["ratio"]["even"][0] - 1) for r in recs]
        assert dev[1] < dev[0] < 0.05

    def test_stokes_panel(self, capsys, tmp_path):
        code, recs, _ = run(capsys, "stokes", "--N", "4", "--M", "2", "--absv", "5", "--lambda", "0.5",
                            "--theta", "0", "--panel", "a", "--out", str(tmp_path))
        assert code == EXIT_OK
        assert recs[0]["turning_points"] == 4 and recs[0]["real_axis_crossings"] == 0
        assert (tmp_path / "a" / "manifest.json").exists()

    def test_stokes_critical(self, capsys):
        _, recs, _ = run(capsys, "stokes", "--N", "4", "--M", "2", "--critical")
        assert abs(recs[0]["critical_angle"] - 2 * math.pi / 3) < 1e-3


class TestProcess:
    def test_deterministic_and_threads(self):
        args = ("wronskian", "--N", "4", "--M", "2", "--lambda", "0.7", "--ladder", "2,3,5")
        a = run_process(*args, env={"WKBDET_THREADS": "1"})
        b = run_process(*args, env={"WKBDET_THREADS": "1"})
        c = run_process(*args, env={"WKBDET_THREADS": "3"})
        assert a.returncode == 0
        assert a.stdout == b.stdout == c.stdout

    def test_console_script(self):
        r = subprocess.run(["wkbdet", "action", "--N", "4", "--M", "2", "--v", "1"],
                           capture_output=True, text=True, timeout=120)
        assert r.returncode == 0
        assert json.loads(r.stdout)["value"] == pytest.approx(-1 / 3)
