"""Command-line front end: ``wkbdet {action,det,wronskian,asymp,stokes}``.

Every evaluation point prints one JSON line on stdout.  Floats are written
with 17 significant digits so repeated runs are byte-identical; complex
numbers are [re, im] pairs and complex inputs are given as ``re,im``.

Exit codes: 0 success, 2 domain error (including bad arguments),
3 numerical failure, 4 coupling outside the admissible sector.
"""
from __future__ import annotations

import argparse
import cmath
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

from .errors import DomainError, NumericalError, SectorError, WkbdetError

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NUMERIC = 3
EXIT_SECTOR = 4


# -- serialisation -------------------------------------------------------------


def _num(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    s = format(x, ".17g")
    if not any(c in s for c in ".en"):
        s += ".0"
    return s


def dumps(obj) -> str:
    """Compact JSON with fixed 17-digit floats; complex -> [re, im]."""
    import json
    import enum

    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, enum.Enum):
        return json.dumps(obj.value)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, complex):
        return f"[{_num(obj.real)},{_num(obj.imag)}]"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ",".join(f"{json.dumps(str(k))}:{dumps(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(dumps(v) for v in obj) + "]"
    try:  # numpy scalars
        import numpy as np

        if isinstance(obj, np.generic):
            return dumps(obj.item())
    except ImportError:
        pass
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _emit(rec) -> None:
    sys.stdout.write(dumps(rec) + "\n")
    sys.stdout.flush()


# -- argument types --------------------------------------------------------------


def parse_complex(text: str) -> complex:
    """'x' or 're,im'."""
    parts = text.split(",")
    try:
        if len(parts) == 1:
            return complex(float(parts[0]), 0.0)
        if len(parts) == 2:
            return complex(float(parts[0]), float(parts[1]))
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected a number or 're,im', got {text!r}")


def parse_ladder(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad ladder {text!r}") from None
    if not vals or any(v <= 0 for v in vals):
        raise argparse.ArgumentTypeError("ladder entries must be positive")
    return vals


def _real_or_complex(z: complex):
    return z.real if z.imag == 0 else z


def _check_degrees(N: int, M: int, allow_equal: bool = False) -> None:
    if N % 2 or M % 2:
        raise DomainError(f"degrees must be even, got N={N}, M={M}")
    if N < 2 or M < 0 or (M >= N and not (allow_equal and M == N)):
        raise DomainError(f"need N > M >= 0, got N={N}, M={M}")


def _threads() -> int:
    from .spectral.spectrum import _threads as t

    return t()


def _sweep(fn, points):
    """Evaluate fn over points (concurrently if allowed), emit in order."""
    n = _threads()
    if n > 1 and len(points) > 1:
        with ThreadPoolExecutor(n) as pool:
            results = list(pool.map(fn, points))
    else:
        results = [fn(p) for p in points]
    for r in results:
        _emit(r)


def _inputs(a, **extra) -> dict:
    d = {"N": a.N, "M": a.M}
    for k in ("u", "v", "lam"):
        if hasattr(a, k):
            d["lambda" if k == "lam" else k] = getattr(a, k)
    d.update(extra)
    return d


# -- commands ------------------------------------------------------------------


def _action_value(m, method: str):
    from . import actions as A

    N, M = m.N, m.M
    if method == "numeric":
        return A.action_numeric(m, tol=1e-10)
    if method == "asymptotic":
        return A.action_large_v(N, M, _real_or_complex(complex(m.lam)), _real_or_complex(complex(m.v)))
    closed = method in ("closed", "auto")
    lam, v, u = complex(m.lam), complex(m.v), complex(m.u)
    if closed:
        if lam == 0:
            return A.action_binomial(_real_or_complex(u), _real_or_complex(v), N, M)
        if v == 0 or M == 0:
            return A.action_binomial(_real_or_complex(u), _real_or_complex(lam + (v if M == 0 else 0)), N, 0)
        if N == 4 and M == 2 and u == 1 and m.is_real_positive:
            return A.action_quartic(v.real, lam.real)
        try:
            return A.action_perfect_square(m)
        except DomainError:
            if method == "closed":
                raise DomainError("no closed form for these parameters; use --method numeric")
    return A.action_numeric(m, tol=1e-10)


def cmd_action(a) -> int:
    from .actions import TrinomialMomentum

    _check_degrees(a.N, a.M)
    m = TrinomialMomentum(a.N, a.M, _real_or_complex(a.u), _real_or_complex(a.v), _real_or_complex(a.lam))
    r = _action_value(m, a.method)
    _emit({"inputs": _inputs(a), "method": r.method, "value": complex(r.value) if isinstance(r.value, complex) else float(r.value),
           "residue": complex(r.residue) if isinstance(r.residue, complex) else float(r.residue),
           "error_estimate": float(r.error_estimate)})
    return EXIT_OK


def _det_record(a, lam: complex, parity) -> dict:
    from .actions import TrinomialMomentum
    from .spectral import Parity, det_complex, det_entire, harmonic_value, log_det

    parity = Parity.coerce(parity)
    u, v = a.u, a.v
    method = a.method
    real = lam.imag == 0 and v.imag == 0 and u.imag == 0
    m = TrinomialMomentum(a.N, a.M, _real_or_complex(u), _real_or_complex(v), _real_or_complex(lam))
    if method == "auto":
        if a.N == 2 and (a.M == 0 or v == 0):
            method = "harmonic" if u == 1 and (a.M == 0 or v == 0) else "zeta"
        elif real and v.real >= 0 and lam.real >= 0:
            method = "zeta"
        else:
            method = "recessive"
    if method == "harmonic":
        if a.N != 2 or u != 1:
            raise DomainError("the harmonic closed form needs N = 2, u = 1")
        L = lam + (v if a.M == 0 else 0)
        d = harmonic_value(parity, L)
    elif method == "zeta":
        if not real or lam.real < 0:
            raise DomainError("the zeta route needs real lam >= 0 and real couplings")
        d = log_det(m, parity, tol=a.tol)
    elif method == "product":
        d = det_entire(m.with_(lam=0.0), parity, lam, tol=a.tol)
    else:
        d = det_complex(m, parity, tol=min(a.tol, 1e-9))
    return {"inputs": _inputs(a, **{"lambda": _real_or_complex(lam), "parity": parity.value}),
            "method": d.method, "value": complex(d.value), "log_value": complex(d.log_value),
            "error_estimate": float(d.error_estimate)}


def cmd_det(a) -> int:
    _check_degrees(a.N, a.M)
    parities = ["even", "odd"] if a.parity == "both" else [a.parity]
    points = [(lam, p) for lam in a.lam for p in parities]
    _sweep(lambda pt: _det_record(a, pt[0], pt[1]), points)
    return EXIT_OK


def cmd_wronskian(a) -> int:
    from .functional import wronskian_terms

    _check_degrees(a.N, a.M, allow_equal=(a.N == a.M == 2))
    if a.ladder:
        arg = cmath.phase(a.v) if a.v != 0 else 0.0
        vs = [cmath.rect(r, arg) for r in a.ladder]
    else:
        vs = [a.v]

    def one(v):
        w = wronskian_terms(a.N, a.M, a.lam, v, tol=a.tol, probe_beyond=a.probe_beyond)
        return {"inputs": {"N": a.N, "M": a.M, "v": _real_or_complex(v), "lambda": _real_or_complex(a.lam)},
                "residual": w.residual, "lhs": w.lhs, "rhs": w.rhs, "relative": w.relative,
                "error_budget": w.error_budget}

    _sweep(one, vs)
    return EXIT_OK


def cmd_asymp(a) -> int:
    from .functional import large_v_factorization, transition_audit

    _check_degrees(a.N, a.M)
    if a.audit:
        rep = transition_audit(a.N, a.M, a.lam, tuple(a.ladder or (5.0, 10.0, 20.0, 40.0, 80.0)), tol=a.tol)
        _emit({"inputs": {"N": a.N, "M": a.M, "lambda": _real_or_complex(a.lam)},
               "ladder": list(rep.ladder), "deviations": rep.deviations, "ratios": rep.ratios,
               "bracket_deviations": rep.bracket_deviations, "converged": rep.converged,
               "identities": rep.identities})
        return EXIT_OK
    arg = cmath.phase(a.v) if a.v != 0 else 0.0
    vs = [cmath.rect(r, arg) for r in a.ladder] if a.ladder else [a.v]

    def one(v):
        f = large_v_factorization(a.N, a.M, a.lam, v, tol=a.tol, probe_beyond=a.probe_beyond)
        return {"inputs": {"N": a.N, "M": a.M, "v": _real_or_complex(v), "lambda": _real_or_complex(a.lam)},
                "Lambda": f.Lambda, "action": f.action, "anomaly": f.anomaly,
                "ratio": {p.value: r for p, r in f.ratio.items()},
                "predicted": {p.value: r for p, r in f.predicted.items()},
                "computed": {p.value: r for p, r in f.computed.items()}}

    _sweep(one, vs)
    return EXIT_OK


def cmd_stokes(a) -> int:
    from . import stokes as S

    _check_degrees(a.N, a.M)
    if a.critical:
        th = S.critical_angle(a.N, a.M, a.absv, _real_or_complex(a.lam))
        from .spectral.recessive import sector_theta

        _emit({"inputs": {"N": a.N, "M": a.M, "absv": a.absv, "lambda": _real_or_complex(a.lam)},
               "critical_angle": th, "sector_theta": sector_theta(a.N, a.M)})
        return EXIT_OK
    if a.figure:
        out = a.out or "."
        res = S.emit_figure_data(out, N=a.N, M=a.M, absv=a.absv)
        for name, man in res.items():
            _emit({"panel": name, "theta": man["theta"], "lambda": man["lambda"],
                   "S_linked": man["S_linked"], "curves": len(man["curves"]),
                   "linked": [c["linked"] for c in man["curves"]],
                   "manifest": os.path.join(out, name, "manifest.json")})
        return EXIT_OK
    lam = _real_or_complex(a.lam)
    name = a.panel or f"theta_{a.theta:.6f}"
    out = a.out
    if out:
        res = S.emit_figure_data(out, N=a.N, M=a.M, absv=a.absv, panels={name: (a.theta, lam)})
        man = res[name]
        _emit({"panel": name, "theta": a.theta, "turning_points": len(man["turning_points"]),
               "linked": [c["linked"] for c in man["curves"]], "S_linked": man["S_linked"],
               "real_axis_crossings": man["real_axis_crossings"],
               "manifest": os.path.join(out, name, "manifest.json")})
    else:
        d = S.trace_stokes_curves(a.N, a.M, cmath.rect(a.absv, a.theta), lam)
        _emit({"theta": a.theta,
               "turning_points": [{"q": t.q, "kind": t.kind, "multiplicity": t.multiplicity}
                                  for t in d.turning_points],
               "curves": [{"anchor_index": c.anchor_index, "linked": c.linked, "end": c.end,
                           "bin": c.bin, "samples": len(c.points)} for c in d.curves]})
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def _common(p, u=True, v=True):
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--M", type=int, default=0)
    if u:
        p.add_argument("--u", type=parse_complex, default=complex(1.0))
    if v:
        p.add_argument("--v", type=parse_complex, default=complex(0.0))


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wkbdet", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    q = sub.add_parser("action", help="canonical action integral")
    _common(q)
    q.add_argument("--lambda", dest="lam", type=parse_complex, default=complex(0.0))
    q.add_argument("--method", choices=["auto", "closed", "numeric", "asymptotic"], default="auto")
    q.set_defaults(func=cmd_action)

    q = sub.add_parser("det", help="parity spectral determinants")
    _common(q)
    q.add_argument("--lambda", dest="lam", type=parse_complex, nargs="+", default=[complex(0.0)])
    q.add_argument("--parity", choices=["even", "odd", "both"], default="both")
    q.add_argument("--method", choices=["auto", "zeta", "product", "recessive", "harmonic"], default="auto")
    q.add_argument("--tol", type=float, default=1e-8)
    q.set_defaults(func=cmd_det)

    q = sub.add_parser("wronskian", help="residual of the bilinear functional relation")
    _common(q, u=False)
    q.add_argument("--lambda", dest="lam", type=parse_complex, default=complex(0.0))
    q.add_argument("--ladder", type=parse_ladder, default=None, help="comma list of |v| values")
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--probe-beyond", action="store_true", help="skip the sector check")
    q.set_defaults(func=cmd_wronskian)

    q = sub.add_parser("asymp", help="large-v factorisation and the v -> inf transition")
    _common(q, u=False)
    q.add_argument("--lambda", dest="lam", type=parse_complex, default=complex(1.0))
    q.add_argument("--ladder", type=parse_ladder, default=None, help="comma list of |v| values")
    q.add_argument("--audit", action="store_true", help="run the transition audit")
    q.add_argument("--tol", type=float, default=1e-9)
    q.add_argument("--probe-beyond", action="store_true", help="skip the sector check")
    q.set_defaults(func=cmd_asymp)

    q = sub.add_parser("stokes", help="turning points, Stokes curves, figure data")
    _common(q, u=False, v=False)
    q.add_argument("--absv", type=float, default=5.0)
    q.add_argument("--theta", type=float, default=0.0)
    q.add_argument("--lambda", dest="lam", type=parse_complex, default=complex(0.0))
    q.add_argument("--panel", default=None, help="panel directory name")
    q.add_argument("--figure", action="store_true", help="write all six figure panels")
    q.add_argument("--critical", action="store_true", help="bisect the critical angle")
    q.add_argument("--out", default=None, help="output directory")
    q.set_defaults(func=cmd_stokes)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SectorError as e:
        print(f"wkbdet: sector error: {e}", file=sys.stderr)
        return EXIT_SECTOR
    except DomainError as e:
        print(f"wkbdet: domain error: {e}", file=sys.stderr)
        return EXIT_DOMAIN
    except (NumericalError, ArithmeticError) as e:
        print(f"wkbdet: numerical failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except WkbdetError as e:
        print(f"wkbdet: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as e:
        print(f"wkbdet: I/O error: {e}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
