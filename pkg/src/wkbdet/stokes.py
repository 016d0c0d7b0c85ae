"""Turning points and Stokes curves of Pi(q)^2 = q^N + v q^M + lam.

A Stokes curve is a level set Im int_{q_t}^q Pi dq' = 0 starting at a
turning point q_t.  Curves are followed by unit-speed continuation
dq/dt = s conj(Pi)/|Pi|, along which int Pi grows at rate |Pi|, with a
Newton projection back onto the level set after every step.  The branch
of Pi is carried by continuity.  Far out a curve approaches one of the
N + 2 directions arg q = 2 pi k/(N + 2); k = 0 is the q -> +inf direction.
"""
from __future__ import annotations

import cmath
import json
import math
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalError
from .spectral.recessive import sector_theta
from .spectral.spectrum import _threads

__all__ = [
    "TurningPoint",
    "StokesCurve",
    "StokesDiagram",
    "TraceOptions",
    "IllConditionedRootWarning",
    "StepCollapseError",
    "NoTransitionError",
    "turning_points",
    "trace_stokes_curves",
    "s_curve",
    "critical_angle",
    "FIGURE_PANELS",
    "emit_figure_data",
    "load_figure_data",
    "level_set_defect",
]

_GL_X, _GL_W = np.polynomial.legendre.leggauss(5)


class IllConditionedRootWarning(UserWarning):
    pass


class StepCollapseError(NumericalError):
    pass


class NoTransitionError(NumericalError):
    pass


@dataclass(frozen=True)
class TurningPoint:
    q: complex
    kind: str            # inner, outer or degenerate
    multiplicity: int = 1


@dataclass(frozen=True)
class StokesCurve:
    anchor_index: int
    points: tuple        # complex samples, starting at the turning point
    linked: bool         # ends in the q -> +inf direction
    end: str             # clip, turning-point or max-steps
    end_index: int = -1  # turning point hit, if any
    bin: int = -1        # asymptotic direction index k, arg q ~ 2 pi k/(N+2)
    direction: float = 0.0  # launch angle at the anchor


@dataclass(frozen=True)
class StokesDiagram:
    N: int
    M: int
    v: complex
    lam: complex
    theta: float
    turning_points: tuple
    curves: tuple
    clip_radius: float = 0.0

    @property
    def linked_to_plus_infinity(self) -> list:
        return [c.linked for c in self.curves]


@dataclass(frozen=True)
class TraceOptions:
    max_steps: int = 20000
    step_fraction: float = 0.2      # step <= fraction * distance to nearest turning point
    max_step: float | None = None   # default clip radius / 60
    min_step: float = 1e-12
    seed: float = 1e-6              # launch offset relative to the root scale
    hit: float = 1e-7               # capture radius relative to the root scale
    clip_factor: float = 4.0


def _poly(N, M, v, lam):
    c = np.zeros(N + 1, dtype=complex)
    c[0] = 1.0
    c[N - M] += v
    c[N] += lam
    return c


def _scale(N, M, v, lam) -> float:
    s = 0.0
    if v != 0:
        s = max(s, abs(v) ** (1.0 / (N - M)))
    if lam != 0:
        s = max(s, abs(lam) ** (1.0 / N))
    return s


def turning_points(N: int, M: int, v, lam, *, merge: float = 1e-4) -> list[TurningPoint]:
    """Roots of q^N + v q^M + lam, polished by Newton and classified.

    For lam = 0 the root q = 0 of multiplicity M is returned once, as
    degenerate.  Roots closer than ``merge`` times the root scale are
    merged at their midpoint with doubled multiplicity.
    """
    if N % 2 or M % 2 or not 0 <= M < N:
        raise DomainError("need even N > M >= 0")
    v, lam = complex(v), complex(lam)
    if v == 0 and lam == 0:
        raise DomainError("v and lam cannot both vanish")
    outer_scale = abs(v) ** (1.0 / (N - M)) if v != 0 else 0.0
    if lam == 0:
        roots = [cmath.rect(outer_scale, (cmath.phase(-v) + 2 * math.pi * k) / (N - M))
                 for k in range(N - M)]
        pts = [TurningPoint(0j, "degenerate", M)] if M > 0 else []
        return pts + [TurningPoint(_polish(N, M, v, lam, r), "outer") for r in roots]
    c = _poly(N, M, v, lam)
    roots = [_polish(N, M, v, lam, complex(r)) for r in np.roots(c)]
    scale = _scale(N, M, v, lam)
    # merge near-coincident roots
    out, used = [], set()
    for i, r in enumerate(roots):
        if i in used:
            continue
        group = [r]
        for k in range(i + 1, len(roots)):
            if k not in used and abs(roots[k] - r) < merge * scale:
                group.append(roots[k])
                used.add(k)
        out.append((sum(group) / len(group), len(group)))
    inner_scale = abs(lam / v) ** (1.0 / M) if (v != 0 and M > 0) else 0.0
    if inner_scale and outer_scale and outer_scale < 4 * inner_scale:
        warnings.warn("inner and outer turning points overlap; classification is ambiguous",
                      IllConditionedRootWarning, stacklevel=2)
    pts = []
    for r, mult in out:
        if mult > 1:
            kind = "degenerate"
        elif inner_scale == 0:
            kind = "outer"
        else:
            a = abs(r)
            kind = "inner" if abs(math.log(a / inner_scale)) < abs(math.log(a / outer_scale)) else "outer"
        pts.append(TurningPoint(r, kind, mult))
    pts.sort(key=lambda t: (t.kind != "degenerate", t.kind != "inner", round(cmath.phase(t.q), 12), abs(t.q)))
    return pts


def _polish(N, M, v, lam, r: complex) -> complex:
    for _ in range(8):
        p = r**N + v * r**M + lam
        dp = N * r ** (N - 1) + (M * v * r ** (M - 1) if M else 0)
        if dp == 0:
            break
        step = p / dp
        r -= step
        if abs(step) <= 1e-16 * max(1.0, abs(r)):
            break
    return r


# -- tracing -------------------------------------------------------------------


class _Momentum:
    def __init__(self, N, M, v, lam):
        self.N, self.M, self.v, self.lam = N, M, v, lam

    def sq(self, q):
        return q**self.N + self.v * q**self.M + self.lam

    def near(self, q, ref):
        p = cmath.sqrt(self.sq(q))
        return p if abs(p - ref) <= abs(p + ref) else -p

    def derivative(self, q, order):
        # order-th derivative of Pi^2
        out = 0j
        for c, e in ((1.0, self.N), (self.v, self.M), (self.lam, 0)):
            if e >= order:
                out += c * math.perm(e, order) * q ** (e - order)
        return out


def _launch_directions(mom: _Momentum, tp: TurningPoint):
    mu = tp.multiplicity
    c = mom.derivative(tp.q, mu) / math.factorial(mu)
    arg_c = cmath.phase(c)
    return [(2 * math.pi * k - arg_c) / (mu + 2) for k in range(mu + 2)], c


def _gl_segment(mom, a, b, pa):
    """int_a^b Pi along the chord, branch continued from Pi(a) = pa."""
    h = b - a
    mid = 0.5 * (a + b)
    p_mid = mom.near(mid, pa)
    s = 0j
    for x, w in zip(_GL_X, _GL_W):
        q = mid + 0.5 * h * x
        s += w * mom.near(q, p_mid)
    return 0.5 * h * s


def _trace_one(mom: _Momentum, tps, anchor: int, phi: float, R: float, scale: float,
               opts: TraceOptions) -> StokesCurve:
    tp = tps[anchor]
    mu = tp.multiplicity
    eps = opts.seed * scale
    q = tp.q + cmath.rect(eps, phi)
    _, c = _launch_directions(mom, tp)
    p = cmath.sqrt(c) * cmath.rect(eps, phi) ** (mu / 2.0)
    p = mom.near(q, p)
    W = (q - tp.q) * p / (mu / 2.0 + 1.0)
    s = 1.0 if W.real >= 0 else -1.0
    W = complex(W.real, 0.0)
    pts = [tp.q, q]
    hmax = opts.max_step or R / 60.0
    hit = opts.hit * scale
    others = [(k, t.q) for k, t in enumerate(tps)]
    end, end_index = "max-steps", -1

    def f(qq, ref):
        pp = mom.near(qq, ref)
        return s * pp.conjugate() / abs(pp), pp

    for _ in range(opts.max_steps):
        d, near = min((abs(q - t), k) for k, t in others)
        if near != anchor and d < hit:
            end, end_index = "turning-point", near
            break
        if abs(q) > R:
            end = "clip"
            break
        h = min(hmax, opts.step_fraction * d)
        if h < opts.min_step:
            raise StepCollapseError("Stokes curve step collapsed near a turning point")
        k1, p1 = f(q, p)
        k2, p2 = f(q + 0.5 * h * k1, p1)
        k3, p3 = f(q + 0.5 * h * k2, p2)
        k4, p4 = f(q + h * k3, p3)
        qn = q + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
        W += _gl_segment(mom, q, qn, p)
        pn = mom.near(qn, p4)
        # project back onto Im W = 0
        dq = -1j * W.imag / pn
        qn += dq
        W = complex(W.real, 0.0)
        pn = mom.near(qn, pn)
        q, p = qn, pn
        pts.append(q)
    N = mom.N
    k = -1
    if end == "clip":
        k = int(round(cmath.phase(q) * (N + 2) / (2 * math.pi))) % (N + 2)
    return StokesCurve(anchor, tuple(pts), end == "clip" and k == 0, end, end_index, k, phi)


def _clip_radius(N, M, v, lam, tps, opts) -> float:
    R = opts.clip_factor * abs(v) ** (1.0 / (N - M)) if v != 0 else 0.0
    R = max(R, opts.clip_factor * abs(lam) ** (1.0 / N) if lam != 0 else 0.0)
    return max(R, 2.0 * max(abs(t.q) for t in tps))


def trace_stokes_curves(N: int, M: int, v, lam, opts: TraceOptions | None = None) -> StokesDiagram:
    """All Stokes curves of q^N + v q^M + lam.

    A root of multiplicity mu launches mu + 2 curves.  A curve joining two
    turning points is kept once, from the lower anchor index.
    """
    opts = opts or TraceOptions()
    v, lam = complex(v), complex(lam)
    tps = turning_points(N, M, v, lam)
    mom = _Momentum(N, M, v, lam)
    scale = _scale(N, M, v, lam)
    R = _clip_radius(N, M, v, lam, tps, opts)
    jobs = []
    for a, tp in enumerate(tps):
        dirs, _ = _launch_directions(mom, tp)
        jobs += [(a, phi) for phi in dirs]
    work = lambda job: _trace_one(mom, tps, job[0], job[1], R, scale, opts)
    nthreads = _threads()
    if nthreads > 1:
        with ThreadPoolExecutor(nthreads) as pool:
            curves = list(pool.map(work, jobs))
    else:
        curves = [work(j) for j in jobs]
    kept = []
    for c in curves:
        if c.end == "turning-point" and c.end_index < c.anchor_index:
            partner = [o for o in curves if o.anchor_index == c.end_index
                       and o.end_index == c.anchor_index]
            if partner:
                continue
        kept.append(c)
    return StokesDiagram(N, M, v, lam, cmath.phase(v) if v != 0 else 0.0, tuple(tps), tuple(kept), R)


def level_set_defect(diagram: StokesDiagram) -> float:
    """max |Im int Pi| over all samples, re-integrated with 8-point Gauss rules."""
    xs, ws = np.polynomial.legendre.leggauss(8)
    mom = _Momentum(diagram.N, diagram.M, diagram.v, diagram.lam)
    worst = 0.0
    for c in diagram.curves:
        pts = c.points
        tp = diagram.turning_points[c.anchor_index]
        a = pts[1]
        _, cc = _launch_directions(mom, tp)
        p = mom.near(a, cmath.sqrt(cc) * (a - tp.q) ** (tp.multiplicity / 2.0))
        W = (a - tp.q) * p / (tp.multiplicity / 2.0 + 1.0)
        for b in pts[2:]:
            mid = 0.5 * (a + b)
            pm = mom.near(mid, p)
            seg = sum(w * mom.near(mid + 0.5 * (b - a) * x, pm) for x, w in zip(xs, ws))
            W += 0.5 * (b - a) * seg
            p = mom.near(b, pm)
            a = b
            worst = max(worst, abs(W.imag) / max(1.0, abs(W)))
    return worst


# -- the transition ----------------------------------------------------------------


def s_curve(N: int, M: int, absv: float, theta: float, lam=0.0,
            opts: TraceOptions | None = None) -> StokesCurve:
    """The curve S that leaves q = 0 along R+ at theta = 0.

    For lam = 0 it is the branch from the degenerate point launched at
    -theta/(M+2), which is continuous in theta.  For lam != 0 it is taken
    from the inner turning point and launch direction closest to that.
    """
    opts = opts or TraceOptions()
    v = cmath.rect(absv, theta)
    lam = complex(lam)
    tps = turning_points(N, M, v, lam)
    mom = _Momentum(N, M, v, lam)
    scale = _scale(N, M, v, lam)
    R = _clip_radius(N, M, v, lam, tps, opts)
    target = -theta / (M + 2)
    best = None
    for a, tp in enumerate(tps):
        if tp.kind == "outer":
            continue
        dirs, _ = _launch_directions(mom, tp)
        for phi in dirs:
            # prefer the candidate whose launch heads towards +inf most directly
            score = abs(cmath.phase(cmath.exp(1j * (phi - target)))) - 1e-3 * tp.q.real
            if best is None or score < best[0]:
                best = (score, a, phi)
    if best is None:
        raise DomainError("no inner turning point to launch S from")
    return _trace_one(mom, tps, best[1], best[2], R, scale, opts)


def critical_angle(N: int, M: int, absv: float, lam=0.0, *, xtol: float = 2.5e-4,
                   scan_step: float = 0.05, opts: TraceOptions | None = None) -> float:
    """Smallest arg v at which S stops being linked to q = +inf.

    Scans theta on [0, pi) and bisects the first change of linkage.  The
    result is checked against (M+2) pi/(N+2).
    """
    if lam != 0:
        warnings.warn("critical angle with lam != 0 is only approximate", stacklevel=2)
    linked = lambda th: s_curve(N, M, absv, th, lam, opts).linked
    grid = np.arange(0.0, math.pi, scan_step)
    prev = linked(grid[0])
    lo = hi = None
    for th in grid[1:]:
        cur = linked(th)
        if cur != prev:
            lo, hi = th - scan_step, th
            break
        prev = cur
    if lo is None:
        raise NoTransitionError("linkage of S does not change on [0, pi)")
    lo_state = linked(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if linked(mid) == lo_state:
            lo = mid
        else:
            hi = mid
    theta_c = 0.5 * (lo + hi)
    closed = sector_theta(N, M)
    if lam == 0 and abs(theta_c - closed) > 5e-3:
        raise NumericalError(f"bisected angle {theta_c:.6f} disagrees with {closed:.6f}")
    return theta_c


# -- figure data -------------------------------------------------------------------

_THETA = 2 * math.pi / 3
FIGURE_PANELS = {
    "a": (0.0, 0.5),
    "b": (_THETA * 0.25, 0.0),
    "c": (_THETA * 0.6, 0.0),
    "d": (_THETA - 0.05, 0.0),
    "e": (_THETA + 0.05, 0.0),
    "f": (_THETA + 0.3, 0.5),
}


def _real_axis_crossings(d: StokesDiagram) -> int:
    n = 0
    for c in d.curves:
        ims = [p.imag for p in c.points]
        n += sum(1 for a, b in zip(ims[:-1], ims[1:]) if a * b < 0)
    return n


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _write_panel(d: StokesDiagram, out: str, name: str, s_linked) -> dict:
    os.makedirs(os.path.join(out, name), exist_ok=True)
    curves = []
    for i, c in enumerate(d.curves):
        fn = os.path.join(name, f"curve_{i:03d}.csv")
        with open(os.path.join(out, fn), "w") as fh:
            fh.write("re_q,im_q\n")
            for p in c.points:
                fh.write(f"{_fmt(p.real)},{_fmt(p.imag)}\n")
        curves.append({"file": fn, "anchor_index": c.anchor_index, "linked": c.linked,
                       "end": c.end, "end_index": c.end_index, "bin": c.bin,
                       "direction": c.direction})
    manifest = {
        "N": d.N, "M": d.M, "v": [d.v.real, d.v.imag], "lambda": [d.lam.real, d.lam.imag],
        "theta": d.theta, "clip_radius": d.clip_radius,
        "turning_points": [{"re": t.q.real, "im": t.q.imag, "kind": t.kind,
                            "multiplicity": t.multiplicity} for t in d.turning_points],
        "curves": curves,
        "S_linked": s_linked,
        "real_axis_crossings": _real_axis_crossings(d),
    }
    with open(os.path.join(out, name, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=1)
    return manifest


def emit_figure_data(out: str, *, N: int = 4, M: int = 2, absv: float = 5.0,
                     panels: dict | None = None, opts: TraceOptions | None = None) -> dict:
    """Write the six panel datasets under ``out``; returns {panel: manifest}."""
    panels = FIGURE_PANELS if panels is None else panels
    result = {}
    for name, (theta, lam) in panels.items():
        v = cmath.rect(absv, theta)
        d = trace_stokes_curves(N, M, v, lam, opts)
        d = StokesDiagram(d.N, d.M, d.v, d.lam, theta, d.turning_points, d.curves, d.clip_radius)
        s_linked = s_curve(N, M, absv, theta, lam, opts).linked if lam == 0 else None
        result[name] = _write_panel(d, out, name, s_linked)
    with open(os.path.join(out, "figure.json"), "w") as fh:
        json.dump({"N": N, "M": M, "absv": absv,
                   "panels": {k: os.path.join(k, "manifest.json") for k in panels}}, fh, indent=1)
    return result


def load_figure_data(out: str, panel: str) -> StokesDiagram:
    """Rebuild a diagram from its manifest and CSV files."""
    with open(os.path.join(out, panel, "manifest.json")) as fh:
        man = json.load(fh)
    tps = tuple(TurningPoint(complex(t["re"], t["im"]), t["kind"], t["multiplicity"])
                for t in man["turning_points"])
    curves = []
    for c in man["curves"]:
        with open(os.path.join(out, c["file"])) as fh:
            next(fh)
            pts = tuple(complex(float(a), float(b)) for a, b in (ln.strip().split(",") for ln in fh if ln.strip()))
        curves.append(StokesCurve(c["anchor_index"], pts, c["linked"], c["end"], c["end_index"],
                                  c["bin"], c["direction"]))
    return StokesDiagram(man["N"], man["M"], complex(*man["v"]), complex(*man["lambda"]),
                         man["theta"], tps, tuple(curves), man["clip_radius"])
