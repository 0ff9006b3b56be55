"""Normal/superradiant classification, parameter scans and critical points.

A parameter point is superradiant (SP) when any HB eigenvalue has a
non-negligible imaginary part and normal (NP) otherwise. Along a one-
parameter path, label changes are exceptional points (EPs), refined by
bisection on the label; zeros of ``det M`` are degenerate points (DPs),
refined with Brent's method. A DP that sits on an EP is reported as EP_DP.
"""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .eigen import DEFAULT_OPTIONS, SolverOptions, eigenvalues
from .errors import HBError, PreconditionError
from .hbmatrix import build, determinant
from .model import MODEL_TYPES, complete_description, from_description, with_param

NP, SP, FAILED = "NP", "SP", "FAILED"
DEFAULT_SAMPLES = 201
#: EP and DP within this many parameter tolerances are treated as one point
COINCIDENCE_FACTOR = 100.0


class SamplingWarning(UserWarning):
    """A detected phase interval is close to the sampling resolution."""


@dataclass(frozen=True)
class ParamPath:
    """A one-parameter family: ``base`` model with ``target`` swept over ``[lo, hi]``."""

    base: dict
    target: str
    lo: float
    hi: float
    samples: int = DEFAULT_SAMPLES
    scale: str = "linear"

    def __post_init__(self):
        desc = complete_description(self.base)
        object.__setattr__(self, "base", desc)
        if self.target not in MODEL_TYPES[desc["type"]].scalar:
            raise KeyError(f"target not found: {self.target!r} is not a scalar parameter of {desc['type']}")
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)) or not self.lo < self.hi:
            raise ValueError(f"invalid range [{self.lo}, {self.hi}]")
        if self.samples < 2:
            raise ValueError("samples must be >= 2")
        if self.scale not in ("linear", "log"):
            raise ValueError(f"scale must be 'linear' or 'log', not {self.scale!r}")
        if self.scale == "log" and self.lo <= 0:
            raise ValueError("log scale requires lo > 0")

    @property
    def span(self) -> float:
        return self.hi - self.lo

    def grid(self) -> np.ndarray:
        if self.scale == "log":
            x = np.geomspace(self.lo, self.hi, self.samples)
        else:
            x = np.linspace(self.lo, self.hi, self.samples)
        x[0], x[-1] = self.lo, self.hi
        return x

    def description_at(self, x: float) -> dict:
        return with_param(self.base, self.target, float(x))

    def model_at(self, x: float):
        return from_description(self.description_at(x))


@dataclass(frozen=True)
class PhasePoint:
    """One sample of a scan.

    ``max_abs_im`` is reported as exactly 0 on NP points: imaginary parts
    below the classification threshold are solver noise.
    """

    param: float
    label: str
    max_abs_im: float
    min_abs_e: float
    det: float
    error: str | None = None


@dataclass(frozen=True)
class CriticalPoint:
    kind: str  # "EP" | "DP" | "EP_DP"
    param: float
    bracket: tuple[float, float]
    indicators: tuple[float, float]
    crossing: bool = True  # False for tangential determinant zeros
    partner: float | None = None  # the coincident EP for EP_DP entries

    @property
    def width(self) -> float:
        return self.bracket[1] - self.bracket[0]


def indicator(eigs, tol_im: float = DEFAULT_OPTIONS.tol_im) -> float:
    """``max|Im E| - tol_im (1 + max|E|)``; positive exactly on SP points."""
    eigs = np.asarray(eigs)
    if eigs.size == 0:
        return -tol_im
    return float(np.max(np.abs(eigs.imag)) - tol_im * (1.0 + np.max(np.abs(eigs))))


def classify(eigs, tol_im: float = DEFAULT_OPTIONS.tol_im) -> str:
    """SP iff some eigenvalue has ``|Im E| > tol_im (1 + max|E|)``."""
    return SP if indicator(eigs, tol_im) > 0 else NP


def evaluate(h, opts: SolverOptions | None = None, param: float = math.nan) -> PhasePoint:
    opts = opts or DEFAULT_OPTIONS
    m = build(h)
    eigs = eigenvalues(m, opts)
    label = classify(eigs, opts.tol_im)
    im = float(np.max(np.abs(eigs.imag))) if label == SP else 0.0
    return PhasePoint(float(param), label, im, float(np.min(np.abs(eigs))), determinant(m))


def _scan_one(args) -> PhasePoint:
    path, x, opts = args
    try:
        return evaluate(path.model_at(x), opts, x)
    except (HBError, ArithmeticError, ValueError) as exc:
        nan = math.nan
        return PhasePoint(float(x), FAILED, nan, nan, nan, f"{type(exc).__name__}: {exc}")


def scan(path: ParamPath, opts: SolverOptions | None = None, *, parallel: int | None = None) -> list[PhasePoint]:
    """Evaluate every grid point of ``path``; failures are recorded, not raised.

    With ``parallel > 1`` points are farmed out to a process pool; the result
    order is the grid order either way.
    """
    opts = opts or DEFAULT_OPTIONS
    jobs = [(path, float(x), opts) for x in path.grid()]
    if parallel and parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            return list(pool.map(_scan_one, jobs, chunksize=max(1, len(jobs) // (4 * parallel))))
    return [_scan_one(j) for j in jobs]


def _label_at(path: ParamPath, x: float, opts: SolverOptions) -> tuple[str, float]:
    eigs = eigenvalues(build(path.model_at(x)), opts)
    ind = indicator(eigs, opts.tol_im)
    return (SP if ind > 0 else NP), ind


def _default_tol(path: ParamPath, tol: float | None) -> float:
    return 1e-8 * path.span if tol is None else tol


def _check_sampling(path: ParamPath, points: list[PhasePoint], boundaries: list[float]) -> None:
    steps = np.diff([p.param for p in points])
    step = float(np.max(steps)) if steps.size else path.span
    edges = [path.lo, *sorted(boundaries), path.hi]
    widths = [b - a for a, b in zip(edges, edges[1:]) if b > a]
    if len(edges) > 2 and widths:
        narrowest = min(widths)
        if narrowest < 2 * step:
            warnings.warn(
                f"narrowest detected phase interval has width {narrowest:.3g}, less than twice the "
                f"sampling step {step:.3g}; narrower intervals could be missed — increase samples",
                SamplingWarning,
                stacklevel=3,
            )


def locate_eps(path: ParamPath, tol: float | None = None, opts: SolverOptions | None = None, *,
               points: list[PhasePoint] | None = None, parallel: int | None = None,
               check_sampling: bool = True) -> list[CriticalPoint]:
    """Refine every NP/SP label change between adjacent samples by bisection.

    Bisection stops when the bracket is narrower than ``tol`` (default
    ``1e-8`` times the path span); the midpoint is reported.
    """
    opts = opts or DEFAULT_OPTIONS
    tol = _default_tol(path, tol)
    if points is None:
        points = scan(path, opts, parallel=parallel)
    good = [p for p in points if p.label != FAILED]
    out = []
    for a, b in zip(good, good[1:]):
        if a.label == b.label:
            continue
        lo, hi, lab_lo = a.param, b.param, a.label
        ind_lo = ind_hi = math.nan
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            lab, ind = _label_at(path, mid, opts)
            if lab == lab_lo:
                lo, ind_lo = mid, ind
            else:
                hi, ind_hi = mid, ind
        if math.isnan(ind_lo):
            ind_lo = _label_at(path, lo, opts)[1]
        if math.isnan(ind_hi):
            ind_hi = _label_at(path, hi, opts)[1]
        out.append(CriticalPoint("EP", 0.5 * (lo + hi), (lo, hi), (ind_lo, ind_hi)))
    if check_sampling:
        _check_sampling(path, points, [c.param for c in out])
    return out


def _det_at(path: ParamPath, x: float) -> float:
    return determinant(build(path.model_at(x)))


def _det_scale(path: ParamPath, x: float) -> float:
    m = np.asarray(build(path.model_at(x)))
    return float(np.linalg.norm(m, 2)) ** m.shape[0]


def locate_dps(path: ParamPath, tol: float | None = None, opts: SolverOptions | None = None, *,
               points: list[PhasePoint] | None = None, eps: list[CriticalPoint] | None = None,
               parallel: int | None = None) -> list[CriticalPoint]:
    """Zeros of ``det M`` along the path.

    Sign changes between samples are refined with Brent's method. Sampled
    local minima of ``|det|`` without a sign change are refined as roots of
    a central-difference derivative and kept (``crossing=False``) if the
    determinant there is below ``1e-10`` of ``||M||^(2N)``. A DP within
    ``COINCIDENCE_FACTOR * tol`` of an EP becomes kind ``EP_DP``.
    """
    opts = opts or DEFAULT_OPTIONS
    tol = _default_tol(path, tol)
    if points is None:
        points = scan(path, opts, parallel=parallel)
    if eps is None:
        eps = locate_eps(path, tol, opts, points=points, check_sampling=False)
    good = [p for p in points if p.label != FAILED]
    f = lambda x: _det_at(path, x)  # noqa: E731
    found: list[CriticalPoint] = []

    for i, a in enumerate(good):
        if a.det == 0.0:
            prev = good[i - 1].det if i > 0 else math.nan
            nxt = good[i + 1].det if i + 1 < len(good) else math.nan
            found.append(CriticalPoint("DP", a.param, (a.param, a.param), (prev, nxt), crossing=bool(prev * nxt < 0)))
        elif i + 1 < len(good) and a.det * good[i + 1].det < 0:
            b = good[i + 1]
            x = brentq(f, a.param, b.param, xtol=min(tol, 1e-12 * (1 + abs(a.param))), rtol=1e-15)
            lo, hi = max(a.param, x - tol / 2), min(b.param, x + tol / 2)
            found.append(CriticalPoint("DP", x, (lo, hi), (f(lo), f(hi))))

    h = 1e-5 * path.span
    df = lambda x: (f(x + h) - f(x - h)) / (2 * h)  # noqa: E731
    for a, b, c in zip(good, good[1:], good[2:]):
        if not (abs(b.det) <= abs(a.det) and abs(b.det) <= abs(c.det)):
            continue
        if a.det * b.det <= 0 or b.det * c.det <= 0:
            continue  # sign change: handled above
        lo, hi = a.param, c.param
        try:
            dlo, dhi = df(lo), df(hi)
            if dlo * dhi > 0:
                continue
            x = brentq(df, lo, hi, xtol=1e-14 * (1 + abs(b.param)), rtol=1e-15)
        except (ValueError, HBError, ArithmeticError):
            continue
        val = f(x)
        if abs(val) <= 1e-10 * _det_scale(path, x):
            found.append(CriticalPoint("DP", x, (x - h, x + h), (f(x - h), f(x + h)), crossing=False))

    found.sort(key=lambda c: c.param)
    window = COINCIDENCE_FACTOR * tol
    out = []
    for dp in found:
        near = [e for e in eps if abs(e.param - dp.param) <= window]
        if near:
            ep = min(near, key=lambda e: abs(e.param - dp.param))
            dp = CriticalPoint("EP_DP", dp.param, dp.bracket, dp.indicators, dp.crossing, ep.param)
        if out and abs(out[-1].param - dp.param) <= tol:
            continue
        out.append(dp)
    return out


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float
    label: str


@dataclass(frozen=True)
class PhaseSequence:
    intervals: tuple[Interval, ...]
    boundaries: tuple[CriticalPoint, ...]
    critical: tuple[CriticalPoint, ...]
    points: tuple[PhasePoint, ...] = field(repr=False, default=())

    @property
    def labels(self) -> list[str]:
        return [iv.label for iv in self.intervals]


def critical_points(path: ParamPath, tol: float | None = None, opts: SolverOptions | None = None, *,
                    points: list[PhasePoint] | None = None, parallel: int | None = None) -> list[CriticalPoint]:
    """EPs and DPs merged: EPs that coincide with a DP appear once, as EP_DP."""
    opts = opts or DEFAULT_OPTIONS
    tol = _default_tol(path, tol)
    if points is None:
        points = scan(path, opts, parallel=parallel)
    eps = locate_eps(path, tol, opts, points=points)
    dps = locate_dps(path, tol, opts, points=points, eps=eps)
    merged = [e for e in eps if not any(d.kind == "EP_DP" and d.partner == e.param for d in dps)]
    merged += dps
    merged.sort(key=lambda c: c.param)
    return merged


def phase_sequence(path: ParamPath, tol: float | None = None, opts: SolverOptions | None = None, *,
                   points: list[PhasePoint] | None = None, parallel: int | None = None) -> PhaseSequence:
    """Maximal constant-label intervals with typed boundaries.

    Boundaries are the critical points where the label changes (EP or
    EP_DP); DPs inside an interval (for instance tangential ones) are kept
    in ``critical`` only.
    """
    opts = opts or DEFAULT_OPTIONS
    if points is None:
        points = scan(path, opts, parallel=parallel)
    crit = critical_points(path, tol, opts, points=points)
    good = [p for p in points if p.label != FAILED]
    if not good:
        raise PreconditionError("every scan point failed")
    bounds = [c for c in crit if c.kind in ("EP", "EP_DP") and _changes_label(c, path, opts)]
    intervals = []
    lo, label = path.lo, good[0].label
    for b in bounds:
        intervals.append(Interval(lo, b.param, label))
        lo, label = b.param, (NP if label == SP else SP)
    intervals.append(Interval(lo, path.hi, label))
    return PhaseSequence(tuple(intervals), tuple(bounds), tuple(crit), tuple(points))


def _changes_label(c: CriticalPoint, path: ParamPath, opts: SolverOptions) -> bool:
    if c.kind == "EP":
        return True
    # an EP_DP counts as a boundary only through its EP partner
    return c.partner is not None


__all__ = [
    "NP", "SP", "FAILED", "ParamPath", "PhasePoint", "CriticalPoint", "Interval", "PhaseSequence",
    "SamplingWarning", "indicator", "classify", "evaluate", "scan", "locate_eps", "locate_dps",
    "critical_points", "phase_sequence",
]
