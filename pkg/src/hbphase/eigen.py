"""Spectra of HB matrices: eigenvalues, Bogoliubov vectors, (E, -E) pairing
and branch labels.

Branch ``n`` is the eigenvalue that continues from ``omega[n]`` when all
couplings are switched on from zero. Labels are tracked numerically along
that homotopy and are only trusted up to the first eigenvalue collision.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import _qr
from .errors import ConvergenceError, PairingError, PreconditionError
from .hbmatrix import HBMatrix, as_array, build, lu_factor, lu_solve
from .model import QuadraticHamiltonian


@dataclass(frozen=True)
class SolverOptions:
    balance: bool = True
    max_sweeps: int | None = None  # None -> 100 * dimension
    tol_im: float = 1e-8
    seed: int = 0
    pair_tol: float = 1e-8


DEFAULT_OPTIONS = SolverOptions()


class DefectiveEigenvalueWarning(UserWarning):
    """Eigenvector requested at (or extremely near) an exceptional point."""


def eigenvalues(m, opts: SolverOptions | None = None) -> np.ndarray:
    """All eigenvalues of ``m`` from the in-house shifted QR.

    Raises :class:`ConvergenceError` (carrying the eigenvalues found so far)
    when the iteration cap is exhausted.
    """
    opts = opts or DEFAULT_OPTIONS
    return _qr.eigenvalues(as_array(m), balance_first=opts.balance, max_iter=opts.max_sweeps)


def backward_errors(m, eigs) -> np.ndarray:
    """``min_v ||M v - E v|| / ||M||`` for each ``E`` (smallest singular value)."""
    a = as_array(m)
    norm = np.linalg.norm(a, 2) or 1.0
    eye = np.eye(a.shape[0])
    return np.array(
        [np.linalg.svd(a - e * eye, compute_uv=False)[-1] / norm for e in eigs]
    )


@dataclass(frozen=True)
class BogoliubovVector:
    eigenvalue: complex
    mu: np.ndarray
    nu: np.ndarray
    norm_sq: float
    residual: float
    defective: bool = False

    @property
    def vector(self) -> np.ndarray:
        return np.concatenate([self.mu, self.nu])


def eigenvector(m, e: complex, opts: SolverOptions | None = None, *, max_iter: int = 50) -> BogoliubovVector:
    """Inverse iteration with shift ``e`` from a seeded random start.

    The returned vector has unit 2-norm with its largest component real and
    positive. ``norm_sq`` is the Bogoliubov norm ``sum |mu|^2 - |nu|^2``;
    it is positive on particle branches, negative on their partners and
    vanishes at an exceptional point, where ``defective`` is set.
    """
    opts = opts or DEFAULT_OPTIONS
    a = as_array(m)
    n2 = a.shape[0]
    scale = np.linalg.norm(a) or 1.0
    rng = np.random.default_rng(opts.seed)
    shifted = a - e * np.eye(n2)
    factors = lu_factor(shifted)
    piv = np.abs(np.diag(factors[0]))
    nudge = 1e-13 * scale
    while np.min(piv) < 1e-14 * scale and nudge < 1e-6 * scale:
        # (numerically) singular: nudge the shift so the solve stays finite; at a
        # Jordan block the pivot only grows like nudge^2, hence the loop
        factors = lu_factor(a - (e + nudge) * np.eye(n2))
        piv = np.abs(np.diag(factors[0]))
        if np.min(piv) > 0:
            break
        nudge *= 10
    v = rng.normal(size=n2) + 1j * rng.normal(size=n2)
    v /= np.linalg.norm(v)
    resid = np.inf
    for _ in range(max_iter):
        w = lu_solve(factors, v)
        w /= np.linalg.norm(w)
        resid = np.linalg.norm(a @ w - e * w) / scale
        change = np.linalg.norm(w - v * (np.vdot(v, w) / abs(np.vdot(v, w) or 1)))
        v = w
        if resid <= 1e-12 or change <= 1e-13:
            break
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    n = n2 // 2
    mu, nu = v[:n], v[n:]
    norm_sq = float(np.sum(np.abs(mu) ** 2) - np.sum(np.abs(nu) ** 2))
    others = eigenvalues(a, opts)
    near = np.sort(np.abs(others - e))
    defective = bool(near.size > 1 and near[1] <= 1e-6 * scale and abs(norm_sq) <= 1e-4)
    # a defective eigenvector is only determined to about sqrt(machine epsilon)
    if resid > (1e-6 if defective else 1e-8):
        raise ConvergenceError(f"inverse iteration did not converge (residual {resid:.2e})", partial=v)
    if defective:
        warnings.warn(
            f"eigenvalue {e:.6g} is (nearly) defective; eigenvector is ill-conditioned",
            DefectiveEigenvalueWarning,
            stacklevel=2,
        )
    return BogoliubovVector(complex(e), mu.copy(), nu.copy(), norm_sq, float(resid), defective)


# --------------------------------------------------------------------------
# pairing


@dataclass(frozen=True)
class SpectralPair:
    e_plus: complex
    e_minus: complex

    @property
    def omega_sq(self) -> complex:
        return self.e_plus**2

    @property
    def defect(self) -> float:
        return abs(self.e_plus + self.e_minus)


@dataclass(frozen=True)
class PairedSpectrum:
    """Eigenvalues grouped as ``(E, -E)``.

    ``labels`` maps branch index ``n`` to an index into ``pairs``. Labels are
    reliable for homotopy parameter ``s < valid_up_to``; pairs listed in
    ``unordered`` took part in a collision before ``s = 1`` and their branch
    identity (or the orientation of ``e_plus``/``e_minus``) is not defined.
    """

    pairs: tuple[SpectralPair, ...]
    residuals: np.ndarray
    labels: dict | None = None
    valid_up_to: float = 1.0
    unordered: frozenset = field(default_factory=frozenset)

    @property
    def values(self) -> np.ndarray:
        return np.array([e for p in self.pairs for e in (p.e_plus, p.e_minus)])

    def branch(self, n: int) -> SpectralPair:
        if self.labels is None:
            raise ValueError("spectrum carries no branch labels")
        return self.pairs[self.labels[n]]

    def branch_energies(self) -> np.ndarray:
        """``Omega_n`` for every branch, in branch order."""
        if self.labels is None:
            raise ValueError("spectrum carries no branch labels")
        return np.array([self.pairs[self.labels[n]].e_plus for n in range(len(self.pairs))])


def _lex(z: complex):
    return (z.real, z.imag)


def _orient(a: complex, b: complex) -> tuple[complex, complex]:
    """Order a pair so that ``e_plus`` has positive real part (or imaginary if Re ~ 0)."""
    scale = max(abs(a), abs(b), 1e-300)
    if abs(a.real - b.real) > 1e-12 * scale:
        return (a, b) if a.real > b.real else (b, a)
    return (a, b) if a.imag >= b.imag else (b, a)


def pair(eigs, opts: SolverOptions | None = None) -> list[SpectralPair]:
    """Greedy ``E`` / ``-E`` matching, ties broken by lexicographic (Re, Im)."""
    opts = opts or DEFAULT_OPTIONS
    vals = sorted((complex(e) for e in eigs), key=_lex, reverse=True)
    if len(vals) % 2:
        raise PairingError("odd number of eigenvalues")
    scale = max((abs(e) for e in vals), default=0.0)
    used = [False] * len(vals)
    out = []
    for i, e in enumerate(vals):
        if used[i]:
            continue
        used[i] = True
        best, best_d = None, np.inf
        for j, f in enumerate(vals):
            if used[j]:
                continue
            d = abs(f + e)
            if d < best_d:
                best, best_d = j, d
        used[best] = True
        f = vals[best]
        if best_d > opts.pair_tol * (1 + scale):
            raise PairingError(
                f"no partner for {e:.6g}: closest is {f:.6g} (|E + E'| = {best_d:.2e}); "
                "the matrix does not have HB symmetry"
            )
        out.append(SpectralPair(*_orient(e, f)))
    out.sort(key=lambda p: _lex(p.e_plus), reverse=True)
    return out


# --------------------------------------------------------------------------
# labelling by homotopy in the coupling strength


@dataclass
class _Track:
    s: list
    values: list
    collisions: list  # (s, i, j)


def _assign(pred: np.ndarray, new: np.ndarray) -> np.ndarray:
    cost = np.abs(pred[:, None] - new[None, :])
    rows, cols = linear_sum_assignment(cost)
    out = np.empty_like(new)
    out[rows] = new[cols]
    return out


def track_branches(h: QuadraticHamiltonian, opts: SolverOptions | None = None, *,
                   ds_init: float = 1 / 32, ds_min: float = 1e-7, ds_max: float = 1 / 16) -> _Track:
    """Follow all ``2N`` eigenvalues while couplings are scaled from 0 to 1.

    Index ``i < N`` starts at ``+omega[i]``, index ``N + i`` at ``-omega[i]``.
    Between steps, eigenvalues are matched to a linear prediction by minimal
    total displacement. The step is halved whenever two predicted positions
    are closer than ten times the prediction error; if that persists down to
    ``ds_min`` the step is taken and a collision is recorded.
    """
    opts = opts or DEFAULT_OPTIONS
    n = h.n_modes
    cur = np.concatenate([h.omega, -h.omega]).astype(complex)
    scale = max(float(np.max(np.abs(as_array(build(h))))), 1e-300)
    coinc = 1e-9 * scale
    vel = np.zeros_like(cur)
    s, ds = 0.0, ds_init
    track = _Track([0.0], [cur.copy()], [])
    while s < 1.0:
        step = min(ds, 1.0 - s)
        s_new = 1.0 if step == 1.0 - s else s + step
        new = eigenvalues(build(h.scaled(s_new)), opts)
        pred = cur + vel * step
        matched = _assign(pred, new)
        err = float(np.max(np.abs(matched - pred)))
        dp = np.abs(pred[:, None] - pred[None, :])
        dv = np.abs(matched[:, None] - matched[None, :])
        dc = np.abs(cur[:, None] - cur[None, :])
        np.fill_diagonal(dp, np.inf)
        # values that were already degenerate (e.g. equal bare frequencies)
        # cannot be separated by shrinking the step and are not collisions
        close = (dp < 10 * err) & (dv > coinc) & (dc > coinc)
        if close.any() and step > ds_min:
            ds = step / 2
            continue
        if close.any():
            i, j = np.unravel_index(np.argmin(np.where(close, dp, np.inf)), dp.shape)
            if not any(c[1:] == (min(i, j), max(i, j)) for c in track.collisions):
                track.collisions.append((s_new, int(min(i, j)), int(max(i, j))))
            vel = np.zeros_like(cur)
        else:
            vel = (matched - cur) / step
        cur = matched
        s = s_new
        track.s.append(s)
        track.values.append(cur.copy())
        if not close.any():
            ds = min(2 * step, ds_max)
    return track


def pair_and_label(eigs, h: QuadraticHamiltonian, opts: SolverOptions | None = None) -> PairedSpectrum:
    """Pair ``eigs`` (the spectrum of ``build(h)``) and attach branch labels."""
    opts = opts or DEFAULT_OPTIONS
    eigs = np.asarray(eigs, dtype=complex)
    if eigs.size % 2:
        raise PreconditionError("eigenvalue list must have even length")
    pairs = pair(eigs, opts)
    n = h.n_modes
    track = track_branches(h, opts)
    final = track.values[-1]
    coll = [c for c in track.collisions if c[0] < 1.0]
    valid = min((c[0] for c in coll), default=1.0)
    unordered = frozenset(k % n for c in coll for k in c[1:])
    labels = {}
    oriented = []
    taken = set()
    for b in range(n):
        plus, minus = final[b], final[n + b]
        costs = []
        for k, p in enumerate(pairs):
            if k in taken:
                costs.append(np.inf)
                continue
            costs.append(min(abs(p.e_plus - plus) + abs(p.e_minus - minus),
                             abs(p.e_minus - plus) + abs(p.e_plus - minus)))
        k = int(np.argmin(costs))
        taken.add(k)
        labels[b] = k
    for k, p in enumerate(pairs):
        b = next((bb for bb, kk in labels.items() if kk == k), None)
        if b is not None and b not in unordered and abs(p.e_minus - final[b]) < abs(p.e_plus - final[b]):
            p = SpectralPair(p.e_minus, p.e_plus)
        oriented.append(p)
    return PairedSpectrum(
        tuple(oriented),
        np.zeros(0),
        labels,
        valid,
        unordered,
    )


def spectrum(h: QuadraticHamiltonian, opts: SolverOptions | None = None, *, label: bool = False,
             with_residuals: bool = False) -> PairedSpectrum:
    """Convenience: build, solve, pair and optionally label."""
    m = build(h)
    eigs = eigenvalues(m, opts)
    res = backward_errors(m, eigs) if with_residuals else np.zeros(0)
    if label:
        ps = pair_and_label(eigs, h, opts)
    else:
        ps = PairedSpectrum(tuple(pair(eigs, opts)), res)
    if with_residuals:
        ps = PairedSpectrum(ps.pairs, res, ps.labels, ps.valid_up_to, ps.unordered)
    return ps


def particle_energies(m, eigs=None, opts: SolverOptions | None = None) -> np.ndarray:
    """For each pair, the member whose eigenvector has positive Bogoliubov norm."""
    opts = opts or DEFAULT_OPTIONS
    if eigs is None:
        eigs = eigenvalues(m, opts)
    out = []
    for p in pair(eigs, opts):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DefectiveEigenvalueWarning)
            v = eigenvector(m, p.e_plus, opts)
        out.append(p.e_plus if v.norm_sq >= 0 else p.e_minus)
    return np.array(out)


__all__ = [
    "SolverOptions", "BogoliubovVector", "SpectralPair", "PairedSpectrum",
    "DefectiveEigenvalueWarning", "eigenvalues", "backward_errors", "eigenvector", "pair",
    "pair_and_label", "track_branches", "spectrum", "particle_energies", "HBMatrix",
]
