"""Independent validators for the production solver.

* :func:`small_eigenvalues` — characteristic polynomial by Faddeev–LeVerrier
  and closed-form roots (quadratic, or Ferrari's quartic with a Cardano
  resolvent) for one- and two-mode HB matrices.
* :func:`fock_diagonalize` — the quadratic Hamiltonian written out in a
  truncated number basis and diagonalized as a Hermitian matrix.

Fock-space convention (matching the HB builder)::

    H = sum_n omega_n a_n^dag a_n + sum_n (chi_n a_n^2 + h.c.)
        + sum_{i != j} lam_ij a_i a_j^dag + sum_{i < j} (g_ij a_i a_j + h.c.)
"""
from __future__ import annotations

import cmath
import itertools
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .eigen import SolverOptions, eigenvalues, particle_energies
from .errors import ConvergenceError, PreconditionError
from .hbmatrix import as_array, build
from .model import QuadraticHamiltonian
from .phase import NP, classify

MAX_FOCK_DIM = 20000
#: blocks up to this size use the in-house Jacobi; larger ones LAPACK's eigvalsh
JACOBI_MAX_DIM = 400


# --------------------------------------------------------------------------
# closed-form small spectra


def faddeev_leverrier(a) -> np.ndarray:
    """Coefficients ``[1, c_1, ..., c_n]`` of ``det(E I - A)``, highest power first."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(a)
    eye = np.eye(n)
    for k in range(1, n + 1):
        m = a @ m + coeffs[-1] * eye
        coeffs.append(-np.trace(a @ m) / k)
    return np.array(coeffs)


def _quadratic(b: complex, c: complex) -> tuple[complex, complex]:
    """Roots of ``x^2 + b x + c`` without cancellation."""
    d = cmath.sqrt(b * b - 4 * c)
    if (b.conjugate() * d).real < 0:
        d = -d
    q = -0.5 * (b + d)
    if q == 0:
        return 0j, 0j
    return q, c / q


def _cubic(a: complex, b: complex, c: complex) -> list[complex]:
    """Roots of ``x^3 + a x^2 + b x + c`` (Cardano with complex cube roots)."""
    p = b - a * a / 3
    q = 2 * a**3 / 27 - a * b / 3 + c
    disc = cmath.sqrt(q * q / 4 + p**3 / 27)
    u3 = -q / 2 + disc
    if abs(u3) < abs(-q / 2 - disc):
        u3 = -q / 2 - disc
    roots = []
    if u3 == 0:
        return [-a / 3] * 3
    u = u3 ** (1 / 3)
    w = cmath.exp(2j * math.pi / 3)
    for k in range(3):
        uk = u * w**k
        roots.append(uk - p / (3 * uk) - a / 3)
    return roots


def _polish(coeffs, x: complex, steps: int = 3) -> complex:
    """A few guarded Newton steps on the polynomial."""
    p = np.poly1d(coeffs)
    dp = p.deriv()
    for _ in range(steps):
        fx, dfx = p(x), dp(x)
        if dfx == 0:
            break
        y = x - fx / dfx
        if abs(p(y)) >= abs(fx):
            break
        x = y
    return complex(x)


def _quartic(c1, c2, c3, c4) -> list[complex]:
    """Roots of ``x^4 + c1 x^3 + c2 x^2 + c3 x + c4`` by Ferrari's method."""
    shift = -c1 / 4
    p = c2 - 3 * c1 * c1 / 8
    q = c3 - c1 * c2 / 2 + c1**3 / 8
    r = c4 - c1 * c3 / 4 + c1 * c1 * c2 / 16 - 3 * c1**4 / 256
    scale = max(abs(p), abs(r) ** 0.5, abs(q) ** (2 / 3), 1e-300)
    if abs(q) <= 1e-14 * scale**1.5:
        # biquadratic: y^2 solves z^2 + p z + r = 0
        ys = []
        for z in _quadratic(p, r):
            s = cmath.sqrt(z)
            ys += [s, -s]
    else:
        # (y^2 + p/2 + m)^2 = 2m (y - q/(4m))^2 with 8m^3 + 8p m^2 + (2p^2 - 8r) m - q^2 = 0
        m = max(_cubic(p, p * p / 4 - r, -q * q / 8), key=abs)
        s = cmath.sqrt(2 * m)
        t = q / (2 * s)
        ys = [*_quadratic(-s, p / 2 + m + t), *_quadratic(s, p / 2 + m - t)]
    return [y + shift for y in ys]


def small_eigenvalues(m) -> np.ndarray:
    """Eigenvalues of a 2x2 or 4x4 HB matrix from closed-form polynomial roots."""
    a = as_array(m)
    n2 = a.shape[0]
    if n2 not in (2, 4):
        raise PreconditionError(f"closed-form oracle supports one or two modes, got {n2 // 2}")
    coeffs = faddeev_leverrier(a)
    if n2 == 2:
        roots = list(_quadratic(coeffs[1], coeffs[2]))
    else:
        roots = _quartic(*coeffs[1:])
    return np.array([_polish(coeffs, x) for x in roots])


# --------------------------------------------------------------------------
# Hermitian Jacobi


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Rounds of disjoint index pairs covering every pair once (circle method)."""
    m = n + (n % 2)
    idx = list(range(m))
    rounds = []
    for _ in range(m - 1):
        p = np.array(idx[: m // 2])
        q = np.array(idx[m // 2:][::-1])
        keep = (p < n) & (q < n)
        p, q = p[keep], q[keep]
        lo, hi = np.minimum(p, q), np.maximum(p, q)
        rounds.append((lo, hi))
        idx = [idx[0], idx[-1], *idx[1:-1]]
    return rounds


def jacobi_eigvalsh(h, *, tol: float = 1e-14, max_sweeps: int = 60) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Each sweep visits all pairs in round-robin order, applying the
    ``n/2`` disjoint rotations of a round at once.
    """
    a = np.array(h, dtype=complex)
    n = a.shape[0]
    if n == 1:
        return np.array([a[0, 0].real])
    norm = np.linalg.norm(a) or 1.0
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol * norm:
            return np.sort(np.diag(a).real)
        for p, q in rounds:
            b = a[p, q]
            mag = np.abs(b)
            active = mag > 1e-300
            if not active.any():
                continue
            phase = np.where(active, b / np.where(active, mag, 1.0), 1.0)
            app, aqq = a[p, p].real, a[q, q].real
            tau = np.where(active, (aqq - app) / (2 * np.where(active, mag, 1.0)), 0.0)
            t = np.where(active, np.sign(tau + (tau == 0)) / (np.abs(tau) + np.sqrt(1 + tau * tau)), 0.0)
            c = 1 / np.sqrt(1 + t * t)
            s = t * c
            # V = diag(1, conj(phase)) @ [[c, s], [-s, c]]
            v00, v01 = c, s
            v10, v11 = -s * phase.conj(), c * phase.conj()
            cp, cq = a[:, p].copy(), a[:, q].copy()
            a[:, p] = cp * v00 + cq * v10
            a[:, q] = cp * v01 + cq * v11
            rp, rq = a[p, :].copy(), a[q, :].copy()
            a[p, :] = np.conj(v00)[:, None] * rp + np.conj(v10)[:, None] * rq
            a[q, :] = np.conj(v01)[:, None] * rp + np.conj(v11)[:, None] * rq
            a[p, q] = 0
            a[q, p] = 0
    raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps", partial=np.sort(np.diag(a).real))


# --------------------------------------------------------------------------
# truncated Fock space


@dataclass(frozen=True)
class FockSpectrum:
    n_max: int
    energies: np.ndarray

    @property
    def e0(self) -> float:
        return float(self.energies[0])

    @property
    def gap(self) -> float:
        return float(self.energies[1] - self.energies[0])


def fock_hamiltonian(h: QuadraticHamiltonian, n_max: int):
    """Sparse (COO) Hermitian matrix of ``h`` on ``{0..n_max}^N``, row-major basis."""
    n = h.n_modes
    d = n_max + 1
    dim = d**n
    if dim > MAX_FOCK_DIM:
        raise PreconditionError(f"Fock dimension {dim} exceeds the cap {MAX_FOCK_DIM}")
    states = np.array(list(itertools.product(range(d), repeat=n)), dtype=int).reshape(dim, n)
    strides = d ** np.arange(n - 1, -1, -1)
    rows, cols, vals = [], [], []

    def add(src, dst_states, amp):
        ok = np.all((dst_states >= 0) & (dst_states <= n_max), axis=1) & (amp != 0)
        rows.append((dst_states[ok] @ strides))
        cols.append(src[ok])
        vals.append(amp[ok])

    idx = np.arange(dim)
    rows.append(idx)
    cols.append(idx)
    vals.append((states @ np.asarray(h.omega, float)).astype(complex))
    for i in range(n):
        ni = states[:, i].astype(float)
        if h.chi[i] != 0:
            # chi a^2 |n> = chi sqrt(n (n-1)) |n-2>, and the conjugate raising term
            dst = states.copy()
            dst[:, i] -= 2
            add(idx, dst, h.chi[i] * np.sqrt(ni * (ni - 1)))
            dst = states.copy()
            dst[:, i] += 2
            add(idx, dst, np.conj(h.chi[i]) * np.sqrt((ni + 1) * (ni + 2)))
        for j in range(n):
            if i == j:
                continue
            nj = states[:, j].astype(float)
            if h.lam[i, j] != 0:
                # lam_ij a_j^dag a_i: one quantum moves from mode i to mode j
                dst = states.copy()
                dst[:, i] -= 1
                dst[:, j] += 1
                add(idx, dst, h.lam[i, j] * np.sqrt(ni * (nj + 1)))
            if i < j and h.g[i, j] != 0:
                dst = states.copy()
                dst[:, i] -= 1
                dst[:, j] -= 1
                add(idx, dst, h.g[i, j] * np.sqrt(ni * nj))
                dst = states.copy()
                dst[:, i] += 1
                dst[:, j] += 1
                add(idx, dst, np.conj(h.g[i, j]) * np.sqrt((ni + 1) * (nj + 1)))
    r, c, v = (np.concatenate(x) for x in (rows, cols, vals))
    return coo_matrix((v, (r, c)), shape=(dim, dim)).tocsr()


def fock_diagonalize(h: QuadraticHamiltonian, n_max: int, k: int = 2) -> FockSpectrum:
    """Lowest ``k`` eigenvalues of ``h`` truncated to ``n_max`` quanta per mode.

    The matrix splits into blocks that no term connects (number parity,
    and quasi-momentum for the ring); each block is diagonalized on its own.
    """
    opts = SolverOptions()
    if classify(eigenvalues(build(h), opts)) != NP:
        warnings.warn("model is not in the normal phase; the truncated spectrum is a truncation artifact",
                      RuntimeWarning, stacklevel=2)
    hm = fock_hamiltonian(h, n_max)
    ncomp, comp = connected_components(abs(hm) > 0, directed=False)
    energies = []
    for c in range(ncomp):
        sel = np.flatnonzero(comp == c)
        block = hm[sel][:, sel].toarray()
        if len(sel) <= JACOBI_MAX_DIM:
            ev = jacobi_eigvalsh(block)
        else:
            ev = np.linalg.eigvalsh(block)
        energies.append(ev[: max(k, 1)])
    allv = np.sort(np.concatenate(energies))
    return FockSpectrum(n_max, allv[:k])


def ground_energy_formula(h: QuadraticHamiltonian, opts: SolverOptions | None = None) -> float:
    """``(sum Omega - sum omega) / 2`` with ``Omega`` the positive-norm branch energies."""
    om = particle_energies(build(h), opts=opts)
    return 0.5 * float(np.sum(om.real) - np.sum(h.omega))


@dataclass(frozen=True)
class GapReport:
    n_max: int
    fock_gap: float
    hb_gap: float
    abs_dev: float
    rel_dev: float
    fock_e0: float
    formula_e0: float
    e0_dev: float
    truncation_limited: bool

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def gap_check(h: QuadraticHamiltonian, n_max: int, *, rel_tol: float = 1e-3) -> GapReport:
    """Truncated-Fock gap and ground energy against the HB spectrum.

    ``truncation_limited`` is set when the relative gap deviation exceeds
    ``rel_tol`` — typical close to a DP, where the ground state spreads to
    high occupation numbers.
    """
    fs = fock_diagonalize(h, n_max, k=2)
    om = particle_energies(build(h))
    hb_gap = float(np.min(om.real))
    e0 = 0.5 * float(np.sum(om.real) - np.sum(h.omega))
    dev = abs(fs.gap - hb_gap)
    rel = dev / max(abs(hb_gap), 1e-300)
    return GapReport(n_max, fs.gap, hb_gap, dev, rel, fs.e0, e0, abs(fs.e0 - e0), rel > rel_tol)


__all__ = [
    "faddeev_leverrier", "small_eigenvalues", "jacobi_eigvalsh", "FockSpectrum", "fock_hamiltonian",
    "fock_diagonalize", "ground_energy_formula", "GapReport", "gap_check",
]
