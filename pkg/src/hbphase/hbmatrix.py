"""Hopfield-Bogoliubov (HB) matrix of a quadratic Hamiltonian.

For ``N`` modes the matrix acts on coefficient vectors ``(mu_1..mu_N, nu_1..nu_N)``
and has the block form ``[[A, B], [-B*, -A*]]`` with

    A[n, n] = omega[n],   A[i, j] = lam[i, j]
    B[n, n] = -2 chi[n],  B[i, j] = -g[i, j]
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidHamiltonian, NumericError
from .model import QuadraticHamiltonian, validate

MAX_MODES = 64


@dataclass(frozen=True, eq=False)
class HBMatrix:
    n_modes: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=complex)
        if e.shape != (2 * self.n_modes, 2 * self.n_modes):
            raise ValueError(f"entries must be {2 * self.n_modes}x{2 * self.n_modes}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @property
    def a_block(self) -> np.ndarray:
        n = self.n_modes
        return self.entries[:n, :n]

    @property
    def b_block(self) -> np.ndarray:
        n = self.n_modes
        return self.entries[:n, n:]

    @classmethod
    def from_array(cls, a) -> "HBMatrix":
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] % 2:
            raise ValueError("HB matrix must be square with even dimension")
        return cls(a.shape[0] // 2, a)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)


def as_array(m) -> np.ndarray:
    return m.entries if isinstance(m, HBMatrix) else np.asarray(m, dtype=complex)


def build(h: QuadraticHamiltonian) -> HBMatrix:
    """Assemble the HB matrix; rejects Hamiltonians that fail :func:`validate`."""
    bad = validate(h)
    if bad:
        raise InvalidHamiltonian(bad)
    n = h.n_modes
    if n > MAX_MODES:
        raise InvalidHamiltonian([f"n_modes={n} exceeds the supported maximum {MAX_MODES}"])
    a = np.array(h.lam, dtype=complex)
    a[np.diag_indices(n)] = h.omega
    b = -np.array(h.g, dtype=complex)
    b[np.diag_indices(n)] = -2 * h.chi
    m = np.empty((2 * n, 2 * n), dtype=complex)
    m[:n, :n] = a
    m[:n, n:] = b
    m[n:, :n] = -b.conj()
    m[n:, n:] = -a.conj()
    return HBMatrix(n, m)


def c_symmetry(n: int) -> np.ndarray:
    """The operator ``C = [[0, I], [-I, 0]]`` used in the pairing symmetry check."""
    eye = np.eye(n)
    z = np.zeros((n, n))
    return np.block([[z, eye], [-eye, z]])


def symmetry_residual(m) -> float:
    """Max-norm of ``C M^T C^-1 + M`` with ``C = [[0, I], [-I, 0]]``.

    For ``A`` Hermitian and ``B`` symmetric the identity ``C M^T C^-1 = -M``
    holds exactly, which is what forces eigenvalues into ``(E, -E)`` pairs.
    The residual is exactly zero for every matrix produced by :func:`build`.
    """
    a = as_array(m)
    n = a.shape[0] // 2
    t = a.T
    # C X C^-1 for X = [[P, Q], [R, S]] is [[S, -R], [-Q, P]]
    cmc = np.empty_like(a)
    cmc[:n, :n] = t[n:, n:]
    cmc[:n, n:] = -t[n:, :n]
    cmc[n:, :n] = -t[:n, n:]
    cmc[n:, n:] = t[:n, :n]
    return float(np.max(np.abs(cmc + a), initial=0.0))


def lu_factor(a: np.ndarray):
    """Doolittle LU with partial pivoting; returns ``(lu, perm, sign)``."""
    lu = np.array(a, dtype=complex)
    n = lu.shape[0]
    perm = np.arange(n)
    sign = 1
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            perm[[k, p]] = perm[[p, k]]
            sign = -sign
        piv = lu[k, k]
        if piv == 0:
            continue
        lu[k + 1:, k] /= piv
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, perm, sign


def lu_solve(factors, b: np.ndarray) -> np.ndarray:
    lu, perm, _ = factors
    n = lu.shape[0]
    y = np.array(b, dtype=complex)[perm]
    for i in range(1, n):
        y[i] -= lu[i, :i] @ y[:i]
    for i in range(n - 1, -1, -1):
        y[i] = (y[i] - lu[i, i + 1:] @ y[i + 1:]) / lu[i, i]
    return y


def complex_determinant(m) -> complex:
    lu, _, sign = lu_factor(as_array(m))
    return sign * complex(np.prod(np.diag(lu)))


def determinant(m, tol: float = 1e-6) -> float:
    """Real determinant of an HB matrix via LU with partial pivoting.

    The spectrum comes in ``(E, -E)`` pairs (and is closed under conjugation),
    so ``det M = prod(-E_k^2)`` is real. A residual imaginary part larger
    than ``tol * (1 + |det|)`` means the input is not a valid HB matrix.
    """
    d = complex_determinant(m)
    if abs(d.imag) > tol * (1 + abs(d)):
        raise NumericError(f"determinant has imaginary part {d.imag:.3g} (|det|={abs(d):.3g})")
    return d.real


def dump_rows(m) -> list[tuple[int, int, float, float]]:
    """``(row, col, re, im)`` for every entry, row-major."""
    a = as_array(m)
    return [
        (i, j, float(a[i, j].real), float(a[i, j].imag))
        for i in range(a.shape[0])
        for j in range(a.shape[1])
    ]
