"""Dense complex eigenvalues: balancing, Householder Hessenberg, shifted QR."""
from __future__ import annotations

import cmath
import math

import numpy as np

from .errors import ConvergenceError

DEFLATE_TOL = 1e-14
_RADIX = 2.0


def balance(a: np.ndarray) -> np.ndarray:
    """Parlett-Reinsch balancing by powers of two (an exact similarity)."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    converged = False
    while not converged:
        converged = True
        absa = np.abs(a)
        np.fill_diagonal(absa, 0.0)
        for i in range(n):
            c = float(np.sum(absa[:, i]))
            r = float(np.sum(absa[i, :]))
            if c <= 0.0 or r <= 0.0:
                continue
            s = c + r
            f = 1.0
            g = r / _RADIX
            while c < g:
                f *= _RADIX
                c *= _RADIX * _RADIX
            g = r * _RADIX
            while c >= g:
                f /= _RADIX
                c /= _RADIX * _RADIX
            if (c + r) / f < 0.95 * s:
                converged = False
                a[:, i] *= f
                a[i, :] /= f
                absa[:, i] *= f
                absa[i, :] /= f
    return a


def hessenberg(a: np.ndarray) -> np.ndarray:
    """Upper Hessenberg form by Householder reflections."""
    h = np.array(a, dtype=complex)
    n = h.shape[0]
    for k in range(n - 2):
        x = h[k + 1:, k].copy()
        alpha = np.linalg.norm(x)
        if alpha == 0.0:
            continue
        x0 = x[0]
        phase = x0 / abs(x0) if x0 != 0 else 1.0
        v = x
        v[0] = x0 + phase * alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        # H <- P H P with P = I - 2 v v^H acting on rows/cols k+1..n-1
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h


def _givens(x: complex, y: complex):
    """``(c, s, r)`` with ``[[c, s], [-conj(s), c]] @ [x, y] = [r, 0]``, c real."""
    ax = abs(x)
    if y == 0:
        return 1.0, 0j, x
    rho = math.hypot(ax, abs(y))
    if ax == 0.0:
        return 0.0, y.conjugate() / abs(y), complex(abs(y))
    ph = x / ax
    return ax / rho, ph * y.conjugate() / rho, ph * rho


def _eig2(a: complex, b: complex, c: complex, d: complex) -> tuple[complex, complex]:
    """Both eigenvalues of ``[[a, b], [c, d]]``, avoiding cancellation."""
    mean = 0.5 * (a + d)
    half = 0.5 * (a - d)
    disc = cmath.sqrt(half * half + b * c)
    big, small = (mean + disc, mean - disc) if abs(mean + disc) >= abs(mean - disc) else (mean - disc, mean + disc)
    if big == 0:
        return 0j, 0j
    # det/big avoids cancellation in mean - disc, but is pure noise when both
    # eigenvalues are tiny (nilpotent-like blocks); take the better-conditioned form
    if (abs(a * d) + abs(b * c)) / abs(big) < abs(mean) + abs(disc):
        small = (a * d - b * c) / big
    return big, small


def _wilkinson(a: complex, b: complex, c: complex, d: complex) -> complex:
    """Eigenvalue of ``[[a, b], [c, d]]`` closer to ``d``."""
    m1, m2 = _eig2(a, b, c, d)
    return m1 if abs(m1 - d) <= abs(m2 - d) else m2


def hessenberg_qr(h: np.ndarray, max_iter: int) -> np.ndarray:
    """Eigenvalues of an upper Hessenberg matrix by single-shift complex QR.

    Operates on the active unreduced window only. Deflates when
    ``|h[k, k-1]| < DEFLATE_TOL * (|h[k-1, k-1]| + |h[k, k]|)``; exceptional
    shifts at iterations 10 and 20 of a window break cycling.
    """
    h = [list(map(complex, row)) for row in np.asarray(h)]
    n = len(h)
    eigs: list = [None] * n
    hi = n - 1
    total = 0
    its = 0
    norm = math.sqrt(sum(abs(z) ** 2 for row in h for z in row)) or 1.0
    while hi >= 0:
        # locate the start of the unreduced window ending at hi
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1][lo - 1]) + abs(h[lo][lo])
            if s == 0.0:
                s = norm
            if abs(h[lo][lo - 1]) < DEFLATE_TOL * s:
                h[lo][lo - 1] = 0j
                break
            lo -= 1
        if lo == hi:
            eigs[hi] = h[hi][hi]
            hi -= 1
            its = 0
            continue
        if lo == hi - 1:
            eigs[lo], eigs[hi] = _eig2(h[lo][lo], h[lo][hi], h[hi][lo], h[hi][hi])
            hi -= 2
            its = 0
            continue
        total += 1
        its += 1
        if total > max_iter:
            found = [e for e in eigs if e is not None]
            raise ConvergenceError(
                f"shifted QR did not converge within {max_iter} iterations",
                partial=np.array(found, dtype=complex),
            )
        if its in (10, 20):
            mu = h[hi][hi] + 0.75 * abs(h[hi][hi - 1])
        else:
            mu = _wilkinson(h[hi - 1][hi - 1], h[hi - 1][hi], h[hi][hi - 1], h[hi][hi])
        # implicit single-shift bulge chase on rows/cols lo..hi
        x = h[lo][lo] - mu
        y = h[lo + 1][lo]
        for k in range(lo, hi):
            c, s, _ = _givens(x, y)
            sc = s.conjugate()
            rk, rk1 = h[k], h[k + 1]
            for j in range(max(lo, k - 1), hi + 1):
                t1, t2 = rk[j], rk1[j]
                rk[j] = c * t1 + s * t2
                rk1[j] = -sc * t1 + c * t2
            for i in range(lo, min(k + 2, hi) + 1):
                row = h[i]
                t1, t2 = row[k], row[k + 1]
                row[k] = c * t1 + sc * t2
                row[k + 1] = -s * t1 + c * t2
            if k < hi - 1:
                x = h[k + 1][k]
                y = h[k + 2][k]
    return np.array(eigs, dtype=complex)


def eigenvalues(a: np.ndarray, *, balance_first: bool = True, max_iter: int | None = None) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if n == 0:
        return np.zeros(0, complex)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if max_iter is None:
        max_iter = 100 * n
    b = balance(a) if balance_first else a
    return hessenberg_qr(hessenberg(b), max_iter)
