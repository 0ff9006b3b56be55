"""Quadratic bosonic Hamiltonians and constructors for the physical models.

A Hamiltonian on ``N`` modes is stored as

    H = sum_n omega[n] a_n^dag a_n + (chi[n] a_n^2 + h.c.)
        + sum_{i<j} (g[i, j] a_i a_j + lam[i, j] a_i a_j^dag + h.c.)

``chi[n]`` is always the literal coefficient of ``a_n^2``. Constructors whose
physics is written with a ``(chi a^2 + h.c.)/2`` term halve their input.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import PreconditionError

#: Quasi-momentum ordering of the three-site ring modes.
RING_MOMENTA = (0.0, 2 * math.pi / 3, -2 * math.pi / 3)



def _frozen(a, dtype=complex, ndim=1):
    arr = np.array(a, dtype=dtype)
    if arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class QuadraticHamiltonian:
    """Immutable quadratic Hamiltonian; see the module docstring for conventions."""

    omega: np.ndarray
    chi: np.ndarray
    lam: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float).reshape(-1)
        n = omega.size
        object.__setattr__(self, "omega", _frozen(omega, float))
        object.__setattr__(self, "chi", _frozen(np.reshape(self.chi, -1)))
        lam = np.zeros((n, n), complex) if self.lam is None else self.lam
        g = np.zeros((n, n), complex) if self.g is None else self.g
        object.__setattr__(self, "lam", _frozen(lam, ndim=2))
        object.__setattr__(self, "g", _frozen(g, ndim=2))

    @property
    def n_modes(self) -> int:
        return int(self.omega.size)

    def scaled(self, s: float) -> "QuadraticHamiltonian":
        """Same frequencies with every coupling (chi, lam, g) multiplied by ``s``."""
        return QuadraticHamiltonian(self.omega, s * self.chi, s * self.lam, s * self.g)

    def __eq__(self, other):
        if not isinstance(other, QuadraticHamiltonian):
            return NotImplemented
        return all(
            np.array_equal(getattr(self, f), getattr(other, f))
            for f in ("omega", "chi", "lam", "g")
        )

    __hash__ = None


def hamiltonian(omega, chi=None, lam=None, g=None) -> QuadraticHamiltonian:
    """Build a Hamiltonian, filling absent couplings with zeros."""
    n = len(np.atleast_1d(omega))
    if chi is None:
        chi = np.zeros(n, complex)
    return QuadraticHamiltonian(np.atleast_1d(omega), chi, lam, g)


@dataclass(frozen=True)
class Violation:
    field: str
    index: tuple
    magnitude: float
    what: str

    def __str__(self):
        idx = ",".join(str(i) for i in self.index)
        return f"{self.field} {self.what} at ({idx}) (|violation|={self.magnitude:.3g})"


def validate(h: QuadraticHamiltonian) -> list[Violation]:
    """Report every broken invariant of ``h``; never raises."""
    out: list[Violation] = []
    n = h.omega.size
    if n < 1:
        out.append(Violation("omega", (), 0.0, "is empty"))
        return out
    for k, w in enumerate(h.omega):
        if not math.isfinite(w):
            out.append(Violation("omega", (k,), float("inf"), "not finite"))
    if h.chi.shape != (n,):
        out.append(Violation("chi", (), float(abs(h.chi.size - n)), "has wrong length"))
    elif not np.all(np.isfinite(h.chi)):
        out.append(Violation("chi", (int(np.argmin(np.isfinite(h.chi))),), float("inf"), "not finite"))
    for name, mat, partner, what in (
        ("lam", h.lam, np.conj(h.lam.T), "not Hermitian"),
        ("g", h.g, h.g.T, "not symmetric"),
    ):
        if mat.shape != (n, n):
            out.append(Violation(name, mat.shape, float("nan"), "has wrong shape"))
            continue
        if not np.all(np.isfinite(mat)):
            out.append(Violation(name, (), float("inf"), "not finite"))
            continue
        for k in range(n):
            if mat[k, k] != 0:
                out.append(Violation(name, (k, k), float(abs(mat[k, k])), "has nonzero diagonal"))
        diff = np.abs(mat - partner)
        for i in range(n):
            for j in range(i + 1, n):
                if diff[i, j] > 0:
                    out.append(Violation(name, (i, j), float(diff[i, j]), what))
    return out


# --------------------------------------------------------------------------
# physical models


def single_mode(omega: float, chi: complex) -> QuadraticHamiltonian:
    """``omega a^dag a + (chi a^2 + h.c.)/2``; ``chi`` is halved on storage."""
    return hamiltonian([omega], [complex(chi) / 2])


def two_mode(omega1, omega2, chi1=0.0, chi2=0.0, lambda_c=0.0, g_c=0.0) -> QuadraticHamiltonian:
    """Two modes with ``chi_n a_n^2``, ``g a1 a2`` and ``lambda a1 a2^dag`` (+ h.c.)."""
    lam = np.zeros((2, 2), complex)
    g = np.zeros((2, 2), complex)
    lam[0, 1] = lambda_c
    lam[1, 0] = np.conj(lambda_c)
    g[0, 1] = g[1, 0] = g_c
    return hamiltonian([omega1, omega2], [chi1, chi2], lam, g)


def symmetric(n_modes: int, omega: float, chi: complex = 0.0, lambda_c: float = 0.0,
              g_c: float = 0.0) -> QuadraticHamiltonian:
    """Perfectly symmetric model: identical modes, all-to-all real couplings."""
    if n_modes < 1:
        raise ValueError("n_modes must be positive")
    off = np.ones((n_modes, n_modes)) - np.eye(n_modes)
    return hamiltonian(
        [omega] * n_modes, [chi] * n_modes, float(lambda_c) * off, float(g_c) * off
    )


@dataclass(frozen=True)
class RabiParams:
    """Cavity frequency, qubit splitting, qubit-cavity coupling, hopping."""

    omega0: float
    delta: float
    eta: float
    lambda_hop: complex = 0.0

    def __post_init__(self):
        if self.omega0 <= 0:
            warnings.warn("RabiParams: omega0 <= 0", stacklevel=3)


def _rabi_map(p: RabiParams) -> tuple[float, float]:
    if p.delta == 0:
        raise PreconditionError("qubit splitting delta must be nonzero")
    if p.delta < 0:
        raise PreconditionError("qubit splitting delta must be positive")
    shift = p.eta**2 / (2 * p.delta)
    return p.omega0 - shift, -p.eta**2 / (4 * p.delta)


def from_rabi(p: RabiParams) -> QuadraticHamiltonian:
    """Low-frequency (Schrieffer-Wolff) reduction of the quantum Rabi model."""
    w, c = _rabi_map(p)
    return hamiltonian([w], [c])


def from_two_rabi(p1: RabiParams, p2: RabiParams, lambda_hop: complex) -> QuadraticHamiltonian:
    w1, c1 = _rabi_map(p1)
    w2, c2 = _rabi_map(p2)
    return two_mode(w1, w2, c1, c2, lambda_hop, 0.0)


@dataclass(frozen=True)
class ThreeRingParams:
    """Three Rabi sites on a ring with hopping ``J e^{i theta}``."""

    omega: float
    delta: float
    g: float
    j_hop: float
    theta: float

    def __post_init__(self):
        if self.j_hop < 0:
            raise ValueError("j_hop must be non-negative")
        if not 0 <= self.theta <= math.pi + 1e-12:
            raise ValueError("theta must lie in [0, pi]")

    def ring_frequencies(self) -> np.ndarray:
        """``omega_q`` in the order of :data:`RING_MOMENTA`."""
        base = self.omega - 2 * self.g**2 / self.delta
        return np.array([base + 2 * self.j_hop * math.cos(self.theta - q) for q in RING_MOMENTA])


def from_three_ring(p: ThreeRingParams) -> QuadraticHamiltonian:
    """Momentum-space reduction of the three-site Rabi ring (modes q = 0, +2pi/3, -2pi/3)."""
    if p.delta == 0:
        raise PreconditionError("qubit splitting delta must be nonzero")
    if p.delta < 0:
        raise PreconditionError("qubit splitting delta must be positive")
    if p.j_hop > 0 and p.omega <= 2 * p.j_hop:
        warnings.warn("three-ring model outside omega > 2J", stacklevel=2)
    u = p.g**2 / p.delta
    g = np.zeros((3, 3), complex)
    # the q = +theta and q = -theta terms of the momentum sum are the same operator
    g[1, 2] = g[2, 1] = -2 * u
    return hamiltonian(p.ring_frequencies(), [-u, 0, 0], None, g)


# --------------------------------------------------------------------------
# description dictionaries (the ``model`` block of a run configuration)


@dataclass(frozen=True)
class ModelType:
    build: Callable[[dict], QuadraticHamiltonian]
    params: dict = field(default_factory=dict)  # name -> default (None = required)
    scalar: tuple = ()  # names that may be swept


def _two_mode(d):
    return two_mode(d["omega1"], d["omega2"], d["chi1"], d["chi2"], d["lambda"], d["g"])


def _two_rabi(d):
    return from_two_rabi(
        RabiParams(d["omega1"], d["delta1"], d["g1"]),
        RabiParams(d["omega2"], d["delta2"], d["g2"]),
        d["lambda"],
    )


def _general(d):
    return hamiltonian(d["omega"], d["chi"], d["lam"], d["g"])


MODEL_TYPES: dict[str, ModelType] = {
    "single_mode": ModelType(
        lambda d: single_mode(d["omega"], d["chi"]),
        {"omega": None, "chi": 0.0},
        ("omega", "chi"),
    ),
    "two_mode": ModelType(
        _two_mode,
        {"omega1": None, "omega2": None, "chi1": 0.0, "chi2": 0.0, "lambda": 0.0, "g": 0.0},
        ("omega1", "omega2", "chi1", "chi2", "lambda", "g"),
    ),
    "rabi": ModelType(
        lambda d: from_rabi(RabiParams(d["omega0"], d["delta"], d["eta"])),
        {"omega0": None, "delta": None, "eta": 0.0},
        ("omega0", "delta", "eta"),
    ),
    "two_rabi": ModelType(
        _two_rabi,
        {"omega1": None, "delta1": None, "g1": 0.0,
         "omega2": None, "delta2": None, "g2": 0.0, "lambda": 0.0},
        ("omega1", "delta1", "g1", "omega2", "delta2", "g2", "lambda"),
    ),
    "three_ring": ModelType(
        lambda d: from_three_ring(ThreeRingParams(d["omega"], d["delta"], d["g"], d["j_hop"], d["theta"])),
        {"omega": None, "delta": None, "g": 0.0, "j_hop": 0.0, "theta": 0.0},
        ("omega", "delta", "g", "j_hop", "theta"),
    ),
    "symmetric": ModelType(
        lambda d: symmetric(int(d["n_modes"]), d["omega"], d["chi"], d["lambda"], d["g"]),
        {"n_modes": None, "omega": None, "chi": 0.0, "lambda": 0.0, "g": 0.0},
        ("omega", "chi", "lambda", "g"),
    ),
    "general": ModelType(
        _general,
        {"omega": None, "chi": None, "lam": None, "g": None},
        (),
    ),
}


def complete_description(desc: dict) -> dict:
    """Fill defaults into a model description; raises KeyError/ValueError on bad input."""
    kind = desc.get("type")
    if kind not in MODEL_TYPES:
        raise ValueError(f"unknown model type {kind!r}")
    mt = MODEL_TYPES[kind]
    out = {"type": kind}
    for name, default in mt.params.items():
        if name in desc:
            out[name] = desc[name]
        elif default is None:
            raise KeyError(name)
        else:
            out[name] = default
    extra = set(desc) - set(mt.params) - {"type"}
    if extra:
        raise ValueError(f"unknown parameter(s) for {kind}: {sorted(extra)}")
    return out


def from_description(desc: dict) -> QuadraticHamiltonian:
    """Construct the Hamiltonian named by a ``{"type": ..., **params}`` mapping."""
    full = complete_description(desc)
    return MODEL_TYPES[full["type"]].build(full)


def with_param(desc: dict, name: str, value) -> dict:
    """Copy of ``desc`` with one scalar parameter replaced."""
    kind = desc.get("type")
    if kind not in MODEL_TYPES or name not in MODEL_TYPES[kind].scalar:
        raise KeyError(f"target not found: {name!r} is not a parameter of model {kind!r}")
    out = dict(desc)
    out[name] = value
    return out


__all__ = [
    "QuadraticHamiltonian", "Violation", "RabiParams", "ThreeRingParams", "RING_MOMENTA",
    "MODEL_TYPES", "hamiltonian", "validate", "single_mode", "two_mode", "symmetric",
    "from_rabi", "from_two_rabi", "from_three_ring", "from_description",
    "complete_description", "with_param",
]
