"""Squeezed ground states and their quantum Fisher information.

Two families are supported:

* ``single_mode`` — ``H = omega a^dag a + (chi a^2 + chi^* a^dag^2) / 2``. The
  ground state is the squeezed vacuum ``U(xi)|0>`` with
  ``U(xi) = exp(xi a^2 / 2 - xi^* a^dag^2 / 2)``, ``xi = e^{-i theta} |xi|``,
  ``theta = arg chi`` and ``|xi| = atanh(|chi| / omega) / 2``.
* ``ring3`` — the three-site Rabi ring in its quasi-momentum basis. The
  ``q = 0`` mode is single-mode squeezed with magnitude ``r0 = 2 xi0`` and the
  ``(+2pi/3, -2pi/3)`` pair is two-mode squeezed with magnitude ``xi_theta``.

The QFI ``F = 4 (<d psi|d psi> - |<d psi|psi>|^2)`` is computed from central
differences of explicit, truncated Fock vectors. Closed-form
asymptotics are never used in the computation; they are reported alongside
for comparison only.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import AtExceptionalPoint, PreconditionError, TruncationError
from .model import ThreeRingParams

TAIL_TOL = 1e-8
_AUTO_TAIL = 1e-14
MAX_LEVELS = 20000


@dataclass(frozen=True)
class SqueezedGroundState:
    kind: str  # "single_mode" | "ring3"
    theta: float = 0.0
    xi: complex = 0j
    xi0: float = 0.0
    xi_theta: float = 0.0
    omega_gap: float = math.nan

    @property
    def r0(self) -> float:
        """Squeezing magnitude of the single-mode factor (``|xi|`` or ``2 xi0``)."""
        return abs(self.xi) if self.kind == "single_mode" else 2.0 * self.xi0


def _xi_magnitude(omega: float, chi_abs: float) -> tuple[float, float]:
    """``(|xi|, Omega_1)`` from the logarithmic formula, evaluated stably."""
    omega_1 = math.sqrt((omega - chi_abs) * (omega + chi_abs))
    if chi_abs == 0.0:
        return 0.0, omega_1
    shift = chi_abs * chi_abs / (omega + omega_1)  # omega - Omega_1 without cancellation
    return math.log((chi_abs + shift) / math.sqrt((chi_abs - shift) * (chi_abs + shift))), omega_1


def single_mode_ground(omega: float, chi: complex) -> SqueezedGroundState:
    """Ground state of ``omega a^dag a + (chi a^2 + h.c.)/2`` (normal phase only)."""
    chi = complex(chi)
    if not omega > 0:
        raise PreconditionError(f"omega must be positive, got {omega}")
    if omega * omega <= abs(chi) ** 2:
        raise AtExceptionalPoint(f"|chi| = {abs(chi):.6g} >= omega = {omega:.6g}: no normal-phase ground state")
    theta = cmath.phase(chi) if chi != 0 else 0.0
    mag, gap = _xi_magnitude(omega, abs(chi))
    return SqueezedGroundState("single_mode", theta, mag * cmath.exp(-1j * theta), omega_gap=gap)


def _ring_denominators(p: ThreeRingParams) -> tuple[float, float, float, float]:
    u4 = 4 * p.g * p.g / p.delta
    a0 = p.omega + 2 * p.j_hop * math.cos(p.theta)
    ap = p.omega - p.j_hop * math.cos(p.theta)
    return a0, a0 - u4, ap, ap - u4


def ring3_ground(p: ThreeRingParams) -> SqueezedGroundState:
    """Squeezing parameters ``xi0``, ``xi_theta`` of the ring ground state."""
    a0, b0, ap, bp = _ring_denominators(p)
    if b0 <= 0 or a0 <= 0 or bp <= 0 or ap <= 0:
        raise AtExceptionalPoint(
            f"ring squeezing diverges: denominators {b0:.3g} (q=0) and {bp:.3g} (q=+-2pi/3) must be positive"
        )
    xi0 = math.log(a0 / b0) / 8
    xit = math.log(ap / bp) / 4
    # Bogoliubov frequencies of the q=0 mode and of the symmetric pair sector
    gap = min(math.sqrt(a0 * b0), math.sqrt(ap * bp))
    return SqueezedGroundState("ring3", p.theta, 0j, xi0, xit, gap)


# --------------------------------------------------------------------------
# Fock vectors


@dataclass(frozen=True)
class FockVector:
    """Truncated amplitudes.

    Single mode: ``amplitudes[n] = <n|psi>`` for ``n <= n_max``.
    Ring: ``amplitudes[n0, n] = <n0; n, n|psi>`` — the pair factor of a
    two-mode squeezed vacuum has no weight off the ``|n, n>`` diagonal, so
    only that diagonal is stored. Use :meth:`dense` for the full tensor.
    """

    kind: str
    n_max: int
    amplitudes: np.ndarray = field(repr=False)
    tail_mass: float

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def flat(self) -> np.ndarray:
        return self.amplitudes.reshape(-1)

    def dense(self) -> np.ndarray:
        """Full amplitude tensor: shape ``(n_max+1,)`` or ``(n_max+1,)*3`` (modes 0, +, -)."""
        if self.kind == "single_mode":
            return self.amplitudes.copy()
        n = self.n_max + 1
        out = np.zeros((n, n, n), dtype=complex)
        k = np.arange(n)
        out[:, k, k] = self.amplitudes
        return out


def squeezed_vacuum_amplitudes(r: float, phase: complex, n_max: int) -> np.ndarray:
    """``c_n`` of ``sum c_2n |2n>`` with ``c_{2n+2} = c_{2n} * (phase tanh r) sqrt((2n+1)/(2n+2))``."""
    c = np.zeros(n_max + 1, dtype=complex)
    c[0] = 1.0 / math.sqrt(math.cosh(r))
    t = phase * math.tanh(r)
    for n in range(0, n_max - 1, 2):
        c[n + 2] = c[n] * t * math.sqrt((n + 1) / (n + 2))
    return c


def two_mode_vacuum_amplitudes(r: float, n_max: int) -> np.ndarray:
    """``c_n = tanh(r)^n / cosh r`` on ``|n, n>``."""
    return np.tanh(r) ** np.arange(n_max + 1) / math.cosh(r) + 0j


def _single_levels(r: float, tail: float) -> int:
    if r == 0:
        return 2
    c = 1.0 / math.cosh(r)
    acc, t2, n = c, math.tanh(r) ** 2, 0
    while 1.0 - acc > tail and n < MAX_LEVELS:
        c *= t2 * (n + 1) / (n + 2)
        acc += c
        n += 2
    return max(n, 2)


def _pair_levels(r: float, tail: float) -> int:
    if r == 0:
        return 2
    t2 = math.tanh(r) ** 2
    # tail beyond n is t2^(n+1)
    return max(2, min(MAX_LEVELS, math.ceil(math.log(tail) / math.log(t2))))


def required_n_max(s: SqueezedGroundState, tail: float = _AUTO_TAIL) -> int:
    """Smallest (even) truncation whose discarded probability is below ``tail``."""
    if s.kind == "single_mode":
        n = _single_levels(abs(s.xi), tail)
    else:
        n = max(_single_levels(2 * s.xi0, tail / 2), _pair_levels(s.xi_theta, tail / 2))
    return n + (n % 2)


def fock_vector(s: SqueezedGroundState, n_max: int, *, tail_tol: float = TAIL_TOL) -> FockVector:
    """Truncated and renormalized Fock amplitudes of ``s``.

    Raises :class:`TruncationError` when more than ``tail_tol`` of the
    probability lies above ``n_max``.
    """
    if n_max < 2:
        raise PreconditionError("n_max must be at least 2")
    if s.kind == "single_mode":
        r = abs(s.xi)
        # first-order perturbation theory: <2|psi> / <0|psi> ~ -conj(chi) / (2 sqrt2 omega)
        amp = squeezed_vacuum_amplitudes(r, -cmath.exp(-1j * s.theta), n_max)
    elif s.kind == "ring3":
        a = squeezed_vacuum_amplitudes(2 * s.xi0, 1.0, n_max)
        b = two_mode_vacuum_amplitudes(s.xi_theta, n_max)
        amp = np.outer(a, b)
    else:
        raise ValueError(f"unknown state kind {s.kind!r}")
    kept = float(np.sum(np.abs(amp) ** 2))
    tail = max(0.0, 1.0 - kept)
    if tail > tail_tol:
        raise TruncationError(
            f"n_max={n_max} discards probability {tail:.2e} > {tail_tol:.0e}; "
            f"try n_max >= {required_n_max(s, tail_tol / 10)}"
        )
    return FockVector(s.kind, n_max, amp / math.sqrt(kept), tail)


# --------------------------------------------------------------------------
# parameter families


_SINGLE_PARAMS = ("omega", "chi_abs", "theta")
_RING_PARAMS = ("omega", "delta", "g", "j_hop", "theta")


@dataclass(frozen=True)
class Family:
    """A ground-state family with named real parameters.

    ``single_mode`` params: ``omega``, ``chi_abs``, ``theta`` (half convention
    for chi). ``ring3`` params: ``omega``, ``delta``, ``g``, ``j_hop``, ``theta``.
    """

    kind: str
    params: dict

    def __post_init__(self):
        names = self.names()
        missing = [k for k in names if k not in self.params]
        extra = [k for k in self.params if k not in names]
        if missing or extra:
            raise ValueError(f"{self.kind} family needs exactly {names}; missing {missing}, unexpected {extra}")
        object.__setattr__(self, "params", {k: float(self.params[k]) for k in names})

    @classmethod
    def single_mode(cls, omega: float, chi: complex) -> "Family":
        chi = complex(chi)
        return cls("single_mode", {"omega": omega, "chi_abs": abs(chi), "theta": cmath.phase(chi) if chi else 0.0})

    @classmethod
    def ring3(cls, p: ThreeRingParams) -> "Family":
        return cls("ring3", {"omega": p.omega, "delta": p.delta, "g": p.g, "j_hop": p.j_hop, "theta": p.theta})

    def names(self) -> tuple[str, ...]:
        if self.kind == "single_mode":
            return _SINGLE_PARAMS
        if self.kind == "ring3":
            return _RING_PARAMS
        raise ValueError(f"unknown family kind {self.kind!r}")

    def with_value(self, phi: str, value: float) -> "Family":
        if phi not in self.params:
            raise KeyError(f"target not found: {phi!r} is not a parameter of the {self.kind} family")
        return replace(self, params={**self.params, phi: float(value)})

    def state(self) -> SqueezedGroundState:
        p = self.params
        if self.kind == "single_mode":
            return single_mode_ground(p["omega"], p["chi_abs"] * cmath.exp(1j * p["theta"]))
        return ring3_ground(ThreeRingParams(p["omega"], p["delta"], p["g"], p["j_hop"], p["theta"]))

    def at_gap(self, gap: float) -> "Family":
        """Same family moved to distance ``gap`` from its critical point.

        Single mode: ``|chi|`` is chosen so that ``Omega_1 = gap``. Ring: ``g``
        is chosen so that the diverging denominator equals ``gap`` — the
        ``q = 0`` one for ``theta >= pi/2`` and the pair one otherwise.
        """
        p = self.params
        if self.kind == "single_mode":
            if not 0 < gap < p["omega"]:
                raise PreconditionError("gap must lie in (0, omega)")
            return self.with_value("chi_abs", math.sqrt(p["omega"] ** 2 - gap**2))
        c = math.cos(p["theta"])
        base = p["omega"] + 2 * p["j_hop"] * c if p["theta"] >= math.pi / 2 else p["omega"] - p["j_hop"] * c
        u4 = base - gap
        if u4 <= 0:
            raise PreconditionError("gap too large for this ring")
        return self.with_value("g", math.sqrt(u4 * p["delta"] / 4))


# --------------------------------------------------------------------------
# QFI


@dataclass(frozen=True)
class QfiResult:
    phi: str
    at: float
    F: float
    step: float
    n_max: int
    convergence: float


def _gauged(family: Family, phi: str, x: float, n_max: int, rng) -> np.ndarray:
    v = fock_vector(family.with_value(phi, x).state(), n_max).flat()
    if rng is not None:
        v = v * cmath.exp(2j * math.pi * rng.random())
    return v * (abs(v[0]) / v[0])


def _fisher(family: Family, phi: str, at: float, h: float, n_max: int, richardson: bool, rng) -> float:
    vec = lambda x: _gauged(family, phi, x, n_max, rng)  # noqa: E731
    psi = vec(at)
    d = (vec(at + h) - vec(at - h)) / (2 * h)
    if richardson:
        d2 = (vec(at + h / 2) - vec(at - h / 2)) / h
        d = (4 * d2 - d) / 3
    return max(0.0, 4.0 * float(np.vdot(d, d).real - abs(np.vdot(d, psi)) ** 2))


def qfi(family: Family, phi: str, at: float, *, step: float = 1e-5, n_max: int | None = None,
        richardson: bool = False, random_phase_seed: int | None = None) -> QfiResult:
    """Quantum Fisher information of ``family`` with respect to ``phi`` at ``phi = at``.

    ``step`` is relative: the finite-difference step is ``step * max(|at|, 1)``.
    The reported ``convergence`` is the change in F when ``n_max`` is doubled.
    ``random_phase_seed`` multiplies every evaluated vector by a random
    global phase before gauge fixing (a self-check; F must not change).
    """
    fam = family.with_value(phi, at)
    h = step * max(abs(at), 1.0)
    states = []
    for x in (at - h, at, at + h):
        try:
            states.append(fam.with_value(phi, x).state())
        except AtExceptionalPoint as exc:
            raise AtExceptionalPoint(f"{phi}={x:.8g} is not on the normal-phase side: {exc}") from exc
    gap = min(s.omega_gap for s in states)
    if gap < 10 * h:
        raise AtExceptionalPoint(f"gap {gap:.3g} < 10 x step {h:.3g}: finite differences unreliable this close to the EP")
    if n_max is None:
        n_max = max(required_n_max(s) for s in states)
    rng = None if random_phase_seed is None else np.random.default_rng(random_phase_seed)
    f1 = _fisher(fam, phi, at, h, n_max, richardson, rng)
    f2 = _fisher(fam, phi, at, h, 2 * n_max, richardson, rng)
    return QfiResult(phi, float(at), f1, h, n_max, abs(f2 - f1))


@dataclass(frozen=True)
class ScalingResult:
    phi: str
    gaps: tuple[float, ...]
    F: tuple[float, ...]
    slope: float
    intercept: float
    r2: float
    nonlinear: bool
    prefactor: float  # F * gap^(-slope_nominal) at the smallest gap
    prefactors: dict  # informational closed-form prefactors


def reference_prefactors(family: Family, phi: str) -> dict:
    """Near-critical prefactors ``c`` in ``F ~ c * gap^p`` (informational only).

    ``reference`` lists the commonly quoted asymptotics, ``chain_rule`` those from
    ``F = 2 (d r0/d phi)^2`` (single-mode factor) and ``4 (d r/d phi)^2``
    (two-mode factor). For the single mode the ``theta`` entry is
    ``sinh(2|xi|)^2 / 2``, not a power law.
    """
    p = family.params
    if family.kind == "single_mode":
        w, c = p["omega"], p["chi_abs"]
        table = {
            "omega": {"exponent": -4, "reference": w * w / 4, "chain_rule": c * c / 2},
            "chi_abs": {"exponent": -4, "reference": c * c / 4, "chain_rule": w * w / 2},
            "theta": {"exponent": None, "reference": "(ln Omega_1)^2 / 4", "chain_rule": "sinh(2|xi|)^2 / 2"},
        }
    else:
        th = p["theta"]
        if abs(th - math.pi / 2) < 1e-12:
            quoted, chain = 3 / 32, 3 / 8
        elif th > math.pi / 2:
            quoted, chain = 1 / 32, 1 / 8
        else:
            quoted, chain = 1 / 16, 1 / 4
        table = {"omega": {"exponent": -2, "reference": quoted, "chain_rule": chain}}
    return table.get(phi, {"exponent": None, "reference": None, "chain_rule": None})


def scaling_exponent(family: Family, phi: str, gap_values, *, step: float = 1e-5, n_max: int | None = None,
                     richardson: bool = True) -> ScalingResult:
    """Least-squares slope of ``ln F`` against ``ln gap``.

    ``gap`` is ``Omega_1`` for the single mode and the vanishing denominator
    ``epsilon`` for the ring (see :meth:`Family.at_gap`). Fits with
    ``R^2 < 0.99`` are flagged ``nonlinear``.
    """
    gaps = [float(x) for x in gap_values]
    if len(gaps) < 3:
        raise PreconditionError("need at least three gap values")
    fs = []
    for gap in gaps:
        fam = family.at_gap(gap)
        fs.append(qfi(fam, phi, fam.params[phi], step=step, n_max=n_max, richardson=richardson).F)
    x, y = np.log(gaps), np.log(fs)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    ref = reference_prefactors(family.at_gap(min(gaps)), phi)
    k = int(np.argmin(gaps))
    nominal = ref.get("exponent")
    pref = fs[k] * gaps[k] ** (-nominal) if isinstance(nominal, int) else math.nan
    return ScalingResult(phi, tuple(gaps), tuple(fs), float(slope), float(intercept), r2, r2 < 0.99, pref, ref)


__all__ = [
    "SqueezedGroundState", "FockVector", "Family", "QfiResult", "ScalingResult",
    "single_mode_ground", "ring3_ground", "fock_vector", "required_n_max", "squeezed_vacuum_amplitudes",
    "two_mode_vacuum_amplitudes", "qfi", "scaling_exponent", "reference_prefactors",
]
