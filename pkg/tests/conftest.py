import math

import numpy as np
import pytest

from hbphase.model import QuadraticHamiltonian, hamiltonian


def random_hamiltonian(rng: np.random.Generator, n: int, coupling: float = 0.6) -> QuadraticHamiltonian:
    """A random valid Hamiltonian with O(1) entries (any phase)."""
    omega = rng.uniform(0.2, 2.0, n)
    chi = coupling * (rng.normal(size=n) + 1j * rng.normal(size=n)) / 2
    lam = np.zeros((n, n), complex)
    g = np.zeros((n, n), complex)
    for i in range(n):
        for j in range(i + 1, n):
            lam[i, j] = coupling * complex(rng.normal(), rng.normal()) / 2
            lam[j, i] = np.conj(lam[i, j])
            g[i, j] = g[j, i] = coupling * complex(rng.normal(), rng.normal()) / 2
    return hamiltonian(omega, chi, lam, g)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def match_error(values, reference) -> float:
    """Largest distance from any reference value to its nearest computed value."""
    values = np.asarray(values, complex)
    return max(float(np.min(np.abs(values - r))) for r in np.asarray(reference, complex))


def spectral_scale(eigs) -> float:
    return max(1.0, float(np.max(np.abs(eigs))))


_ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


@pytest.fixture
def criterion(capsys):
    """Record and print a single pass/fail line for an acceptance criterion."""

    def report(number: int, title: str, ok: bool, detail: str = "") -> None:
        line = f"criterion {number:2d} [{'PASS' if ok else 'FAIL'}] {title}" + (f" -- {detail}" if detail else "")
        _ACCEPTANCE.setdefault(number, []).append((ok, line))
        with capsys.disabled():
            print("\n" + line)
        assert ok, line

    return report


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        for _, line in _ACCEPTANCE[n]:
            terminalreporter.write_line(line)
    passed = sum(all(ok for ok, _ in runs) for runs in _ACCEPTANCE.values())
    terminalreporter.write_line(f"{passed}/{len(_ACCEPTANCE)} criteria passed")


SQRT_4_1 = math.sqrt(4.1)
