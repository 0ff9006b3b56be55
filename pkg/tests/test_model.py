import math

import numpy as np
import pytest

from conftest import random_hamiltonian
from hbphase.errors import PreconditionError
from hbphase.model import (
    MODEL_TYPES, RING_MOMENTA, RabiParams, ThreeRingParams, complete_description, from_description,
    from_rabi, from_three_ring, from_two_rabi, hamiltonian, single_mode, symmetric, two_mode, validate,
    with_param,
)


def test_minimal_single_mode_is_valid():
    assert validate(hamiltonian([1.0], [0.3])) == []


def test_non_hermitian_lam_is_reported():
    lam = np.array([[0, 1], [0, 0]], complex)
    (v,) = validate(hamiltonian([1.0, 1.0], None, lam, None))
    assert (v.field, v.index, v.what) == ("lam", (0, 1), "not Hermitian")
    assert str(v).startswith("lam not Hermitian at (0,1)")
    assert v.magnitude == 1.0


def test_non_symmetric_g_is_reported():
    g = np.array([[0, 1], [-1, 0]], complex)
    (v,) = validate(hamiltonian([1.0, 1.0], None, None, g))
    assert str(v).startswith("g not symmetric at (0,1)")
    assert v.magnitude == 2.0


def test_diagonal_couplings_and_nonfinite_omega_are_reported():
    lam = np.array([[0.5, 0], [0, 0]], complex)
    found = validate(hamiltonian([math.inf, 1.0], None, lam, None))
    whats = {(v.field, v.what) for v in found}
    assert ("omega", "not finite") in whats
    assert ("lam", "has nonzero diagonal") in whats


def test_single_mode_halves_chi():
    h = single_mode(1.0, 0.6)
    assert h.chi[0] == 0.3
    assert single_mode(1.0, 0.6j).chi[0] == 0.3j


def test_two_mode_layout():
    h = two_mode(1, 2, 0.25, 0, 0.5, 0.1)
    assert list(h.omega) == [1, 2]
    assert list(h.chi) == [0.25, 0]
    assert h.lam[0, 1] == 0.5 and h.lam[1, 0] == 0.5
    assert h.g[0, 1] == 0.1 and h.g[1, 0] == 0.1


def test_complex_hopping_is_hermitian():
    h = two_mode(1, 1, 0, 0, 0.3 + 0.4j, 0)
    assert h.lam[1, 0] == 0.3 - 0.4j
    assert validate(h) == []


def test_rabi_map():
    h = from_rabi(RabiParams(1.0, 100.0, 5.0))
    assert h.omega[0] == pytest.approx(0.875)
    assert h.chi[0] == pytest.approx(-0.0625)
    crit = from_rabi(RabiParams(1.0, 100.0, 10.0))
    assert crit.omega[0] == pytest.approx(2 * abs(crit.chi[0]))
    free = from_rabi(RabiParams(1.0, 100.0, 0.0))
    assert free.omega[0] == 1.0 and free.chi[0] == 0


@pytest.mark.parametrize("delta", [0.0, -1.0])
def test_rabi_rejects_bad_splitting(delta):
    with pytest.raises(PreconditionError):
        from_rabi(RabiParams(1.0, delta, 1.0))


def test_two_rabi_map():
    h = from_two_rabi(RabiParams(1, 100, 10), RabiParams(1, 100, 0), 0.3)
    np.testing.assert_allclose(h.omega, [0.5, 1.0])
    np.testing.assert_allclose(h.chi, [-0.25, 0])
    assert h.lam[0, 1] == 0.3 and not h.g.any()


def test_two_rabi_reduces_to_rotating_only():
    h = from_two_rabi(RabiParams(1, 100, 0), RabiParams(4, 100, 0), 2.0)
    assert h == two_mode(1, 4, 0, 0, 2.0, 0)


def test_identical_two_rabi_is_swap_invariant():
    h = from_two_rabi(RabiParams(1, 80, 3), RabiParams(1, 80, 3), 0.4)
    perm = [1, 0]
    assert np.array_equal(h.omega[perm], h.omega)
    assert np.array_equal(h.chi[perm], h.chi)
    assert np.array_equal(h.lam[np.ix_(perm, perm)], h.lam)


def test_three_ring_reference_values():
    h = from_three_ring(ThreeRingParams(1, 20, 1, 0.3, math.pi))
    np.testing.assert_allclose(h.omega, [0.3, 1.2, 1.2], atol=1e-15)
    np.testing.assert_allclose(h.chi, [-0.05, 0, 0])
    assert h.g[1, 2] == pytest.approx(-0.1) and h.g[2, 1] == h.g[1, 2]
    assert not h.lam.any()


def test_three_ring_zero_coupling_is_decoupled():
    p = ThreeRingParams(1, 20, 0, 0.3, 0.7)
    h = from_three_ring(p)
    np.testing.assert_allclose(h.omega, [1 + 0.6 * math.cos(0.7 - q) for q in RING_MOMENTA])
    assert not h.chi.any() and not h.g.any()


@pytest.mark.parametrize("theta", np.linspace(0, math.pi, 7))
def test_three_ring_frequency_splitting_identity(theta):
    w = ThreeRingParams(1.3, 15, 0.7, 0.4, theta).ring_frequencies()
    assert w[1] - w[2] == pytest.approx(4 * 0.4 * math.sin(theta) * math.sin(2 * math.pi / 3), abs=1e-14)


@pytest.mark.parametrize("theta", [0.0, math.pi])
def test_three_ring_momentum_reflection(theta):
    w = ThreeRingParams(1.0, 20, 1, 0.3, theta).ring_frequencies()
    assert w[1] == pytest.approx(w[2], abs=1e-15)


def test_three_ring_warns_outside_standing_assumption():
    with pytest.warns(UserWarning):
        from_three_ring(ThreeRingParams(0.5, 20, 1, 0.3, 1.0))


def test_three_ring_parameter_checks():
    with pytest.raises(ValueError):
        ThreeRingParams(1, 20, 1, -0.1, 0)
    with pytest.raises(ValueError):
        ThreeRingParams(1, 20, 1, 0.1, 4.0)


def test_symmetric_model_is_mode_swap_invariant():
    h = symmetric(3, 1.0, 0.2, 0.3, 0.1)
    assert np.all(h.chi == 0.2)
    off = ~np.eye(3, dtype=bool)
    assert np.all(h.lam[off] == 0.3) and np.all(h.g[off] == 0.1)
    assert validate(h) == []


def test_every_constructor_validates(rng):
    built = [
        single_mode(1, 0.6j), two_mode(1, 2, 0.25, 0, 0.5, 0.1), from_rabi(RabiParams(1, 100, 5)),
        from_two_rabi(RabiParams(1, 100, 3), RabiParams(2, 50, 1), 0.2 - 0.1j),
        from_three_ring(ThreeRingParams(1, 20, 1, 0.3, 1.0)), symmetric(2, 1, 0.1, 0.2, 0.3),
    ] + [random_hamiltonian(rng, n) for n in range(1, 6)]
    assert all(validate(h) == [] for h in built)


def test_description_defaults_and_errors():
    d = complete_description({"type": "two_mode", "omega1": 1, "omega2": 2})
    assert d["chi1"] == 0 and d["g"] == 0
    with pytest.raises(KeyError):
        complete_description({"type": "two_mode", "omega1": 1})
    with pytest.raises(ValueError):
        complete_description({"type": "four_mode"})
    with pytest.raises(ValueError):
        complete_description({"type": "single_mode", "omega": 1, "bogus": 2})


def test_every_model_type_builds():
    samples = {
        "single_mode": {"omega": 1, "chi": 0.6},
        "two_mode": {"omega1": 1, "omega2": 1},
        "rabi": {"omega0": 1, "delta": 100, "eta": 5},
        "two_rabi": {"omega1": 1, "delta1": 100, "omega2": 1, "delta2": 100},
        "three_ring": {"omega": 1, "delta": 20, "g": 1, "j_hop": 0.3, "theta": 3.0},
        "symmetric": {"n_modes": 3, "omega": 1},
        "general": {"omega": [1, 2], "chi": [0, 0], "lam": [[0, 0], [0, 0]], "g": [[0, 0], [0, 0]]},
    }
    assert set(samples) == set(MODEL_TYPES)
    for kind, params in samples.items():
        assert validate(from_description({"type": kind, **params})) == []


def test_with_param():
    d = {"type": "single_mode", "omega": 1, "chi": 0.6}
    assert with_param(d, "chi", 0.2)["chi"] == 0.2
    assert d["chi"] == 0.6
    with pytest.raises(KeyError, match="target not found"):
        with_param(d, "chi3", 0.1)


def test_hamiltonian_is_immutable():
    h = two_mode(1, 1, 0.1, 0, 0.2, 0)
    with pytest.raises(ValueError):
        h.omega[0] = 3.0
    assert h.scaled(0.0) == two_mode(1, 1, 0, 0, 0, 0)
