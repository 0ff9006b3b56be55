import math
import warnings

import numpy as np
import pytest

from conftest import match_error, random_hamiltonian
from hbphase.eigen import (
    DefectiveEigenvalueWarning, SolverOptions, backward_errors, eigenvalues, eigenvector, pair, pair_and_label,
    particle_energies, spectrum,
)
from hbphase.errors import ConvergenceError, PairingError, PreconditionError
from hbphase.hbmatrix import HBMatrix, as_array, build
from hbphase.model import hamiltonian, single_mode, two_mode
from hbphase._qr import eigenvalues as qr_eigenvalues


def test_single_mode_eigenvalues():
    eigs = eigenvalues(HBMatrix.from_array(np.array([[1, -0.6], [0.6, -1]], complex)))
    assert match_error(eigs, [0.8, -0.8]) < 1e-14


def test_fully_superradiant_two_mode():
    eigs = eigenvalues(build(two_mode(1, 1, 3, 0, 3, 0)))
    ref = [s * 1j * math.sqrt(v) for v in (2, 14) for s in (1, -1)]
    assert match_error(eigs, ref) < 1e-13 and match_error(ref, eigs) < 1e-13


def test_diagonal_matrix():
    eigs = eigenvalues(HBMatrix.from_array(np.diag([1, 4, -1, -4]).astype(complex)))
    assert sorted(eigs.real) == [-4, -1, 1, 4]


def test_against_numpy_on_random_matrices(rng):
    for _ in range(50):
        n = int(rng.integers(1, 12))
        a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        ours = qr_eigenvalues(a)
        ref = np.linalg.eigvals(a)
        assert match_error(ours, ref) < 1e-10 * np.linalg.norm(a)


def test_backward_errors_small(rng):
    for n in range(1, 6):
        m = build(random_hamiltonian(rng, n))
        assert np.max(backward_errors(m, eigenvalues(m))) <= 1e-10


def test_balancing_toggle_agrees(rng):
    m = build(random_hamiltonian(rng, 4))
    a = eigenvalues(m, SolverOptions(balance=True))
    b = eigenvalues(m, SolverOptions(balance=False))
    assert match_error(a, b) < 1e-10


def test_iteration_cap_raises_with_partial_result(rng):
    m = build(random_hamiltonian(rng, 4))
    with pytest.raises(ConvergenceError) as info:
        eigenvalues(m, SolverOptions(max_sweeps=1))
    assert info.value.partial is not None


def test_eigenvector_particle_branch():
    m = build(single_mode(1, 0.6))
    v = eigenvector(m, 0.8)
    assert v.mu[0] / v.nu[0] == pytest.approx(3.0, rel=1e-10)
    assert v.norm_sq > 0
    assert v.residual < 1e-10


def test_eigenvector_antiparticle_branch():
    assert eigenvector(build(single_mode(1, 0.6)), -0.8).norm_sq < 0


def test_eigenvector_decoupled_mode():
    m = build(hamiltonian([1.0, 2.0, 3.0]))
    v = eigenvector(m, 2.0)
    np.testing.assert_allclose(np.abs(v.mu), [0, 1, 0], atol=1e-12)
    np.testing.assert_allclose(v.nu, 0, atol=1e-12)


def test_eigenvector_is_seeded():
    m = build(two_mode(1, 2, 0.25, 0, 0.5, 0.1))
    e = eigenvalues(m)[0]
    a = eigenvector(m, e, SolverOptions(seed=3))
    b = eigenvector(m, e, SolverOptions(seed=3))
    assert np.array_equal(a.vector, b.vector)


def test_eigenvector_flags_defective_point():
    m = build(single_mode(1.0, 1.0))  # |chi| = omega: exceptional point, E = 0 double
    with pytest.warns(DefectiveEigenvalueWarning):
        v = eigenvector(m, 0.0)
    assert v.defective


def test_pairing_structure(rng):
    for n in range(1, 6):
        eigs = eigenvalues(build(random_hamiltonian(rng, n)))
        pairs = pair(eigs)
        assert len(pairs) == n
        assert all(p.defect <= 1e-8 * (1 + abs(p.e_plus)) for p in pairs)
        values = np.array([e for p in pairs for e in (p.e_plus, p.e_minus)])
        assert match_error(values, eigs) == 0


def test_pairing_rejects_broken_symmetry():
    with pytest.raises(PairingError):
        pair(np.array([1.0, 2.0]))


def test_labels_at_zero_coupling():
    ps = spectrum(hamiltonian([1.0, 4.0, 2.0]), label=True)
    np.testing.assert_allclose(ps.branch_energies(), [1, 4, 2])


def test_labels_rotating_only():
    ps = spectrum(two_mode(1, 4, 0, 0, 2, 0), label=True)
    assert abs(ps.branch(0).e_plus) < 1e-9
    assert ps.branch(1).e_plus == pytest.approx(5)
    assert ps.valid_up_to == 1.0 and not ps.unordered


def test_labels_follow_branches_below_the_dp():
    # closed form: (w1 + w2)/2 -+ sqrt(((w1 - w2)/2)^2 + lam^2)
    ps = spectrum(two_mode(1, 4, 0, 0, 1.5, 0), label=True)
    root = math.sqrt(2.25 + 2.25)
    np.testing.assert_allclose(ps.branch_energies().real, [2.5 - root, 2.5 + root], rtol=1e-12)


def test_labels_unordered_after_collision():
    h = two_mode(1, 1, 3, 0, 3, 0)
    ps = spectrum(h, label=True)
    assert ps.valid_up_to < 1.0
    assert ps.unordered
    np.testing.assert_allclose(sorted(p.omega_sq.real for p in ps.pairs), [-14, -2], rtol=1e-12)


def test_pair_and_label_rejects_odd_length():
    with pytest.raises(PreconditionError):
        pair_and_label([1.0, -1.0, 2.0], hamiltonian([1.0]))


def test_particle_energies():
    m = build(single_mode(1, 0.6))
    np.testing.assert_allclose(particle_energies(m), [0.8])
    # rotating-only beyond the DP: one particle energy is negative
    e = particle_energies(build(two_mode(1, 4, 0, 0, 3, 0)))
    assert sorted(e.real) == pytest.approx([2.5 - math.sqrt(11.25), 2.5 + math.sqrt(11.25)])


def test_spectrum_residuals():
    ps = spectrum(two_mode(1, 2, 0.25, 0, 0.5, 0.1), with_residuals=True)
    assert ps.residuals.shape == (4,) and np.max(ps.residuals) < 1e-12


def test_non_hermitian_scale_invariance():
    a = as_array(build(two_mode(1, 2, 0.25, 0, 0.5, 0.1)))
    small = eigenvalues(HBMatrix.from_array(a * 1e-6))
    big = eigenvalues(HBMatrix.from_array(a))
    assert match_error(small * 1e6, big) < 1e-10


def test_decoupled_mode_at_instability_threshold():
    # one mode sits exactly at |B| = A (nilpotent block): eigenvalues {0, 0, +-1}
    h = hamiltonian([2.0, 1.0], [1j, 0])
    eigs = eigenvalues(build(h))
    assert match_error(eigs, [0, 0, 1, -1]) < 1e-7
    assert abs(eigs.sum()) < 1e-7
