import math
import warnings

import numpy as np
import pytest

from conftest import SQRT_4_1, random_hamiltonian
from hbphase.eigen import SolverOptions, eigenvalues
from hbphase.hbmatrix import build
from hbphase.model import from_description, single_mode, two_mode
from hbphase.phase import (
    FAILED, NP, SP, ParamPath, SamplingWarning, classify, critical_points, evaluate, locate_dps, locate_eps,
    phase_sequence, scan,
)

TWO = {"type": "two_mode", "omega1": 1, "omega2": 1}


def test_classify_examples():
    assert classify(eigenvalues(build(single_mode(1, 0.6)))) == NP
    assert classify(eigenvalues(build(single_mode(1, 1.2)))) == SP
    assert classify(eigenvalues(build(two_mode(1, 1, 3, 0, 3, 0)))) == SP


def test_classify_monotone_in_tolerance(rng):
    for _ in range(50):
        eigs = eigenvalues(build(random_hamiltonian(rng, 2)))
        labels = [classify(eigs, t) for t in (1e-12, 1e-8, 1e-4, 1e-1, 10.0)]
        first_np = labels.index(NP) if NP in labels else len(labels)
        assert all(lab == NP for lab in labels[first_np:])


def test_path_validation():
    with pytest.raises(KeyError, match="target not found"):
        ParamPath({**TWO}, "chi3", 0, 1)
    with pytest.raises(ValueError):
        ParamPath({**TWO}, "chi1", 1, 0)
    with pytest.raises(ValueError):
        ParamPath({**TWO}, "chi1", 0, 1, samples=1)


def test_log_grid():
    path = ParamPath({**TWO}, "lambda", 1e-3, 1.0, 4, "log")
    np.testing.assert_allclose(path.grid(), [1e-3, 1e-2, 1e-1, 1.0])


def test_scan_uncoupled_family_boundary_at_half():
    pts = scan(ParamPath({**TWO, "lambda": 0, "g": 0}, "chi1", 0, 1, 101))
    for p in pts:
        assert (p.label == NP) == (p.param <= 0.5)
        if p.label == NP:
            assert p.max_abs_im == 0.0


def test_scan_counterrotating_family_is_exactly_real_inside_window():
    pts = scan(ParamPath({**TWO, "lambda": 0.6, "g": 0.6}, "chi1", 0, 1, 201))
    for p in pts:
        inside = 0.22 + 1e-9 < p.param < 0.5 - 1e-9
        if inside:
            assert p.label == NP and p.max_abs_im == 0.0
        elif not (abs(p.param - 0.22) < 1e-9 or abs(p.param - 0.5) < 1e-9):
            assert p.label == SP and p.max_abs_im > 0


def test_scan_strong_coupling_superradiant_at_origin():
    pts = scan(ParamPath({**TWO, "lambda": 5, "g": 5}, "chi1", 0, 1, 101))
    assert pts[0].label == SP


def test_scan_parallel_matches_serial():
    path = ParamPath({**TWO, "lambda": SQRT_4_1}, "chi1", 0, 2, 101)
    assert scan(path) == scan(path, parallel=4)


def test_scan_marks_failures_without_aborting():
    path = ParamPath({"type": "rabi", "omega0": 1, "delta": 1}, "delta", -1, 1, 3)
    pts = scan(path)
    assert [p.label for p in pts][:2] == [FAILED, FAILED]
    assert pts[0].error


def test_rabi_ep():
    (ep,) = locate_eps(ParamPath({"type": "rabi", "omega0": 1, "delta": 100}, "eta", 8, 12))
    assert ep.param == pytest.approx(10, abs=1e-6)
    assert ep.width <= 1e-8 * 4


def test_four_phase_eps():
    eps = locate_eps(ParamPath({**TWO, "lambda": SQRT_4_1}, "chi1", 0, 2, 401))
    lam2 = 4.1
    ref = sorted(math.sqrt((lam2 + s * math.sqrt(lam2 * (lam2 - 4))) / 2) for s in (-1, 1))
    assert [e.param for e in eps[:2]] == pytest.approx(ref, abs=1e-7)


def test_ep_brackets_straddle_the_transition():
    path = ParamPath({**TWO, "lambda": SQRT_4_1}, "chi1", 0, 2, 401)
    for ep in locate_eps(path):
        lo, hi = ep.bracket
        labels = {classify(eigenvalues(build(path.model_at(x)))) for x in (lo, hi)}
        assert labels == {NP, SP}


def test_rotating_only_has_no_ep():
    path = ParamPath({"type": "two_mode", "omega1": 1, "omega2": 4}, "lambda", 1, 3)
    assert locate_eps(path) == []
    (dp,) = locate_dps(path)
    assert dp.kind == "DP" and dp.param == pytest.approx(2, abs=1e-8)


def test_hermitian_paths_are_normal_everywhere(rng):
    for _ in range(5):
        w1, w2 = rng.uniform(0.5, 2, 2)
        path = ParamPath({"type": "two_mode", "omega1": w1, "omega2": w2}, "lambda", 0, 3, 51)
        assert all(p.label == NP for p in scan(path))
        assert locate_eps(path) == []


def test_dp_coincides_with_ep_in_four_phase_family():
    dps = locate_dps(ParamPath({**TWO, "lambda": SQRT_4_1}, "chi1", 0, 2, 401))
    (dp,) = [d for d in dps if d.crossing]
    assert dp.kind == "EP_DP" and dp.param == pytest.approx(1.55, abs=1e-9)
    assert abs(dp.partner - dp.param) < 1e-6


def test_perfect_symmetry_two_mode():
    path = ParamPath({"type": "symmetric", "n_modes": 2, "omega": 1, "lambda": 0.5}, "chi", 0, 0.5)
    seq = phase_sequence(path)
    (b,) = seq.boundaries
    # 4 chi^2 = (omega - lambda)^2 with chi the literal coefficient of a^2 on both modes
    assert b.kind == "EP_DP" and b.param == pytest.approx(0.25, abs=1e-8)


def test_ep_only_points_have_nonzero_determinant():
    path = ParamPath({**TWO, "lambda": SQRT_4_1}, "chi1", 0, 2, 401)
    for c in critical_points(path):
        if c.kind == "EP":
            assert abs(evaluate(path.model_at(c.param)).det) > 1e-6


def test_phase_sequences():
    seq = phase_sequence(ParamPath({**TWO, "lambda": SQRT_4_1}, "chi1", 0, 2, 401))
    assert seq.labels == [NP, SP, NP, SP]
    assert [b.kind for b in seq.boundaries] == ["EP", "EP", "EP_DP"]
    seq = phase_sequence(ParamPath({**TWO, "lambda": 0.6, "g": 0.6}, "chi1", 0, 1))
    assert seq.labels == [SP, NP, SP]
    assert [b.param for b in seq.boundaries] == pytest.approx([0.22, 0.5], abs=1e-7)
    seq = phase_sequence(ParamPath({**TWO}, "chi1", 0, 1))
    assert seq.labels == [NP, SP] and seq.boundaries[0].param == pytest.approx(0.5, abs=1e-8)


def test_coarse_sampling_warns_or_misses_narrow_window():
    path = ParamPath({**TWO, "lambda": SQRT_4_1}, "chi1", 0, 2, 201)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        seq = phase_sequence(path)
    if seq.labels == [NP, SP, NP, SP]:
        assert any(issubclass(w.category, SamplingWarning) for w in caught)
    else:
        assert seq.labels[0] == NP


def test_tangential_dp_in_symmetric_three_mode():
    path = ParamPath({"type": "symmetric", "n_modes": 3, "omega": 1, "lambda": 0.3}, "chi", 0, 1)
    seq = phase_sequence(path)
    assert seq.boundaries and all(b.kind == "EP_DP" for b in seq.boundaries)


def test_solver_options_are_honoured():
    path = ParamPath({**TWO, "lambda": 0.6, "g": 0.6}, "chi1", 0, 1, 11)
    loose = scan(path, SolverOptions(tol_im=10.0))
    assert all(p.label == NP for p in loose)
