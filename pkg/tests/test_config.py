import json

import pytest
from hypothesis import given, settings, strategies as st

from hbphase.config import ConfigError, RunConfig, emit, parse_config
from hbphase.eigen import SolverOptions


def _errors(text):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    return info.value.errors


def test_minimal_config():
    cfg = parse_config('{"model":{"type":"single_mode","omega":1,"chi":0.6},"task":"spectrum"}')
    assert cfg.model == {"type": "single_mode", "omega": 1, "chi": 0.6}
    assert cfg.task == "spectrum" and cfg.solver == SolverOptions()


def test_unknown_model_type():
    (pointer, msg), *_ = _errors('{"model":{"type":"four_mode"}}')
    assert pointer == "/model/type"


def test_unresolvable_target():
    errs = _errors('{"model":{"type":"two_mode","omega1":1,"omega2":1},"task":"phase-scan",'
                   '"path":{"target":"chi3","lo":0,"hi":1}}')
    assert errs[0][0] == "/path/target" and "target not found" in errs[0][1]


def test_malformed_json():
    assert "malformed JSON" in _errors("{")[0][1]


def test_missing_and_unknown_parameters():
    assert "omega2" in _errors('{"model":{"type":"two_mode","omega1":1}}')[0][1]
    assert _errors('{"model":{"type":"single_mode","omega":1,"bogus":1}}')


def test_schema_errors_are_located():
    errs = _errors('{"model":{"type":"single_mode","omega":1},"path":{"target":"chi","lo":0,"hi":1,"samples":1}}')
    assert errs[0][0] == "/path/samples"


def test_task_requirements():
    assert _errors('{"model":{"type":"single_mode","omega":1},"task":"critical"}')[0][0] == "/path"
    assert _errors('{"model":{"type":"single_mode","omega":1},"task":"qfi"}')[0][0] == "/qfi"
    assert _errors('{"model":{"type":"single_mode","omega":1},"path":{"target":"chi","lo":1,"hi":0}}')


def test_complex_and_nested_values():
    cfg = parse_config(json.dumps({"model": {"type": "two_mode", "omega1": 1, "omega2": 1, "lambda": [0.3, 0.4]}}))
    assert cfg.model["lambda"] == 0.3 + 0.4j
    gen = {"type": "general", "omega": [1, 2], "chi": [[0.1, 0.2], 0],
           "lam": [[0, [0.1, 0.1]], [[0.1, -0.1], 0]], "g": [[0, 0], [0, 0]]}
    cfg = parse_config(json.dumps({"model": gen}))
    assert cfg.model["omega"] == [1, 2]
    assert cfg.model["chi"] == [0.1 + 0.2j, 0]
    assert cfg.model["lam"][0][1] == 0.1 + 0.1j


def test_defaults_filled():
    cfg = parse_config('{"model":{"type":"single_mode","omega":1},"task":"qfi","qfi":{"phi":"omega"},'
                       '"path":{"target":"chi","lo":0,"hi":1}}')
    assert cfg.path["samples"] == 201 and cfg.path["scale"] == "linear"
    assert cfg.qfi["step"] == 1e-5 and cfg.qfi["richardson"] is False


finite = st.floats(min_value=-10, max_value=10, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(
    omega=st.floats(min_value=0.1, max_value=5),
    chi_re=finite, chi_im=finite,
    task=st.sampled_from(["spectrum", "check", "dump-matrix", "phase-scan"]),
    tol=st.floats(min_value=1e-12, max_value=1e-2),
    seed=st.integers(min_value=0, max_value=2**32),
    balance=st.booleans(),
)
def test_emit_parse_round_trip(omega, chi_re, chi_im, task, tol, seed, balance):
    path = {"target": "chi", "lo": 0.0, "hi": 1.0, "samples": 11, "scale": "linear"} if task == "phase-scan" else None
    cfg = RunConfig({"type": "single_mode", "omega": omega, "chi": complex(chi_re, chi_im) if chi_im else chi_re},
                    task, path, None, {}, SolverOptions(balance=balance, tol_im=tol, seed=seed))
    again = parse_config(emit(cfg))
    assert again == cfg
    assert emit(again) == emit(cfg)
