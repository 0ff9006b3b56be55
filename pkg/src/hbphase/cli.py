"""Command-line interface: spectra, phase scans, critical points, QFI and oracle checks.

    hbphase <task> --config run.json [--out DIR] [--parallel N] [solver flags]

``task`` is one of ``spectrum``, ``phase-scan``, ``critical``, ``qfi``,
``check``, ``dump-matrix``, or ``run`` (use the task named in the config).

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 precondition violation (for example QFI requested on the superradiant side).
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import sys
import warnings
from pathlib import Path

import numpy as np

from . import __version__
from .config import TASKS, ConfigError, RunConfig, parse_config
from .eigen import SolverOptions, eigenvalues, pair, particle_energies
from .errors import HBError, InvalidHamiltonian, NumericError, PreconditionError
from .gaussian import Family, qfi, reference_prefactors, scaling_exponent
from .hbmatrix import build, determinant, dump_rows, symmetry_residual
from .model import RabiParams, ThreeRingParams, from_description, _rabi_map
from .oracle import MAX_FOCK_DIM, gap_check, small_eigenvalues
from .phase import FAILED, NP, ParamPath, SamplingWarning, classify, critical_points, phase_sequence, scan

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 1, 2, 3


# --------------------------------------------------------------------------
# deterministic number formatting


def fmt(x, snap: float = 0.0) -> str:
    """``.12g`` text; values with ``|x| <= snap`` and negative zero print as ``0``."""
    if x is None:
        return ""
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if abs(x) <= snap:
        return "0"
    s = f"{x:.12g}"
    return "0" if s in ("-0", "0") else s


def _jsonable(v, snap: float = 0.0):
    if isinstance(v, dict):
        return {str(k): _jsonable(x, snap) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x, snap) for x in v]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        s = fmt(v, snap)
        if s in ("nan", "inf", "-inf"):
            return None
        return float(s) if any(c in s for c in ".en") else int(s)
    if isinstance(v, complex):
        return [_jsonable(v.real, snap), _jsonable(v.imag, snap)]
    return v


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n", encoding="utf-8", newline="\n")


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="\n")


# --------------------------------------------------------------------------
# tasks


def _path(cfg: RunConfig) -> ParamPath:
    p = cfg.path
    return ParamPath(cfg.model, p["target"], float(p["lo"]), float(p["hi"]), int(p["samples"]), p["scale"])


def _crit_dict(c) -> dict:
    return {
        "kind": c.kind,
        "param": c.param,
        "bracket": list(c.bracket),
        "indicators": list(c.indicators),
        "crossing": c.crossing,
        "partner": c.partner,
    }


def task_spectrum(cfg: RunConfig, out: Path, **_) -> list[str]:
    eigs = eigenvalues(build(from_description(cfg.model)), cfg.solver)
    pairs = pair(eigs, cfg.solver)
    snap = 1e-11 * max(1.0, float(np.max(np.abs(eigs))))
    rows = [(fmt(e.real, snap), fmt(e.imag, snap)) for p in pairs for e in (p.e_plus, p.e_minus)]
    _write_csv(out / "spectrum.csv", ["re", "im"], rows)
    return ["spectrum.csv"]


def _scan_rows(points):
    for p in points:
        if p.label == FAILED:
            yield (fmt(p.param), FAILED, "", "", "")
        else:
            yield (fmt(p.param), p.label, fmt(p.max_abs_im), fmt(p.min_abs_e, 1e-12), fmt(p.det, 1e-12))


def task_phase_scan(cfg: RunConfig, out: Path, parallel=None, **_) -> list[str]:
    path = _path(cfg)
    points = scan(path, cfg.solver, parallel=parallel)
    _write_csv(out / "scan.csv", ["param", "label", "max_abs_im", "min_abs_e", "det"], _scan_rows(points))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SamplingWarning)
        crit = critical_points(path, cfg.path.get("tol"), cfg.solver, points=points)
    doc = {"critical": [_crit_dict(c) for c in crit], "warnings": sorted({str(w.message) for w in caught})}
    _write_json(out / "critical.json", doc)
    return ["scan.csv", "critical.json"]


def task_critical(cfg: RunConfig, out: Path, parallel=None, **_) -> list[str]:
    path = _path(cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", SamplingWarning)
        seq = phase_sequence(path, cfg.path.get("tol"), cfg.solver, parallel=parallel)
    doc = {
        "target": path.target,
        "intervals": [{"lo": iv.lo, "hi": iv.hi, "label": iv.label} for iv in seq.intervals],
        "boundaries": [_crit_dict(c) for c in seq.boundaries],
        "critical": [_crit_dict(c) for c in seq.critical],
        "warnings": sorted({str(w.message) for w in caught}),
    }
    _write_json(out / "critical.json", doc)
    return ["critical.json"]


def family_from_model(desc: dict) -> Family:
    kind = desc["type"]
    if kind == "single_mode":
        return Family.single_mode(desc["omega"], desc["chi"])
    if kind == "rabi":
        omega, chi = _rabi_map(RabiParams(desc["omega0"], desc["delta"], desc["eta"]))
        return Family.single_mode(omega, 2 * chi)
    if kind == "three_ring":
        return Family.ring3(ThreeRingParams(desc["omega"], desc["delta"], desc["g"], desc["j_hop"], desc["theta"]))
    raise ConfigError([("/model/type", f"QFI is available for single_mode, rabi and three_ring models, not {kind!r}")])


def task_qfi(cfg: RunConfig, out: Path, **_) -> list[str]:
    q = cfg.qfi
    fam = family_from_model(cfg.model)
    phi = q["phi"]
    if phi not in fam.params:
        raise ConfigError([("/qfi/phi", f"target not found: {phi!r} (choose from {list(fam.params)})")])
    at = float(q.get("at", fam.params[phi]))
    res = qfi(fam, phi, at, step=q["step"], n_max=q.get("n_max"), richardson=q["richardson"])
    doc = dataclasses.asdict(res)
    doc["prefactors"] = reference_prefactors(fam.with_value(phi, at), phi)
    _write_json(out / "qfi.json", doc)
    written = ["qfi.json"]
    if "gaps" in q:
        sc = scaling_exponent(fam, phi, q["gaps"], step=q["step"], n_max=q.get("n_max"))
        _write_csv(out / "scaling.csv", ["gap", "F"], [(fmt(g), fmt(f)) for g, f in zip(sc.gaps, sc.F)])
        _write_json(out / "scaling.json", {
            "phi": phi, "slope": sc.slope, "intercept": sc.intercept, "r2": sc.r2,
            "nonlinear": sc.nonlinear, "prefactor": sc.prefactor, "prefactors": sc.prefactors,
        })
        written += ["scaling.csv", "scaling.json"]
    return written


def task_dump_matrix(cfg: RunConfig, out: Path, **_) -> list[str]:
    rows = [(i, j, fmt(re), fmt(im)) for i, j, re, im in dump_rows(build(from_description(cfg.model)))]
    _write_csv(out / "matrix.csv", ["row", "col", "re", "im"], rows)
    return ["matrix.csv"]


def _four_phase_analysis(desc: dict, opts: SolverOptions) -> dict | None:
    """For the equal-frequency two-mode model with only chi1 and lambda, adjudicate
    the NP/SP sequence along chi1 against the closed-form windows."""
    if desc["type"] != "two_mode":
        return None
    w, w2, lam = desc["omega1"], desc["omega2"], abs(complex(desc["lambda"]))
    if w != w2 or w <= 0 or desc["chi2"] != 0 or desc["g"] != 0 or lam == 0:
        return None
    r = lam * lam / (w * w)
    dp = (lam * lam - w * w) / (2 * w)
    hi = max(2.0 * w, 1.25 * dp)
    base = {**desc, "chi1": 0.0}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", SamplingWarning)
        seq = phase_sequence(ParamPath(base, "chi1", 0.0, hi, 801), opts=opts)
    derived_eps = []
    if r >= 4:
        root = lam * math.sqrt(lam * lam - 4 * w * w)
        derived_eps = sorted(math.sqrt((lam * lam + s * root) / 2) for s in (-1, 1))
    observed_four = seq.labels == ["NP", "SP", "NP", "SP"]
    claimed_four = r > 5.40205
    return {
        "lambda_sq_over_omega_sq": r,
        "derived_four_phase_window": [4.0, 2 + math.sqrt(5)],
        "derived_predicts_four_phases": 4 < r < 2 + math.sqrt(5),
        "reference_window_lower_bound": 5.40205,
        "reference_predicts_four_phases": claimed_four,
        "observed_sequence": seq.labels,
        "observed_boundaries": [{"kind": b.kind, "param": b.param} for b in seq.boundaries],
        "observed_four_phases": observed_four,
        "derived_ep_chi1": derived_eps,
        "dp_chi1": dp if dp > 0 else None,
        "conflict_with_reference": claimed_four != observed_four,
        "note": (
            "EP condition used: chi1^2 = (lambda^2 +- lambda sqrt(lambda^2 - 4 omega^2)) / 2; the commonly quoted "
            "form sqrt(lambda^2/2 +- sqrt(1 - 4 omega^2/lambda^2)/2) mixes dimensions and is not used"
        ),
    }


def run_checks(desc: dict, opts: SolverOptions, n_max: int | None = None) -> dict:
    h = from_description(desc)
    m = build(h)
    a = np.asarray(m)
    checks = []

    def add(name, ok, **detail):
        checks.append({"name": name, "pass": bool(ok), **detail})

    add("symmetry_residual", symmetry_residual(m) == 0.0, residual=symmetry_residual(m))
    eigs = eigenvalues(m, opts)
    pairs = pair(eigs, opts)
    defect = max(p.defect / (1 + abs(p.e_plus)) for p in pairs)
    add("pairing", defect <= 1e-8, max_defect=defect)
    norm = float(np.linalg.norm(a, 2))
    tr = abs(complex(np.sum(eigs)))
    add("trace", tr <= 1e-9 * max(norm, 1e-300), abs_sum=tr)
    t2 = complex(np.trace(a @ a))
    s2 = complex(np.sum(eigs**2))
    add("trace_squares", abs(s2 - t2) <= 1e-9 * max(abs(t2), norm**2 * 1e-6, 1e-300), deviation=abs(s2 - t2))
    det = determinant(m)
    prod = complex(np.prod(eigs)).real
    add("determinant", abs(det - prod) <= 1e-8 * max(abs(det), abs(prod), norm ** a.shape[0] * 1e-12),
        lu=det, eigen_product=prod)
    if h.n_modes <= 2:
        ref = small_eigenvalues(m)
        scale = float(np.max(np.abs(ref))) or 1.0
        dev = max(float(np.min(np.abs(ref - e))) for e in eigs) / scale
        add("closed_form_spectrum", dev <= 1e-9, max_rel_deviation=dev)
    label = classify(eigs, opts.tol_im)
    if n_max is None:
        n_max = {1: 60, 2: 40, 3: 8}.get(h.n_modes)
    # a truncated Fock basis only brackets a spectrum that is bounded below
    bounded = label == NP and float(np.min(particle_energies(m, eigs, opts).real)) > 0
    if bounded and n_max is not None and (n_max + 1) ** h.n_modes <= MAX_FOCK_DIM:
        rep = gap_check(h, n_max)
        ok = rep.rel_dev <= 1e-3 and rep.e0_dev <= 1e-3 * max(1.0, abs(rep.formula_e0))
        add("fock_gap", ok, **rep.as_dict())
    else:
        reason = f"phase {label}" if label != NP else "not bounded below" if not bounded else f"n_max {n_max}"
        checks.append({"name": "fock_gap", "pass": None, "skipped": reason})
    report = {
        "model": desc,
        "phase": label,
        "checks": checks,
        "pass": all(c["pass"] is not False for c in checks),
        "notes": [],
    }
    four = _four_phase_analysis(desc, opts)
    if four is not None:
        report["four_phase_window"] = four
        if four["conflict_with_reference"]:
            report["notes"].append(
                f"conflict: the reference window lambda^2 > 5.40205 omega^2 predicts "
                f"{'four' if four['reference_predicts_four_phases'] else 'no four'} phases at "
                f"lambda^2/omega^2 = {four['lambda_sq_over_omega_sq']:.6g}, but the spectrum gives "
                f"{' -> '.join(four['observed_sequence'])}"
            )
    return report


def task_check(cfg: RunConfig, out: Path, **_) -> list[str]:
    report = run_checks(cfg.model, cfg.solver, cfg.check.get("n_max"))
    report["model"] = {k: _jsonable(v) for k, v in report["model"].items()}
    _write_json(out / "check.json", report)
    if not report["pass"]:
        raise NumericError("one or more oracle checks failed; see check.json")
    return ["check.json"]


TASK_FUNCS = {
    "spectrum": task_spectrum,
    "phase-scan": task_phase_scan,
    "critical": task_critical,
    "qfi": task_qfi,
    "check": task_check,
    "dump-matrix": task_dump_matrix,
}


def run(cfg: RunConfig, out: Path, *, parallel: int | None = None) -> list[str]:
    """Execute ``cfg.task``, writing artifacts into ``out``; returns file names."""
    out.mkdir(parents=True, exist_ok=True)
    return TASK_FUNCS[cfg.task](cfg, out, parallel=parallel)


# --------------------------------------------------------------------------
# argument handling


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="JSON run configuration")
    common.add_argument("--out", default="hbphase-out", help="output directory (default: %(default)s)")
    common.add_argument("--parallel", type=int, default=None, metavar="N", help="worker processes for scans")
    common.add_argument("--seed", type=int, default=None, help="seed for inverse-iteration start vectors")
    common.add_argument("--tol-im", type=float, default=None, help="relative threshold on |Im E| for SP")
    common.add_argument("--max-sweeps", type=int, default=None, help="QR iteration cap")
    common.add_argument("--no-balance", action="store_true", help="disable matrix balancing")

    parser = argparse.ArgumentParser(prog="hbphase", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="run the task named in the config")
    for t in TASKS:
        sub.add_parser(t, parents=[common], help=f"run the {t} task")
    return parser


def _apply_flags(cfg: RunConfig, args) -> RunConfig:
    s = cfg.solver
    solver = SolverOptions(
        balance=s.balance and not args.no_balance,
        max_sweeps=args.max_sweeps if args.max_sweeps is not None else s.max_sweeps,
        tol_im=args.tol_im if args.tol_im is not None else s.tol_im,
        seed=args.seed if args.seed is not None else s.seed,
    )
    task = cfg.task if args.command == "run" else args.command
    return dataclasses.replace(cfg, solver=solver, task=task)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text(encoding="utf-8")
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = _apply_flags(parse_config(text), args)
        if cfg.task in ("phase-scan", "critical") and cfg.path is None:
            raise ConfigError([("/path", f"task {cfg.task!r} needs a 'path' section")])
        if cfg.task == "qfi" and cfg.qfi is None:
            raise ConfigError([("/qfi", "task 'qfi' needs a 'qfi' section")])
        files = run(cfg, Path(args.out), parallel=args.parallel)
    except (ConfigError, InvalidHamiltonian, KeyError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NumericError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HBError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    for f in files:
        print(Path(args.out) / f)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
