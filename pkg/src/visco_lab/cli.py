"""``visco-lab`` command line: run JSON scenarios and the builtin verifications.

Exit codes: 0 all diagnostics pass, 1 a diagnostic fails, 2 configuration
error, 3 numerical abort (blow-up, non-finite state or wall-clock overrun).
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import jsonschema
import numpy as np

from . import diagnostics as diag
from . import homogeneous as hom
from . import spectral
from .models import (MODEL_NAMES, ModelError, builtin_model, conformation_from_stress,
                     map_conformation_to_stress_form, stress_from_conformation, validate_params)
from .tensor import SymTensor2, trace

EXIT_OK, EXIT_DIAGNOSTIC, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3
DEFAULT_OUTPUT = "visco_lab_output"
OUTPUT_ENV = "VISCO_LAB_OUTPUT"

_TRIPLE = {"type": "array", "items": {"type": "number"}, "minItems": 3, "maxItems": 3}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode"],
    "properties": {
        "mode": {"enum": ["homogeneous", "spectral", "verify"]},
        "scenario": {"type": "string"},
        "model": {
            "type": "object",
            "additionalProperties": False,
            "required": ["name"],
            "properties": {"name": {"enum": list(MODEL_NAMES)}, "params": {"type": "object"}},
        },
        "initial": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "C": _TRIPLE,
                "sigma": _TRIPLE,
                "aux": {"type": "number"},
                "velocity": {"enum": ["taylor_green", "random_solenoidal", "from_file"]},
                "amplitude": {"type": "number", "minimum": 0},
                "velocity_file": {"type": "string"},
                "conformation": {"enum": ["identity_scaled", "from_file"]},
                "c_scale": {"type": "number", "minimum": 0},
                "conformation_file": {"type": "string"},
            },
        },
        "flow": {
            "type": "object",
            "additionalProperties": False,
            "required": ["type"],
            "properties": {
                "type": {"enum": sorted(hom.FLOWS)},
                "rate": {"type": "number"},
                "omega": {"type": "number"},
            },
        },
        "numerics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_max": {"type": "number", "exclusiveMinimum": 0},
                "scheme": {"enum": ["rk4", "euler"]},
                "formulation": {"enum": ["conformation", "stress"]},
                "n": {"type": "integer", "minimum": 8},
                "seed": {"type": "integer", "minimum": 0},
                "output_every": {"type": "integer", "minimum": 1},
                "convective_term": {"type": "boolean"},
                "wall_budget": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "output": {"type": "string"},
        "diagnostics": {
            "type": "array",
            "items": {"enum": ["positivity", "stress_bound"]},
            "uniqueItems": True,
        },
    },
}

NUMERIC_DEFAULTS = {"dt": 1e-3, "t_max": 1.0, "scheme": "rk4", "formulation": "conformation",
                    "n": 32, "seed": 0, "output_every": 10, "convective_term": True, "wall_budget": None}


class ConfigError(ValueError):
    """Invalid scenario configuration; ``errors`` lists every violation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass
class ScenarioConfig:
    mode: str
    model_name: Optional[str] = None
    params: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    flow: dict = field(default_factory=dict)
    numerics: dict = field(default_factory=dict)
    output: Optional[str] = None
    diagnostics: list = field(default_factory=lambda: ["positivity", "stress_bound"])
    scenario: Optional[str] = None


def _path(err) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def parse_config(text: str) -> ScenarioConfig:
    """Validate a JSON scenario and apply defaults.

    Raises
    ------
    ConfigError
        With every schema and parameter violation found.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"invalid JSON: {exc}"]) from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = [f"{_path(e)}: {e.message}" for e in sorted(validator.iter_errors(doc), key=lambda e: list(e.path))]
    if not isinstance(doc, dict):
        raise ConfigError(errors or ["configuration must be a JSON object"])
    mode = doc.get("mode")
    model = doc.get("model")
    if mode in ("homogeneous", "spectral") and model is None:
        errors.append(f"<root>: mode {mode!r} requires a model")
    if isinstance(model, dict) and model.get("name") in MODEL_NAMES:
        errors.extend(f"model/params: {m}" for m in validate_params(model["name"], model.get("params", {}) or {}))
    if mode == "verify" and doc.get("scenario") not in VERIFY_SCENARIOS:
        errors.append(f"scenario: must be one of {', '.join(VERIFY_SCENARIOS)}")
    if mode == "homogeneous" and "flow" not in doc:
        errors.append("<root>: mode 'homogeneous' requires a flow")
    n = doc.get("numerics", {}).get("n") if isinstance(doc.get("numerics"), dict) else None
    if isinstance(n, int) and n >= 8 and n & (n - 1):
        errors.append("numerics/n: grid size must be a power of two")
    init = doc.get("initial", {}) if isinstance(doc.get("initial"), dict) else {}
    if "C" in init and "sigma" in init:
        errors.append("initial: give either C or sigma, not both")
    if errors:
        raise ConfigError(errors)
    numerics = dict(NUMERIC_DEFAULTS)
    numerics.update(doc.get("numerics", {}))
    return ScenarioConfig(
        mode=mode,
        model_name=model["name"] if model else None,
        params=dict(model.get("params", {}) or {}) if model else {},
        initial=dict(init),
        flow=dict(doc.get("flow", {})),
        numerics=numerics,
        output=doc.get("output"),
        diagnostics=list(doc.get("diagnostics", ["positivity", "stress_bound"])),
        scenario=doc.get("scenario"),
    )


# ---------------------------------------------------------------------------
# Scenario execution


@dataclass
class RunResult:
    exit_code: int
    files: dict = field(default_factory=dict)
    reports: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def _flow_fn(flow: dict):
    kind = flow["type"]
    if kind == "none":
        return hom.no_flow()
    if kind == "oscillatory_shear":
        return hom.oscillatory_shear(flow.get("rate", 1.0), flow.get("omega", 2.0 * math.pi))
    return hom.FLOWS[kind](flow.get("rate", 1.0))


def _exit_for(reports) -> int:
    return EXIT_OK if all(r.status != diag.FAIL for r in reports) else EXIT_DIAGNOSTIC


def _run_homogeneous(cfg: ScenarioConfig, out: Path) -> RunResult:
    m = builtin_model(cfg.model_name, cfg.params)
    num = cfg.numerics
    form = num["formulation"]
    init = cfg.initial
    if "sigma" in init:
        sigma0 = SymTensor2(*init["sigma"])
        start = sigma0 if form == "stress" else conformation_from_stress(m, sigma0)
    else:
        c0 = SymTensor2(*init.get("C", [1.0, 0.0, 1.0]))
        start = stress_from_conformation(m, c0) if form == "stress" else c0
    scen = hom.HomogeneousScenario(m, start, _flow_fn(cfg.flow), num["dt"], num["t_max"], num["scheme"],
                                   form, aux0=init.get("aux"))
    traj = hom.integrate(scen)
    out.mkdir(parents=True, exist_ok=True)
    traj.to_csv(out / "trajectory.csv")
    result = RunResult(EXIT_OK, {"trajectory": str(out / "trajectory.csv")})
    if form == "conformation":
        sig = stress_from_conformation(m, traj.field, traj.times, traj.aux)
    else:
        sig = traj.field
    if "positivity" in cfg.diagnostics:
        result.reports.append(diag.positivity_from_minima(traj.min_eigenvalues(), traj.times))
    if "stress_bound" in cfg.diagnostics:
        traces = np.asarray(trace(m.to_form_stress(sig)))
        result.reports.append(diag.stress_bound_from_traces(m, list(traces), list(traj.times)))
    diag.write_jsonl(result.reports, out / "diagnostics.jsonl")
    result.files["diagnostics"] = str(out / "diagnostics.jsonl")
    if traj.stop_reason == "blowup":
        result.messages.append(f"blow-up detected at t={traj.stop_time:.9g}")
        result.exit_code = EXIT_ABORT
    else:
        result.exit_code = _exit_for(result.reports)
    return result


def _run_spectral(cfg: ScenarioConfig, out: Path) -> RunResult:
    m = builtin_model(cfg.model_name, cfg.params)
    num, init = cfg.numerics, cfg.initial
    scfg = spectral.SolverConfig(
        n=num["n"], dt=num["dt"], t_max=num["t_max"], model=m,
        init=init.get("velocity", "taylor_green"), amplitude=init.get("amplitude", 1.0), seed=num["seed"],
        init_file=init.get("velocity_file"), c_init=init.get("conformation", "identity_scaled"),
        c_scale=init.get("c_scale", 1.0), c_file=init.get("conformation_file"),
        output_every=num["output_every"], convective_term=num["convective_term"],
        wall_budget=num["wall_budget"])
    art = spectral.run(scfg, out)
    result = RunResult(EXIT_OK, dict(art.files), messages=list(art.log))
    times = art.column("t")
    if "positivity" in cfg.diagnostics:
        result.reports.append(diag.positivity_from_minima(art.column("min_eig_C"), times))
    if "stress_bound" in cfg.diagnostics:
        result.reports.append(diag.stress_bound_from_traces(m, list(art.column("max_tr_sigma_f")), list(times)))
    with open(out / "run.json", "w") as fh:
        json.dump({"status": art.status, "steps": art.steps, "log": art.log, "series": art.series}, fh, indent=1)
    result.files["run"] = str(out / "run.json")
    diag.write_jsonl(result.reports, out / "diagnostics.jsonl")
    result.files["diagnostics"] = str(out / "diagnostics.jsonl")
    result.exit_code = EXIT_ABORT if art.status != "ok" else _exit_for(result.reports)
    return result


def run_scenario(cfg: ScenarioConfig, output_dir=None) -> RunResult:
    """Execute a parsed scenario, writing artifacts under ``output_dir``."""
    out = Path(output_dir or cfg.output or os.environ.get(OUTPUT_ENV) or DEFAULT_OUTPUT)
    if cfg.mode == "verify":
        ok, lines = VERIFY_SCENARIOS[cfg.scenario]()
        return RunResult(EXIT_OK if ok else EXIT_DIAGNOSTIC, messages=lines)
    if cfg.mode == "homogeneous":
        return _run_homogeneous(cfg, out)
    return _run_spectral(cfg, out)


# ---------------------------------------------------------------------------
# Builtin verifications; each returns (passed, printable lines)


def verify_counterexample() -> tuple:
    start = time.perf_counter()
    traj = hom.integrate(hom.counterexample_scenario(dt=1e-5))
    t1 = hom.first_loss_of_positivity(traj)
    elapsed = time.perf_counter() - start
    if t1 is None:
        return False, ["positivity was never lost"]
    delta = abs(t1 - hom.T1_CLOSED_FORM)
    return delta < 1e-5, [f"measured t1      = {t1:.12f}",
                          f"ln 3/(8 sqrt 3)  = {hom.T1_CLOSED_FORM:.12f}",
                          f"|difference|     = {delta:.3e} (limit 1e-5), {elapsed:.2f} s"]


def verify_mapping() -> tuple:
    xp, g = 0.5, 1.0
    m = builtin_model("pec_larson", {"xi_prime": xp, "G": g})
    s = np.linspace(0.0, 100.0, 1000)
    b = np.asarray(map_conformation_to_stress_form(m.conformation, s)[1])
    b_err = float(np.max(np.abs(b - 2.0 * xp / (3.0 * g))))
    dev = hom.formulation_equivalence(m, SymTensor2(1.2, 0.3, 0.8), hom.extensional(1.0), 1e-3, 1.0)
    ok = dev < 1e-8 and b_err < 1e-12
    return ok, [f"max |b - 2xi'/(3G)| over s in [0,100]: {b_err:.3e} (limit 1e-12)",
                f"max formulation deviation (dt=1e-3, T=1): {dev:.3e} (limit 1e-8)"]


def verify_taylor_green() -> tuple:
    m = builtin_model("pec_larson", {"xi_prime": 0.5})
    cfg = spectral.SolverConfig(32, 1e-2, 1.0, m, c_scale=0.0, output_every=1)
    art = spectral.run(cfg)
    grid = cfg.grid
    exact = spectral.taylor_green(grid) * math.exp(-2.0 * art.state.t)
    err = float(np.max(np.abs(art.state.velocity(grid) - exact)) / np.max(np.abs(exact)))
    div = float(art.column("div_residual").max())
    return err < 1e-8 and div < 1e-12, [f"relative error vs exp(-2t) at T=1: {err:.3e} (limit 1e-8)",
                                         f"max divergence residual: {div:.3e} (limit 1e-12)"]


def verify_pec_bound() -> tuple:
    xp = 0.5
    m = builtin_model("pec_larson", {"xi_prime": xp})
    cap = 3.0 / xp
    lines, ok = [], True
    for name in ("extensional", "shear", "rotation"):
        traj = hom.integrate(hom.HomogeneousScenario(m, SymTensor2(2.0, 0.5, 1.0), hom.FLOWS[name](2.0), 1e-3, 5.0))
        top = float(np.max(trace(stress_from_conformation(m, traj.field))))
        ok &= traj.stop_reason == "completed" and top < cap
        lines.append(f"homogeneous {name:11s}: max tr sigma = {top:.9f}, margin {cap - top:.3e}")
    cfg = spectral.SolverConfig(32, 5e-3, 5.0, m, init="random_solenoidal", amplitude=2.0, seed=7, c_scale=2.0)
    art = spectral.run(cfg)
    top = float(art.column("max_tr_sigma").max())
    ok &= art.status == "ok" and top < cap
    lines.append(f"spectral N=32, T=5  : max tr sigma = {top:.9f}, margin {cap - top:.3e}")
    return ok, lines


def verify_mgi_trace() -> tuple:
    m = builtin_model("mgi")
    c0, flow = SymTensor2(1.5, 0.4, 0.7), hom.simple_shear(1.0)
    traj = hom.integrate(hom.HomogeneousScenario(m, c0, flow, 1e-3, 2.0))
    sig = stress_from_conformation(m, traj.field, traj.times)
    tr_err = float(np.max(np.abs(np.asarray(trace(sig)) - m.stretch(traj.times))))
    cay = float(hom.mgi_cayley_defect(m, traj, flow).max())
    dts = [0.02, 0.01, 0.005]
    res = [float(hom.mgi_square_law_residual(m, hom.integrate(hom.HomogeneousScenario(m, c0, flow, d, 1.0)), flow).max())
           for d in dts]
    order = hom.convergence_order(dts, res)
    ok = tr_err < 1e-10 and cay < 1e-10 and order >= 2.0
    return ok, [f"max |tr sigma - Lambda(t)|        = {tr_err:.3e} (limit 1e-10)",
                f"max |L(Dv:sigma) - Dv:sigma^2|    = {cay:.3e} (limit 1e-10)",
                f"sigma^2 law residual order in dt  = {order:.3f} (need >= 2)"]


def verify_lemma9(fields: int = 1000) -> tuple:
    rng = np.random.default_rng(2024)
    fails = 0
    ratio = 0.0
    for _ in range(fields):
        r = diag.gradient_sqrt_inequality(diag.random_spd_field(16, rng))
        fails += r.status != diag.PASS
        ratio = max(ratio, r.details.get("max_ratio", 0.0))
    c = diag.gradient_sqrt_inequality(diag.counter_field(), length=1.0)
    ok = fails == 0 and c.status == diag.INAPPLICABLE and c.details["max_grad_sigma_sq"] == 0.0
    return ok, [f"random SPD fields: {fields - fails}/{fields} pass (largest lhs/rhs = {ratio:.4f})",
                f"non-symmetric field: {c.status}, max|grad sigma^2| = {c.details['max_grad_sigma_sq']:.1e}, "
                f"max|grad sigma| = {c.details['max_grad_sigma']:.4f}"]


VERIFY_SCENARIOS: dict = {
    "counterexample": verify_counterexample,
    "mapping": verify_mapping,
    "taylor-green": verify_taylor_green,
    "pec-bound": verify_pec_bound,
    "mgi-trace": verify_mgi_trace,
    "lemma9": verify_lemma9,
}


# ---------------------------------------------------------------------------
# Entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="visco-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run a JSON scenario")
    r.add_argument("--config", required=True, help="scenario file (JSON)")
    r.add_argument("--output", help=f"output directory (default: ${OUTPUT_ENV} or ./{DEFAULT_OUTPUT})")
    r.add_argument("--seed", type=int, help="override numerics.seed")
    v = sub.add_parser("verify", help="run a builtin verification")
    v.add_argument("name", choices=list(VERIFY_SCENARIOS))
    sub.add_parser("list-models", help="list the model catalog")
    return p


def _print_reports(reports) -> None:
    for r in reports:
        worst = "n/a" if r.worst is None else f"{r.worst:.6g}"
        print(f"{r.name}: {r.status} (worst {worst})")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-models":
        for name in MODEL_NAMES:
            m = builtin_model(name, {"xi_prime": 0.5} if name == "pec_larson"
                              else {"epsilon": 1.0} if name == "pec_general" else {})
            forms = "+".join(f for f, x in (("conformation", m.conformation), ("stress", m.stress)) if x)
            print(f"{name:22s} {forms:20s} {diag.hulsen_form_classifier(m)}")
        return EXIT_OK
    if args.command == "verify":
        ok, lines = VERIFY_SCENARIOS[args.name]()
        for line in lines:
            print(line)
        print(f"{args.name}: {'PASS' if ok else 'FAIL'}")
        return EXIT_OK if ok else EXIT_DIAGNOSTIC
    try:
        cfg = parse_config(Path(args.config).read_text())
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.numerics["seed"] = args.seed
    try:
        result = run_scenario(cfg, args.output)
    except (ModelError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for msg in result.messages:
        print(msg)
    _print_reports(result.reports)
    for kind, path in result.files.items():
        print(f"{kind}: {path}")
    return result.exit_code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
