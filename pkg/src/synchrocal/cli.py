"""Command-line front end.

Subcommands::

    simulate-line   synthetic PMU CSV + truth sidecar
    simulate-gen    synthetic generator series CSV + truth sidecar
    estimate-line   line parameters + bootstrap credibility report
    estimate-gen    generator parameters + bootstrap credibility report
    screen          estimate -> credibility -> discrepancy -> persistence
                    (and calibration when a consistent discrepancy appears)
    calibrate       feasible-region scan + DBSCAN selection

Exit codes: 0 success, 2 input/parse error, 3 numerical failure,
4 flag raised in screen mode with --fail-on-flag.

A ``--config`` JSON file holds a flat object whose keys are the long flag
names with underscores (``{"bound_fraction": 0.2, "seed": 7}``); flags
given on the command line win over the file.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Any


from . import __version__
from .bias_calibration import (
    ALL_CHANNELS,
    DEFAULT_EPS_LADDER,
    CalibrationResult,
    ScanConfig,
    calibrate,
)
from .credibility import (
    ScreeningConfig,
    ScreeningOutcome,
    bootstrap,
    credibility_metric,
    generator_estimator,
    generator_reference_values,
    generator_rows,
    line_reference_values,
    screen,
)
from .errors import InputError, NumericalError, ParseError
from .gen_estimator import GeneratorParameters, arma_from_params, estimate_generator
from .line_estimator import LABELS, estimate_line, pack_unknowns, sequence_values
from .phasors import BiasVector, LineParameters
from .pmu_io import read_gen_csv, read_json, read_pmu_csv, write_gen_csv, write_json, write_pmu_csv, fmt
from .refdb import LineReference, expand_reference, load_store, save_store
from .simulator import GenScenario, make_line_scenario, prbs_input, simulate_gen, simulate_line, step_input

log = logging.getLogger("synchrocal")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_FLAG = 0, 2, 3, 4

DEFAULTS: dict[str, Any] = {
    # simulate-line
    "snapshots": 20,
    "r": 0.01,
    "x": 0.10,
    "b": 0.20,
    "z0_re": None,
    "z0_im": None,
    "b0": None,
    "r_factor": 1.0,
    "x_factor": 1.0,
    "b_factor": 1.0,
    "noise_mag": 0.0,
    "noise_ang": 0.0,
    "bias": [],
    "balanced": False,
    "unbalance": 0.0,
    # simulate-gen
    "h": 4.0,
    "t": 0.3,
    "kd": 1.0,
    "kr": 0.05,
    "step": 0.02,
    "samples": 1000,
    "step_size": 0.1,
    "noise": 0.0,
    "excitation": "step",
    # estimation / screening
    "bound_fraction": 0.30,
    "resamples": 200,
    "epsilon": 0.05,
    "discrepancy": 0.10,
    "persistence": "3/5",
    "calibrate": True,
    "fail_on_flag": False,
    "update_refdb": False,
    # calibration
    "alpha": 0.10,
    "points": "41,41,41",
    "eps_ladder": None,
    "min_pts": 3,
    "curves": None,
    "parallel": 1,
}


class CliError(InputError):
    pass


def _settings(args: argparse.Namespace) -> dict[str, Any]:
    """Merge defaults < config file < command-line flags."""
    merged = dict(DEFAULTS)
    if getattr(args, "config", None):
        doc = read_json(args.config)
        if not isinstance(doc, dict):
            raise ParseError(f"{args.config}: config must be a flat JSON object")
        for k, v in doc.items():
            if isinstance(v, (dict, list)) and k != "bias":
                raise ParseError(f"{args.config}: {k}: nested values are not allowed")
            merged[k.replace("-", "_")] = v
    for k, v in vars(args).items():
        if k in ("func", "config"):
            continue
        if v is not None:
            merged[k] = v
    return merged


def _require(cfg: dict, *keys: str) -> None:
    for k in keys:
        if cfg.get(k) is None:
            raise CliError(f"--{k.replace('_', '-')} is required")


def _parse_bias(items) -> BiasVector:
    values = {}
    for item in items or []:
        key, _, val = str(item).partition("=")
        key = key.strip()
        if not key.startswith("d_"):
            key = "d_" + key
        if key not in ALL_CHANNELS or not val:
            raise CliError(f"bad --bias {item!r}; use e.g. d_is=0.01 (channels {', '.join(ALL_CHANNELS)})")
        try:
            values[key] = float(val)
        except ValueError:
            raise CliError(f"bad --bias value in {item!r}") from None
    try:
        return BiasVector(**values)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _persistence(text: str) -> tuple[int, int]:
    try:
        m, n = (int(v) for v in str(text).split("/"))
    except ValueError:
        raise CliError(f"--persistence expects M/N, got {text!r}") from None
    return m, n


def _points(text) -> tuple[int, int, int]:
    try:
        counts = tuple(int(v) for v in str(text).split(","))
    except ValueError:
        raise CliError(f"--points expects three integers like 201,1,1, got {text!r}") from None
    if len(counts) != 3:
        raise CliError(f"--points expects three integers, got {text!r}")
    return counts


def _ladder(value) -> tuple[float, ...]:
    if value is None:
        return DEFAULT_EPS_LADDER
    try:
        return tuple(float(v) for v in str(value).split(","))
    except ValueError:
        raise CliError(f"--eps-ladder expects comma-separated numbers, got {value!r}") from None


def _report(command: str, cfg: dict, results: dict, timings: dict) -> dict:
    echo = {k: v for k, v in cfg.items() if k not in ("out", "curves", "truth")}
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": "synchrocal",
        "version": __version__,
        "command": command,
        "config": echo,
        "results": results,
        "timings": timings,
    }


def _line_truth_doc(params: LineParameters) -> dict:
    seq = sequence_values(params)
    return {
        **seq,
        "z_abc_re": params.z_abc.real,
        "z_abc_im": params.z_abc.imag,
        "b_abc": params.b_abc,
        "unknowns": dict(zip(LABELS, pack_unknowns(params.z_abc, params.g_abc, params.b_abc))),
    }


# -- subcommands -------------------------------------------------------------


def cmd_simulate_line(cfg: dict) -> int:
    _require(cfg, "out", "seed")
    n = int(cfg["snapshots"])
    if n < 1:
        raise CliError("--snapshots must be at least 1")
    r = float(cfg["r"]) * float(cfg["r_factor"])
    x = float(cfg["x"]) * float(cfg["x_factor"])
    b = float(cfg["b"]) * float(cfg["b_factor"])
    z1 = complex(r, x)
    z0 = complex(cfg["z0_re"], cfg["z0_im"]) if cfg["z0_re"] is not None else 3 * z1
    b0 = float(cfg["b0"]) if cfg["b0"] is not None else 0.6 * b
    try:
        truth_ref = LineReference("truth", r, x, b, z0=z0, b0=b0)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    params = expand_reference(truth_ref)
    bias = _parse_bias(cfg["bias"])
    noise = (float(cfg["noise_mag"]), float(cfg["noise_ang"]))
    if noise[0] < 0 or noise[1] < 0:
        raise CliError("noise levels must be non-negative")
    unbalance = float(cfg["unbalance"])
    if not 0 <= unbalance < 0.5:
        raise CliError("--unbalance must lie in [0, 0.5)")
    scenario = make_line_scenario(params, n, int(cfg["seed"]), noise, bias, bool(cfg["balanced"]),
                                  unbalance=unbalance)
    _, measured = simulate_line(scenario)
    out = Path(cfg["out"])
    write_pmu_csv(out, measured)
    truth_path = Path(cfg.get("truth") or str(out) + ".truth.json")
    write_json(truth_path, {
        "schema_version": SCHEMA_VERSION,
        "kind": "line",
        "true_params": _line_truth_doc(params),
        "bias": bias.as_dict(),
        "noise": {"sigma_mag": noise[0], "sigma_ang": noise[1]},
        "seed": int(cfg["seed"]),
        "snapshot_count": n,
        "balanced": bool(cfg["balanced"]),
        "unbalance": unbalance,
    })
    log.info("wrote %d snapshots to %s", n, out)
    return EXIT_OK


def cmd_simulate_gen(cfg: dict) -> int:
    _require(cfg, "out", "seed")
    try:
        params = GeneratorParameters(float(cfg["h"]), float(cfg["t"]), float(cfg["kd"]), float(cfg["kr"]))
        n = int(cfg["samples"])
        if cfg["excitation"] == "prbs":
            u = prbs_input(n, float(cfg["step_size"]), int(cfg["seed"]))
        elif cfg["excitation"] == "step":
            u = step_input(n, float(cfg["step_size"]))
        else:
            raise CliError(f"unknown excitation {cfg['excitation']!r}; use step or prbs")
        scenario = GenScenario(params, float(cfg["step"]), u, float(cfg["noise"]), int(cfg["seed"]))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    series = simulate_gen(scenario)
    out = Path(cfg["out"])
    write_gen_csv(out, series)
    coeffs = arma_from_params(params, scenario.step_h)
    write_json(Path(cfg.get("truth") or str(out) + ".truth.json"), {
        "schema_version": SCHEMA_VERSION,
        "kind": "generator",
        "true_params": params.as_dict(),
        "arma": coeffs.__dict__,
        "step_h": scenario.step_h,
        "noise_sigma": scenario.noise_sigma,
        "seed": scenario.rng_seed,
        "samples": n,
        "excitation": cfg["excitation"],
    })
    return EXIT_OK


def _bootstrap_block(dists, refs: dict, epsilon: float, point: dict) -> dict:
    block = {}
    for d in dists:
        entry = {"estimate": point.get(d.parameter_label, d.mean), "mean": d.mean, "std_dev": d.std_dev}
        ref = refs.get(d.parameter_label)
        if ref:
            c = credibility_metric(d, ref, epsilon, entry["estimate"])
            entry.update(x_ref=c.x_ref, metric=c.metric, credible=c.credible, threshold=c.threshold)
        block[d.parameter_label] = entry
    return block


def cmd_estimate_line(cfg: dict) -> int:
    _require(cfg, "input", "refdb", "asset_id", "seed", "out")
    t0 = time.perf_counter()
    snapshots = read_pmu_csv(cfg["input"])
    ref = load_store(cfg["refdb"]).line(cfg["asset_id"])
    f = float(cfg["bound_fraction"])
    try:
        est = estimate_line(snapshots, ref, f)
    except NumericalError as exc:
        raise type(exc)(f"line {ref.id}: {exc}") from None
    seq = sequence_values(est.params)

    def estimator(snaps):
        e = estimate_line(snaps, ref, f)
        return {**sequence_values(e.params), **e.as_dict()}

    t1 = time.perf_counter()
    dists = bootstrap(snapshots, estimator, int(cfg["resamples"]), int(cfg["seed"]), int(cfg["parallel"]))
    ref_values = {**line_reference_values(ref)}
    ref_params = expand_reference(ref)
    ref_values.update({k: v for k, v in zip(LABELS, pack_unknowns(ref_params.z_abc, ref_params.g_abc, ref_params.b_abc)) if v != 0})
    point = {**seq, **est.as_dict()}
    results = {
        "asset_id": ref.id,
        "estimate": {
            "sequence": seq,
            "unknowns": est.as_dict(),
            "residual_norm": est.residual_norm,
            "condition_estimate": est.condition_estimate,
            "consistency": est.consistency,
            "snapshots_used": est.snapshots_used,
            "active_bounds": list(est.active_bounds),
        },
        "credibility": _bootstrap_block(dists, ref_values, float(cfg["epsilon"]), point),
    }
    t2 = time.perf_counter()
    write_json(cfg["out"], _report("estimate-line", cfg, results, {"estimate_s": t1 - t0, "bootstrap_s": t2 - t1}))
    return EXIT_OK


def cmd_estimate_gen(cfg: dict) -> int:
    _require(cfg, "input", "refdb", "asset_id", "seed", "out")
    t0 = time.perf_counter()
    series = read_gen_csv(cfg["input"], cfg.get("step_override"))
    ref = load_store(cfg["refdb"]).generator(cfg["asset_id"])
    try:
        params, fit = estimate_generator(series)
    except NumericalError as exc:
        raise type(exc)(f"generator {ref.id}: {exc}") from None
    labels = list(params.as_dict())
    t1 = time.perf_counter()
    dists = bootstrap(generator_rows(series), generator_estimator(series.step_h, labels),
                      int(cfg["resamples"]), int(cfg["seed"]), int(cfg["parallel"]))
    results = {
        "asset_id": ref.id,
        "estimate": {
            "parameters": params.as_dict(),
            "arma": fit.coefficients.__dict__,
            "residual_variance": fit.residual_variance,
            "condition_estimate": fit.condition,
            "step_h": series.step_h,
        },
        "credibility": _bootstrap_block(dists, generator_reference_values(ref), float(cfg["epsilon"]),
                                        params.as_dict()),
    }
    t2 = time.perf_counter()
    write_json(cfg["out"], _report("estimate-gen", cfg, results, {"estimate_s": t1 - t0, "bootstrap_s": t2 - t1}))
    return EXIT_OK


def _scan_config(cfg: dict) -> ScanConfig:
    try:
        return ScanConfig(float(cfg["alpha"]), _points(cfg["points"]), _ladder(cfg["eps_ladder"]),
                          int(cfg["min_pts"]))
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _calibration_block(result: CalibrationResult) -> dict:
    return {
        "candidate": {"r": result.candidate[0], "x": result.candidate[1], "b": result.candidate[2]},
        "candidate_index": result.candidate_index,
        "bias": result.bias.as_dict(),
        "bias_e3": {k: round(v * 1e3, 2) for k, v in result.bias.as_dict().items()},
        "cluster_channels": list(result.cluster_channels),
        "outlier_channels": result.outlier_channels,
        "winning_eps": result.winning_eps,
        "cluster_spread": result.cluster_spread,
        "fit_residual": result.fit_residual,
        "cluster_sizes": list(result.cluster_sizes),
    }


def _write_curves(path, candidates) -> None:
    header = ("r", "x", "b") + ALL_CHANNELS + ("fit_residual",)
    lines = [",".join(header)]
    for c in candidates:
        bias = c.bias_vector().as_dict()
        row = list(c.candidate) + [bias[k] for k in ALL_CHANNELS] + [c.fit_residual]
        lines.append(",".join(fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def _run_calibration(snapshots, ref: LineReference, cfg: dict) -> tuple[dict, float]:
    t0 = time.perf_counter()
    result, candidates = calibrate(snapshots, ref, _scan_config(cfg), int(cfg["parallel"]))
    if cfg.get("curves"):
        _write_curves(cfg["curves"], candidates)
    block = _calibration_block(result)
    block["candidates_scanned"] = len(candidates)
    block["reference"] = {"r": ref.r_ems, "x": ref.x_ems, "b": ref.b_ems}
    block["ratio_to_reference"] = {
        "r": result.candidate[0] / ref.r_ems if ref.r_ems else None,
        "x": result.candidate[1] / ref.x_ems,
        "b": result.candidate[2] / ref.b_ems if ref.b_ems else None,
    }
    return block, time.perf_counter() - t0


def cmd_calibrate(cfg: dict) -> int:
    _require(cfg, "input", "refdb", "asset_id", "out")
    snapshots = read_pmu_csv(cfg["input"])
    ref = load_store(cfg["refdb"]).line(cfg["asset_id"])
    block, dt = _run_calibration(snapshots, ref, cfg)
    write_json(cfg["out"], _report("calibrate", cfg, {"asset_id": ref.id, "calibration": block},
                                   {"calibrate_s": dt}))
    return EXIT_OK


def _outcome_block(o: ScreeningOutcome) -> dict:
    return {
        "status": o.status,
        "window_id": o.report.window_id,
        "parameters": {
            k: {
                "estimate": e.estimate,
                "x_ref": e.x_ref,
                "metric": e.metric,
                "credible": e.credible,
                "threshold": e.threshold,
                "deviation": o.discrepancies[k].deviation,
                "flagged": o.discrepancies[k].flagged,
                "windows_flagged": o.persistence[k],
            }
            for k, e in o.report.entries.items()
        },
        "persistence_window": o.persistence_window,
        "consistent_discrepancy": list(o.consistent),
        "recommend_calibration": o.recommend_calibration,
    }


def cmd_screen(cfg: dict) -> int:
    _require(cfg, "input", "refdb", "asset_id", "seed", "out")
    t0 = time.perf_counter()
    store = load_store(cfg["refdb"])
    asset = cfg["asset_id"]
    m, n = _persistence(cfg["persistence"])
    try:
        sc = ScreeningConfig(float(cfg["epsilon"]), float(cfg["discrepancy"]), m, n, int(cfg["resamples"]),
                             int(cfg["seed"]), float(cfg["bound_fraction"]), int(cfg["parallel"]))
    except ValueError as exc:
        raise CliError(str(exc)) from None
    is_line = asset in store.lines
    ref = store.line(asset) if is_line else store.generator(asset)
    if is_line:
        data = read_pmu_csv(cfg["input"])
        window = str(data[0].timestamp) if data else ""
    else:
        data = read_gen_csv(cfg["input"], cfg.get("step_override"))
        window = ""
    state = store.persistence_for(asset, n)
    outcome = screen(data, ref, sc, state, window)
    results: dict[str, Any] = {"asset_id": asset, "screening": _outcome_block(outcome)}
    timings = {"screen_s": time.perf_counter() - t0}
    if outcome.recommend_calibration and cfg["calibrate"] and is_line:
        block, dt = _run_calibration(data, ref, cfg)
        results["calibration"] = block
        timings["calibrate_s"] = dt
    if cfg["update_refdb"]:
        save_store(store, cfg["refdb"])
    write_json(cfg["out"], _report("screen", cfg, results, timings))
    if outcome.consistent and cfg["fail_on_flag"]:
        return EXIT_FLAG
    return EXIT_OK


# -- argument parsing ---------------------------------------------------------


def _common(p: argparse.ArgumentParser, seed: bool = True) -> None:
    p.add_argument("--config", help="flat JSON file of option values (flags override)")
    p.add_argument("--out", help="output path")
    if seed:
        p.add_argument("--seed", type=int, help="random seed (required)")
    p.add_argument("--parallel", type=int, metavar="N", help="worker threads for bootstrap/scan (default 1)")
    p.add_argument("-v", "--verbose", action="store_true", default=None)


def _inputs(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="measurement CSV")
    p.add_argument("--refdb", help="reference store JSON")
    p.add_argument("--asset-id", "--line-id", "--gen-id", dest="asset_id", help="reference record id")


def _calibration_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha", type=float, help="error band multiplier (default 0.10)")
    p.add_argument("--points", help="grid points per R,X,B axis (default 41,41,41)")
    p.add_argument("--eps-ladder", help="comma-separated DBSCAN distances (default 10 log-spaced 1e-5..1e-2)")
    p.add_argument("--min-pts", type=int, help="DBSCAN minimum points (default 3)")
    p.add_argument("--curves", help="write per-candidate bias curves CSV here")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="synchrocal", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate-line", help="write synthetic PMU CSV and truth sidecar")
    _common(p)
    p.add_argument("--truth", help="truth sidecar path (default <out>.truth.json)")
    p.add_argument("--snapshots", type=int, help="snapshot count (default 20)")
    p.add_argument("--r", type=float, help="positive-sequence resistance, p.u. (default 0.01)")
    p.add_argument("--x", type=float, help="positive-sequence reactance, p.u. (default 0.10)")
    p.add_argument("--b", type=float, help="positive-sequence susceptance, p.u. (default 0.20)")
    p.add_argument("--z0-re", type=float, help="zero-sequence resistance (default 3*r)")
    p.add_argument("--z0-im", type=float, help="zero-sequence reactance (default 3*x)")
    p.add_argument("--b0", type=float, help="zero-sequence susceptance (default 0.6*b)")
    p.add_argument("--r-factor", type=float, help="true r = factor * r (default 1)")
    p.add_argument("--x-factor", type=float, help="true x = factor * x (default 1)")
    p.add_argument("--b-factor", type=float, help="true b = factor * b (default 1)")
    p.add_argument("--noise-mag", type=float, help="magnitude noise std, p.u. (default 0)")
    p.add_argument("--noise-ang", type=float, help="angle noise std, rad (default 0)")
    p.add_argument("--bias", action="append", help="channel bias, e.g. d_is=0.01 (repeatable)")
    p.add_argument("--balanced", action="store_true", default=None,
                   help="purely positive-sequence load and voltage")
    p.add_argument("--unbalance", type=float,
                   help="with --balanced, relative per-phase spread of load and voltage (default 0); "
                        "a small value such as 0.01 lets the 3-phase estimator run on near-balanced data")
    p.set_defaults(func=cmd_simulate_line)

    p = sub.add_parser("simulate-gen", help="write synthetic generator series CSV")
    _common(p)
    p.add_argument("--truth", help="truth sidecar path (default <out>.truth.json)")
    for name, default, what in (("h", 4.0, "inertia constant, s"), ("t", 0.3, "turbine time constant, s"),
                                ("kd", 1.0, "damping, p.u."), ("kr", 0.05, "speed regulation, p.u."),
                                ("step", 0.02, "sampling step, s"), ("step-size", 0.1, "power step, p.u."),
                                ("noise", 0.0, "speed noise std, p.u.")):
        p.add_argument(f"--{name}", type=float, help=f"{what} (default {default})")
    p.add_argument("--samples", type=int, help="series length (default 1000)")
    p.add_argument("--excitation", choices=("step", "prbs"),
                   help="power input: single step or random binary sequence (default step); "
                        "bootstrap credibility needs prbs")
    p.set_defaults(func=cmd_simulate_gen)

    p = sub.add_parser("estimate-line", help="estimate line parameters with bootstrap credibility")
    _common(p)
    _inputs(p)
    p.add_argument("--bound-fraction", type=float, help="box half-width around references (default 0.30)")
    p.add_argument("--resamples", type=int, help="bootstrap resamples (default 200)")
    p.add_argument("--epsilon", type=float, help="credibility threshold (default 0.05)")
    p.set_defaults(func=cmd_estimate_line)

    p = sub.add_parser("estimate-gen", help="estimate generator parameters with bootstrap credibility")
    _common(p)
    _inputs(p)
    p.add_argument("--step", dest="step_override", type=float, help="sampling step, s (default: from time_s)")
    p.add_argument("--resamples", type=int, help="bootstrap resamples (default 200)")
    p.add_argument("--epsilon", type=float, help="credibility threshold (default 0.05)")
    p.set_defaults(func=cmd_estimate_gen)

    p = sub.add_parser("screen", help="screen a reference record against PMU data")
    _common(p)
    _inputs(p)
    p.add_argument("--step", dest="step_override", type=float, help="generator sampling step, s")
    p.add_argument("--bound-fraction", type=float, help="box half-width around references (default 0.30)")
    p.add_argument("--resamples", type=int, help="bootstrap resamples (default 200)")
    p.add_argument("--epsilon", type=float, help="credibility threshold (default 0.05)")
    p.add_argument("--discrepancy", type=float, help="relative deviation that flags (default 0.10)")
    p.add_argument("--persistence", help="M/N windows for a consistent discrepancy (default 3/5)")
    p.add_argument("--no-calibrate", dest="calibrate", action="store_false", default=None,
                   help="do not run calibration when flagged")
    p.add_argument("--fail-on-flag", action="store_true", default=None, help="exit 4 when a flag is raised")
    p.add_argument("--update-refdb", action="store_true", default=None,
                   help="write the updated persistence state back to the store")
    _calibration_flags(p)
    p.set_defaults(func=cmd_screen)

    p = sub.add_parser("calibrate", help="locate PMU biases and true line parameters")
    _common(p, seed=False)
    _inputs(p)
    _calibration_flags(p)
    p.set_defaults(func=cmd_calibrate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _settings(args)
        return args.func(cfg)
    except (InputError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
