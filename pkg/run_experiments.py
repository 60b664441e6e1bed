#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Ising Toolkit Experiment Runner
Main entry point: one subcommand per experiment, CSV/JSON artifacts with a metadata header
"""

import argparse
import sys
import time
import traceback
from dataclasses import asdict
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app import annealed, tree
from app.config import get_settings
from app.data_provider import create_data_provider
from app.data_writer import build_metadata, create_data_writer
from app.dynamics import annealed_ratio_prediction, drift_sign_changes, estimate_ratios, mixing_experiment, projection_chain
from app.exceptions import InvalidInputError, NoInteriorRootError, ToolkitError
from app.executor import run_replicas
from app.graph import Pairing, sample_uniform_pairing
from app.planted import PlantedSampler, planted_edge_concentration_test
from app.report_generator import checks_to_frame, run_validation_suite
from app.rng import make_stream
from app.schemas import SUBCOMMANDS, ExperimentConfig
from app.stats import zb_check
from app.utils.logger import configure_from_settings, get_logger
from app.utils.trace_logger import trace_error, trace_result, trace_start

logger = get_logger(__name__)

GRAPH_STREAM = 1 << 32

# Flag name -> argparse type; all default to None so flags override the config file
FLAGS: Tuple[Tuple[str, Callable], ...] = (
    ("d", int), ("beta", float), ("h", float), ("eta", float), ("k", int), ("n", int),
    ("seed", int), ("replicas", int), ("sweeps", int), ("burn-in", int), ("out", str),
    ("points", int), ("depth", int), ("samples", int), ("init", str), ("variant", str),
    ("projection", str), ("pairing", str), ("workers", int), ("log-level", str),
)

Outcome = Tuple[Any, Dict[str, Any], bool]


# ---------------------- helpers ----------------------

def load_pairing(config: ExperimentConfig) -> Pairing:
    """The pairing file when given, otherwise a uniform pairing from the graph stream"""
    if config.pairing is not None:
        pairing = create_data_provider("pairing", str(config.pairing)).load()
        if config.n is not None and config.n != pairing.n:
            raise InvalidInputError(f"pairing file has n={pairing.n}, config asks n={config.n}")
        if pairing.d != config.d:
            raise InvalidInputError(f"pairing file has d={pairing.d}, config asks d={config.d}")
        return pairing
    return sample_uniform_pairing(config.n, config.d, make_stream(config.seed, GRAPH_STREAM))


def _optional(value: Optional[float]) -> float:
    return float("nan") if value is None else float(value)


def _m_star(d: int, beta: float) -> float:
    try:
        return annealed.F_root(d, beta)
    except NoInteriorRootError:
        return float("nan")


# ---------------------- subcommands ----------------------

def run_thresholds(config: ExperimentConfig) -> Outcome:
    beta_c, beta_r = tree.thresholds(config.d)
    frame = pd.DataFrame([{
        "d": config.d,
        "beta": config.beta,
        "beta_c": beta_c,
        "beta_r": beta_r,
        "critical_field": tree.critical_field(config.d, config.beta),
        "eta_star": annealed.eta_star(config.d, config.beta),
        "m_star": _m_star(config.d, config.beta),
        "eta_s": _optional(annealed.spinodal(config.d, config.beta)),
    }])
    return frame, {}, True


def run_free_energy_curve(config: ExperimentConfig) -> Outcome:
    curve = annealed.free_energy_curve(config.d, config.beta, config.points)
    extra = {"eta_star": curve.eta_star, "eta_s": curve.eta_s}
    return curve.to_frame(), extra, True


def run_bp(config: ExperimentConfig) -> Outcome:
    measures = tree.bp_fixed_points(tree.ModelParams(config.d, config.beta, config.h))
    frame = pd.DataFrame([{
        "R": m.R,
        "eta": m.eta,
        "rho": m.rho,
        "stable": m.stable,
        "lambda2": tree.second_eigenvalue(m),
        "ks_product": tree.kesten_stigum_product(m),
    } for m in measures])
    extra = {"num_fixed_points": len(measures), "critical_field": tree.critical_field(config.d, config.beta)}
    return frame, extra, True


def run_reconstruction(config: ExperimentConfig) -> Outcome:
    eta = config.magnetization()

    def task(index: int, rng: np.random.Generator):
        return tree.reconstruction_tv(config.d, config.beta, eta, index + 1, config.samples, rng)

    results = run_replicas(task, config.seed, config.depth, config.workers)
    frame = pd.DataFrame({
        "depth": np.arange(1, config.depth + 1),
        "tv": [r[0] for r in results],
        "stderr": [r[1] for r in results],
    })
    return frame, {"beta_r": tree.thresholds(config.d)[1]}, True


def run_sample_planted(config: ExperimentConfig) -> Outcome:
    n = config.n
    k_plus = config.plus_count(n)
    sampler = PlantedSampler(n, config.d, config.beta, k_plus)
    samples = run_replicas(lambda index, rng: sampler.sample(rng), config.seed, config.replicas, config.workers)
    frame = pd.DataFrame({
        "replica": np.arange(len(samples)),
        "bichromatic": [s.bichromatic_count for s in samples],
        "H": [s.config.H for s in samples],
        "rho_hat": [s.rho_hat for s in samples],
    })
    report = planted_edge_concentration_test(samples, config.beta)
    if config.out is not None:
        sample_path = config.out.with_suffix(".planted.txt")
        create_data_writer("text", str(sample_path)).write(samples[0].to_text(), {})
    return frame, asdict(report), report.passed


def run_dynamics(config: ExperimentConfig) -> Outcome:
    pairing = load_pairing(config)

    def task(index: int, rng: np.random.Generator):
        trajectory = mixing_experiment(pairing, config.beta, config.init, config.sweeps, rng, config.variant)
        trajectory.insert(0, "replica", index)
        return trajectory

    frames = run_replicas(task, config.seed, config.replicas, config.workers)
    return pd.concat(frames, ignore_index=True), {"n": pairing.n}, True


def run_projection(config: ExperimentConfig) -> Outcome:
    pairing = load_pairing(config)
    n = pairing.n
    k_min = min(config.plus_count(n), n - 1)
    k_values = list(range(k_min, n))
    estimates = estimate_ratios(pairing, config.beta, k_values, config.sweeps, config.burn_in,
                                config.seed, config.workers)
    chain = projection_chain(
        n,
        dict(zip(estimates["k"], estimates["ratio"])),
        dict(zip(estimates["k"], estimates["stderr"])),
        variant=config.projection,
    )
    frame = chain.to_frame()
    frame["annealed_F"] = annealed_ratio_prediction(pairing.d, config.beta, k_values, n)
    extra = {"sign_changes": drift_sign_changes(chain), "m_star": _m_star(pairing.d, config.beta)}
    return frame, extra, True


def run_oracle_validate(config: ExperimentConfig) -> Outcome:
    results = run_validation_suite()
    return checks_to_frame(results), {}, all(r.passed for r in results)


def run_zb_check(config: ExperimentConfig) -> Outcome:
    fixed = load_pairing(config) if config.pairing is not None else None
    n = fixed.n if fixed is not None else config.n

    def task(index: int, rng: np.random.Generator):
        return zb_check(config.d, config.beta, n, config.sweeps, config.burn_in, rng, pairing=fixed)

    reports = run_replicas(task, config.seed, config.replicas, config.workers)
    frame = pd.DataFrame([asdict(r) for r in reports])
    frame.insert(0, "replica", np.arange(len(reports)))
    return frame, {}, all(r.passed for r in reports)


SUBCOMMAND_HANDLERS: Dict[str, Callable[[ExperimentConfig], Outcome]] = {
    "thresholds": run_thresholds,
    "free-energy-curve": run_free_energy_curve,
    "bp": run_bp,
    "reconstruction": run_reconstruction,
    "sample-planted": run_sample_planted,
    "run-dynamics": run_dynamics,
    "projection": run_projection,
    "oracle-validate": run_oracle_validate,
    "zb-check": run_zb_check,
}


def run_experiment(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Run one subcommand and write its CSV

    Args:
        config: Validated experiment configuration

    Returns:
        Dictionary with status, row count, pass flag and output path
    """
    params = config.echo()
    trace_start(config.subcommand, {"seed": config.seed})
    start = time.perf_counter()
    logger.info(f"Starting {config.subcommand}...")
    try:
        # Step 1: compute
        frame, extra, passed = SUBCOMMAND_HANDLERS[config.subcommand](config)

        # Step 2: write
        output = str(config.out) if config.out is not None else None
        create_data_writer("csv", output).write(frame, build_metadata(params, config.seed, extra))
    except Exception as e:
        trace_error(config.subcommand, str(e))
        logger.error(f"[ERROR] {config.subcommand} failed: {e}")
        logger.error(traceback.format_exc())
        raise

    duration_ms = (time.perf_counter() - start) * 1000.0
    trace_result(config.subcommand, rows=len(frame), duration_ms=duration_ms)
    logger.info(f"{config.subcommand} completed: {len(frame)} rows, passed={passed}")
    return {"status": "success", "rows": len(frame), "passed": bool(passed), "output": output}


# ---------------------- command line ----------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Fixed-magnetization Ising experiments on random regular graphs")
    parser.add_argument("subcommand", choices=SUBCOMMANDS, help="Experiment to run")
    parser.add_argument("--config", help="key = value configuration file; flags override it")
    for name, kind in FLAGS:
        parser.add_argument(f"--{name}", type=kind, default=None)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Merge the config file with the flags and validate"""
    values: Dict[str, Any] = {}
    if args.config:
        values.update(create_data_provider("config", args.config).load())
    for name, _ in FLAGS:
        key = name.replace("-", "_")
        flag = getattr(args, key)
        if flag is not None:
            values[key] = flag
    values["subcommand"] = args.subcommand
    return ExperimentConfig(**values)


def main(argv: Optional[List[str]] = None) -> int:
    """
    Command-line interface for the toolkit

    Returns:
        0 on success, 1 on a validation failure, 2 on a usage error
    """
    settings = get_settings()
    configure_from_settings(settings)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    try:
        config = resolve_config(args)
    except (ValidationError, ToolkitError) as e:
        logger.error(f"[ERROR] invalid configuration: {e}")
        print(f"Error: {e}", file=sys.stderr)
        return 2
    configure_from_settings(settings, config.log_level)

    try:
        result = run_experiment(config)
    except ToolkitError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    return 0 if result["passed"] else 1


if __name__ == "__main__":
    sys.exit(main())
