#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Report Generator for the Ising toolkit
Runs the exact-oracle validation suite and exports golden regression records
"""

import math
import traceback
from dataclasses import asdict, dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.special import expit, logsumexp

from . import annealed, oracle, tree
from .data_writer import build_metadata, create_data_writer
from .dynamics import ChainState, Variant, glauber_step, kawasaki_step, projection_chain, uniform_slice_config
from .graph import Pairing, sample_uniform_pairing
from .rng import make_stream
from .utils.logger import get_logger

logger = get_logger(__name__)

K4_EDGES = ((0, 3), (1, 6), (2, 9), (4, 7), (5, 10), (8, 11))
SUITE_SEED = 20240601
ORACLE_BETAS = (0.0, 0.5, 1.5)


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_error: float
    detail: str = ""


def pairing_from_edges(n: int, d: int, edges: Sequence[Tuple[int, int]]) -> Pairing:
    """Pairing from a list of clone pairs"""
    mate = [-1] * (n * d)
    for a, b in edges:
        mate[a], mate[b] = b, a
    return Pairing(n, d, mate)


def k4_pairing() -> Pairing:
    """The complete graph on four vertices as a 3-regular pairing"""
    return pairing_from_edges(4, 3, K4_EDGES)


def _result(name: str, errors: Sequence[float], tolerance: float, detail: str = "") -> CheckResult:
    worst = float(max(errors)) if len(errors) else 0.0
    return CheckResult(name=name, passed=bool(worst <= tolerance), max_error=worst,
                       detail=detail or f"tolerance {tolerance:g}")


# ---------------------- closed forms ----------------------

def check_free_energy_at_zero() -> CheckResult:
    errors = []
    for d in range(3, 23):
        for beta in np.linspace(0.05, 2.0, 20):
            expected = math.log(2.0) + 0.5 * d * math.log((1.0 + math.exp(beta)) / 2.0)
            errors.append(abs(annealed.f(d, beta, 0.0) - expected))
    return _result("free_energy_at_zero", errors, 1e-12)


def check_edge_fraction_at_zero() -> CheckResult:
    betas = np.linspace(0.0, 3.0, 40)
    errors = [abs(tree.rho_eta(beta, 0.0) - float(expit(beta))) for beta in betas]
    return _result("edge_fraction_at_zero", errors, 1e-12)


def check_drift_at_zero() -> CheckResult:
    """F(0) = 1 and F'(0) = -2 + d(1 - e^-beta)"""
    step = 1e-6
    value_errors, slope_errors = [], []
    for d in range(3, 23):
        for beta in np.linspace(0.05, 2.0, 20):
            value_errors.append(abs(annealed.F(d, beta, 0.0) - 1.0))
            slope = (annealed.F(d, beta, step) - annealed.F(d, beta, -step)) / (2.0 * step)
            slope_errors.append(abs(slope - (-2.0 + d * (1.0 - math.exp(-beta)))))
    value = _result("drift_value_at_zero", value_errors, 1e-12)
    slope = _result("drift_slope_at_zero", slope_errors, 1e-6)
    passed = value.passed and slope.passed
    return CheckResult(name="drift_at_zero", passed=passed,
                       max_error=max(value.max_error, slope.max_error),
                       detail=f"F(0) error {value.max_error:.3g}, F'(0) error {slope.max_error:.3g}")


def check_kesten_stigum_at_threshold() -> CheckResult:
    errors = []
    for d in range(3, 23):
        _, beta_r = tree.thresholds(d)
        measure = tree.field_for_magnetization(d, beta_r, 0.0)
        errors.append(abs(tree.kesten_stigum_product(measure) - 1.0))
    return _result("kesten_stigum_at_threshold", errors, 1e-10)


def check_optimizer_matches_formula() -> CheckResult:
    errors = []
    for d in range(3, 13):
        for beta in np.linspace(0.1, 2.0, 10):
            for eta in np.linspace(-0.9, 0.9, 10):
                errors.append(abs(annealed.argmax_g(d, beta, eta) - tree.rho_eta(beta, eta)))
    return _result("optimizer_matches_formula", errors, 1e-8)


# ---------------------- combinatorics ----------------------

def first_moment_cases(clone_limit: int) -> List[Tuple[int, int]]:
    """All (n, d) with d >= 3, d*n even and d*n <= clone_limit"""
    return [(n, d) for d in range(3, clone_limit + 1) for n in range(1, clone_limit // d + 1)
            if (n * d) % 2 == 0]


def check_first_moment(clone_limit: int = 12) -> CheckResult:
    errors = []
    for n, d in first_moment_cases(clone_limit):
        for beta in ORACLE_BETAS:
            exact = oracle.enumerate_first_moment_table(n, d, beta)
            for k in range(n + 1):
                closed = math.exp(annealed.annealed_first_moment(n, d, beta, k))
                errors.append(abs(closed - exact[k]) / exact[k])
    return _result("first_moment", errors, 1e-10, f"all d*n <= {clone_limit}, beta in {ORACLE_BETAS}")


def check_matching_counts() -> CheckResult:
    """b(k) sums to (N-1)!! and reproduces the six-clone table"""
    errors = []
    for n_plus in range(0, 17):
        for n_minus in range(0, 17 - n_plus):
            if (n_plus + n_minus) % 2 or n_plus + n_minus == 0:
                continue
            support = annealed.valid_support(n_plus, n_minus)
            total = logsumexp([annealed.b_count(n_plus, n_minus, int(k)) for k in support])
            errors.append(abs(total - annealed.log_double_factorial(n_plus + n_minus - 1)))
    errors.append(abs(math.exp(annealed.b_count(3, 3, 1)) - 9.0))
    errors.append(abs(math.exp(annealed.b_count(3, 3, 3)) - 6.0))
    for beta in ORACLE_BETAS:
        pmf = annealed.edge_count_pmf(3, 3, beta)
        expected = 9.0 * math.exp(-beta) / (9.0 * math.exp(-beta) + 6.0 * math.exp(-3.0 * beta))
        errors.append(abs(pmf.probability(1) - expected))
    return _result("matching_counts", errors, 1e-10)


def check_ratio_identity(sampled_n6: int = 50) -> CheckResult:
    """z_{k+1} / z_k against the minus-vertex statistic, both by enumeration"""
    rng = make_stream(SUITE_SEED, 1)
    # every pairing for n <= 4, a seeded sample at n = 6
    every_pairing = oracle.enumerate_pairings(2, 3) + oracle.enumerate_pairings(4, 3)
    sampled = [sample_uniform_pairing(6, 3, rng) for _ in range(sampled_n6)] + [k4_pairing()]
    errors = []
    for pairing, betas in [(p, (1.5,)) for p in every_pairing] + [(p, (0.5, 1.5)) for p in sampled]:
        for beta in betas:
            z = oracle.enumerate_Z(pairing, beta)
            for k in range(pairing.n):
                statistic = oracle.exact_ratio_statistic(pairing, beta, k)
                errors.append(abs(statistic - z[k + 1] / z[k]) / (z[k + 1] / z[k]))
    for beta in ORACLE_BETAS:
        errors.append(abs(oracle.exact_ratio_statistic(k4_pairing(), beta, 1) - 1.5 * math.exp(-beta)))
    return _result("ratio_identity", errors, 1e-10,
                   f"{len(every_pairing)} enumerated pairings, {len(sampled)} sampled")


# ---------------------- chains ----------------------

def _small_pairings(count: int = 4) -> List[Pairing]:
    rng = make_stream(SUITE_SEED, 2)
    return [k4_pairing()] + [sample_uniform_pairing(4, 3, rng) for _ in range(count)]


def check_detailed_balance() -> CheckResult:
    errors = []
    for pairing in _small_pairings():
        for beta in ORACLE_BETAS:
            for variant in Variant:
                k_values = range(pairing.n + 1) if variant == Variant.KAWASAKI else [None]
                for k in k_values:
                    chain = oracle.build_dense_chain(pairing, beta, variant, k)
                    errors.append(chain.detailed_balance_error())
                    errors.append(chain.stationarity_error())
                    errors.append(chain.row_sum_error())
    return _result("detailed_balance", errors, 1e-10, "all five variants, n = 4")


def check_chain_invariants(num_steps: int = 100_000) -> CheckResult:
    """Kawasaki conserves the plus count; restricted chains stay in k >= n/2"""
    rng = make_stream(SUITE_SEED, 3)
    pairing = sample_uniform_pairing(10, 3, rng)
    violations = 0
    state = ChainState(pairing, uniform_slice_config(pairing, 4, rng), 0.7, Variant.KAWASAKI, rng)
    for _ in range(num_steps):
        kawasaki_step(state)
        violations += state.config.k_plus != 4
    restricted = ChainState(pairing, uniform_slice_config(pairing, 5, rng), 0.0, Variant.GLAUBER_PLUS, rng)
    for _ in range(num_steps):
        glauber_step(restricted)
        violations += 2 * restricted.config.k_plus < pairing.n
    return _result("chain_invariants", [float(violations)], 0.0, f"{2 * num_steps} fuzzed steps")


def check_glauber_gap_at_zero() -> CheckResult:
    chain = oracle.build_dense_chain(k4_pairing(), 0.0, Variant.GLAUBER)
    return _result("glauber_gap_at_zero", [abs(chain.absolute_gap - 0.25)], 1e-12)


def check_hybrid_comparison() -> CheckResult:
    """Restricted Glauber gap against the restricted hybrid gap scaled by 1 / (3 n e^{beta d})"""
    margins = []
    for pairing in _small_pairings(2):
        for beta in (0.0, 0.5, 1.0):
            glauber = oracle.build_dense_chain(pairing, beta, Variant.GLAUBER_PLUS).spectral_gap
            hybrid = oracle.build_dense_chain(pairing, beta, Variant.HYBRID_PLUS).spectral_gap
            bound = hybrid / (3.0 * pairing.n * math.exp(beta * pairing.d))
            margins.append(max(0.0, bound - glauber))
    return _result("hybrid_comparison", margins, 0.0, "violation of the gap inequality")


def check_decomposition_bound() -> CheckResult:
    """gap(P) >= gap(P_H) * min gap(P_i) / 4 for the hybrid chain and slice pairs A_i"""
    margins = []
    for pairing in _small_pairings(2):
        for beta in (0.0, 0.5, 1.0):
            chain = oracle.build_dense_chain(pairing, beta, Variant.HYBRID)
            k_of_state = np.count_nonzero(chain.states == 1, axis=1)
            z = oracle.enumerate_Z(pairing, beta)
            ratios = {k: z[k + 1] / z[k] for k in range(pairing.n)}
            projected = projection_chain(pairing.n, ratios)
            projected_gap = oracle.chain_from_matrix(projected.matrix, projected.stationary()).spectral_gap
            piece_gaps = [
                oracle.restrict(chain, np.nonzero((k_of_state == k) | (k_of_state == k + 1))[0]).spectral_gap
                for k in range(pairing.n)
            ]
            bound = projected_gap * min(piece_gaps) / 4.0
            margins.append(max(0.0, bound - chain.spectral_gap))
    return _result("decomposition_bound", margins, 0.0, "violation of the gap inequality")


def check_projection_stationary() -> CheckResult:
    errors = []
    pairing = k4_pairing()
    for beta in (0.0, 0.5, 1.5):
        z = oracle.enumerate_Z(pairing, beta)
        chain = projection_chain(pairing.n, {k: z[k + 1] / z[k] for k in range(pairing.n)})
        expected = z[:-1] + z[1:]
        expected = expected / expected.sum()
        errors.extend(np.abs(chain.stationary() - expected))
        errors.extend(np.abs(chain.stationary() @ chain.matrix - chain.stationary()))
    return _result("projection_stationary", errors, 1e-12)


def check_tv_curves() -> CheckResult:
    """Exact TV curves are non-increasing and vanish from stationarity"""
    errors = []
    chain = oracle.build_dense_chain(k4_pairing(), 1.0, Variant.GLAUBER)
    for index in (0, chain.num_states - 1):
        curve = [tv for _, tv in oracle.exact_tv_curve(chain, oracle.point_mass(chain, index), 60)]
        errors.extend(max(0.0, b - a) for a, b in zip(curve, curve[1:]))
    errors.extend(tv for _, tv in oracle.exact_tv_curve(chain, chain.stationary, 20))
    return _result("tv_curves", errors, 1e-12)


# ---------------------- tree ----------------------

def check_root_posterior(num_boundaries: int = 8) -> CheckResult:
    rng = make_stream(SUITE_SEED, 4)
    errors = []
    for eta in (0.0, 0.3):
        measure = tree.field_for_magnetization(3, 0.8, eta)
        for depth in (1, 2, 3):
            for _ in range(num_boundaries):
                boundary = tree.sample_broadcast(measure, depth, rng).boundary
                exact = oracle.brute_force_root_posterior(boundary, measure, depth)
                errors.append(abs(tree.root_posterior(boundary, measure, depth)[0] - exact))
    return _result("root_posterior", errors, 1e-12)


VALIDATION_CHECKS: Tuple[Callable[[], CheckResult], ...] = (
    check_free_energy_at_zero,
    check_edge_fraction_at_zero,
    check_drift_at_zero,
    check_kesten_stigum_at_threshold,
    check_optimizer_matches_formula,
    check_first_moment,
    check_matching_counts,
    check_ratio_identity,
    check_detailed_balance,
    check_chain_invariants,
    check_glauber_gap_at_zero,
    check_hybrid_comparison,
    check_decomposition_bound,
    check_projection_stationary,
    check_tv_curves,
    check_root_posterior,
)


def run_validation_suite(checks: Optional[Sequence[Callable[[], CheckResult]]] = None) -> List[CheckResult]:
    """
    Run every oracle check; a check that raises is recorded as failed

    Returns:
        CheckResult per check, in order
    """
    logger.info("Running validation suite...")
    results = []
    for check in checks or VALIDATION_CHECKS:
        try:
            result = check()
        except Exception as e:
            logger.error(f"[ERROR] {check.__name__} raised: {e}")
            logger.error(traceback.format_exc())
            result = CheckResult(name=check.__name__, passed=False, max_error=float("nan"), detail=str(e))
        level = "PASS" if result.passed else "FAIL"
        logger.info(f"[{level}] {result.name}: max_error={result.max_error:.3g} ({result.detail})")
        results.append(result)
    failed = sum(not r.passed for r in results)
    logger.info(f"Validation suite finished: {len(results) - failed} passed, {failed} failed")
    return results


def checks_to_frame(results: Sequence[CheckResult]) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in results], columns=["name", "passed", "max_error", "detail"])


def export_golden_record(pairing: Pairing, beta: float, output_path: Optional[str] = None) -> Dict:
    """Write the regression record of a small pairing as JSON"""
    record = oracle.golden_record(pairing, beta)
    writer = create_data_writer("json", output_path)
    writer.write(record, build_metadata(record["params"], seed=0))
    return record
