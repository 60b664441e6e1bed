#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Stats Module for the Ising toolkit
Edge overlap matrices, tree reference statistics, local-law comparisons
and the energy-density identity check
"""

import itertools
import math
from collections import Counter
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .annealed import energy_density_predictions
from .config import get_settings
from .dynamics import ChainState, Variant, batch_means_stderr, initial_config, uniform_slice_config
from .exceptions import InvalidParameterError, TooLargeError
from .graph import Pairing, SpinConfig, neighborhood, sample_uniform_pairing
from .tree import TreeMeasure, field_for_magnetization
from .utils.logger import get_logger

logger = get_logger(__name__)

EDGE_TYPES = ("++", "+-", "-+", "--")

BallCode = Tuple  # (spin, tuple of child codes)


@dataclass
class OverlapMatrix:
    """4x4 fractions of edges of type i under sigma and type j under sigma'"""
    values: np.ndarray

    def frobenius_distance(self, other: "OverlapMatrix") -> float:
        return float(np.linalg.norm(self.values - other.values))

    def to_dict(self) -> Dict:
        return {"types": list(EDGE_TYPES), "values": self.values.tolist()}


@dataclass
class EdgeTypeProbs:
    p_pp: float
    p_pm: float
    p_mp: float
    p_mm: float

    def as_array(self) -> np.ndarray:
        return np.array([self.p_pp, self.p_pm, self.p_mp, self.p_mm])


@dataclass
class LocalLawReport:
    radius: int
    tv: float
    num_tree_balls: int
    num_non_tree_balls: int


@dataclass
class ZBReport:
    d: int
    beta: float
    n: int
    ferro_energy: float
    ferro_stderr: float
    anti_energy: float
    anti_stderr: float
    ferro_prediction: float
    anti_prediction: float
    total: float
    ferro_relative_error: float
    anti_relative_error: float
    total_relative_error: float
    tolerance: float
    passed: bool


# ---------------------- overlaps ----------------------

def edge_types(pairing: Pairing, spins) -> np.ndarray:
    """Type index 2*[s_a = -] + [s_b = -] per edge, lower clone first"""
    s = np.asarray(spins)
    edges = pairing.vertex_edges()
    return 2 * (s[edges[:, 0]] == -1) + (s[edges[:, 1]] == -1)


def edge_overlap(pairing: Pairing, sigma, sigma_prime) -> OverlapMatrix:
    """Cross-tabulation of edge types under two configurations"""
    t1 = edge_types(pairing, sigma)
    t2 = edge_types(pairing, sigma_prime)
    counts = np.bincount(4 * t1 + t2, minlength=16).reshape(4, 4)
    return OverlapMatrix(values=counts / pairing.num_edges)


def edge_type_probs(measure: TreeMeasure) -> EdgeTypeProbs:
    """Edge-type marginals of the tree measure: root law times broadcast row"""
    M = measure.broadcast
    p, q = measure.root_law
    return EdgeTypeProbs(p_pp=p * M[0, 0], p_pm=p * M[0, 1], p_mp=q * M[1, 0], p_mm=q * M[1, 1])


def tree_reference_overlap(measure: TreeMeasure) -> OverlapMatrix:
    """Overlap matrix of two independent tree configurations"""
    p = edge_type_probs(measure).as_array()
    return OverlapMatrix(values=np.outer(p, p))


def vertex_overlap_from_edges(overlap: OverlapMatrix) -> float:
    """
    Fraction of vertices plus under both configurations, recovered from the overlap matrix

    Each vertex owns d edge endpoints; the first endpoint of type i is plus iff i in {++, +-},
    the second iff i in {++, -+}.
    """
    R = overlap.values
    return 0.5 * (2 * R[0, 0] + R[0, 1] + R[1, 0] + R[1, 1] + R[0, 2] + R[2, 0] + R[2, 2])


def _burn_in_sweeps(n: int) -> int:
    return int(math.ceil(get_settings().BURN_IN_FACTOR * math.log(max(n, 2))))


def sample_fixed_magnetization(pairing: Pairing, beta: float, k_plus: int, sweeps: int,
                               rng: np.random.Generator) -> SpinConfig:
    """Kawasaki chain from a uniform slice configuration, run for the given sweeps"""
    state = ChainState(pairing, uniform_slice_config(pairing, k_plus, rng), beta, Variant.KAWASAKI, rng)
    state.run_sweeps(sweeps)
    return state.config


def overlap_deviation(pairing: Pairing, beta: float, k_plus: int, num_pairs: int,
                      sweeps: Optional[int], rng: np.random.Generator,
                      identical: bool = False) -> Tuple[float, float]:
    """
    Mean Frobenius distance between the overlap of two fixed-magnetization samples
    and the tree reference

    Args:
        pairing: Graph
        beta: Inverse temperature
        k_plus: Plus count of both samples
        num_pairs: Number of independent pairs
        sweeps: Kawasaki sweeps per sample; BURN_IN_FACTOR * log n when None
        rng: Random stream
        identical: Use sigma' = sigma

    Returns:
        (mean deviation, standard error)
    """
    if num_pairs < 1:
        raise InvalidParameterError(f"num_pairs must be positive, got {num_pairs}")
    n = pairing.n
    eta = 2.0 * k_plus / n - 1.0
    if abs(eta) >= 1.0:
        raise InvalidParameterError("k_plus must leave both spin classes non-empty")
    reference = tree_reference_overlap(field_for_magnetization(pairing.d, beta, eta))
    sweeps = _burn_in_sweeps(n) if sweeps is None else sweeps
    deviations = np.empty(num_pairs)
    for i in range(num_pairs):
        sigma = sample_fixed_magnetization(pairing, beta, k_plus, sweeps, rng)
        sigma_prime = sigma if identical else sample_fixed_magnetization(pairing, beta, k_plus, sweeps, rng)
        deviations[i] = edge_overlap(pairing, sigma.spins, sigma_prime.spins).frobenius_distance(reference)
    stderr = float(deviations.std(ddof=1) / math.sqrt(num_pairs)) if num_pairs > 1 else 0.0
    logger.info(f"overlap_deviation n={n} beta={beta} k={k_plus}: {deviations.mean():.5f} +/- {stderr:.5f}")
    return float(deviations.mean()), stderr


# ---------------------- local laws ----------------------

def ball_code(ball, spins) -> BallCode:
    """Canonical code of a tree ball: (spin, sorted child codes)"""

    def code(v):
        return (int(spins[v]), tuple(sorted(code(c) for c in ball.children[v])))

    return code(ball.root)


def _multiset_law(child_law: Dict[BallCode, float], count: int) -> Dict[Tuple, float]:
    """Law of the sorted tuple of count iid draws from child_law"""
    codes = sorted(child_law)
    combos = math.comb(len(codes) + count - 1, count)
    if combos > get_settings().COMBINATION_LIMIT:
        raise TooLargeError(f"{combos} child multisets exceed the enumeration limit")
    law = {}
    log_count_factorial = math.lgamma(count + 1)
    for combo in itertools.combinations_with_replacement(range(len(codes)), count):
        multiplicities = Counter(combo)
        log_p = log_count_factorial
        for index, m in multiplicities.items():
            log_p += m * math.log(child_law[codes[index]]) - math.lgamma(m + 1)
        law[tuple(codes[i] for i in combo)] = math.exp(log_p)
    return law


def exact_ball_law(measure: TreeMeasure, radius: int) -> Dict[BallCode, float]:
    """
    Law of the canonical code of the radius-r ball under the broadcast measure

    Args:
        measure: Tree measure
        radius: Ball radius

    Returns:
        Mapping code -> probability
    """
    M = measure.broadcast
    spin_index = {1: 0, -1: 1}

    # subtree[s]: law of the code of a subtree whose root has spin s, built bottom-up
    subtree = {s: {(s, ()): 1.0} for s in (1, -1)}
    for height in range(1, radius + 1):
        branching = measure.d if height == radius else measure.d - 1
        updated = {}
        for s in (1, -1):
            child_law: Dict[BallCode, float] = {}
            for t in (1, -1):
                weight = M[spin_index[s], spin_index[t]]
                for code, p in subtree[t].items():
                    child_law[code] = child_law.get(code, 0.0) + weight * p
            updated[s] = {(s, children): p for children, p in _multiset_law(child_law, branching).items()}
        subtree = updated

    law: Dict[BallCode, float] = {}
    for s, p_root in zip((1, -1), measure.root_law):
        for code, p in subtree[s].items():
            law[code] = law.get(code, 0.0) + p_root * p
    return law


def local_law_tv(pairing: Pairing, beta: float, k_plus: int, radius: int, num_vertices: int,
                 sweeps: Optional[int], rng: np.random.Generator,
                 config: Optional[SpinConfig] = None) -> LocalLawReport:
    """
    TV distance between empirical tree-ball patterns and the exact broadcast law

    Args:
        pairing: Graph
        beta: Inverse temperature
        k_plus: Plus count
        radius: Ball radius, at most 3
        num_vertices: Number of sampled root vertices (without replacement)
        sweeps: Kawasaki sweeps when no configuration is given
        rng: Random stream
        config: Configuration to inspect, e.g. a planted one

    Returns:
        LocalLawReport; non-tree balls are counted separately
    """
    if not 0 <= radius <= 3:
        raise InvalidParameterError(f"radius must lie in [0, 3], got {radius}")
    n = pairing.n
    if config is None:
        sweeps = _burn_in_sweeps(n) if sweeps is None else sweeps
        config = sample_fixed_magnetization(pairing, beta, k_plus, sweeps, rng)
    spins = config.spins
    eta = 2.0 * config.k_plus / n - 1.0
    measure = field_for_magnetization(pairing.d, beta, eta)

    roots = rng.choice(n, size=min(num_vertices, n), replace=False)
    counts: Counter = Counter()
    non_tree = 0
    for v in roots:
        ball = neighborhood(pairing, int(v), radius)
        if not ball.is_tree:
            non_tree += 1
            continue
        counts[ball_code(ball, spins)] += 1
    trees = sum(counts.values())
    if trees == 0:
        logger.warning("no tree-like balls sampled")
        return LocalLawReport(radius=radius, tv=1.0, num_tree_balls=0, num_non_tree_balls=non_tree)

    exact = exact_ball_law(measure, radius)
    observed_mass = sum(exact.get(code, 0.0) for code in counts)
    tv = 0.5 * (sum(abs(c / trees - exact.get(code, 0.0)) for code, c in counts.items()) + (1.0 - observed_mass))
    logger.info(f"local_law_tv radius={radius}: TV={tv:.5f} over {trees} tree balls ({non_tree} non-tree)")
    return LocalLawReport(radius=radius, tv=float(tv), num_tree_balls=trees, num_non_tree_balls=non_tree)


# ---------------------- energy identity ----------------------

def _mean_energy(state: ChainState, burn_in: int, sweeps: int) -> Tuple[float, float]:
    state.run_sweeps(burn_in)
    values = np.empty(sweeps)
    for i in range(sweeps):
        state.run_sweeps(1)
        values[i] = state.config.H / state.pairing.n
    return float(values.mean()), batch_means_stderr(values)


def zb_check(d: int, beta: float, n: int, sweeps: int, burn_in: int, rng: np.random.Generator,
             tolerance: float = 0.03, pairing: Optional[Pairing] = None) -> ZBReport:
    """
    Energy densities of the zero-magnetization ferromagnet and the free anti-ferromagnet

    The ferromagnet runs Kawasaki at k = n/2, the anti-ferromagnet Glauber at -beta;
    their sum is compared with d/2 and each with its closed-form prediction.
    """
    if n % 2 != 0:
        raise InvalidParameterError(f"n must be even for zero magnetization, got {n}")
    pairing = pairing or sample_uniform_pairing(n, d, rng)
    ferro_state = ChainState(pairing, uniform_slice_config(pairing, n // 2, rng), beta, Variant.KAWASAKI, rng)
    anti_state = ChainState(pairing, initial_config(pairing, "uniform", rng), -beta, Variant.GLAUBER, rng)
    ferro, ferro_se = _mean_energy(ferro_state, burn_in, sweeps)
    anti, anti_se = _mean_energy(anti_state, burn_in, sweeps)
    ferro_pred, anti_pred = energy_density_predictions(d, beta)
    total = ferro + anti
    errors = (abs(ferro - ferro_pred) / ferro_pred, abs(anti - anti_pred) / anti_pred,
              abs(total - d / 2.0) / (d / 2.0))
    report = ZBReport(
        d=d, beta=beta, n=n,
        ferro_energy=ferro, ferro_stderr=ferro_se,
        anti_energy=anti, anti_stderr=anti_se,
        ferro_prediction=ferro_pred, anti_prediction=anti_pred,
        total=total,
        ferro_relative_error=errors[0],
        anti_relative_error=errors[1],
        total_relative_error=errors[2],
        tolerance=tolerance,
        passed=all(e <= tolerance for e in errors),
    )
    logger.info(f"zb_check d={d} beta={beta} n={n}: ferro={ferro:.4f} anti={anti:.4f} sum={total:.4f}")
    return report
