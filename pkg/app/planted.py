#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Planted Module for the Ising toolkit
Exact sampling of (graph, configuration) pairs from the planted model: draw the
bichromatic-edge count from its exact law, then a uniform pairing with that count
"""

import math
from collections import Counter
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .annealed import EdgeCountPMF, edge_count_pmf
from .config import get_settings
from .exceptions import InvalidInputError, InvalidParameterError, TooLargeError
from .graph import Pairing, SpinConfig
from .oracle import planted_joint_law
from .tree import rho_eta
from .utils.logger import get_logger

logger = get_logger(__name__)

SLOT_TYPES = ("bichromatic", "plus", "minus")
DEFAULT_EDGE_ORDER = SLOT_TYPES


@dataclass
class PlantedSample:
    """A planted configuration, its graph and the number of bichromatic edges"""
    config: SpinConfig
    pairing: Pairing
    bichromatic_count: int

    @property
    def rho_hat(self) -> float:
        """Fraction of monochromatic edges"""
        return self.config.H / self.pairing.num_edges

    def to_text(self) -> str:
        spins = " ".join(str(int(s)) for s in self.config.spins)
        return self.pairing.to_text() + spins + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PlantedSample":
        lines = [line for line in text.splitlines() if line.strip()]
        if len(lines) < 2:
            raise InvalidInputError("planted sample text needs a pairing and a spin line")
        pairing = Pairing.from_text("\n".join(lines[:-1]))
        try:
            spins = [int(s) for s in lines[-1].split()]
        except ValueError as e:
            raise InvalidInputError(f"malformed spin line: {e}")
        config = SpinConfig(pairing, spins)
        return cls(config=config, pairing=pairing, bichromatic_count=pairing.num_edges - config.H)


@dataclass
class ConcentrationReport:
    n: int
    d: int
    k_plus: int
    beta: float
    num_samples: int
    mean_rho: float
    std_rho: Optional[float]
    std_undefined: bool
    scaled_std: Optional[float]
    reference_rho: float
    ceiling: float
    passed: bool


@dataclass
class NishimoriReport:
    n: int
    d: int
    k_plus: int
    beta: float
    num_samples: int
    num_outcomes: int
    tv: float


class PlantedSampler:
    """
    Repeated planted draws at fixed (n, d, beta, k_plus)

    The bichromatic-count law is computed once. Slots are filled in edge_order, each slot
    matching uniformly chosen unmatched clones of the spins it requires.
    """

    def __init__(self, n: int, d: int, beta: float, k_plus: int,
                 edge_order: Sequence[str] = DEFAULT_EDGE_ORDER):
        if (n * d) % 2 != 0:
            raise InvalidParameterError(f"d*n must be even, got d={d}, n={n}")
        if not 0 <= k_plus <= n:
            raise InvalidParameterError(f"k_plus must lie in [0, {n}], got {k_plus}")
        if sorted(edge_order) != sorted(SLOT_TYPES):
            raise InvalidParameterError(f"edge_order must be a permutation of {SLOT_TYPES}")
        self.n = n
        self.d = d
        self.beta = beta
        self.k_plus = k_plus
        self.edge_order = tuple(edge_order)
        self.pmf: EdgeCountPMF = edge_count_pmf(d * k_plus, d * (n - k_plus), beta)

    def sample(self, rng: np.random.Generator) -> PlantedSample:
        n, d, k_plus = self.n, self.d, self.k_plus

        # Step 1: bichromatic count from its exact law
        B = self.pmf.sample(rng)

        # Step 2: plus block relabeled by a uniform permutation
        spins = np.full(n, -1, dtype=np.int8)
        spins[rng.permutation(n)[:k_plus]] = 1

        # Step 3: sequential pairing, slot by slot
        plus_pool = [c for c in range(n * d) if spins[c // d] == 1]
        minus_pool = [c for c in range(n * d) if spins[c // d] == -1]
        counts = {
            "bichromatic": B,
            "plus": (len(plus_pool) - B) // 2,
            "minus": (len(minus_pool) - B) // 2,
        }
        draws = iter(rng.random(n * d).tolist())
        mate = [-1] * (n * d)
        for slot in self.edge_order:
            for _ in range(counts[slot]):
                if slot == "bichromatic":
                    a = _take(plus_pool, next(draws))
                    b = _take(minus_pool, next(draws))
                else:
                    pool = plus_pool if slot == "plus" else minus_pool
                    a = _take(pool, next(draws))
                    b = _take(pool, next(draws))
                mate[a], mate[b] = b, a

        pairing = Pairing(n, d, mate)
        config = SpinConfig(pairing, spins)
        return PlantedSample(config=config, pairing=pairing, bichromatic_count=B)


def _take(pool: List[int], u: float) -> int:
    """Remove and return a uniformly chosen element"""
    i = int(u * len(pool))
    item = pool[i]
    pool[i] = pool[-1]
    pool.pop()
    return item


def sample_planted(n: int, d: int, beta: float, k_plus: int, rng: np.random.Generator,
                   edge_order: Sequence[str] = DEFAULT_EDGE_ORDER) -> PlantedSample:
    """
    One exact draw from the planted model

    Args:
        n: Number of vertices
        d: Degree
        beta: Inverse temperature
        k_plus: Number of plus vertices
        rng: Random stream
        edge_order: Order in which slot types are filled

    Returns:
        PlantedSample
    """
    return PlantedSampler(n, d, beta, k_plus, edge_order).sample(rng)


def planted_edge_concentration_test(samples: List[PlantedSample], beta: float,
                                    ceiling: Optional[float] = None) -> ConcentrationReport:
    """
    Mean and spread of the monochromatic-edge fraction across planted samples

    Fails when std * sqrt(n) exceeds the ceiling.

    Raises:
        InvalidInputError: empty list or samples at different (n, d, k_plus)
    """
    if not samples:
        raise InvalidInputError("no samples given")
    keys = {(s.pairing.n, s.pairing.d, s.config.k_plus) for s in samples}
    if len(keys) != 1:
        raise InvalidInputError(f"samples mix parameters: {sorted(keys)}")
    n, d, k_plus = keys.pop()
    ceiling = ceiling if ceiling is not None else get_settings().CONCENTRATION_CEILING
    if len(samples) < 30:
        logger.warning(f"concentration test on {len(samples)} samples; at least 30 expected")

    values = np.array([s.rho_hat for s in samples])
    std_undefined = len(values) < 2
    std = None if std_undefined else float(values.std(ddof=1))
    scaled = None if std is None else std * math.sqrt(n)
    report = ConcentrationReport(
        n=n,
        d=d,
        k_plus=k_plus,
        beta=beta,
        num_samples=len(values),
        mean_rho=float(values.mean()),
        std_rho=std,
        std_undefined=std_undefined,
        scaled_std=scaled,
        reference_rho=rho_eta(beta, 2.0 * k_plus / n - 1.0),
        ceiling=ceiling,
        passed=scaled is None or scaled <= ceiling,
    )
    logger.info(f"concentration n={n} samples={len(values)}: mean={report.mean_rho:.6f} std={std}")
    return report


def nishimori_consistency_test(n: int, d: int, beta: float, k_plus: int,
                               rng: np.random.Generator, num_samples: int) -> NishimoriReport:
    """
    TV distance between planted draws and the exact joint law of (pairing, configuration)

    Raises:
        TooLargeError: d*n above the exact planted limit
    """
    if n * d > get_settings().EXACT_PLANTED_CLONE_LIMIT:
        raise TooLargeError(f"{n * d} clones exceed the exact planted limit")
    exact = planted_joint_law(n, d, beta, k_plus)
    sampler = PlantedSampler(n, d, beta, k_plus)
    counts: Counter = Counter()
    for _ in range(num_samples):
        sample = sampler.sample(rng)
        key = (tuple(int(c) for c in sample.pairing.mate), tuple(int(s) for s in sample.config.spins))
        counts[key] += 1
    tv = 0.5 * sum(abs(counts.get(key, 0) / num_samples - p) for key, p in exact.items())
    tv += 0.5 * sum(c / num_samples for key, c in counts.items() if key not in exact)
    logger.info(f"nishimori n={n} d={d} beta={beta} k_plus={k_plus}: TV={tv:.5f} over {num_samples} draws")
    return NishimoriReport(n=n, d=d, k_plus=k_plus, beta=beta, num_samples=num_samples,
                           num_outcomes=len(exact), tv=float(tv))
