#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Dynamics Module for the Ising toolkit
Glauber, Kawasaki and hybrid chains (free and restricted to non-negative magnetization),
the partition-function ratio estimator and the projection chain on plus counts
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Mapping, Optional, Sequence

import numpy as np
import pandas as pd

from .annealed import F
from .exceptions import InvalidInputError, InvalidParameterError
from .executor import run_replicas
from .graph import Pairing, SpinConfig
from .utils.logger import get_logger

logger = get_logger(__name__)

UNIFORM_BLOCK = 4096


class Variant(str, Enum):
    GLAUBER = "glauber"
    KAWASAKI = "kawasaki"
    HYBRID = "hybrid"
    GLAUBER_PLUS = "glauber_plus"
    HYBRID_PLUS = "hybrid_plus"

    @property
    def restricted(self) -> bool:
        return self in (Variant.GLAUBER_PLUS, Variant.HYBRID_PLUS)


INITIALIZATIONS = ("uniform", "all_plus", "all_minus")


def heat_bath_probability(beta: float, field_sum: float) -> float:
    """P(spin = +) given the neighbor field: e^{b m+} / (e^{b m+} + e^{b m-})"""
    return 1.0 / (1.0 + math.exp(-beta * field_sum))


def swap_acceptance(beta: float, delta_h: float) -> float:
    """pi(sigma') / (pi(sigma) + pi(sigma')) for a move changing H by delta_h"""
    return 1.0 / (1.0 + math.exp(-beta * delta_h))


class ChainState:
    """
    A chain on a fixed pairing: spins, random stream, step counter and variant

    A negative beta runs the anti-ferromagnetic chain.
    """

    def __init__(self, pairing: Pairing, config: SpinConfig, beta: float,
                 variant: Variant, rng: np.random.Generator):
        self.pairing = pairing
        self.config = config
        self.beta = float(beta)
        self.variant = Variant(variant)
        self.rng = rng
        self.steps = 0
        self._buffer = np.empty(0)
        self._cursor = 0
        if self.variant.restricted and 2 * config.k_plus < pairing.n:
            raise InvalidInputError(f"{self.variant.value} needs k_plus >= n/2, got {config.k_plus}")

    def uniform(self) -> float:
        if self._cursor >= len(self._buffer):
            self._buffer = self.rng.random(UNIFORM_BLOCK)
            self._cursor = 0
        u = self._buffer[self._cursor]
        self._cursor += 1
        return float(u)

    def step(self) -> "ChainState":
        return STEP_FUNCTIONS[self.variant](self)

    def run_steps(self, num_steps: int) -> "ChainState":
        step = STEP_FUNCTIONS[self.variant]
        for _ in range(num_steps):
            step(self)
        return self

    def run_sweeps(self, num_sweeps: int) -> "ChainState":
        return self.run_steps(num_sweeps * self.pairing.n)


# ---------------------- step operators ----------------------

def _glauber_move(state: ChainState, restricted: bool) -> None:
    config = state.config
    n = state.pairing.n
    v = int(state.uniform() * n)
    p_plus = heat_bath_probability(state.beta, config.field(v))
    new_spin = 1 if state.uniform() < p_plus else -1
    if new_spin == config.spin(v):
        return
    if restricted and new_spin == -1 and 2 * (config.k_plus - 1) < n:
        return
    config.flip(v)


def _kawasaki_move(state: ChainState) -> None:
    config = state.config
    k = config.k_plus
    if k == 0 or k == state.pairing.n:
        return
    u = config.plus_list[int(state.uniform() * k)]
    v = config.minus_list[int(state.uniform() * (state.pairing.n - k))]
    if state.uniform() < swap_acceptance(state.beta, config.swap_delta(u, v)):
        config.swap(u, v)


def glauber_step(state: ChainState) -> ChainState:
    """Heat-bath resample of a uniform vertex; restricted variants hold instead of leaving k >= n/2"""
    _glauber_move(state, state.variant.restricted)
    state.steps += 1
    return state


def kawasaki_step(state: ChainState) -> ChainState:
    """Exchange a uniform plus vertex with a uniform minus vertex with heat-bath acceptance"""
    _kawasaki_move(state)
    state.steps += 1
    return state


def hybrid_step(state: ChainState) -> ChainState:
    """Fair coin between a Glauber and a Kawasaki move"""
    if state.uniform() < 0.5:
        _glauber_move(state, state.variant.restricted)
    else:
        _kawasaki_move(state)
    state.steps += 1
    return state


STEP_FUNCTIONS = {
    Variant.GLAUBER: glauber_step,
    Variant.GLAUBER_PLUS: glauber_step,
    Variant.KAWASAKI: kawasaki_step,
    Variant.HYBRID: hybrid_step,
    Variant.HYBRID_PLUS: hybrid_step,
}


# ---------------------- initial states ----------------------

def uniform_slice_config(pairing: Pairing, k_plus: int, rng: np.random.Generator) -> SpinConfig:
    """Uniform configuration with exactly k_plus plus spins"""
    if not 0 <= k_plus <= pairing.n:
        raise InvalidParameterError(f"k_plus must lie in [0, {pairing.n}], got {k_plus}")
    spins = np.full(pairing.n, -1, dtype=np.int8)
    spins[rng.permutation(pairing.n)[:k_plus]] = 1
    return SpinConfig(pairing, spins)


def initial_config(pairing: Pairing, init: str, rng: np.random.Generator) -> SpinConfig:
    if init == "uniform":
        spins = np.where(rng.random(pairing.n) < 0.5, 1, -1)
    elif init == "all_plus":
        spins = np.ones(pairing.n, dtype=np.int8)
    elif init == "all_minus":
        spins = -np.ones(pairing.n, dtype=np.int8)
    else:
        raise InvalidParameterError(f"unknown init {init}; expected one of {INITIALIZATIONS}")
    return SpinConfig(pairing, spins)


def fold_to_plus(config: SpinConfig) -> SpinConfig:
    """Global spin flip when k_plus < n/2; the fixed-pairing measure is symmetric under it"""
    if 2 * config.k_plus >= config.n:
        return config
    return SpinConfig(config.pairing, -config.spins.astype(int))


# ---------------------- ratio estimator ----------------------

def ratio_statistic(config: SpinConfig, beta: float) -> float:
    """Sum over minus vertices v of exp(beta * sum of non-loop neighbor spins)"""
    return sum(math.exp(beta * config.field(v)) for v in config.minus_list)


def batch_means_stderr(values: np.ndarray) -> float:
    """Standard error of the mean of a correlated series by batch means"""
    count = len(values)
    if count < 2:
        return 0.0
    batch_size = max(1, int(math.sqrt(count)))
    num_batches = count // batch_size
    if num_batches < 2:
        return float(values.std(ddof=1) / math.sqrt(count))
    means = values[:num_batches * batch_size].reshape(num_batches, batch_size).mean(axis=1)
    return float(means.std(ddof=1) / math.sqrt(num_batches))


def ratio_estimator(pairing: Pairing, beta: float, k: int, num_sweeps: int, burn_in: int,
                    rng: np.random.Generator):
    """
    Estimate z_{k+1} / z_k along a Kawasaki chain at plus count k

    Args:
        pairing: Graph
        beta: Inverse temperature
        k: Plus count, 0 <= k <= n
        num_sweeps: Recorded sweeps
        burn_in: Sweeps discarded first
        rng: Random stream

    Returns:
        (estimate, stderr); (0, 0) at k = n
    """
    n = pairing.n
    if k == n:
        return 0.0, 0.0
    if not 0 <= k < n:
        raise InvalidParameterError(f"k must lie in [0, {n}], got {k}")
    if num_sweeps < 1:
        raise InvalidParameterError(f"num_sweeps must be positive, got {num_sweeps}")
    state = ChainState(pairing, uniform_slice_config(pairing, k, rng), beta, Variant.KAWASAKI, rng)
    state.run_sweeps(burn_in)
    samples = np.empty(num_sweeps)
    for i in range(num_sweeps):
        state.run_sweeps(1)
        samples[i] = ratio_statistic(state.config, beta)
    samples /= (k + 1)
    return float(samples.mean()), batch_means_stderr(samples)


def estimate_ratios(pairing: Pairing, beta: float, k_values: Sequence[int], num_sweeps: int,
                    burn_in: int, seed: int, workers: Optional[int] = None) -> pd.DataFrame:
    """
    Ratio estimates for several plus counts, one random stream per k

    Returns:
        DataFrame with columns k, eta, ratio, stderr
    """
    k_values = list(k_values)

    def task(index: int, rng: np.random.Generator):
        return ratio_estimator(pairing, beta, k_values[index], num_sweeps, burn_in, rng)

    results = run_replicas(task, seed, len(k_values), workers)
    n = pairing.n
    return pd.DataFrame({
        "k": k_values,
        "eta": [2.0 * k / n - 1.0 for k in k_values],
        "ratio": [r[0] for r in results],
        "stderr": [r[1] for r in results],
    })


# ---------------------- projection chain ----------------------

PROJECTION_VARIANTS = ("madras_randall", "displayed")


@dataclass
class ProjectionChain:
    """
    Birth-death chain on i in [k_min, n-1], state i standing for Omega_i union Omega_{i+1}

    madras_randall: up = r_i / (2 (1 + r_i)), down = 1 / (2 (1 + r_i)).
    displayed:      up = 1 / (2 (1 + r_i)), down = r_{i-1} / (2 (1 + r_{i-1})).
    """
    n: int
    k_values: np.ndarray
    ratios: np.ndarray
    stderrs: np.ndarray
    variant: str = "madras_randall"
    up: np.ndarray = field(init=False, repr=False)
    down: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        r = self.ratios
        last = len(r) - 1
        if self.variant == "madras_randall":
            up = 0.5 * r / (1.0 + r)
            down = 0.5 / (1.0 + r)
        else:
            up = 0.5 / (1.0 + r)
            down = np.concatenate([[0.0], 0.5 * r[:-1] / (1.0 + r[:-1])])
        up[last] = 0.0
        down[0] = 0.0
        self.up = up
        self.down = down

    @property
    def matrix(self) -> np.ndarray:
        size = len(self.k_values)
        P = np.zeros((size, size))
        for i in range(size):
            if i + 1 < size:
                P[i, i + 1] = self.up[i]
            if i > 0:
                P[i, i - 1] = self.down[i]
            P[i, i] = 1.0 - self.up[i] - self.down[i]
        return P

    def stationary(self) -> np.ndarray:
        """Stationary law from the birth-death balance equations"""
        weights = np.ones(len(self.k_values))
        for i in range(1, len(weights)):
            weights[i] = weights[i - 1] * self.up[i - 1] / self.down[i]
        return weights / weights.sum()

    def drift(self) -> np.ndarray:
        return self.up - self.down

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "k": self.k_values,
            "eta": 2.0 * self.k_values / self.n - 1.0,
            "ratio": self.ratios,
            "stderr": self.stderrs,
            "up": self.up,
            "down": self.down,
            "drift": self.drift(),
        })


def projection_chain(n: int, ratios: Mapping[int, float], stderrs: Optional[Mapping[int, float]] = None,
                     variant: str = "madras_randall") -> ProjectionChain:
    """
    Build the projection chain from ratio estimates r_k ~ z_{k+1} / z_k

    Args:
        n: Number of vertices
        ratios: r_k for every k from its smallest key to n - 1
        stderrs: Optional standard errors keyed like ratios
        variant: madras_randall or displayed

    Returns:
        ProjectionChain
    """
    if variant not in PROJECTION_VARIANTS:
        raise InvalidParameterError(f"unknown projection variant {variant}")
    if not ratios:
        raise InvalidInputError("no ratio estimates given")
    k_min = min(ratios)
    k_values = np.arange(k_min, n)
    missing = [k for k in k_values if k not in ratios or not np.isfinite(ratios[k])]
    if missing or len(k_values) == 0:
        raise InvalidInputError(f"missing ratio estimates for k={missing}")
    values = np.array([float(ratios[k]) for k in k_values])
    if np.any(values < 0):
        raise InvalidInputError("ratio estimates must be non-negative")
    errors = np.array([float(stderrs.get(k, 0.0)) if stderrs else 0.0 for k in k_values])
    return ProjectionChain(n=n, k_values=k_values, ratios=values, stderrs=errors, variant=variant)


def drift_sign_changes(chain: ProjectionChain) -> List[float]:
    """Magnetizations where the drift changes from positive to non-positive"""
    drift = chain.drift()[:-1]
    eta = 2.0 * chain.k_values[:-1] / chain.n - 1.0
    return [float(eta[i + 1]) for i in range(len(drift) - 1) if drift[i] > 0 >= drift[i + 1]]


def annealed_ratio_prediction(d: int, beta: float, k_values: Sequence[int], n: int) -> np.ndarray:
    """F(eta) at eta = 2k/n - 1, the large-n limit of z_{k+1} / z_k"""
    return F(d, beta, 2.0 * np.asarray(k_values, dtype=float) / n - 1.0)


# ---------------------- trajectories ----------------------

def mixing_experiment(pairing: Pairing, beta: float, init: str, max_sweeps: int,
                      rng: np.random.Generator, variant: Variant = Variant.GLAUBER) -> pd.DataFrame:
    """
    Record plus count, magnetization and energy after every sweep

    Restricted variants start from the flipped configuration when the initial one has k_plus < n/2.

    Returns:
        DataFrame with columns t, k_plus, magnetization, H (row t = 0 is the initial state)
    """
    config = initial_config(pairing, init, rng)
    if Variant(variant).restricted:
        config = fold_to_plus(config)
    state = ChainState(pairing, config, beta, variant, rng)
    rows: Dict[str, List] = {"t": [], "k_plus": [], "magnetization": [], "H": []}

    def record(t):
        rows["t"].append(t)
        rows["k_plus"].append(state.config.k_plus)
        rows["magnetization"].append(state.config.magnetization)
        rows["H"].append(state.config.H)

    record(0)
    for t in range(1, max_sweeps + 1):
        state.run_sweeps(1)
        record(t)
    logger.debug(f"mixing_experiment n={pairing.n} beta={beta} init={init}: final m={state.config.magnetization:.4f}")
    return pd.DataFrame(rows)
