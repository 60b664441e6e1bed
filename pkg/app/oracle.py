#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Oracle Module for the Ising toolkit
Brute-force ground truth on tiny instances: partition functions, first moments,
dense transition matrices, spectra, stationary laws and exact TV curves
"""

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import eigvalsh
from scipy.special import comb

from .config import get_settings
from .dynamics import Variant, heat_bath_probability, swap_acceptance
from .exceptions import InvalidParameterError, TooLargeError
from .graph import Pairing
from .tree import TreeMeasure, level_size
from .utils.logger import get_logger

logger = get_logger(__name__)

CHUNK = 1 << 15


@dataclass
class DenseChain:
    """
    A finite chain given by its full transition matrix

    states holds one spin vector per row (lexicographic order, minus before plus,
    vertex 0 most significant; slice chains in colex order of the plus set).
    """
    states: np.ndarray
    matrix: np.ndarray
    stationary: np.ndarray
    variant: str = "custom"
    eigenvalues: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.eigenvalues = _symmetrized_spectrum(self.matrix, self.stationary)

    @property
    def num_states(self) -> int:
        return self.matrix.shape[0]

    @property
    def absolute_gap(self) -> float:
        """1 - |lambda_2|, eigenvalues ordered by modulus"""
        if self.num_states < 2:
            return 1.0
        return float(1.0 - abs(self.eigenvalues[1]))

    @property
    def spectral_gap(self) -> float:
        """1 - lambda_2, second largest eigenvalue"""
        if self.num_states < 2:
            return 1.0
        return float(1.0 - np.sort(self.eigenvalues)[-2])

    def detailed_balance_error(self) -> float:
        flow = self.stationary[:, None] * self.matrix
        return float(np.max(np.abs(flow - flow.T)))

    def stationarity_error(self) -> float:
        return float(np.max(np.abs(self.stationary @ self.matrix - self.stationary)))

    def row_sum_error(self) -> float:
        return float(np.max(np.abs(self.matrix.sum(axis=1) - 1.0)))


def _symmetrized_spectrum(P: np.ndarray, pi: np.ndarray) -> np.ndarray:
    """Eigenvalues of D^{1/2} P D^{-1/2}, sorted by decreasing modulus"""
    root = np.sqrt(pi)
    A = root[:, None] * P / root[None, :]
    A = 0.5 * (A + A.T)
    values = eigvalsh(A)
    return values[np.argsort(-np.abs(values), kind="stable")]


def chain_from_matrix(matrix: np.ndarray, stationary: Optional[np.ndarray] = None) -> DenseChain:
    """DenseChain from an arbitrary reversible kernel; stationary law solved when not given"""
    P = np.asarray(matrix, dtype=float)
    if stationary is None:
        values, vectors = np.linalg.eig(P.T)
        vector = np.real(vectors[:, np.argmin(np.abs(values - 1.0))])
        stationary = vector / vector.sum()
    states = np.arange(P.shape[0])[:, None]
    return DenseChain(states=states, matrix=P, stationary=np.asarray(stationary, dtype=float))


# ---------------------- enumeration ----------------------

def spins_from_indices(indices: np.ndarray, n: int) -> np.ndarray:
    """Spin vectors for configuration indices; bit n-1-v of the index set means v is plus"""
    shifts = np.arange(n - 1, -1, -1)
    bits = (indices[:, None] >> shifts[None, :]) & 1
    return np.where(bits == 1, 1, -1).astype(np.int8)


def mono_counts(pairing: Pairing, spins: np.ndarray) -> np.ndarray:
    """H for every row of a spin matrix"""
    edges = pairing.vertex_edges()
    return np.count_nonzero(spins[:, edges[:, 0]] == spins[:, edges[:, 1]], axis=1)


def _slice_states(n: int, k_plus: int) -> np.ndarray:
    """All configurations with k_plus pluses, plus sets in colex order"""
    sets = sorted(itertools.combinations(range(n), k_plus), key=lambda s: tuple(reversed(s)))
    spins = -np.ones((len(sets), n), dtype=np.int8)
    for row, plus_set in enumerate(sets):
        spins[row, list(plus_set)] = 1
    return spins


def enumerate_z_slice(pairing: Pairing, beta: float, k_plus: int) -> float:
    """z_k by enumerating the C(n, k) configurations of the slice"""
    n = pairing.n
    if not 0 <= k_plus <= n:
        raise InvalidParameterError(f"k_plus must lie in [0, {n}], got {k_plus}")
    if comb(n, k_plus, exact=True) > get_settings().COMBINATION_LIMIT:
        raise TooLargeError(f"C({n}, {k_plus}) configurations exceed the enumeration limit")
    H = mono_counts(pairing, _slice_states(n, k_plus))
    return float(np.exp(beta * H).sum())


def enumerate_Z(pairing: Pairing, beta: float, k_plus: Optional[int] = None):
    """
    Exact fixed-magnetization partition functions z_k = sum over |sigma^{-1}(+)| = k of e^{beta H}

    Args:
        pairing: Graph with n <= ENUMERATION_VERTEX_LIMIT vertices
        beta: Inverse temperature
        k_plus: When given, return z_k only

    Returns:
        z_k, or the full table (z_0, ..., z_n)
    """
    n = pairing.n
    if n > get_settings().ENUMERATION_VERTEX_LIMIT:
        if k_plus is not None:
            return enumerate_z_slice(pairing, beta, k_plus)
        raise TooLargeError(f"2^{n} configurations exceed the enumeration limit")
    table = np.zeros(n + 1)
    total = 1 << n
    for start in range(0, total, CHUNK):
        indices = np.arange(start, min(start + CHUNK, total), dtype=np.int64)
        spins = spins_from_indices(indices, n)
        H = mono_counts(pairing, spins)
        k = np.count_nonzero(spins == 1, axis=1)
        table += np.bincount(k, weights=np.exp(beta * H), minlength=n + 1)
    if k_plus is not None:
        return float(table[k_plus])
    return table


@lru_cache(maxsize=16)
def _pairing_mates(num_clones: int) -> Tuple[Tuple[int, ...], ...]:
    if num_clones == 0:
        return ((),)
    results = []

    def extend(mate: List[int]):
        try:
            first = mate.index(-1)
        except ValueError:
            results.append(tuple(mate))
            return
        for partner in range(first + 1, num_clones):
            if mate[partner] == -1:
                mate[first], mate[partner] = partner, first
                extend(mate)
                mate[first], mate[partner] = -1, -1

    extend([-1] * num_clones)
    return tuple(results)


def enumerate_pairings(n: int, d: int) -> List[Pairing]:
    """All (dn-1)!! pairings of d*n clones, in lexicographic order of mate vectors"""
    if (n * d) % 2 != 0:
        raise InvalidParameterError(f"d*n must be even, got d={d}, n={n}")
    if n * d > get_settings().FIRST_MOMENT_CLONE_LIMIT:
        raise TooLargeError(f"{n * d} clones exceed the pairing enumeration limit")
    return [Pairing(n, d, mate) for mate in _pairing_mates(n * d)]


def enumerate_first_moment_table(n: int, d: int, beta: float) -> np.ndarray:
    """E[z_k] over the configuration model for every k"""
    pairings = enumerate_pairings(n, d)
    spins = spins_from_indices(np.arange(1 << n, dtype=np.int64), n)
    k = np.count_nonzero(spins == 1, axis=1)
    table = np.zeros(n + 1)
    for pairing in pairings:
        table += np.bincount(k, weights=np.exp(beta * mono_counts(pairing, spins)), minlength=n + 1)
    return table / len(pairings)


def enumerate_first_moment(n: int, d: int, beta: float, k_plus: int) -> float:
    """
    E[z_k] averaged over all (dn-1)!! pairings, exact

    Raises:
        TooLargeError: d*n beyond the pairing enumeration limit
    """
    if not 0 <= k_plus <= n:
        raise InvalidParameterError(f"k_plus must lie in [0, {n}], got {k_plus}")
    return float(enumerate_first_moment_table(n, d, beta)[k_plus])


def exact_ratio_statistic(pairing: Pairing, beta: float, k: int) -> float:
    """(1 / (k+1)) E_{pi_k}[sum over minus v of e^{beta * non-loop field}], by enumeration"""
    spins = _slice_states(pairing.n, k).astype(np.int64)
    weights = np.exp(beta * mono_counts(pairing, spins))
    fields = np.zeros_like(spins)
    for v in range(pairing.n):
        for w in pairing.neighbors(v):
            fields[:, v] += spins[:, w]
    statistic = np.where(spins == -1, np.exp(beta * fields), 0.0).sum(axis=1)
    return float(np.dot(weights, statistic) / weights.sum() / (k + 1))


def planted_joint_law(n: int, d: int, beta: float, k_plus: int) -> Dict[Tuple[Tuple[int, ...], Tuple[int, ...]], float]:
    """
    Exact law of (pairing, configuration) under planting: proportional to e^{beta H}
    over all pairings and all configurations with k_plus pluses
    """
    pairings = enumerate_pairings(n, d)
    spins = _slice_states(n, k_plus)
    law = {}
    for pairing in pairings:
        H = mono_counts(pairing, spins)
        mate = tuple(int(c) for c in pairing.mate)
        for row, h in zip(spins, H):
            law[(mate, tuple(int(s) for s in row))] = math.exp(beta * h)
    total = sum(law.values())
    return {key: value / total for key, value in law.items()}


# ---------------------- dense chains ----------------------

def _state_space(n: int, variant: Variant, k_plus: Optional[int]) -> np.ndarray:
    if variant == Variant.KAWASAKI:
        if k_plus is None:
            raise InvalidParameterError("kawasaki chain needs k_plus")
        return _slice_states(n, k_plus)
    spins = spins_from_indices(np.arange(1 << n, dtype=np.int64), n)
    if variant.restricted:
        spins = spins[2 * np.count_nonzero(spins == 1, axis=1) >= n]
    return spins


def build_dense_chain(pairing: Pairing, beta: float, variant, k_plus: Optional[int] = None) -> DenseChain:
    """
    Exact one-step kernel of a chain variant

    Args:
        pairing: Graph
        beta: Inverse temperature (negative for the anti-ferromagnet)
        variant: Chain variant
        k_plus: Plus count, kawasaki only

    Returns:
        DenseChain with target law e^{beta H} on the variant's state space
    """
    variant = Variant(variant)
    n = pairing.n
    state_count = comb(n, k_plus, exact=True) if variant == Variant.KAWASAKI and k_plus is not None else 1 << n
    if state_count > get_settings().DENSE_STATE_LIMIT:
        raise TooLargeError(f"{state_count} states exceed the dense chain limit")

    states = _state_space(n, variant, k_plus)
    index = {tuple(int(s) for s in row): i for i, row in enumerate(states)}
    neighbors = pairing.neighbor_table()
    size = len(states)
    P_glauber = np.zeros((size, size))
    P_kawasaki = np.zeros((size, size))

    for i, row in enumerate(states):
        spins = [int(s) for s in row]
        k = sum(1 for s in spins if s == 1)
        fields = [sum(spins[w] for w in neighbors[v]) for v in range(n)]

        # Step 1: Glauber moves
        if variant != Variant.KAWASAKI:
            for v in range(n):
                p_plus = heat_bath_probability(beta, fields[v])
                p_flip = (1.0 - p_plus) if spins[v] == 1 else p_plus
                flipped = list(spins)
                flipped[v] = -spins[v]
                j = index.get(tuple(flipped))
                if j is None:
                    continue
                P_glauber[i, j] += p_flip / n

        # Step 2: Kawasaki moves
        if variant in (Variant.KAWASAKI, Variant.HYBRID, Variant.HYBRID_PLUS) and 0 < k < n:
            pluses = [v for v in range(n) if spins[v] == 1]
            minuses = [v for v in range(n) if spins[v] == -1]
            proposal = 1.0 / (len(pluses) * len(minuses))
            for u in pluses:
                for v in minuses:
                    a_uv = neighbors[u].count(v)
                    delta = -fields[u] + fields[v] - 2 * a_uv
                    swapped = list(spins)
                    swapped[u], swapped[v] = -1, 1
                    P_kawasaki[i, index[tuple(swapped)]] += proposal * swap_acceptance(beta, delta)

    if variant in (Variant.GLAUBER, Variant.GLAUBER_PLUS):
        P = P_glauber
    elif variant == Variant.KAWASAKI:
        P = P_kawasaki
    else:
        P = 0.5 * P_glauber + 0.5 * P_kawasaki
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))

    log_weights = beta * mono_counts(pairing, states)
    stationary = np.exp(log_weights - log_weights.max())
    stationary /= stationary.sum()
    logger.debug(f"build_dense_chain variant={variant.value} n={n} beta={beta}: {size} states")
    return DenseChain(states=states, matrix=P, stationary=stationary, variant=variant.value)


def restrict(chain: DenseChain, state_indices: Sequence[int]) -> DenseChain:
    """Restriction to a subset: moves leaving the subset become holds"""
    idx = np.asarray(state_indices)
    P = chain.matrix[np.ix_(idx, idx)].copy()
    np.fill_diagonal(P, 0.0)
    np.fill_diagonal(P, 1.0 - P.sum(axis=1))
    pi = chain.stationary[idx] / chain.stationary[idx].sum()
    return DenseChain(states=chain.states[idx], matrix=P, stationary=pi, variant=f"{chain.variant}|restricted")


def point_mass(chain: DenseChain, index: int) -> np.ndarray:
    mass = np.zeros(chain.num_states)
    mass[index] = 1.0
    return mass


def exact_tv_curve(chain: DenseChain, init_distribution: np.ndarray, horizon: int) -> List[Tuple[int, float]]:
    """TV distance to stationarity after t = 0..horizon steps, by matrix-vector iteration"""
    mu = np.asarray(init_distribution, dtype=float)
    curve = []
    for t in range(horizon + 1):
        curve.append((t, float(0.5 * np.abs(mu - chain.stationary).sum())))
        mu = mu @ chain.matrix
    return curve


def brute_force_root_posterior(boundary: Sequence[int], measure: TreeMeasure, depth: int) -> float:
    """P(root = + | boundary) by summing over every assignment of the interior spins"""
    expected = level_size(measure.d, depth)
    if len(boundary) != expected:
        raise InvalidParameterError(f"boundary of depth {depth} must have {expected} spins, got {len(boundary)}")
    if depth < 1:
        return 1.0 if boundary[0] == 1 else 0.0
    sizes = [level_size(measure.d, level) for level in range(depth)]
    interior = sum(sizes)
    if interior > 20:
        raise TooLargeError(f"{interior} interior vertices exceed the brute-force limit")
    M = measure.broadcast
    prior = measure.root_law
    levels = [list(range(sum(sizes[:level]), sum(sizes[:level + 1]))) for level in range(depth)]

    def parent_of(level: int, position: int) -> int:
        branching = measure.d if level == 1 else measure.d - 1
        return position // branching

    totals = np.zeros(2)
    for assignment in itertools.product((0, 1), repeat=interior):
        weight = prior[assignment[0]]
        for level in range(1, depth):
            for position, vertex in enumerate(levels[level]):
                parent = levels[level - 1][parent_of(level, position)]
                weight *= M[assignment[parent], assignment[vertex]]
        for position, spin in enumerate(boundary):
            parent = levels[depth - 1][parent_of(depth, position)]
            weight *= M[assignment[parent], 0 if spin == 1 else 1]
        totals[assignment[0]] += weight
    return float(totals[0] / totals.sum())


def golden_record(pairing: Pairing, beta: float) -> Dict:
    """Regression record: z table, gaps of every variant and the Glauber stationary law"""
    n = pairing.n
    gaps = {}
    for variant in Variant:
        k = n // 2 if variant == Variant.KAWASAKI else None
        gaps[variant.value] = build_dense_chain(pairing, beta, variant, k).absolute_gap
    glauber = build_dense_chain(pairing, beta, Variant.GLAUBER)
    return {
        "params": {"n": n, "d": pairing.d, "beta": beta, "mate": [int(c) for c in pairing.mate]},
        "z_table": [float(z) for z in enumerate_Z(pairing, beta)],
        "gaps": gaps,
        "stationary": [float(p) for p in glauber.stationary],
    }
