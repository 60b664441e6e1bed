#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tree Module for the Ising toolkit
Translation-invariant Ising measures on the infinite d-regular tree:
BP fixed points, broadcast sampling, thresholds and reconstruction diagnostics
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit, logsumexp

from .exceptions import InvalidParameterError
from .utils.logger import get_logger

logger = get_logger(__name__)

ROOT_GRID_HALF_POINTS = 4000
MIN_LOG_RATIO_SPAN = math.log(1e12)
POSTERIOR_BATCH = 2000


@dataclass(frozen=True)
class ModelParams:
    """Degree, inverse temperature and external field"""
    d: int
    beta: float
    h: float = 0.0

    def __post_init__(self):
        validate_degree(self.d)
        if self.beta < 0:
            raise InvalidParameterError(f"beta must be non-negative, got {self.beta}")


@dataclass(frozen=True, eq=False)
class TreeMeasure:
    """
    A BP fixed point R and the broadcast measure it defines

    broadcast is row-stochastic, indexed [parent, child] with index 0 = plus.
    """
    d: int
    beta: float
    R: float
    h: float
    eta: float
    rho: float
    broadcast: np.ndarray = field(repr=False)
    stable: bool

    @property
    def root_law(self) -> np.ndarray:
        return np.array([(1.0 + self.eta) / 2.0, (1.0 - self.eta) / 2.0])


@dataclass
class TreeSample:
    """Spins of a depth-r broadcast sample, level by level"""
    depth: int
    levels: List[np.ndarray]

    @property
    def boundary(self) -> np.ndarray:
        return self.levels[-1]


def validate_degree(d: int) -> None:
    if d < 3:
        raise InvalidParameterError(f"degree d must be at least 3, got {d}")


def level_size(d: int, level: int) -> int:
    """Number of vertices at the given level of the d-regular tree"""
    if level == 0:
        return 1
    return d * (d - 1) ** (level - 1)


def thresholds(d: int) -> Tuple[float, float]:
    """
    Uniqueness and reconstruction (Kesten-Stigum) thresholds

    Args:
        d: Degree, at least 3

    Returns:
        (beta_c, beta_r)
    """
    validate_degree(d)
    beta_c = 2.0 * math.atanh(1.0 / (d - 1))
    beta_r = 2.0 * math.atanh(1.0 / math.sqrt(d - 1))
    return beta_c, beta_r


# ---------------------- closed forms ----------------------

def _log_map(x, d: int, beta: float, h: float):
    """log of the recursion map evaluated at R = exp(x)"""
    return 2.0 * h + (d - 1) * (np.logaddexp(x + beta, 0.0) - np.logaddexp(x, beta))


def recursion_map(R: float, d: int, beta: float, h: float = 0.0) -> float:
    """Phi(R) = e^{2h} ((R e^beta + 1) / (R + e^beta))^{d-1}"""
    return float(np.exp(_log_map(math.log(R), d, beta, h)))


def magnetization(R, beta: float):
    """Root magnetization of the measure with BP ratio R"""
    R = np.asarray(R, dtype=float)
    inv = 1.0 / R
    value = (R - inv) / (R + 2.0 * math.exp(-beta) + inv)
    return float(value) if value.ndim == 0 else value


def ratio_for_magnetization(eta: float, beta: float) -> float:
    """Unique positive R whose measure has root magnetization eta"""
    if abs(eta) >= 1.0:
        raise InvalidParameterError(f"magnetization must lie in (-1, 1), got {eta}")
    a = abs(eta)
    c = math.exp(-beta)
    R = (a * c + math.sqrt(a * a * c * c + 1.0 - a * a)) / (1.0 - a)
    return R if eta >= 0 else 1.0 / R


def broadcast_matrix(R: float, beta: float) -> np.ndarray:
    """Row-stochastic broadcast matrix; stationary law ((1+eta)/2, (1-eta)/2)"""
    x = math.log(R)
    return np.array([
        [expit(beta + x), expit(-(beta + x))],
        [expit(x - beta), expit(beta - x)],
    ])


def rho_eta(beta: float, eta):
    """
    Probability that an edge is monochromatic under the measure with magnetization eta

    Evaluated as (1 + eta^2 t) / (1 + sqrt(t (1 - eta^2) + eta^2 t^2)) with t = e^{-2 beta},
    which equals (e^{2b} - sqrt(e^{2b}(1-eta^2) + eta^2)) / (e^{2b} - 1) and is regular at beta = 0.
    """
    eta = np.asarray(eta, dtype=float)
    t = math.exp(-2.0 * beta)
    eta2 = eta * eta
    value = (1.0 + eta2 * t) / (1.0 + np.sqrt(t * (1.0 - eta2) + eta2 * t * t))
    return float(value) if value.ndim == 0 else value


def _is_stable(R: float, d: int, beta: float, h: float) -> bool:
    step = 1e-6 * max(R, 1.0)
    derivative = (recursion_map(R + step, d, beta, h) - recursion_map(R - step, d, beta, h)) / (2.0 * step)
    return abs(derivative) < 1.0


def make_measure(R: float, d: int, beta: float, h: float) -> TreeMeasure:
    """Assemble the TreeMeasure for a fixed point R at field h"""
    eta = magnetization(R, beta)
    return TreeMeasure(
        d=d,
        beta=beta,
        R=R,
        h=h,
        eta=eta,
        rho=rho_eta(beta, eta),
        broadcast=broadcast_matrix(R, beta),
        stable=_is_stable(R, d, beta, h),
    )


def field_for_ratio(R: float, d: int, beta: float) -> float:
    """The unique field h at which R solves the recursion"""
    x = math.log(R)
    return 0.5 * (x - (d - 1) * (np.logaddexp(x + beta, 0.0) - np.logaddexp(x, beta)))


# ---------------------- fixed points ----------------------

def bp_fixed_points(params: ModelParams) -> List[TreeMeasure]:
    """
    All positive solutions R of R = Phi(R)

    Roots are bracketed in x = log R on a grid symmetric about 0 and refined by Brent's method.

    Args:
        params: Degree, inverse temperature and field

    Returns:
        Fixed points in increasing order of R
    """
    d, beta, h = params.d, params.beta, params.h
    span = max(MIN_LOG_RATIO_SPAN, 2.0 * abs(h) + (d - 1) * beta + 1.0)
    positive = np.linspace(span / ROOT_GRID_HALF_POINTS, span, ROOT_GRID_HALF_POINTS)
    grid = np.concatenate([-positive[::-1], [0.0], positive])

    def residual(x):
        return _log_map(x, d, beta, h) - x

    values = residual(grid)
    roots: List[float] = []
    for i, value in enumerate(values):
        if value == 0.0:
            roots.append(float(grid[i]))
        elif i + 1 < len(values) and value * values[i + 1] < 0.0:
            roots.append(brentq(residual, grid[i], grid[i + 1], xtol=1e-15, rtol=4 * np.finfo(float).eps))

    roots = sorted(set(roots))
    measures = [make_measure(math.exp(x), d, beta, h) for x in roots]
    logger.debug(f"bp_fixed_points d={d} beta={beta} h={h}: R={[m.R for m in measures]}")
    return measures


def field_for_magnetization(d: int, beta: float, eta: float) -> TreeMeasure:
    """
    The translation-invariant measure with root magnetization eta

    Args:
        d: Degree
        beta: Inverse temperature
        eta: Target magnetization in (-1, 1)

    Returns:
        TreeMeasure whose field h makes R(eta) a fixed point
    """
    validate_degree(d)
    if beta < 0:
        raise InvalidParameterError(f"beta must be non-negative, got {beta}")
    if eta == 0.0:
        return make_measure(1.0, d, beta, 0.0)
    R = ratio_for_magnetization(eta, beta)
    h = float(field_for_ratio(R, d, beta))
    return make_measure(R, d, beta, h)


def critical_field(d: int, beta: float) -> float:
    """
    Largest |h| at which the recursion still has three fixed points

    Zero for beta <= beta_c. Otherwise the local maximum of the field curve h(log R) on log R < 0.
    """
    beta_c, _ = thresholds(d)
    if beta <= beta_c:
        return 0.0

    def slope(x):
        return 0.5 * (1.0 - (d - 1) * (expit(x + beta) - expit(x - beta)))

    lower = -1.0
    while slope(lower) <= 0.0:
        lower *= 2.0
    x_peak = brentq(slope, lower, 0.0, xtol=1e-14)
    return float(field_for_ratio(math.exp(x_peak), d, beta))


def second_eigenvalue(measure: TreeMeasure) -> float:
    """Non-unit eigenvalue of the broadcast matrix"""
    return float(np.trace(measure.broadcast) - 1.0)


def kesten_stigum_product(measure: TreeMeasure) -> float:
    """(d-1) lambda_2^2; reported as a diagnostic only when eta != 0"""
    return (measure.d - 1) * second_eigenvalue(measure) ** 2


# ---------------------- broadcast sampling ----------------------

def sample_broadcast_batch(measure: TreeMeasure, depth: int, num_samples: int,
                           rng: np.random.Generator) -> List[np.ndarray]:
    """
    Draw num_samples independent broadcast trees at once

    Returns:
        One int8 array of shape (num_samples, level_size) per level
    """
    if depth < 0:
        raise InvalidParameterError(f"depth must be non-negative, got {depth}")
    M = measure.broadcast
    root = np.where(rng.random((num_samples, 1)) < (1.0 + measure.eta) / 2.0, 1, -1).astype(np.int8)
    levels = [root]
    for level in range(1, depth + 1):
        branching = measure.d if level == 1 else measure.d - 1
        parents = np.repeat(levels[-1], branching, axis=1)
        p_plus = np.where(parents == 1, M[0, 0], M[1, 0])
        children = np.where(rng.random(parents.shape) < p_plus, 1, -1).astype(np.int8)
        levels.append(children)
    return levels


def sample_broadcast(measure: TreeMeasure, depth: int, rng: np.random.Generator) -> TreeSample:
    """Broadcast spins down a depth-r tree from a root with P(+) = (1+eta)/2"""
    levels = sample_broadcast_batch(measure, depth, 1, rng)
    return TreeSample(depth=depth, levels=[level[0] for level in levels])


# ---------------------- posteriors ----------------------

def _root_log_likelihoods(boundaries: np.ndarray, measure: TreeMeasure, depth: int) -> np.ndarray:
    """
    Leaf-to-root likelihood recursion

    Returns:
        Array (num_samples, 2): log P(boundary | root = +), log P(boundary | root = -)
    """
    log_M = np.log(measure.broadcast)
    num_samples = boundaries.shape[0]
    if depth == 0:
        out = np.full((num_samples, 2), -np.inf)
        out[boundaries[:, 0] == 1, 0] = 0.0
        out[boundaries[:, 0] == -1, 1] = 0.0
        return out

    # Step 1: leaves as messages to their parents, message[s] = log M[s, tau]
    plus_leaf = (boundaries == 1)
    messages = np.where(plus_leaf[..., None], log_M[:, 0], log_M[:, 1])

    # Step 2: combine children, then pass through the broadcast edge above
    for level in range(depth, 0, -1):
        branching = measure.d if level == 1 else measure.d - 1
        parents = messages.shape[1] // branching
        combined = messages.reshape(num_samples, parents, branching, 2).sum(axis=2)
        if level == 1:
            return combined[:, 0, :]
        messages = logsumexp(log_M[None, None, :, :] + combined[:, :, None, :], axis=3)
    raise AssertionError("unreachable")


def root_posteriors(boundaries: np.ndarray, measure: TreeMeasure, depth: int) -> np.ndarray:
    """P(root = + | boundary) for each row of boundaries"""
    boundaries = np.atleast_2d(boundaries)
    expected = level_size(measure.d, depth)
    if boundaries.shape[1] != expected:
        raise InvalidParameterError(f"boundary of depth {depth} must have {expected} spins, got {boundaries.shape[1]}")
    loglik = _root_log_likelihoods(boundaries, measure, depth)
    p = (1.0 + measure.eta) / 2.0
    with np.errstate(invalid="ignore"):
        delta = loglik[:, 1] - loglik[:, 0]
    return p / (p + (1.0 - p) * np.exp(delta))


def root_posterior(sample_boundary: np.ndarray, measure: TreeMeasure, depth: Optional[int] = None) -> np.ndarray:
    """
    Exact conditional law of the root given a full level-r boundary

    Args:
        sample_boundary: Level-r spin vector
        measure: Tree measure
        depth: Boundary depth r; inferred from the vector length when omitted

    Returns:
        Array (P(+), P(-))
    """
    boundary = np.asarray(sample_boundary)
    if depth is None:
        depth = _infer_depth(measure.d, boundary.size)
    p_plus = float(root_posteriors(boundary[None, :], measure, depth)[0])
    return np.array([p_plus, 1.0 - p_plus])


def _infer_depth(d: int, size: int) -> int:
    depth = 0
    while level_size(d, depth) < size:
        depth += 1
    if level_size(d, depth) != size:
        raise InvalidParameterError(f"{size} spins is not a full level of the {d}-regular tree")
    return depth


def _posterior_deviation(loglik: np.ndarray, p: float) -> np.ndarray:
    # |P(+|tau) - p| = p(1-p)|expm1(delta)| / (p + (1-p) e^delta), exact zero when delta = 0
    delta = loglik[:, 1] - loglik[:, 0]
    return p * (1.0 - p) * np.abs(np.expm1(delta)) / (p + (1.0 - p) * np.exp(delta))


def reconstruction_tv(d: int, beta: float, eta: float, depth: int, num_samples: int,
                      rng: np.random.Generator) -> Tuple[float, float]:
    """
    Monte Carlo estimate of E|nu(tau_0 | tau_r) - nu(tau_0)|

    Args:
        d: Degree
        beta: Inverse temperature
        eta: Root magnetization
        depth: Boundary depth, at least 1
        num_samples: Number of broadcast trees
        rng: Random stream

    Returns:
        (estimate, standard error)
    """
    if depth < 1 or num_samples < 1:
        raise InvalidParameterError("depth and num_samples must be positive")
    measure = field_for_magnetization(d, beta, eta)
    p = (1.0 + measure.eta) / 2.0
    deviations = []
    remaining = num_samples
    while remaining > 0:
        batch = min(POSTERIOR_BATCH, remaining)
        levels = sample_broadcast_batch(measure, depth, batch, rng)
        loglik = _root_log_likelihoods(levels[-1], measure, depth)
        deviations.append(_posterior_deviation(loglik, p))
        remaining -= batch
    values = np.concatenate(deviations)
    estimate = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(num_samples)) if num_samples > 1 else 0.0
    logger.info(f"reconstruction_tv d={d} beta={beta} eta={eta} depth={depth}: {estimate:.6f} +/- {stderr:.6f}")
    return estimate, stderr
