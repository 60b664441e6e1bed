#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Annealed Module for the Ising toolkit
Closed-form annealed free energy, edge-statistic optimization, the drift function F,
the rate function, and exact finite-n pairing combinatorics
"""

import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect, brentq, minimize_scalar
from scipy.special import gammaln, logsumexp, xlogy

from .exceptions import DomainError, InvalidCountError, InvalidParameterError, NoInteriorRootError
from .tree import rho_eta, thresholds
from .utils.logger import get_logger

logger = get_logger(__name__)

LOG2 = math.log(2.0)
SPINODAL_GRID_POINTS = 10_000
ETA_STAR_GRID_POINTS = 2_000
DERIVATIVE_STEP = 1e-6


@dataclass
class FreeEnergyCurve:
    """f on a symmetric eta grid, with its maximizer and spinodal"""
    d: int
    beta: float
    eta: np.ndarray
    f: np.ndarray
    rho: np.ndarray
    F: np.ndarray
    rate: np.ndarray
    eta_star: float
    eta_s: Optional[float] = None

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "eta": self.eta,
            "f": self.f,
            "rho_eta": self.rho,
            "F": self.F,
            "rate_function": self.rate,
        })


@dataclass
class EdgeCountPMF:
    """Law of the number of bichromatic edges in a planted pairing"""
    n_plus: int
    n_minus: int
    beta: float
    support: np.ndarray
    log_weights: np.ndarray = field(repr=False)
    probabilities: np.ndarray = field(repr=False)
    mu: float = float("nan")
    sigma2: float = float("nan")

    @property
    def mean(self) -> float:
        return float(np.dot(self.support, self.probabilities))

    def probability(self, k: int) -> float:
        index = np.searchsorted(self.support, k)
        if index < len(self.support) and self.support[index] == k:
            return float(self.probabilities[index])
        return 0.0

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        """Inverse-CDF draw over the full support"""
        cdf = np.cumsum(self.probabilities)
        cdf[-1] = 1.0
        u = rng.random(size)
        index = np.searchsorted(cdf, u, side="right")
        draws = self.support[np.minimum(index, len(self.support) - 1)]
        return int(draws) if size is None else draws


# ---------------------- free energy ----------------------

def g(d: int, beta: float, eta, rho):
    """
    Annealed exponent at magnetization eta and monochromatic-edge fraction rho

    Args:
        d: Degree
        beta: Inverse temperature
        eta: Magnetization
        rho: Monochromatic-edge fraction in (|eta|, 1)

    Returns:
        g(rho)
    """
    eta = np.asarray(eta, dtype=float)
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= np.abs(eta)) or np.any(rho >= 1.0):
        raise DomainError(f"rho must lie in (|eta|, 1); got rho={rho}, eta={eta}")
    vertex_term = 0.5 * (d - 1) * (xlogy(1.0 + eta, 1.0 + eta) + xlogy(1.0 - eta, 1.0 - eta))
    edge_term = 0.5 * d * (
        xlogy(1.0 - rho, 1.0 - rho)
        + 0.5 * xlogy(rho + eta, rho + eta)
        + 0.5 * xlogy(rho - eta, rho - eta)
        + LOG2
    )
    value = 0.5 * beta * rho * d + LOG2 + vertex_term - edge_term
    return float(value) if value.ndim == 0 else value


def g_derivatives(d: int, beta: float, eta: float, rho: float) -> Tuple[float, float]:
    """First and second derivative of g in rho"""
    first = 0.5 * beta * d - 0.5 * d * (-math.log(1.0 - rho) + 0.5 * math.log(rho + eta) + 0.5 * math.log(rho - eta))
    second = -d / (2.0 * (1.0 - rho)) - d / (4.0 * (rho + eta)) - d / (4.0 * (rho - eta))
    return first, second


def argmax_g(d: int, beta: float, eta: float) -> float:
    """Maximizer of the strictly concave g, located as the zero of g'"""
    a = abs(eta)
    offset = (1.0 - a) * 1e-15
    lower, upper = a + offset, 1.0 - offset

    def slope(rho):
        return g_derivatives(d, beta, eta, rho)[0]

    return brentq(slope, lower, upper, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def f(d: int, beta: float, eta):
    """Annealed free energy density: g evaluated at rho_eta"""
    eta = np.asarray(eta, dtype=float)
    # rho_eta rounds onto |eta| once 1 - |eta| is near machine precision
    rho = np.maximum(rho_eta(beta, eta), np.nextafter(np.abs(eta), 1.0))
    return g(d, beta, eta, rho)


def F(d: int, beta: float, eta):
    """
    Drift function (1-eta)/(1+eta) * (((rho-eta) e^-beta + (1-rho) e^beta) / (1-eta))^d

    F(0) = 1 and f'(eta) = log(F(eta)) / 2.
    """
    eta = np.asarray(eta, dtype=float)
    rho = rho_eta(beta, eta)
    inner = ((rho - eta) * math.exp(-beta) + (1.0 - rho) * math.exp(beta)) / (1.0 - eta)
    value = np.exp(np.log1p(-eta) - np.log1p(eta) + d * np.log(inner))
    return float(value) if value.ndim == 0 else value


def f_prime(d: int, beta: float, eta):
    """Derivative of f in eta"""
    return 0.5 * np.log(F(d, beta, eta))


def _f_second(d: int, beta: float, eta):
    step = DERIVATIVE_STEP
    return (f_prime(d, beta, eta + step) - f_prime(d, beta, eta - step)) / (2.0 * step)


def F_root(d: int, beta: float) -> float:
    """
    The interior solution m_* of F(m) = 1 on (0, 1)

    Raises:
        NoInteriorRootError: beta <= beta_c, where F < 1 on (0, 1)
    """
    beta_c, _ = thresholds(d)
    if beta <= beta_c:
        raise NoInteriorRootError(f"F has no interior root for beta={beta} <= beta_c={beta_c:.6f}")

    def log_F(eta):
        return np.log(F(d, beta, eta))

    grid = np.linspace(1e-6, 1.0 - 1e-9, ETA_STAR_GRID_POINTS)
    values = log_F(grid)
    crossings = np.nonzero((values[:-1] > 0.0) & (values[1:] <= 0.0))[0]
    if len(crossings) == 0:
        raise NoInteriorRootError(f"no sign change of log F found for d={d} beta={beta}")
    i = crossings[0]
    m_star = bisect(log_F, grid[i], grid[i + 1], xtol=1e-13)
    logger.debug(f"F_root d={d} beta={beta}: m_star={m_star:.10f}")
    return float(m_star)


def eta_star(d: int, beta: float) -> float:
    """Positive maximizer of f; 0 when beta <= beta_c"""
    beta_c, _ = thresholds(d)
    if beta <= beta_c:
        return 0.0
    grid = np.linspace(0.0, 1.0 - 1e-9, ETA_STAR_GRID_POINTS)
    values = f(d, beta, grid)
    i = int(np.argmax(values))
    lower = grid[max(i - 1, 0)]
    upper = grid[min(i + 1, len(grid) - 1)]
    result = minimize_scalar(lambda x: -f(d, beta, x), bounds=(lower, upper), method="bounded",
                             options={"xatol": 1e-12})
    return float(result.x)


def spinodal(d: int, beta: float) -> Optional[float]:
    """Smallest positive inflection point of f; None when beta <= beta_c"""
    beta_c, _ = thresholds(d)
    if beta <= beta_c:
        return None
    grid = np.linspace(2 * DERIVATIVE_STEP, 1.0 - 1e-6, SPINODAL_GRID_POINTS)
    with np.errstate(divide="ignore", invalid="ignore"):
        curvature = _f_second(d, beta, grid)
    crossings = np.nonzero((curvature[:-1] > 0.0) & (curvature[1:] <= 0.0))[0]
    if len(crossings) == 0:
        logger.warning(f"no inflection of f found for d={d} beta={beta}")
        return None
    i = crossings[0]
    return float(bisect(lambda x: _f_second(d, beta, x), grid[i], grid[i + 1], xtol=1e-12))


def rate_function(d: int, beta: float, eta):
    """f(eta) - max f, non-positive"""
    return f(d, beta, eta) - f(d, beta, eta_star(d, beta))


def symmetric_grid(points: int, limit: float) -> np.ndarray:
    """Odd-sized grid on [-limit, limit], exactly symmetric and containing 0"""
    half = max(points // 2, 1)
    positive = np.linspace(limit / half, limit, half)
    return np.concatenate([-positive[::-1], [0.0], positive])


def free_energy_curve(d: int, beta: float, points: int = 201) -> FreeEnergyCurve:
    """
    Tabulate f, rho_eta, F and the rate function on an eta grid

    Args:
        d: Degree
        beta: Inverse temperature
        points: Number of grid points (rounded up to odd)

    Returns:
        FreeEnergyCurve
    """
    if points < 3:
        raise InvalidParameterError(f"points must be at least 3, got {points}")
    half = points // 2
    grid = symmetric_grid(points, 1.0 - 1.0 / (half + 1))
    values = f(d, beta, grid)
    star = eta_star(d, beta)
    curve = FreeEnergyCurve(
        d=d,
        beta=beta,
        eta=grid,
        f=values,
        rho=rho_eta(beta, grid),
        F=F(d, beta, grid),
        rate=values - f(d, beta, star),
        eta_star=star,
        eta_s=spinodal(d, beta),
    )
    logger.info(f"free_energy_curve d={d} beta={beta}: eta_star={star:.6f}, eta_s={curve.eta_s}")
    return curve


def anti_free_energy_zero(d: int, beta: float) -> float:
    """Annealed free energy of the anti-ferromagnet at zero magnetization"""
    return LOG2 + 0.5 * d * math.log((1.0 + math.exp(-beta)) / 2.0)


def energy_density_predictions(d: int, beta: float) -> Tuple[float, float]:
    """
    Predicted (1/n) E[H] for the zero-magnetization ferromagnet and the free anti-ferromagnet

    The two sum to d/2.
    """
    ferro = 0.5 * d * math.exp(beta) / (1.0 + math.exp(beta))
    anti = 0.5 * d / (1.0 + math.exp(beta))
    return ferro, anti


# ---------------------- pairing combinatorics ----------------------

def log_double_factorial(m):
    """log m!! for odd m >= -1, with (-1)!! = 1"""
    m = np.asarray(m, dtype=float)
    j = (m + 1.0) / 2.0
    value = gammaln(2.0 * j + 1.0) - j * LOG2 - gammaln(j + 1.0)
    return float(value) if value.ndim == 0 else value


def log_binomial(n, k):
    return gammaln(np.asarray(n, dtype=float) + 1.0) - gammaln(np.asarray(k, dtype=float) + 1.0) \
        - gammaln(np.asarray(n, dtype=float) - np.asarray(k, dtype=float) + 1.0)


def valid_support(n_plus: int, n_minus: int) -> np.ndarray:
    """Bichromatic counts k with n_plus - k, n_minus - k non-negative and even"""
    if (n_plus + n_minus) % 2 != 0:
        return np.array([], dtype=np.int64)
    return np.arange(n_plus % 2, min(n_plus, n_minus) + 1, 2, dtype=np.int64)


def _log_b(n_plus: int, n_minus: int, k: np.ndarray) -> np.ndarray:
    return (log_binomial(n_plus, k) + log_binomial(n_minus, k) + gammaln(k + 1.0)
            + log_double_factorial(n_plus - k - 1) + log_double_factorial(n_minus - k - 1))


def b_count(n_plus: int, n_minus: int, k: int) -> float:
    """
    log of the number of perfect matchings with exactly k bichromatic edges

    Raises:
        InvalidCountError: n_plus - k or n_minus - k negative or odd
    """
    for remainder in (n_plus - k, n_minus - k):
        if k < 0 or remainder < 0 or remainder % 2 != 0:
            raise InvalidCountError(f"no matching of {n_plus}+{n_minus} clones has {k} bichromatic edges")
    return float(_log_b(n_plus, n_minus, np.asarray(k, dtype=float)))


def annealed_first_moment(n: int, d: int, beta: float, k_plus: int) -> float:
    """
    log E[z_k] over the configuration model, exact

    Args:
        n: Number of vertices
        d: Degree
        beta: Inverse temperature
        k_plus: Number of plus vertices

    Returns:
        log of the expected fixed-magnetization partition function
    """
    if (d * n) % 2 != 0:
        raise InvalidParameterError(f"d*n must be even, got d={d}, n={n}")
    if not 0 <= k_plus <= n:
        raise InvalidParameterError(f"k_plus must lie in [0, {n}], got {k_plus}")
    n_plus, n_minus = d * k_plus, d * (n - k_plus)
    support = valid_support(n_plus, n_minus).astype(float)
    terms = beta * (d * n / 2.0 - support) + _log_b(n_plus, n_minus, support)
    return float(log_binomial(n, k_plus) + logsumexp(terms) - log_double_factorial(d * n - 1))


# ---------------------- bichromatic count law ----------------------

def surrogate_log_pmf(k, n_plus: int, n_minus: int, beta: float, log_Z: float = 0.0):
    """Stirling surrogate of log p(k), extended to real k in (0, min(n_plus, n_minus))"""
    k = np.asarray(k, dtype=float)
    N = n_plus + n_minus
    a = (n_plus - k) / 2.0
    b = (n_minus - k) / 2.0
    return (beta * (N / 2.0 - k) - log_Z
            + xlogy(n_plus, n_plus) + xlogy(n_minus, n_minus)
            - xlogy(k, k) - xlogy(a, a) - xlogy(b, b)
            + 0.5 * np.log(2.0 * n_plus * n_minus / (math.pi * k * (n_plus - k) * (n_minus - k)))
            + (k - N / 2.0) * LOG2 - N / 2.0)


def _local_clt_parameters(pmf: EdgeCountPMF, log_Z: float) -> Tuple[float, float]:
    n_plus, n_minus, beta = pmf.n_plus, pmf.n_minus, pmf.beta
    top = min(n_plus, n_minus)
    mean = pmf.mean
    variance = float(np.dot((pmf.support - mean) ** 2, pmf.probabilities))
    if top < 4:
        return mean, variance

    def objective(k):
        return -surrogate_log_pmf(k, n_plus, n_minus, beta, log_Z)

    mode = float(pmf.support[int(np.argmax(pmf.probabilities))])
    lower = max(mode - 3.0, 1e-3)
    upper = min(mode + 3.0, top - 1e-3)
    mu = float(minimize_scalar(objective, bounds=(lower, upper), method="bounded",
                               options={"xatol": 1e-9}).x)
    step = min(0.5, mu / 2.0, (top - mu) / 2.0)
    curvature = (surrogate_log_pmf(mu + step, n_plus, n_minus, beta)
                 - 2.0 * surrogate_log_pmf(mu, n_plus, n_minus, beta)
                 + surrogate_log_pmf(mu - step, n_plus, n_minus, beta)) / step ** 2
    if curvature >= 0.0:
        logger.warning(f"surrogate not concave at mu={mu} for n_plus={n_plus}, n_minus={n_minus}")
        return mean, variance
    return mu, float(-1.0 / curvature)


def edge_count_pmf(n_plus: int, n_minus: int, beta: float) -> EdgeCountPMF:
    """
    Law of the bichromatic count of a planted pairing on n_plus + n_minus clones

    p(k) is proportional to e^{-beta k} b(k) over the parity-valid support.

    Args:
        n_plus: Plus clones
        n_minus: Minus clones
        beta: Inverse temperature

    Returns:
        EdgeCountPMF with local-CLT parameters mu and sigma2
    """
    support = valid_support(n_plus, n_minus)
    if len(support) == 0:
        raise InvalidParameterError(f"empty support for n_plus={n_plus}, n_minus={n_minus}")
    log_weights = beta * ((n_plus + n_minus) / 2.0 - support) + _log_b(n_plus, n_minus, support.astype(float))
    log_Z = float(logsumexp(log_weights))
    probabilities = np.exp(log_weights - log_Z)
    probabilities /= probabilities.sum()
    pmf = EdgeCountPMF(
        n_plus=n_plus,
        n_minus=n_minus,
        beta=beta,
        support=support,
        log_weights=log_weights,
        probabilities=probabilities,
    )
    pmf.mu, pmf.sigma2 = _local_clt_parameters(pmf, log_Z)
    logger.debug(f"edge_count_pmf n_plus={n_plus} n_minus={n_minus} beta={beta}: "
                 f"support={len(support)} mu={pmf.mu:.4f} sigma2={pmf.sigma2:.4f}")
    return pmf
