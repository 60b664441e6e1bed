"""
Tests for the annealed free energy, the drift function and pairing combinatorics
"""

import math
import warnings

import numpy as np
import pytest

from app import annealed
from app.exceptions import DomainError, InvalidCountError, InvalidParameterError, NoInteriorRootError
from app.oracle import enumerate_first_moment
from app.tree import rho_eta


class TestFreeEnergy:

    def test_zero_magnetization_closed_form(self):
        for d in range(3, 23):
            for beta in np.linspace(0.0, 3.0, 20):
                expected = math.log(2.0) + 0.5 * d * math.log((1.0 + math.exp(beta)) / 2.0)
                assert annealed.f(d, beta, 0.0) == pytest.approx(expected, abs=1e-12)

    def test_optimizer_matches_edge_fraction(self):
        for d in (3, 6, 10):
            for beta in (0.1, 0.7, 2.0):
                for eta in (-0.6, 0.0, 0.3, 0.85):
                    assert annealed.argmax_g(d, beta, eta) == pytest.approx(rho_eta(beta, eta), abs=1e-8)

    def test_g_rejects_rho_outside_domain(self):
        with pytest.raises(DomainError):
            annealed.g(3, 0.5, 0.4, 0.4)
        with pytest.raises(DomainError):
            annealed.g(3, 0.5, 0.0, 1.0)

    def test_symmetric_in_magnetization(self):
        eta = np.linspace(0.05, 0.95, 19)
        np.testing.assert_allclose(annealed.f(5, 0.8, eta), annealed.f(5, 0.8, -eta), atol=1e-13)

    def test_anti_ferromagnet_is_negative_beta(self):
        for d in (3, 7):
            for beta in (0.3, 1.5):
                assert annealed.anti_free_energy_zero(d, beta) == pytest.approx(annealed.f(d, -beta, 0.0), abs=1e-12)

    def test_energy_predictions_sum_to_half_degree(self):
        for beta in (0.0, 0.5, 2.0):
            ferro, anti = annealed.energy_density_predictions(3, beta)
            assert ferro + anti == pytest.approx(1.5, abs=1e-14)
        ferro, anti = annealed.energy_density_predictions(3, 0.5)
        assert ferro == pytest.approx(1.5 * rho_eta(0.5, 0.0), abs=1e-14)


class TestDrift:

    def test_one_at_zero(self):
        for d in (3, 10):
            for beta in (0.0, 0.5, 2.0):
                assert annealed.F(d, beta, 0.0) == pytest.approx(1.0, abs=1e-12)

    def test_slope_at_zero(self):
        step = 1e-6
        for d in (3, 10):
            for beta in (0.2, 1.0):
                slope = (annealed.F(d, beta, step) - annealed.F(d, beta, -step)) / (2.0 * step)
                assert slope == pytest.approx(-2.0 + d * (1.0 - math.exp(-beta)), abs=1e-6)

    def test_is_exponential_of_twice_the_slope_of_f(self):
        step = 1e-5
        for d in (3, 10):
            for beta in (0.32, 1.0):
                for eta in (-0.5, 0.0, 0.3, 0.7):
                    numeric = (annealed.f(d, beta, eta + step) - annealed.f(d, beta, eta - step)) / (2.0 * step)
                    assert annealed.f_prime(d, beta, eta) == pytest.approx(numeric, abs=1e-6)

    def test_interior_root_is_the_maximizer(self):
        m_star = annealed.F_root(10, 0.32)
        assert 0.0 < m_star < 1.0
        assert annealed.F(10, 0.32, m_star) == pytest.approx(1.0, abs=1e-9)
        assert annealed.eta_star(10, 0.32) == pytest.approx(m_star, abs=1e-6)

    def test_no_root_in_uniqueness(self):
        with pytest.raises(NoInteriorRootError):
            annealed.F_root(10, 0.2)
        assert annealed.eta_star(10, 0.2) == 0.0
        assert annealed.spinodal(10, 0.2) is None

    def test_spinodal_is_an_inflection_below_the_maximizer(self):
        eta_s = annealed.spinodal(10, 0.32)
        assert 0.0 < eta_s < annealed.eta_star(10, 0.32)
        step = 1e-5
        curvature = (annealed.f_prime(10, 0.32, eta_s + step) - annealed.f_prime(10, 0.32, eta_s - step)) / (2 * step)
        assert abs(curvature) < 1e-4

    def test_spinodal_is_silent(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            eta_s = annealed.spinodal(10, 0.32)
        assert 0.0 < eta_s < annealed.eta_star(10, 0.32)

    @pytest.mark.parametrize("eta", [1 - 1e-12, -(1 - 1e-12), 1 - 1e-15])
    def test_free_energy_next_to_full_magnetization(self, eta):
        # f tends to beta * d / 2 as |eta| -> 1
        assert annealed.f(3, 3.0, eta) == pytest.approx(4.5, abs=1e-6)
        assert np.isfinite(annealed.rate_function(3, 3.0, eta))


class TestFreeEnergyCurve:

    def test_double_well_shape(self):
        curve = annealed.free_energy_curve(10, 0.32, 2001)
        assert len(curve.eta) == 2001
        middle = 1000
        assert curve.eta[middle] == 0.0
        assert curve.f[middle] < curve.f[middle - 1]
        assert curve.f[middle] < curve.f[middle + 1]
        peak = abs(curve.eta[int(np.argmax(curve.f))])
        assert peak == pytest.approx(curve.eta_star, abs=1.1e-3)

    def test_rate_function_non_positive(self):
        curve = annealed.free_energy_curve(10, 0.32, 401)
        assert np.all(curve.rate <= 1e-10)
        assert annealed.rate_function(10, 0.32, curve.eta_star) == pytest.approx(0.0, abs=1e-14)

    def test_frame_columns(self):
        frame = annealed.free_energy_curve(3, 0.5, 11).to_frame()
        assert list(frame.columns) == ["eta", "f", "rho_eta", "F", "rate_function"]
        assert len(frame) == 11

    def test_grid_is_symmetric(self):
        grid = annealed.symmetric_grid(201, 0.99)
        np.testing.assert_array_equal(grid, -grid[::-1])
        assert 0.0 in grid


class TestPairingCombinatorics:

    def test_double_factorial(self):
        assert annealed.log_double_factorial(-1) == pytest.approx(0.0, abs=1e-14)
        assert annealed.log_double_factorial(5) == pytest.approx(math.log(15.0), abs=1e-12)
        assert annealed.log_double_factorial(7) == pytest.approx(math.log(105.0), abs=1e-12)

    def test_matching_counts(self):
        assert annealed.b_count(3, 3, 1) == pytest.approx(math.log(9.0), abs=1e-12)
        assert annealed.b_count(3, 3, 3) == pytest.approx(math.log(6.0), abs=1e-12)

    def test_invalid_counts(self):
        for k in (-1, 0, 2, 5):
            with pytest.raises(InvalidCountError):
                annealed.b_count(3, 3, k)

    def test_counts_sum_to_all_matchings(self):
        support = annealed.valid_support(9, 7)
        total = sum(math.exp(annealed.b_count(9, 7, int(k))) for k in support)
        assert total == pytest.approx(math.exp(annealed.log_double_factorial(15)), rel=1e-12)

    def test_first_moment_at_infinite_temperature(self):
        for n, d in ((4, 3), (10, 4), (30, 3)):
            for k in range(n + 1):
                expected = float(annealed.log_binomial(n, k))
                assert annealed.annealed_first_moment(n, d, 0.0, k) == pytest.approx(expected, abs=1e-9)

    def test_first_moment_matches_enumeration(self):
        for n, d in ((2, 3), (2, 4), (1, 4), (1, 6), (1, 8)):
            for beta in (0.0, 0.5, 1.5):
                for k in range(n + 1):
                    exact = enumerate_first_moment(n, d, beta, k)
                    assert math.exp(annealed.annealed_first_moment(n, d, beta, k)) == pytest.approx(exact, rel=1e-10)

    @pytest.mark.slow
    def test_first_moment_matches_enumeration_up_to_twelve_clones(self):
        for n, d in ((4, 3), (2, 6), (3, 4)):
            for beta in (0.0, 0.5, 1.5):
                for k in range(n + 1):
                    exact = enumerate_first_moment(n, d, beta, k)
                    assert math.exp(annealed.annealed_first_moment(n, d, beta, k)) == pytest.approx(exact, rel=1e-10)

    def test_first_moment_approaches_free_energy(self):
        n = 2000
        density = annealed.annealed_first_moment(n, 3, 0.5, n // 2) / n
        assert density == pytest.approx(annealed.f(3, 0.5, 0.0), abs=0.01)

    def test_first_moment_rejects_odd_clones(self):
        with pytest.raises(InvalidParameterError):
            annealed.annealed_first_moment(3, 3, 0.5, 1)


class TestEdgeCountLaw:

    def test_small_law(self):
        beta = 0.7
        pmf = annealed.edge_count_pmf(3, 3, beta)
        np.testing.assert_array_equal(pmf.support, [1, 3])
        weight_1, weight_3 = 9.0 * math.exp(-beta), 6.0 * math.exp(-3.0 * beta)
        assert pmf.probability(1) == pytest.approx(weight_1 / (weight_1 + weight_3), abs=1e-12)
        assert pmf.probability(2) == 0.0
        assert pmf.probabilities.sum() == pytest.approx(1.0, abs=1e-14)

    def test_sampling_frequency(self, rng):
        pmf = annealed.edge_count_pmf(3, 3, 0.7)
        draws = pmf.sample(rng, 20000)
        assert np.mean(draws == 1) == pytest.approx(pmf.probability(1), abs=0.02)
        assert isinstance(pmf.sample(rng), int)

    def test_local_gaussian_approximation(self):
        pmf = annealed.edge_count_pmf(750, 750, 0.5)
        sigma = math.sqrt(pmf.sigma2)
        assert pmf.mu == pytest.approx(pmf.mean, abs=1.0)
        window = np.abs(pmf.support - pmf.mu) <= sigma * math.log(sigma)
        gaussian = 2.0 / math.sqrt(2.0 * math.pi * pmf.sigma2) * np.exp(
            -(pmf.support - pmf.mu) ** 2 / (2.0 * pmf.sigma2))
        deviation = np.max(np.abs(pmf.probabilities - gaussian)[window])
        assert deviation <= 0.15 * pmf.probabilities.max()

    def test_empty_support(self):
        with pytest.raises(InvalidParameterError):
            annealed.edge_count_pmf(3, 4, 0.5)
