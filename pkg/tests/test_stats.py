"""
Tests for overlap matrices, local-law comparisons and the energy-density check
"""

import math

import numpy as np
import pytest

from app.dynamics import uniform_slice_config
from app.exceptions import InvalidParameterError
from app.graph import neighborhood, sample_uniform_pairing
from app.planted import sample_planted
from app.stats import (
    ball_code,
    edge_overlap,
    edge_type_probs,
    edge_types,
    exact_ball_law,
    local_law_tv,
    overlap_deviation,
    tree_reference_overlap,
    vertex_overlap_from_edges,
    zb_check,
)
from app.tree import field_for_magnetization, rho_eta


class TestOverlap:

    def test_complete_graph_by_hand(self, k4):
        sigma = [1, 1, -1, -1]
        sigma_prime = [1, -1, 1, -1]
        np.testing.assert_array_equal(edge_types(k4, sigma), [0, 1, 1, 1, 1, 3])
        np.testing.assert_array_equal(edge_types(k4, sigma_prime), [1, 0, 1, 2, 3, 1])
        expected = np.zeros((4, 4))
        for i, j in ((0, 1), (1, 0), (1, 1), (1, 2), (1, 3), (3, 1)):
            expected[i, j] = 1.0 / 6.0
        overlap = edge_overlap(k4, sigma, sigma_prime)
        np.testing.assert_allclose(overlap.values, expected, atol=1e-15)
        assert vertex_overlap_from_edges(overlap) == pytest.approx(0.25, abs=1e-15)

    def test_vertex_overlap_on_random_graph(self, rng):
        pairing = sample_uniform_pairing(300, 3, rng)
        sigma = np.where(rng.random(300) < 0.6, 1, -1)
        sigma_prime = np.where(rng.random(300) < 0.3, 1, -1)
        expected = np.mean((sigma == 1) & (sigma_prime == 1))
        overlap = edge_overlap(pairing, sigma, sigma_prime)
        assert overlap.values.sum() == pytest.approx(1.0)
        assert vertex_overlap_from_edges(overlap) == pytest.approx(expected, abs=1e-12)

    def test_tree_edge_types(self):
        for eta in (-0.4, 0.0, 0.5):
            measure = field_for_magnetization(3, 0.9, eta)
            probs = edge_type_probs(measure)
            assert probs.as_array().sum() == pytest.approx(1.0, abs=1e-14)
            assert probs.p_pm == pytest.approx(probs.p_mp, abs=1e-14)
            assert probs.p_pp + probs.p_mm == pytest.approx(rho_eta(0.9, eta), abs=1e-12)
            assert tree_reference_overlap(measure).values.sum() == pytest.approx(1.0, abs=1e-14)

    def test_independent_samples_match_reference(self, make_rng):
        pairing = sample_uniform_pairing(2000, 3, make_rng(1))
        mean, _ = overlap_deviation(pairing, 0.0, 1000, 3, 1, make_rng(2))
        assert mean < 0.05

    def test_identical_samples_do_not(self, make_rng):
        pairing = sample_uniform_pairing(2000, 3, make_rng(1))
        mean, _ = overlap_deviation(pairing, 0.0, 1000, 2, 1, make_rng(3), identical=True)
        assert mean > 0.2

    def test_rejects_bad_arguments(self, k4, rng):
        with pytest.raises(InvalidParameterError):
            overlap_deviation(k4, 0.5, 2, 0, 1, rng)
        with pytest.raises(InvalidParameterError):
            overlap_deviation(k4, 0.5, 4, 1, 1, rng)


class TestLocalLaw:

    def test_ball_code(self, k4):
        code = ball_code(neighborhood(k4, 0, 1), [1, -1, 1, -1])
        assert code == (1, ((-1, ()), (-1, ()), (1, ())))

    def test_exact_law_is_a_distribution(self):
        measure = field_for_magnetization(3, 0.8, 0.3)
        for radius in range(4):
            assert sum(exact_ball_law(measure, radius).values()) == pytest.approx(1.0, abs=1e-10)

    def test_exact_law_at_infinite_temperature(self):
        law = exact_ball_law(field_for_magnetization(3, 0.0, 0.0), 1)
        assert len(law) == 8
        for (root, children), p in law.items():
            pluses = sum(1 for child in children if child[0] == 1)
            assert p == pytest.approx(0.5 * math.comb(3, pluses) / 8.0, abs=1e-14)

    def test_uniform_configuration_matches_tree(self, make_rng):
        rng = make_rng(7)
        pairing = sample_uniform_pairing(8000, 3, rng)
        config = uniform_slice_config(pairing, 4000, rng)
        report = local_law_tv(pairing, 0.0, 4000, 1, 8000, None, rng, config=config)
        assert report.num_tree_balls + report.num_non_tree_balls == 8000
        assert report.tv < 0.04

    def test_planted_configuration_matches_tree(self, make_rng):
        rng = make_rng(8)
        sample = sample_planted(6000, 3, 1.0, 3000, rng)
        report = local_law_tv(sample.pairing, 1.0, 3000, 1, 6000, None, rng, config=sample.config)
        assert report.tv < 0.05

    def test_radius_limits(self, k4, rng):
        with pytest.raises(InvalidParameterError):
            local_law_tv(k4, 0.5, 2, 4, 4, 1, rng)


class TestEnergyIdentity:

    def test_small_graph(self, make_rng):
        report = zb_check(3, 0.5, 200, 200, 50, make_rng(9), tolerance=0.1)
        ferro, anti = report.ferro_prediction, report.anti_prediction
        assert ferro + anti == pytest.approx(1.5)
        assert report.passed
        assert report.total == pytest.approx(1.5, rel=0.1)

    def test_odd_size_rejected(self, rng):
        with pytest.raises(InvalidParameterError):
            zb_check(4, 0.5, 201, 10, 1, rng)

    @pytest.mark.slow
    def test_acceptance_scale(self, make_rng):
        report = zb_check(3, 0.5, 400, 2000, 200, make_rng(10), tolerance=0.03)
        assert report.passed
