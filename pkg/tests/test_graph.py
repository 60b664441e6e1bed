"""
Tests for pairings, cached-energy spin configurations, switchings and neighborhoods
"""

from collections import Counter

import numpy as np
import pytest
from scipy.stats import chisquare

from app.exceptions import InvalidInputError, InvalidParameterError, InvalidSwitchError
from app.graph import (
    Pairing,
    SpinConfig,
    Switch,
    apply_switch,
    count_mono,
    neighborhood,
    random_switch,
    sample_uniform_pairing,
    switch_delta_h,
)
from app.oracle import enumerate_pairings


class TestPairing:

    def test_sampled_pairing_is_involution(self, rng):
        pairing = sample_uniform_pairing(50, 3, rng)
        clones = np.arange(150)
        assert np.all(pairing.mate[pairing.mate] == clones)
        assert np.all(pairing.mate != clones)
        assert len(pairing.edges()) == 75

    def test_odd_clone_count_rejected(self, rng):
        with pytest.raises(InvalidParameterError):
            sample_uniform_pairing(5, 3, rng)

    def test_invalid_mate_rejected(self):
        with pytest.raises(InvalidInputError):
            Pairing(2, 2, [1, 0, 2, 3])
        with pytest.raises(InvalidInputError):
            Pairing(2, 2, [1, 2, 0, 3])

    def test_uniform_over_all_pairings(self, rng):
        index = {tuple(p.mate.tolist()): i for i, p in enumerate(enumerate_pairings(2, 3))}
        assert len(index) == 15
        counts = Counter(index[tuple(sample_uniform_pairing(2, 3, rng).mate.tolist())] for _ in range(30000))
        observed = [counts[i] for i in range(15)]
        assert chisquare(observed).pvalue > 1e-3

    def test_loops_and_neighbors(self):
        # vertex 0: loop (0,1) and edge (2,3); vertex 1: loop (4,5)
        pairing = Pairing(2, 3, [1, 0, 3, 2, 5, 4])
        assert pairing.neighbors(0) == (1,)
        assert pairing.loop_count(0) == 1
        assert pairing.loop_count(1) == 1
        assert pairing.multiplicity(0, 1) == 1

    def test_multi_edges(self):
        pairing = Pairing(2, 3, [3, 4, 5, 0, 1, 2])
        assert pairing.neighbors(0) == (1, 1, 1)
        assert pairing.multiplicity(1, 0) == 3

    def test_text_format(self, k4):
        text = k4.to_text()
        assert text.splitlines()[0] == "4 3"
        assert Pairing.from_text(text) == k4

    def test_malformed_text(self):
        with pytest.raises(InvalidInputError):
            Pairing.from_text("")
        with pytest.raises(InvalidInputError):
            Pairing.from_text("2 3\n0 x\n")


class TestSpinConfig:

    def test_complete_graph_counts(self, k4):
        assert count_mono(k4, [1, 1, 1, 1]) == 6
        assert count_mono(k4, [1, 1, -1, -1]) == 2
        assert count_mono(k4, [1, -1, -1, -1]) == 3

    def test_cached_energy_survives_random_moves(self, rng):
        pairing = sample_uniform_pairing(10, 3, rng)
        config = SpinConfig(pairing, np.where(rng.random(10) < 0.5, 1, -1))
        for _ in range(2000):
            if rng.random() < 0.5:
                config.flip(int(rng.integers(10)))
            elif config.plus_list and config.minus_list:
                u = config.plus_list[int(rng.integers(len(config.plus_list)))]
                v = config.minus_list[int(rng.integers(len(config.minus_list)))]
                config.swap(u, v)
            assert config.H == config.recount()
            assert config.k_plus == int(np.sum(config.spins == 1))
            assert sorted(config.plus_list + config.minus_list) == list(range(10))

    def test_swap_keeps_plus_count(self, k4):
        config = SpinConfig(k4, [1, 1, -1, -1])
        config.swap(0, 2)
        assert config.k_plus == 2
        np.testing.assert_array_equal(config.spins, [-1, 1, 1, -1])

    def test_swap_between_adjacent_vertices_on_multi_edge(self):
        pairing = Pairing(2, 4, [4, 5, 3, 2, 0, 1, 7, 6])
        config = SpinConfig(pairing, [1, -1])
        before = config.H
        delta = config.swap_delta(0, 1)
        config.swap(0, 1)
        assert config.H == before + delta == config.recount()

    def test_swap_needs_opposite_spins(self, k4):
        config = SpinConfig(k4, [1, 1, -1, -1])
        with pytest.raises(InvalidInputError):
            config.swap(0, 1)

    def test_rejects_bad_spins(self, k4):
        with pytest.raises(InvalidInputError):
            SpinConfig(k4, [1, 0, 1, 1])
        with pytest.raises(InvalidInputError):
            SpinConfig(k4, [1, 1, 1])


class TestSwitch:

    def test_switch_and_inverse(self, rng):
        pairing = sample_uniform_pairing(12, 3, rng)
        spins = np.where(rng.random(12) < 0.5, 1, -1)
        for _ in range(50):
            switch = random_switch(pairing, rng)
            switched = apply_switch(pairing, switch)
            assert apply_switch(switched, switch.inverse()) == pairing
            assert switch_delta_h(pairing, spins, switch) == count_mono(switched, spins) - count_mono(pairing, spins)
            pairing = switched

    def test_invalid_switch(self, k4):
        with pytest.raises(InvalidSwitchError):
            apply_switch(k4, Switch(0, 3, 0, 3))
        with pytest.raises(InvalidSwitchError):
            apply_switch(k4, Switch(0, 1, 2, 9))
        with pytest.raises(InvalidSwitchError):
            apply_switch(k4, Switch(0, 3, 1, 6, "diagonal"))


class TestNeighborhood:

    def test_complete_graph_balls(self, k4):
        ball = neighborhood(k4, 0, 1)
        assert ball.is_tree
        assert sorted(ball.vertices) == [0, 1, 2, 3]
        assert sorted(ball.children[0]) == [1, 2, 3]
        assert sorted(ball.boundary) == [1, 2, 3]
        assert not neighborhood(k4, 0, 2).is_tree

    def test_loop_breaks_tree(self):
        pairing = Pairing(2, 3, [1, 0, 3, 2, 5, 4])
        ball = neighborhood(pairing, 0, 1)
        assert ball.has_loop
        assert not ball.is_tree

    def test_radius_zero(self, k4):
        ball = neighborhood(k4, 2, 0)
        assert ball.vertices == [2]
        assert ball.is_tree

    def test_large_graph_balls_are_mostly_trees(self, rng):
        pairing = sample_uniform_pairing(2000, 3, rng)
        trees = sum(neighborhood(pairing, v, 2).is_tree for v in range(200))
        assert trees >= 180
