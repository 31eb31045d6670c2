"""
Unit tests for Hebbian adaptation and the context network
"""

import pytest
import numpy as np

from qlsm.exceptions import ConfigError, SizeError
from qlsm.hebbian import ContextNetwork, HebbianConfig, art_categorize, hebbian_update, unsupervised_session
from qlsm.reservoir import build_reservoir
from qlsm.signal_generator import SignalGenerator


class TestHebbianConfig:
    """Test suite for learning parameters."""

    def test_defaults_valid(self):
        cfg = HebbianConfig()
        assert cfg.weight_cap == 1.0

    @pytest.mark.parametrize("kwargs", [
        {'rate': 0.0},
        {'rate': 1.5},
        {'weight_cap': 0.0},
        {'decay': 1.0},
        {'decay': -0.1},
    ])
    def test_invalid_parameters(self, kwargs):
        with pytest.raises(ConfigError):
            HebbianConfig(**kwargs)


class TestContextNetwork:
    """Test suite for fuzzy-ART categorization."""

    def test_first_pattern_creates_category(self):
        net = ContextNetwork(4)
        assert net.categorize(np.array([1.0, 1.0, 0.0, 0.0])) == 0
        assert net.num_categories == 1

    def test_repeated_pattern_resonates(self):
        net = ContextNetwork(4)
        pattern = np.array([0.9, 0.8, 0.1, 0.0])
        first = net.categorize(pattern)
        assert all(art_categorize(net, pattern) == first for _ in range(5))
        assert net.num_categories == 1

    def test_disjoint_pattern_gets_new_category(self):
        net = ContextNetwork(4, vigilance=0.9)
        net.categorize(np.array([1.0, 1.0, 0.0, 0.0]))
        assert net.categorize(np.array([0.0, 0.0, 1.0, 1.0])) == 1

    def test_low_vigilance_merges(self):
        net = ContextNetwork(2, vigilance=0.1)
        net.categorize(np.array([1.0, 0.5]))
        assert net.categorize(np.array([0.5, 1.0])) == 0

    def test_zero_pattern_matches_everything(self):
        net = ContextNetwork(3, complement_coding=False)
        net.categorize(np.array([1.0, 0.0, 1.0]))
        assert net.match(np.zeros(3), 0) == 1.0

    def test_context_links_carry_negative_weights(self):
        net = ContextNetwork(4)
        net.categorize(np.array([1.0, 1.0, 0.0, 0.0]))
        links = net.context_links[0]
        assert links.sum() == pytest.approx(0.0)
        assert np.all(links[2:] < 0) and np.all(links[:2] > 0)

    def test_active_nodes(self):
        net = ContextNetwork(3)
        net.categorize(np.array([0.9, 0.2, 0.5]))
        assert net.active_nodes(0).tolist() == [True, True, False]

    def test_complement_coding_rejects_dominated_pattern(self):
        plain = ContextNetwork(2, vigilance=0.9, complement_coding=False)
        plain.categorize(np.array([1.0, 1.0]))
        assert plain.match(np.array([0.2, 0.2]), 0) == 1.0

        coded = ContextNetwork(2, vigilance=0.9)
        coded.categorize(np.array([1.0, 1.0]))
        assert coded.match(np.array([0.2, 0.2]), 0) == pytest.approx(0.2)
        assert coded.categorize(np.array([0.2, 0.2])) == 1

    def test_active_nodes_relative_to_rest_pattern(self):
        net = ContextNetwork(3, rest_pattern=np.array([0.9, 0.5, 0.5]))
        net.categorize(np.array([0.9, 0.2, 0.52]))
        assert net.active_nodes(0).tolist() == [False, True, False]

    def test_pattern_out_of_range(self):
        with pytest.raises(ConfigError):
            ContextNetwork(2).categorize(np.array([1.5, 0.0]))

    def test_pattern_shape(self):
        with pytest.raises(SizeError):
            ContextNetwork(2).categorize(np.zeros(3))

    def test_invalid_vigilance(self):
        with pytest.raises(ConfigError):
            ContextNetwork(2, vigilance=0.0)


class TestHebbianUpdate:
    """Test suite for a single coupling update."""

    def test_correlated_activity_strengthens(self):
        cfg = HebbianConfig(rate=0.1, decay=0.0)
        updated = hebbian_update(np.zeros((2, 2)), np.ones(2), np.ones(2), cfg)
        assert updated[0, 1] == pytest.approx(0.1)
        assert updated[1, 0] == pytest.approx(0.1)

    def test_anticorrelated_activity_only_decays(self):
        cfg = HebbianConfig(rate=0.1, decay=0.01)
        start = np.array([[0.0, 0.5], [0.5, 0.0]])
        updated = hebbian_update(start, np.array([1.0, -1.0]), np.array([1.0, -1.0]), cfg)
        assert updated[0, 1] == pytest.approx(0.5 * 0.99)

    def test_one_sided_activity_forged_both_ways(self):
        cfg = HebbianConfig(rate=0.2, decay=0.0)
        updated = hebbian_update(np.zeros((2, 2)), np.array([1.0, 0.0]), np.array([0.0, 1.0]), cfg)
        assert np.array_equal(updated, updated.T)
        assert updated[0, 1] == pytest.approx(0.2)

    def test_category_gates_update(self):
        net = ContextNetwork(3)
        category = net.categorize(np.array([1.0, 1.0, 0.5]))
        cfg = HebbianConfig(rate=0.1, decay=0.0)
        updated = hebbian_update(np.zeros((3, 3)), np.ones(3), np.ones(3), cfg, category, net)
        assert updated[0, 1] == pytest.approx(0.1)
        assert updated[0, 2] == 0.0 and updated[1, 2] == 0.0

    def test_weights_stay_capped(self, rng):
        cfg = HebbianConfig(rate=1.0, weight_cap=0.5, decay=0.0)
        couplings = np.zeros((4, 4))
        for _ in range(50):
            couplings = hebbian_update(couplings, rng.uniform(-1, 1, 4), rng.uniform(-1, 1, 4), cfg)
        assert np.max(np.abs(couplings)) <= 0.5
        assert np.all(np.diag(couplings) == 0)
        assert np.array_equal(couplings, couplings.T)

    def test_activity_length_mismatch(self):
        with pytest.raises(SizeError):
            hebbian_update(np.zeros((3, 3)), np.ones(2), np.ones(3), HebbianConfig())


class TestUnsupervisedSession:
    """Test suite for a learning session."""

    @pytest.fixture
    def signals(self):
        return [SignalGenerator(seed=3).generate_signal(15)]

    def test_zero_epochs_keeps_graph(self, small_graph, signals):
        result = unsupervised_session(small_graph, signals, ContextNetwork(4), HebbianConfig(), epochs=0)
        assert result.graph is small_graph
        assert result.category_log == []

    def test_one_epoch_logs_every_step(self, small_graph, signals):
        result = unsupervised_session(small_graph, signals, ContextNetwork(4), HebbianConfig(), epochs=1)
        assert len(result.category_log) == 14
        assert [step for step, _ in result.category_log] == list(range(14))
        assert result.categories_seen >= 1

    def test_adapted_graph_is_valid(self, small_graph, signals):
        cfg = HebbianConfig(rate=0.5, weight_cap=0.8)
        result = unsupervised_session(small_graph, signals, ContextNetwork(4), cfg, epochs=2)
        couplings = result.graph.couplings
        assert np.array_equal(couplings, couplings.T)
        assert np.max(np.abs(couplings)) <= 0.8
        assert np.array_equal(result.graph.input_weights, small_graph.input_weights)

    def test_weight_frame_columns(self, small_graph, signals):
        result = unsupervised_session(small_graph, signals, ContextNetwork(4), HebbianConfig(), epochs=1)
        frame = result.weight_frame()
        assert list(frame.columns)[:3] == ['step', 'category', 'w_0_1']
        assert frame.shape == (14, 2 + 6)

    def test_cap_above_coupling_bound(self, small_graph, signals):
        with pytest.raises(ConfigError):
            unsupervised_session(small_graph, signals, ContextNetwork(4), HebbianConfig(weight_cap=2.0), 1)

    def test_dimension_mismatch(self, small_graph, signals):
        with pytest.raises(SizeError):
            unsupervised_session(small_graph, signals, ContextNetwork(3), HebbianConfig(), 1)

    def test_negative_epochs(self, small_graph, signals):
        with pytest.raises(ConfigError):
            unsupervised_session(small_graph, signals, ContextNetwork(4), HebbianConfig(), -1)

    def test_zero_signal_only_decays(self, small_graph):
        """A liquid left at rest is never active, so the couplings shrink by the decay alone."""
        signals = [SignalGenerator(seed=3).constant_signal([0.0], 20)]
        cfg = HebbianConfig()
        result = unsupervised_session(small_graph, signals, ContextNetwork(4), cfg, epochs=1)
        initial, final = small_graph.couplings, result.graph.couplings
        assert result.categories_seen == 1
        assert np.all(np.abs(final) <= np.abs(initial))
        assert np.sum(np.abs(final)) < np.sum(np.abs(initial))
        assert np.allclose(final, initial * (1.0 - cfg.decay) ** 19)

    def test_two_patterns_open_two_categories(self):
        graph = build_reservoir(4, 1, 1.0, seed=11, field_scale=2.0)
        signals = SignalGenerator(seed=1).pattern_stream([[0.8], [-0.8]], 30)
        net = ContextNetwork(4, vigilance=0.95)
        result = unsupervised_session(graph, signals, net, HebbianConfig(rate=0.2, decay=0.0), epochs=1)
        assert result.categories_seen >= 2
        assert result.category_log[28][1] != result.category_log[-1][1]
        assert np.all(result.graph.couplings >= graph.couplings)
        assert np.any(result.graph.couplings > graph.couplings + 1e-9)
