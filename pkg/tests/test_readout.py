"""
Unit tests for the ridge readout
"""

import pytest
import numpy as np

from qlsm.exceptions import ConfigError, PreconditionError, SizeError, SolverError
from qlsm.filters import default_filter_bank
from qlsm.readout import (
    ReadoutModel,
    TrainingSet,
    approximation_report,
    build_recall_dataset,
    constant_mean_baseline,
    nrmse,
    predict,
    predict_batch,
    regularized_objective,
    temporal_split,
    train_readout,
    train_readouts,
)
from qlsm.reservoir import QuantumLiquid


@pytest.fixture
def linear_data(rng):
    """Noise-free affine targets 2 + x . (1, -2, 0.5)."""
    inputs = rng.normal(size=(50, 3))
    targets = 2.0 + inputs @ np.array([1.0, -2.0, 0.5])
    return TrainingSet(inputs, targets)


class TestTrainingSet:
    """Test suite for training data containers."""

    def test_length_mismatch(self):
        with pytest.raises(SizeError):
            TrainingSet(np.zeros((3, 2)), np.zeros(4))

    def test_empty_split(self):
        with pytest.raises(PreconditionError):
            TrainingSet(np.zeros((0, 2)), np.zeros(0), 'test')

    def test_vector_inputs_become_column(self):
        data = TrainingSet(np.arange(4.0), np.arange(4.0))
        assert data.inputs.shape == (4, 1)

    def test_temporal_split_keeps_order(self):
        x = np.arange(10.0)[:, None]
        train, test = temporal_split(x, np.arange(10.0), 0.8)
        assert len(train) == 8 and len(test) == 2
        assert train.targets[-1] == 7.0
        assert test.split == 'test'

    def test_temporal_split_fraction_range(self):
        with pytest.raises(ConfigError):
            temporal_split(np.zeros((10, 1)), np.zeros(10), 1.0)


class TestTrainReadout:
    """Test suite for ridge training."""

    def test_recovers_affine_map(self, linear_data):
        model = train_readout(linear_data, regularization=0.0)
        assert np.allclose(model.coefficients, [1.0, -2.0, 0.5], atol=1e-9)
        assert model.intercept == pytest.approx(2.0, abs=1e-9)

    def test_regularization_shrinks_coefficients(self, linear_data):
        loose = train_readout(linear_data, regularization=1e-6)
        tight = train_readout(linear_data, regularization=10.0)
        assert np.linalg.norm(tight.coefficients) < np.linalg.norm(loose.coefficients)

    def test_solution_minimizes_objective(self, rng):
        data = TrainingSet(rng.normal(size=(30, 2)), rng.normal(size=30))
        model = train_readout(data, regularization=0.1)
        best = regularized_objective(model, data)
        for _ in range(5):
            nudged = ReadoutModel(model.coefficients + rng.normal(scale=0.05, size=2),
                                  model.intercept + rng.normal(scale=0.05), model.regularization)
            assert regularized_objective(nudged, data) >= best - 1e-12

    def test_singular_without_regularization(self):
        x = np.column_stack([np.arange(6.0), np.arange(6.0)])
        with pytest.raises(SolverError):
            train_readout(TrainingSet(x, np.arange(6.0)), regularization=0.0)

    def test_duplicate_features_fine_with_regularization(self):
        x = np.column_stack([np.arange(6.0), np.arange(6.0)])
        model = train_readout(TrainingSet(x, np.arange(6.0)), regularization=1e-3)
        assert model.coefficients[0] == pytest.approx(model.coefficients[1])

    def test_negative_regularization(self, linear_data):
        with pytest.raises(ConfigError):
            train_readout(linear_data, regularization=-1.0)

    def test_single_example(self):
        with pytest.raises(PreconditionError):
            train_readout(TrainingSet(np.ones((1, 2)), np.ones(1)))

    def test_several_targets(self, linear_data):
        models = train_readouts(linear_data.inputs, {'a': linear_data.targets, 'b': -linear_data.targets})
        assert np.allclose(models['a'].coefficients, -models['b'].coefficients)

    def test_json_roundtrip(self, linear_data, tmp_path):
        model = train_readout(linear_data, filter_bank_hash='abc')
        path = tmp_path / 'readout.json'
        model.save_json(str(path))
        loaded = ReadoutModel.load_json(str(path))
        assert np.allclose(loaded.coefficients, model.coefficients)
        assert loaded.filter_bank_hash == 'abc'


class TestPrediction:
    """Test suite for evaluation and reports."""

    def test_predict_matches_batch(self, linear_data):
        model = train_readout(linear_data)
        assert predict(model, linear_data.inputs[3]) == pytest.approx(predict_batch(model, linear_data.inputs)[3])

    def test_predict_size_mismatch(self, linear_data):
        model = train_readout(linear_data)
        with pytest.raises(SizeError):
            predict(model, np.zeros(2))

    def test_exact_model_passes(self, linear_data):
        model = train_readout(linear_data, regularization=0.0)
        report = approximation_report(model, linear_data, rho=1e-6)
        assert report.passed
        assert report.witness_index is None
        assert report.num_points == 50

    def test_failure_names_witness(self, linear_data):
        model = ReadoutModel(np.zeros(3), 0.0, 0.0)
        report = approximation_report(model, linear_data, rho=0.1)
        assert not report.passed
        worst = int(np.argmax(np.abs(linear_data.targets)))
        assert report.witness_index == worst
        assert np.array_equal(report.witness_input, linear_data.inputs[worst])

    def test_baseline_nrmse_is_one_on_own_split(self, linear_data):
        assert constant_mean_baseline(linear_data, linear_data) == pytest.approx(1.0)

    def test_improvement_against_baseline(self, linear_data):
        model = train_readout(linear_data, regularization=0.0)
        report = approximation_report(model, linear_data, rho=1.0, train=linear_data)
        assert report.improvement == pytest.approx(1.0, abs=1e-6)

    def test_nrmse_of_perfect_prediction(self):
        y = np.array([1.0, 2.0, 3.0])
        assert nrmse(y, y) == 0.0


class TestRecallDataset:
    """Test suite for the delayed-recall task."""

    def test_targets_are_delayed_inputs(self, small_graph, smooth_signal):
        _, z = QuantumLiquid(small_graph).run_array(smooth_signal)
        bank = default_filter_bank(4, max_lag=3)
        inputs, targets = build_recall_dataset(z, bank, smooth_signal, delay=2)
        assert inputs.shape == (smooth_signal.num_samples - 3, bank.output_size)
        assert np.allclose(targets, smooth_signal.samples[1:-2, 0])

    def test_delay_longer_than_lags(self, small_graph, smooth_signal):
        _, z = QuantumLiquid(small_graph).run_array(smooth_signal)
        inputs, targets = build_recall_dataset(z, default_filter_bank(4, max_lag=1), smooth_signal, delay=5)
        assert len(targets) == smooth_signal.num_samples - 5
        assert targets[0] == smooth_signal.samples[0, 0]

    def test_negative_delay(self, small_graph, smooth_signal):
        _, z = QuantumLiquid(small_graph).run_array(smooth_signal)
        with pytest.raises(ConfigError):
            build_recall_dataset(z, default_filter_bank(4), smooth_signal, delay=-1)

    def test_channel_out_of_range(self, small_graph, smooth_signal):
        _, z = QuantumLiquid(small_graph).run_array(smooth_signal)
        with pytest.raises(ConfigError):
            build_recall_dataset(z, default_filter_bank(4), smooth_signal, delay=1, channel=1)
