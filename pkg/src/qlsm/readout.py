"""
Readout Module

Affine readouts on filter-bank outputs, trained by ridge regression via
the normal equations, and the reports comparing them with a target.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
import scipy.linalg
from sklearn.metrics import mean_squared_error

from .exceptions import ConfigError, PreconditionError, SizeError, SolverError
from .filters import FilterBank
from .reservoir import InputSignal

logger = logging.getLogger(__name__)

DEFAULT_REGULARIZATION = 1e-6
DEFAULT_TRAIN_FRACTION = 0.8


@dataclass(frozen=True)
class ReadoutModel:
    """Linear coefficient vector plus intercept."""

    coefficients: np.ndarray
    intercept: float
    regularization: float
    filter_bank_hash: Optional[str] = None

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=float).reshape(-1)
        coefficients.setflags(write=False)
        object.__setattr__(self, 'coefficients', coefficients)

    @property
    def input_size(self) -> int:
        return self.coefficients.shape[0]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'coefficients': self.coefficients.tolist(),
            'intercept': self.intercept,
            'regularization': self.regularization,
            'filter_bank_hash': self.filter_bank_hash,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ReadoutModel':
        return cls(np.array(data['coefficients']), float(data['intercept']),
                   float(data['regularization']), data.get('filter_bank_hash'))

    def save_json(self, path: str):
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load_json(cls, path: str) -> 'ReadoutModel':
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class TrainingSet:
    """Filter-output vectors with their targets, tagged by split."""

    inputs: np.ndarray
    targets: np.ndarray
    split: str = 'train'

    def __post_init__(self):
        inputs = np.array(self.inputs, dtype=float)
        if inputs.ndim == 1:
            inputs = inputs[:, None]
        targets = np.array(self.targets, dtype=float).reshape(-1)
        if inputs.shape[0] != targets.shape[0]:
            raise SizeError(f"{inputs.shape[0]} inputs but {targets.shape[0]} targets")
        if inputs.shape[0] == 0:
            raise PreconditionError(f"{self.split} split is empty")
        object.__setattr__(self, 'inputs', inputs)
        object.__setattr__(self, 'targets', targets)

    def __len__(self) -> int:
        return self.targets.shape[0]


@dataclass
class ApproximationReport:
    """Sup-norm error of a readout over a finite test set."""

    sup_error: float
    rho: float
    passed: bool
    num_points: int
    witness_index: Optional[int]
    witness_input: Optional[np.ndarray]
    nrmse: float
    baseline_nrmse: Optional[float] = None

    @property
    def improvement(self) -> Optional[float]:
        """Relative NRMSE reduction against the constant-mean baseline."""
        if self.baseline_nrmse is None or self.baseline_nrmse == 0:
            return None
        return 1.0 - self.nrmse / self.baseline_nrmse


def temporal_split(inputs: np.ndarray, targets: np.ndarray,
                   train_fraction: float = DEFAULT_TRAIN_FRACTION) -> Tuple[TrainingSet, TrainingSet]:
    """Split by time order, earliest samples for training."""
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError(f"train_fraction must be in (0, 1), got {train_fraction}", field='train_fraction')
    cut = int(round(len(targets) * train_fraction))
    if cut < 2 or cut >= len(targets):
        raise PreconditionError(f"Cannot split {len(targets)} samples at fraction {train_fraction}")
    return (TrainingSet(inputs[:cut], targets[:cut], 'train'),
            TrainingSet(inputs[cut:], targets[cut:], 'test'))


def train_readout(data: TrainingSet, regularization: float = DEFAULT_REGULARIZATION,
                  filter_bank_hash: Optional[str] = None) -> ReadoutModel:
    """
    Minimize mean squared error + regularization * ||coefficients||^2.

    The intercept is not penalized; it is recovered from the centered fit.

    Args:
        data: Training split with at least two examples
        regularization: Ridge penalty >= 0

    Returns:
        ReadoutModel
    """
    if regularization < 0:
        raise ConfigError(f"regularization must be >= 0, got {regularization}", field='regularization')
    if len(data) < 2:
        raise PreconditionError(f"Need at least 2 training examples, got {len(data)}")

    x_mean = data.inputs.mean(axis=0)
    y_mean = float(data.targets.mean())
    xc = data.inputs - x_mean
    yc = data.targets - y_mean
    count = len(data)

    gram = xc.T @ xc / count + regularization * np.eye(xc.shape[1])
    rhs = xc.T @ yc / count
    if regularization == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
        raise SolverError("Normal equations are singular; use regularization > 0")
    try:
        coefficients = scipy.linalg.solve(gram, rhs, assume_a='pos')
    except np.linalg.LinAlgError as e:
        raise SolverError(f"Normal equations could not be solved ({e}); use regularization > 0") from e

    intercept = y_mean - float(x_mean @ coefficients)
    logger.debug(f"Trained readout on {count} examples, {xc.shape[1]} features, reg={regularization:g}")
    return ReadoutModel(coefficients, intercept, regularization, filter_bank_hash)


def train_readouts(inputs: np.ndarray, targets: Mapping[str, np.ndarray],
                   regularization: float = DEFAULT_REGULARIZATION,
                   filter_bank_hash: Optional[str] = None) -> Dict[str, ReadoutModel]:
    """Train several readouts on the same liquid features at once."""
    return {name: train_readout(TrainingSet(inputs, y), regularization, filter_bank_hash)
            for name, y in targets.items()}


def predict(model: ReadoutModel, x: np.ndarray) -> float:
    """intercept + coefficients . x"""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != model.input_size:
        raise SizeError(f"Readout expects {model.input_size} inputs, got {x.shape[0]}")
    return float(model.intercept + model.coefficients @ x)


def predict_batch(model: ReadoutModel, inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[:, None]
    if inputs.shape[1] != model.input_size:
        raise SizeError(f"Readout expects {model.input_size} inputs, got {inputs.shape[1]}")
    return model.intercept + inputs @ model.coefficients


def regularized_objective(model: ReadoutModel, data: TrainingSet) -> float:
    residual = data.targets - predict_batch(model, data.inputs)
    return float(np.mean(residual ** 2) + model.regularization * model.coefficients @ model.coefficients)


def nrmse(targets: np.ndarray, predictions: np.ndarray) -> float:
    """Root mean squared error normalized by the target standard deviation."""
    targets = np.asarray(targets, dtype=float)
    rmse = float(np.sqrt(mean_squared_error(targets, predictions)))
    scale = float(np.std(targets))
    return rmse / scale if scale > 0 else rmse


def constant_mean_baseline(train: TrainingSet, evaluate_on: TrainingSet) -> float:
    """NRMSE of predicting the training mean everywhere."""
    return nrmse(evaluate_on.targets, np.full(len(evaluate_on), train.targets.mean()))


def approximation_report(model: ReadoutModel, test: TrainingSet, rho: float,
                         train: Optional[TrainingSet] = None) -> ApproximationReport:
    """
    Compare model outputs against target values on the test inputs.

    Only the finite test set is examined; passing says nothing about
    points outside it.

    Args:
        model: Trained readout
        test: Test inputs with target values h(x)
        rho: Tolerance on the sup-norm error
        train: Training split, used for the constant-mean baseline

    Returns:
        ApproximationReport naming the worst test point
    """
    if len(test) == 0:
        raise PreconditionError("Test split is empty")
    predictions = predict_batch(model, test.inputs)
    errors = np.abs(predictions - test.targets)
    worst = int(np.argmax(errors))
    sup_error = float(errors[worst])
    passed = sup_error <= rho
    baseline = constant_mean_baseline(train, test) if train is not None else None
    return ApproximationReport(
        sup_error=sup_error,
        rho=rho,
        passed=passed,
        num_points=len(test),
        witness_index=None if passed else worst,
        witness_input=None if passed else test.inputs[worst].copy(),
        nrmse=nrmse(test.targets, predictions),
        baseline_nrmse=baseline,
    )


def build_recall_dataset(trajectory: np.ndarray, bank: FilterBank, signal: InputSignal,
                         delay: int, channel: int = 0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Delayed-recall task: at time t, reproduce input ``channel`` at t - delay.

    Args:
        trajectory: Liquid expectations (num_times, num_nodes)
        bank: Filter bank producing the readout inputs
        signal: Signal that drove the liquid
        delay: Recall delay in samples
        channel: Input channel to recall

    Returns:
        (inputs, targets) over time indices with full lag history and t >= delay
    """
    if delay < 0:
        raise ConfigError(f"delay must be >= 0, got {delay}", field='delay')
    if not 0 <= channel < signal.channels:
        raise ConfigError(f"channel {channel} outside 0..{signal.channels - 1}", field='channel')
    indices, features = bank.feature_matrix(trajectory)
    keep = indices >= delay
    indices, features = indices[keep], features[keep]
    targets = signal.samples[indices - delay, channel]
    return features, targets
