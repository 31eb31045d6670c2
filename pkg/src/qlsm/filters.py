"""
Filter Bank Module

Basis filters reading a liquid trajectory: each filter picks a subset of
nodes and a list of time lags and returns the Z expectations found there.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from .exceptions import ConfigError, QubitIndexError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FilterSpec:
    """Descriptor of one basis filter."""

    nodes: Tuple[int, ...]
    lags: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'nodes', tuple(int(i) for i in self.nodes))
        object.__setattr__(self, 'lags', tuple(int(lag) for lag in self.lags))
        if not self.nodes or not self.lags:
            raise ConfigError("Filter needs at least one node and one lag")
        if min(self.lags) < 0:
            raise ConfigError(f"Filter lags must be >= 0, got {self.lags}")

    @property
    def output_size(self) -> int:
        return len(self.nodes) * len(self.lags)

    @property
    def max_lag(self) -> int:
        return max(self.lags)

    def describe(self, position: int) -> Tuple[int, int]:
        """(node, lag) read by output component ``position`` of this filter."""
        return self.nodes[position // len(self.lags)], self.lags[position % len(self.lags)]


class FilterBank:
    """
    Ordered collection of basis filters.

    The bank's output is the concatenation of its filters' outputs, in
    declaration order; within a filter the layout is node-major, lag-minor.
    """

    def __init__(self, filters: Sequence[FilterSpec]):
        if not filters:
            raise ConfigError("Filter bank is empty")
        self.filters: List[FilterSpec] = list(filters)

    @property
    def output_size(self) -> int:
        return sum(f.output_size for f in self.filters)

    @property
    def max_lag(self) -> int:
        return max(f.max_lag for f in self.filters)

    def validate_nodes(self, num_nodes: int):
        for k, spec in enumerate(self.filters):
            bad = [i for i in spec.nodes if not 0 <= i < num_nodes]
            if bad:
                raise QubitIndexError(f"Filter {k} references nodes {bad} outside 0..{num_nodes - 1}")

    def apply_filter(self, index: int, trajectory: np.ndarray, t_index: int = -1) -> np.ndarray:
        """
        Output of a single filter at one time index.

        Args:
            index: Filter position in the bank
            trajectory: Array (num_times, num_nodes) of Z expectations
            t_index: Time index the filter is evaluated at (default: last)

        Returns:
            Vector of length spec.output_size
        """
        trajectory = np.asarray(trajectory, dtype=float)
        spec = self.filters[index]
        t = t_index if t_index >= 0 else trajectory.shape[0] + t_index
        if spec.max_lag > t:
            raise QubitIndexError(
                f"Filter {index} lag {spec.max_lag} exceeds available history ({t + 1} samples)"
            )
        nodes = np.array(spec.nodes)
        lags = np.array(spec.lags)
        return trajectory[t - lags[None, :], nodes[:, None]].reshape(-1)

    def apply(self, trajectory: np.ndarray, t_index: int = -1) -> np.ndarray:
        self.validate_nodes(np.asarray(trajectory).shape[1])
        return np.concatenate([self.apply_filter(k, trajectory, t_index) for k in range(len(self.filters))])

    def feature_matrix(self, trajectory: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Apply the bank at every time index with complete lag history.

        Returns:
            (time_indices, features) with features of shape
            (len(time_indices), output_size)
        """
        trajectory = np.asarray(trajectory, dtype=float)
        start = self.max_lag
        if start >= trajectory.shape[0]:
            raise QubitIndexError(f"Trajectory of {trajectory.shape[0]} samples is shorter than max lag {start}")
        indices = np.arange(start, trajectory.shape[0])
        features = np.vstack([self.apply(trajectory, int(t)) for t in indices])
        return indices, features

    def locate(self, position: int) -> Tuple[int, int, int]:
        """Map a bank output position to (filter index, node, lag)."""
        offset = 0
        for k, spec in enumerate(self.filters):
            if position < offset + spec.output_size:
                node, lag = spec.describe(position - offset)
                return k, node, lag
            offset += spec.output_size
        raise QubitIndexError(f"Output position {position} beyond bank size {self.output_size}")

    def to_dict(self) -> List[Dict[str, Any]]:
        return [{'nodes': list(f.nodes), 'lags': list(f.lags)} for f in self.filters]

    @classmethod
    def from_dict(cls, items: Sequence[Dict[str, Any]]) -> 'FilterBank':
        return cls([FilterSpec(tuple(item['nodes']), tuple(item['lags'])) for item in items])

    def descriptor_hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


def default_filter_bank(num_nodes: int, max_lag: int = 5) -> FilterBank:
    """One filter per node reading lags 0..max_lag."""
    if max_lag < 0:
        raise ConfigError(f"max_lag must be >= 0, got {max_lag}", field='max_lag')
    return FilterBank([FilterSpec((i,), tuple(range(max_lag + 1))) for i in range(num_nodes)])


def apply_filters(bank: FilterBank, trajectory) -> np.ndarray:
    """
    Evaluate the bank on the most recent sample of a trajectory.

    Args:
        bank: Filter bank
        trajectory: Array (num_times, num_nodes) or a list of LiquidState

    Returns:
        Concatenated filter outputs
    """
    return bank.apply(as_array(trajectory))


def as_array(trajectory) -> np.ndarray:
    if isinstance(trajectory, np.ndarray):
        return trajectory
    return np.vstack([state.node_expectations for state in trajectory])
