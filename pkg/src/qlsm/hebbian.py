"""
Unsupervised Learning Module

Hebbian reinforcement of reservoir couplings, gated by a fuzzy-ART
context network that discovers recurring liquid patterns.

Positive connections between input nodes are forged bidirectionally;
negative weights live only on the context links emanating from category
nodes.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .exceptions import ConfigError, SizeError
from .reservoir import DEFAULT_LEAK, DEFAULT_REST_STATE, InputSignal, QuantumLiquid, ReservoirGraph

logger = logging.getLogger(__name__)

ACTIVITY_THRESHOLD = 0.05


@dataclass(frozen=True)
class HebbianConfig:
    """Learning rate, weight cap and per-step multiplicative decay."""

    rate: float = 0.05
    weight_cap: float = 1.0
    decay: float = 0.001

    def __post_init__(self):
        if not 0.0 < self.rate <= 1.0:
            raise ConfigError(f"rate must be in (0, 1], got {self.rate}", field='rate')
        if not self.weight_cap > 0.0:
            raise ConfigError(f"weight_cap must be > 0, got {self.weight_cap}", field='weight_cap')
        if not 0.0 <= self.decay < 1.0:
            raise ConfigError(f"decay must be in [0, 1), got {self.decay}", field='decay')


class ContextNetwork:
    """
    Fuzzy-ART style categorizer over patterns in [0, 1]^n.

    With complement coding (the default) a pattern p is presented as
    [p, 1 - p], so every input has L1 norm n and a prototype can only
    resonate with patterns near it, not with every pattern it dominates.
    Prototypes are stored uncoded.

    A category's active nodes are those whose prototype entry lies at least
    ``activity_threshold`` away from ``rest_pattern``, the pattern of the
    liquid at rest.

    Args:
        dimension: Pattern length n
        vigilance: Minimum match for resonance, in (0, 1]
        learning_rate: Prototype update rate, in (0, 1]
        choice_alpha: Small constant of the category choice function
        complement_coding: Present [p, 1 - p] instead of p
        rest_pattern: Reference for node activity; 0.5 everywhere (<Z> = 0) by default
        activity_threshold: Minimum prototype deviation of an active node
    """

    def __init__(self, dimension: int, vigilance: float = 0.9, learning_rate: float = 0.5,
                 choice_alpha: float = 1e-3, complement_coding: bool = True,
                 rest_pattern: Optional[np.ndarray] = None,
                 activity_threshold: float = ACTIVITY_THRESHOLD):
        if dimension < 1:
            raise SizeError(f"dimension must be >= 1, got {dimension}")
        if not 0.0 < vigilance <= 1.0:
            raise ConfigError(f"vigilance must be in (0, 1], got {vigilance}", field='vigilance')
        if not 0.0 < learning_rate <= 1.0:
            raise ConfigError(f"learning_rate must be in (0, 1], got {learning_rate}", field='learning_rate')
        self.dimension = dimension
        self.vigilance = vigilance
        self.learning_rate = learning_rate
        self.choice_alpha = choice_alpha
        self.complement_coding = complement_coding
        self.activity_threshold = activity_threshold
        self.rest_pattern = np.full(dimension, 0.5)
        if rest_pattern is not None:
            self.set_rest_pattern(rest_pattern)
        self.categories: List[np.ndarray] = []
        self.context_links = np.zeros((0, dimension))

    @property
    def num_categories(self) -> int:
        return len(self.categories)

    def set_rest_pattern(self, pattern: np.ndarray):
        pattern = np.asarray(pattern, dtype=float)
        if pattern.shape != (self.dimension,):
            raise SizeError(f"Rest pattern must have length {self.dimension}, got shape {pattern.shape}")
        self.rest_pattern = np.clip(pattern, 0.0, 1.0)

    def _coded(self, pattern: np.ndarray) -> np.ndarray:
        return np.concatenate([pattern, 1.0 - pattern]) if self.complement_coding else pattern

    def match(self, pattern: np.ndarray, category: int) -> float:
        """|min(I, w)|_1 / |I|_1 for the (coded) input I and prototype w."""
        coded = self._coded(np.asarray(pattern, dtype=float))
        norm = float(np.sum(coded))
        if norm == 0.0:
            return 1.0
        return float(np.sum(np.minimum(coded, self._coded(self.categories[category])))) / norm

    def _choice(self, pattern: np.ndarray, category: int) -> float:
        prototype = self._coded(self.categories[category])
        overlap = float(np.sum(np.minimum(self._coded(pattern), prototype)))
        return overlap / (self.choice_alpha + float(np.sum(prototype)))

    def _refresh_links(self, category: int):
        prototype = self.categories[category]
        self.context_links[category] = prototype - prototype.mean()

    def categorize(self, pattern: np.ndarray) -> int:
        """
        Find the resonating category for a pattern, creating one if none
        passes the vigilance test, and move its prototype toward the pattern.

        Returns:
            Category index
        """
        pattern = np.asarray(pattern, dtype=float)
        if pattern.shape != (self.dimension,):
            raise SizeError(f"Pattern must have length {self.dimension}, got shape {pattern.shape}")
        if np.any(pattern < -1e-12) or np.any(pattern > 1.0 + 1e-12):
            raise ConfigError("Pattern entries must lie in [0, 1]", field='pattern')
        pattern = np.clip(pattern, 0.0, 1.0)

        ranked = sorted(range(self.num_categories), key=lambda j: (-self._choice(pattern, j), j))
        for j in ranked:
            if self.match(pattern, j) >= self.vigilance:
                self.categories[j] = (1.0 - self.learning_rate) * self.categories[j] + self.learning_rate * pattern
                self._refresh_links(j)
                return j

        self.categories.append(pattern.copy())
        self.context_links = np.vstack([self.context_links, np.zeros(self.dimension)])
        new = self.num_categories - 1
        self._refresh_links(new)
        logger.debug(f"Created category {new}")
        return new

    def active_nodes(self, category: int) -> np.ndarray:
        """Nodes whose prototype entry deviates from the rest pattern by at least the threshold."""
        return np.abs(self.categories[category] - self.rest_pattern) >= self.activity_threshold


def art_categorize(net: ContextNetwork, pattern: np.ndarray) -> int:
    return net.categorize(pattern)


def hebbian_update(couplings: np.ndarray, pre_activity: np.ndarray, post_activity: np.ndarray,
                   cfg: HebbianConfig, category: Optional[int] = None,
                   net: Optional[ContextNetwork] = None) -> np.ndarray:
    """
    One Hebbian step on a symmetric coupling matrix.

    dw_ij = rate * pre_i * post_j; the positive part is forged in both
    directions (max of dw_ij and dw_ji), restricted to node pairs active
    under ``category`` when a context network is given. Existing weights
    decay multiplicatively and everything is clipped to the cap.

    Returns:
        New coupling matrix
    """
    couplings = np.asarray(couplings, dtype=float)
    pre = np.asarray(pre_activity, dtype=float)
    post = np.asarray(post_activity, dtype=float)
    n = couplings.shape[0]
    if pre.shape != (n,) or post.shape != (n,):
        raise SizeError(f"Activities must have length {n}")

    delta = cfg.rate * np.outer(pre, post)
    forged = np.maximum(np.maximum(delta, delta.T), 0.0)
    if net is not None and category is not None:
        active = net.active_nodes(category)
        forged = forged * np.outer(active, active)
    np.fill_diagonal(forged, 0.0)

    updated = (1.0 - cfg.decay) * couplings + forged
    updated = np.clip(updated, -cfg.weight_cap, cfg.weight_cap)
    np.fill_diagonal(updated, 0.0)
    return updated


@dataclass
class SessionResult:
    """Adapted graph plus per-step category log and weight trajectory."""

    graph: ReservoirGraph
    category_log: List[Tuple[int, int]] = field(default_factory=list)
    weight_rows: List[np.ndarray] = field(default_factory=list)

    def weight_frame(self) -> pd.DataFrame:
        """Columns step, category, w_i_j for every node pair i < j."""
        n = self.graph.num_nodes
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        rows = []
        for (step, category), weights in zip(self.category_log, self.weight_rows):
            row = {'step': step, 'category': category}
            row.update({f"w_{i}_{j}": weights[i, j] for i, j in pairs})
            rows.append(row)
        return pd.DataFrame(rows, columns=['step', 'category'] + [f"w_{i}_{j}" for i, j in pairs])

    @property
    def categories_seen(self) -> int:
        return len({c for _, c in self.category_log})


def unsupervised_session(graph: ReservoirGraph, signals: Sequence[InputSignal], net: ContextNetwork,
                         cfg: HebbianConfig, epochs: int, leak: float = DEFAULT_LEAK,
                         rest_state: str = DEFAULT_REST_STATE) -> SessionResult:
    """
    Drive the liquid with each signal in turn and adapt its couplings.

    Every step's liquid expectations z are rescaled to (z + 1) / 2 and
    categorized by the context network, whose rest pattern is set to the
    rescaled rest-state expectations. Node activity is the deviation
    z - z_rest from the rest state; the coupling update uses the previous
    step's activity as presynaptic and the current one as postsynaptic,
    gated by the category. A liquid left at rest therefore only decays.
    The liquid is re-run with the current couplings for every signal.

    Args:
        graph: Starting reservoir
        signals: Input signals in U
        net: Context network (mutated: it keeps the discovered categories)
        cfg: Hebbian parameters; weight_cap must not exceed 1
        epochs: Passes over ``signals``

    Returns:
        SessionResult with the adapted graph
    """
    if epochs < 0:
        raise ConfigError(f"epochs must be >= 0, got {epochs}", field='epochs')
    if cfg.weight_cap > 1.0:
        raise ConfigError("weight_cap must not exceed the reservoir's coupling bound of 1", field='weight_cap')
    if net.dimension != graph.num_nodes:
        raise SizeError(f"Context network dimension {net.dimension} != {graph.num_nodes} nodes")

    result = SessionResult(graph)
    couplings = np.array(graph.couplings)
    rest = QuantumLiquid(graph, leak, rest_state).rest_expectations
    net.set_rest_pattern((rest + 1.0) / 2.0)
    step = 0
    for epoch in range(epochs):
        for signal in signals:
            liquid = QuantumLiquid(graph.with_couplings(couplings), leak, rest_state)
            _, z = liquid.run_array(signal)
            activity = z - rest
            for k in range(1, z.shape[0]):
                category = net.categorize((z[k] + 1.0) / 2.0)
                couplings = hebbian_update(couplings, activity[k - 1], activity[k], cfg, category, net)
                result.category_log.append((step, category))
                result.weight_rows.append(couplings.copy())
                step += 1
        logger.info(f"Epoch {epoch + 1}/{epochs}: {net.num_categories} categories, "
                    f"max |w| = {np.max(np.abs(couplings)):.4f}")

    result.graph = graph.with_couplings(couplings) if epochs > 0 else graph
    return result
