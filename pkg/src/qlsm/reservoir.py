"""
Quantum Liquid Module

A randomly coupled qubit reservoir driven by input signals:

    H(t) = sum_{i<j} J_ij Z_i Z_j + sum_i field_scale * (W u(t))_i X_i

Liquid states are the nodes' Z expectations. After every step the state
is mixed toward the rest state with leak rate lambda; the mixture is
evaluated exactly as a weighted set of pure state-vector branches, one
restarted at each step, so only expectations of the mixture are formed.

The default rest state is the +Y product state. Conjugation by the global
Y string maps H(u) to H(-u) and Z to -Z while fixing that state, so
z(-u) = -z(u): the liquid sees the sign of its input. From |0...0> the
global Z string gives z(-u) = z(u) instead, and from the uniform (+X)
state every <Z> stays 0.

Also provides the empirical checks of the input domain U, pointwise
separation and fading memory.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from .exceptions import ConfigError, DomainError, InternalError, PreconditionError, SizeError
from .filters import FilterBank
from .statevec import basis_state, bit_matrix, circular_superposition, uniform_superposition

logger = logging.getLogger(__name__)

MAX_NODES = 10
DEFAULT_DT = 0.05
DEFAULT_BOUND = 1.0
DEFAULT_LIPSCHITZ = 10.0
DEFAULT_LEAK = 0.1
PRUNE_WEIGHT = 1e-15
REST_STATES = ('circular', 'zero', 'uniform')
DEFAULT_REST_STATE = 'circular'


@dataclass(frozen=True)
class InputSignal:
    """
    Multichannel input sampled on a uniform time grid.

    Attributes:
        samples: Array (num_samples, channels)
        dt: Sampling interval
        bound: K, the amplitude bound of the input domain
        lipschitz: K', the Lipschitz constant of the input domain
    """

    samples: np.ndarray
    dt: float = DEFAULT_DT
    bound: float = DEFAULT_BOUND
    lipschitz: float = DEFAULT_LIPSCHITZ

    def __post_init__(self):
        samples = np.array(self.samples, dtype=float)
        if samples.ndim == 1:
            samples = samples[:, None]
        if samples.ndim != 2 or samples.shape[0] < 1 or samples.shape[1] < 1:
            raise SizeError(f"Signal samples must be (num_samples, channels), got {samples.shape}")
        if not self.dt > 0 or not self.bound > 0 or not self.lipschitz > 0:
            raise ConfigError(f"dt, K and K' must be positive (dt={self.dt}, K={self.bound}, K'={self.lipschitz})")
        samples.setflags(write=False)
        object.__setattr__(self, 'samples', samples)

    @property
    def channels(self) -> int:
        return self.samples.shape[1]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.num_samples) * self.dt

    @property
    def duration(self) -> float:
        return (self.num_samples - 1) * self.dt

    def with_samples(self, samples: np.ndarray) -> 'InputSignal':
        return InputSignal(samples, self.dt, self.bound, self.lipschitz)


@dataclass(frozen=True)
class Violation:
    index: int
    channel: int
    kind: str
    value: float


@dataclass
class ValidityReport:
    """Outcome of checking a signal against the input domain U."""

    valid: bool
    violations: List[Violation] = field(default_factory=list)

    @property
    def first_index(self) -> Optional[int]:
        return min(v.index for v in self.violations) if self.violations else None

    def describe(self) -> str:
        if self.valid:
            return "signal lies in U"
        first = min(self.violations, key=lambda v: (v.index, v.channel))
        return (f"{len(self.violations)} violation(s); first at sample {first.index} "
                f"channel {first.channel}: {first.kind} ({first.value:.6g})")


def validate_input(u: InputSignal) -> ValidityReport:
    """
    Check the amplitude bound |u| <= K and the discrete Lipschitz bound
    |u(t_{i+1}) - u(t_i)| <= K' dt on every channel.
    """
    violations = []
    over = np.argwhere(np.abs(u.samples) > u.bound + 1e-12)
    for index, channel in over:
        violations.append(Violation(int(index), int(channel), 'bound', float(u.samples[index, channel])))

    if u.num_samples > 1:
        jumps = np.abs(np.diff(u.samples, axis=0))
        steep = np.argwhere(jumps > u.lipschitz * u.dt + 1e-12)
        for index, channel in steep:
            violations.append(Violation(int(index) + 1, int(channel), 'lipschitz', float(jumps[index, channel])))

    violations.sort(key=lambda v: (v.index, v.channel))
    return ValidityReport(not violations, violations)


def require_valid(u: InputSignal, name: str = 'signal'):
    report = validate_input(u)
    if not report.valid:
        raise DomainError(f"{name} is outside the input domain: {report.describe()}", index=report.first_index)


@dataclass(frozen=True)
class ReservoirGraph:
    """Random coupling topology, input weights and drive scale of the liquid."""

    couplings: np.ndarray
    input_weights: np.ndarray
    field_scale: float = 1.0
    seed: Optional[int] = None
    connectivity_fraction: Optional[float] = None

    def __post_init__(self):
        couplings = np.array(self.couplings, dtype=float)
        weights = np.array(self.input_weights, dtype=float)
        n = couplings.shape[0]
        if couplings.shape != (n, n) or not 1 <= n <= MAX_NODES:
            raise SizeError(f"Couplings must be square with 1..{MAX_NODES} nodes, got {couplings.shape}")
        if weights.ndim != 2 or weights.shape[0] != n:
            raise SizeError(f"Input weights must be ({n}, channels), got {weights.shape}")
        if not np.allclose(couplings, couplings.T, atol=1e-12):
            raise DomainError("Couplings must be symmetric")
        if np.any(np.diag(couplings) != 0):
            raise DomainError("Couplings must have zero diagonal")
        if np.max(np.abs(couplings), initial=0.0) > 1.0 + 1e-12:
            raise DomainError("Coupling magnitudes must not exceed 1")
        couplings.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, 'couplings', couplings)
        object.__setattr__(self, 'input_weights', weights)

    @property
    def num_nodes(self) -> int:
        return self.couplings.shape[0]

    @property
    def num_channels(self) -> int:
        return self.input_weights.shape[1]

    @property
    def edge_count(self) -> int:
        return int(np.count_nonzero(np.triu(self.couplings, k=1)))

    @property
    def sparsity(self) -> float:
        """Fraction of possible edges present."""
        pairs = self.num_nodes * (self.num_nodes - 1) // 2
        return self.edge_count / pairs if pairs else 0.0

    def with_couplings(self, couplings: np.ndarray) -> 'ReservoirGraph':
        return ReservoirGraph(couplings, self.input_weights, self.field_scale, self.seed, self.connectivity_fraction)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'seed': self.seed,
            'connectivity_fraction': self.connectivity_fraction,
            'field_scale': self.field_scale,
            'couplings': self.couplings.tolist(),
            'input_weights': self.input_weights.tolist(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ReservoirGraph':
        return cls(
            couplings=np.array(data['couplings']),
            input_weights=np.array(data['input_weights']),
            field_scale=data.get('field_scale', 1.0),
            seed=data.get('seed'),
            connectivity_fraction=data.get('connectivity_fraction'),
        )

    def save_json(self, path: str):
        out = Path(path)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, 'w') as f:
            json.dump(self.to_dict(), f, indent=2)

    @classmethod
    def load_json(cls, path: str) -> 'ReservoirGraph':
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))


@dataclass(frozen=True)
class LiquidState:
    t: float
    node_expectations: np.ndarray


def build_reservoir(n: int, m: int, connectivity_fraction: float, seed: int,
                    field_scale: float = 1.0) -> ReservoirGraph:
    """
    Randomly wire n qubit nodes.

    Every node pair is coupled independently with probability
    ``connectivity_fraction``; coupling magnitudes are uniform in
    [0.1, 1] with random sign. Input weights are uniform in [-1, 1].

    Args:
        n: Number of nodes (1..MAX_NODES)
        m: Number of input channels
        connectivity_fraction: Edge probability in (0, 1]
        seed: Seed fixing the whole graph
        field_scale: Global scale of the input drive

    Returns:
        ReservoirGraph
    """
    if not 1 <= n <= MAX_NODES:
        raise SizeError(f"Reservoir supports 1..{MAX_NODES} nodes, got {n}")
    if m < 1:
        raise SizeError(f"Reservoir needs at least one input channel, got {m}")
    if not 0.0 < connectivity_fraction <= 1.0:
        raise ConfigError(f"connectivity_fraction must be in (0, 1], got {connectivity_fraction}",
                          field='connectivity_fraction')

    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < connectivity_fraction, k=1)
    magnitudes = rng.uniform(0.1, 1.0, size=(n, n))
    signs = rng.choice([-1.0, 1.0], size=(n, n))
    couplings = np.where(upper, magnitudes * signs, 0.0)
    couplings = couplings + couplings.T
    input_weights = rng.uniform(-1.0, 1.0, size=(n, m))

    graph = ReservoirGraph(couplings, input_weights, field_scale, seed, connectivity_fraction)
    logger.debug(f"Built reservoir: {n} nodes, {graph.edge_count} edges, seed={seed}")
    return graph


class QuantumLiquid:
    """
    Exact state-vector simulator of the driven reservoir.

    Args:
        graph: Reservoir wiring
        leak: Mixing weight toward the rest state per step, in [0, 1]
        rest_state: 'circular' (+Y on every node), 'zero' (|0...0>) or
                    'uniform' (+X on every node); also the initial state
                    of every run
    """

    _REST_BUILDERS = {
        'circular': circular_superposition,
        'zero': lambda n: basis_state(n, 0),
        'uniform': uniform_superposition,
    }

    def __init__(self, graph: ReservoirGraph, leak: float = DEFAULT_LEAK, rest_state: str = DEFAULT_REST_STATE):
        if not 0.0 <= leak <= 1.0:
            raise ConfigError(f"leak must be in [0, 1], got {leak}", field='leak')
        if rest_state not in REST_STATES:
            raise ConfigError(f"rest_state must be one of {REST_STATES}, got {rest_state!r}", field='rest_state')
        self.graph = graph
        self.leak = leak
        self.rest_state = rest_state

        n = graph.num_nodes
        self.dimension = 2 ** n
        self._signs = 1 - 2 * bit_matrix(n)
        zz = 0.5 * np.einsum('xi,ij,xj->x', self._signs, graph.couplings, self._signs)
        self._zz_energies = zz
        self._rows = np.arange(self.dimension)
        self._rest = np.array(self._REST_BUILDERS[rest_state](n).amplitudes)

    @property
    def rest_expectations(self) -> np.ndarray:
        """Z expectations of the rest state."""
        return (np.abs(self._rest) ** 2) @ self._signs

    def hamiltonian(self, drive: np.ndarray) -> np.ndarray:
        """Dense H for per-node transverse fields ``drive``."""
        h = np.diag(self._zz_energies.astype(complex))
        for i, strength in enumerate(drive):
            h[self._rows, self._rows ^ (1 << i)] += strength
        return h

    def _step_unitary(self, drive: np.ndarray, dt: float) -> np.ndarray:
        eigenvalues, eigenvectors = scipy.linalg.eigh(self.hamiltonian(drive))
        return (eigenvectors * np.exp(-1j * dt * eigenvalues)) @ eigenvectors.conj().T

    def _expectations(self, branches: np.ndarray, weights: np.ndarray) -> np.ndarray:
        populations = (np.abs(branches) ** 2) @ weights
        return populations @ self._signs

    def run_array(self, u: InputSignal, horizon: Optional[float] = None) -> Tuple[np.ndarray, np.ndarray]:
        """
        Simulate the liquid and return raw arrays.

        Args:
            u: Input signal in U with matching channel count
            horizon: End time; defaults to the signal's duration

        Returns:
            (times, expectations) with expectations of shape (num_times, num_nodes)
        """
        require_valid(u)
        if u.channels != self.graph.num_channels:
            raise SizeError(f"Signal has {u.channels} channels, reservoir expects {self.graph.num_channels}")
        num_steps = u.num_samples - 1 if horizon is None else int(round(horizon / u.dt))
        if num_steps < 0 or num_steps > u.num_samples - 1:
            raise PreconditionError(f"Signal covers [0, {u.duration:g}], horizon {horizon} is outside it")

        branches = self._rest[:, None].copy()
        weights = np.array([1.0])
        expectations = [self._expectations(branches, weights)]
        scale = self.graph.field_scale

        for k in range(1, num_steps + 1):
            drive = scale * (self.graph.input_weights @ (0.5 * (u.samples[k - 1] + u.samples[k])))
            branches = self._step_unitary(drive, u.dt) @ branches
            if self.leak > 0.0:
                weights = np.append(weights * (1.0 - self.leak), self.leak)
                branches = np.hstack([branches, self._rest[:, None]])
                keep = weights >= PRUNE_WEIGHT
                if not keep.all():
                    weights, branches = weights[keep], branches[:, keep]
            expectations.append(self._expectations(branches, weights))

        drift = float(np.max(np.abs(np.linalg.norm(branches, axis=0) - 1.0)))
        if drift >= 1e-6:
            raise InternalError(f"Reservoir norm drift {drift:.3e} exceeded tolerance")

        times = np.arange(num_steps + 1) * u.dt
        return times, np.vstack(expectations)

    def run(self, u: InputSignal, horizon: Optional[float] = None) -> List[LiquidState]:
        times, z = self.run_array(u, horizon)
        return [LiquidState(float(t), row) for t, row in zip(times, z)]


def run_liquid(graph: ReservoirGraph, u: InputSignal, horizon: Optional[float] = None,
               leak: float = DEFAULT_LEAK, rest_state: str = DEFAULT_REST_STATE) -> List[LiquidState]:
    """Run the liquid once; see QuantumLiquid."""
    return QuantumLiquid(graph, leak, rest_state).run(u, horizon)


def trajectory_frame(states: Sequence[LiquidState]) -> pd.DataFrame:
    """Trajectory as a frame with columns t, z0, z1, ..."""
    z = np.vstack([s.node_expectations for s in states])
    frame = pd.DataFrame(z, columns=[f"z{i}" for i in range(z.shape[1])])
    frame.insert(0, 't', [s.t for s in states])
    return frame


@dataclass
class SeparationReport:
    """Whether some basis filter tells two signals apart, with its witness."""

    separated: bool
    threshold: float
    max_difference: float
    witness_filter: Optional[int] = None
    witness_node: Optional[int] = None
    witness_lag: Optional[int] = None
    witness_time_index: Optional[int] = None


def check_pointwise_separation(graph: ReservoirGraph, bank: FilterBank, u: InputSignal, v: InputSignal,
                               threshold: float, leak: float = DEFAULT_LEAK,
                               rest_state: str = DEFAULT_REST_STATE) -> SeparationReport:
    """
    Compare every filter output of the two liquid runs at every time with
    full lag history.

    Returns:
        SeparationReport; the witness is the filter component with the
        largest difference
    """
    require_valid(u, 'u')
    require_valid(v, 'v')
    if u.samples.shape != v.samples.shape:
        raise PreconditionError(f"Signals differ in shape: {u.samples.shape} vs {v.samples.shape}")
    if np.array_equal(u.samples, v.samples):
        raise PreconditionError("Signals are identical at every sample; nothing to separate")

    liquid = QuantumLiquid(graph, leak, rest_state)
    bank.validate_nodes(graph.num_nodes)
    _, traj_u = liquid.run_array(u)
    _, traj_v = liquid.run_array(v)
    indices, feats_u = bank.feature_matrix(traj_u)
    _, feats_v = bank.feature_matrix(traj_v)

    diff = np.abs(feats_u - feats_v)
    row, col = np.unravel_index(int(np.argmax(diff)), diff.shape)
    max_diff = float(diff[row, col])
    if max_diff <= threshold:
        return SeparationReport(False, threshold, max_diff)

    filter_index, node, lag = bank.locate(int(col))
    return SeparationReport(True, threshold, max_diff, filter_index, node, lag, int(indices[row]))


@dataclass
class FadingMemoryReport:
    """Divergence of filter outputs against the length of the agreement window."""

    windows: List[int]
    mean_divergence: List[float]
    spread: List[float]
    nonincreasing_fraction: float
    certified: bool
    flag: str
    history: int = 0

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'window': self.windows, 'mean_divergence': self.mean_divergence,
                             'spread': self.spread})


def _bump(length: int) -> np.ndarray:
    return np.sin(np.pi * np.arange(1, length + 1) / (length + 1))


def estimate_fading_memory(graph: ReservoirGraph, bank: FilterBank, base_signal: InputSignal,
                           num_pairs: int, windows: Sequence[int], seed: int = 0,
                           leak: float = DEFAULT_LEAK, rest_state: str = DEFAULT_REST_STATE,
                           perturbation_length: int = 4, decay_ratio: float = 0.5,
                           min_fraction: float = 0.9) -> FadingMemoryReport:
    """
    Estimate how fast the liquid forgets.

    The bank reads the trajectory at t - lag for every lag up to its
    ``max_lag`` L, so its output at t depends on the input up to L samples
    earlier. For each window W (in samples) the base signal is perturbed by
    a smooth bump over the ``perturbation_length`` samples just before the
    last W + L + 1 samples: both signals agree on [t - W - L, t], and every
    trajectory sample the bank reads lies at least W steps past the
    perturbation. The divergence is the norm of the difference of the bank
    outputs at t. Each pair keeps its bump amplitude across all windows.

    The liquid is certified as fading when at least ``min_fraction`` of the
    pairs have a nonincreasing divergence across adjacent windows and the
    mean divergence at the largest window is at most ``decay_ratio`` times
    the mean at the smallest.

    Args:
        graph: Reservoir wiring
        bank: Filter bank read at the final time
        base_signal: Signal in U shared by both members of every pair
        num_pairs: Number of random perturbations (>= 10)
        windows: Strictly increasing window lengths in samples
        seed: Seed for the perturbations

    Returns:
        FadingMemoryReport
    """
    require_valid(base_signal, 'base_signal')
    if num_pairs < 10:
        raise ConfigError(f"num_pairs must be >= 10, got {num_pairs}", field='num_pairs')
    windows = [int(w) for w in windows]
    if not windows or any(w < 0 for w in windows) or any(b <= a for a, b in zip(windows, windows[1:])):
        raise ConfigError(f"windows must be nonnegative and strictly increasing, got {windows}", field='windows')
    if perturbation_length < 1:
        raise ConfigError(f"perturbation_length must be >= 1, got {perturbation_length}",
                          field='perturbation_length')
    last = base_signal.num_samples - 1
    history = bank.max_lag
    needed = windows[-1] + history + perturbation_length
    if needed > last:
        raise ConfigError(f"window {windows[-1]} plus lag history {history} and perturbation "
                          f"{perturbation_length} needs {needed} steps, signal has {last}", field='windows')

    samples = base_signal.samples
    steepest = np.max(np.abs(np.diff(samples, axis=0)), axis=0)
    slack = base_signal.lipschitz * base_signal.dt - steepest
    if np.any(slack <= 1e-12):
        raise ConfigError("base_signal leaves no Lipschitz slack for perturbations", field='base_signal')

    bump = _bump(perturbation_length)
    padded = np.concatenate([[0.0], bump, [0.0]])
    max_increment = float(np.max(np.abs(np.diff(padded))))
    amplitude_cap = np.minimum(0.9 * slack / max_increment, base_signal.bound)

    rng = np.random.default_rng(seed)
    amplitudes = rng.uniform(0.5, 1.0, size=(num_pairs, base_signal.channels)) \
        * rng.choice([-1.0, 1.0], size=(num_pairs, base_signal.channels)) * amplitude_cap

    liquid = QuantumLiquid(graph, leak, rest_state)
    bank.validate_nodes(graph.num_nodes)
    _, base_traj = liquid.run_array(base_signal)
    reference = bank.apply(base_traj)

    divergences = np.zeros((len(windows), num_pairs))
    for w_index, window in enumerate(windows):
        end = last - window - history
        start = end - perturbation_length
        for p in range(num_pairs):
            perturbed = samples.copy()
            perturbed[start:end] += bump[:, None] * amplitudes[p][None, :]
            perturbed = np.clip(perturbed, -base_signal.bound, base_signal.bound)
            _, traj = liquid.run_array(base_signal.with_samples(perturbed))
            divergences[w_index, p] = np.linalg.norm(bank.apply(traj) - reference)
        logger.debug(f"Window {window}: mean divergence {divergences[w_index].mean():.3e}")

    means = divergences.mean(axis=1)
    spread = divergences.std(axis=1)
    monotone = np.all(np.diff(divergences, axis=0) <= 1e-15, axis=0)
    fraction = float(np.mean(monotone))
    decays = bool(means[0] > 0 and means[-1] <= decay_ratio * means[0])
    certified = fraction >= min_fraction and decays
    flag = "fading memory certified" if certified else "fading memory not certified"
    logger.info(f"Fading memory: {fraction:.0%} of pairs nonincreasing, {flag}")

    return FadingMemoryReport(windows, means.tolist(), spread.tolist(), fraction, certified, flag, history)
