"""
Synthetic Data Generator Module

Generates input signals inside the domain U, pattern streams for
unsupervised learning, random CNF instances and random oracles.
"""

import logging
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .adiabatic import SatInstance
from .exceptions import ConfigError
from .nonlinear_oracle import OracleFunction
from .reservoir import DEFAULT_BOUND, DEFAULT_DT, DEFAULT_LIPSCHITZ, InputSignal

logger = logging.getLogger(__name__)


class SignalGenerator:
    """
    Generate synthetic experiment inputs.

    Signals are sums of sinusoids scaled so that both the amplitude bound K
    and the slope bound ``slope_fraction * K'`` hold exactly on the grid,
    leaving Lipschitz slack for perturbation experiments.
    """

    def __init__(self, config: Optional[Dict[str, Any]] = None, seed: Optional[int] = None):
        """
        Initialize the generator.

        Args:
            config: Configuration dictionary ('dt', 'bound', 'lipschitz',
                    'num_components', 'slope_fraction')
            seed: Seed of the generator's random stream
        """
        self.config = config or {}
        self.dt = self.config.get('dt', DEFAULT_DT)
        self.bound = self.config.get('bound', DEFAULT_BOUND)
        self.lipschitz = self.config.get('lipschitz', DEFAULT_LIPSCHITZ)
        self.num_components = self.config.get('num_components', 3)
        self.slope_fraction = self.config.get('slope_fraction', 0.5)
        self.amplitude_fraction = self.config.get('amplitude_fraction', 0.9)
        self.rng = np.random.default_rng(seed)

    def _signal(self, samples: np.ndarray) -> InputSignal:
        return InputSignal(samples, self.dt, self.bound, self.lipschitz)

    def generate_signal(self, num_samples: int, channels: int = 1) -> InputSignal:
        """
        Random smooth signal in U.

        Args:
            num_samples: Number of grid points
            channels: Number of channels

        Returns:
            InputSignal
        """
        if num_samples < 2:
            raise ConfigError(f"num_samples must be >= 2, got {num_samples}", field='num_samples')
        t = np.arange(num_samples) * self.dt
        max_freq = self.lipschitz / self.bound
        samples = np.zeros((num_samples, channels))

        for c in range(channels):
            freqs = self.rng.uniform(0.1, 1.0, self.num_components) * max_freq
            phases = self.rng.uniform(0.0, 2 * np.pi, self.num_components)
            weights = self.rng.uniform(0.2, 1.0, self.num_components)
            wave = np.sum(weights[:, None] * np.sin(freqs[:, None] * t[None, :] + phases[:, None]), axis=0)

            peak = np.max(np.abs(wave))
            wave = wave * (self.amplitude_fraction * self.bound / peak) if peak > 0 else wave
            steepest = np.max(np.abs(np.diff(wave)))
            allowed = self.slope_fraction * self.lipschitz * self.dt
            if steepest > allowed:
                wave = wave * (allowed / steepest)
            samples[:, c] = wave

        return self._signal(samples)

    def generate_pair(self, num_samples: int, channels: int = 1):
        """Two independent random signals."""
        return self.generate_signal(num_samples, channels), self.generate_signal(num_samples, channels)

    def constant_signal(self, levels: Sequence[float], num_samples: int) -> InputSignal:
        levels = np.asarray(levels, dtype=float)
        if np.any(np.abs(levels) > self.bound):
            raise ConfigError(f"Pattern levels {levels.tolist()} exceed K={self.bound}", field='patterns')
        return self._signal(np.tile(levels, (num_samples, 1)))

    def pattern_stream(self, patterns: Sequence[Sequence[float]], num_samples: int,
                       repeats: int = 1) -> List[InputSignal]:
        """Constant-level signals cycling through ``patterns``, ``repeats`` times."""
        return [self.constant_signal(p, num_samples) for _ in range(repeats) for p in patterns]

    def random_cnf(self, num_vars: int, num_clauses: int, clause_size: int = 3) -> SatInstance:
        """Random k-CNF with distinct variables in every clause."""
        if clause_size > num_vars:
            raise ConfigError(f"clause_size {clause_size} exceeds num_vars {num_vars}", field='clause_size')
        clauses = []
        for _ in range(num_clauses):
            variables = self.rng.choice(num_vars, size=clause_size, replace=False)
            negations = self.rng.random(clause_size) < 0.5
            clauses.append(tuple((int(v), bool(neg)) for v, neg in zip(variables, negations)))
        return SatInstance(num_vars, tuple(clauses))

    def random_oracle(self, n: int, density: Optional[float] = None) -> OracleFunction:
        """Random truth table; density drawn uniformly when not given."""
        density = self.rng.random() if density is None else density
        return OracleFunction(n, (self.rng.random(2 ** n) < density).astype(int))

    def single_solution_oracle(self, n: int) -> OracleFunction:
        table = np.zeros(2 ** n, dtype=int)
        table[self.rng.integers(2 ** n)] = 1
        return OracleFunction(n, table)

    def generate_test_scenarios(self, num_samples: int = 200, channels: int = 1) -> Dict[str, InputSignal]:
        """A small set of named signals for smoke tests."""
        t = np.arange(num_samples) * self.dt
        omega = self.slope_fraction * self.lipschitz / self.bound
        scenarios = {
            'constant': self._signal(np.full((num_samples, channels), 0.5 * self.bound)),
            'sine': self._signal(np.tile((self.bound * np.sin(omega * t))[:, None], (1, channels))),
            'random': self.generate_signal(num_samples, channels),
        }
        logger.info(f"Generated {len(scenarios)} test scenarios")
        return scenarios


def unique_solution_instance() -> SatInstance:
    """
    3-variable CNF whose only satisfying assignment is x0=1, x1=1, x2=0
    (basis index 3): (x0)(x1)(~x2)(x0 | x1)(x1 | ~x2).
    """
    return SatInstance(3, (
        ((0, False),),
        ((1, False),),
        ((2, True),),
        ((0, False), (1, False)),
        ((1, False), (2, True)),
    ))
