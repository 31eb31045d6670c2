"""
Nonlinear Flag Oracle Module

Decision and counting over a Boolean function f on n bits by repeated
nonlinear pairing of flag values:

  1. prepare sum_i |i, f(i)> with uniform amplitudes 2^(-n/2);
  2. for every index bit k, pair components whose indices differ only in
     bit k and rewrite both flags with the pair map (OR for decision,
     sum for counting);
  3. after all n bits every component carries the same flag: the decision
     (OR_i f(i)) or the count (sum_i f(i)).

The pair map is not unitary; it is applied as a deterministic rewrite of
flag values and simulated classically at exponential cost.
"""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .adiabatic import SatInstance
from .exceptions import ConfigError, DomainError, InternalError, SizeError

logger = logging.getLogger(__name__)

MAX_FLAGGED_BITS = 16
MAX_BRUTE_FORCE_BITS = 20


@dataclass(frozen=True)
class OracleFunction:
    """
    Boolean function on n bits as a truth table of length 2^n.

    ``instance`` keeps the CNF the table was derived from, when there is one.
    """

    n: int
    table: np.ndarray
    instance: Optional[SatInstance] = field(default=None, compare=False)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_BRUTE_FORCE_BITS:
            raise SizeError(f"Oracle supports 1..{MAX_BRUTE_FORCE_BITS} bits, got {self.n}")
        table = np.asarray(self.table)
        if table.shape != (2 ** self.n,):
            raise SizeError(f"Truth table must have exactly {2 ** self.n} entries, got {table.size}")
        if not np.all(np.isin(table, (0, 1))):
            raise DomainError("Truth table entries must be 0 or 1")
        table = table.astype(bool)
        table.setflags(write=False)
        object.__setattr__(self, 'table', table)

    @classmethod
    def from_table(cls, values: Sequence[int]) -> 'OracleFunction':
        values = np.asarray(values)
        n = int(round(np.log2(values.size))) if values.size > 0 else 0
        if values.size == 0 or 2 ** n != values.size:
            raise SizeError(f"Truth table length {values.size} is not a power of two")
        return cls(n, values)

    @classmethod
    def from_sat(cls, inst: SatInstance) -> 'OracleFunction':
        if inst.num_vars > MAX_BRUTE_FORCE_BITS:
            raise SizeError(f"Instance has {inst.num_vars} variables; cap is {MAX_BRUTE_FORCE_BITS}")
        return cls(inst.num_vars, inst.satisfying_mask(), inst)

    def evaluate(self, i: int) -> bool:
        if self.instance is not None:
            return self.instance.evaluate(i)
        return bool(self.table[i])


@dataclass(frozen=True)
class FlaggedSuperposition:
    """
    Components |i, flag_i> for i = 0 .. 2^n - 1, each with amplitude
    2^(-n/2). Flags are stored as one machine integer per index.
    """

    n: int
    flag_width: int
    flags: np.ndarray

    def __post_init__(self):
        flags = np.asarray(self.flags, dtype=np.int64)
        if flags.shape != (2 ** self.n,):
            raise SizeError(f"Expected {2 ** self.n} flags, got {flags.size}")
        if np.any(flags < 0) or np.any(flags >= 2 ** self.flag_width):
            raise InternalError(f"Flag value does not fit a {self.flag_width}-bit register")
        flags.setflags(write=False)
        object.__setattr__(self, 'flags', flags)

    @property
    def amplitude(self) -> float:
        return 2.0 ** (-self.n / 2)

    @property
    def counting(self) -> bool:
        return self.flag_width > 1

    def components(self) -> Dict[Tuple[int, int], float]:
        return {(i, int(flag)): self.amplitude for i, flag in enumerate(self.flags)}

    def norm_squared(self) -> float:
        return float(self.flags.size * self.amplitude ** 2)

    def true_count(self) -> int:
        """Number of components whose flag is nonzero."""
        return int(np.count_nonzero(self.flags))


@dataclass(frozen=True)
class PairRuleTrace:
    """Flag values of every pair before and after one iteration."""

    iteration: int
    bit: int
    low_indices: np.ndarray
    before: np.ndarray
    after: np.ndarray

    def matches_pair_rule(self, counting: bool = False) -> bool:
        if counting:
            expected = np.repeat(self.before.sum(axis=1, keepdims=True), 2, axis=1)
        else:
            expected = np.repeat(self.before.max(axis=1, keepdims=True), 2, axis=1)
        return bool(np.array_equal(self.after, expected))


@dataclass
class OracleRun:
    """Result of the full pairing procedure."""

    n: int
    decision: Optional[bool]
    count: Optional[int]
    order: List[int]
    true_counts: List[int]
    traces: List[PairRuleTrace]
    trace_hash: str

    @property
    def iterations(self) -> int:
        return len(self.order)


def nonlinear_pair_map(flag_a: int, flag_b: int) -> Tuple[int, int]:
    """
    (0,1) -> (1,1), (1,0) -> (1,1), (1,1) -> (1,1), (0,0) -> (0,0):
    both flags become the OR of the pair.
    """
    if flag_a not in (0, 1) or flag_b not in (0, 1):
        raise DomainError(f"Flags must be bits, got ({flag_a}, {flag_b})")
    combined = flag_a | flag_b
    return combined, combined


def counting_pair_map(flag_a: int, flag_b: int) -> Tuple[int, int]:
    """Both flags become the sum of the pair."""
    if flag_a < 0 or flag_b < 0:
        raise DomainError(f"Counting flags must be nonnegative, got ({flag_a}, {flag_b})")
    total = flag_a + flag_b
    return total, total


def prepare_flagged_state(f: OracleFunction, counting: bool = False) -> FlaggedSuperposition:
    """
    sum_i |i, f(i)> / sqrt(2^n).

    Args:
        f: Oracle on at most MAX_FLAGGED_BITS bits
        counting: Use an integer register of n + 1 bits instead of one flag bit

    Returns:
        FlaggedSuperposition
    """
    if f.n > MAX_FLAGGED_BITS:
        raise SizeError(f"Flagged superposition supports up to {MAX_FLAGGED_BITS} bits, got {f.n}")
    width = f.n + 1 if counting else 1
    return FlaggedSuperposition(f.n, width, f.table.astype(np.int64))


def _pair_step(state: FlaggedSuperposition, k: int) -> Tuple[FlaggedSuperposition, PairRuleTrace]:
    if not 0 <= k < state.n:
        raise ConfigError(f"Bit {k} out of range for n={state.n}", field='k')
    indices = np.arange(2 ** state.n)
    low = indices[(indices >> k) & 1 == 0]
    high = low | (1 << k)
    before = np.column_stack([state.flags[low], state.flags[high]])

    if state.counting:
        combined = before[:, 0] + before[:, 1]
    else:
        combined = before[:, 0] | before[:, 1]
    flags = np.empty_like(state.flags)
    flags[low] = combined
    flags[high] = combined
    after = np.column_stack([combined, combined])
    new_state = FlaggedSuperposition(state.n, state.flag_width, flags)
    return new_state, PairRuleTrace(-1, k, low, before, after)


def filter_iteration(state: FlaggedSuperposition, k: int) -> FlaggedSuperposition:
    """
    Pair components whose indices differ only in bit k and apply the pair
    map to each pair's flags. Component count and amplitudes are unchanged.
    """
    return _pair_step(state, k)[0]


def _resolve_order(n: int, order: Optional[Sequence[int]]) -> List[int]:
    if order is None:
        return list(range(n))
    order = [int(k) for k in order]
    if sorted(order) != list(range(n)):
        raise ConfigError(f"order must be a permutation of 0..{n - 1}, got {order}", field='order')
    return order


def _hash_flags(digest, flags: np.ndarray):
    digest.update(np.ascontiguousarray(flags, dtype='<i8').tobytes())


def run_traced(f: OracleFunction, counting: bool = False,
               order: Optional[Sequence[int]] = None) -> OracleRun:
    """
    Run all n pairing iterations and keep every trace.

    Raises:
        InternalError: if the flags are not uniform after the last iteration
    """
    order = _resolve_order(f.n, order)
    state = prepare_flagged_state(f, counting)
    digest = hashlib.sha256()
    _hash_flags(digest, state.flags)
    true_counts = [state.true_count()]
    traces = []

    for iteration, k in enumerate(order):
        state, trace = _pair_step(state, k)
        traces.append(PairRuleTrace(iteration, k, trace.low_indices, trace.before, trace.after))
        true_counts.append(state.true_count())
        _hash_flags(digest, state.flags)
        logger.debug(f"Iteration {iteration} (bit {k}): {true_counts[-1]} flagged components")

    if np.any(state.flags != state.flags[0]):
        raise InternalError(f"Flags not uniform after {f.n} iterations: {np.unique(state.flags).tolist()}")

    common = int(state.flags[0])
    return OracleRun(
        n=f.n,
        decision=None if counting else bool(common),
        count=common if counting else None,
        order=order,
        true_counts=true_counts,
        traces=traces,
        trace_hash=digest.hexdigest(),
    )


def run_np_decision(f: OracleFunction, order: Optional[Sequence[int]] = None) -> bool:
    """OR_i f(i), read from the uniform flag after n iterations."""
    return bool(run_traced(f, counting=False, order=order).decision)


def run_sharp_p_count(f: OracleFunction, order: Optional[Sequence[int]] = None) -> int:
    """sum_i f(i), read from the uniform counting register after n iterations."""
    return int(run_traced(f, counting=True, order=order).count)


def brute_force(f: OracleFunction) -> Tuple[bool, int]:
    """
    Exhaustive evaluation of f, one assignment at a time.

    Returns:
        (OR_i f(i), sum_i f(i))
    """
    if f.n > MAX_BRUTE_FORCE_BITS:
        raise SizeError(f"Brute force supports up to {MAX_BRUTE_FORCE_BITS} bits, got {f.n}")
    count = sum(1 for i in range(2 ** f.n) if f.evaluate(i))
    return count > 0, count


def doubling_law_holds(true_counts: Sequence[int], n: int, exact: bool = False) -> bool:
    """
    Check the growth of flagged components across iterations.

    With ``exact`` the count must become min(2c, 2^n) whenever c > 0, which
    holds when f has a single true entry. Otherwise the bound
    c <= c' <= min(2c, 2^n) is checked, which holds for every f.
    """
    full = 2 ** n
    for before, after in zip(true_counts, true_counts[1:]):
        if before == 0:
            if after != 0:
                return False
            continue
        ceiling = min(2 * before, full)
        if exact and after != ceiling:
            return False
        if not before <= after <= ceiling:
            return False
    return True
