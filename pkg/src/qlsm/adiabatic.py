"""
Adiabatic Evolution Module

Clause-decomposed interpolating Hamiltonians H(s) = (1-s) H_B + s H_P,
instantaneous spectra, fixed-step Schroedinger evolution and ground-state
overlap diagnostics.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from .exceptions import ConfigError, DomainError, InternalError, SizeError
from .statevec import StateVector, bit_matrix, inner_product, uniform_superposition

logger = logging.getLogger(__name__)

MAX_HAMILTONIAN_QUBITS = 12
HERMITICITY_TOLERANCE = 1e-10
DEGENERACY_TOLERANCE = 1e-9
STEPS_PER_UNIT_TIME = 10

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)

Literal = Tuple[int, bool]


def _check_hamiltonian_size(n: int):
    if n < 1 or n > MAX_HAMILTONIAN_QUBITS:
        raise SizeError(f"Hamiltonians support 1..{MAX_HAMILTONIAN_QUBITS} qubits, got {n}")


@dataclass(frozen=True)
class Hamiltonian:
    """Hermitian operator on n qubits, stored as a dense matrix."""

    num_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        _check_hamiltonian_size(self.num_qubits)
        mat = np.array(self.matrix, dtype=complex)
        dim = 2 ** self.num_qubits
        if mat.shape != (dim, dim):
            raise SizeError(f"Expected {dim}x{dim} matrix, got {mat.shape}")
        residual = float(np.max(np.abs(mat - mat.conj().T)))
        if residual >= HERMITICITY_TOLERANCE:
            raise DomainError(f"Matrix is not Hermitian (residual {residual:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, 'matrix', mat)

    @property
    def dimension(self) -> int:
        return 2 ** self.num_qubits

    def hermiticity_residual(self) -> float:
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))

    def __add__(self, other: 'Hamiltonian') -> 'Hamiltonian':
        if other.num_qubits != self.num_qubits:
            raise SizeError(f"Cannot add {self.num_qubits}- and {other.num_qubits}-qubit Hamiltonians")
        return Hamiltonian(self.num_qubits, self.matrix + other.matrix)

    def scaled(self, factor: float) -> 'Hamiltonian':
        return Hamiltonian(self.num_qubits, factor * self.matrix)

    @classmethod
    def zero(cls, n: int) -> 'Hamiltonian':
        return cls(n, np.zeros((2 ** n, 2 ** n), dtype=complex))


@dataclass(frozen=True)
class SatInstance:
    """
    CNF formula over ``num_vars`` Boolean variables.

    Each clause is a tuple of literals ``(variable, negated)``; a positive
    literal is satisfied when the variable's bit is 1.
    """

    num_vars: int
    clauses: Tuple[Tuple[Literal, ...], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ConfigError(f"Instance needs at least one variable, got {self.num_vars}")
        clauses = tuple(tuple((int(v), bool(neg)) for v, neg in clause) for clause in self.clauses)
        if not clauses:
            raise ConfigError("Instance has no clauses")
        for c, clause in enumerate(clauses):
            if not clause:
                raise ConfigError(f"Clause {c} is empty")
            for var, _ in clause:
                if not 0 <= var < self.num_vars:
                    raise ConfigError(f"Clause {c} references variable {var} outside 0..{self.num_vars - 1}")
        object.__setattr__(self, 'clauses', clauses)

    def clause_violations(self) -> np.ndarray:
        """
        Violation table.

        Returns:
            Integer array (num_clauses, 2^num_vars); 1 where the clause is
            violated by the assignment
        """
        bits = bit_matrix(self.num_vars)
        table = np.ones((len(self.clauses), 2 ** self.num_vars), dtype=int)
        for c, clause in enumerate(self.clauses):
            for var, negated in clause:
                literal_true = bits[:, var] == (0 if negated else 1)
                table[c] &= (~literal_true).astype(int)
        return table

    def violated_counts(self) -> np.ndarray:
        return self.clause_violations().sum(axis=0)

    def satisfying_mask(self) -> np.ndarray:
        return self.violated_counts() == 0

    def evaluate(self, assignment: int) -> bool:
        """Evaluate the formula on one assignment, clause by clause."""
        for clause in self.clauses:
            if not any(((assignment >> var) & 1) != int(negated) for var, negated in clause):
                return False
        return True

    def variables_in(self, clause_id: int) -> List[int]:
        return sorted({var for var, _ in self.clauses[clause_id]})

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.num_vars} {len(self.clauses)}"]
        for clause in self.clauses:
            lits = [str(-(v + 1) if neg else v + 1) for v, neg in clause]
            lines.append(" ".join(lits + ["0"]))
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ClauseTerm:
    """Per-clause summand of the base and problem Hamiltonians."""

    clause_id: int
    base_part: Hamiltonian
    problem_part: Hamiltonian


@dataclass(frozen=True)
class SpectrumSnapshot:
    """Eigen-decomposition of H(s), eigenvalues sorted ascending."""

    s: float
    eigenvalues: np.ndarray
    ground_state: StateVector
    ground_space: np.ndarray = field(repr=False)

    @property
    def degeneracy(self) -> int:
        return self.ground_space.shape[1]

    @property
    def gap(self) -> float:
        if len(self.eigenvalues) < 2:
            return 0.0
        return float(self.eigenvalues[1] - self.eigenvalues[0])


@dataclass(frozen=True)
class Schedule:
    """Linear schedule s(t) = t/T discretized into ``num_steps`` steps."""

    total_time: float
    num_steps: int

    def __post_init__(self):
        if not self.total_time > 0:
            raise ConfigError(f"total_time must be positive, got {self.total_time}")
        if self.num_steps < 1:
            raise ConfigError(f"num_steps must be >= 1, got {self.num_steps}")

    @property
    def dt(self) -> float:
        return self.total_time / self.num_steps

    def s_at(self, t: float) -> float:
        return t / self.total_time

    @property
    def minimum_steps(self) -> int:
        return minimum_steps(self.total_time)


@dataclass(frozen=True)
class OverlapResult:
    """
    |<ground(s=1)|psi(T)>|, or the projection norm onto the whole ground
    space when it is degenerate.
    """

    value: float
    degenerate: bool
    degeneracy: int

    def __float__(self) -> float:
        return self.value


def minimum_steps(total_time: float) -> int:
    return max(1, math.ceil(STEPS_PER_UNIT_TIME * total_time - 1e-9))


def default_schedule(total_time: float, steps_per_unit_time: float = STEPS_PER_UNIT_TIME) -> Schedule:
    steps = max(minimum_steps(total_time), math.ceil(steps_per_unit_time * total_time - 1e-9))
    return Schedule(total_time, steps)


def embed_operator(op: np.ndarray, qubit: int, n: int) -> np.ndarray:
    """Tensor a single-qubit operator into the n-qubit space on ``qubit``."""
    factors = [IDENTITY] * n
    factors[n - 1 - qubit] = op
    return reduce(np.kron, factors)


def _transverse_term(qubit: int, n: int) -> np.ndarray:
    return np.eye(2 ** n, dtype=complex) - embed_operator(PAULI_X, qubit, n)


def build_base_hamiltonian(n: int) -> Hamiltonian:
    """
    H_B = sum_j (1 - X_j).

    Its unique ground state is the uniform superposition with energy 0.
    """
    _check_hamiltonian_size(n)
    matrix = sum(_transverse_term(j, n) for j in range(n))
    return Hamiltonian(n, matrix)


def build_problem_hamiltonian(inst: SatInstance) -> List[ClauseTerm]:
    """
    Decompose H_B and H_P clause by clause.

    Each clause's problem part is the diagonal indicator of assignments
    violating it. The base part collects the (1 - X_j) terms of the
    clause's variables, each weighted by 1/(number of clauses containing
    variable j); variables appearing in no clause are spread evenly over
    all clauses.

    Args:
        inst: CNF instance

    Returns:
        One ClauseTerm per clause
    """
    if not inst.clauses:
        raise ConfigError("Instance has no clauses", field='clauses')
    n = inst.num_vars
    _check_hamiltonian_size(n)

    clause_vars = [inst.variables_in(c) for c in range(len(inst.clauses))]
    occurrences = np.zeros(n, dtype=int)
    for variables in clause_vars:
        occurrences[variables] += 1
    orphans = [j for j in range(n) if occurrences[j] == 0]
    num_clauses = len(inst.clauses)

    transverse = [_transverse_term(j, n) for j in range(n)]
    violations = inst.clause_violations()

    terms = []
    for c, variables in enumerate(clause_vars):
        base = np.zeros((2 ** n, 2 ** n), dtype=complex)
        for j in variables:
            base += transverse[j] / occurrences[j]
        for j in orphans:
            base += transverse[j] / num_clauses
        problem = np.diag(violations[c].astype(complex))
        terms.append(ClauseTerm(c, Hamiltonian(n, base), Hamiltonian(n, problem)))

    logger.debug(f"Built {len(terms)} clause terms on {n} qubits ({len(orphans)} unconstrained variables)")
    return terms


def _check_terms(terms: Sequence[ClauseTerm]) -> int:
    if not terms:
        raise ConfigError("No clause terms given", field='terms')
    n = terms[0].base_part.num_qubits
    for term in terms:
        if term.base_part.num_qubits != n or term.problem_part.num_qubits != n:
            raise SizeError("Clause terms act on different qubit counts")
    return n


def total_base(terms: Sequence[ClauseTerm]) -> Hamiltonian:
    n = _check_terms(terms)
    return Hamiltonian(n, sum(t.base_part.matrix for t in terms))


def total_problem(terms: Sequence[ClauseTerm]) -> Hamiltonian:
    n = _check_terms(terms)
    return Hamiltonian(n, sum(t.problem_part.matrix for t in terms))


def interpolate(terms: Sequence[ClauseTerm], s: float) -> Hamiltonian:
    """
    H(s) = sum_C [(1-s) H_B,C + s H_P,C].

    Args:
        terms: Clause terms
        s: Schedule parameter in [0, 1]

    Returns:
        Interpolated Hamiltonian
    """
    if not 0.0 <= s <= 1.0:
        raise DomainError(f"s must lie in [0, 1], got {s}")
    n = _check_terms(terms)
    matrix = sum((1.0 - s) * t.base_part.matrix + s * t.problem_part.matrix for t in terms)
    return Hamiltonian(n, matrix)


def spectrum(h: Hamiltonian, s: float = 0.0) -> SpectrumSnapshot:
    """
    Full diagonalization of a Hamiltonian.

    Args:
        h: Hamiltonian (dimension at most 2^MAX_HAMILTONIAN_QUBITS)
        s: Schedule parameter the Hamiltonian belongs to, for bookkeeping

    Returns:
        SpectrumSnapshot with ascending eigenvalues and the ground state
    """
    if h.dimension > 2 ** MAX_HAMILTONIAN_QUBITS:
        raise SizeError(f"Dimension {h.dimension} exceeds diagonalization cap")
    eigenvalues, eigenvectors = scipy.linalg.eigh(h.matrix)
    order = np.argsort(eigenvalues, kind='stable')
    eigenvalues = eigenvalues[order]
    eigenvectors = eigenvectors[:, order]

    degenerate = np.abs(eigenvalues - eigenvalues[0]) < DEGENERACY_TOLERANCE
    ground = eigenvectors[:, 0]
    return SpectrumSnapshot(
        s=float(s),
        eigenvalues=eigenvalues,
        ground_state=StateVector(h.num_qubits, ground / np.linalg.norm(ground)),
        ground_space=eigenvectors[:, degenerate],
    )


def _step_unitary(h: np.ndarray, dt: float) -> np.ndarray:
    eigenvalues, eigenvectors = scipy.linalg.eigh(h)
    return (eigenvectors * np.exp(-1j * dt * eigenvalues)) @ eigenvectors.conj().T


def evolve(terms: Sequence[ClauseTerm], schedule: Schedule, initial: StateVector) -> StateVector:
    """
    Integrate the Schroedinger equation along the linear schedule.

    Each step applies exp(-i H(s_mid) dt) with s_mid the midpoint of the
    step, computed by diagonalization.

    Args:
        terms: Clause terms defining H_B and H_P
        schedule: Total time and step count (at least 10 steps per unit time)
        initial: Normalized initial state

    Returns:
        psi(T)
    """
    n = _check_terms(terms)
    if initial.num_qubits != n:
        raise SizeError(f"Initial state has {initial.num_qubits} qubits, Hamiltonian has {n}")
    if not initial.is_normalized():
        raise DomainError(f"Initial state is not normalized (norm {initial.norm():.12f})")
    required = schedule.minimum_steps
    if schedule.num_steps < required:
        raise ConfigError(
            f"{schedule.num_steps} steps is too few for T={schedule.total_time}; "
            f"minimum is {required}",
            field='num_steps',
        )

    h_base = total_base(terms).matrix
    h_problem = total_problem(terms).matrix
    dt = schedule.dt
    psi = np.array(initial.amplitudes, dtype=complex)

    for k in range(schedule.num_steps):
        s_mid = schedule.s_at((k + 0.5) * dt)
        h = (1.0 - s_mid) * h_base + s_mid * h_problem
        psi = _step_unitary(h, dt) @ psi

    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift >= 1e-6:
        raise InternalError(f"Norm drift {drift:.3e} exceeded tolerance during evolution")
    logger.debug(f"Evolved {schedule.num_steps} steps over T={schedule.total_time} (norm drift {drift:.2e})")
    return StateVector(n, psi)


def overlap_with_final_ground(terms: Sequence[ClauseTerm], schedule: Schedule,
                              initial: Optional[StateVector] = None) -> OverlapResult:
    """
    Overlap of psi(T) with the ground space of H(s=1).

    Args:
        terms: Clause terms
        schedule: Evolution schedule
        initial: Initial state; defaults to the ground state of H_B

    Returns:
        OverlapResult in [0, 1], flagged when the final ground level is degenerate
    """
    n = _check_terms(terms)
    if initial is None:
        initial = uniform_superposition(n)
    final = evolve(terms, schedule, initial)
    snapshot = spectrum(interpolate(terms, 1.0), 1.0)

    if snapshot.degeneracy > 1:
        projection = snapshot.ground_space.conj().T @ final.amplitudes
        value = float(np.linalg.norm(projection))
        logger.warning(f"Final ground space is {snapshot.degeneracy}-fold degenerate; "
                       f"reporting projection norm onto the whole eigenspace")
    else:
        value = abs(inner_product(snapshot.ground_state, final))
    return OverlapResult(min(value, 1.0), snapshot.degeneracy > 1, snapshot.degeneracy)


def sweep_overlaps(terms: Sequence[ClauseTerm], total_times: Sequence[float],
                   steps_per_unit_time: float = STEPS_PER_UNIT_TIME,
                   initial: Optional[StateVector] = None) -> List[Tuple[float, OverlapResult]]:
    """Final-ground overlap for each total time T."""
    if len(total_times) == 0:
        raise ConfigError("T list is empty", field='total_times')
    rows = []
    for T in total_times:
        result = overlap_with_final_ground(terms, default_schedule(float(T), steps_per_unit_time), initial)
        logger.info(f"T={T:g}: overlap={result.value:.6f}")
        rows.append((float(T), result))
    return rows


def gap_profile(terms: Sequence[ClauseTerm], num_samples: int) -> List[Tuple[float, float]]:
    """
    Spectral gap E_1 - E_0 along the schedule.

    Args:
        terms: Clause terms
        num_samples: Number of equally spaced s values in [0, 1]

    Returns:
        List of (s, gap)
    """
    if num_samples < 1:
        raise ConfigError(f"num_samples must be >= 1, got {num_samples}", field='num_samples')
    samples = np.linspace(0.0, 1.0, num_samples) if num_samples > 1 else np.array([0.0])
    profile = []
    for s in samples:
        snapshot = spectrum(interpolate(terms, float(s)), float(s))
        profile.append((float(s), max(snapshot.gap, 0.0)))
    return profile
