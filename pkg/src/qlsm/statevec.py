"""
State Vector Module

Dense state-vector representation of n qubits and the elementary
operations used throughout the simulator: rotations, inner products,
Z expectations and projective measurement.

Qubit j is bit j of the basis index (bit 0 least significant).
"""

import logging
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import InternalError, QubitIndexError, SizeError

logger = logging.getLogger(__name__)

MAX_QUBITS = 20
NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class StateVector:
    """
    Pure state of ``num_qubits`` qubits.

    The amplitude array is made read-only on construction; every operation
    returns a new StateVector.
    """

    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        _check_qubit_count(self.num_qubits)
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (2 ** self.num_qubits,):
            raise SizeError(
                f"Expected {2 ** self.num_qubits} amplitudes for {self.num_qubits} qubits, "
                f"got shape {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, 'amplitudes', amps)

    @property
    def dimension(self) -> int:
        return 2 ** self.num_qubits

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def is_normalized(self, tol: float = NORM_TOLERANCE) -> bool:
        return abs(float(np.sum(np.abs(self.amplitudes) ** 2)) - 1.0) < tol

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of measuring a single qubit in the computational basis."""

    qubit: int
    bit: int
    probability: float
    post_state: StateVector


def _check_qubit_count(n: int):
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_QUBITS:
        raise SizeError(f"Qubit count must be in [1, {MAX_QUBITS}], got {n}")


def _check_qubit(state: StateVector, qubit: int):
    if not 0 <= qubit < state.num_qubits:
        raise QubitIndexError(f"Qubit {qubit} out of range for {state.num_qubits} qubits")


def bit_matrix(num_qubits: int) -> np.ndarray:
    """
    Bit table of all basis indices.

    Returns:
        Integer array of shape (2^n, n) where entry [x, j] is bit j of x
    """
    indices = np.arange(2 ** num_qubits)
    return (indices[:, None] >> np.arange(num_qubits)[None, :]) & 1


def basis_state(n: int, index: int = 0) -> StateVector:
    """Computational basis state |index> on n qubits."""
    _check_qubit_count(n)
    if not 0 <= index < 2 ** n:
        raise SizeError(f"Basis index {index} out of range for {n} qubits")
    amps = np.zeros(2 ** n, dtype=complex)
    amps[index] = 1.0
    return StateVector(n, amps)


def uniform_superposition(n: int) -> StateVector:
    """
    Equal superposition over all 2^n basis states.

    Args:
        n: Number of qubits, 1 <= n <= MAX_QUBITS

    Returns:
        State with every amplitude equal to 2^(-n/2)
    """
    _check_qubit_count(n)
    amps = np.full(2 ** n, 2.0 ** (-n / 2), dtype=complex)
    return StateVector(n, amps)


def circular_superposition(n: int) -> StateVector:
    """
    Product of (|0> + i|1>) / sqrt(2) on every qubit: the +Y eigenstate,
    with <Z> = 0 and <Y> = 1 per qubit. Amplitude of |x> is
    i^popcount(x) * 2^(-n/2).
    """
    _check_qubit_count(n)
    popcount = bit_matrix(n).sum(axis=1)
    amps = (1j ** popcount) * 2.0 ** (-n / 2)
    return StateVector(n, amps)


def apply_single_qubit(state: StateVector, qubit: int, matrix: np.ndarray) -> StateVector:
    """
    Apply a 2x2 operator to one qubit.

    Args:
        state: Input state
        qubit: Target qubit index
        matrix: 2x2 complex matrix

    Returns:
        New state
    """
    _check_qubit(state, qubit)
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (2, 2):
        raise SizeError(f"Single-qubit operator must be 2x2, got {matrix.shape}")

    n = state.num_qubits
    # axis 1 is the target bit; higher bits on axis 0, lower bits on axis 2
    psi = state.amplitudes.reshape(2 ** (n - qubit - 1), 2, 2 ** qubit)
    out = np.einsum('ab,ibj->iaj', matrix, psi)
    return StateVector(n, out.reshape(-1))


def ry_matrix(angle: float) -> np.ndarray:
    c = np.cos(angle / 2.0)
    s = np.sin(angle / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rotate_y(state: StateVector, qubit: int, angle: float) -> StateVector:
    """
    Rotate one qubit about the Y axis.

    A pi/2 rotation maps |0> to (|0> + |1>)/sqrt(2), so applying it to every
    qubit of |0...0> yields the uniform superposition.

    Args:
        state: Input state
        qubit: Target qubit
        angle: Rotation angle in radians

    Returns:
        Rotated state
    """
    return apply_single_qubit(state, qubit, ry_matrix(angle))


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>, conjugate-linear in the first argument."""
    if a.num_qubits != b.num_qubits:
        raise SizeError(f"Dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: StateVector, b: StateVector) -> float:
    return abs(inner_product(a, b)) ** 2


def z_expectations(state: StateVector) -> np.ndarray:
    """
    <Z_j> for every qubit.

    Returns:
        Real array of length num_qubits with entries in [-1, 1]
    """
    signs = 1 - 2 * bit_matrix(state.num_qubits)
    return state.probabilities() @ signs


def measure_qubit(state: StateVector, qubit: int,
                  rng: Optional[np.random.Generator] = None) -> MeasurementOutcome:
    """
    Projectively measure one qubit.

    Args:
        state: Normalized input state
        qubit: Qubit to measure
        rng: Seeded random generator; a fresh default generator if omitted

    Returns:
        MeasurementOutcome with the collapsed, renormalized post-state
    """
    _check_qubit(state, qubit)
    if not state.is_normalized():
        raise SizeError(f"Cannot measure unnormalized state (norm {state.norm():.12f})")
    rng = rng if rng is not None else np.random.default_rng()

    ones = ((np.arange(state.dimension) >> qubit) & 1).astype(bool)
    probs = state.probabilities()
    p_one = float(np.sum(probs[ones]))

    bit = 1 if rng.random() < p_one else 0
    probability = p_one if bit == 1 else 1.0 - p_one
    if probability <= 0.0:
        raise InternalError(f"Drew zero-probability branch bit={bit} on qubit {qubit}")

    keep = ones if bit == 1 else ~ones
    post = np.where(keep, state.amplitudes, 0.0) / np.sqrt(probability)
    logger.debug(f"Measured qubit {qubit}: bit={bit} p={probability:.6f}")
    return MeasurementOutcome(qubit, bit, probability, StateVector(state.num_qubits, post))
