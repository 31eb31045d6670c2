"""
Quantum Liquid State Machine Simulator

Classical simulation of a qubit reservoir used as a liquid state machine,
together with adiabatic evolution of SAT Hamiltonians, a nonlinear flag
oracle for decision and counting, and Hebbian/ART unsupervised learning.
"""

__version__ = "1.0.0"
__author__ = "QLSM Team"

from .adiabatic import SatInstance, build_problem_hamiltonian, evolve, overlap_with_final_ground
from .config import ExperimentConfig, build_experiment_config
from .filters import FilterBank, FilterSpec, default_filter_bank
from .hebbian import ContextNetwork, HebbianConfig, unsupervised_session
from .instance_loader import InstanceLoader
from .nonlinear_oracle import OracleFunction, run_np_decision, run_sharp_p_count
from .readout import ReadoutModel, train_readout
from .reservoir import InputSignal, QuantumLiquid, ReservoirGraph, build_reservoir
from .results import ResultRecord, ResultWriter
from .signal_generator import SignalGenerator
from .statevec import StateVector

__all__ = [
    "SatInstance",
    "build_problem_hamiltonian",
    "evolve",
    "overlap_with_final_ground",
    "ExperimentConfig",
    "build_experiment_config",
    "FilterBank",
    "FilterSpec",
    "default_filter_bank",
    "ContextNetwork",
    "HebbianConfig",
    "unsupervised_session",
    "InstanceLoader",
    "OracleFunction",
    "run_np_decision",
    "run_sharp_p_count",
    "ReadoutModel",
    "train_readout",
    "InputSignal",
    "QuantumLiquid",
    "ReservoirGraph",
    "build_reservoir",
    "ResultRecord",
    "ResultWriter",
    "SignalGenerator",
    "StateVector",
]
