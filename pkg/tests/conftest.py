"""
Pytest configuration and shared fixtures
"""

import pytest
import sys
from pathlib import Path

import numpy as np

# Add src to path
src_path = Path(__file__).parent.parent / 'src'
sys.path.insert(0, str(src_path))

PROJECT_ROOT = Path(__file__).parent.parent
INSTANCE_DIR = PROJECT_ROOT / 'data' / 'instances'


@pytest.fixture
def instance_dir():
    """Directory of the bundled CNF instances and truth tables."""
    return INSTANCE_DIR


@pytest.fixture
def unique_instance():
    """3-variable CNF satisfied only by basis index 3."""
    from qlsm.signal_generator import unique_solution_instance
    return unique_solution_instance()


@pytest.fixture
def small_graph():
    """4-node, single-channel reservoir with a fixed seed."""
    from qlsm.reservoir import build_reservoir
    return build_reservoir(4, 1, 1.0, seed=11)


@pytest.fixture
def smooth_signal():
    """Random signal in U with 60 samples."""
    from qlsm.signal_generator import SignalGenerator
    return SignalGenerator(seed=5).generate_signal(60)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
