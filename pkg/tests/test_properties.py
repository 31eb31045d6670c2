"""
Tests for the invariant suite, run with reduced sizes
"""

import pytest

from qlsm.properties import (
    PROPERTY_SUITE,
    PropertyResult,
    check_adiabatic_sweep,
    check_art_stability,
    check_doubling_law,
    check_fading_memory,
    check_hamiltonian_assembly,
    check_hebbian_bounds,
    check_norm_conservation,
    check_np_exhaustive,
    check_readout_baseline,
    check_reproducibility,
    check_separation,
    check_sharp_p_equivalence,
    check_spectrum_contract,
    run_property_suite,
)


@pytest.fixture
def settings():
    return {
        'np_bits': 2,
        'count_instances': [[4, 5]],
        'doubling_oracles': 20,
        'doubling_max_bits': 5,
        'assembly_instances': 4,
        'assembly_max_vars': 4,
        'spectrum_samples': 5,
        'norm_steps': 200,
        'norm_qubits': 2,
        'hebbian_steps': 300,
        'separation_pairs': 10,
        'fading_trials': 10,
        'readout_seeds': 3,
        'art_trials': 20,
    }


class TestPropertyResult:
    """Test suite for check outcomes."""

    def test_fail_records_details(self):
        result = PropertyResult('x', True)
        result.fail(expected=1, actual=2)
        assert not result.passed
        assert result.failures == [{'expected': 1, 'actual': 2}]


class TestChecks:
    """Test suite for individual invariant checks."""

    def test_np_exhaustive(self, settings):
        result = check_np_exhaustive(settings, 42)
        assert result.passed
        assert result.metrics['functions'] == 16

    def test_sharp_p_equivalence(self, settings):
        result = check_sharp_p_equivalence(settings, 42)
        assert result.passed
        assert result.metrics['cases'] == 16 + 5

    def test_doubling_law(self, settings):
        assert check_doubling_law(settings, 42).passed

    def test_hamiltonian_assembly(self, settings):
        result = check_hamiltonian_assembly(settings, 42)
        assert result.passed
        assert result.metrics['max_error'] <= 1e-12

    def test_spectrum_contract(self, settings):
        assert check_spectrum_contract(settings, 42).passed

    def test_norm_conservation(self, settings):
        result = check_norm_conservation(settings, 42)
        assert result.passed
        assert result.metrics['max_drift'] < 1e-6

    def test_adiabatic_sweep(self, settings):
        result = check_adiabatic_sweep(settings, 42)
        assert result.passed
        assert result.metrics['overlaps'][-1] >= 0.99

    def test_separation(self, settings):
        result = check_separation(settings, 42)
        assert result.passed
        assert result.metrics['separation_rate'] == 1.0

    def test_fading_memory(self, settings):
        result = check_fading_memory(settings, 42)
        assert result.passed
        assert result.metrics['pairs_nonincreasing'] >= 0.9
        assert result.metrics['closed_flag'] == "fading memory not certified"
        divergence = result.metrics['leaky_mean_divergence']
        assert divergence[-1] <= 0.5 * divergence[0]

    def test_readout_baseline(self, settings):
        result = check_readout_baseline(settings, 42)
        assert result.passed
        assert len(result.metrics['improvements']) == 3
        assert result.metrics['median_improvement'] >= 0.2

    def test_hebbian_bounds(self, settings):
        result = check_hebbian_bounds(settings, 42)
        assert result.passed
        assert result.metrics['saturated_weight'] == 1.0

    def test_art_stability(self, settings):
        result = check_art_stability(settings, 42)
        assert result.passed
        assert result.metrics['stable_fraction'] == 1.0

    def test_reproducibility(self, settings):
        assert check_reproducibility(settings, 42).passed

    def test_seed_changes_trace(self, settings):
        a = check_reproducibility(settings, 1).metrics['trace_hash']
        b = check_reproducibility(settings, 2).metrics['trace_hash']
        assert a != b


class TestSuite:
    """Test suite for running several checks."""

    def test_selected_checks_in_order(self, settings):
        results = run_property_suite(settings, 42, names=['hebbian_bounds', 'np_exhaustive'])
        assert [r.name for r in results] == ['hebbian_bounds', 'np_exhaustive']

    def test_unknown_check(self, settings):
        with pytest.raises(KeyError):
            run_property_suite(settings, 42, names=['telepathy'])

    def test_suite_names_match_results(self):
        assert set(PROPERTY_SUITE) >= {'np_exhaustive', 'separation', 'fading_memory', 'art_stability'}
