"""
Property Suite Module

Desk-scale invariant checks exercised by the ``props`` subcommand. Every
check takes the ``props`` configuration section and a seed and returns a
PropertyResult; a failed check carries the mismatching values.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from .adiabatic import (
    ClauseTerm,
    Hamiltonian,
    Schedule,
    build_base_hamiltonian,
    build_problem_hamiltonian,
    interpolate,
    evolve,
    spectrum,
    sweep_overlaps,
    total_base,
    total_problem,
)
from .config import sub_seed
from .exceptions import InternalError
from .filters import default_filter_bank
from .hebbian import ContextNetwork, HebbianConfig, hebbian_update
from .nonlinear_oracle import (
    OracleFunction,
    brute_force,
    doubling_law_holds,
    run_np_decision,
    run_sharp_p_count,
    run_traced,
)
from .readout import approximation_report, build_recall_dataset, temporal_split, train_readout
from .reservoir import QuantumLiquid, build_reservoir, check_pointwise_separation, estimate_fading_memory
from .signal_generator import SignalGenerator, unique_solution_instance
from .statevec import uniform_superposition

logger = logging.getLogger(__name__)

ASSEMBLY_TOLERANCE = 1e-12
EIGEN_RESIDUAL_TOLERANCE = 1e-8
HERMITICITY_LIMIT = 1e-10
NORM_DRIFT_LIMIT = 1e-6
RECALL_DELAY = 3
FADING_WINDOWS = [1, 2, 4, 8, 16]


@dataclass
class PropertyResult:
    """Outcome of one invariant check."""

    name: str
    passed: bool
    metrics: Dict[str, Any] = field(default_factory=dict)
    failures: List[Dict[str, Any]] = field(default_factory=list)

    def fail(self, **details):
        self.failures.append(details)
        self.passed = False


def _all_tables(n: int):
    size = 2 ** n
    for code in range(2 ** size):
        yield OracleFunction(n, np.array([(code >> i) & 1 for i in range(size)]))


def check_np_exhaustive(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Decision equals brute-force OR for every Boolean function on np_bits bits."""
    n = settings.get('np_bits', 3)
    result = PropertyResult('np_exhaustive', True)
    checked = 0
    for f in _all_tables(n):
        expected, _ = brute_force(f)
        actual = run_np_decision(f)
        if actual != expected:
            result.fail(table=f.table.astype(int).tolist(), expected=expected, actual=actual)
        checked += 1
    result.metrics = {'functions': checked, 'mismatches': len(result.failures)}
    return result


def check_sharp_p_equivalence(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Counts equal brute force on all small tables and on random 3-CNF instances."""
    result = PropertyResult('sharp_p_equivalence', True)
    checked = 0
    for f in _all_tables(settings.get('np_bits', 3)):
        if run_sharp_p_count(f) != brute_force(f)[1]:
            result.fail(table=f.table.astype(int).tolist(), expected=brute_force(f)[1],
                        actual=run_sharp_p_count(f))
        checked += 1

    generator = SignalGenerator(seed=sub_seed(seed, 'instances'))
    for num_vars, count in settings.get('count_instances', [[4, 50], [8, 20]]):
        for _ in range(count):
            instance = generator.random_cnf(num_vars, 2 * num_vars, min(3, num_vars))
            f = OracleFunction.from_sat(instance)
            expected = brute_force(f)[1]
            actual = run_sharp_p_count(f)
            if actual != expected:
                result.fail(dimacs=instance.to_dimacs(), expected=expected, actual=actual)
            checked += 1
    result.metrics = {'cases': checked, 'mismatches': len(result.failures)}
    return result


def check_doubling_law(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """
    Flagged-component counts obey c <= c' <= min(2c, 2^n) on random oracles
    and grow exactly as min(2c, 2^n) on single-solution oracles.
    """
    result = PropertyResult('doubling_law', True)
    rng = np.random.default_rng(sub_seed(seed, 'sweeps'))
    generator = SignalGenerator(seed=sub_seed(seed, 'instances'))
    max_bits = settings.get('doubling_max_bits', 8)
    exact_on_random = 0
    trials = settings.get('doubling_oracles', 100)

    for trial in range(trials):
        n = int(rng.integers(1, max_bits + 1))
        order = rng.permutation(n).tolist()
        run = run_traced(generator.random_oracle(n), counting=False, order=order)
        if not doubling_law_holds(run.true_counts, n):
            result.fail(trial=trial, n=n, true_counts=run.true_counts)
        exact_on_random += doubling_law_holds(run.true_counts, n, exact=True)

        single = run_traced(generator.single_solution_oracle(n), counting=False, order=order)
        if not doubling_law_holds(single.true_counts, n, exact=True):
            result.fail(trial=trial, n=n, single_true_counts=single.true_counts)

    result.metrics = {'oracles': trials, 'exact_doubling_on_random': exact_on_random}
    return result


def check_hamiltonian_assembly(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Clause-term reassembly matches H_B and H_P; endpoints are exact."""
    result = PropertyResult('hamiltonian_assembly', True)
    rng = np.random.default_rng(sub_seed(seed, 'sweeps'))
    generator = SignalGenerator(seed=sub_seed(seed, 'instances'))
    worst = 0.0

    for trial in range(settings.get('assembly_instances', 20)):
        n = int(rng.integers(2, settings.get('assembly_max_vars', 6) + 1))
        instance = generator.random_cnf(n, int(rng.integers(1, 2 * n + 1)), min(3, n))
        terms = build_problem_hamiltonian(instance)
        h_base = build_base_hamiltonian(n).matrix
        h_problem = np.diag(instance.violated_counts().astype(complex))

        for s in (0.0, 0.25, 0.5, 0.75, 1.0):
            expected = (1.0 - s) * h_base + s * h_problem
            error = float(np.max(np.abs(interpolate(terms, s).matrix - expected)))
            worst = max(worst, error)
            if error > ASSEMBLY_TOLERANCE:
                result.fail(trial=trial, s=s, error=error)

        if not np.array_equal(interpolate(terms, 0.0).matrix, total_base(terms).matrix):
            result.fail(trial=trial, endpoint=0)
        if not np.array_equal(interpolate(terms, 1.0).matrix, total_problem(terms).matrix):
            result.fail(trial=trial, endpoint=1)

    result.metrics = {'max_error': worst}
    return result


def check_spectrum_contract(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Sorted eigenvalues, small ground-space residuals, Hermitian H(s)."""
    result = PropertyResult('spectrum_contract', True)
    terms = build_problem_hamiltonian(unique_solution_instance())
    worst_residual = 0.0
    worst_hermiticity = 0.0

    for s in np.linspace(0.0, 1.0, settings.get('spectrum_samples', 11)):
        h = interpolate(terms, float(s))
        snapshot = spectrum(h, float(s))
        if np.any(np.diff(snapshot.eigenvalues) < 0):
            result.fail(s=float(s), unsorted=snapshot.eigenvalues.tolist())
        vectors = snapshot.ground_space
        residual = float(np.max(np.linalg.norm(h.matrix @ vectors - snapshot.eigenvalues[0] * vectors, axis=0)))
        worst_residual = max(worst_residual, residual)
        worst_hermiticity = max(worst_hermiticity, h.hermiticity_residual())
        if residual >= EIGEN_RESIDUAL_TOLERANCE:
            result.fail(s=float(s), residual=residual)
        if h.hermiticity_residual() >= HERMITICITY_LIMIT:
            result.fail(s=float(s), hermiticity=h.hermiticity_residual())

    result.metrics = {'max_residual': worst_residual, 'max_hermiticity_residual': worst_hermiticity}
    return result


def _random_hermitian(rng: np.random.Generator, n: int) -> Hamiltonian:
    dim = 2 ** n
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return Hamiltonian(n, (a + a.conj().T) / 2)


def check_norm_conservation(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Norm drift stays below 1e-6 over many evolution steps."""
    result = PropertyResult('norm_conservation', True)
    rng = np.random.default_rng(sub_seed(seed, 'sweeps'))
    n = settings.get('norm_qubits', 4)
    steps = settings.get('norm_steps', 10000)
    worst = 0.0

    for trial in range(3):
        terms = [ClauseTerm(0, _random_hermitian(rng, n), _random_hermitian(rng, n))]
        try:
            final = evolve(terms, Schedule(steps / 10.0, steps), uniform_superposition(n))
        except InternalError as e:
            result.fail(trial=trial, error=str(e))
            continue
        drift = abs(final.norm() - 1.0)
        worst = max(worst, drift)
        if drift >= NORM_DRIFT_LIMIT:
            result.fail(trial=trial, drift=drift)

    result.metrics = {'steps': steps, 'max_drift': worst}
    return result


def check_adiabatic_sweep(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Overlap reaches 0.99 at T=128 and never drops by more than 0.05 per doubling."""
    result = PropertyResult('adiabatic_sweep', True)
    terms = build_problem_hamiltonian(unique_solution_instance())
    rows = sweep_overlaps(terms, [2.0 ** k for k in range(8)])
    overlaps = [r.value for _, r in rows]

    if overlaps[-1] < 0.99:
        result.fail(check='final_overlap', expected='>= 0.99', actual=overlaps[-1])
    for (t_low, low), (t_high, high) in zip(rows, rows[1:]):
        if high.value < low.value - 0.05:
            result.fail(check='doubling', T=t_high, overlap=high.value, previous=low.value)

    result.metrics = {'total_times': [t for t, _ in rows], 'overlaps': overlaps}
    return result


def _signal_generator(seed: int, name: str) -> SignalGenerator:
    return SignalGenerator(seed=sub_seed(seed, name))


def check_separation(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """At least 99% of random distinct signal pairs are separated at 1e-6."""
    result = PropertyResult('separation', True)
    nodes = settings.get('separation_nodes', 6)
    graph = build_reservoir(nodes, 1, 0.5, sub_seed(seed, 'graph'))
    bank = default_filter_bank(nodes)
    generator = _signal_generator(seed, 'signals')
    pairs = settings.get('separation_pairs', 100)

    separated = 0
    for _ in range(pairs):
        u, v = generator.generate_pair(40)
        separated += check_pointwise_separation(graph, bank, u, v, 1e-6).separated
    rate = separated / pairs
    if rate < 0.99:
        result.fail(check='separation_rate', expected='>= 0.99', actual=rate)
    result.metrics = {'pairs': pairs, 'separation_rate': rate}
    return result


def check_fading_memory(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """
    Certified with the default leak, not certified without one. Each of the
    fading_trials pairs must show a nonincreasing divergence across the
    windows in at least 90% of cases.
    """
    result = PropertyResult('fading_memory', True)
    nodes = settings.get('separation_nodes', 6)
    graph = build_reservoir(nodes, 1, 0.5, sub_seed(seed, 'graph'))
    bank = default_filter_bank(nodes)
    base = _signal_generator(seed, 'signals').generate_signal(40)
    trials = settings.get('fading_trials', 50)
    windows = FADING_WINDOWS

    leaky = estimate_fading_memory(graph, bank, base, trials, windows, sub_seed(seed, 'pairs'), leak=0.1)
    closed = estimate_fading_memory(graph, bank, base, trials, windows, sub_seed(seed, 'pairs'), leak=0.0)
    if not leaky.certified:
        result.fail(check='leak_0.1', flag=leaky.flag, mean_divergence=leaky.mean_divergence)
    if closed.certified:
        result.fail(check='negative_control', flag=closed.flag, mean_divergence=closed.mean_divergence)

    result.metrics = {
        'pairs_nonincreasing': leaky.nonincreasing_fraction,
        'leaky_mean_divergence': leaky.mean_divergence,
        'closed_flag': closed.flag,
    }
    return result


def check_readout_baseline(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Median delayed-recall NRMSE at least 20% below the constant-mean baseline."""
    result = PropertyResult('readout_baseline', True)
    nodes = settings.get('separation_nodes', 6)
    bank = default_filter_bank(nodes)
    improvements = []

    for trial in range(settings.get('readout_seeds', 10)):
        trial_seed = sub_seed(seed, f"readout-{trial}")
        graph = build_reservoir(nodes, 1, 0.5, sub_seed(trial_seed, 'graph'))
        signal = _signal_generator(trial_seed, 'signals').generate_signal(200)
        _, trajectory = QuantumLiquid(graph).run_array(signal)
        inputs, targets = build_recall_dataset(trajectory, bank, signal, delay=RECALL_DELAY)
        train, test = temporal_split(inputs, targets)
        report = approximation_report(train_readout(train), test, rho=np.inf, train=train)
        improvements.append(report.improvement if report.improvement is not None else 0.0)

    median = float(np.median(improvements))
    if median < 0.2:
        result.fail(check='median_improvement', expected='>= 0.2', actual=median)
    result.metrics = {'improvements': improvements, 'median_improvement': median}
    return result


def check_hebbian_bounds(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Cap respected; a co-active pair grows monotonically to saturation."""
    result = PropertyResult('hebbian_bounds', True)
    rng = np.random.default_rng(sub_seed(seed, 'sweeps'))
    n = 4
    cfg = HebbianConfig(rate=0.05, weight_cap=1.0, decay=0.001)
    couplings = np.zeros((n, n))
    worst = 0.0
    for _ in range(settings.get('hebbian_steps', 10000)):
        couplings = hebbian_update(couplings, rng.uniform(-1, 1, n), rng.uniform(-1, 1, n), cfg)
        worst = max(worst, float(np.max(np.abs(couplings))))
    if worst > cfg.weight_cap:
        result.fail(check='cap', expected=cfg.weight_cap, actual=worst)

    no_decay = HebbianConfig(rate=0.05, weight_cap=1.0, decay=0.0)
    active = np.array([1.0, 1.0, 0.0, 0.0])
    w = np.zeros((n, n))
    trajectory = [0.0]
    for _ in range(40):
        w = hebbian_update(w, active, active, no_decay)
        trajectory.append(float(w[0, 1]))
    if np.any(np.diff(trajectory) < 0) or trajectory[-1] != no_decay.weight_cap:
        result.fail(check='saturation', trajectory=trajectory)

    result.metrics = {'max_abs_weight': worst, 'saturated_weight': trajectory[-1]}
    return result


def check_art_stability(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """A repeated pattern resonates with one category on every presentation."""
    result = PropertyResult('art_stability', True)
    rng = np.random.default_rng(sub_seed(seed, 'pairs'))
    trials = settings.get('art_trials', 100)
    stable = 0
    for trial in range(trials):
        net = ContextNetwork(4, vigilance=0.9, learning_rate=1.0)
        for _ in range(5):
            net.categorize(rng.random(4))
        pattern = rng.random(4)
        assigned = {net.categorize(pattern) for _ in range(10)}
        if len(assigned) == 1:
            stable += 1
        else:
            result.fail(trial=trial, categories=sorted(assigned))
    result.metrics = {'trials': trials, 'stable_fraction': stable / trials}
    return result


def check_reproducibility(settings: Dict[str, Any], seed: int) -> PropertyResult:
    """Identical seeds give bit-identical liquid trajectories and oracle traces."""
    result = PropertyResult('reproducibility', True)
    runs = []
    for _ in range(3):
        graph = build_reservoir(4, 1, 0.5, sub_seed(seed, 'graph'))
        signal = _signal_generator(seed, 'signals').generate_signal(30)
        _, z = QuantumLiquid(graph).run_array(signal)
        oracle = SignalGenerator(seed=sub_seed(seed, 'instances')).random_oracle(5)
        runs.append((z.tobytes(), run_traced(oracle, counting=True).trace_hash))
    if any(run != runs[0] for run in runs[1:]):
        result.fail(check='reruns_identical')
    result.metrics = {'reruns': len(runs), 'trace_hash': runs[0][1]}
    return result


PROPERTY_SUITE: Dict[str, Callable[[Dict[str, Any], int], PropertyResult]] = {
    'np_exhaustive': check_np_exhaustive,
    'sharp_p_equivalence': check_sharp_p_equivalence,
    'doubling_law': check_doubling_law,
    'hamiltonian_assembly': check_hamiltonian_assembly,
    'spectrum_contract': check_spectrum_contract,
    'norm_conservation': check_norm_conservation,
    'adiabatic_sweep': check_adiabatic_sweep,
    'separation': check_separation,
    'fading_memory': check_fading_memory,
    'readout_baseline': check_readout_baseline,
    'hebbian_bounds': check_hebbian_bounds,
    'art_stability': check_art_stability,
    'reproducibility': check_reproducibility,
}


def run_property_suite(settings: Dict[str, Any], seed: int,
                       names: Optional[Sequence[str]] = None) -> List[PropertyResult]:
    """
    Run the named checks (all of them by default) in suite order.

    Returns:
        One PropertyResult per check
    """
    selected = list(PROPERTY_SUITE) if names is None else list(names)
    results = []
    for name in selected:
        if name not in PROPERTY_SUITE:
            raise KeyError(f"Unknown property check: {name}")
        logger.info(f"Checking {name}...")
        outcome = PROPERTY_SUITE[name](settings, seed)
        logger.info(f"{name}: {'passed' if outcome.passed else 'FAILED'}")
        results.append(outcome)
    return results
