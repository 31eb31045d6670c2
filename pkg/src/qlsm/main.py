#!/usr/bin/env python3
"""
Main Entry Point for the Quantum Liquid State Machine Simulator

Subcommands:
  adiabatic  overlap sweep and gap profile of an adiabatic SAT evolution
  lsm        liquid run, separation and fading-memory checks, readout training
  solve      nonlinear-oracle decision and counting with a brute-force cross-check
  learn      unsupervised Hebbian/ART session on a pattern stream
  props      the invariant suite

Exit status: 0 success, 1 cross-check failure, 2 configuration, ingestion
or domain error.
"""

import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional

import colorlog
import numpy as np
import pandas as pd

from qlsm import plotting
from qlsm.adiabatic import (
    SatInstance,
    build_problem_hamiltonian,
    gap_profile,
    interpolate,
    spectrum,
    sweep_overlaps,
)
from qlsm.config import SUBCOMMANDS, ExperimentConfig, build_experiment_config
from qlsm.exceptions import (
    ConfigError,
    DomainError,
    IngestionError,
    InternalError,
    PreconditionError,
    QubitIndexError,
    SizeError,
    SolverError,
)
from qlsm.filters import FilterBank, default_filter_bank
from qlsm.hebbian import ContextNetwork, HebbianConfig, unsupervised_session
from qlsm.instance_loader import InstanceLoader
from qlsm.nonlinear_oracle import OracleFunction, brute_force, doubling_law_holds, run_traced
from qlsm.properties import run_property_suite
from qlsm.readout import (
    ApproximationReport,
    approximation_report,
    build_recall_dataset,
    temporal_split,
    train_readout,
)
from qlsm.reservoir import (
    InputSignal,
    QuantumLiquid,
    ReservoirGraph,
    build_reservoir,
    check_pointwise_separation,
    estimate_fading_memory,
    require_valid,
)
from qlsm.results import ResultRecord, ResultWriter
from qlsm.signal_generator import SignalGenerator

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE_ERROR = 2

SEPARATION_PASS_RATE = 0.99

USER_ERRORS = (ConfigError, IngestionError, DomainError, SizeError, QubitIndexError,
               PreconditionError, SolverError, FileNotFoundError)


def setup_logging(level: str = "INFO", log_file: Optional[str] = None):
    """
    Setup logging configuration.

    Args:
        level: Logging level
        log_file: Optional log file path
    """
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

    console = logging.StreamHandler()
    console.setFormatter(colorlog.ColoredFormatter('%(log_color)s' + log_format))
    handlers: List[logging.Handler] = [console]

    if log_file:
        log_path = Path(log_file)
        log_path.parent.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(logging.Formatter(log_format))
        handlers.append(file_handler)

    logging.basicConfig(
        level=getattr(logging, level.upper()),
        handlers=handlers,
        force=True,
    )


def _new_record(cfg: ExperimentConfig) -> ResultRecord:
    return ResultRecord(cfg.subcommand, cfg.config_hash, cfg.seed)


def _writer(cfg: ExperimentConfig) -> ResultWriter:
    return ResultWriter(cfg.subcommand_dir, cfg.config_hash, cfg.seed)


def _header(cfg: ExperimentConfig) -> str:
    return f"config_hash={cfg.config_hash}, seed={cfg.seed}"


def _plots_enabled(cfg: ExperimentConfig) -> bool:
    return bool(cfg.values['output'].get('plot', False))


def cmd_adiabatic(cfg: ExperimentConfig) -> ResultRecord:
    """
    Overlap sweep over the T list on a CNF instance, plus the gap profile.

    Cross-check: the ground energy of H(1) equals the minimum number of
    violated clauses found by enumeration.
    """
    section = cfg.section
    record, writer = _new_record(cfg), _writer(cfg)

    instance = InstanceLoader().load_file(section['instance'])
    if not isinstance(instance, SatInstance):
        raise ConfigError("adiabatic.instance must be a DIMACS-CNF file", field='adiabatic.instance')
    total_times = section['total_times']
    if not total_times:
        raise ConfigError("T list is empty", field='adiabatic.total_times')

    terms = build_problem_hamiltonian(instance)
    rows = sweep_overlaps(terms, [float(t) for t in total_times], section['steps_per_unit_time'])
    profile = gap_profile(terms, section['gap_samples'])

    sweep = pd.DataFrame({
        'T': [t for t, _ in rows],
        'overlap': [r.value for _, r in rows],
    })
    writer.write_csv(record, 'overlap_sweep', sweep)
    writer.write_csv(record, 'gap_profile', pd.DataFrame(profile, columns=['s', 'value']))

    overlaps = sweep['overlap'].tolist()
    for t, value in zip(sweep['T'], overlaps):
        if not -1e-12 <= value <= 1.0 + 1e-12:
            record.add_mismatch('overlap_range', '[0, 1]', value, T=t)

    ground_energy = float(spectrum(interpolate(terms, 1.0), 1.0).eigenvalues[0])
    min_violations = int(instance.violated_counts().min())
    if abs(ground_energy - min_violations) > 1e-9:
        record.add_mismatch('final_ground_energy', min_violations, ground_energy)

    record.metrics = {
        'num_vars': instance.num_vars,
        'num_clauses': len(instance.clauses),
        'satisfying_assignments': int(instance.satisfying_mask().sum()),
        'final_overlap': overlaps[-1],
        'final_at_least_initial': overlaps[-1] >= overlaps[0],
        'ground_degeneracy': rows[-1][1].degeneracy,
        'degenerate_times': [t for t, r in rows if r.degenerate],
        'min_gap': min(g for _, g in profile),
        'final_ground_energy': ground_energy,
    }

    if _plots_enabled(cfg):
        plotting.plot_overlap_sweep(sweep['T'], overlaps, writer.figure_path(record, 'overlap_sweep_plot'),
                                    _header(cfg))
        plotting.plot_gap_profile([s for s, _ in profile], [g for _, g in profile],
                                  writer.figure_path(record, 'gap_profile_plot'), _header(cfg))
    return record


def _reservoir_from(section: Dict, channels: int, seed: int) -> ReservoirGraph:
    res = section['reservoir']
    return build_reservoir(res['nodes'], channels, res['connectivity'], seed, res['field_scale'])


def _recall_report(graph: ReservoirGraph, signal: InputSignal, bank: FilterBank, delay: int,
                   regularization: float, leak: float, rest_state: str,
                   train_fraction: float = 0.8, rho: float = np.inf) -> ApproximationReport:
    _, trajectory = QuantumLiquid(graph, leak, rest_state).run_array(signal)
    inputs, targets = build_recall_dataset(trajectory, bank, signal, delay)
    train, test = temporal_split(inputs, targets, train_fraction)
    model = train_readout(train, regularization, bank.descriptor_hash())
    return approximation_report(model, test, rho, train)


def cmd_lsm(cfg: ExperimentConfig) -> ResultRecord:
    """
    Build the reservoir, run it on the input signal, check separation and
    fading memory, and train a delayed-recall readout.

    Cross-checks: at least 99% of the random pairs are separated and the
    divergence curve is certified as fading.
    """
    section = cfg.section
    record, writer = _new_record(cfg), _writer(cfg)
    sig_cfg, res_cfg = section['signal'], section['reservoir']
    leak, rest_state = res_cfg['leak'], res_cfg['rest_state']

    generator = SignalGenerator(sig_cfg, seed=cfg.sub_seed('signals'))
    if sig_cfg['input']:
        signal = InstanceLoader(sig_cfg).load_file(sig_cfg['input'])
        if not isinstance(signal, InputSignal):
            raise ConfigError("lsm.signal.input must be a signal CSV", field='lsm.signal.input')
        generator.dt = signal.dt
    else:
        signal = generator.generate_signal(sig_cfg['num_samples'], sig_cfg['channels'])
    require_valid(signal, 'input signal')

    graph = _reservoir_from(section, signal.channels, cfg.sub_seed('graph'))
    bank = default_filter_bank(graph.num_nodes, section['filter_bank']['max_lag'])
    liquid = QuantumLiquid(graph, leak, rest_state)
    times, trajectory = liquid.run_array(signal)

    frame = pd.DataFrame(trajectory, columns=[f"z{i}" for i in range(graph.num_nodes)])
    frame.insert(0, 't', times)
    writer.write_csv(record, 'trajectory', frame)
    writer.write_artifact_json(record, 'graph', {'graph': graph.to_dict()})

    sep_cfg = section['separation']
    separated = 0
    for _ in range(sep_cfg['pairs']):
        u, v = generator.generate_pair(signal.num_samples, signal.channels)
        separated += check_pointwise_separation(graph, bank, u, v, sep_cfg['threshold'],
                                                leak, rest_state).separated
    separation_rate = separated / sep_cfg['pairs'] if sep_cfg['pairs'] else None

    fm_cfg = section['fading_memory']
    fading = estimate_fading_memory(graph, bank, signal, fm_cfg['pairs'], fm_cfg['windows'],
                                    cfg.sub_seed('pairs'), leak, rest_state,
                                    fm_cfg['perturbation_length'], fm_cfg['decay_ratio'])
    writer.write_csv(record, 'divergence_curve', fading.to_frame())

    ro_cfg = section['readout']
    report = _recall_report(graph, signal, bank, ro_cfg['delay'], ro_cfg['regularization'], leak,
                            rest_state, ro_cfg['train_fraction'], ro_cfg['rho'])

    if separation_rate is not None and separation_rate < SEPARATION_PASS_RATE:
        record.add_mismatch('separation_rate', f">= {SEPARATION_PASS_RATE}", separation_rate,
                            pairs=sep_cfg['pairs'])
    if not fading.certified:
        record.add_mismatch('fading_memory', 'fading memory certified', fading.flag,
                            mean_divergence=fading.mean_divergence)

    record.metrics = {
        'nodes': graph.num_nodes,
        'edges': graph.edge_count,
        'samples': signal.num_samples,
        'separation_pass_rate': separation_rate,
        'fading_memory_flag': fading.flag,
        'fading_memory_certified': fading.certified,
        'nonincreasing_fraction': fading.nonincreasing_fraction,
        'mean_divergence': fading.mean_divergence,
        'test_nrmse': report.nrmse,
        'baseline_nrmse': report.baseline_nrmse,
        'nrmse_improvement': report.improvement,
        'sup_error': report.sup_error,
        'approximation_passed': report.passed,
    }

    if _plots_enabled(cfg):
        plotting.plot_divergence_curve(fading.windows, fading.mean_divergence, fading.spread,
                                       writer.figure_path(record, 'divergence_curve_plot'), _header(cfg))
    return record


def cmd_solve(cfg: ExperimentConfig) -> ResultRecord:
    """
    Decision and count through the nonlinear pairing procedure, checked
    against exhaustive evaluation; any mismatch is recorded in the diff.
    """
    section = cfg.section
    record, writer = _new_record(cfg), _writer(cfg)

    loaded = InstanceLoader().load_file(section['instance'])
    if isinstance(loaded, SatInstance):
        oracle = OracleFunction.from_sat(loaded)
    elif isinstance(loaded, OracleFunction):
        oracle = loaded
    else:
        raise ConfigError("solve.instance must be a CNF file or a truth table", field='solve.instance')

    decision_run = run_traced(oracle, counting=False, order=section['order'])
    count_run = run_traced(oracle, counting=True, order=section['order'])
    expected_decision, expected_count = brute_force(oracle)

    if decision_run.decision != expected_decision:
        record.add_mismatch('decision', expected_decision, decision_run.decision)
    if count_run.count != expected_count:
        record.add_mismatch('count', expected_count, count_run.count)
    if not doubling_law_holds(decision_run.true_counts, oracle.n):
        record.add_mismatch('doubling_bound', 'c <= c\' <= min(2c, 2^n)', decision_run.true_counts)
    for trace in decision_run.traces:
        if not trace.matches_pair_rule(counting=False):
            record.add_mismatch('pair_rule', 'OR of pair', 'other', iteration=trace.iteration)

    writer.write_csv(record, 'flag_trace', pd.DataFrame({
        'iteration': list(range(len(decision_run.true_counts))),
        'bit': [None] + decision_run.order,
        'flagged_components': decision_run.true_counts,
    }))

    record.metrics = {
        'n': oracle.n,
        'decision': decision_run.decision,
        'count': count_run.count,
        'brute_force_decision': expected_decision,
        'brute_force_count': expected_count,
        'oracle_match': decision_run.decision == expected_decision and count_run.count == expected_count,
        'iterations': decision_run.iterations,
        'decision_trace_hash': decision_run.trace_hash,
        'count_trace_hash': count_run.trace_hash,
    }
    return record


def cmd_learn(cfg: ExperimentConfig) -> ResultRecord:
    """
    Unsupervised session on a constant-pattern stream; reports the
    category log, the weight trajectory and the delayed-recall NRMSE of
    the graph before and after adaptation.

    Cross-checks: no coupling exceeds the cap, and a stream of two or more
    distinct patterns opens at least two categories.
    """
    section = cfg.section
    record, writer = _new_record(cfg), _writer(cfg)
    res_cfg = section['reservoir']
    leak, rest_state = res_cfg['leak'], res_cfg['rest_state']

    patterns = section['patterns']
    if not patterns:
        raise ConfigError("patterns is empty", field='learn.patterns')
    channels = len(patterns[0])
    if any(len(p) != channels for p in patterns):
        raise ConfigError("all patterns need the same number of channels", field='learn.patterns')

    generator = SignalGenerator(seed=cfg.sub_seed('signals'))
    stream = generator.pattern_stream(patterns, section['samples_per_pattern'], section['repeats'])
    graph = _reservoir_from(section, channels, cfg.sub_seed('graph'))
    net = ContextNetwork(graph.num_nodes, section['art']['vigilance'], section['art']['learning_rate'])
    hebbian = HebbianConfig(**section['hebbian'])

    ro_cfg = section['readout']
    bank = default_filter_bank(graph.num_nodes)
    recall_signal = generator.generate_signal(ro_cfg['num_samples'], channels)
    before = _recall_report(graph, recall_signal, bank, ro_cfg['delay'], ro_cfg['regularization'], leak, rest_state)

    session = unsupervised_session(graph, stream, net, hebbian, section['epochs'], leak, rest_state)
    after = _recall_report(session.graph, recall_signal, bank, ro_cfg['delay'], ro_cfg['regularization'],
                           leak, rest_state)

    weights = session.weight_frame()
    writer.write_csv(record, 'category_log', weights[['step', 'category']])
    writer.write_csv(record, 'weight_trajectory', weights)
    writer.write_artifact_json(record, 'adapted_graph', {'graph': session.graph.to_dict()})

    max_weight = max((float(np.max(np.abs(w))) for w in session.weight_rows), default=0.0)
    if max_weight > hebbian.weight_cap:
        record.add_mismatch('weight_cap', hebbian.weight_cap, max_weight)
    distinct_patterns = len({tuple(p) for p in patterns})
    if distinct_patterns >= 2 and section['epochs'] > 0 and session.categories_seen < 2:
        record.add_mismatch('categories_seen', '>= 2', session.categories_seen,
                            distinct_patterns=distinct_patterns)

    record.metrics = {
        'epochs': section['epochs'],
        'steps': len(session.category_log),
        'categories_seen': session.categories_seen,
        'num_categories': net.num_categories,
        'max_abs_weight': max_weight,
        'graph_unchanged': bool(np.array_equal(session.graph.couplings, graph.couplings)),
        'nrmse_before': before.nrmse,
        'nrmse_after': after.nrmse,
    }
    return record


def cmd_props(cfg: ExperimentConfig) -> ResultRecord:
    """Run the invariant suite; every failed property lands in the diff."""
    record, writer = _new_record(cfg), _writer(cfg)
    results = run_property_suite(cfg.section, cfg.seed)

    writer.write_csv(record, 'properties', pd.DataFrame({
        'property': [r.name for r in results],
        'passed': [r.passed for r in results],
        'failures': [len(r.failures) for r in results],
    }))
    for r in results:
        for failure in r.failures:
            record.add_mismatch(r.name, 'property holds', 'violated', **failure)
    record.metrics = {r.name: {'passed': r.passed, **r.metrics} for r in results}
    return record


COMMANDS: Dict[str, Callable[[ExperimentConfig], ResultRecord]] = {
    'adiabatic': cmd_adiabatic,
    'lsm': cmd_lsm,
    'solve': cmd_solve,
    'learn': cmd_learn,
    'props': cmd_props,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('-c', '--config', help='Run document (JSON or YAML) merged over the defaults')
    common.add_argument('-o', '--out', help='Output directory')
    common.add_argument('--seed', type=int, help='Global seed (overrides QLSM_SEED and the config)')
    common.add_argument('--plot', action='store_true', help='Also write PNG figures')
    common.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'],
                        help='Logging level')
    common.add_argument('--log-file', help='Log file path')

    parser = argparse.ArgumentParser(
        prog='qlsm',
        description="Quantum Liquid State Machine Simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  qlsm adiabatic --out results/
  qlsm lsm --config run.json --seed 7
  qlsm solve --config solve.yaml
  qlsm learn --plot
  qlsm props
        """
    )
    subparsers = parser.add_subparsers(dest='command', required=True)
    for name in SUBCOMMANDS:
        subparsers.add_parser(name, parents=[common], help=(COMMANDS[name].__doc__ or '').strip().split('\n')[0])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point."""
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level or 'INFO', args.log_file)

    try:
        overrides = {'output': {'plot': True}} if args.plot else None
        cfg = build_experiment_config(args.command, args.config, args.seed, args.out, overrides)
        log_cfg = cfg.values['logging']
        setup_logging(args.log_level or log_cfg.get('level', 'INFO'), args.log_file or log_cfg.get('file'))

        started = time.perf_counter()
        record = COMMANDS[args.command](cfg)
        record.wall_clock = time.perf_counter() - started
        _writer(cfg).write_all(record)
    except USER_ERRORS as e:
        logger.error(f"Error: {e}")
        return EXIT_USAGE_ERROR
    except KeyboardInterrupt:
        logger.info("Operation cancelled by user")
        return EXIT_CHECK_FAILED
    except InternalError as e:
        logger.error(f"Internal check failed: {e}", exc_info=True)
        return EXIT_CHECK_FAILED

    if not record.passed:
        logger.error(f"{args.command}: {len(record.diff)} cross-check mismatches, see "
                     f"{cfg.subcommand_dir / 'result.json'}")
        return EXIT_CHECK_FAILED
    logger.info(f"{args.command} complete in {record.wall_clock:.2f} s")
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
