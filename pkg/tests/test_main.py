"""
End-to-end tests of the command-line interface
"""

import json

import pytest
import pandas as pd

from qlsm.config import SEED_ENV_VAR
from qlsm.instance_loader import save_signal_csv
from qlsm.main import EXIT_CHECK_FAILED, EXIT_OK, EXIT_USAGE_ERROR, build_parser, main
from qlsm.signal_generator import SignalGenerator


@pytest.fixture(autouse=True)
def clear_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV_VAR, raising=False)


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / 'results'


def run_document(tmp_path, document, name='run.json'):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def read_result(out_dir, command):
    return json.loads((out_dir / command / 'result.json').read_text())


SMALL_LSM = {
    'lsm': {
        'reservoir': {'nodes': 3},
        'signal': {'num_samples': 40},
        'separation': {'pairs': 2},
        'fading_memory': {'pairs': 10, 'windows': [1, 4, 16]},
        'readout': {'delay': 3},
    }
}

SMALL_LEARN = {
    'learn': {
        'reservoir': {'nodes': 3},
        'samples_per_pattern': 20,
        'repeats': 1,
        'epochs': 1,
        'readout': {'num_samples': 40},
    }
}


class TestParser:
    """Test suite for argument parsing."""

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_common_options(self):
        args = build_parser().parse_args(['solve', '--seed', '5', '--out', 'x', '--plot'])
        assert args.command == 'solve'
        assert args.seed == 5 and args.out == 'x' and args.plot


class TestSolveCommand:
    """Test suite for the solve subcommand."""

    def test_default_instance(self, out_dir):
        assert main(['solve', '--out', str(out_dir)]) == EXIT_OK
        result = read_result(out_dir, 'solve')
        assert result['passed']
        assert result['diff'] == []
        assert result['metrics']['count'] == result['metrics']['brute_force_count']
        assert 'wall_clock' not in result

    def test_contradiction(self, tmp_path, out_dir, instance_dir):
        config = run_document(tmp_path, {'solve': {'instance': str(instance_dir / 'contradiction.cnf')}})
        assert main(['solve', '-c', config, '-o', str(out_dir)]) == EXIT_OK
        metrics = read_result(out_dir, 'solve')['metrics']
        assert metrics['decision'] is False
        assert metrics['count'] == 0

    def test_truth_table(self, tmp_path, out_dir, instance_dir):
        config = run_document(tmp_path, {'solve': {'instance': str(instance_dir / 'parity_3bit.tt')}})
        assert main(['solve', '-c', config, '-o', str(out_dir)]) == EXIT_OK
        assert read_result(out_dir, 'solve')['metrics']['count'] == 4

    def test_wrong_line_count(self, tmp_path, out_dir):
        (tmp_path / 'bad.tt').write_text("0\n1\n1\n")
        config = run_document(tmp_path, {'solve': {'instance': 'bad.tt'}})
        assert main(['solve', '-c', config, '-o', str(out_dir)]) == EXIT_USAGE_ERROR

    def test_flag_trace_written(self, out_dir):
        main(['solve', '--out', str(out_dir)])
        path = out_dir / 'solve' / 'flag_trace.csv'
        assert path.read_text().startswith('# config_hash=')
        frame = pd.read_csv(path, comment='#')
        assert frame['flagged_components'].tolist()[-1] in (0, 16)

    def test_rerun_is_byte_identical(self, out_dir):
        main(['solve', '--out', str(out_dir), '--seed', '3'])
        first = (out_dir / 'solve' / 'result.json').read_bytes()
        main(['solve', '--out', str(out_dir), '--seed', '3'])
        assert (out_dir / 'solve' / 'result.json').read_bytes() == first

    def test_seed_from_environment(self, out_dir, monkeypatch):
        monkeypatch.setenv(SEED_ENV_VAR, '11')
        main(['solve', '--out', str(out_dir)])
        assert read_result(out_dir, 'solve')['seed'] == 11


class TestConfigErrors:
    """Test suite for user errors reported with exit status 2."""

    def test_unknown_key(self, tmp_path, out_dir):
        config = run_document(tmp_path, {'solve': {'bogus': 1}})
        assert main(['solve', '-c', config, '-o', str(out_dir)]) == EXIT_USAGE_ERROR

    def test_missing_config_file(self, tmp_path, out_dir):
        assert main(['solve', '-c', str(tmp_path / 'absent.json'), '-o', str(out_dir)]) == EXIT_USAGE_ERROR

    def test_empty_time_list(self, tmp_path, out_dir):
        config = run_document(tmp_path, {'adiabatic': {'total_times': []}})
        assert main(['adiabatic', '-c', config, '-o', str(out_dir)]) == EXIT_USAGE_ERROR

    def test_yaml_document(self, tmp_path, out_dir):
        path = tmp_path / 'run.yaml'
        path.write_text("solve:\n  order: [1, 0, 3, 2]\n")
        assert main(['solve', '-c', str(path), '-o', str(out_dir)]) == EXIT_OK


class TestAdiabaticCommand:
    """Test suite for the adiabatic subcommand."""

    def test_sweep_outputs(self, tmp_path, out_dir):
        config = run_document(tmp_path, {'adiabatic': {'total_times': [1, 8], 'gap_samples': 5}})
        assert main(['adiabatic', '-c', config, '-o', str(out_dir), '--plot']) == EXIT_OK
        result = read_result(out_dir, 'adiabatic')
        assert result['metrics']['final_ground_energy'] == pytest.approx(0.0, abs=1e-9)
        sweep = pd.read_csv(out_dir / 'adiabatic' / 'overlap_sweep.csv', comment='#')
        assert list(sweep.columns) == ['T', 'overlap']
        assert sweep['T'].tolist() == [1.0, 8.0]
        profile = pd.read_csv(out_dir / 'adiabatic' / 'gap_profile.csv', comment='#')
        assert list(profile.columns) == ['s', 'value']
        assert len(profile) == 5
        assert (out_dir / 'adiabatic' / 'gap_profile_plot.png').exists()


class TestLsmCommand:
    """Test suite for the lsm subcommand."""

    def test_generated_signal(self, tmp_path, out_dir):
        config = run_document(tmp_path, SMALL_LSM)
        assert main(['lsm', '-c', config, '-o', str(out_dir)]) == EXIT_OK
        result = read_result(out_dir, 'lsm')
        assert result['metrics']['nodes'] == 3
        assert result['metrics']['fading_memory_flag'] == "fading memory certified"
        assert result['metrics']['separation_pass_rate'] == 1.0
        trajectory = pd.read_csv(out_dir / 'lsm' / 'trajectory.csv', comment='#')
        assert list(trajectory.columns) == ['t', 'z0', 'z1', 'z2']
        graph = json.loads((out_dir / 'lsm' / 'graph.json').read_text())
        assert graph['seed'] == result['seed']

    def test_signal_from_csv(self, tmp_path, out_dir):
        save_signal_csv(SignalGenerator(seed=4).generate_signal(30), str(tmp_path / 'u.csv'))
        document = json.loads(json.dumps(SMALL_LSM))
        document['lsm']['signal']['input'] = 'u.csv'
        config = run_document(tmp_path, document)
        assert main(['lsm', '-c', config, '-o', str(out_dir)]) == EXIT_OK
        assert read_result(out_dir, 'lsm')['metrics']['samples'] == 30

    def test_signal_outside_domain(self, tmp_path, out_dir):
        (tmp_path / 'u.csv').write_text("t,ch0\n0.0,0.0\n0.05,3.0\n")
        document = json.loads(json.dumps(SMALL_LSM))
        document['lsm']['signal']['input'] = 'u.csv'
        config = run_document(tmp_path, document)
        assert main(['lsm', '-c', config, '-o', str(out_dir)]) == EXIT_USAGE_ERROR

    def test_rerun_is_byte_identical(self, tmp_path, out_dir):
        config = run_document(tmp_path, SMALL_LSM)
        main(['lsm', '-c', config, '-o', str(out_dir)])
        first = (out_dir / 'lsm' / 'trajectory.csv').read_bytes()
        main(['lsm', '-c', config, '-o', str(out_dir)])
        assert (out_dir / 'lsm' / 'trajectory.csv').read_bytes() == first

    def test_closed_liquid_fails_fading_check(self, tmp_path, out_dir):
        document = json.loads(json.dumps(SMALL_LSM))
        document['lsm']['reservoir']['leak'] = 0.0
        config = run_document(tmp_path, document)
        assert main(['lsm', '-c', config, '-o', str(out_dir)]) == EXIT_CHECK_FAILED
        result = read_result(out_dir, 'lsm')
        assert not result['passed']
        assert [d['check'] for d in result['diff']] == ['fading_memory']
        assert result['metrics']['fading_memory_certified'] is False


class TestLearnCommand:
    """Test suite for the learn subcommand."""

    def test_session_outputs(self, tmp_path, out_dir):
        config = run_document(tmp_path, SMALL_LEARN)
        assert main(['learn', '-c', config, '-o', str(out_dir)]) == EXIT_OK
        metrics = read_result(out_dir, 'learn')['metrics']
        assert metrics['steps'] == 2 * 19
        assert metrics['max_abs_weight'] <= 1.0
        assert metrics['categories_seen'] >= 2
        log = pd.read_csv(out_dir / 'learn' / 'category_log.csv', comment='#')
        assert list(log.columns) == ['step', 'category']

    def test_zero_epochs_leave_graph(self, tmp_path, out_dir):
        document = json.loads(json.dumps(SMALL_LEARN))
        document['learn']['epochs'] = 0
        config = run_document(tmp_path, document)
        assert main(['learn', '-c', config, '-o', str(out_dir)]) == EXIT_OK
        metrics = read_result(out_dir, 'learn')['metrics']
        assert metrics['graph_unchanged'] is True
        assert metrics['nrmse_before'] == metrics['nrmse_after']

    def test_single_category_is_a_check_failure(self, tmp_path, out_dir):
        document = json.loads(json.dumps(SMALL_LEARN))
        document['learn']['art'] = {'vigilance': 0.01}
        config = run_document(tmp_path, document)
        assert main(['learn', '-c', config, '-o', str(out_dir)]) == EXIT_CHECK_FAILED
        result = read_result(out_dir, 'learn')
        assert result['metrics']['categories_seen'] == 1
        assert result['diff'][0]['check'] == 'categories_seen'


class TestPropsCommand:
    """Test suite for the props subcommand."""

    def test_reduced_suite(self, tmp_path, out_dir):
        config = run_document(tmp_path, {'props': {
            'count_instances': [[4, 3]],
            'doubling_oracles': 10,
            'doubling_max_bits': 4,
            'assembly_instances': 3,
            'assembly_max_vars': 3,
            'spectrum_samples': 3,
            'norm_steps': 100,
            'norm_qubits': 2,
            'separation_pairs': 3,
            'fading_trials': 10,
            'readout_seeds': 1,
            'hebbian_steps': 100,
            'art_trials': 5,
        }})
        assert main(['props', '-c', config, '-o', str(out_dir)]) == EXIT_OK
        frame = pd.read_csv(out_dir / 'props' / 'properties.csv', comment='#')
        assert len(frame) == 13
        assert frame.set_index('property').loc['np_exhaustive', 'passed']
