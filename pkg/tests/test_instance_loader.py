"""
Unit tests for the instance loader
"""

import pytest
import numpy as np

from qlsm.adiabatic import SatInstance
from qlsm.exceptions import DomainError, IngestionError
from qlsm.instance_loader import InstanceLoader, save_dimacs, save_signal_csv
from qlsm.nonlinear_oracle import OracleFunction, brute_force
from qlsm.reservoir import InputSignal, require_valid
from qlsm.signal_generator import SignalGenerator


@pytest.fixture
def loader():
    return InstanceLoader()


def write(path, text):
    path.write_text(text)
    return str(path)


class TestDimacs:
    """Test suite for DIMACS-CNF parsing."""

    def test_bundled_unique_instance(self, loader, instance_dir, unique_instance):
        inst = loader.load_file(str(instance_dir / 'unique_3var.cnf'))
        assert isinstance(inst, SatInstance)
        assert inst == unique_instance

    def test_bundled_contradiction(self, loader, instance_dir):
        inst = loader.load_file(str(instance_dir / 'contradiction.cnf'))
        assert not inst.satisfying_mask().any()

    def test_bundled_satisfiable(self, loader, instance_dir):
        inst = loader.load_file(str(instance_dir / 'satisfiable_4var.cnf'))
        decision, count = brute_force(OracleFunction.from_sat(inst))
        assert decision and count >= 1

    def test_clause_split_across_lines(self, loader, tmp_path):
        inst = loader.load_file(write(tmp_path / 'a.cnf', "p cnf 2 1\n1\n-2 0\n"))
        assert inst.clauses == (((0, False), (1, True)),)

    def test_missing_header(self, loader, tmp_path):
        with pytest.raises(IngestionError) as excinfo:
            loader.load_file(write(tmp_path / 'a.cnf', "1 2 0\n"))
        assert excinfo.value.line == 1

    def test_literal_out_of_range(self, loader, tmp_path):
        with pytest.raises(IngestionError) as excinfo:
            loader.load_file(write(tmp_path / 'a.cnf', "c comment\np cnf 2 1\n1 3 0\n"))
        assert excinfo.value.line == 3

    def test_clause_count_mismatch(self, loader, tmp_path):
        with pytest.raises(IngestionError):
            loader.load_file(write(tmp_path / 'a.cnf', "p cnf 2 2\n1 2 0\n"))

    def test_unterminated_clause(self, loader, tmp_path):
        with pytest.raises(IngestionError):
            loader.load_file(write(tmp_path / 'a.cnf', "p cnf 2 1\n1 2\n"))

    def test_non_integer_literal(self, loader, tmp_path):
        with pytest.raises(IngestionError):
            loader.load_file(write(tmp_path / 'a.cnf', "p cnf 2 1\n1 x 0\n"))

    def test_write_then_read(self, loader, tmp_path, unique_instance):
        save_dimacs(unique_instance, str(tmp_path / 'out.cnf'))
        assert loader.load_file(str(tmp_path / 'out.cnf')) == unique_instance


class TestTruthTable:
    """Test suite for truth-table files."""

    def test_bundled_parity(self, loader, instance_dir):
        f = loader.load_file(str(instance_dir / 'parity_3bit.tt'))
        assert isinstance(f, OracleFunction)
        assert f.n == 3
        assert int(f.table.sum()) == 4

    def test_wrong_line_count(self, loader, tmp_path):
        with pytest.raises(IngestionError, match="Wrong line count"):
            loader.load_file(write(tmp_path / 'f.tt', "0\n1\n1\n"))

    def test_bad_entry(self, loader, tmp_path):
        with pytest.raises(IngestionError) as excinfo:
            loader.load_file(write(tmp_path / 'f.tt', "0\n2\n"))
        assert excinfo.value.line == 2


class TestSignalCsv:
    """Test suite for signal CSV files."""

    def test_roundtrip(self, loader, tmp_path):
        signal = SignalGenerator(seed=1).generate_signal(20, channels=2)
        save_signal_csv(signal, str(tmp_path / 's.csv'), header_comment="seed=1")
        loaded = loader.load_file(str(tmp_path / 's.csv'))
        assert isinstance(loaded, InputSignal)
        assert loaded.channels == 2
        assert loaded.dt == pytest.approx(signal.dt)
        assert np.allclose(loaded.samples, signal.samples)

    def test_non_uniform_grid(self, loader, tmp_path):
        with pytest.raises(IngestionError, match="not uniform"):
            loader.load_file(write(tmp_path / 's.csv', "t,ch0\n0.0,0.1\n0.1,0.1\n0.3,0.1\n"))

    def test_missing_time_column(self, loader, tmp_path):
        with pytest.raises(IngestionError):
            loader.load_file(write(tmp_path / 's.csv', "a,b\n0,1\n1,2\n"))

    def test_out_of_domain_is_loaded_but_invalid(self, loader, tmp_path):
        signal = loader.load_file(write(tmp_path / 's.csv', "t,ch0\n0.0,0.0\n0.05,2.0\n"))
        with pytest.raises(DomainError):
            require_valid(signal)


class TestDispatch:
    """Test suite for extension dispatch."""

    def test_missing_file(self, loader, tmp_path):
        with pytest.raises(FileNotFoundError):
            loader.load_file(str(tmp_path / 'none.cnf'))

    def test_unsupported_extension(self, loader, tmp_path):
        with pytest.raises(IngestionError, match="Unsupported format"):
            loader.load_file(write(tmp_path / 'x.json', "{}"))
