"""
Instance Loader Module

Handles loading and writing of the simulator's input files: DIMACS-CNF
instances, truth tables and input-signal CSVs.
"""

import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from .adiabatic import SatInstance
from .exceptions import ConfigError, IngestionError, QLSMError
from .nonlinear_oracle import OracleFunction
from .reservoir import DEFAULT_BOUND, DEFAULT_LIPSCHITZ, InputSignal

logger = logging.getLogger(__name__)

Loaded = Union[SatInstance, OracleFunction, InputSignal]


class InstanceLoader:
    """
    Loader for instance and signal files.
    Dispatches on the file extension and provides a unified interface.
    """

    CNF_FORMATS = ['cnf', 'dimacs']
    TABLE_FORMATS = ['tt', 'txt']
    SIGNAL_FORMATS = ['csv']
    SUPPORTED_FORMATS = CNF_FORMATS + TABLE_FORMATS + SIGNAL_FORMATS

    def __init__(self, config: Optional[Dict[str, Any]] = None):
        """
        Initialize the loader.

        Args:
            config: Signal domain settings ('bound', 'lipschitz')
        """
        self.config = config or {}
        self.bound = self.config.get('bound', DEFAULT_BOUND)
        self.lipschitz = self.config.get('lipschitz', DEFAULT_LIPSCHITZ)

    def load_file(self, filepath: str) -> Loaded:
        """
        Load an instance, truth table or signal.

        Args:
            filepath: Path to the file

        Returns:
            SatInstance, OracleFunction or InputSignal
        """
        path = Path(filepath)

        if not path.exists():
            raise FileNotFoundError(f"File not found: {filepath}")

        file_ext = path.suffix[1:].lower()

        if file_ext not in self.SUPPORTED_FORMATS:
            raise IngestionError(f"Unsupported format: {file_ext}. Supported: {self.SUPPORTED_FORMATS}",
                                 path=str(path))

        logger.info(f"Loading {file_ext} file: {filepath}")

        if file_ext in self.CNF_FORMATS:
            return self.load_dimacs(path)
        if file_ext in self.TABLE_FORMATS:
            return self.load_truth_table(path)
        return self.load_signal(path)

    def load_dimacs(self, filepath: Path) -> SatInstance:
        """
        Parse a DIMACS-CNF file.

        Comment lines start with 'c'; the 'p cnf <vars> <clauses>' header
        must precede all clauses, and every clause line ends with 0.
        """
        num_vars = None
        declared_clauses = None
        clauses: List[tuple] = []
        pending: List[int] = []

        with open(filepath, 'r') as f:
            for line_no, raw in enumerate(f, start=1):
                line = raw.strip()
                if not line or line.startswith('c') or line.startswith('%'):
                    continue
                if line.startswith('p'):
                    if num_vars is not None:
                        raise IngestionError("Second 'p' header", path=str(filepath), line=line_no)
                    words = line.split()
                    if len(words) != 4 or words[1] != 'cnf':
                        raise IngestionError(f"Malformed header: {line!r}", path=str(filepath), line=line_no)
                    try:
                        num_vars, declared_clauses = int(words[2]), int(words[3])
                    except ValueError:
                        raise IngestionError(f"Non-integer header fields: {line!r}",
                                             path=str(filepath), line=line_no) from None
                    continue
                if num_vars is None:
                    raise IngestionError("Clause line before 'p cnf' header", path=str(filepath), line=line_no)
                try:
                    literals = [int(w) for w in line.split()]
                except ValueError:
                    raise IngestionError(f"Non-integer literal in {line!r}", path=str(filepath), line=line_no) from None
                for lit in literals:
                    if lit == 0:
                        if not pending:
                            raise IngestionError("Empty clause", path=str(filepath), line=line_no)
                        clauses.append(tuple((abs(v) - 1, v < 0) for v in pending))
                        pending = []
                        continue
                    if abs(lit) > num_vars:
                        raise IngestionError(f"Literal {lit} exceeds declared {num_vars} variables",
                                             path=str(filepath), line=line_no)
                    pending.append(lit)

        if num_vars is None:
            raise IngestionError("Missing 'p cnf' header", path=str(filepath))
        if pending:
            raise IngestionError("Last clause is not terminated by 0", path=str(filepath))
        if len(clauses) != declared_clauses:
            raise IngestionError(f"Header declares {declared_clauses} clauses, found {len(clauses)}",
                                 path=str(filepath))
        try:
            instance = SatInstance(num_vars, tuple(clauses))
        except ConfigError as e:
            raise IngestionError(str(e), path=str(filepath)) from e

        logger.info(f"Loaded CNF with {num_vars} variables and {len(clauses)} clauses")
        return instance

    def load_truth_table(self, filepath: Path) -> OracleFunction:
        """One 0/1 per line, 2^n lines."""
        values = []
        with open(filepath, 'r') as f:
            for line_no, raw in enumerate(f, start=1):
                line = raw.strip()
                if not line:
                    continue
                if line not in ('0', '1'):
                    raise IngestionError(f"Expected 0 or 1, got {line!r}", path=str(filepath), line=line_no)
                values.append(int(line))
        try:
            oracle = OracleFunction.from_table(values)
        except QLSMError as e:
            raise IngestionError(f"Wrong line count: {e}", path=str(filepath)) from e
        logger.info(f"Loaded truth table on {oracle.n} bits")
        return oracle

    def load_signal(self, filepath: Path) -> InputSignal:
        """
        Read a 't,ch0,ch1,...' CSV sampled on a uniform grid.
        """
        try:
            frame = pd.read_csv(filepath, comment='#')
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise IngestionError(f"Unreadable CSV: {e}", path=str(filepath)) from e

        if 't' not in frame.columns or len(frame.columns) < 2:
            raise IngestionError("Signal CSV needs a 't' column and at least one channel", path=str(filepath))
        if len(frame) < 2:
            raise IngestionError("Signal needs at least two samples", path=str(filepath))

        times = frame['t'].to_numpy(dtype=float)
        steps = np.diff(times)
        dt = float(steps[0])
        if dt <= 0 or not np.allclose(steps, dt, rtol=1e-6, atol=1e-12):
            bad = int(np.argmax(~np.isclose(steps, dt, rtol=1e-6, atol=1e-12))) if dt > 0 else 0
            raise IngestionError(f"Time grid is not uniform at sample {bad + 1}", path=str(filepath))

        channels = [c for c in frame.columns if c != 't']
        samples = frame[channels].to_numpy(dtype=float)
        logger.info(f"Loaded signal: {len(frame)} samples, {len(channels)} channels, dt={dt:g}")
        return InputSignal(samples, dt, self.bound, self.lipschitz)


def save_signal_csv(signal: InputSignal, output_path: str, header_comment: Optional[str] = None):
    """Write a signal as 't,ch0,ch1,...'."""
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(signal.samples, columns=[f"ch{c}" for c in range(signal.channels)])
    frame.insert(0, 't', signal.times)
    with open(path, 'w', newline='') as f:
        if header_comment:
            f.write(f"# {header_comment}\n")
        frame.to_csv(f, index=False)
    logger.info(f"Saved signal to: {output_path}")


def save_dimacs(instance: SatInstance, output_path: str):
    path = Path(output_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as f:
        f.write(instance.to_dimacs())
    logger.info(f"Saved CNF to: {output_path}")
