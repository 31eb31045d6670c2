"""
Results Module

Result records of a run and the writers that persist them: CSV curves,
the JSON result record and a plain-text summary report. Every file
carries the configuration hash and the seed.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def to_serializable(value: Any) -> Any:
    """Convert numpy containers and scalars to plain JSON types."""
    if isinstance(value, dict):
        return {str(k): to_serializable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_serializable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_serializable(value.tolist())
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if np.isfinite(value) else None
    if isinstance(value, Path):
        return str(value)
    return value


@dataclass
class ResultRecord:
    """
    Outcome of one subcommand.

    ``diff`` lists machine-readable mismatches of internal cross-checks;
    ``passed`` is False whenever it is non-empty.
    """

    experiment_id: str
    config_hash: str
    seed: int
    metrics: Dict[str, Any] = field(default_factory=dict)
    wall_clock: float = 0.0
    artifacts: Dict[str, str] = field(default_factory=dict)
    passed: bool = True
    diff: List[Dict[str, Any]] = field(default_factory=list)

    def add_mismatch(self, check: str, expected: Any, actual: Any, **context):
        self.diff.append({'check': check, 'expected': expected, 'actual': actual, **context})
        self.passed = False

    def to_dict(self, include_wall_clock: bool = False) -> Dict[str, Any]:
        data = {
            'experiment_id': self.experiment_id,
            'config_hash': self.config_hash,
            'seed': self.seed,
            'passed': self.passed,
            'metrics': self.metrics,
            'artifacts': self.artifacts,
            'diff': self.diff,
        }
        if include_wall_clock:
            data['wall_clock'] = self.wall_clock
        return to_serializable(data)


class ResultWriter:
    """
    Writes the artifacts of one run into a single output directory.

    Args:
        out_dir: Directory receiving every file (created on demand)
        config_hash: Hash of the run's configuration
        seed: Global seed of the run
    """

    def __init__(self, out_dir: Path, config_hash: str, seed: int):
        self.out_dir = Path(out_dir)
        self.config_hash = config_hash
        self.seed = seed

    @property
    def header(self) -> str:
        return f"config_hash={self.config_hash}, seed={self.seed}"

    def _path(self, filename: str) -> Path:
        self.out_dir.mkdir(parents=True, exist_ok=True)
        return self.out_dir / filename

    def write_csv(self, record: ResultRecord, name: str, frame: pd.DataFrame) -> Path:
        """
        Write ``frame`` to ``<name>.csv`` after a '# config_hash=..., seed=...'
        comment line and register it as an artifact.
        """
        path = self._path(f"{name}.csv")
        with open(path, 'w', newline='') as f:
            f.write(f"# {self.header}\n")
            frame.to_csv(f, index=False, float_format='%.12g')
        record.artifacts[name] = path.name
        logger.info(f"Wrote {path}")
        return path

    def write_artifact_json(self, record: ResultRecord, name: str, payload: Dict[str, Any]) -> Path:
        """JSON artifact wrapped with the config hash and seed."""
        path = self._path(f"{name}.json")
        with open(path, 'w') as f:
            json.dump(to_serializable({'config_hash': self.config_hash, 'seed': self.seed, **payload}),
                      f, indent=2, sort_keys=True)
            f.write('\n')
        record.artifacts[name] = path.name
        return path

    def figure_path(self, record: ResultRecord, name: str) -> Path:
        path = self._path(f"{name}.png")
        record.artifacts[name] = path.name
        return path

    def write_json(self, record: ResultRecord, filename: str = 'result.json') -> Path:
        """Result record without wall-clock time, so reruns are byte-identical."""
        path = self._path(filename)
        with open(path, 'w') as f:
            json.dump(record.to_dict(include_wall_clock=False), f, indent=2, sort_keys=True)
            f.write('\n')
        logger.info(f"Wrote {path}")
        return path

    def write_summary(self, record: ResultRecord, filename: str = 'summary.txt') -> Path:
        path = self._path(filename)
        with open(path, 'w') as f:
            f.write(generate_report(record))
            f.write('\n')
        return path

    def write_all(self, record: ResultRecord) -> Path:
        """Summary and JSON record; CSV artifacts are expected to be written already."""
        record.artifacts.setdefault('summary', 'summary.txt')
        self.write_summary(record)
        return self.write_json(record)


def _format_metric(value: Any) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.6g}"
    if isinstance(value, (list, tuple)) and len(value) > 8:
        return f"[{len(value)} values]"
    return str(value)


def generate_report(record: ResultRecord) -> str:
    """
    Human-readable report of a result record.
    """
    report = []
    report.append("=" * 60)
    report.append(f"QLSM {record.experiment_id.upper()} REPORT")
    report.append("=" * 60)
    report.append("")
    report.append(f"Config hash: {record.config_hash}")
    report.append(f"Seed: {record.seed}")
    report.append(f"Status: {'PASSED' if record.passed else 'FAILED'}")
    report.append(f"Wall clock: {record.wall_clock:.2f} s")
    report.append("")

    report.append("METRICS:")
    for key in sorted(record.metrics):
        report.append(f"  {key}: {_format_metric(record.metrics[key])}")
    report.append("")

    if record.artifacts:
        report.append("ARTIFACTS:")
        for name in sorted(record.artifacts):
            report.append(f"  {name}: {record.artifacts[name]}")
        report.append("")

    if record.diff:
        report.append("MISMATCHES:")
        for entry in record.diff:
            report.append(f"  {json.dumps(to_serializable(entry), sort_keys=True)}")
        report.append("")

    report.append("=" * 60)
    return "\n".join(report)
