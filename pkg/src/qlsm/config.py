"""
Configuration Module

Loads the default YAML configuration, merges a run document over it,
resolves file paths and derives every random seed of a run from one
global seed.
"""

import copy
import hashlib
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, Mapping, Optional

import numpy as np
import yaml

from .exceptions import ConfigError

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent.parent
DEFAULT_CONFIG_PATH = PROJECT_ROOT / 'config' / 'default_config.yaml'
SEED_ENV_VAR = 'QLSM_SEED'

SUBCOMMANDS = ('adiabatic', 'lsm', 'solve', 'learn', 'props')

# Dotted keys holding file paths, per subcommand
PATH_KEYS = {
    'adiabatic': ['adiabatic.instance'],
    'lsm': ['lsm.signal.input'],
    'solve': ['solve.instance'],
}


def load_default_config() -> Dict[str, Any]:
    if not DEFAULT_CONFIG_PATH.exists():
        raise ConfigError(f"Default configuration missing: {DEFAULT_CONFIG_PATH}")
    with open(DEFAULT_CONFIG_PATH, 'r') as f:
        return yaml.safe_load(f) or {}


def read_document(config_path: str) -> Dict[str, Any]:
    """
    Read a run document. JSON is accepted as a subset of YAML.

    Args:
        config_path: Path to the document

    Returns:
        Parsed mapping
    """
    path = Path(config_path)
    if not path.exists():
        raise ConfigError(f"Configuration file not found: {config_path}", field='config')
    try:
        with open(path, 'r') as f:
            document = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ConfigError(f"Cannot parse {config_path}: {e}", field='config') from e
    if document is None:
        return {}
    if not isinstance(document, dict):
        raise ConfigError(f"{config_path} must hold a mapping at top level", field='config')
    return document


def deep_merge(base: Mapping[str, Any], override: Mapping[str, Any], prefix: str = '') -> Dict[str, Any]:
    """
    Merge ``override`` into a copy of ``base``.

    Every key of ``override`` must exist in ``base``; nested mappings are
    merged recursively, everything else is replaced.

    Raises:
        ConfigError: naming the dotted path of the first unknown key
    """
    merged = copy.deepcopy(dict(base))
    for key, value in override.items():
        dotted = f"{prefix}{key}"
        if key not in merged:
            raise ConfigError(f"Unknown configuration key '{dotted}'", field=dotted)
        if isinstance(merged[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"'{dotted}' must be a mapping", field=dotted)
            merged[key] = deep_merge(merged[key], value, f"{dotted}.")
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def get_dotted(config: Mapping[str, Any], dotted: str) -> Any:
    node: Any = config
    for part in dotted.split('.'):
        node = node[part]
    return node


def set_dotted(config: Dict[str, Any], dotted: str, value: Any):
    parts = dotted.split('.')
    node = config
    for part in parts[:-1]:
        node = node[part]
    node[parts[-1]] = value


def resolve_path(value: str, dotted: str, search_dirs: Iterable[Path]) -> str:
    """First existing candidate among ``search_dirs``; absolute paths are taken as is."""
    candidate = Path(value)
    if candidate.is_absolute():
        if candidate.exists():
            return str(candidate)
    else:
        for directory in search_dirs:
            if (directory / candidate).exists():
                return str((directory / candidate).resolve())
    raise ConfigError(f"File not found: {value}", field=dotted)


def resolve_seed(cli_seed: Optional[int], config_seed: Any) -> int:
    """--seed over QLSM_SEED over the configuration's seed."""
    if cli_seed is not None:
        seed, source = cli_seed, '--seed'
    elif os.environ.get(SEED_ENV_VAR, '').strip():
        raw = os.environ[SEED_ENV_VAR].strip()
        try:
            seed, source = int(raw), SEED_ENV_VAR
        except ValueError:
            raise ConfigError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}", field='seed') from None
    else:
        seed, source = config_seed, 'config'
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2 ** 64:
        raise ConfigError(f"seed must be an unsigned 64-bit integer, got {seed!r}", field='seed')
    logger.debug(f"Seed {seed} taken from {source}")
    return int(seed)


def sub_seed(seed: int, name: str) -> int:
    """Deterministic seed for the named random stream (graph, signals, sweeps, pairs, instances)."""
    name_key = int.from_bytes(hashlib.sha256(name.encode('utf-8')).digest()[:8], 'little')
    return int(np.random.SeedSequence([seed, name_key]).generate_state(1, dtype=np.uint64)[0])


def config_hash(config: Mapping[str, Any], seed: int) -> str:
    canonical = json.dumps({'config': config, 'seed': seed}, sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


@dataclass
class ExperimentConfig:
    """
    Merged configuration of one run.

    ``values`` holds the merged document with paths of the active
    subcommand resolved to absolute paths; ``config_hash`` is computed
    before resolution so it does not depend on the working directory.
    """

    subcommand: str
    values: Dict[str, Any]
    seed: int
    out_dir: Path
    config_hash: str
    source: Optional[str] = None
    resolved_paths: Dict[str, str] = field(default_factory=dict)

    @property
    def section(self) -> Dict[str, Any]:
        return self.values[self.subcommand]

    def sub_seed(self, name: str) -> int:
        return sub_seed(self.seed, name)

    @property
    def subcommand_dir(self) -> Path:
        return self.out_dir / self.subcommand


def build_experiment_config(subcommand: str, config_path: Optional[str] = None,
                            cli_seed: Optional[int] = None, out_dir: Optional[str] = None,
                            overrides: Optional[Mapping[str, Any]] = None) -> ExperimentConfig:
    """
    Assemble the configuration of one run.

    Args:
        subcommand: One of SUBCOMMANDS
        config_path: Optional run document merged over the defaults
        cli_seed: Seed given on the command line
        out_dir: Output directory overriding ``output.dir``
        overrides: Extra mapping merged last (same key rules)

    Returns:
        ExperimentConfig with every path of the subcommand resolved
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"Unknown subcommand {subcommand!r}", field='subcommand')

    values = load_default_config()
    search_dirs = [Path.cwd(), PROJECT_ROOT]
    if config_path:
        values = deep_merge(values, read_document(config_path))
        search_dirs.insert(0, Path(config_path).resolve().parent)
    if overrides:
        values = deep_merge(values, overrides)

    seed = resolve_seed(cli_seed, values.get('seed'))
    values['seed'] = seed
    if out_dir is not None:
        values['output']['dir'] = out_dir
    digest = config_hash(values, seed)

    resolved = {}
    for dotted in PATH_KEYS.get(subcommand, []):
        raw = get_dotted(values, dotted)
        if raw is None:
            continue
        resolved[dotted] = resolve_path(str(raw), dotted, search_dirs)
        set_dotted(values, dotted, resolved[dotted])

    logger.info(f"Configuration for '{subcommand}': seed={seed}, hash={digest[:12]}")
    return ExperimentConfig(
        subcommand=subcommand,
        values=values,
        seed=seed,
        out_dir=Path(values['output']['dir']),
        config_hash=digest,
        source=config_path,
        resolved_paths=resolved,
    )
