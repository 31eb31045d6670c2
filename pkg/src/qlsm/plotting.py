"""
Plotting Module

PNG figures of sweep curves, written with matplotlib's Agg backend. The
configuration hash and seed go into the PNG 'Description' text chunk.
"""

import logging
from pathlib import Path
from typing import Optional, Sequence

import matplotlib
matplotlib.use('Agg')
from matplotlib.figure import Figure

logger = logging.getLogger(__name__)


def _new_axes(width: float = 6, height: float = 4, dpi: int = 100):
    fig = Figure(figsize=(width, height), dpi=dpi)
    return fig, fig.add_subplot(111)


def _save(fig: Figure, path: Path, header: Optional[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, metadata={'Description': header} if header else None)
    logger.info(f"Saved figure: {path}")
    return path


def plot_overlap_sweep(total_times: Sequence[float], overlaps: Sequence[float], path: Path,
                       header: Optional[str] = None) -> Path:
    fig, axes = _new_axes()
    axes.semilogx(total_times, overlaps, 'o-', base=2)
    axes.set_xlabel('Total time T')
    axes.set_ylabel('Overlap with final ground state')
    axes.set_ylim(0.0, 1.05)
    axes.grid(True, alpha=0.3)
    return _save(fig, path, header)


def plot_gap_profile(s_values: Sequence[float], gaps: Sequence[float], path: Path,
                     header: Optional[str] = None) -> Path:
    fig, axes = _new_axes()
    axes.plot(s_values, gaps, 'b-')
    axes.set_xlabel('s')
    axes.set_ylabel('E1 - E0')
    axes.grid(True, alpha=0.3)
    return _save(fig, path, header)


def plot_divergence_curve(windows: Sequence[int], mean_divergence: Sequence[float],
                          spread: Sequence[float], path: Path, header: Optional[str] = None) -> Path:
    """Mean divergence against window length with a one-sigma band."""
    fig, axes = _new_axes()
    axes.errorbar(windows, mean_divergence, yerr=spread, fmt='o-', capsize=3)
    axes.set_xlabel('Agreement window (samples)')
    axes.set_ylabel('Filter output divergence')
    axes.grid(True, alpha=0.3)
    return _save(fig, path, header)
