"""SVG figures: witness heatmaps, expectation histograms and the correlation scatter matrix."""
import logging
from pathlib import Path
from typing import List

import matplotlib

matplotlib.use('Agg')

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib.colors import TwoSlopeNorm  # noqa: E402
from matplotlib.patches import Polygon  # noqa: E402

from app.services.results import ResultSet  # noqa: E402
from app.services.runner import median_heatmap  # noqa: E402

logger = logging.getLogger(__name__)

HIST_BINS = np.linspace(-1.1, 1.1, 51)
SCATTER_FEATURES = ('width', 'cnot_count', 'weight', 'treewidth', 'expectation')

# deterministic element ids
plt.rcParams['svg.hashsalt'] = 'resbench'
plt.rcParams['svg.fonttype'] = 'none'


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)
    return path


def heatmap_svg(rs: ResultSet, method: str, witness: str, path) -> Path:
    """Each (width, treewidth) cell split diagonally: raw above, mitigated below."""
    raw = median_heatmap(rs, witness, False, method)
    mitigated = median_heatmap(rs, witness, True, method)
    widths = sorted(set(raw.widths) | set(mitigated.widths))
    treewidths = sorted(set(raw.treewidths) | set(mitigated.treewidths))

    fig, ax = plt.subplots(figsize=(1.2 * max(len(treewidths), 3) + 1.5, 1.0 * max(len(widths), 3) + 1.0))
    values = list(raw.cells.values()) + list(mitigated.cells.values())
    vmax = max([1.0] + values)
    norm = TwoSlopeNorm(vmin=min([-1.0] + values), vcenter=0.0, vmax=vmax)
    cmap = plt.get_cmap('RdBu_r')

    for y, n in enumerate(widths):
        for x, tw in enumerate(treewidths):
            for value, corners, offset in (
                (raw.get(n, tw), [(x, y), (x + 1, y), (x + 1, y + 1)], (0.68, 0.28)),
                (mitigated.get(n, tw), [(x, y), (x, y + 1), (x + 1, y + 1)], (0.3, 0.72)),
            ):
                if value is None:
                    continue
                ax.add_patch(Polygon(corners, closed=True, facecolor=cmap(norm(value)), edgecolor='white'))
                ax.text(x + offset[0], y + offset[1], f'{value:.2f}', ha='center', va='center', fontsize=7)

    ax.set_xlim(0, max(len(treewidths), 1))
    ax.set_ylim(0, max(len(widths), 1))
    ax.set_xticks(np.arange(len(treewidths)) + 0.5)
    ax.set_xticklabels([str(tw) for tw in treewidths])
    ax.set_yticks(np.arange(len(widths)) + 0.5)
    ax.set_yticklabels([str(n) for n in widths])
    ax.set_xlabel('Treewidth')
    ax.set_ylabel('Width (qubits)')
    ax.set_title(f'Median {witness} witness, {method} (upper raw / lower mitigated)')
    fig.colorbar(plt.cm.ScalarMappable(norm=norm, cmap=cmap), ax=ax, label='witness')
    return _save(fig, path)


def histogram_svg(rs: ResultSet, path) -> Path:
    """Generator expectation histograms; the region beyond |1| is shaded as non-physical."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    records = [r for r in rs.ok_records if r.get('weight', 0) > 0]
    for variant, color in (('raw', 'tab:red'), ('mitigated', 'tab:blue')):
        values = [r[variant] for r in records if r.get(variant) is not None]
        if values:
            ax.hist(values, bins=HIST_BINS, alpha=0.6, color=color, label=f'{variant} ({len(values)})')
    ax.axvspan(1.0, 1.1, color='grey', alpha=0.3)
    ax.axvspan(-1.1, -1.0, color='grey', alpha=0.3)
    ax.set_xlim(-1.1, 1.1)
    ax.set_xlabel('Stabilizer expectation')
    ax.set_ylabel('Count')
    if records:
        ax.legend()
    return _save(fig, path)


def _scatter_columns(rs: ResultSet) -> List[np.ndarray]:
    rows = [r for r in rs.ok_records if r.get('weight', 0) > 0 and r.get('raw') is not None]
    columns = [np.array([float(r[f]) for r in rows]) for f in SCATTER_FEATURES[:-1]]
    columns.append(np.array([float(r['raw']) for r in rows]))
    return columns


def correlation_svg(rs: ResultSet, path) -> Path:
    """Scatter matrix over the correlation features with least-squares fit lines."""
    columns = _scatter_columns(rs)
    size = len(SCATTER_FEATURES)
    fig, axes = plt.subplots(size, size, figsize=(2.0 * size, 2.0 * size))
    for a in range(size):
        for b in range(size):
            ax = axes[a][b]
            x, y = columns[b], columns[a]
            if a == b:
                if len(x):
                    ax.hist(x, bins=20, color='tab:grey')
            else:
                ax.scatter(x, y, s=2, alpha=0.4)
                if len(x) >= 2 and np.ptp(x) > 0:
                    slope, intercept = np.polyfit(x, y, 1)
                    xs = np.array([x.min(), x.max()])
                    ax.plot(xs, slope * xs + intercept, color='tab:red', linewidth=1)
            if a == size - 1:
                ax.set_xlabel(SCATTER_FEATURES[b], fontsize=8)
            if b == 0:
                ax.set_ylabel(SCATTER_FEATURES[a], fontsize=8)
            ax.tick_params(labelsize=6)
    fig.tight_layout()
    return _save(fig, path)
