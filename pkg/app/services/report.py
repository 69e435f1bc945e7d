"""Statistics over ResultSets and file exports."""
import csv
import io
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from app.services.circuits import METHODS
from app.services.errors import ConstantSeries, EmptySeries, LengthMismatch, ValidationError
from app.services.graphs import Graph
from app.services.results import ResultSet
from app.services.runner import Heatmap, median_heatmap, scores
from app.services.topology import HardwareTopology, induced_subgraph
from app.services.witness import BISEPARABLE, GENUINE, WITNESSES

logger = logging.getLogger(__name__)

FEATURES = ('width', 'cnot_count', 'weight', 'treewidth', 'expectation')
CALIBRATION_THRESHOLD = 0.5
EXPORT_KINDS = (
    'heatmap-csv', 'scores-json', 'quartiles-csv', 'corr-csv', 'heatmap-svg', 'histogram-svg',
    'minimums-csv', 'ghz-csv', 'calibration-csv', 'corr-svg',
)


def quartiles(values: Sequence[float]) -> Tuple[float, float, float]:
    """(q1, median, q3) by linear interpolation between order statistics."""
    if len(values) == 0:
        raise EmptySeries("Cannot take quartiles of an empty series")
    q1, q2, q3 = np.quantile(np.asarray(values, dtype=float), [0.25, 0.5, 0.75], method='linear')
    return float(q1), float(q2), float(q3)


def pearson(x: Sequence[float], y: Sequence[float]) -> Tuple[float, float, int]:
    """Sample Pearson r, two-sided p-value from Student's t, and dof = N - 2."""
    if len(x) != len(y):
        raise LengthMismatch(f"Series lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise EmptySeries(f"Pearson correlation needs at least 3 points, got {len(x)}")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise ConstantSeries("Pearson correlation undefined for a constant series")

    r = float(np.clip((dx @ dy) / np.sqrt(sxx * syy), -1.0, 1.0))
    dof = len(x) - 2
    if abs(r) == 1.0:
        return r, 0.0, dof
    t = r * np.sqrt(dof / (1.0 - r * r))
    p = float(2.0 * stats.t.sf(abs(t), dof))
    return r, p, dof


def _generator_records(rs: ResultSet) -> List[Dict]:
    """Successful records of non-identity stabilizers."""
    return [r for r in rs.ok_records if r.get('weight', 0) > 0]


def _feature_series(records: Sequence[Dict], mitigated: bool) -> Dict[str, List[float]]:
    key = 'mitigated' if mitigated else 'raw'
    rows = [r for r in records if r.get(key) is not None]
    series = {name: [float(r[name]) for r in rows] for name in FEATURES if name != 'expectation'}
    series['expectation'] = [float(r[key]) for r in rows]
    return series


def correlation_matrix(rs: ResultSet, mitigated: bool = False, method: Optional[str] = None,
                       strict: bool = True) -> Dict:
    """Pairwise r and p over FEATURES for every generator record.

    With strict=False a constant feature yields None entries and a warning
    instead of ConstantSeries.
    """
    records = _generator_records(rs)
    if method is not None:
        records = [r for r in records if r['method'] == method]
    series = _feature_series(records, mitigated)
    n_points = len(series['expectation'])
    if n_points < 3:
        raise EmptySeries(f"Correlation matrix needs at least 3 records, got {n_points}")

    size = len(FEATURES)
    r_table: List[List[Optional[float]]] = [[None] * size for _ in range(size)]
    p_table: List[List[Optional[float]]] = [[None] * size for _ in range(size)]
    for a in range(size):
        for b in range(a, size):
            try:
                r, p, _ = pearson(series[FEATURES[a]], series[FEATURES[b]])
            except ConstantSeries:
                if strict:
                    raise
                logger.warning(f"Constant series in correlation of {FEATURES[a]} and {FEATURES[b]}")
                continue
            if a == b:
                r, p = 1.0, 0.0
            r_table[a][b] = r_table[b][a] = r
            p_table[a][b] = p_table[b][a] = p

    return {
        'features': list(FEATURES),
        'method': method,
        'mitigated': mitigated,
        'n': n_points,
        'dof': n_points - 2,
        'r': r_table,
        'p': p_table,
    }


def quartile_table(rs: ResultSet) -> List[Dict]:
    """Quartiles of generator expectations per (method, width, raw/mitigated)."""
    grouped: Dict[Tuple[str, int, str], List[float]] = {}
    for record in _generator_records(rs):
        for variant in ('raw', 'mitigated'):
            if record.get(variant) is not None:
                grouped.setdefault((record['method'], record['width'], variant), []).append(record[variant])

    rows = []
    for (method, width, variant), values in sorted(grouped.items()):
        q1, q2, q3 = quartiles(values)
        rows.append({'method': method, 'width': width, 'variant': variant, 'count': len(values),
                     'q1': q1, 'median': q2, 'q3': q3})
    return rows


def minimum_table(rs: ResultSet) -> List[Dict]:
    """Lowest genuine and biseparable witness per (method, width, variant)."""
    best: Dict[Tuple[str, int, str], Dict] = {}
    for entry in rs.witnesses:
        for variant in ('raw', 'mitigated'):
            values = entry[variant]
            if values[GENUINE] is None:
                continue
            key = (entry['method'], entry['width'], variant)
            row = best.setdefault(key, {
                'method': key[0], 'width': key[1], 'variant': variant,
                'min_genuine': None, 'genuine_subset': None, 'genuine_graph': None,
                'min_biseparable': None, 'biseparable_qubits': None,
            })
            if row['min_genuine'] is None or values[GENUINE] < row['min_genuine']:
                row['min_genuine'] = values[GENUINE]
                row['genuine_subset'] = entry['subset']
                row['genuine_graph'] = entry['graph']
            for edge in values['edges']:
                if row['min_biseparable'] is None or edge['value'] < row['min_biseparable']:
                    row['min_biseparable'] = edge['value']
                    row['biseparable_qubits'] = edge['qubits']
    return [best[key] for key in sorted(best)]


def _topology(rs: ResultSet) -> Optional[HardwareTopology]:
    data = rs.meta.get('topology')
    return HardwareTopology.from_dict(data) if data else None


def ghz_table(rs: ResultSet) -> List[Dict]:
    """Star-subset orbit results: lowest witnesses on the star vs. the complete graph."""
    topo = _topology(rs)
    if topo is None:
        return []

    star_subsets = {}
    for entry in rs.witnesses:
        subset = tuple(entry['subset'])
        if subset not in star_subsets:
            base, _ = induced_subgraph(topo, subset)
            star_subsets[subset] = base.is_star()

    best: Dict[Tuple, Dict] = {}
    for entry in rs.witnesses:
        if not star_subsets[tuple(entry['subset'])]:
            continue
        graph = Graph.from_edges(entry['width'], entry['graph_edges'])
        shape = 'complete' if graph.is_complete() else 'star' if graph.is_star() else 'other'
        for variant in ('raw', 'mitigated'):
            values = entry[variant]
            if values[GENUINE] is None:
                continue
            key = (entry['method'], entry['width'], shape, variant)
            row = best.setdefault(key, {
                'method': key[0], 'width': key[1], 'graph': shape, 'variant': variant,
                'count': 0, 'min_genuine': values[GENUINE], 'min_biseparable': values[BISEPARABLE],
            })
            row['count'] += 1
            row['min_genuine'] = min(row['min_genuine'], values[GENUINE])
            row['min_biseparable'] = min(row['min_biseparable'], values[BISEPARABLE])
    return [best[key] for key in sorted(best)]


def calibration_table(rs: ResultSet, threshold: float = CALIBRATION_THRESHOLD) -> List[Dict]:
    """Generator records whose raw expectation falls below threshold, with device errors."""
    topo = _topology(rs)
    rows = []
    for record in _generator_records(rs):
        if record['raw'] >= threshold:
            continue
        subset = record['subset']
        row = {
            'id': record['id'],
            'method': record['method'],
            'subset': subset,
            'stabilizer': record['stabilizer'],
            'raw': record['raw'],
            'readout_err': None,
            'cnot_err': None,
        }
        if topo is not None:
            row['readout_err'] = [list(topo.readout_err[q]) for q in subset]
            row['cnot_err'] = [[i, j, p] for (i, j), p in sorted(topo.cnot_err.items())
                               if i in subset and j in subset]
        rows.append(row)
    return rows


def _fmt(value) -> str:
    if value is None:
        return ''
    if isinstance(value, float):
        return f'{value:.6f}'
    if isinstance(value, (list, tuple)):
        return ' '.join(_fmt(v) for v in value)
    return str(value)


def _csv(header: Sequence[str], rows: Sequence[Sequence]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def heatmap_csv(heatmap: Heatmap) -> str:
    """Matrix layout: one row per width, one column per treewidth, blank when absent."""
    treewidths = heatmap.treewidths
    rows = [[n] + [heatmap.get(n, tw) for tw in treewidths] for n in heatmap.widths]
    return _csv(['width\\treewidth'] + [str(tw) for tw in treewidths], rows)


def _table_csv(rows: List[Dict], header: Sequence[str]) -> str:
    return _csv(header, [[row[h] for h in header] for row in rows])


def _variants(rs: ResultSet) -> List[bool]:
    has_mitigated = any(r.get('mitigated') is not None for r in rs.ok_records)
    return [False, True] if has_mitigated else [False]


def _write(path: Path, text: str) -> Path:
    with open(path, 'w', newline='') as f:
        f.write(text)
    return path


def export(rs: ResultSet, what: str, out_dir) -> List[Path]:
    """Write one export kind into out_dir and return the files written."""
    if what not in EXPORT_KINDS:
        raise ValidationError(f"Unknown export '{what}'; expected one of {', '.join(EXPORT_KINDS)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    methods = rs.methods or list(METHODS)
    written: List[Path] = []

    if what == 'heatmap-csv':
        for method in methods:
            for witness in WITNESSES:
                for mitigated in _variants(rs):
                    heatmap = median_heatmap(rs, witness, mitigated, method)
                    suffix = 'mitigated' if mitigated else 'raw'
                    written.append(_write(out_dir / f'heatmap_{method}_{witness}_{suffix}.csv',
                                          heatmap_csv(heatmap)))
    elif what == 'scores-json':
        payload = {
            'raw': scores(rs, mitigated=False),
            'mitigated': scores(rs, mitigated=True),
            'summary': rs.summary(),
        }
        written.append(_write(out_dir / 'scores.json', json.dumps(payload, sort_keys=True, indent=2) + '\n'))
    elif what == 'quartiles-csv':
        header = ['method', 'width', 'variant', 'count', 'q1', 'median', 'q3']
        written.append(_write(out_dir / 'quartiles.csv', _table_csv(quartile_table(rs), header)))
    elif what == 'corr-csv':
        rows = []
        for mitigated in _variants(rs):
            try:
                matrix = correlation_matrix(rs, mitigated=mitigated, strict=False)
            except EmptySeries:
                continue
            for a, fa in enumerate(FEATURES):
                for b, fb in enumerate(FEATURES):
                    rows.append(['mitigated' if mitigated else 'raw', fa, fb,
                                 matrix['r'][a][b], matrix['p'][a][b], matrix['dof']])
        written.append(_write(out_dir / 'correlations.csv',
                              _csv(['variant', 'feature_a', 'feature_b', 'r', 'p', 'dof'], rows)))
    elif what == 'minimums-csv':
        header = ['method', 'width', 'variant', 'min_genuine', 'genuine_subset', 'genuine_graph',
                  'min_biseparable', 'biseparable_qubits']
        written.append(_write(out_dir / 'minimums.csv', _table_csv(minimum_table(rs), header)))
    elif what == 'ghz-csv':
        header = ['method', 'width', 'graph', 'variant', 'count', 'min_genuine', 'min_biseparable']
        written.append(_write(out_dir / 'ghz.csv', _table_csv(ghz_table(rs), header)))
    elif what == 'calibration-csv':
        rows = [dict(row, readout_err=[e for pair in row['readout_err'] or [] for e in pair],
                     cnot_err=[v for item in row['cnot_err'] or [] for v in item])
                for row in calibration_table(rs)]
        header = ['id', 'method', 'subset', 'stabilizer', 'raw', 'readout_err', 'cnot_err']
        written.append(_write(out_dir / 'calibration.csv', _table_csv(rows, header)))
    else:
        from app.services import plots
        if what == 'heatmap-svg':
            for method in methods:
                for witness in WITNESSES:
                    path = out_dir / f'heatmap_{method}_{witness}.svg'
                    written.append(plots.heatmap_svg(rs, method, witness, path))
        elif what == 'histogram-svg':
            written.append(plots.histogram_svg(rs, out_dir / 'histogram.svg'))
        elif what == 'corr-svg':
            written.append(plots.correlation_svg(rs, out_dir / 'correlations.svg'))

    logger.info(f"Exported {what}: {len(written)} file(s) in {out_dir}")
    return written
