"""Benchmark orchestration: sequence sampling, batching, execution and RES scoring."""
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.services.backend import SimulatedBackend
from app.services.circuits import METHODS, UNITARY, build_circuit
from app.services.errors import GroupTooLarge, InvalidConfig, ValidationError
from app.services.graphs import Graph, apply_lc_sequence, sample_lc_sequences, treewidth
from app.services.mitigation import TensoredMitigator, calibrate, clamp_expectation, mitigate_counts
from app.services.results import ResultSet
from app.services.stabilizer import expectation_exact, expectation_from_counts, prepare_state
from app.services.topology import HardwareTopology, induced_subgraph
from app.services.witness import (
    BISEPARABLE, GENUINE, biseparable_witnesses, genuine_witness, lc_stabilizers, stabilizer_circuit,
    stabilizer_set,
)

logger = logging.getLogger(__name__)

BOTH = 'both'
SAMPLED = 'sampled'
EXACT = 'exact'

# SeedSequence stream tags
_RECORD_STREAM = 0
_CALIBRATION_STREAM = 1
_SEQUENCE_STREAM = 2


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, default))


@dataclass
class RunConfig:
    topology: str
    subsets: List[List[int]]
    method: str = BOTH
    sequences: Optional[int] = None
    shots: int = field(default_factory=lambda: _env_int('RES_SHOTS', 4096))
    seed: int = field(default_factory=lambda: _env_int('RES_SEED', 1234))
    mitigate: bool = False
    max_experiments: int = field(default_factory=lambda: _env_int('RES_MAX_EXPERIMENTS', 300))
    output: Optional[str] = None
    mode: str = SAMPLED
    workers: int = field(default_factory=lambda: _env_int('RES_WORKERS', 1))
    sq_depol: float = field(default_factory=lambda: _env_float('RES_SQ_DEPOL', 0.0))
    global_depol: float = 0.0
    readout_noise: bool = True
    gate_noise: bool = True

    @classmethod
    def from_dict(cls, data: dict) -> 'RunConfig':
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise InvalidConfig(f"Unknown config fields: {sorted(unknown)}")
        if 'topology' not in data or 'subsets' not in data:
            raise InvalidConfig("Config needs 'topology' and 'subsets'")
        values = {k: v for k, v in data.items() if v is not None}
        values['subsets'] = [[int(q) for q in s] for s in values['subsets']]
        return cls(**values)

    @classmethod
    def from_file(cls, path) -> 'RunConfig':
        with open(path, 'r') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise InvalidConfig(f"{path}: not valid JSON ({e})")
        cfg = cls.from_dict(data)
        # relative topology paths resolve against the config file
        candidate = Path(path).parent / cfg.topology
        if cfg.topology.endswith('.json') and not Path(cfg.topology).is_absolute() and candidate.exists():
            cfg.topology = str(candidate)
        return cfg

    def with_overrides(self, **overrides) -> 'RunConfig':
        values = self.to_dict()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return RunConfig.from_dict(values)

    def to_dict(self) -> dict:
        return asdict(self)

    @property
    def methods(self) -> Tuple[str, ...]:
        return METHODS if self.method == BOTH else (self.method,)

    def load_topology(self) -> HardwareTopology:
        if self.topology.endswith('.json') or os.sep in self.topology:
            return HardwareTopology.from_file(self.topology)
        return HardwareTopology.bundled(self.topology)

    def sequence_count(self, n: int) -> int:
        return self.sequences if self.sequences else 2 ** (n + 1)

    def validate(self, topo: Optional[HardwareTopology] = None):
        if self.method not in METHODS + (BOTH,):
            raise InvalidConfig(f"method must be one of {METHODS + (BOTH,)}, got '{self.method}'")
        if self.mode not in (SAMPLED, EXACT):
            raise InvalidConfig(f"mode must be '{SAMPLED}' or '{EXACT}', got '{self.mode}'")
        if self.shots < 1:
            raise InvalidConfig(f"shots must be >= 1, got {self.shots}")
        if self.sequences is not None and self.sequences < 1:
            raise InvalidConfig(f"sequences must be >= 1, got {self.sequences}")
        if self.workers < 1:
            raise InvalidConfig(f"workers must be >= 1, got {self.workers}")
        if not self.subsets:
            raise InvalidConfig("At least one qubit subset is required")
        if not 0.0 <= self.sq_depol <= 1.0 or not 0.0 <= self.global_depol <= 1.0:
            raise InvalidConfig("Depolarizing probabilities must lie in [0, 1]")
        for subset in self.subsets:
            if len(subset) < 2:
                raise InvalidConfig(f"Subset {subset} needs at least two qubits")
            if self.max_experiments < len(subset) + 1:
                raise InvalidConfig(
                    f"max_experiments={self.max_experiments} cannot hold the {len(subset) + 1} "
                    f"circuits of subset {subset}"
                )
            if topo is not None:
                induced_subgraph(topo, subset)


@dataclass
class GraphJob:
    """One prepared graph state: its n+1 stabilizer circuits and bookkeeping."""
    subset_index: int
    method: str
    seq_index: int
    subset: Tuple[int, ...]
    seq: Tuple[int, ...]

    @property
    def key(self) -> str:
        return f'{self.subset_index}:{self.method}:{self.seq_index}'

    @property
    def size(self) -> int:
        return len(self.subset) + 1

    def __len__(self):
        return self.size


def plan_batches(groups: Sequence, max_per_batch: int) -> List[List]:
    """Greedy first-fit packing of whole groups; len(group) is its circuit count."""
    if max_per_batch < 1:
        raise InvalidConfig(f"max_per_batch must be >= 1, got {max_per_batch}")
    batches: List[List] = []
    loads: List[int] = []
    for group in groups:
        size = len(group)
        if size > max_per_batch:
            raise GroupTooLarge(f"Group of {size} circuits exceeds batch limit {max_per_batch}")
        for b, load in enumerate(loads):
            if load + size <= max_per_batch:
                batches[b].append(group)
                loads[b] += size
                break
        else:
            batches.append([group])
            loads.append(size)
    return batches


def _record_seed(seed: int, job: GraphJob, k: int) -> np.random.SeedSequence:
    method_index = METHODS.index(job.method)
    return np.random.SeedSequence([seed, _RECORD_STREAM, job.subset_index, method_index, job.seq_index, k])


def _error_records(job: GraphJob, n_stabilizers: int, error: Exception, batch: int) -> List[Dict]:
    return [{
        'id': f'{job.key}:{k}',
        'subset': list(job.subset),
        'method': job.method,
        'lc_seq': list(job.seq),
        'stabilizer_index': k,
        'batch': batch,
        'error': f'{type(error).__name__}: {error}',
    } for k in range(n_stabilizers)]


def _execute_job(job: GraphJob, cfg: RunConfig, topo: HardwareTopology, backend: SimulatedBackend,
                 mitigator: Optional[TensoredMitigator], batch: int) -> List[Dict]:
    try:
        base, _ = induced_subgraph(topo, job.subset)
        prep = build_circuit(job.method, topo, job.subset, job.seq)
        if job.method == UNITARY:
            # transformed base generators: pair them on edges of the base graph
            stabilizers, target = lc_stabilizers(base, job.seq)
            pairing = base
        else:
            target = apply_lc_sequence(base, job.seq)
            stabilizers = stabilizer_set(target)
            pairing = target
        tw = treewidth(target)
    except Exception as e:
        logger.error(f"Graph {job.key} on {list(job.subset)} failed to build: {e}")
        return _error_records(job, job.size, e, batch)

    layout = prep.layout
    bit_qubits = [prep.hardware_map[w] for w in layout]
    local_mitigator = mitigator.restrict(bit_qubits) if mitigator is not None else None
    state = prepare_state(prep) if cfg.mode == EXACT else None

    records = []
    for k, p in enumerate(stabilizers):
        record = {
            'id': f'{job.key}:{k}',
            'subset': list(job.subset),
            'method': job.method,
            'lc_seq': list(job.seq),
            'graph_edges': [list(e) for e in target.edge_list()],
            'witness_edges': [list(e) for e in pairing.edge_list()],
            'width': target.n,
            'treewidth': tw,
            'cnot_count': prep.cnot_count,
            'layout': list(layout),
            'stabilizer_index': k,
            'stabilizer': p.label,
            'weight': p.weight,
            'batch': batch,
            'error': None,
        }
        try:
            if cfg.mode == EXACT:
                raw = float(expectation_exact(state, p.on_wires(layout)))
                record.update(counts=None, raw=raw, mitigated=raw if cfg.mitigate else None)
            else:
                circ = stabilizer_circuit(prep, p)
                counts = backend.run([circ], cfg.shots, [_record_seed(cfg.seed, job, k)])[0]
                raw = p.phase * expectation_from_counts(counts, p.support)
                mitigated = None
                if local_mitigator is not None:
                    quasi = mitigate_counts(local_mitigator, counts)
                    mitigated = clamp_expectation(p.phase * expectation_from_counts(quasi, p.support))
                record.update(counts=counts, raw=raw, mitigated=mitigated)
        except Exception as e:
            logger.error(f"Record {record['id']} failed: {e}")
            record['error'] = f'{type(e).__name__}: {e}'
        records.append(record)
    return records


def _execute_batch(batch_index: int, jobs: List[GraphJob], cfg: RunConfig, topo: HardwareTopology,
                   backend: SimulatedBackend) -> List[Dict]:
    mitigator = None
    if cfg.mitigate and cfg.mode == SAMPLED:
        qubits = sorted({q for job in jobs for q in job.subset})
        seed = np.random.SeedSequence([cfg.seed, _CALIBRATION_STREAM, batch_index])
        try:
            mitigator = calibrate(backend, qubits, cfg.shots, seed)
        except ValidationError as e:
            logger.warning(f"Batch {batch_index}: calibration failed ({e}); mitigation skipped")
    logger.info(f"Batch {batch_index}: {len(jobs)} graphs, {sum(j.size for j in jobs)} circuits")

    records = []
    for job in jobs:
        records.extend(_execute_job(job, cfg, topo, backend, mitigator, batch_index))
    return records


def plan_jobs(cfg: RunConfig) -> List[GraphJob]:
    jobs = []
    for s, subset in enumerate(cfg.subsets):
        n = len(subset)
        seqs = sample_lc_sequences(n, cfg.sequence_count(n), np.random.SeedSequence([cfg.seed, _SEQUENCE_STREAM, s]))
        for method in cfg.methods:
            for j, seq in enumerate(seqs):
                jobs.append(GraphJob(s, method, j, tuple(subset), seq))
    return jobs


def run_benchmark(cfg: RunConfig, topology: Optional[HardwareTopology] = None) -> ResultSet:
    """Run every subset and method of cfg; failed records carry an 'error' tag."""
    topo = topology or cfg.load_topology()
    cfg.validate(topo)
    started = datetime.now(timezone.utc).isoformat()

    backend = SimulatedBackend(
        topo,
        sq_depol=cfg.sq_depol,
        readout=cfg.readout_noise,
        gates=cfg.gate_noise,
        global_depol=cfg.global_depol,
    )
    jobs = plan_jobs(cfg)
    batches = plan_batches(jobs, cfg.max_experiments)
    logger.info(f"Running {len(jobs)} graph states in {len(batches)} batches on {topo.name} ({cfg.mode})")

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            chunks = list(pool.map(lambda item: _execute_batch(item[0], item[1], cfg, topo, backend),
                                   enumerate(batches)))
    else:
        chunks = [_execute_batch(b, batch, cfg, topo, backend) for b, batch in enumerate(batches)]

    records = sorted((r for chunk in chunks for r in chunk), key=ResultSet.sort_key)
    rs = ResultSet(
        meta={
            'config': cfg.to_dict(),
            'topology': topo.to_dict(),
            'backend': backend.to_dict(),
            'seed': cfg.seed,
            'batches': len(batches),
            'started_at': started,
            'finished_at': datetime.now(timezone.utc).isoformat(),
        },
        records=records,
    )
    rs.derived = derive_tables(rs)

    failed = len(rs.failed_records)
    if failed:
        logger.warning(f"{failed} of {len(records)} records failed")
    if cfg.output:
        rs.save(cfg.output)
    return rs


def _group_records(records: Sequence[Dict]) -> Dict[str, List[Dict]]:
    groups: Dict[str, List[Dict]] = {}
    for record in sorted(records, key=ResultSet.sort_key):
        key = record['id'].rsplit(':', 1)[0]
        groups.setdefault(key, []).append(record)
    return groups


def _witness_values(gens: List[Dict], field_name: str, graph: Graph, subset: List[int]):
    values = [r[field_name] for r in gens]
    if any(v is None for v in values):
        return None, []
    genuine = genuine_witness(values, graph.n)
    edges = [{'edge': list(edge), 'qubits': [subset[edge[0]], subset[edge[1]]], 'value': value}
             for edge, value in biseparable_witnesses(values, graph)]
    return genuine, edges


def witness_table(records: Sequence[Dict]) -> List[Dict]:
    """One entry per prepared graph state with complete generator records.

    The identity record is excluded; generator expectations are indexed by
    vertex. Biseparable pairs run over witness_edges: the prepared graph for
    the naive method, the base graph for the unitary method, whose generators
    are the base generators conjugated by local Cliffords.
    """
    table = []
    for key, group in _group_records(records).items():
        if any(r.get('error') for r in group):
            logger.warning(f"Skipping witness for {key}: failed records")
            continue
        first = group[0]
        n = first['width']
        gens = [r for r in group if r['stabilizer_index'] < n]
        if len(gens) != n:
            continue
        pairing = Graph.from_edges(n, first.get('witness_edges', first['graph_edges']))
        entry = {
            'graph': key,
            'subset': first['subset'],
            'method': first['method'],
            'lc_seq': first['lc_seq'],
            'width': n,
            'treewidth': first['treewidth'],
            'cnot_count': first['cnot_count'],
            'graph_edges': first['graph_edges'],
            'witness_edges': [list(e) for e in pairing.edge_list()],
        }
        for field_name in ('raw', 'mitigated'):
            genuine, edges = _witness_values(gens, field_name, pairing, first['subset'])
            entry[field_name] = {
                GENUINE: genuine,
                BISEPARABLE: min((e['value'] for e in edges), default=None),
                'edges': edges,
            }
        table.append(entry)
    return table


@dataclass
class Heatmap:
    """Median witness per (width, treewidth); absent cells are simply missing."""
    method: Optional[str]
    witness: str
    mitigated: bool
    cells: Dict[Tuple[int, int], float] = field(default_factory=dict)
    counts: Dict[Tuple[int, int], int] = field(default_factory=dict)

    @property
    def widths(self) -> List[int]:
        return sorted({n for n, _ in self.cells})

    @property
    def treewidths(self) -> List[int]:
        return sorted({tw for _, tw in self.cells})

    def get(self, n: int, tw: int) -> Optional[float]:
        return self.cells.get((n, tw))

    def to_dict(self) -> dict:
        return {
            'method': self.method,
            'witness': self.witness,
            'mitigated': self.mitigated,
            'cells': [{'width': n, 'treewidth': tw, 'median': self.cells[(n, tw)], 'count': self.counts[(n, tw)]}
                      for n, tw in sorted(self.cells)],
        }


def median_heatmap(rs, witness: str = GENUINE, mitigated: bool = False, method: Optional[str] = None) -> Heatmap:
    """Group per-graph witness values by (width, treewidth) of the prepared graph."""
    if witness not in (GENUINE, BISEPARABLE):
        raise ValidationError(f"Unknown witness '{witness}'")
    entries = rs.witnesses if isinstance(rs, ResultSet) else rs
    field_name = 'mitigated' if mitigated else 'raw'

    grouped: Dict[Tuple[int, int], List[float]] = {}
    for entry in entries:
        if method is not None and entry['method'] != method:
            continue
        value = entry[field_name][witness]
        if value is None:
            continue
        grouped.setdefault((entry['width'], entry['treewidth']), []).append(value)

    heatmap = Heatmap(method=method, witness=witness, mitigated=mitigated)
    for cell, values in grouped.items():
        heatmap.cells[cell] = float(np.median(values))
        heatmap.counts[cell] = len(values)
    return heatmap


def _negative_cells(heatmap: Heatmap) -> List[Tuple[int, int]]:
    return [cell for cell, value in heatmap.cells.items() if value < 0]


def res_score(heatmap: Heatmap) -> int:
    """Largest width x treewidth over cells whose median witness is negative."""
    return max((n * tw for n, tw in _negative_cells(heatmap)), default=0)


def res_axes(heatmap: Heatmap) -> Tuple[int, int]:
    """Largest width and largest treewidth over negative cells, possibly from different cells."""
    cells = _negative_cells(heatmap)
    return max((n for n, _ in cells), default=0), max((tw for _, tw in cells), default=0)


def scores(rs, mitigated: bool = False) -> Dict:
    out = {}
    for method in METHODS:
        heatmap = median_heatmap(rs, GENUINE, mitigated, method)
        max_n, max_tw = res_axes(heatmap)
        out[method] = {'res': res_score(heatmap), 'max_width': max_n, 'max_treewidth': max_tw}
    return out


def derive_tables(rs: ResultSet) -> Dict:
    witnesses = witness_table(rs.records)
    heatmaps = []
    for method in rs.methods:
        for witness in (GENUINE, BISEPARABLE):
            for mitigated in (False, True):
                heatmap = median_heatmap(witnesses, witness, mitigated, method)
                if heatmap.cells:
                    heatmaps.append(heatmap.to_dict())
    return {
        'witnesses': witnesses,
        'heatmaps': heatmaps,
        'scores': {
            'raw': scores(witnesses, mitigated=False),
            'mitigated': scores(witnesses, mitigated=True),
        },
    }

