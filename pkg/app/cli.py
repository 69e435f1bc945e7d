"""Command-line interface: `python bench.py ...` or `flask bench ...`."""
import functools
import json
import logging
import os
import sys
from collections import Counter
from pathlib import Path

import click

from app.services.errors import BenchmarkError, ValidationError
from app.services.graphs import TREEWIDTH_MAX_VERTICES, apply_lc_sequence, enumerate_orbit, sample_lc_sequences, treewidth
from app.services.report import EXPORT_KINDS, export
from app.services.results import ResultSet
from app.services.runner import RunConfig, run_benchmark, scores
from app.services.topology import HardwareTopology, induced_subgraph

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 1
EXIT_RUNTIME = 2


def handle_errors(func):
    """Map validation failures to exit 1 and everything else to exit 2."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as e:
            click.echo(f'error: {e}', err=True)
            sys.exit(EXIT_VALIDATION)
        except (BenchmarkError, OSError) as e:
            click.echo(f'error: {e}', err=True)
            sys.exit(EXIT_RUNTIME)
        except Exception as e:
            logger.exception("Unexpected failure")
            click.echo(f'error: {e}', err=True)
            sys.exit(EXIT_RUNTIME)
    return wrapper


def require_file(path: str) -> Path:
    """Missing inputs are validation failures (exit 1), not click usage errors."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"No such file: {path}")
    return path


def load_topology(value: str) -> HardwareTopology:
    """A bundled topology name or a path to a topology JSON file."""
    if Path(value).exists():
        return HardwareTopology.from_file(value)
    return HardwareTopology.bundled(value)


def parse_qubits(value: str):
    try:
        return [int(q) for q in value.split(',') if q.strip()]
    except ValueError:
        raise ValidationError(f"--qubits expects comma-separated integers, got '{value}'")


@click.group()
def bench():
    """Graph-state entanglement benchmark."""
    logging.basicConfig(
        level=os.getenv('LOG_LEVEL', 'INFO').upper(),
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )


@bench.group()
def topology():
    """Inspect topology files."""


@topology.command('validate')
@click.argument('path', type=click.Path(dir_okay=False))
@handle_errors
def topology_validate(path):
    require_file(path)
    topo = HardwareTopology.from_file(path)
    click.echo(f'{topo.name}: {topo.n_qubits} qubits, {len(topo.couplers)} couplers, '
               f'mean CNOT error {topo.mean_cnot_error():.4f}')


@bench.group()
def orbit():
    """Sample or enumerate LC orbits of an induced subgraph."""


@orbit.command('sample')
@click.option('--topology', 'topology_name', required=True, help='Bundled name or topology file')
@click.option('--qubits', required=True, help='Comma-separated hardware qubits')
@click.option('--seed', type=int, default=lambda: int(os.getenv('RES_SEED', 1234)), show_default='RES_SEED')
@click.option('--count', type=int, default=None, help='Sequences to draw (default 2^(n+1))')
@handle_errors
def orbit_sample(topology_name, qubits, seed, count):
    graph, _ = induced_subgraph(load_topology(topology_name), parse_qubits(qubits))
    count = count or 2 ** (graph.n + 1)
    for seq in sample_lc_sequences(graph.n, count, seed):
        target = apply_lc_sequence(graph, seq)
        tw = treewidth(target) if target.n <= TREEWIDTH_MAX_VERTICES else None
        click.echo(json.dumps({'lc_seq': list(seq), 'edges': target.to_dict()['edges'], 'treewidth': tw}))


@orbit.command('enumerate')
@click.option('--topology', 'topology_name', required=True, help='Bundled name or topology file')
@click.option('--qubits', required=True, help='Comma-separated hardware qubits')
@click.option('--limit', type=int, default=10000, show_default=True)
@handle_errors
def orbit_enumerate(topology_name, qubits, limit):
    graph, _ = induced_subgraph(load_topology(topology_name), parse_qubits(qubits))
    result = enumerate_orbit(graph, limit=limit)
    click.echo(f'orbit size: {len(result)}{" (truncated)" if result.truncated else ""}')
    if graph.n <= TREEWIDTH_MAX_VERTICES:
        histogram = Counter(treewidth(g) for g in result.graphs)
        for tw, count in sorted(histogram.items()):
            click.echo(f'treewidth {tw}: {count}')


@bench.command('run')
@click.option('--config', 'config_path', required=True, type=click.Path(dir_okay=False))
@click.option('--seed', type=int, default=None)
@click.option('--mitigate/--no-mitigate', default=None)
@click.option('--method', type=click.Choice(['naive', 'unitary', 'both']), default=None)
@click.option('--shots', type=int, default=None)
@click.option('--mode', type=click.Choice(['sampled', 'exact']), default=None)
@click.option('--workers', type=int, default=None)
@click.option('--out', 'output', type=click.Path(dir_okay=False), default=None)
@handle_errors
def run_command(config_path, seed, mitigate, method, shots, mode, workers, output):
    """Execute a RunConfig; flags override file values."""
    require_file(config_path)
    cfg = RunConfig.from_file(config_path).with_overrides(
        seed=seed, mitigate=mitigate, method=method, shots=shots, mode=mode, workers=workers, output=output,
    )
    if not cfg.output:
        cfg.output = str(Path(os.getenv('RESULTS_DIR', 'results')) / f'{Path(config_path).stem}.jsonl')
    rs = run_benchmark(cfg)
    summary = rs.summary()
    click.echo(f"{summary['records']} records ({summary['failed']} failed) -> {cfg.output}")
    _echo_scores(rs, mitigated=False)
    if cfg.mitigate:
        _echo_scores(rs, mitigated=True)


def _echo_scores(rs: ResultSet, mitigated: bool):
    label = 'mitigated' if mitigated else 'raw'
    table = scores(rs, mitigated=mitigated)
    click.echo(f"[{label}] RES-Naive={table['naive']['res']} RES-Unitary={table['unitary']['res']}")
    for method in ('naive', 'unitary'):
        click.echo(f"[{label}] {method}: max-n={table[method]['max_width']} "
                   f"max-tw={table[method]['max_treewidth']}")


@bench.command('score')
@click.argument('resultset', type=click.Path(dir_okay=False))
@click.option('--mitigated', is_flag=True, default=False)
@handle_errors
def score_command(resultset, mitigated):
    """Print RES-Naive, RES-Unitary, max-n and max-tw."""
    require_file(resultset)
    _echo_scores(ResultSet.load(resultset), mitigated=mitigated)


@bench.command('report')
@click.argument('resultset', type=click.Path(dir_okay=False))
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False))
@click.option('--emit', default='heatmap-csv,scores-json', show_default=True,
              help=f"Comma-separated: {', '.join(EXPORT_KINDS)}")
@handle_errors
def report_command(resultset, out_dir, emit):
    require_file(resultset)
    rs = ResultSet.load(resultset)
    kinds = [k.strip() for k in emit.split(',') if k.strip()]
    unknown = [k for k in kinds if k not in EXPORT_KINDS]
    if unknown:
        raise ValidationError(f"Unknown export kinds: {', '.join(unknown)}")
    for kind in kinds:
        for path in export(rs, kind, out_dir):
            click.echo(str(path))
