#!/usr/bin/env python3
"""Re-run a benchmark config across CNOT noise levels and print RES per point."""
import json
import os
import sys

# Add the parent directory to the path so we can import app
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dotenv import load_dotenv
load_dotenv()

from app.services.runner import RunConfig, run_benchmark, scores


def sweep(cfg, scales=None, values=None):
    """
    Run cfg once per noise point.

    Args:
        cfg: RunConfig to repeat; output paths are ignored.
        scales: Factors applied to every coupler's CNOT error.
        values: Fixed CNOT errors applied to every coupler (overrides scales).

    Returns:
        List of dicts with the noise point and RES per method.
    """
    base = cfg.load_topology()
    cfg = cfg.with_overrides()
    cfg.output = None

    points = [('cnot_err', v) for v in values] if values else [('scale', s) for s in scales]
    results = []
    for kind, point in points:
        if kind == 'cnot_err':
            topo = base.with_errors(cnot_err=point)
        else:
            topo = base.with_errors(cnot_scale=point)
        rs = run_benchmark(cfg, topology=topo)
        table = scores(rs)
        results.append({
            kind: point,
            'res_naive': table['naive']['res'],
            'res_unitary': table['unitary']['res'],
            'failed': len(rs.failed_records),
        })
    return results


def main():
    """Main entry point."""
    import argparse

    parser = argparse.ArgumentParser(description='Sweep CNOT error levels for a benchmark config')
    parser.add_argument('config', help='RunConfig JSON file')
    parser.add_argument(
        '--scales',
        default='1,2,4,8',
        help='Comma-separated factors applied to the topology CNOT errors'
    )
    parser.add_argument(
        '--values',
        default=None,
        help='Comma-separated fixed CNOT errors (e.g. 0.001,0.005,0.01,0.02,0.05)'
    )
    parser.add_argument('--shots', type=int, default=None, help='Override shots per circuit')
    parser.add_argument('--json', action='store_true', help='Print JSON instead of a table')

    args = parser.parse_args()

    cfg = RunConfig.from_file(args.config).with_overrides(shots=args.shots)
    scales = [float(s) for s in args.scales.split(',')]
    values = [float(v) for v in args.values.split(',')] if args.values else None

    results = sweep(cfg, scales=scales, values=values)

    if args.json:
        print(json.dumps(results, indent=2))
        return

    label = 'cnot_err' if values else 'scale'
    print(f"\n{label:>10}  {'RES-Naive':>10}  {'RES-Unitary':>12}")
    for row in results:
        print(f"{row[label]:>10}  {row['res_naive']:>10}  {row['res_unitary']:>12}")


if __name__ == '__main__':
    main()
