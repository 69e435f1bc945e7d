#!/usr/bin/env python3
"""Register ResultSet files from the results directory in the run registry."""
import os
import sys
from pathlib import Path

# Add the parent directory to the path so we can import app
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dotenv import load_dotenv
load_dotenv()

from app import create_app
from app.models import BenchmarkRun
from app.services.errors import ValidationError
from app.services.run_service import RunService, results_dir


def find_result_files(directory):
    """ResultSet files (*.jsonl) in directory, sorted by name."""
    directory = Path(directory)
    if not directory.exists():
        return []
    return sorted(directory.glob('*.jsonl'))


def register_results(directory=None, replace_existing=False):
    """
    Register every ResultSet file found in directory.

    Args:
        directory: Where to look; defaults to RESULTS_DIR.
        replace_existing: If True, re-import files that are already registered.

    Returns:
        Dictionary with counts of added, replaced, skipped and failed files.
    """
    app = create_app()

    with app.app_context():
        stats = {'added': 0, 'replaced': 0, 'skipped': 0, 'failed': 0}

        for path in find_result_files(directory or results_dir()):
            existing = BenchmarkRun.query.filter_by(result_path=str(path)).first()

            if existing:
                if not replace_existing:
                    stats['skipped'] += 1
                    continue
                RunService.delete(existing)

            try:
                RunService.import_results(str(path))
            except ValidationError as e:
                app.logger.warning(f"Could not import {path}: {e}")
                stats['failed'] += 1
                continue
            stats['replaced' if existing else 'added'] += 1

        return stats


def main():
    """Main entry point."""
    import argparse

    parser = argparse.ArgumentParser(description='Register ResultSet files in the run registry')
    parser.add_argument('--dir', default=None, help='Directory to scan (default: RESULTS_DIR)')
    parser.add_argument(
        '--replace',
        action='store_true',
        help='Re-import files that are already registered'
    )
    parser.add_argument(
        '--list',
        action='store_true',
        help='List result files without registering them'
    )

    args = parser.parse_args()

    if args.list:
        files = find_result_files(args.dir or results_dir())
        print(f"\nResult files ({len(files)} total):\n")
        for path in files:
            print(f"  {path}")
        return

    print("Registering result files...")
    stats = register_results(directory=args.dir, replace_existing=args.replace)

    print(f"\nResults:")
    print(f"  Added:    {stats['added']}")
    print(f"  Replaced: {stats['replaced']}")
    print(f"  Skipped:  {stats['skipped']}")
    print(f"  Failed:   {stats['failed']}")


if __name__ == '__main__':
    main()
