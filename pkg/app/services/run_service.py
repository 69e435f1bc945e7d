import json
import os
from datetime import datetime
from pathlib import Path
from typing import Optional

from app import db
from app.models import BenchmarkRun
from app.services.results import ResultSet
from app.services.runner import RunConfig, run_benchmark


def results_dir() -> Path:
    return Path(os.getenv('RESULTS_DIR', 'results'))


class RunService:
    """Executes benchmark runs and keeps the run registry in sync with ResultSet files."""

    @staticmethod
    def _apply_scores(run: BenchmarkRun, rs: ResultSet):
        summary = rs.summary()
        run.record_count = summary['records']
        run.failed_count = summary['failed']
        scores = rs.derived.get('scores', {})
        raw = scores.get('raw', {})
        mitigated = scores.get('mitigated', {})
        run.res_naive = raw.get('naive', {}).get('res')
        run.res_unitary = raw.get('unitary', {}).get('res')
        run.res_naive_mitigated = mitigated.get('naive', {}).get('res')
        run.res_unitary_mitigated = mitigated.get('unitary', {}).get('res')

    @staticmethod
    def execute(cfg: RunConfig, name: Optional[str] = None) -> BenchmarkRun:
        """
        Run a benchmark synchronously and register it.

        Validation errors propagate before anything is stored; failures during
        the run leave a 'failed' row with the error message.
        """
        cfg.validate(cfg.load_topology())
        run = BenchmarkRun(
            name=name or f'{Path(cfg.topology).stem}-{cfg.seed}',
            topology=cfg.topology,
            status='running',
            config_json=json.dumps(cfg.to_dict(), sort_keys=True),
        )
        db.session.add(run)
        db.session.commit()

        if not cfg.output:
            cfg.output = str(results_dir() / f'run_{run.id}.jsonl')
        run.result_path = cfg.output
        run.config_json = json.dumps(cfg.to_dict(), sort_keys=True)

        try:
            rs = run_benchmark(cfg)
            RunService._apply_scores(run, rs)
            run.status = 'completed'
        except Exception as e:
            run.status = 'failed'
            run.error = str(e)
        run.finished_at = datetime.utcnow()
        db.session.commit()
        return run

    @staticmethod
    def import_results(path: str, name: Optional[str] = None) -> BenchmarkRun:
        """Register an existing ResultSet file."""
        rs = ResultSet.load(path)
        config = rs.meta.get('config', {})
        run = BenchmarkRun(
            name=name or Path(path).stem,
            topology=config.get('topology') or rs.meta.get('topology', {}).get('name', 'unknown'),
            status='completed',
            config_json=json.dumps(config, sort_keys=True) if config else None,
            result_path=str(path),
            finished_at=datetime.utcnow(),
        )
        RunService._apply_scores(run, rs)
        db.session.add(run)
        db.session.commit()
        return run

    @staticmethod
    def load_results(run: BenchmarkRun) -> ResultSet:
        return ResultSet.load(run.result_path)

    @staticmethod
    def delete(run: BenchmarkRun, remove_files: bool = False):
        if remove_files and run.result_path:
            path = Path(run.result_path)
            for target in (path, path.with_name(f'{path.stem}.derived.json')):
                if target.exists():
                    target.unlink()
        db.session.delete(run)
        db.session.commit()

    @staticmethod
    def stats() -> dict:
        counts = {}
        for status, in db.session.query(BenchmarkRun.status).all():
            counts[status] = counts.get(status, 0) + 1
        total_records = db.session.query(db.func.coalesce(db.func.sum(BenchmarkRun.record_count), 0)).scalar()
        return {
            'runs': {'total': sum(counts.values()), 'by_status': counts},
            'records': int(total_records or 0),
        }
