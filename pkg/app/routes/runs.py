from flask import Blueprint, request, jsonify
from sqlalchemy import desc
from app.models import BenchmarkRun
from app.services.errors import ValidationError
from app.services.report import correlation_matrix
from app.services.run_service import RunService
from app.services.runner import RunConfig, median_heatmap, scores
from app.services.witness import GENUINE
import logging

logger = logging.getLogger(__name__)

runs_bp = Blueprint('runs', __name__)


def _load_results(run):
    try:
        return RunService.load_results(run), None
    except ValidationError as e:
        return None, (jsonify({'error': f'Result set unavailable: {e}'}), 404)


@runs_bp.route('', methods=['GET'])
def list_runs():
    """
    List registered benchmark runs.

    Query params:
    - status: Filter by status
    - limit: Max runs to return (default 50, max 200)
    """
    query = BenchmarkRun.query
    status = request.args.get('status')
    if status:
        query = query.filter_by(status=status)

    limit = min(request.args.get('limit', 50, type=int), 200)
    runs = query.order_by(desc(BenchmarkRun.created_at)).limit(limit).all()
    return jsonify({
        'runs': [r.to_dict() for r in runs],
        'count': len(runs)
    })


@runs_bp.route('', methods=['POST'])
def create_run():
    """Execute a RunConfig body synchronously."""
    data = request.get_json()
    if not data:
        return jsonify({'error': 'Run configuration is required'}), 400

    name = data.pop('name', None)
    try:
        cfg = RunConfig.from_dict(data)
        run = RunService.execute(cfg, name=name)
    except ValidationError as e:
        return jsonify({'error': str(e)}), 400
    except (TypeError, ValueError) as e:
        return jsonify({'error': f'Invalid configuration: {e}'}), 400

    if run.status == 'failed':
        logger.error(f"Run {run.id} failed: {run.error}")
        return jsonify({'error': 'Run failed', 'run': run.to_dict()}), 500
    return jsonify({'message': 'Run completed', 'run': run.to_dict(include_config=True)}), 201


@runs_bp.route('/import', methods=['POST'])
def import_run():
    """Register an existing ResultSet file."""
    data = request.get_json()
    if not data or not data.get('path'):
        return jsonify({'error': 'path is required'}), 400

    if BenchmarkRun.query.filter_by(result_path=data['path']).first():
        return jsonify({'error': 'Result set already registered'}), 409

    try:
        run = RunService.import_results(data['path'], name=data.get('name'))
    except ValidationError as e:
        return jsonify({'error': str(e)}), 400
    return jsonify({'message': 'Run imported', 'run': run.to_dict()}), 201


@runs_bp.route('/<int:run_id>', methods=['GET'])
def get_run(run_id):
    run = BenchmarkRun.query.get_or_404(run_id)
    return jsonify({'run': run.to_dict(include_config=True)})


@runs_bp.route('/<int:run_id>', methods=['DELETE'])
def delete_run(run_id):
    """Delete a run; ?remove_files=true also deletes its result files."""
    run = BenchmarkRun.query.get_or_404(run_id)
    name = run.name
    remove_files = request.args.get('remove_files', 'false').lower() == 'true'
    RunService.delete(run, remove_files=remove_files)
    return jsonify({'message': f'Run "{name}" deleted'})


@runs_bp.route('/<int:run_id>/scores', methods=['GET'])
def get_scores(run_id):
    run = BenchmarkRun.query.get_or_404(run_id)
    rs, error = _load_results(run)
    if error:
        return error
    return jsonify({
        'run_id': run.id,
        'raw': scores(rs, mitigated=False),
        'mitigated': scores(rs, mitigated=True),
    })


@runs_bp.route('/<int:run_id>/heatmap', methods=['GET'])
def get_heatmap(run_id):
    """
    Median witness heatmap.

    Query params:
    - method: naive or unitary (default: all methods pooled)
    - witness: genuine or biseparable (default genuine)
    - mitigated: true/false (default false)
    """
    run = BenchmarkRun.query.get_or_404(run_id)
    rs, error = _load_results(run)
    if error:
        return error

    witness = request.args.get('witness', GENUINE)
    mitigated = request.args.get('mitigated', 'false').lower() == 'true'
    try:
        heatmap = median_heatmap(rs, witness, mitigated, request.args.get('method'))
    except ValidationError as e:
        return jsonify({'error': str(e)}), 400
    return jsonify({'run_id': run.id, 'heatmap': heatmap.to_dict()})


@runs_bp.route('/<int:run_id>/correlations', methods=['GET'])
def get_correlations(run_id):
    run = BenchmarkRun.query.get_or_404(run_id)
    rs, error = _load_results(run)
    if error:
        return error

    mitigated = request.args.get('mitigated', 'false').lower() == 'true'
    try:
        matrix = correlation_matrix(rs, mitigated=mitigated, method=request.args.get('method'), strict=False)
    except ValidationError as e:
        return jsonify({'error': str(e)}), 400
    return jsonify({'run_id': run.id, 'correlations': matrix})
