import os
from unittest.mock import patch

import pytest
from app import create_app, db
from app.models import BenchmarkRun


@pytest.fixture
def app(monkeypatch, tmp_path):
    """Create test application."""
    monkeypatch.setenv('DATABASE_URL', 'sqlite:///:memory:')
    monkeypatch.setenv('RESULTS_DIR', str(tmp_path / 'results'))
    app = create_app()
    app.config['TESTING'] = True

    with app.app_context():
        db.create_all()
        yield app
        db.drop_all()


@pytest.fixture
def client(app):
    """Create test client."""
    return app.test_client()


@pytest.fixture
def run_body():
    return {
        'name': 'quick',
        'topology': 'belem_5',
        'subsets': [[0, 1, 2]],
        'mode': 'exact',
        'sequences': 2,
        'seed': 11,
    }


@pytest.fixture
def sample_run(client, run_body):
    """Execute a small exact run through the API."""
    response = client.post('/runs', json=run_body)
    assert response.status_code == 201
    return response.get_json()['run']['id']


class TestHealthEndpoint:
    def test_health_check(self, client):
        """Test health endpoint returns healthy status."""
        response = client.get('/api/v1/health')
        assert response.status_code == 200
        data = response.get_json()
        assert data['status'] == 'healthy'
        assert 'timestamp' in data


class TestTopologiesAPI:
    def test_list_topologies(self, client):
        response = client.get('/topologies')
        assert response.status_code == 200
        data = response.get_json()
        names = [t['name'] for t in data['topologies']]
        assert 'belem_5' in names
        assert data['count'] == len(names)

    def test_get_topology(self, client):
        response = client.get('/topologies/belem_5')
        assert response.status_code == 200
        topo = response.get_json()['topology']
        assert topo['n_qubits'] == 5
        assert [0, 1] in topo['couplers']

    def test_get_topology_not_found(self, client):
        response = client.get('/topologies/nowhere_9')
        assert response.status_code == 404

    def test_validate_topology(self, client):
        response = client.post('/topologies/validate', json={
            'name': 'pair', 'n_qubits': 2, 'couplers': [[0, 1]],
        })
        assert response.status_code == 200
        assert response.get_json()['valid'] is True

    def test_validate_invalid_topology(self, client):
        response = client.post('/topologies/validate', json={
            'name': 'split', 'n_qubits': 4, 'couplers': [[0, 1], [2, 3]],
        })
        assert response.status_code == 400
        assert response.get_json()['valid'] is False

    def test_orbit(self, client):
        """Star on four qubits: K4 plus one star per center."""
        response = client.get('/topologies/belem_5/orbit?qubits=0,1,2,3')
        assert response.status_code == 200
        data = response.get_json()
        assert data['size'] == 5
        assert data['truncated'] is False
        assert data['treewidths'] == {'1': 4, '3': 1}

    def test_orbit_truncated(self, client):
        response = client.get('/topologies/belem_5/orbit?qubits=0,1,2,3&limit=2')
        data = response.get_json()
        assert data['size'] == 2
        assert data['truncated'] is True

    def test_orbit_disconnected(self, client):
        response = client.get('/topologies/belem_5/orbit?qubits=0,4')
        assert response.status_code == 400

    def test_orbit_requires_qubits(self, client):
        response = client.get('/topologies/belem_5/orbit')
        assert response.status_code == 400


class TestRunsAPI:
    def test_list_runs_empty(self, client):
        response = client.get('/runs')
        assert response.status_code == 200
        data = response.get_json()
        assert data['runs'] == []
        assert data['count'] == 0

    def test_create_run(self, client, run_body):
        response = client.post('/runs', json=run_body)
        assert response.status_code == 201
        run = response.get_json()['run']
        assert run['name'] == 'quick'
        assert run['status'] == 'completed'
        assert run['records'] == 16
        assert run['failed_records'] == 0
        assert run['scores']['raw']['naive'] in (3, 6)
        assert run['config']['mode'] == 'exact'
        assert os.path.exists(run['result_path'])

    def test_create_run_missing_body(self, client):
        response = client.post('/runs', json={})
        assert response.status_code == 400

    def test_create_run_invalid_config(self, client, run_body):
        run_body['subsets'] = [[0, 4]]
        response = client.post('/runs', json=run_body)
        assert response.status_code == 400
        assert BenchmarkRun.query.count() == 0

    def test_create_run_unknown_field(self, client, run_body):
        run_body['qubits'] = [0, 1]
        response = client.post('/runs', json=run_body)
        assert response.status_code == 400

    def test_create_run_bad_types(self, client, run_body):
        run_body['subsets'] = [['a', 'b']]
        response = client.post('/runs', json=run_body)
        assert response.status_code == 400

    def test_create_run_failure(self, client, run_body):
        with patch('app.services.run_service.run_benchmark', side_effect=RuntimeError('simulator crashed')):
            response = client.post('/runs', json=run_body)
        assert response.status_code == 500
        run = response.get_json()['run']
        assert run['status'] == 'failed'
        assert 'simulator crashed' in run['error']

    def test_list_runs_with_data(self, client, sample_run):
        response = client.get('/runs')
        data = response.get_json()
        assert data['count'] == 1
        assert data['runs'][0]['id'] == sample_run

    def test_list_runs_status_filter(self, client, sample_run):
        assert client.get('/runs?status=completed').get_json()['count'] == 1
        assert client.get('/runs?status=failed').get_json()['count'] == 0

    def test_get_run(self, client, sample_run):
        response = client.get(f'/runs/{sample_run}')
        assert response.status_code == 200
        assert response.get_json()['run']['config']['seed'] == 11

    def test_get_run_not_found(self, client):
        response = client.get('/runs/999')
        assert response.status_code == 404

    def test_scores(self, client, sample_run):
        response = client.get(f'/runs/{sample_run}/scores')
        assert response.status_code == 200
        data = response.get_json()
        assert set(data['raw']) == {'naive', 'unitary'}
        assert data['raw']['unitary']['max_width'] == 3

    def test_heatmap(self, client, sample_run):
        response = client.get(f'/runs/{sample_run}/heatmap?method=naive&witness=biseparable')
        assert response.status_code == 200
        heatmap = response.get_json()['heatmap']
        assert heatmap['method'] == 'naive'
        assert heatmap['witness'] == 'biseparable'
        assert all(cell['median'] == -1.0 for cell in heatmap['cells'])

    def test_heatmap_unknown_witness(self, client, sample_run):
        response = client.get(f'/runs/{sample_run}/heatmap?witness=concurrence')
        assert response.status_code == 400

    def test_correlations(self, client, sample_run):
        response = client.get(f'/runs/{sample_run}/correlations')
        assert response.status_code == 200
        matrix = response.get_json()['correlations']
        assert matrix['features'] == ['width', 'cnot_count', 'weight', 'treewidth', 'expectation']
        assert matrix['n'] == 12

    def test_delete_run(self, client, sample_run):
        path = client.get(f'/runs/{sample_run}').get_json()['run']['result_path']
        response = client.delete(f'/runs/{sample_run}?remove_files=true')
        assert response.status_code == 200
        assert not os.path.exists(path)
        assert client.get(f'/runs/{sample_run}').status_code == 404

    def test_scores_missing_file(self, client, sample_run):
        path = client.get(f'/runs/{sample_run}').get_json()['run']['result_path']
        os.remove(path)
        response = client.get(f'/runs/{sample_run}/scores')
        assert response.status_code == 404

    def test_import_run(self, client, sample_run):
        path = client.get(f'/runs/{sample_run}').get_json()['run']['result_path']
        response = client.post('/runs/import', json={'path': path})
        assert response.status_code == 409

        client.delete(f'/runs/{sample_run}')
        response = client.post('/runs/import', json={'path': path, 'name': 'again'})
        assert response.status_code == 201
        run = response.get_json()['run']
        assert run['name'] == 'again'
        assert run['records'] == 16

    def test_import_missing(self, client, tmp_path):
        response = client.post('/runs/import', json={'path': str(tmp_path / 'none.jsonl')})
        assert response.status_code == 400


class TestStatsAPI:
    def test_get_stats(self, client, sample_run):
        """Test stats endpoint."""
        response = client.get('/api/v1/stats')
        assert response.status_code == 200
        data = response.get_json()
        assert data['runs']['total'] == 1
        assert data['runs']['by_status'] == {'completed': 1}
        assert data['records'] == 16
        assert data['topologies'] >= 4
