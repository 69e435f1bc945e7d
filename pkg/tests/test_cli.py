import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from app.cli import bench

TOPOLOGY_DIR = Path(__file__).resolve().parents[1] / 'data' / 'topologies'


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / 'quick.json'
    path.write_text(json.dumps({
        'topology': 'belem_5',
        'subsets': [[0, 1, 2]],
        'mode': 'exact',
        'sequences': 2,
        'seed': 5,
    }))
    return path


@pytest.fixture
def resultset(runner, config_path, tmp_path):
    out = tmp_path / 'out' / 'quick.jsonl'
    result = runner.invoke(bench, ['run', '--config', str(config_path), '--out', str(out)])
    assert result.exit_code == 0, result.output
    return out


class TestTopologyCommands:
    def test_validate(self, runner):
        result = runner.invoke(bench, ['topology', 'validate', str(TOPOLOGY_DIR / 'belem_5.json')])
        assert result.exit_code == 0
        assert 'belem_5: 5 qubits, 4 couplers' in result.output

    def test_validate_invalid(self, runner, tmp_path):
        path = tmp_path / 'split.json'
        path.write_text(json.dumps({'name': 'split', 'n_qubits': 4, 'couplers': [[0, 1], [2, 3]]}))
        result = runner.invoke(bench, ['topology', 'validate', str(path)])
        assert result.exit_code == 1
        assert 'error:' in result.output


class TestOrbitCommands:
    def test_sample(self, runner):
        result = runner.invoke(bench, ['orbit', 'sample', '--topology', 'belem_5', '--qubits', '0,1,2',
                                       '--seed', '3', '--count', '5'])
        assert result.exit_code == 0
        lines = [json.loads(line) for line in result.output.splitlines()]
        assert len(lines) == 5
        assert all(row['treewidth'] in (1, 2) for row in lines)

    def test_sample_default_count(self, runner):
        result = runner.invoke(bench, ['orbit', 'sample', '--topology', 'belem_5', '--qubits', '0,1'])
        assert result.exit_code == 0
        assert len(result.output.splitlines()) == 8

    def test_sample_deterministic(self, runner):
        args = ['orbit', 'sample', '--topology', 'belem_5', '--qubits', '0,1,2,3', '--seed', '9']
        assert runner.invoke(bench, args).output == runner.invoke(bench, args).output

    def test_enumerate(self, runner):
        result = runner.invoke(bench, ['orbit', 'enumerate', '--topology', 'belem_5', '--qubits', '0,1,2,3'])
        assert result.exit_code == 0
        assert 'orbit size: 5' in result.output
        assert 'treewidth 1: 4' in result.output
        assert 'treewidth 3: 1' in result.output

    def test_enumerate_disconnected(self, runner):
        result = runner.invoke(bench, ['orbit', 'enumerate', '--topology', 'belem_5', '--qubits', '0,4'])
        assert result.exit_code == 1

    def test_unknown_topology(self, runner):
        result = runner.invoke(bench, ['orbit', 'enumerate', '--topology', 'nowhere_9', '--qubits', '0,1'])
        assert result.exit_code == 1


class TestRunCommands:
    def test_run(self, runner, config_path, tmp_path):
        out = tmp_path / 'run.jsonl'
        result = runner.invoke(bench, ['run', '--config', str(config_path), '--out', str(out)])
        assert result.exit_code == 0, result.output
        assert '16 records (0 failed)' in result.output
        assert '[raw] RES-Naive=' in result.output
        assert out.exists()
        assert (tmp_path / 'run.derived.json').exists()

    def test_run_default_output(self, runner, config_path, tmp_path, monkeypatch):
        monkeypatch.setenv('RESULTS_DIR', str(tmp_path / 'results'))
        result = runner.invoke(bench, ['run', '--config', str(config_path), '--method', 'naive'])
        assert result.exit_code == 0, result.output
        assert (tmp_path / 'results' / 'quick.jsonl').exists()

    def test_run_invalid_config(self, runner, tmp_path):
        path = tmp_path / 'bad.json'
        path.write_text(json.dumps({'topology': 'belem_5', 'subsets': [[0, 1]], 'qubits': 3}))
        result = runner.invoke(bench, ['run', '--config', str(path), '--out', str(tmp_path / 'x.jsonl')])
        assert result.exit_code == 1

    def test_score(self, runner, resultset):
        result = runner.invoke(bench, ['score', str(resultset)])
        assert result.exit_code == 0
        assert result.output.startswith('[raw] RES-Naive=')
        assert 'naive: max-n=3' in result.output

    def test_score_bad_file(self, runner, tmp_path):
        path = tmp_path / 'junk.jsonl'
        path.write_text('not json\n')
        result = runner.invoke(bench, ['score', str(path)])
        assert result.exit_code == 1

    def test_report(self, runner, resultset, tmp_path):
        out_dir = tmp_path / 'report'
        result = runner.invoke(bench, ['report', str(resultset), '--out', str(out_dir),
                                       '--emit', 'heatmap-csv,scores-json,minimums-csv'])
        assert result.exit_code == 0, result.output
        assert (out_dir / 'scores.json').exists()
        assert (out_dir / 'heatmap_naive_genuine_raw.csv').exists()
        assert (out_dir / 'minimums.csv').exists()

    def test_report_unknown_kind(self, runner, resultset, tmp_path):
        result = runner.invoke(bench, ['report', str(resultset), '--out', str(tmp_path / 'r'), '--emit', 'pdf'])
        assert result.exit_code == 1


class TestMissingInputs:
    @pytest.mark.parametrize('args', [
        ['topology', 'validate', 'absent.json'],
        ['run', '--config', 'absent.json'],
        ['score', 'absent.jsonl'],
        ['report', 'absent.jsonl', '--out', 'report'],
    ])
    def test_missing_file_is_validation_error(self, runner, tmp_path, args):
        args = [str(tmp_path / a) if a.startswith('absent') else a for a in args]
        result = runner.invoke(bench, args)
        assert result.exit_code == 1
        assert 'No such file' in result.output

    def test_bad_qubit_list(self, runner):
        result = runner.invoke(bench, ['orbit', 'enumerate', '--topology', 'belem_5', '--qubits', '0,a'])
        assert result.exit_code == 1
