import json
from datetime import datetime
from app import db


class BenchmarkRun(db.Model):
    __tablename__ = 'benchmark_runs'

    id = db.Column(db.Integer, primary_key=True)
    name = db.Column(db.String(255), nullable=False)
    topology = db.Column(db.String(255), nullable=False)
    status = db.Column(db.String(20), default='pending')  # pending, running, completed, failed
    config_json = db.Column(db.Text)
    result_path = db.Column(db.String(500), unique=True)

    # Summary filled in once the result set exists
    record_count = db.Column(db.Integer, default=0)
    failed_count = db.Column(db.Integer, default=0)
    res_naive = db.Column(db.Integer)
    res_unitary = db.Column(db.Integer)
    res_naive_mitigated = db.Column(db.Integer)
    res_unitary_mitigated = db.Column(db.Integer)
    error = db.Column(db.Text)

    created_at = db.Column(db.DateTime, default=datetime.utcnow)
    finished_at = db.Column(db.DateTime)

    @property
    def config(self):
        return json.loads(self.config_json) if self.config_json else None

    def to_dict(self, include_config=False):
        data = {
            'id': self.id,
            'name': self.name,
            'topology': self.topology,
            'status': self.status,
            'result_path': self.result_path,
            'records': self.record_count,
            'failed_records': self.failed_count,
            'scores': {
                'raw': {'naive': self.res_naive, 'unitary': self.res_unitary},
                'mitigated': {'naive': self.res_naive_mitigated, 'unitary': self.res_unitary_mitigated},
            },
            'error': self.error,
            'created_at': self.created_at.isoformat() if self.created_at else None,
            'finished_at': self.finished_at.isoformat() if self.finished_at else None,
        }
        if include_config:
            data['config'] = self.config
        return data

    def __repr__(self):
        return f'<BenchmarkRun {self.name}>'
