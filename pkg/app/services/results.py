"""ResultSet persistence: JSON-lines records plus a derived-tables companion."""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterator, List, Optional

from app.services.errors import ValidationError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
TIMESTAMP_FIELDS = ('started_at', 'finished_at')


def derived_path(path) -> Path:
    path = Path(path)
    return path.with_name(f'{path.stem}.derived.json')


@dataclass
class ResultSet:
    """Run metadata, one dict per stabilizer record, and derived tables.

    Record ids look like 'subset:method:sequence:stabilizer' and sort in
    execution order through sort_key().
    """
    meta: Dict = field(default_factory=dict)
    records: List[Dict] = field(default_factory=list)
    derived: Dict = field(default_factory=dict)

    @staticmethod
    def sort_key(record: Dict):
        subset, method, seq, stab = record['id'].split(':')
        return int(subset), method, int(seq), int(stab)

    def __len__(self):
        return len(self.records)

    def __iter__(self) -> Iterator[Dict]:
        return iter(self.records)

    @property
    def ok_records(self) -> List[Dict]:
        return [r for r in self.records if not r.get('error')]

    @property
    def failed_records(self) -> List[Dict]:
        return [r for r in self.records if r.get('error')]

    @property
    def witnesses(self) -> List[Dict]:
        return self.derived.get('witnesses', [])

    @property
    def methods(self) -> List[str]:
        return sorted({r['method'] for r in self.records})

    def by_id(self, record_id: str) -> Optional[Dict]:
        return next((r for r in self.records if r['id'] == record_id), None)

    def save(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, 'w') as f:
            f.write(json.dumps({'schema': SCHEMA_VERSION, 'type': 'meta', **self.meta}, sort_keys=True) + '\n')
            for record in sorted(self.records, key=self.sort_key):
                f.write(json.dumps({'schema': SCHEMA_VERSION, 'type': 'record', **record}, sort_keys=True) + '\n')
        with open(derived_path(path), 'w') as f:
            json.dump({'schema': SCHEMA_VERSION, **self.derived}, f, sort_keys=True, indent=2)
            f.write('\n')
        logger.info(f"Saved {len(self.records)} records to {path}")
        return path

    @classmethod
    def load(cls, path) -> 'ResultSet':
        path = Path(path)
        if not path.exists():
            raise ValidationError(f"No result set at {path}")

        meta: Dict = {}
        records: List[Dict] = []
        with open(path, 'r') as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as e:
                    raise ValidationError(f"{path}:{line_no}: invalid JSON ({e})")
                if row.pop('schema', None) != SCHEMA_VERSION:
                    raise ValidationError(f"{path}:{line_no}: unsupported schema")
                kind = row.pop('type', 'record')
                if kind == 'meta':
                    meta = row
                else:
                    records.append(row)

        derived = {}
        companion = derived_path(path)
        if companion.exists():
            with open(companion, 'r') as f:
                derived = json.load(f)
            derived.pop('schema', None)
        return cls(meta=meta, records=records, derived=derived)

    def summary(self) -> Dict:
        return {
            'records': len(self.records),
            'failed': len(self.failed_records),
            'graphs': len(self.witnesses),
            'methods': self.methods,
        }

    def __repr__(self):
        return f'<ResultSet {len(self.records)} records>'
