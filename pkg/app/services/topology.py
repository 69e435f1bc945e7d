"""Hardware connectivity maps with static error rates."""
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import networkx as nx

from app.services.errors import DisconnectedSubgraph, InvalidTopology
from app.services.graphs import Edge, Graph

logger = logging.getLogger(__name__)

DEFAULT_TOPOLOGY_DIR = Path(__file__).resolve().parents[2] / 'data' / 'topologies'


def topology_dir() -> Path:
    return Path(os.getenv('TOPOLOGY_DIR', str(DEFAULT_TOPOLOGY_DIR)))


def _pair(i: int, j: int) -> Edge:
    return (min(i, j), max(i, j))


@dataclass(frozen=True)
class HardwareTopology:
    """Device connectivity plus per-qubit readout and per-coupler CNOT errors.

    readout_err[q] is (eps0, eps1): P(read 1 | prepared 0), P(read 0 | prepared 1).
    """
    name: str
    n_qubits: int
    couplers: FrozenSet[Edge]
    readout_err: Tuple[Tuple[float, float], ...]
    cnot_err: Dict[Edge, float] = field(hash=False, compare=False)

    @classmethod
    def from_dict(cls, data: dict) -> 'HardwareTopology':
        try:
            n_qubits = int(data['n_qubits'])
            couplers = frozenset(_pair(int(i), int(j)) for i, j in data['couplers'])
            readout = data.get('readout_err') or [[0.0, 0.0]] * n_qubits
            readout_err = tuple((float(e0), float(e1)) for e0, e1 in readout)
            cnot_err = {_pair(int(i), int(j)): float(p) for i, j, p in data.get('cnot_err', [])}
        except (KeyError, TypeError, ValueError) as e:
            raise InvalidTopology(f"Malformed topology: {e}")

        topo = cls(
            name=str(data.get('name', 'unnamed')),
            n_qubits=n_qubits,
            couplers=couplers,
            readout_err=readout_err,
            cnot_err=cnot_err,
        )
        topo.validate()
        return topo

    @classmethod
    def from_file(cls, path) -> 'HardwareTopology':
        with open(path, 'r') as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as e:
                raise InvalidTopology(f"{path}: not valid JSON ({e})")
        return cls.from_dict(data)

    @classmethod
    def bundled(cls, name: str) -> 'HardwareTopology':
        path = topology_dir() / f'{name}.json'
        if not path.exists():
            raise InvalidTopology(f"No bundled topology named '{name}'")
        return cls.from_file(path)

    def validate(self):
        if self.n_qubits < 1:
            raise InvalidTopology(f"n_qubits must be >= 1, got {self.n_qubits}")
        if len(self.readout_err) != self.n_qubits:
            raise InvalidTopology(
                f"readout_err has {len(self.readout_err)} entries, expected {self.n_qubits}"
            )
        for i, j in self.couplers:
            if i == j or not (0 <= i < self.n_qubits and 0 <= j < self.n_qubits):
                raise InvalidTopology(f"Invalid coupler ({i}, {j})")
        for q, (e0, e1) in enumerate(self.readout_err):
            if not (0.0 <= e0 <= 1.0 and 0.0 <= e1 <= 1.0):
                raise InvalidTopology(f"Readout error of qubit {q} outside [0, 1]")
        for pair, p in self.cnot_err.items():
            if pair not in self.couplers:
                raise InvalidTopology(f"cnot_err given for non-coupler {pair}")
            if not 0.0 <= p <= 1.0:
                raise InvalidTopology(f"CNOT error on {pair} outside [0, 1]")

        named = {q for pair in self.couplers for q in pair}
        if named and not nx.is_connected(self.to_networkx().subgraph(named)):
            raise InvalidTopology(f"Topology '{self.name}' is not connected")

    def to_networkx(self) -> nx.Graph:
        graph = nx.Graph()
        graph.add_nodes_from(range(self.n_qubits))
        graph.add_edges_from(self.couplers)
        return graph

    def is_coupler(self, i: int, j: int) -> bool:
        return _pair(i, j) in self.couplers

    def cnot_error(self, i: int, j: int) -> Optional[float]:
        return self.cnot_err.get(_pair(i, j))

    def mean_cnot_error(self) -> float:
        if not self.cnot_err:
            return 0.0
        return sum(self.cnot_err.values()) / len(self.cnot_err)

    def with_errors(self, readout_err=None, cnot_err=None, cnot_scale: float = 1.0) -> 'HardwareTopology':
        """Copy with replaced or rescaled error fields.

        readout_err may be a single (eps0, eps1) pair applied to every qubit;
        cnot_err may be a single probability applied to every coupler.
        """
        if readout_err is None:
            readout = self.readout_err
        elif isinstance(readout_err[0], (int, float)):
            readout = tuple((float(readout_err[0]), float(readout_err[1])) for _ in range(self.n_qubits))
        else:
            readout = tuple((float(a), float(b)) for a, b in readout_err)

        if cnot_err is None:
            cnot = {pair: min(1.0, p * cnot_scale) for pair, p in self.cnot_err.items()}
        elif isinstance(cnot_err, (int, float)):
            cnot = {pair: min(1.0, float(cnot_err) * cnot_scale) for pair in self.couplers}
        else:
            cnot = {_pair(i, j): min(1.0, float(p) * cnot_scale) for (i, j), p in cnot_err.items()}

        topo = HardwareTopology(
            name=self.name,
            n_qubits=self.n_qubits,
            couplers=self.couplers,
            readout_err=readout,
            cnot_err=cnot,
        )
        topo.validate()
        return topo

    def to_dict(self) -> dict:
        return {
            'name': self.name,
            'n_qubits': self.n_qubits,
            'couplers': [list(c) for c in sorted(self.couplers)],
            'readout_err': [list(e) for e in self.readout_err],
            'cnot_err': [[i, j, p] for (i, j), p in sorted(self.cnot_err.items())],
        }

    def __repr__(self):
        return f'<HardwareTopology {self.name} ({self.n_qubits} qubits)>'


def induced_subgraph(topo: HardwareTopology, qubits: Sequence[int]) -> Tuple[Graph, Tuple[int, ...]]:
    """Restrict topo to qubits; local vertex i stands for hardware qubit qubits[i]."""
    qubits = tuple(int(q) for q in qubits)
    if len(set(qubits)) != len(qubits):
        raise InvalidTopology(f"Qubit subset {list(qubits)} contains duplicates")
    for q in qubits:
        if not 0 <= q < topo.n_qubits:
            raise InvalidTopology(f"Qubit {q} not on topology '{topo.name}'")

    local = {hw: i for i, hw in enumerate(qubits)}
    edges = [(local[i], local[j]) for i, j in topo.couplers if i in local and j in local]
    graph = Graph.from_edges(len(qubits), edges)
    if not graph.is_connected():
        raise DisconnectedSubgraph(f"Qubits {list(qubits)} induce a disconnected subgraph")
    return graph, qubits


def list_bundled() -> List[str]:
    directory = topology_dir()
    if not directory.exists():
        return []
    return sorted(p.stem for p in directory.glob('*.json'))
