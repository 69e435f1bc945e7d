"""Graph-state preparation circuits, LC variants and SWAP routing."""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import networkx as nx

from app.services.errors import DisconnectedGraph, NoPath, ValidationError
from app.services.graphs import Graph, apply_lc_sequence, lc_history
from app.services.topology import HardwareTopology, induced_subgraph

logger = logging.getLogger(__name__)

NAIVE = 'naive'
UNITARY = 'unitary'
METHODS = (NAIVE, UNITARY)

# rx- is exp(-i pi/4 X), rx+ is exp(+i pi/4 X); likewise for rz
SINGLE_QUBIT_GATES = ('h', 's', 'sdg', 'x', 'rx-', 'rx+', 'rz-', 'rz+')
TWO_QUBIT_GATES = ('cx', 'swap')
DIRECTIVES = ('barrier', 'measure')


class Gate(NamedTuple):
    name: str
    qubits: Tuple[int, ...] = ()
    clbit: Optional[int] = None

    def dump(self) -> str:
        if self.name == 'barrier':
            return 'barrier'
        args = ' '.join(str(q) for q in self.qubits)
        if self.name == 'measure':
            return f'measure {args} -> {self.clbit}'
        return f'{self.name} {args}'


@dataclass
class Circuit:
    """Ordered Clifford gate list over `width` wires.

    metadata['hardware_map'][w] is the hardware qubit behind wire w and
    metadata['layout'][k] is the wire currently holding logical qubit k.
    """
    width: int
    gates: List[Gate] = field(default_factory=list)
    metadata: Dict = field(default_factory=dict)

    def append(self, name: str, *qubits: int, clbit: Optional[int] = None) -> 'Circuit':
        for q in qubits:
            if not 0 <= q < self.width:
                raise ValidationError(f"Qubit {q} outside circuit width {self.width}")
        self.gates.append(Gate(name, tuple(qubits), clbit))
        return self

    def barrier(self) -> 'Circuit':
        self.gates.append(Gate('barrier'))
        return self

    def copy(self) -> 'Circuit':
        return Circuit(self.width, list(self.gates), dict(self.metadata))

    @property
    def layout(self) -> Tuple[int, ...]:
        return tuple(self.metadata.get('layout', range(self.width)))

    @property
    def hardware_map(self) -> Tuple[int, ...]:
        return tuple(self.metadata.get('hardware_map', range(self.width)))

    @property
    def cnot_count(self) -> int:
        """CNOTs after routing; each SWAP is three CNOTs."""
        return sum(1 if g.name == 'cx' else 3 if g.name == 'swap' else 0 for g in self.gates)

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    def operations(self) -> List[Gate]:
        """Gates without barriers and measurements."""
        return [g for g in self.gates if g.name not in DIRECTIVES]

    def measured_bits(self) -> Dict[int, int]:
        """clbit -> wire for every MEASURE."""
        return {g.clbit: g.qubits[0] for g in self.gates if g.name == 'measure'}

    def dump(self) -> str:
        """Plain-text listing, one gate per line."""
        lines = [f'width {self.width}']
        lines.extend(g.dump() for g in self.gates)
        return '\n'.join(lines) + '\n'

    def __repr__(self):
        return f'<Circuit width={self.width} gates={len(self.gates)} cnots={self.cnot_count}>'


def build_graph_state_circuit(g: Graph) -> Circuit:
    """H on every qubit, then H(j) CNOT(i, j) H(j) per edge in sorted order."""
    if g.n > 1 and not g.is_connected():
        raise DisconnectedGraph(f"Cannot build a graph state for disconnected {g!r}")

    circ = Circuit(width=g.n)
    for q in range(g.n):
        circ.append('h', q)
    circ.barrier()
    for i, j in g.edge_list():
        circ.append('h', j)
        circ.append('cx', i, j)
        circ.append('h', j)
    circ.barrier()
    circ.metadata.update({
        'source_graph': g.to_dict(),
        'layout': list(range(g.n)),
        'hardware_map': list(range(g.n)),
    })
    return circ


def route_cnots(topo: HardwareTopology, circ: Circuit, hardware_map: Sequence[int]) -> Circuit:
    """Insert SWAPs so every CNOT acts on a hardware coupler.

    The control walks along a shortest coupler path (inside the subset)
    toward the target, lowest hardware index first on ties, until adjacent.
    Moves persist; the returned circuit's 'layout' records where every
    logical qubit ended up.
    """
    hardware_map = tuple(int(q) for q in hardware_map)
    if len(hardware_map) != circ.width or len(set(hardware_map)) != circ.width:
        raise ValidationError(f"hardware_map {list(hardware_map)} must name {circ.width} distinct qubits")

    sub = topo.to_networkx().subgraph(hardware_map)
    wire_of_hw = {hw: w for w, hw in enumerate(hardware_map)}
    pos = list(range(circ.width))  # logical -> wire

    routed = Circuit(width=circ.width, metadata=dict(circ.metadata))
    swaps = 0
    for gate in circ.gates:
        if gate.name == 'barrier':
            routed.barrier()
            continue
        if gate.name == 'measure':
            routed.append('measure', pos[gate.qubits[0]], clbit=gate.clbit)
            continue
        if gate.name != 'cx':
            routed.append(gate.name, *(pos[q] for q in gate.qubits))
            continue

        control, target = gate.qubits
        target_hw = hardware_map[pos[target]]
        try:
            dist = nx.single_source_shortest_path_length(sub, target_hw)
        except nx.NodeNotFound:
            raise NoPath(f"Hardware qubit {target_hw} not in routing subgraph")

        while True:
            here_hw = hardware_map[pos[control]]
            if here_hw not in dist:
                raise NoPath(f"No coupler path from {here_hw} to {target_hw}")
            if dist[here_hw] <= 1:
                break
            step_hw = min(nb for nb in sub.neighbors(here_hw) if dist.get(nb) == dist[here_hw] - 1)
            a, b = pos[control], wire_of_hw[step_hw]
            routed.append('swap', a, b)
            swaps += 1
            for k, w in enumerate(pos):
                if w == b:
                    pos[k] = a
            pos[control] = b
        routed.append('cx', pos[control], pos[target])

    if swaps:
        logger.debug(f"Routed {swaps} swaps on {list(hardware_map)}")
    routed.metadata['layout'] = list(pos)
    routed.metadata['hardware_map'] = list(hardware_map)
    routed.metadata['cnot_count'] = routed.cnot_count
    return routed


def build_naive_circuit(topo: HardwareTopology, qubits: Sequence[int], seq: Sequence[int]) -> Circuit:
    """Rebuild the entangling circuit from the LC-transformed graph, then route it."""
    base, hardware_map = induced_subgraph(topo, qubits)
    target = apply_lc_sequence(base, seq)
    circ = route_cnots(topo, build_graph_state_circuit(target), hardware_map)
    circ.metadata.update({
        'method': NAIVE,
        'source_graph': base.to_dict(),
        'target_graph': target.to_dict(),
        'lc_seq': list(seq),
        'cnot_count': circ.cnot_count,
    })
    return circ


def build_unitary_circuit(topo: HardwareTopology, qubits: Sequence[int], seq: Sequence[int]) -> Circuit:
    """Append the local Clifford of every LC step to the base graph circuit.

    Step a contributes rx-(a) and rz+(b) for each current neighbor b of a,
    isolated by barriers; the CNOT count stays |E(base)|.
    """
    base, hardware_map = induced_subgraph(topo, qubits)
    circ = route_cnots(topo, build_graph_state_circuit(base), hardware_map)
    history = lc_history(base, seq)
    layout = circ.layout
    for step, a in enumerate(seq):
        circ.append('rx-', layout[a])
        for b in history[step].neighbors(a):
            circ.append('rz+', layout[b])
        circ.barrier()
    circ.metadata.update({
        'method': UNITARY,
        'source_graph': base.to_dict(),
        'target_graph': history[-1].to_dict(),
        'lc_seq': list(seq),
        'cnot_count': circ.cnot_count,
    })
    return circ


def build_circuit(method: str, topo: HardwareTopology, qubits: Sequence[int], seq: Sequence[int]) -> Circuit:
    if method == NAIVE:
        return build_naive_circuit(topo, qubits, seq)
    if method == UNITARY:
        return build_unitary_circuit(topo, qubits, seq)
    raise ValidationError(f"Unknown construction method: {method}")


def measure_all(circ: Circuit) -> Circuit:
    """Measure logical qubit k (wherever it sits) into classical bit k."""
    out = circ.copy()
    for k, wire in enumerate(out.layout):
        out.append('measure', wire, clbit=k)
    return out
