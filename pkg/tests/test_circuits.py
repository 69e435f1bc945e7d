import pytest

from app.services.circuits import (
    NAIVE, UNITARY, Circuit, build_circuit, build_graph_state_circuit, build_naive_circuit,
    build_unitary_circuit, measure_all, route_cnots,
)
from app.services.dense import dense_state, states_equal_up_to_phase
from app.services.errors import DisconnectedGraph, NoPath, ValidationError
from app.services.graphs import Graph, apply_lc_sequence, sample_lc_sequences
from app.services.topology import HardwareTopology, induced_subgraph


def line_topology(n):
    return HardwareTopology.from_dict({
        'name': f'line{n}', 'n_qubits': n, 'couplers': [[i, i + 1] for i in range(n - 1)],
    })


@pytest.fixture
def belem():
    return HardwareTopology.bundled('belem_5')


class TestGraphStateCircuit:
    def test_single_edge(self):
        circ = build_graph_state_circuit(Graph.complete(2))
        assert [g.dump() for g in circ.operations()] == ['h 0', 'h 1', 'h 1', 'cx 0 1', 'h 1']
        assert circ.cnot_count == 1

    def test_cnot_per_edge(self):
        assert build_graph_state_circuit(Graph.path(3)).cnot_count == 2
        assert build_graph_state_circuit(Graph.complete(4)).cnot_count == 6

    def test_disconnected(self):
        with pytest.raises(DisconnectedGraph):
            build_graph_state_circuit(Graph.from_edges(3, [(0, 1)]))

    def test_dump(self):
        text = build_graph_state_circuit(Graph.complete(2)).dump()
        lines = text.splitlines()
        assert lines[0] == 'width 2'
        assert 'barrier' in lines
        assert 'cx 0 1' in lines


class TestRouting:
    def test_adjacent_cnot_untouched(self):
        circ = Circuit(width=2)
        circ.append('cx', 0, 1)
        routed = route_cnots(line_topology(2), circ, [0, 1])
        assert [g.dump() for g in routed.gates] == ['cx 0 1']
        assert routed.layout == (0, 1)

    def test_distance_two(self):
        circ = Circuit(width=3)
        circ.append('cx', 0, 2)
        routed = route_cnots(line_topology(3), circ, [0, 1, 2])
        assert [g.dump() for g in routed.gates] == ['swap 0 1', 'cx 1 2']
        assert routed.cnot_count == 4
        assert routed.layout == (1, 0, 2)

    @pytest.mark.parametrize('d', [1, 2, 3, 4, 5])
    def test_cost_grows_with_distance(self, d):
        circ = Circuit(width=d + 1)
        circ.append('cx', 0, d)
        routed = route_cnots(line_topology(d + 1), circ, list(range(d + 1)))
        assert routed.cnot_count == 3 * (d - 1) + 1
        assert routed.metadata['cnot_count'] == routed.cnot_count

    def test_routed_state_matches_unrouted(self):
        g = Graph.cycle(4)
        circ = build_graph_state_circuit(g)
        routed = route_cnots(line_topology(4), circ, [0, 1, 2, 3])
        assert routed.count('swap') > 0
        assert states_equal_up_to_phase(dense_state(circ), dense_state(routed, logical=True))

    def test_hardware_map_respected(self):
        topo = line_topology(5)
        circ = Circuit(width=2)
        circ.append('cx', 0, 1)
        routed = route_cnots(topo, circ, [3, 4])
        assert routed.hardware_map == (3, 4)

    def test_no_path(self):
        circ = Circuit(width=2)
        circ.append('cx', 0, 1)
        with pytest.raises(NoPath):
            route_cnots(line_topology(3), circ, [0, 2])

    def test_bad_hardware_map(self):
        circ = Circuit(width=2)
        with pytest.raises(ValidationError):
            route_cnots(line_topology(3), circ, [0, 0])


class TestBuilders:
    def test_naive_empty_sequence(self, belem):
        base, hw = induced_subgraph(belem, [0, 1, 2, 3])
        expected = route_cnots(belem, build_graph_state_circuit(base), hw)
        circ = build_naive_circuit(belem, [0, 1, 2, 3], ())
        assert circ.gates == expected.gates
        assert circ.metadata['method'] == NAIVE

    def test_naive_star_center_needs_routing(self, belem):
        # qubits 0..3 of belem form a star around hardware qubit 1
        circ = build_naive_circuit(belem, [0, 1, 2, 3], [1])
        assert circ.metadata['target_graph']['edges'] == Graph.complete(4).to_dict()['edges']
        assert circ.cnot_count > 6

    def test_unitary_census(self, belem):
        circ = build_unitary_circuit(belem, [0, 1, 2, 3], [1])
        assert circ.count('rx-') == 1
        assert circ.count('rz+') == 3
        assert circ.cnot_count == 3
        assert circ.metadata['method'] == UNITARY
        assert circ.metadata['target_graph'] == Graph.complete(4).to_dict()

    def test_unitary_cnots_independent_of_sequence(self, belem):
        qubits = [0, 1, 2, 3, 4]
        baseline = build_unitary_circuit(belem, qubits, ()).cnot_count
        for seq in sample_lc_sequences(5, 10, seed=4):
            assert build_unitary_circuit(belem, qubits, seq).cnot_count == baseline

    @pytest.mark.parametrize('qubits', [[0, 1], [0, 1, 2], [1, 3, 4], [0, 1, 2, 3], [0, 1, 2, 3, 4]])
    def test_unitary_and_naive_prepare_same_state(self, belem, qubits):
        base, _ = induced_subgraph(belem, qubits)
        for seq in sample_lc_sequences(len(qubits), 8, seed=len(qubits)):
            naive = build_naive_circuit(belem, qubits, seq)
            unitary = build_unitary_circuit(belem, qubits, seq)
            assert naive.metadata['target_graph'] == apply_lc_sequence(base, seq).to_dict()
            assert states_equal_up_to_phase(
                dense_state(naive, logical=True), dense_state(unitary, logical=True),
            ), seq

    def test_unknown_method(self, belem):
        with pytest.raises(ValidationError):
            build_circuit('teleport', belem, [0, 1], ())

    def test_measure_all_follows_layout(self):
        circ = Circuit(width=3)
        circ.append('cx', 0, 2)
        routed = measure_all(route_cnots(line_topology(3), circ, [0, 1, 2]))
        assert routed.measured_bits() == {0: 1, 1: 0, 2: 2}
        assert routed.count('measure') == 3
