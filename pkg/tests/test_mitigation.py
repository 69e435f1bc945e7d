import numpy as np
import pytest

from app.services.backend import SimulatedBackend, spawn_seeds
from app.services.circuits import Circuit, build_circuit
from app.services.errors import SingularCalibration, ValidationError, WidthMismatch
from app.services.mitigation import (
    TensoredMitigator, calibrate, calibration_circuits, clamp_expectation, mitigate_counts,
)
from app.services.stabilizer import expectation_from_counts
from app.services.topology import HardwareTopology, induced_subgraph
from app.services.witness import generators, stabilizer_circuit


@pytest.fixture
def belem():
    return HardwareTopology.bundled('belem_5')


def readout_backend(topo, e0, e1):
    return SimulatedBackend(topo.with_errors(readout_err=(e0, e1)), gates=False)


class TestCalibration:
    def test_circuits(self):
        zeros, ones = calibration_circuits([3, 4])
        assert zeros.count('x') == 0
        assert ones.count('x') == 2
        assert zeros.hardware_map == (3, 4)
        assert ones.measured_bits() == {0: 0, 1: 1}

    def test_noiseless_readout_is_identity(self, belem):
        backend = SimulatedBackend.noiseless(belem)
        m = calibrate(backend, [0, 1, 2], 2000, seed=1)
        assert m.errors == ((0.0, 0.0),) * 3
        assert m.qubits == (0, 1, 2)

    def test_recovers_injected_errors(self, belem):
        backend = readout_backend(belem, 0.1, 0.05)
        m = calibrate(backend, [0, 1], 100000, seed=2)
        for e0, e1 in m.errors:
            assert e0 == pytest.approx(0.1, abs=0.005)
            assert e1 == pytest.approx(0.05, abs=0.005)

    def test_uses_topology_rates(self, belem):
        m = calibrate(SimulatedBackend(belem, gates=False), [4], 200000, seed=3)
        e0, e1 = belem.readout_err[4]
        assert m.errors[0][0] == pytest.approx(e0, abs=0.003)
        assert m.errors[0][1] == pytest.approx(e1, abs=0.003)

    def test_uninformative_readout(self, belem):
        with pytest.raises(SingularCalibration):
            calibrate(readout_backend(belem, 0.5, 0.5), [0, 1], 10000, seed=4)

    def test_deterministic(self, belem):
        backend = readout_backend(belem, 0.03, 0.06)
        assert calibrate(backend, [1, 3], 5000, seed=[9, 1]) == calibrate(backend, [1, 3], 5000, seed=[9, 1])

    def test_gate_noise_not_absorbed(self, belem):
        topo = belem.with_errors(readout_err=(0.1, 0.05))
        backend = SimulatedBackend(topo, sq_depol=0.2, global_depol=0.3)
        m = calibrate(backend, [0, 1], 100000, seed=6)
        for e0, e1 in m.errors:
            assert e0 == pytest.approx(0.1, abs=0.005)
            assert e1 == pytest.approx(0.05, abs=0.005)

    def test_invalid_shots(self, belem):
        with pytest.raises(ValidationError):
            calibrate(SimulatedBackend.noiseless(belem), [0], 0, seed=0)


class TestMitigator:
    def test_singular_matrix(self):
        with pytest.raises(SingularCalibration):
            TensoredMitigator((0,), ((0.5, 0.5),))

    def test_probability_range(self):
        with pytest.raises(ValidationError):
            TensoredMitigator((0,), ((1.2, 0.0),))

    def test_matrices(self):
        m = TensoredMitigator((0,), ((0.1, 0.2),))
        assert np.allclose(m.matrices()[0], [[0.9, 0.2], [0.1, 0.8]])
        assert np.allclose(m.inverses()[0] @ m.matrices()[0], np.eye(2))

    def test_restrict(self):
        m = TensoredMitigator((3, 1, 4), ((0.1, 0.2), (0.01, 0.02), (0.03, 0.04)))
        sub = m.restrict([4, 3])
        assert sub.qubits == (4, 3)
        assert sub.errors == ((0.03, 0.04), (0.1, 0.2))
        with pytest.raises(WidthMismatch):
            m.restrict([7])

    def test_dict_round_trip(self):
        m = TensoredMitigator((0, 2), ((0.01, 0.02), (0.03, 0.04)))
        assert TensoredMitigator.from_dict(m.to_dict()) == m
        assert m.to_json() == [[0.01, 0.02], [0.03, 0.04]]

    def test_from_topology(self, belem):
        m = TensoredMitigator.from_topology(belem, [2, 0])
        assert m.errors == (belem.readout_err[2], belem.readout_err[0])


class TestMitigateCounts:
    def test_identity(self):
        out = mitigate_counts(TensoredMitigator.identity([0, 1]), {'01': 30, '10': 70})
        assert out == {'01': pytest.approx(0.3), '10': pytest.approx(0.7)}

    def test_single_qubit_inversion(self):
        m = TensoredMitigator((0,), ((0.1, 0.0),))
        out = mitigate_counts(m, {'0': 90, '1': 10})
        assert out['0'] == pytest.approx(1.0)
        assert out.get('1', 0.0) == pytest.approx(0.0, abs=1e-12)

    def test_preserves_total(self):
        m = TensoredMitigator((0, 1, 2), ((0.05, 0.1), (0.02, 0.03), (0.08, 0.01)))
        out = mitigate_counts(m, {'000': 400, '011': 300, '101': 200, '111': 100})
        assert sum(out.values()) == pytest.approx(1.0)

    def test_may_go_negative(self):
        m = TensoredMitigator((0,), ((0.2, 0.0),))
        out = mitigate_counts(m, {'0': 100})
        assert out['1'] < 0

    def test_width_mismatch(self):
        with pytest.raises(WidthMismatch):
            mitigate_counts(TensoredMitigator.identity([0, 1]), {'0': 10})
        with pytest.raises(WidthMismatch):
            mitigate_counts(TensoredMitigator.identity([0, 1]), {'00': 10, '1': 3})

    def test_empty(self):
        assert mitigate_counts(TensoredMitigator.identity([0]), {}) == {}

    def test_round_trip_through_backend(self, belem):
        shots = 40000
        backend = readout_backend(belem, 0.08, 0.03)
        m = calibrate(backend, [0, 1, 2], shots, seed=5)

        circ = Circuit(width=3, metadata={'hardware_map': [0, 1, 2]})
        circ.append('x', 1)
        for k in range(3):
            circ.append('measure', k, clbit=k)
        counts = backend.run([circ], shots, spawn_seeds(5, 99))[0]
        quasi = mitigate_counts(m, counts)

        assert quasi['010'] == pytest.approx(1.0, abs=5 / np.sqrt(shots))
        # <Z1> = -1 on the prepared state
        raw = expectation_from_counts(counts, [1])
        mitigated = expectation_from_counts(quasi, [1])
        assert abs(mitigated + 1) < abs(raw + 1)

    def test_known_mitigator_restores_stabilizers(self, belem):
        shots = 20000
        topo = belem.with_errors(readout_err=(0.08, 0.03))
        backend = SimulatedBackend(topo, gates=False)
        prep = build_circuit('naive', topo, [0, 1, 2, 3], ())
        m = TensoredMitigator.from_topology(topo, [prep.hardware_map[w] for w in prep.layout])
        base, _ = induced_subgraph(topo, [0, 1, 2, 3])

        for k, p in enumerate(generators(base)):
            counts = backend.run([stabilizer_circuit(prep, p)], shots, spawn_seeds(8, k))[0]
            raw = p.phase * expectation_from_counts(counts, p.support)
            quasi = mitigate_counts(m, counts)
            mitigated = clamp_expectation(p.phase * expectation_from_counts(quasi, p.support))
            assert raw < 0.9
            assert mitigated == pytest.approx(1.0, abs=5 / np.sqrt(shots))


class TestClamp:
    @pytest.mark.parametrize('value, expected', [(1.3, 1.0), (-1.2, -1.0), (0.5, 0.5), (1.0, 1.0)])
    def test_clamp(self, value, expected):
        assert clamp_expectation(value) == expected
