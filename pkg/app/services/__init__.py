from app.services.graphs import Graph, apply_lc_sequence, enumerate_orbit, local_complement, sample_lc_sequences, treewidth
from app.services.topology import HardwareTopology, induced_subgraph
from app.services.circuits import Circuit, build_circuit, build_graph_state_circuit, route_cnots
from app.services.stabilizer import NoiseModel, PauliString, StabilizerState, expectation_exact, sample_shots
from app.services.witness import biseparable_witness, generators, genuine_witness, transform_generators
from app.services.mitigation import TensoredMitigator, calibrate, clamp_expectation, mitigate_counts
from app.services.backend import SimulatedBackend
from app.services.results import ResultSet
from app.services.runner import RunConfig, median_heatmap, plan_batches, res_score, run_benchmark

__all__ = [
    'Graph',
    'apply_lc_sequence',
    'enumerate_orbit',
    'local_complement',
    'sample_lc_sequences',
    'treewidth',
    'HardwareTopology',
    'induced_subgraph',
    'Circuit',
    'build_circuit',
    'build_graph_state_circuit',
    'route_cnots',
    'NoiseModel',
    'PauliString',
    'StabilizerState',
    'expectation_exact',
    'sample_shots',
    'biseparable_witness',
    'generators',
    'genuine_witness',
    'transform_generators',
    'TensoredMitigator',
    'calibrate',
    'clamp_expectation',
    'mitigate_counts',
    'SimulatedBackend',
    'ResultSet',
    'RunConfig',
    'median_heatmap',
    'plan_batches',
    'res_score',
    'run_benchmark',
]
