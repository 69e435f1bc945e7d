from collections import Counter
from flask import Blueprint, request, jsonify
from app.services.errors import ValidationError
from app.services.graphs import TREEWIDTH_MAX_VERTICES, enumerate_orbit, treewidth
from app.services.topology import HardwareTopology, induced_subgraph, list_bundled

topologies_bp = Blueprint('topologies', __name__)

MAX_ORBIT_LIMIT = 20000


@topologies_bp.route('', methods=['GET'])
def list_topologies():
    """List bundled device topologies."""
    names = list_bundled()
    topologies = []
    for name in names:
        topo = HardwareTopology.bundled(name)
        topologies.append({
            'name': name,
            'n_qubits': topo.n_qubits,
            'couplers': len(topo.couplers),
            'mean_cnot_error': topo.mean_cnot_error(),
        })
    return jsonify({'topologies': topologies, 'count': len(topologies)})


@topologies_bp.route('/<name>', methods=['GET'])
def get_topology(name):
    if name not in list_bundled():
        return jsonify({'error': f'Topology "{name}" not found'}), 404
    return jsonify({'topology': HardwareTopology.bundled(name).to_dict()})


@topologies_bp.route('/validate', methods=['POST'])
def validate_topology():
    """Validate a topology JSON body without storing it."""
    data = request.get_json()
    if not data:
        return jsonify({'error': 'Topology JSON is required'}), 400
    try:
        topo = HardwareTopology.from_dict(data)
    except ValidationError as e:
        return jsonify({'valid': False, 'error': str(e)}), 400
    return jsonify({'valid': True, 'topology': topo.to_dict()})


@topologies_bp.route('/<name>/orbit', methods=['GET'])
def get_orbit(name):
    """
    LC orbit of the graph induced on a qubit subset.

    Query params:
    - qubits: Comma-separated hardware qubits (required)
    - limit: Max graphs to enumerate (default 1000)
    """
    if name not in list_bundled():
        return jsonify({'error': f'Topology "{name}" not found'}), 404

    qubits_arg = request.args.get('qubits')
    if not qubits_arg:
        return jsonify({'error': 'qubits is required'}), 400
    limit = min(request.args.get('limit', 1000, type=int), MAX_ORBIT_LIMIT)

    try:
        qubits = [int(q) for q in qubits_arg.split(',')]
        graph, _ = induced_subgraph(HardwareTopology.bundled(name), qubits)
        orbit = enumerate_orbit(graph, limit=limit)
    except ValueError as e:
        return jsonify({'error': str(e)}), 400

    histogram = None
    if graph.n <= TREEWIDTH_MAX_VERTICES:
        histogram = Counter(treewidth(g) for g in orbit.graphs)
        histogram = {str(tw): count for tw, count in sorted(histogram.items())}

    return jsonify({
        'qubits': qubits,
        'graph': graph.to_dict(),
        'size': len(orbit),
        'truncated': orbit.truncated,
        'treewidths': histogram,
    })
