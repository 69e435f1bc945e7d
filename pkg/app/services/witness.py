"""Graph-state stabilizers, their LC transformation and entanglement witnesses."""
import logging
from typing import List, Optional, Sequence, Tuple

from app.services.circuits import Circuit
from app.services.errors import LengthMismatch, NotAnEdge, WrongArity
from app.services.graphs import Graph, lc_history
from app.services.stabilizer import PauliString

logger = logging.getLogger(__name__)

GENUINE = 'genuine'
BISEPARABLE = 'biseparable'
WITNESSES = (GENUINE, BISEPARABLE)


def generators(g: Graph) -> List[PauliString]:
    """g_k = X on vertex k, Z on each neighbor of k, identity elsewhere."""
    gens = []
    for k in range(g.n):
        letters = ['I'] * g.n
        letters[k] = 'X'
        for nb in g.neighbors(k):
            letters[nb] = 'Z'
        gens.append(PauliString(1, ''.join(letters)))
    return gens


def stabilizer_set(g: Graph) -> List[PauliString]:
    """The n generators followed by the all-identity string."""
    return generators(g) + [PauliString.identity(g.n)]


def transform_generators(gens: Sequence[PauliString], seq: Sequence[int],
                         history: Optional[Sequence[Graph]] = None) -> List[PauliString]:
    """Conjugate gens through the local Clifford of every LC step.

    Step a applies rx-(a) and rz+(b) for each neighbor b of a in the graph
    current at that step; history[step] is that graph (see lc_history).
    """
    if not seq:
        return list(gens)
    if history is None:
        raise LengthMismatch("A graph history is required to transform generators")
    if len(history) < len(seq):
        raise LengthMismatch(f"History of {len(history)} graphs for {len(seq)} LC steps")

    out = list(gens)
    for step, a in enumerate(seq):
        neighbors = history[step].neighbors(a)
        updated = []
        for p in out:
            p = p.conjugated('rx-', a)
            for b in neighbors:
                p = p.conjugated('rz+', b)
            updated.append(p)
        out = updated
    return out


def lc_stabilizers(base: Graph, seq: Sequence[int]) -> Tuple[List[PauliString], Graph]:
    """Stabilizer set measured for the unitary-method state of (base, seq), plus g'."""
    history = lc_history(base, seq)
    gens = transform_generators(generators(base), seq, history)
    return gens + [PauliString.identity(base.n)], history[-1]


def measurement_basis(p: PauliString) -> List[Tuple[str, int]]:
    """Pre-measurement rotations per logical qubit: X -> H, Y -> S-dagger then H."""
    rotations = []
    for k, letter in enumerate(p.letters):
        if letter == 'X':
            rotations.append(('h', k))
        elif letter == 'Y':
            rotations.append(('sdg', k))
            rotations.append(('h', k))
    return rotations


def stabilizer_circuit(prep: Circuit, p: PauliString) -> Circuit:
    """Measurement circuit for p on the state prepared by prep.

    Rotations and measurements follow the final layout of prep, so classical
    bit k always holds logical qubit k. The phase of p is not measured; the
    caller multiplies the parity expectation by p.phase.
    """
    if p.n != prep.width:
        raise LengthMismatch(f"Stabilizer of length {p.n} on a {prep.width}-qubit circuit")
    circ = prep.copy()
    layout = circ.layout
    circ.barrier()
    for name, k in measurement_basis(p):
        circ.append(name, layout[k])
    for k, wire in enumerate(layout):
        circ.append('measure', wire, clbit=k)
    circ.metadata.update({
        'stabilizer': p.label,
        'weight': p.weight,
    })
    return circ


def genuine_witness(expectations: Sequence[float], n: int) -> float:
    """(n - 1) - sum of generator expectations; negative certifies genuine entanglement."""
    if len(expectations) != n:
        raise WrongArity(f"Genuine witness needs {n} expectations, got {len(expectations)}")
    return float((n - 1) - sum(expectations))


def biseparable_witness(e_i: float, e_j: float, graph: Optional[Graph] = None,
                        pair: Optional[Tuple[int, int]] = None) -> float:
    """1 - <g_i> - <g_j> for an edge (i, j) of the prepared graph."""
    if graph is not None and pair is not None and not graph.has_edge(*pair):
        raise NotAnEdge(f"({pair[0]}, {pair[1]}) is not an edge of {graph!r}")
    return float(1.0 - e_i - e_j)


def biseparable_witnesses(expectations: Sequence[float], graph: Graph) -> List[Tuple[Tuple[int, int], float]]:
    """One biseparable value per edge of graph, in sorted edge order."""
    if len(expectations) != graph.n:
        raise WrongArity(f"Expected {graph.n} expectations, got {len(expectations)}")
    return [((i, j), biseparable_witness(expectations[i], expectations[j], graph, (i, j)))
            for i, j in graph.edge_list()]
