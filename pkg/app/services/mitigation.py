"""Tensored readout-error calibration and correction."""
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Tuple

import numpy as np

from app.services.circuits import Circuit
from app.services.errors import SingularCalibration, TooLarge, ValidationError, WidthMismatch

logger = logging.getLogger(__name__)

MITIGATION_MAX_QUBITS = 20
SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class TensoredMitigator:
    """Per-qubit assignment matrices A_q = [[1 - e0, e1], [e0, 1 - e1]].

    qubits[k] names the hardware qubit whose errors sit at errors[k].
    """
    qubits: Tuple[int, ...]
    errors: Tuple[Tuple[float, float], ...]

    def __post_init__(self):
        if len(self.qubits) != len(self.errors):
            raise ValidationError(f"{len(self.qubits)} qubits but {len(self.errors)} error pairs")
        for q, (e0, e1) in zip(self.qubits, self.errors):
            if not (0.0 <= e0 <= 1.0 and 0.0 <= e1 <= 1.0):
                raise ValidationError(f"Assignment error of qubit {q} outside [0, 1]")
            if abs(1.0 - e0 - e1) < SINGULAR_TOL:
                raise SingularCalibration(f"Assignment matrix of qubit {q} is singular (e0={e0}, e1={e1})")

    @classmethod
    def identity(cls, qubits: Sequence[int]) -> 'TensoredMitigator':
        return cls(tuple(qubits), tuple((0.0, 0.0) for _ in qubits))

    @classmethod
    def from_topology(cls, topo, qubits: Sequence[int]) -> 'TensoredMitigator':
        """Mitigator built from the topology's declared readout errors."""
        return cls(tuple(qubits), tuple(tuple(topo.readout_err[q]) for q in qubits))

    @property
    def width(self) -> int:
        return len(self.qubits)

    def matrices(self) -> List[np.ndarray]:
        return [np.array([[1 - e0, e1], [e0, 1 - e1]]) for e0, e1 in self.errors]

    def inverses(self) -> List[np.ndarray]:
        return [np.linalg.inv(a) for a in self.matrices()]

    def restrict(self, qubits: Sequence[int]) -> 'TensoredMitigator':
        """Mitigator over the given hardware qubits, in that order."""
        index = {q: k for k, q in enumerate(self.qubits)}
        missing = [q for q in qubits if q not in index]
        if missing:
            raise WidthMismatch(f"Mitigator has no calibration for qubits {missing}")
        return TensoredMitigator(tuple(qubits), tuple(self.errors[index[q]] for q in qubits))

    def to_json(self) -> List[List[float]]:
        return [list(e) for e in self.errors]

    def to_dict(self) -> dict:
        return {'qubits': list(self.qubits), 'errors': self.to_json()}

    @classmethod
    def from_dict(cls, data: dict) -> 'TensoredMitigator':
        return cls(tuple(int(q) for q in data['qubits']),
                   tuple((float(e0), float(e1)) for e0, e1 in data['errors']))

    def __repr__(self):
        return f'<TensoredMitigator qubits={list(self.qubits)}>'


def calibration_circuits(qubits: Sequence[int]) -> List[Circuit]:
    """|0...0> and |1...1> preparations measured on every qubit."""
    circuits = []
    for label, flip in (('zeros', False), ('ones', True)):
        circ = Circuit(width=len(qubits), metadata={
            'hardware_map': list(qubits),
            'layout': list(range(len(qubits))),
            'calibration': label,
        })
        if flip:
            for k in range(len(qubits)):
                circ.append('x', k)
        circ.barrier()
        for k in range(len(qubits)):
            circ.append('measure', k, clbit=k)
        circuits.append(circ)
    return circuits


def _marginal_ones(counts: Mapping[str, int], width: int) -> np.ndarray:
    ones = np.zeros(width)
    total = 0
    for bitstring, tally in counts.items():
        ones += np.array([c == '1' for c in bitstring], dtype=float) * tally
        total += tally
    return ones / total


def calibrate(backend, qubits: Sequence[int], shots: int, seed) -> TensoredMitigator:
    """Estimate per-qubit e0, e1 from the two calibration circuits run on backend.

    The circuits run with readout noise only, so gate and white noise are
    never folded into the assignment matrices.
    """
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    qubits = tuple(int(q) for q in qubits)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    zeros, ones = backend.readout_only().run(calibration_circuits(qubits), shots, root.spawn(2))

    e0 = _marginal_ones(zeros, len(qubits))
    e1 = 1.0 - _marginal_ones(ones, len(qubits))
    errors = tuple((float(a), float(b)) for a, b in zip(e0, e1))

    # 1 - e0 - e1 within sampling error of zero is indistinguishable from singular
    tolerance = max(SINGULAR_TOL, 4.0 / np.sqrt(shots))
    for q, (a, b) in zip(qubits, errors):
        if abs(1.0 - a - b) < tolerance:
            raise SingularCalibration(f"Readout of qubit {q} is uninformative (e0={a:.4f}, e1={b:.4f})")
    logger.debug(f"Calibrated readout on {list(qubits)}: {errors}")
    return TensoredMitigator(qubits, errors)


def mitigate_counts(m: TensoredMitigator, counts: Mapping[str, float]) -> Dict[str, float]:
    """Apply the per-qubit inverses to the normalized counts; entries may be negative."""
    if not counts:
        return {}
    width = len(next(iter(counts)))
    if any(len(b) != width for b in counts) or width != m.width:
        raise WidthMismatch(f"Bitstrings of width {width} for a {m.width}-qubit mitigator")
    if width > MITIGATION_MAX_QUBITS:
        raise TooLarge(f"Mitigation limited to {MITIGATION_MAX_QUBITS} qubits, got {width}")

    total = float(sum(counts.values()))
    dist = np.zeros(2 ** width)
    for bitstring, tally in counts.items():
        dist[int(bitstring, 2)] += tally / total
    tensor = dist.reshape((2,) * width)
    for k, inverse in enumerate(m.inverses()):
        tensor = np.moveaxis(np.tensordot(inverse, tensor, axes=([1], [k])), 0, k)

    flat = tensor.reshape(-1)
    return {format(i, f'0{width}b'): float(flat[i]) for i in np.nonzero(flat)[0]}


def clamp_expectation(x: float) -> float:
    """Clip to the physical range [-1, 1]."""
    return float(min(1.0, max(-1.0, x)))
