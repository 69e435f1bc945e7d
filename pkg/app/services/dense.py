"""Dense state-vector / density-matrix reference simulator for small circuits."""
import itertools
from typing import Optional

import numpy as np

from app.services.circuits import Circuit
from app.services.errors import LengthMismatch, NonCliffordGate, TooLarge
from app.services.stabilizer import NoiseModel, PauliString, noisy_gates

DENSE_MAX_QUBITS = 12
DENSITY_MAX_QUBITS = 6

_S2 = 1 / np.sqrt(2)
_PAULI = {
    'I': np.eye(2, dtype=complex),
    'X': np.array([[0, 1], [1, 0]], dtype=complex),
    'Y': np.array([[0, -1j], [1j, 0]], dtype=complex),
    'Z': np.array([[1, 0], [0, -1]], dtype=complex),
}
_SINGLE = {
    'h': np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    's': np.diag([1, 1j]),
    'sdg': np.diag([1, -1j]),
    'x': _PAULI['X'],
    'rx-': (np.eye(2) - 1j * _PAULI['X']) * _S2,
    'rx+': (np.eye(2) + 1j * _PAULI['X']) * _S2,
    'rz-': (np.eye(2) - 1j * _PAULI['Z']) * _S2,
    'rz+': (np.eye(2) + 1j * _PAULI['Z']) * _S2,
}


def _apply_single(psi: np.ndarray, matrix: np.ndarray, q: int) -> np.ndarray:
    psi = np.tensordot(matrix, psi, axes=([1], [q]))
    return np.moveaxis(psi, 0, q)


def _apply_cx(psi: np.ndarray, c: int, t: int) -> np.ndarray:
    psi = psi.copy()
    index = [slice(None)] * psi.ndim
    index[c] = 1
    sub = psi[tuple(index)]
    t_axis = t if t < c else t - 1
    psi[tuple(index)] = np.flip(sub, axis=t_axis)
    return psi


def _apply_gate(psi: np.ndarray, name: str, qubits) -> np.ndarray:
    if name in ('barrier', 'measure'):
        return psi
    if name in _SINGLE:
        return _apply_single(psi, _SINGLE[name], qubits[0])
    if name == 'cx':
        return _apply_cx(psi, *qubits)
    if name == 'swap':
        return np.swapaxes(psi, *qubits).copy()
    raise NonCliffordGate(f"Unsupported gate '{name}'")


def dense_state(circ: Circuit, logical: bool = False) -> np.ndarray:
    """State vector after circ; axis k of the reshaped tensor is wire k.

    With logical=True the axes are permuted so axis k is logical qubit k.
    """
    n = circ.width
    if n > DENSE_MAX_QUBITS:
        raise TooLarge(f"Dense simulation limited to {DENSE_MAX_QUBITS} qubits, got {n}")
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    for gate in circ.gates:
        psi = _apply_gate(psi, gate.name, gate.qubits)
    if logical:
        psi = np.transpose(psi, axes=list(circ.layout))
    return psi.reshape(-1)


def pauli_matrix(p: PauliString) -> np.ndarray:
    out = np.array([[p.phase]], dtype=complex)
    for letter in p.letters:
        out = np.kron(out, _PAULI[letter])
    return out


def _apply_pauli(psi: np.ndarray, p: PauliString) -> np.ndarray:
    out = psi.reshape((2,) * p.n)
    for q, letter in enumerate(p.letters):
        if letter != 'I':
            out = _apply_single(out, _PAULI[letter], q)
    return p.phase * out.reshape(-1)


def _depolarize(rho: np.ndarray, wires, p: float, n: int) -> np.ndarray:
    if p <= 0.0:
        return rho
    terms = [t for t in itertools.product('IXYZ', repeat=len(wires)) if set(t) != {'I'}]
    mixed = np.zeros_like(rho)
    for term in terms:
        letters = ['I'] * n
        for w, letter in zip(wires, term):
            letters[w] = letter
        op = pauli_matrix(PauliString(1, ''.join(letters)))
        mixed += op @ rho @ op.conj().T
    return (1 - p) * rho + p * mixed / len(terms)


def _dense_density(circ: Circuit, noise: NoiseModel) -> np.ndarray:
    n = circ.width
    if n > DENSITY_MAX_QUBITS:
        raise TooLarge(f"Density-matrix simulation limited to {DENSITY_MAX_QUBITS} qubits, got {n}")
    dim = 2 ** n
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    for gate in noisy_gates(circ.gates):
        if gate.name in ('barrier', 'measure'):
            continue
        # columns of the gate unitary, from the state-vector kernel
        unitary = np.stack([
            _apply_gate(np.eye(dim, dtype=complex)[:, k].reshape((2,) * n), gate.name, gate.qubits).reshape(-1)
            for k in range(dim)
        ], axis=1)
        rho = unitary @ rho @ unitary.conj().T
        if gate.name == 'cx':
            rho = _depolarize(rho, gate.qubits, noise.cnot_error(*gate.qubits), n)
        else:
            rho = _depolarize(rho, gate.qubits, noise.sq_depol.get(gate.qubits[0], 0.0), n)
    if noise.global_depol:
        rho = (1 - noise.global_depol) * rho + noise.global_depol * np.eye(dim) / dim
    return rho


def dense_oracle(circ: Circuit, p: PauliString, noise: Optional[NoiseModel] = None) -> float:
    """Exact <P> on the wires of circ; density-matrix evolution when noise is given."""
    if p.n != circ.width:
        raise LengthMismatch(f"Pauli of length {p.n} on a {circ.width}-wire circuit")
    if noise is None or noise.is_noiseless:
        psi = dense_state(circ)
        return float(np.real(np.vdot(psi, _apply_pauli(psi, p))))
    rho = _dense_density(circ, noise)
    return float(np.real(np.trace(pauli_matrix(p) @ rho)))


def states_equal_up_to_phase(a: np.ndarray, b: np.ndarray, tol: float = 1e-10) -> bool:
    return abs(abs(np.vdot(a, b)) - 1.0) < tol
