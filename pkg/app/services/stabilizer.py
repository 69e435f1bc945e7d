"""Stabilizer-tableau simulation, Pauli-frame shot sampling and Pauli expectations."""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from app.services.circuits import SINGLE_QUBIT_GATES, Circuit, Gate
from app.services.errors import EmptyCounts, LengthMismatch, NonCliffordGate, ValidationError

logger = logging.getLogger(__name__)

Seed = Union[int, Sequence[int], np.random.SeedSequence]

PAULI_LETTERS = 'IXYZ'
SHOT_BLOCK = 8192

# single-qubit Heisenberg action U P U^dagger: letter -> (sign, letter)
_CONJUGATION = {
    'h': {'X': (1, 'Z'), 'Y': (-1, 'Y'), 'Z': (1, 'X')},
    's': {'X': (1, 'Y'), 'Y': (-1, 'X'), 'Z': (1, 'Z')},
    'sdg': {'X': (-1, 'Y'), 'Y': (1, 'X'), 'Z': (1, 'Z')},
    'x': {'X': (1, 'X'), 'Y': (-1, 'Y'), 'Z': (-1, 'Z')},
    'rx-': {'X': (1, 'X'), 'Y': (1, 'Z'), 'Z': (-1, 'Y')},
    'rx+': {'X': (1, 'X'), 'Y': (-1, 'Z'), 'Z': (1, 'Y')},
    'rz-': {'X': (1, 'Y'), 'Y': (-1, 'X'), 'Z': (1, 'Z')},
    'rz+': {'X': (-1, 'Y'), 'Y': (1, 'X'), 'Z': (1, 'Z')},
}


@dataclass(frozen=True)
class PauliString:
    """Signed Pauli string; letters[k] acts on logical qubit k."""
    phase: int
    letters: str

    def __post_init__(self):
        if self.phase not in (1, -1):
            raise ValidationError(f"Pauli phase must be +1 or -1, got {self.phase}")
        if any(c not in PAULI_LETTERS for c in self.letters):
            raise ValidationError(f"Invalid Pauli letters '{self.letters}'")

    @classmethod
    def from_label(cls, label: str) -> 'PauliString':
        phase = -1 if label.startswith('-') else 1
        return cls(phase, label.lstrip('+-'))

    @classmethod
    def identity(cls, n: int) -> 'PauliString':
        return cls(1, 'I' * n)

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def label(self) -> str:
        return ('-' if self.phase < 0 else '') + self.letters

    @property
    def weight(self) -> int:
        return sum(1 for c in self.letters if c != 'I')

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(k for k, c in enumerate(self.letters) if c != 'I')

    def negate(self) -> 'PauliString':
        return PauliString(-self.phase, self.letters)

    def positive(self) -> 'PauliString':
        return PauliString(1, self.letters)

    def symplectic(self) -> Tuple[np.ndarray, np.ndarray]:
        x = np.array([c in 'XY' for c in self.letters], dtype=np.uint8)
        z = np.array([c in 'ZY' for c in self.letters], dtype=np.uint8)
        return x, z

    def conjugated(self, gate: str, qubit: int) -> 'PauliString':
        """U P U^dagger for a single-qubit Clifford U on `qubit`."""
        if gate not in _CONJUGATION:
            raise NonCliffordGate(f"No conjugation rule for '{gate}'")
        letter = self.letters[qubit]
        if letter == 'I':
            return self
        sign, new = _CONJUGATION[gate][letter]
        letters = self.letters[:qubit] + new + self.letters[qubit + 1:]
        return PauliString(self.phase * sign, letters)

    def on_wires(self, layout: Sequence[int]) -> 'PauliString':
        """Move letter k onto wire layout[k]."""
        if len(layout) != self.n:
            raise LengthMismatch(f"Layout of length {len(layout)} for a {self.n}-qubit Pauli")
        letters = ['I'] * self.n
        for k, wire in enumerate(layout):
            letters[wire] = self.letters[k]
        return PauliString(self.phase, ''.join(letters))

    def __str__(self):
        return self.label


class StabilizerState:
    """Aaronson-Gottesman tableau: rows 0..n-1 destabilizers, n..2n-1 stabilizers."""

    def __init__(self, n: int):
        if n < 1:
            raise ValidationError(f"Register width must be >= 1, got {n}")
        self.n = n
        self.x = np.zeros((2 * n, n), dtype=np.uint8)
        self.z = np.zeros((2 * n, n), dtype=np.uint8)
        self.r = np.zeros(2 * n, dtype=np.uint8)
        idx = np.arange(n)
        self.x[idx, idx] = 1
        self.z[n + idx, idx] = 1

    def copy(self) -> 'StabilizerState':
        other = StabilizerState.__new__(StabilizerState)
        other.n = self.n
        other.x, other.z, other.r = self.x.copy(), self.z.copy(), self.r.copy()
        return other

    def h(self, q: int):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.x[:, q], self.z[:, q] = self.z[:, q].copy(), self.x[:, q].copy()

    def s(self, q: int):
        self.r ^= self.x[:, q] & self.z[:, q]
        self.z[:, q] ^= self.x[:, q]

    def sdg(self, q: int):
        self.s(q)
        self.s(q)
        self.s(q)

    def x_gate(self, q: int):
        self.r ^= self.z[:, q]

    def cx(self, c: int, t: int):
        self.r ^= self.x[:, c] & self.z[:, t] & (self.x[:, t] ^ self.z[:, c] ^ 1)
        self.x[:, t] ^= self.x[:, c]
        self.z[:, c] ^= self.z[:, t]

    def swap(self, a: int, b: int):
        self.x[:, [a, b]] = self.x[:, [b, a]]
        self.z[:, [a, b]] = self.z[:, [b, a]]

    def _rowsum(self, h: int, i: int):
        """Row h <- row i * row h, with the phase bookkeeping of the tableau."""
        exponent = 2 * int(self.r[h]) + 2 * int(self.r[i]) + _phase_exponent(
            self.x[i], self.z[i], self.x[h], self.z[h]
        )
        self.r[h] = 0 if exponent % 4 == 0 else 1
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def measure(self, q: int, rng: Optional[np.random.Generator] = None) -> int:
        """Z-basis measurement; random outcomes resolve to 0 when rng is None."""
        n = self.n
        hits = np.nonzero(self.x[n:, q])[0]
        if hits.size:
            p = n + int(hits[0])
            for i in np.nonzero(self.x[:, q])[0]:
                if i != p:
                    self._rowsum(int(i), p)
            self.x[p - n], self.z[p - n], self.r[p - n] = self.x[p].copy(), self.z[p].copy(), self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, q] = 1
            outcome = int(rng.integers(0, 2)) if rng is not None else 0
            self.r[p] = outcome
            return outcome

        # deterministic: accumulate the stabilizers picked out by the destabilizers
        x_acc = np.zeros(n, dtype=np.uint8)
        z_acc = np.zeros(n, dtype=np.uint8)
        exponent = 0
        for i in np.nonzero(self.x[:n, q])[0]:
            row = n + int(i)
            exponent += 2 * int(self.r[row]) + _phase_exponent(self.x[row], self.z[row], x_acc, z_acc)
            x_acc ^= self.x[row]
            z_acc ^= self.z[row]
        return 0 if exponent % 4 == 0 else 1


def _phase_exponent(x1, z1, x2, z2) -> int:
    """Power of i picked up when multiplying Pauli (x1, z1) onto (x2, z2)."""
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    g = np.where(
        (x1 == 1) & (z1 == 1), z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1),
                 np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)),
    )
    return int(g.sum())


def apply_gate(state: StabilizerState, gate: Gate) -> StabilizerState:
    """Conjugate the state by a Clifford gate in place and return it."""
    name, qubits = gate.name, gate.qubits
    if any(not 0 <= q < state.n for q in qubits):
        raise ValidationError(f"Gate {gate.dump()} outside register of width {state.n}")
    if name in ('barrier', 'measure'):
        return state
    if name == 'h':
        state.h(qubits[0])
    elif name in ('s', 'rz-'):
        state.s(qubits[0])
    elif name in ('sdg', 'rz+'):
        state.sdg(qubits[0])
    elif name == 'x':
        state.x_gate(qubits[0])
    elif name == 'rx-':
        state.h(qubits[0])
        state.s(qubits[0])
        state.h(qubits[0])
    elif name == 'rx+':
        state.h(qubits[0])
        state.sdg(qubits[0])
        state.h(qubits[0])
    elif name == 'cx':
        state.cx(*qubits)
    elif name == 'swap':
        state.swap(*qubits)
    else:
        raise NonCliffordGate(f"Unsupported gate '{name}'")
    return state


def prepare_state(circ: Circuit) -> StabilizerState:
    """Noiseless tableau after every non-measurement gate of circ."""
    state = StabilizerState(circ.width)
    for gate in circ.gates:
        apply_gate(state, gate)
    return state


def expectation_exact(state: StabilizerState, p: PauliString) -> int:
    """+1/-1 when +p/-p is in the stabilizer group, 0 otherwise.

    p acts on tableau qubits (wires) directly.
    """
    if p.n != state.n:
        raise LengthMismatch(f"Pauli of length {p.n} on a {state.n}-qubit state")
    n = state.n
    px, pz = p.symplectic()

    stab_x, stab_z = state.x[n:], state.z[n:]
    anti = (stab_x.astype(np.int64) @ pz + stab_z.astype(np.int64) @ px) % 2
    if anti.any():
        return 0

    destab_x, destab_z = state.x[:n], state.z[:n]
    picks = np.nonzero((destab_x.astype(np.int64) @ pz + destab_z.astype(np.int64) @ px) % 2)[0]
    x_acc = np.zeros(n, dtype=np.uint8)
    z_acc = np.zeros(n, dtype=np.uint8)
    exponent = 0
    for i in picks:
        row = n + int(i)
        exponent += 2 * int(state.r[row]) + _phase_exponent(state.x[row], state.z[row], x_acc, z_acc)
        x_acc ^= state.x[row]
        z_acc ^= state.z[row]

    sign = 1 if exponent % 4 == 0 else -1
    return sign * p.phase


@dataclass
class NoiseModel:
    """Stochastic Pauli noise keyed by circuit wire.

    cnot_depol[(a, b)] with a < b is the probability of a uniformly drawn
    non-identity two-qubit Pauli after each CNOT on wires a, b (a SWAP is three);
    sq_depol[w] likewise after single-qubit gates; readout[w] = (eps0, eps1);
    global_depol mixes in the maximally mixed state before measurement.
    """
    cnot_depol: Dict[Tuple[int, int], float] = field(default_factory=dict)
    sq_depol: Dict[int, float] = field(default_factory=dict)
    readout: Dict[int, Tuple[float, float]] = field(default_factory=dict)
    global_depol: float = 0.0
    default_cnot: float = 0.0

    def __post_init__(self):
        probs = list(self.cnot_depol.values()) + list(self.sq_depol.values())
        probs += [e for pair in self.readout.values() for e in pair]
        probs += [self.global_depol, self.default_cnot]
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ValidationError("Noise probabilities must lie in [0, 1]")

    @classmethod
    def noiseless(cls) -> 'NoiseModel':
        return cls()

    @classmethod
    def from_topology(cls, topo, hardware_map: Sequence[int], sq_depol: float = 0.0,
                      readout: bool = True, gates: bool = True, global_depol: float = 0.0) -> 'NoiseModel':
        """Map the topology's per-qubit and per-coupler rates onto circuit wires."""
        hardware_map = list(hardware_map)
        cnot = {}
        if gates:
            for a, hw_a in enumerate(hardware_map):
                for b in range(a + 1, len(hardware_map)):
                    p = topo.cnot_error(hw_a, hardware_map[b])
                    if p is not None:
                        cnot[(a, b)] = p
        return cls(
            cnot_depol=cnot,
            sq_depol={w: sq_depol for w in range(len(hardware_map))} if gates and sq_depol else {},
            readout={w: topo.readout_err[hw] for w, hw in enumerate(hardware_map)} if readout else {},
            global_depol=global_depol,
            default_cnot=topo.mean_cnot_error() if gates else 0.0,
        )

    def cnot_error(self, a: int, b: int) -> float:
        return self.cnot_depol.get((min(a, b), max(a, b)), self.default_cnot)

    @property
    def is_noiseless(self) -> bool:
        return (not any(self.cnot_depol.values()) and not any(self.sq_depol.values())
                and not any(e for pair in self.readout.values() for e in pair)
                and not self.global_depol and not self.default_cnot)


def noisy_gates(gates: Iterable[Gate]) -> Iterable[Gate]:
    """Gates as the noise model sees them: a SWAP is three CNOTs, each followed by its own error."""
    for gate in gates:
        if gate.name == 'swap':
            a, b = gate.qubits
            yield Gate('cx', (a, b))
            yield Gate('cx', (b, a))
            yield Gate('cx', (a, b))
        else:
            yield gate


def _reference_sample(circ: Circuit) -> np.ndarray:
    state = prepare_state(circ)
    bits = np.zeros(circ.width, dtype=np.uint8)
    for wire in sorted(set(circ.measured_bits().values())):
        bits[wire] = state.measure(wire)
    return bits


def _check_measurements(circ: Circuit):
    measured = False
    for gate in circ.gates:
        if gate.name == 'measure':
            measured = True
        elif measured and gate.name != 'barrier':
            raise ValidationError("Gates after measurement are not supported")
        elif gate.name not in SINGLE_QUBIT_GATES + ('cx', 'swap', 'barrier'):
            raise NonCliffordGate(f"Unsupported gate '{gate.name}'")
    if not measured:
        raise ValidationError("Circuit has no measurements")


def _sample_block(circ: Circuit, noise: NoiseModel, ref: np.ndarray, shots: int,
                  rng: np.random.Generator) -> np.ndarray:
    """Pauli-frame propagation for one block of shots; returns (shots, n_clbits)."""
    n = circ.width
    fx = np.zeros((shots, n), dtype=bool)
    fz = rng.random((shots, n)) < 0.5  # randomizes non-deterministic outcomes

    def depolarize_one(q: int, p: float):
        if p <= 0.0:
            return
        hit = rng.random(shots) < p
        kind = rng.integers(1, 4, size=shots)  # 1=X 2=Y 3=Z
        fx[:, q] ^= hit & (kind <= 2)
        fz[:, q] ^= hit & (kind >= 2)

    def depolarize_two(a: int, b: int, p: float):
        if p <= 0.0:
            return
        hit = rng.random(shots) < p
        kind = rng.integers(1, 16, size=shots)
        fx[:, a] ^= hit & ((kind & 1) > 0)
        fz[:, a] ^= hit & ((kind & 2) > 0)
        fx[:, b] ^= hit & ((kind & 4) > 0)
        fz[:, b] ^= hit & ((kind & 8) > 0)

    for gate in noisy_gates(circ.gates):
        name, qs = gate.name, gate.qubits
        if name in ('barrier', 'measure'):
            continue
        if name == 'h':
            q = qs[0]
            fx[:, q], fz[:, q] = fz[:, q].copy(), fx[:, q].copy()
        elif name in ('s', 'sdg', 'rz-', 'rz+'):
            fz[:, qs[0]] ^= fx[:, qs[0]]
        elif name in ('rx-', 'rx+'):
            fx[:, qs[0]] ^= fz[:, qs[0]]
        elif name == 'cx':
            c, t = qs
            fx[:, t] ^= fx[:, c]
            fz[:, c] ^= fz[:, t]
        # x flips no frame bits

        if name == 'cx':
            depolarize_two(qs[0], qs[1], noise.cnot_error(*qs))
        else:
            depolarize_one(qs[0], noise.sq_depol.get(qs[0], 0.0))

    outcomes = ref[None, :].astype(bool) ^ fx
    if noise.global_depol > 0.0:
        mixed = rng.random(shots) < noise.global_depol
        outcomes[mixed] = rng.random((int(mixed.sum()), n)) < 0.5

    for wire, (e0, e1) in noise.readout.items():
        if not e0 and not e1:
            continue
        u = rng.random(shots)
        bit = outcomes[:, wire]
        flip = np.where(bit, u < e1, u < e0)
        outcomes[:, wire] = bit ^ flip

    measured = circ.measured_bits()
    order = [measured[k] for k in sorted(measured)]
    return outcomes[:, order]


def sample_shots(circ: Circuit, noise: NoiseModel, shots: int, seed: Seed) -> Dict[str, int]:
    """Monte-Carlo counts (bitstring -> int, classical bit 0 leftmost).

    Shots are simulated in blocks, each with its own stream spawned from the
    seed, so counts are identical however the blocks are scheduled.
    """
    if shots < 1:
        raise ValidationError(f"shots must be >= 1, got {shots}")
    _check_measurements(circ)

    ref = _reference_sample(circ)
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    n_blocks = -(-shots // SHOT_BLOCK)
    counts: Dict[str, int] = {}
    for block, child in enumerate(root.spawn(n_blocks)):
        size = min(SHOT_BLOCK, shots - block * SHOT_BLOCK)
        bits = _sample_block(circ, noise, ref, size, np.random.default_rng(child))
        weights = 1 << np.arange(bits.shape[1] - 1, -1, -1, dtype=np.int64)
        values, tallies = np.unique(bits.astype(np.int64) @ weights, return_counts=True)
        for value, tally in zip(values.tolist(), tallies.tolist()):
            key = format(value, f'0{bits.shape[1]}b')
            counts[key] = counts.get(key, 0) + int(tally)
    return dict(sorted(counts.items()))


def expectation_from_counts(counts: Mapping[str, float], support: Iterable[int]) -> float:
    """Parity expectation over the support bits; accepts counts or quasi-probabilities."""
    if not counts:
        raise EmptyCounts("No counts to evaluate")
    support = tuple(support)
    total = 0.0
    acc = 0.0
    for bitstring, weight in counts.items():
        parity = sum(bitstring[k] == '1' for k in support) % 2
        acc += -weight if parity else weight
        total += weight
    if total == 0:
        raise EmptyCounts("Counts sum to zero")
    return acc / total
