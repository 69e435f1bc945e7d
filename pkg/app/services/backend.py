"""Simulated device that executes circuits against a topology's error rates."""
import logging
from typing import Dict, List, Sequence

import numpy as np

from app.services.circuits import Circuit
from app.services.errors import ValidationError
from app.services.stabilizer import NoiseModel, Seed, sample_shots
from app.services.topology import HardwareTopology

logger = logging.getLogger(__name__)


class SimulatedBackend:
    """Stands in for a device queue: same topology, stationary stochastic noise.

    gates/readout switch the topology's CNOT and readout errors on or off;
    sq_depol and global_depol add noise the topology file does not describe.
    """

    def __init__(self, topology: HardwareTopology, sq_depol: float = 0.0,
                 readout: bool = True, gates: bool = True, global_depol: float = 0.0):
        self.topology = topology
        self.sq_depol = sq_depol
        self.readout = readout
        self.gates = gates
        self.global_depol = global_depol

    def noise_for(self, circ: Circuit) -> NoiseModel:
        return NoiseModel.from_topology(
            self.topology,
            circ.hardware_map,
            sq_depol=self.sq_depol,
            readout=self.readout,
            gates=self.gates,
            global_depol=self.global_depol,
        )

    def run(self, circuits: Sequence[Circuit], shots: int, seeds: Sequence[Seed]) -> List[Dict[str, int]]:
        """Counts per circuit; circuit i draws from its own stream seeds[i]."""
        if len(seeds) != len(circuits):
            raise ValidationError(f"{len(circuits)} circuits but {len(seeds)} seeds")
        results = []
        for circ, seed in zip(circuits, seeds):
            results.append(sample_shots(circ, self.noise_for(circ), shots, seed))
        logger.debug(f"{self!r} executed {len(circuits)} circuits x {shots} shots")
        return results

    @classmethod
    def noiseless(cls, topology: HardwareTopology) -> 'SimulatedBackend':
        return cls(topology, readout=False, gates=False)

    def readout_only(self) -> 'SimulatedBackend':
        """Same device with gate, single-qubit and white noise off; used for readout calibration."""
        return SimulatedBackend(self.topology, readout=self.readout, gates=False)

    def to_dict(self) -> dict:
        return {
            'topology': self.topology.name,
            'sq_depol': self.sq_depol,
            'readout': self.readout,
            'gates': self.gates,
            'global_depol': self.global_depol,
        }

    def __repr__(self):
        return f'<SimulatedBackend {self.topology.name}>'


def spawn_seeds(master: int, *key: int, count: int = 1) -> List[np.random.SeedSequence]:
    """Independent child streams for (master, *key)."""
    return np.random.SeedSequence([master, *key]).spawn(count)
