"""Dense N-qubit state vectors.

Basis ordering: site k is bit k of the basis index (site 0 is the least
significant bit). Bit value 0 is |up> (sigma_z = +1), bit value 1 is |down>.
"""
from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 14


class ResourceError(RuntimeError):
    """Qubit count above the dense-vector guard."""


def check_size(n):
    if int(n) != n or n < 1:
        raise ValueError(f"qubit count must be a positive integer, got {n}")
    if n > MAX_QUBITS:
        raise ResourceError(f"{n} qubits exceeds the dense state-vector limit of {MAX_QUBITS}")
    return int(n)


def z_signs(n):
    """(2^n, n) array of sigma_z eigenvalues, column k for site k."""
    idx = np.arange(1 << n)
    bits = (idx[:, None] >> np.arange(n)[None, :]) & 1
    return 1 - 2 * bits


@dataclass
class SpinState:
    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        self.n = check_size(self.n)
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if self.amplitudes.shape[0] != 1 << self.n:
            raise ValueError(f"state of {self.n} qubits needs {1 << self.n} amplitudes")

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self):
        return SpinState(self.amplitudes / self.norm, self.n)

    def copy(self):
        return SpinState(self.amplitudes.copy(), self.n)

    def overlap(self, other):
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other):
        return abs(self.overlap(other)) ** 2

    @classmethod
    def basis(cls, bits):
        """Product state from a sequence of 0 (up) / 1 (down), site 0 first."""
        n = check_size(len(bits))
        amps = np.zeros(1 << n, dtype=complex)
        amps[sum(int(b) << k for k, b in enumerate(bits))] = 1.0
        return cls(amps, n)

    @classmethod
    def all_up(cls, n):
        return cls.basis([0] * n)

    @classmethod
    def plus(cls, n):
        n = check_size(n)
        return cls(np.full(1 << n, 2.0 ** (-n / 2), dtype=complex), n)

    def to_dict(self):
        return {"n": self.n, "basis_order": "site0_lsb_0_is_up",
                "real": self.amplitudes.real.tolist(), "imag": self.amplitudes.imag.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["real"]) + 1j * np.array(d["imag"]), d["n"])


def apply_single(psi, n, site, U):
    """Apply a 2x2 unitary to ``site`` of a flat state vector (returns a new array)."""
    v = psi.reshape(1 << (n - 1 - site), 2, 1 << site)
    return np.einsum("ab,ibj->iaj", U, v).reshape(-1)
