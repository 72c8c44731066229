"""Transverse-field Ising Hamiltonians with optional site-local fields.

    H = sum_{i<j} J_ij Z_i Z_j + sum_{i<j} Jxx_ij X_i X_j
        + B_f sum_k X_k + sum_k h_k . sigma_k

All energies are in joules; evolution uses exp(-i H t / hbar).
"""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp

from ..constants import H_PLANCK, HBAR
from .state import check_size, z_signs


def _sym(M, n, name):
    M = np.asarray(M, dtype=float)
    if M.shape != (n, n):
        raise ValueError(f"{name} must be {n}x{n}")
    if not np.allclose(M, M.T, rtol=0.0, atol=1e-14 * max(1.0, np.abs(M).max())):
        raise ValueError(f"{name} must be symmetric")
    M = 0.5 * (M + M.T)
    np.fill_diagonal(M, 0.0)
    return M


@dataclass
class HamiltonianSpec:
    J: np.ndarray
    B_f: float = 0.0
    local_fields: list = field(default_factory=list)  # per site: None or (axis, strength)
    J_xx: Optional[np.ndarray] = None

    def __post_init__(self):
        J = np.asarray(self.J, dtype=float)
        n = check_size(J.shape[0])
        self.J = _sym(J, n, "J")
        if self.J_xx is not None:
            self.J_xx = _sym(self.J_xx, n, "J_xx")
        if not self.local_fields:
            self.local_fields = [None] * n
        if len(self.local_fields) != n:
            raise ValueError("local_fields needs one entry per site")
        lf = []
        for f in self.local_fields:
            if f is None:
                lf.append(None)
                continue
            axis, strength = f
            a = np.asarray(axis, dtype=float).reshape(3)
            a = a / np.linalg.norm(a)
            lf.append((tuple(a), float(strength)))
        self.local_fields = lf

    @property
    def n(self):
        return self.J.shape[0]

    @classmethod
    def from_hertz(cls, J_hz, B_f_hz=0.0, local_fields_hz=None, J_xx_hz=None):
        """Build from frequencies (E = h f)."""
        lf = None
        if local_fields_hz is not None:
            lf = [None if f is None else (f[0], f[1] * H_PLANCK) for f in local_fields_hz]
        return cls(np.asarray(J_hz) * H_PLANCK, B_f_hz * H_PLANCK, lf or [],
                   None if J_xx_hz is None else np.asarray(J_xx_hz) * H_PLANCK)

    @classmethod
    def from_coupling_matrix(cls, cm, B_f_hz=0.0, layout=None):
        """Ising model from a :class:`~coiltrap.coupling.CouplingMatrix`.

        Pinned sites of ``layout`` (strengths already in joules) become local fields.
        """
        lf = []
        if layout is not None:
            for idx in cm.sites:
                pin = layout.sites[idx].pinned_field
                lf.append(None if pin is None else (pin.axis, pin.strength))
        return cls(cm.J * H_PLANCK, B_f_hz * H_PLANCK, lf)

    @property
    def gamma(self):
        """J_nn / B_f with J_nn the largest-magnitude coupling (sign kept)."""
        iu = np.triu_indices(self.n, 1)
        vals = self.J[iu]
        j_nn = vals[np.argmax(np.abs(vals))] if vals.size else 0.0
        return j_nn / self.B_f if self.B_f != 0.0 else np.inf

    def field_vectors(self):
        """(n, 3) one-body field h_k including the global transverse field."""
        h = np.zeros((self.n, 3))
        h[:, 0] = self.B_f
        for k, f in enumerate(self.local_fields):
            if f is not None:
                h[k] += np.asarray(f[0]) * f[1]
        return h

    def diagonal(self):
        """Energies of the Z-diagonal part for every basis state."""
        Z = z_signs(self.n).astype(float)
        zz = 0.5 * np.einsum("bi,ij,bj->b", Z, self.J, Z)
        return zz + Z @ self.field_vectors()[:, 2]

    def sparse(self):
        """Full operator as a scipy CSR matrix (joules)."""
        n = self.n
        dim = 1 << n
        idx = np.arange(dim)
        Z = z_signs(n).astype(float)
        H = sp.diags(self.diagonal().astype(complex), format="csr")
        h = self.field_vectors()
        for k in range(n):
            hx, hy = h[k, 0], h[k, 1]
            if hx == 0.0 and hy == 0.0:
                continue
            # <flip_k(b)| (hx X + hy Y) |b>: X gives 1, Y gives i*z_k(b)
            vals = hx + 1j * hy * Z[:, k]
            H = H + sp.csr_matrix((vals, (idx ^ (1 << k), idx)), shape=(dim, dim))
        if self.J_xx is not None:
            for i in range(n):
                for j in range(i + 1, n):
                    if self.J_xx[i, j] != 0.0:
                        H = H + sp.csr_matrix(
                            (np.full(dim, self.J_xx[i, j], dtype=complex),
                             (idx ^ ((1 << i) | (1 << j)), idx)), shape=(dim, dim))
        return H.tocsr()

    def dense(self):
        return self.sparse().toarray()

    def expectation(self, state):
        psi = state.amplitudes
        return float(np.real(np.vdot(psi, self.sparse() @ psi)))

    def in_angular_units(self):
        """Copy with every energy divided by hbar (rad/s)."""
        return HamiltonianSpec(
            self.J / HBAR, self.B_f / HBAR,
            [None if f is None else (f[0], f[1] / HBAR) for f in self.local_fields],
            None if self.J_xx is None else self.J_xx / HBAR)
