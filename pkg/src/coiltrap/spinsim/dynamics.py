"""Exact and Trotterised time evolution, observables, ground states and gamma sweeps."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import expm_multiply

from ..constants import H_PLANCK, HBAR
from .hamiltonian import HamiltonianSpec
from .state import SpinState, apply_single, z_signs

DENSE_LIMIT = 10
_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


@dataclass(frozen=True)
class Trotter:
    dt: float

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValueError("Trotter step must be positive")


EXACT = "exact"


def _check(state, ham):
    if state.n != ham.n:
        raise ValueError(f"state has {state.n} qubits, Hamiltonian {ham.n}")


def evolve(state: SpinState, ham: HamiltonianSpec, t, method=EXACT) -> SpinState:
    """|psi(t)> = exp(-i H t / hbar)|psi(0)>.

    ``method`` is ``"exact"`` (dense eigendecomposition up to 10 qubits,
    ``scipy.sparse.linalg.expm_multiply`` above) or a :class:`Trotter`
    instance for symmetric second-order splitting.
    """
    _check(state, ham)
    w = ham.in_angular_units()
    if isinstance(method, Trotter):
        return _trotter(state, w, t, method.dt)
    if method != EXACT:
        raise ValueError(f"unknown evolution method {method!r}")
    psi = state.amplitudes
    if state.n <= DENSE_LIMIT:
        E, V = sla.eigh(w.dense())
        out = V @ (np.exp(-1j * E * t) * (V.conj().T @ psi))
    else:
        out = expm_multiply(-1j * t * w.sparse(), psi)
    return SpinState(out, state.n)


def _one_body_unitaries(h, tau):
    """exp(-i tau h.sigma) for each row of h (transverse parts only)."""
    out = []
    for hx, hy in h[:, :2]:
        mag = math.hypot(hx, hy)
        if mag == 0.0:
            out.append(None)
            continue
        c, s = math.cos(mag * tau), math.sin(mag * tau)
        out.append(c * _I2 - 1j * s * (hx * _X + hy * _Y) / mag)
    return out


def _trotter(state, w, t, dt):
    n = state.n
    steps = max(1, int(round(abs(t) / dt)))
    tau = t / steps
    diag = w.diagonal()
    half_phase = np.exp(-0.5j * tau * diag)
    U1 = _one_body_unitaries(w.field_vectors(), tau)
    xx_phase = None
    if w.J_xx is not None and np.any(w.J_xx):
        Z = z_signs(n).astype(float)
        xx_phase = np.exp(-1j * tau * 0.5 * np.einsum("bi,ij,bj->b", Z, w.J_xx, Z))
        Hd = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2.0)

    psi = state.amplitudes.copy()
    for _ in range(steps):
        psi = half_phase * psi
        if xx_phase is None:
            for k, u in enumerate(U1):
                if u is not None:
                    psi = apply_single(psi, n, k, u)
        else:
            # one-body half step, XX full step in the Hadamard basis, one-body half step
            half = _one_body_unitaries(w.field_vectors(), 0.5 * tau)
            for k, u in enumerate(half):
                if u is not None:
                    psi = apply_single(psi, n, k, u)
            for k in range(n):
                psi = apply_single(psi, n, k, Hd)
            psi = xx_phase * psi
            for k in range(n):
                psi = apply_single(psi, n, k, Hd)
            for k, u in enumerate(half):
                if u is not None:
                    psi = apply_single(psi, n, k, u)
        psi = half_phase * psi
    return SpinState(psi, n)


@dataclass
class Observables:
    sx: np.ndarray
    sy: np.ndarray
    sz: np.ndarray
    zz: np.ndarray
    magnetization: float

    @property
    def mean_sx(self):
        return float(self.sx.mean())

    def to_dict(self):
        return {"sx": self.sx.tolist(), "sy": self.sy.tolist(), "sz": self.sz.tolist(),
                "zz": self.zz.tolist(), "magnetization": self.magnetization}


def observables(state: SpinState) -> Observables:
    """Per-site <X>, <Y>, <Z>, the <Z_i Z_j> matrix and total magnetisation sum_k <Z_k>."""
    n = state.n
    psi = state.amplitudes
    p = np.abs(psi) ** 2
    Z = z_signs(n).astype(float)
    sz = p @ Z
    zz = np.einsum("b,bi,bj->ij", p, Z, Z)
    sx = np.empty(n)
    sy = np.empty(n)
    for k in range(n):
        v = psi.reshape(1 << (n - 1 - k), 2, 1 << k)
        w = np.vdot(v[:, 0, :], v[:, 1, :])
        sx[k] = 2.0 * w.real
        sy[k] = 2.0 * w.imag
    clip = lambda a: np.clip(a, -1.0, 1.0)
    return Observables(clip(sx), clip(sy), clip(sz), clip(zz), float(sz.sum()))


def flip_all(psi, n):
    """Apply prod_k X_k (global spin flip) to a flat state vector."""
    return psi[np.arange(1 << n) ^ ((1 << n) - 1)]


def ground_state(ham: HamiltonianSpec, degeneracy_tol=1e-10):
    """Lowest eigenvector; an exactly degenerate ground space is resolved to its
    flip-symmetric combination."""
    E, V = sla.eigh(ham.dense())
    scale = float(np.abs(E).max()) or 1.0
    deg = np.nonzero(E - E[0] <= degeneracy_tol * scale)[0]
    psi = V[:, 0]
    if deg.size > 1:
        best = None
        for k in deg:
            v = V[:, k]
            s = 0.5 * (v + flip_all(v, ham.n))
            if best is None or np.linalg.norm(s) > np.linalg.norm(best):
                best = s
        if np.linalg.norm(best) > 1e-8:
            psi = best / np.linalg.norm(best)
    return SpinState(psi, ham.n), float(E[0])


def normalized_pattern(J):
    """Coupling pattern scaled so the largest-magnitude entry is +1."""
    J = np.asarray(J, dtype=float)
    iu = np.triu_indices(J.shape[0], 1)
    ref = J[iu][np.argmax(np.abs(J[iu]))]
    return J / ref


def gamma_sweep(pattern, gammas, b_field=-H_PLANCK * 1e3, mode="ground", t=None, initial=None,
                method=EXACT, local_fields=None, threads=1):
    """Observables across gamma = J_nn / B_f.

    ``pattern`` is a coupling matrix, rescaled so the nearest-neighbour entry
    is +1; each point uses J = gamma * b_field * pattern. ``b_field`` is the
    transverse-field energy in joules (default -h x 1 kHz). With the
    default negative field the gamma = 0 ground state is |+>^N and
    antiferromagnetic couplings correspond to gamma < 0.

    ``mode="ground"`` reports ground-state observables, ``mode="evolve"``
    evolves ``initial`` (default |+>^N) for time ``t`` at each gamma.
    Points are independent; ``threads`` > 1 evaluates them concurrently and
    the rows keep the order of ``gammas``.
    """
    if mode not in ("ground", "evolve"):
        raise ValueError(f"unknown sweep mode {mode!r}")
    if mode == "evolve" and t is None:
        raise ValueError("evolve mode needs a time t")
    K = normalized_pattern(pattern)
    n = K.shape[0]
    nn = np.isclose(np.abs(K), 1.0, rtol=1e-9) & ~np.eye(n, dtype=bool)
    start = initial or SpinState.plus(n)

    def point(g):
        ham = HamiltonianSpec(g * b_field * K, b_field, local_fields or [])
        if mode == "ground":
            st, e0 = ground_state(ham)
        else:
            st = evolve(start, ham, t, method)
            e0 = ham.expectation(st)
        ob = observables(st)
        return {
            "gamma": float(g),
            "energy": e0,
            "mean_sx": ob.mean_sx,
            "mean_sz": float(ob.sz.mean()),
            "nn_zz": float(ob.zz[nn].mean()) if nn.any() else float("nan"),
            "sx": ob.sx.tolist(),
            "sz": ob.sz.tolist(),
        }

    gammas = [float(g) for g in gammas]
    if threads > 1 and len(gammas) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(point, gammas))
    return [point(g) for g in gammas]


def two_spin_phase(J, t):
    """Phase factor of the aligned pair (both up) relative to an anti-aligned pair
    under H = J Z1 Z2: exp(-2 i J t / hbar)."""
    return np.exp(-2j * J * t / HBAR)
