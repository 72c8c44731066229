"""Cluster-state formation by a global ZZ pulse, and the long-range falloff criterion.

Phase convention: the pulse exp(-i tau/hbar sum_{i<j} J_ij Z_i Z_j) is timed so
nearest-neighbour pairs reach |J_nn| tau / hbar = pi/4. Each site then gets the
local correction exp(i s (pi/4) sum_j w_ij Z_i), with s = sign(J_nn) and
w_ij = J_ij / J_nn. For a single pair this turns the pulse into a controlled-Z
(up to global phase); in general it produces prod_{i<j} CPhase(pi w_ij).
The ideal mode keeps only nearest-neighbour pairs; the realistic mode keeps
every pair, and the corrections use the full row sums.
"""
from dataclasses import dataclass
import math

import numpy as np

from .state import SpinState, check_size, z_signs


def _as_matrix(J_matrix):
    J = getattr(J_matrix, "J", J_matrix)
    return np.asarray(J, dtype=float)


def nearest_neighbor_mask(J_matrix, positions=None, rel=1e-9):
    """Pairs at the minimum separation (from positions if known, else max |J|)."""
    J = _as_matrix(J_matrix)
    n = J.shape[0]
    off = ~np.eye(n, dtype=bool)
    if positions is None:
        positions = getattr(J_matrix, "positions", None)
    if positions is not None:
        P = np.asarray(positions, dtype=float)
        D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
        dmin = D[off].min()
        return off & (D <= dmin * (1.0 + rel))
    A = np.abs(J)
    jmax = A[off].max()
    return off & (A >= jmax * (1.0 - rel))


def ideal_cluster_state(adjacency):
    """prod_{(i,j) in E} CZ_ij |+>^N, built directly from the graph."""
    A = np.asarray(adjacency, dtype=bool)
    n = check_size(A.shape[0])
    bits = (1 - z_signs(n)) // 2
    iu, ju = np.nonzero(np.triu(A, 1))
    parity = (bits[:, iu] * bits[:, ju]).sum(axis=1) % 2
    amps = (1.0 - 2.0 * parity) * 2.0 ** (-n / 2)
    return SpinState(amps.astype(complex), n)


def zz_pulse_state(weights, sign):
    """State after the timed ZZ pulse plus local corrections on |+>^N.

    ``weights`` holds w_ij = J_ij / J_nn; ``sign`` = sign(J_nn).
    """
    W = np.asarray(weights, dtype=float)
    n = check_size(W.shape[0])
    Z = z_signs(n).astype(float)
    quarter = math.pi / 4.0
    # pulse: exp(-i s (pi/4) sum_{i<j} w_ij z_i z_j)
    pulse = -sign * quarter * 0.5 * np.einsum("bi,ij,bj->b", Z, W, Z)
    # corrections: exp(+i s (pi/4) sum_i (sum_j w_ij) z_i)
    corr = sign * quarter * (Z @ W.sum(axis=1))
    psi = np.exp(1j * (pulse + corr)) * 2.0 ** (-n / 2)
    return SpinState(psi, n)


@dataclass
class ClusterResult:
    state: SpinState
    fidelity: float
    target: SpinState
    nn_mask: np.ndarray


def make_cluster_state(layout, J_matrix, include_long_range=False):
    """Form the cluster state on the occupied sites and score it against the ideal
    nearest-neighbour cluster state. Returns a :class:`ClusterResult`."""
    J = _as_matrix(J_matrix)
    positions = getattr(J_matrix, "positions", None)
    if positions is None and layout is not None:
        positions = layout.positions()
    mask = nearest_neighbor_mask(J, positions)
    check_size(J.shape[0])
    j_nn = J[mask].flat[np.argmax(np.abs(J[mask]))]
    W = J / j_nn
    if not include_long_range:
        W = np.where(mask, W, 0.0)
    state = zz_pulse_state(W, math.copysign(1.0, j_nn))
    target = ideal_cluster_state(mask)
    return ClusterResult(state=state, fidelity=state.fidelity(target), target=target, nn_mask=mask)


@dataclass
class FalloffFit:
    passes: bool
    exponent: float
    dimension: int
    distances: np.ndarray
    magnitudes: np.ndarray


def correlation_falloff_check(J_matrix, dimension, distances=None, rel=1e-9, margin=1e-6):
    """Fit |J| ~ b^(-p) on a log-log scale; pass iff p > dimension + margin.

    ``margin`` keeps an exact cubic law from passing D = 3 through round-off.
    """
    J = _as_matrix(J_matrix)
    if distances is None:
        P = getattr(J_matrix, "positions", None)
        if P is None:
            raise ValueError("distances are required when the matrix carries no positions")
        P = np.asarray(P)
        distances = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
    D = np.asarray(distances, dtype=float)
    iu = np.triu_indices(J.shape[0], 1)
    b, m = D[iu], np.abs(J[iu])
    keep = m > 0.0
    b, m = b[keep], m[keep]
    order = np.argsort(b)
    b, m = b[order], m[order]
    groups_b, groups_m = [], []
    for bi, mi in zip(b, m):
        if groups_b and abs(bi - groups_b[-1][0]) <= rel * groups_b[-1][0]:
            groups_b[-1].append(bi)
            groups_m[-1].append(mi)
        else:
            groups_b.append([bi])
            groups_m.append([mi])
    if len(groups_b) < 4:
        raise ValueError(f"falloff fit needs at least 4 distinct distances, got {len(groups_b)}")
    ub = np.array([np.mean(g) for g in groups_b])
    um = np.array([np.mean(g) for g in groups_m])
    slope = np.polyfit(np.log(ub), np.log(um), 1)[0]
    p = -float(slope)
    return FalloffFit(passes=p > dimension + margin, exponent=p, dimension=dimension,
                      distances=ub, magnitudes=um)
