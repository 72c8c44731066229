"""Vectorised numpy kernel for superposed circular-loop fields.

This is the reference implementation and the fallback when the compiled
extension is unavailable. The compiled kernel in ``_ckernel.pyx`` follows the
same arithmetic, point by point.

All functions take the packed coil arrays produced by
:func:`coiltrap.fieldcore.coils.pack_coils`:

``centers``  (C, 3) coil centres
``frames``   (C, 3, 3) rows are the coil-frame unit vectors (u, v, n)
``radius``   (C,)
``current``  (C,) effective signed current (turns and RF phase folded in)

Singular evaluations are reported through an index array rather than raised
so both kernels share a calling convention.
"""
from fractions import Fraction
from math import comb

import numpy as np

from ..constants import MU0
from .elliptic import AGM_TOL

FILAMENT_EPS = 1e-12
# Below this modulus the radial bracket (1 - m/2) E - (1 - m) K, which is
# O(m^2), is summed as a power series instead of by cancellation.
SMALL_M = 0.05
N_SERIES = 16
_CHUNK = 1 << 20


def radial_series_coefficients(n_terms=N_SERIES):
    """g_k with (1 - m/2) E(m) - (1 - m) K(m) = (pi/2) m^2 sum_k g_k m^k."""
    c = [Fraction(comb(2 * n, n), 4**n) ** 2 for n in range(n_terms + 3)]
    e = [cn / (1 - 2 * n) for n, cn in enumerate(c)]
    full = [e[n] - c[n] + (c[n - 1] - e[n - 1] / 2 if n else 0) for n in range(n_terms + 2)]
    assert full[0] == 0 and full[1] == 0
    return [float(v) for v in full[2:]]


RADIAL_SERIES = radial_series_coefficients()


def _radial_series(m):
    s = np.zeros_like(m)
    for g in reversed(RADIAL_SERIES):
        s = s * m + g
    return s


def _agm_ke(m):
    # per-element stopping, matching the compiled kernel's scalar loop
    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    weight = np.full_like(m, 0.5)
    acc = weight * m
    for _ in range(64):
        active = np.abs(a - b) > AGM_TOL * a
        if not active.any():
            break
        c = 0.5 * (a - b)
        a, b = np.where(active, 0.5 * (a + b), a), np.where(active, np.sqrt(a * b), b)
        weight = np.where(active, 2.0 * weight, weight)
        acc = np.where(active, acc + weight * c * c, acc)
    K = np.pi / (2.0 * a)
    return K, K * (1.0 - acc)


def local_loop_field(rho, z, R, current):
    """Cylindrical (B_rho, B_z) of a loop of radius R in its own frame."""
    rho = np.asarray(rho, dtype=float)
    z = np.asarray(z, dtype=float)
    R2 = R * R
    sq = R2 + z * z + rho * rho
    alpha2 = sq - 2.0 * R * rho
    beta2 = sq + 2.0 * R * rho
    beta = np.sqrt(beta2)
    alpha2_safe = np.where(alpha2 > 0.0, alpha2, 1.0)
    m = np.clip(1.0 - alpha2_safe / beta2, 0.0, np.nextafter(1.0, 0.0))
    K, E = _agm_ke(m)
    pref = MU0 * current / np.pi
    Bz = pref / (2.0 * alpha2_safe * beta) * ((R2 - rho * rho - z * z) * E + alpha2_safe * K)

    small = m < SMALL_M
    rho_safe = np.where(small, 1.0, rho)
    Brho_full = pref * z / (2.0 * alpha2_safe * beta * rho_safe) * (sq * E - alpha2_safe * K)
    # series branch: B_rho = 4 pi pref z R^2 rho S(m) / (alpha^2 beta^3), regular at rho = 0
    Brho_series = (4.0 * np.pi * pref * z * R2 * rho * _radial_series(m)
                   / (alpha2_safe * beta2 * beta))
    Brho = np.where(small, Brho_series, Brho_full)
    return Brho, Bz


def _bfield_chunk(points, centers, frames, radius, current):
    # Explicit products and a sequential coil sum (no einsum/BLAS), so each
    # point's result is independent of how many points share the call.
    d = points[:, None, :] - centers[None, :, :]  # (M, C, 3)
    F = frames[None, :, :, :]
    x = F[..., 0, 0] * d[..., 0] + F[..., 0, 1] * d[..., 1] + F[..., 0, 2] * d[..., 2]
    y = F[..., 1, 0] * d[..., 0] + F[..., 1, 1] * d[..., 1] + F[..., 1, 2] * d[..., 2]
    z = F[..., 2, 0] * d[..., 0] + F[..., 2, 1] * d[..., 1] + F[..., 2, 2] * d[..., 2]
    rho = np.hypot(x, y)
    R = radius[None, :]
    dist = np.hypot(rho - R, z)
    bad_mask = dist <= FILAMENT_EPS
    Brho, Bz = local_loop_field(rho, z, R, current[None, :])
    rho_safe = np.where(rho > 0.0, rho, 1.0)
    bx_loc = np.where(rho > 0.0, Brho * (x / rho_safe), 0.0)
    by_loc = np.where(rho > 0.0, Brho * (y / rho_safe), 0.0)
    # back to the global frame: B = sum_k bloc_k * frame_row_k
    comps = [np.where(bad_mask, 0.0, bx_loc * F[..., 0, j] + by_loc * F[..., 1, j] + Bz * F[..., 2, j])
             for j in range(3)]
    B = np.zeros((points.shape[0], 3))
    for c in range(centers.shape[0]):
        for j in range(3):
            B[:, j] += comps[j][:, c]
    bad = np.where(bad_mask.any(axis=1), bad_mask.argmax(axis=1), -1)
    return B, dist.min(axis=1, initial=np.inf), bad


def bfield(points, centers, frames, radius, current):
    """Return ``(B, min_dist, bad)`` for an (M, 3) point array.

    ``bad[i]`` is the index of the first coil whose filament coincides with
    point i, or -1.
    """
    points = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    M = points.shape[0]
    C = centers.shape[0]
    B = np.zeros((M, 3))
    dmin = np.full(M, np.inf)
    bad = np.full(M, -1, dtype=np.int64)
    if C == 0 or M == 0:
        return B, dmin, bad
    step = max(1, _CHUNK // C)
    for s in range(0, M, step):
        sl = slice(s, s + step)
        B[sl], dmin[sl], bad[sl] = _bfield_chunk(points[sl], centers, frames, radius, current)
    return B, dmin, bad


def bfield_jacobian(points, centers, frames, radius, current, h_min=1e-9, h_rel=1e-6):
    """Field and Jacobian ``J[m, i, j] = dB_i/dx_j`` by Richardson-extrapolated
    central differences.

    The step at each point is ``max(h_min, h_rel * d)`` with d the distance to
    the nearest filament. Returns ``(B, J, bad)``; ``bad`` flags any stencil
    point that lands on a filament.
    """
    points = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    M = points.shape[0]
    B0, dmin, bad = bfield(points, centers, frames, radius, current)
    h = np.maximum(h_min, h_rel * np.where(np.isfinite(dmin), dmin, 0.0))

    # stencil order: for axis j, (+h, -h, +h/2, -h/2)
    offsets = np.zeros((M, 12, 3))
    for j in range(3):
        for k, frac in enumerate((1.0, -1.0, 0.5, -0.5)):
            offsets[:, 4 * j + k, j] = frac * h
    stencil = (points[:, None, :] + offsets).reshape(-1, 3)
    Bs, _, bad_s = bfield(stencil, centers, frames, radius, current)
    Bs = Bs.reshape(M, 12, 3)
    bad_s = bad_s.reshape(M, 12)
    bad = np.where(bad >= 0, bad, bad_s.max(axis=1))

    J = np.empty((M, 3, 3))
    for j in range(3):
        d_h = (Bs[:, 4 * j] - Bs[:, 4 * j + 1]) / (2.0 * h[:, None])
        d_h2 = (Bs[:, 4 * j + 2] - Bs[:, 4 * j + 3]) / h[:, None]
        J[:, :, j] = (4.0 * d_h2 - d_h) / 3.0
    return B0, J, bad
