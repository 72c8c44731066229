"""Complete elliptic integrals K(m), E(m) by the arithmetic-geometric mean.

The parameter is m = k**2. Both scalar and array inputs are accepted.
"""
import math

import numpy as np

AGM_TOL = 1e-15
_MAX_ITER = 64


class EllipticDomainError(ValueError):
    """Raised for a parameter outside 0 <= m < 1."""


def _ke_scalar(m):
    a = 1.0
    b = math.sqrt(1.0 - m)
    c2 = m
    weight = 0.5
    acc = weight * c2
    for _ in range(_MAX_ITER):
        if abs(a - b) <= AGM_TOL * a:
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        weight *= 2.0
        acc += weight * c * c
    K = math.pi / (2.0 * a)
    return K, K * (1.0 - acc)


def elliptic_KE(k_squared):
    """Return ``(K, E)`` for parameter ``k_squared`` in [0, 1).

    Iterates a_{n+1} = (a_n + b_n)/2, b_{n+1} = sqrt(a_n b_n) from a_0 = 1,
    b_0 = sqrt(1 - m) until |a - b| <= 1e-15 a. Then K = pi / (2 a_N) and
    E = K (1 - sum_n 2^(n-1) c_n^2) with c_0^2 = m, c_{n+1} = (a_n - b_n)/2.

    Raises
    ------
    EllipticDomainError
        If any parameter lies outside [0, 1) or is not finite.
    """
    m = np.asarray(k_squared, dtype=float)
    if not np.all(np.isfinite(m)) or np.any(m < 0.0) or np.any(m >= 1.0):
        raise EllipticDomainError(f"elliptic parameter must satisfy 0 <= k^2 < 1, got {k_squared!r}")
    if m.ndim == 0:
        return _ke_scalar(float(m))

    a = np.ones_like(m)
    b = np.sqrt(1.0 - m)
    weight = 0.5
    acc = weight * m
    for _ in range(_MAX_ITER):
        if np.all(np.abs(a - b) <= AGM_TOL * a):
            break
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), np.sqrt(a * b)
        weight *= 2.0
        acc = acc + weight * c * c
    K = np.pi / (2.0 * a)
    return K, K * (1.0 - acc)
