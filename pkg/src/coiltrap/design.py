"""Field -> force -> coupling pipelines used by the CLI and the design reports."""
from dataclasses import dataclass
import math

import numpy as np

from .coupling import CouplingConfig, binding_parameter, coupling_strength, mode_force
from .forces import MomentModel, force_vectors
from .lattice import make_square


def microcoil_array(n=20, a=10e-6, radius=2.5e-6, current=10e-3, height=0.0):
    """Square coil array with a coil centred at the origin."""
    return make_square(n, n, a, height, coil_radius=radius, current=current)


def edge_point(radius, height, center=(0.0, 0.0, 0.0)):
    """Point above the coil perimeter along the x = y diagonal."""
    s = radius / math.sqrt(2.0)
    return np.array([center[0] + s, center[1] + s, center[2] + height])


@dataclass
class SiteCoupling:
    point: np.ndarray
    F: np.ndarray
    F_mode: float
    J_Hz: float
    beta: float


def site_coupling(layout, point, omega_T, a, config: CouplingConfig, moment=None,
                  external_B=(0.0, 0.0, 0.0), backend_name=None):
    """Nearest-neighbour coupling for identical ions at ``point``-equivalent sites."""
    moment = moment or MomentModel(mu_eff=config.ion.mu_eff)
    F, _ = force_vectors(layout, np.asarray(point, dtype=float)[None, :], moment, external_B,
                         backend_name=backend_name)
    Fm = float(mode_force(F[0], config.mode_orientation))
    J = float(coupling_strength(Fm, config.ion, omega_T, a, config))
    return SiteCoupling(np.asarray(point, dtype=float), F[0], Fm, J,
                        float(binding_parameter(config.ion, omega_T, a)))


def coupling_map(layout, grid, omega_T, a, config: CouplingConfig, moment=None,
                 external_B=(0.0, 0.0, 0.0), backend_name=None, threads=1):
    """Signed J/h over a scan grid; returns (points, F, J) with grid-shaped arrays."""
    moment = moment or MomentModel(mu_eff=config.ion.mu_eff)
    pts = grid.points()
    F, _ = force_vectors(layout, pts.reshape(-1, 3), moment, external_B,
                         backend_name=backend_name, threads=threads)
    F = F.reshape(pts.shape)
    J = coupling_strength(mode_force(F, config.mode_orientation), config.ion, omega_T, a, config)
    return pts, F, J
