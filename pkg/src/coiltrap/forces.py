"""State-dependent dipole forces on an ion's magnetic moment in the coil-array field.

Two moment-orientation models are supported. ``AdiabaticFollow`` keeps the
moment along the instantaneous total field, so the force is
``F_i = mu * sum_j Bhat_j dB_j/dx_i`` and it oscillates at twice the RF
frequency. ``Pinned`` fixes the moment along a dc quantising field,
``F_i = mu * sum_j d_j dB_j/dx_i``, which follows the RF drive at f_RF.
"""
from dataclasses import dataclass
import math
from typing import Optional

import numpy as np

from .constants import H_PLANCK, MU_B
from .fieldcore import FieldSample, field_grid

ADIABATIC_THRESHOLD = 10.0


class OrientationError(ValueError):
    """Adiabatic-following moment with a vanishing total field."""


@dataclass(frozen=True)
class MomentModel:
    """Effective moment magnitude (J/T) and orientation rule.

    ``direction`` is None for adiabatic following, a unit 3-vector when pinned.
    The default magnitude mu_B/2 corresponds to g_F m_F = 1/2.
    """

    mu_eff: float = MU_B / 2.0
    direction: Optional[tuple] = None

    def __post_init__(self):
        if not (self.mu_eff >= 0.0 and math.isfinite(self.mu_eff)):
            raise ValueError(f"mu_eff must be non-negative, got {self.mu_eff}")
        if self.direction is not None:
            d = np.asarray(self.direction, dtype=float).reshape(3)
            n = np.linalg.norm(d)
            if n == 0.0:
                raise ValueError("pinned direction must be nonzero")
            object.__setattr__(self, "direction", tuple(d / n))

    @classmethod
    def adiabatic(cls, mu_eff=MU_B / 2.0):
        return cls(mu_eff=mu_eff)

    @classmethod
    def pinned(cls, direction, mu_eff=MU_B / 2.0):
        return cls(mu_eff=mu_eff, direction=tuple(direction))

    @classmethod
    def from_state(cls, m_F=1, g_F=0.5):
        """Moment g_F m_F mu_B of a hyperfine sublevel (first-order Zeeman)."""
        return cls(mu_eff=abs(g_F * m_F) * MU_B)

    @property
    def mode(self):
        return "AdiabaticFollow" if self.direction is None else "Pinned"


@dataclass
class ForceResult:
    F: np.ndarray
    response_frequency_multiplier: int

    @property
    def lateral(self):
        return float(math.hypot(self.F[0], self.F[1]))

    @property
    def vertical(self):
        return float(abs(self.F[2]))


def _force_vectors(B, J, moment, external_B):
    """Vectorised force for arrays B (M, 3), J (M, 3, 3)."""
    if moment.direction is None:
        Bt = B + np.asarray(external_B, dtype=float)
        norm = np.linalg.norm(Bt, axis=-1)
        # with no gradient either, the force is zero for every orientation
        undefined = (norm == 0.0) & np.any(J != 0.0, axis=(-2, -1))
        if moment.mu_eff != 0.0 and np.any(undefined):
            raise OrientationError("total field vanishes; adiabatic moment orientation undefined")
        bhat = Bt / np.where(norm == 0.0, 1.0, norm)[..., None]
        return moment.mu_eff * np.einsum("...j,...ji->...i", bhat, J), 2
    d = np.asarray(moment.direction)
    return moment.mu_eff * np.einsum("j,...ji->...i", d, J), 1


def dipole_force(sample: FieldSample, moment: MomentModel, external_B=(0.0, 0.0, 0.0)) -> ForceResult:
    """Force on the moment at ``sample.point``.

    ``external_B`` is a uniform field: it sets the orientation in adiabatic
    mode but adds no gradient, so pinned forces are independent of it.
    """
    F, mult = _force_vectors(sample.B[None, :], sample.jacobian[None, :, :], moment, external_B)
    return ForceResult(F=F[0], response_frequency_multiplier=mult)


def force_vectors(layout, points, moment, external_B=(0.0, 0.0, 0.0), rf_phase=0.0,
                  backend_name=None, threads=1):
    """Force (M, 3) at an (M, 3) array of points, plus the response multiplier."""
    B, J = field_grid(layout, points, rf_phase=rf_phase, backend_name=backend_name, threads=threads)
    return _force_vectors(B, J, moment, external_B)


@dataclass
class ForceMap:
    points: np.ndarray  # (..., 3)
    F: np.ndarray  # (..., 3)
    response_frequency_multiplier: int

    def columns(self):
        """Rows of (x, y, z, Fx, Fy, Fz, log10|Fx|, log10|Fz|)."""
        P = self.points.reshape(-1, 3)
        F = self.F.reshape(-1, 3)
        with np.errstate(divide="ignore"):
            lx = np.log10(np.abs(F[:, 0]))
            lz = np.log10(np.abs(F[:, 2]))
        return np.column_stack([P, F, lx, lz])

    COLUMN_NAMES = ("x", "y", "z", "Fx", "Fy", "Fz", "log10|Fx|", "log10|Fz|")


def force_map(layout, moment, external_B, grid, rf_phase=0.0, backend_name=None, threads=1) -> ForceMap:
    """Per-point dipole force over a :class:`coiltrap.scan.ScanGrid`."""
    pts = grid.points()
    F, mult = force_vectors(layout, pts.reshape(-1, 3), moment, external_B, rf_phase,
                            backend_name, threads)
    return ForceMap(points=pts, F=F.reshape(pts.shape), response_frequency_multiplier=mult)


def larmor_frequency(B_magnitude, moment: MomentModel):
    """mu_eff |B| / h in hertz."""
    return moment.mu_eff * B_magnitude / H_PLANCK


def adiabaticity_check(B_magnitude, moment: MomentModel, f_rf):
    """Ratio of Larmor frequency to RF drive frequency.

    Values well above :data:`ADIABATIC_THRESHOLD` mean the moment follows the
    field; ``f_rf = 0`` returns ``inf``.
    """
    if not B_magnitude > 0.0:
        raise ValueError("field magnitude must be positive")
    f_l = larmor_frequency(B_magnitude, moment)
    if f_rf == 0.0:
        return math.inf
    return f_l / abs(f_rf)


def is_adiabatic(B_magnitude, moment, f_rf, threshold=ADIABATIC_THRESHOLD):
    return adiabaticity_check(B_magnitude, moment, f_rf) >= threshold
