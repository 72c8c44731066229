"""Coil geometry and field evaluation for single loops and loop arrays."""
from dataclasses import dataclass, field
import math
from typing import NamedTuple

import numpy as np

from ..constants import MU0
from . import backend
from ._pykernel import local_loop_field, FILAMENT_EPS

H_MIN = 1e-9
H_REL = 1e-6


class SingularityError(ValueError):
    """Evaluation point on (or a finite-difference stencil touching) a coil filament."""

    def __init__(self, coil_index, point):
        self.coil_index = int(coil_index)
        self.point = tuple(float(c) for c in np.asarray(point).ravel()[:3])
        super().__init__(f"point {self.point} lies on the filament of coil {self.coil_index}")


def _vec3(v, name):
    arr = np.asarray(v, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise ValueError(f"{name} must be a 3-vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} must have finite components")
    return arr


@dataclass(frozen=True)
class CoilSpec:
    """A filamentary circular current loop.

    ``current`` is the signed peak amplitude in amperes and ``phase`` its RF
    phase offset in radians. ``normal`` sets the loop axis (default +z, i.e.
    a loop lying in the trap surface).
    """

    center: tuple
    radius: float
    current: float
    phase: float = 0.0
    turns: int = 1
    normal: tuple = (0.0, 0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(_vec3(self.center, "center")))
        n = _vec3(self.normal, "normal")
        norm = np.linalg.norm(n)
        if norm == 0.0:
            raise ValueError("coil normal must be nonzero")
        if abs(norm - 1.0) > 4 * np.finfo(float).eps:
            # rescaling an already-unit vector can move its last bit
            n = n / norm
        object.__setattr__(self, "normal", tuple(float(c) for c in n))
        if not (self.radius > 0.0 and math.isfinite(self.radius)):
            raise ValueError(f"coil radius must be positive, got {self.radius}")
        if int(self.turns) != self.turns or self.turns < 1:
            raise ValueError(f"turns must be a positive integer, got {self.turns}")
        if not math.isfinite(self.current) or not math.isfinite(self.phase):
            raise ValueError("current and phase must be finite")

    def instantaneous_current(self, rf_phase=0.0):
        return self.current * self.turns * math.cos(self.phase + rf_phase)

    def frame(self):
        """Rows (u, v, n): a right-handed orthonormal frame with n along the axis."""
        n = np.array(self.normal)
        if n[0] == 0.0 and n[1] == 0.0:
            s = 1.0 if n[2] > 0 else -1.0
            return np.array([[1.0, 0.0, 0.0], [0.0, s, 0.0], [0.0, 0.0, s]])
        helper = np.array([0.0, 0.0, 1.0]) if abs(n[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
        u = np.cross(helper, n)
        u /= np.linalg.norm(u)
        v = np.cross(n, u)
        return np.array([u, v, n])

    def with_current(self, current):
        return CoilSpec(self.center, self.radius, current, self.phase, self.turns, self.normal)

    def shifted(self, offset):
        return CoilSpec(tuple(np.add(self.center, offset)), self.radius, self.current,
                        self.phase, self.turns, self.normal)


@dataclass
class FieldSample:
    """B (tesla) and its Jacobian ``jacobian[i, j] = dB_i/dx_j`` (tesla/metre) at ``point``."""

    point: np.ndarray
    B: np.ndarray
    jacobian: np.ndarray = field(default_factory=lambda: np.full((3, 3), np.nan))

    @property
    def magnitude(self):
        return float(np.linalg.norm(self.B))

    def divergence(self):
        return float(np.trace(self.jacobian))

    def curl_residual(self):
        """Largest entry of the antisymmetric part of the Jacobian."""
        return float(np.max(np.abs(self.jacobian - self.jacobian.T)) / 2.0)


class PackedCoils(NamedTuple):
    centers: np.ndarray
    frames: np.ndarray
    radius: np.ndarray
    current: np.ndarray
    index: np.ndarray  # position of each packed coil in the original layout


def _coil_list(layout):
    coils = getattr(layout, "coils", layout)
    if isinstance(coils, CoilSpec):
        return [coils]
    return list(coils)


def pack_coils(layout, rf_phase=0.0) -> PackedCoils:
    """Flatten coils to kernel arrays, dropping coils whose instantaneous current is zero."""
    coils = _coil_list(layout)
    rows = [(k, c, c.instantaneous_current(rf_phase)) for k, c in enumerate(coils)]
    rows = [r for r in rows if r[2] != 0.0]
    if not rows:
        return PackedCoils(np.zeros((0, 3)), np.zeros((0, 3, 3)), np.zeros(0), np.zeros(0),
                           np.zeros(0, dtype=np.int64))
    return PackedCoils(
        centers=np.array([c.center for _, c, _ in rows], dtype=float),
        frames=np.array([c.frame() for _, c, _ in rows], dtype=float),
        radius=np.array([c.radius for _, c, _ in rows], dtype=float),
        current=np.array([i for _, _, i in rows], dtype=float),
        index=np.array([k for k, _, _ in rows], dtype=np.int64),
    )


def _raise_bad(bad, packed, points):
    hits = np.nonzero(bad >= 0)[0]
    if hits.size:
        m = hits[0]
        raise SingularityError(packed.index[bad[m]], points[m])


def loop_field(coil: CoilSpec, point) -> FieldSample:
    """Field of one loop at its peak current, with its Jacobian."""
    return array_field([coil], point, rf_phase=-coil.phase)


def array_field(layout, point, rf_phase=0.0, external_B=None, backend_name=None) -> FieldSample:
    """Superposed field of all coils at one point, at RF phase ``rf_phase``.

    Each coil carries ``I * turns * cos(phase + rf_phase)``. ``external_B`` is
    a uniform offset; it changes B but not the Jacobian.
    """
    p = _vec3(point, "point")
    B, J = field_grid(layout, p[None, :], rf_phase=rf_phase, backend_name=backend_name)
    B = B[0]
    if external_B is not None:
        B = B + _vec3(external_B, "external_B")
    return FieldSample(point=p, B=B, jacobian=J[0])


def field_jacobian(layout, point, rf_phase=0.0, backend_name=None):
    """3x3 Jacobian dB_i/dx_j by Richardson-extrapolated central differences."""
    return array_field(layout, point, rf_phase, backend_name=backend_name).jacobian


def field_only(layout, points, rf_phase=0.0, backend_name=None, threads=1):
    """B at an (M, 3) array of points, without the Jacobian."""
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    packed = pack_coils(layout, rf_phase)
    kernel = backend.get(backend_name)
    B, _, bad = backend.call_bfield(kernel, pts, packed, threads)
    _raise_bad(bad, packed, pts)
    return B


def field_grid(layout, points, rf_phase=0.0, backend_name=None, threads=1):
    """B (M, 3) and Jacobian (M, 3, 3) at an (M, 3) array of points."""
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 3)
    packed = pack_coils(layout, rf_phase)
    kernel = backend.get(backend_name)
    B, J, bad = backend.call_bfield_jacobian(kernel, pts, packed, H_MIN, H_REL, threads)
    _raise_bad(bad, packed, pts)
    return B, J


def filament_distance(layout, point):
    """Distance from ``point`` to the nearest coil filament (all coils, driven or not)."""
    p = _vec3(point, "point")
    best = math.inf
    for c in _coil_list(layout):
        loc = c.frame() @ (p - np.array(c.center))
        best = min(best, math.hypot(math.hypot(loc[0], loc[1]) - c.radius, loc[2]))
    return best


def on_axis_field(current, radius, z):
    """B_z on the axis of a loop: mu0 I R^2 / (2 (R^2 + z^2)^(3/2))."""
    return MU0 * current * radius**2 / (2.0 * (radius**2 + z**2) ** 1.5)


def on_axis_gradient(current, radius, z):
    """dB_z/dz on the axis: -3 mu0 I R^2 z / (2 (R^2 + z^2)^(5/2))."""
    return -3.0 * MU0 * current * radius**2 * z / (2.0 * (radius**2 + z**2) ** 2.5)


__all__ = [
    "CoilSpec", "FieldSample", "SingularityError", "PackedCoils", "pack_coils",
    "loop_field", "array_field", "field_jacobian", "field_grid", "field_only",
    "filament_distance", "on_axis_field", "on_axis_gradient", "local_loop_field",
    "FILAMENT_EPS",
]
