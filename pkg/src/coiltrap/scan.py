"""Scan grids: 1-3 linear axes, optionally embedded in space along given directions."""
from dataclasses import dataclass, field
from typing import Optional

import numpy as np


@dataclass(frozen=True)
class Axis:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if int(self.count) != self.count or self.count < 2:
            raise ValueError(f"axis count must be an integer >= 2, got {self.count}")
        if not self.start < self.stop:
            raise ValueError(f"axis start must be below stop ({self.start} >= {self.stop})")

    def values(self):
        return np.linspace(self.start, self.stop, int(self.count))


@dataclass(frozen=True)
class ScanGrid:
    """Regular grid ``origin + sum_k s_k * directions[k]``.

    ``directions`` are unit vectors; pass None for a dimensionless scan
    (e.g. over gamma), where only :meth:`mesh` is meaningful.
    """

    axes: tuple
    directions: Optional[tuple] = None
    origin: tuple = (0.0, 0.0, 0.0)
    names: tuple = field(default=())

    def __post_init__(self):
        axes = tuple(a if isinstance(a, Axis) else Axis(*a) for a in self.axes)
        if not 1 <= len(axes) <= 3:
            raise ValueError("a scan grid has 1 to 3 axes")
        object.__setattr__(self, "axes", axes)
        if self.directions is not None:
            dirs = np.asarray(self.directions, dtype=float).reshape(len(axes), 3)
            norms = np.linalg.norm(dirs, axis=1)
            if np.any(norms == 0.0):
                raise ValueError("scan directions must be nonzero")
            object.__setattr__(self, "directions", tuple(map(tuple, dirs / norms[:, None])))
        object.__setattr__(self, "origin", tuple(np.asarray(self.origin, dtype=float).reshape(3)))

    @property
    def shape(self):
        return tuple(int(a.count) for a in self.axes)

    def mesh(self):
        return np.meshgrid(*[a.values() for a in self.axes], indexing="ij")

    def points(self):
        """Array of shape ``self.shape + (3,)``."""
        if self.directions is None:
            raise ValueError("dimensionless scan grid has no spatial points")
        pts = np.broadcast_to(np.asarray(self.origin), self.shape + (3,)).copy()
        for s, d in zip(self.mesh(), self.directions):
            pts += s[..., None] * np.asarray(d)
        return pts

    @classmethod
    def diagonal_plane(cls, diag, height, origin=(0.0, 0.0, 0.0)):
        """Plane spanned by the in-surface (1, 1, 0)/sqrt(2) diagonal and the surface normal."""
        return cls(axes=(diag, height), directions=((1.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
                   origin=origin, names=("diagonal", "height"))

    @classmethod
    def vertical_line(cls, height, origin=(0.0, 0.0, 0.0)):
        return cls(axes=(height,), directions=((0.0, 0.0, 1.0),), origin=origin, names=("height",))
