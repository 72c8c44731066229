"""Trap-site layouts: lines, square arrays, rings and two-leg ring ladders.

Every generator places one coil under each site (the coil shares the site's
in-plane position unless ``ion_offset`` moves the ion) and records the
geometric quantities the ratio analysis needs in ``layout.meta``.
"""
from dataclasses import dataclass, field, replace
import json
import math
from typing import Optional

import numpy as np

from .fieldcore import CoilSpec

TWO_PI = 2.0 * math.pi
DEFAULT_OMEGA_T = TWO_PI * 1.0e6
KINDS = ("Line", "Square", "Ring", "LadderRing", "Custom")


@dataclass(frozen=True)
class PinnedField:
    """Local MW field acting like a site-specific transverse field (energy units, J)."""

    axis: tuple
    strength: float

    def __post_init__(self):
        a = np.asarray(self.axis, dtype=float).reshape(3)
        n = np.linalg.norm(a)
        if n == 0.0:
            raise ValueError("pin axis must be nonzero")
        object.__setattr__(self, "axis", tuple(a / n))


@dataclass(frozen=True)
class Site:
    index: int
    position: tuple
    trap_frequency: tuple = (DEFAULT_OMEGA_T,) * 3
    occupied: bool = True
    pinned_field: Optional[PinnedField] = None
    coil: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "position", tuple(float(c) for c in np.reshape(self.position, 3)))
        w = self.trap_frequency
        w = (float(w),) * 3 if np.ndim(w) == 0 else tuple(float(c) for c in np.reshape(w, 3))
        object.__setattr__(self, "trap_frequency", w)
        if self.occupied and min(w) <= 0.0:
            raise ValueError(f"site {self.index}: trap frequencies must be positive")


@dataclass
class LatticeLayout:
    sites: list
    coils: list
    lattice_constant: float
    kind: str = "Custom"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lattice_constant > 0.0:
            raise ValueError("lattice constant must be positive")
        if not self.sites:
            raise ValueError("a layout needs at least one site")
        if self.kind not in KINDS:
            raise ValueError(f"unknown layout kind {self.kind!r}")

    @property
    def occupied(self):
        return [s for s in self.sites if s.occupied]

    def positions(self, occupied_only=True):
        sites = self.occupied if occupied_only else self.sites
        return np.array([s.position for s in sites], dtype=float).reshape(-1, 3)

    def pair_distances(self):
        P = self.positions()
        diff = P[:, None, :] - P[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))

    def coil_for(self, site_index):
        site = self.sites[site_index]
        if site.coil is not None:
            return site.coil
        if not self.coils:
            raise ValueError("layout has no coils")
        c = np.array([cl.center for cl in self.coils])
        d = np.hypot(c[:, 0] - site.position[0], c[:, 1] - site.position[1])
        return int(np.argmin(d))

    # -- serialisation -------------------------------------------------
    def to_dict(self):
        return {
            "kind": self.kind,
            "lattice_constant": self.lattice_constant,
            "meta": self.meta,
            "sites": [
                {
                    "index": s.index,
                    "position": list(s.position),
                    "trap_frequency": list(s.trap_frequency),
                    "occupied": s.occupied,
                    "pinned_field": None if s.pinned_field is None else {
                        "axis": list(s.pinned_field.axis), "strength": s.pinned_field.strength},
                    "coil": s.coil,
                }
                for s in self.sites
            ],
            "coils": [
                {"center": list(c.center), "radius": c.radius, "current": c.current,
                 "phase": c.phase, "turns": c.turns, "normal": list(c.normal)}
                for c in self.coils
            ],
        }

    @classmethod
    def from_dict(cls, d):
        sites = []
        for s in d["sites"]:
            pin = s.get("pinned_field")
            sites.append(Site(
                index=int(s["index"]),
                position=tuple(s["position"]),
                trap_frequency=tuple(s.get("trap_frequency", (DEFAULT_OMEGA_T,) * 3)),
                occupied=bool(s.get("occupied", True)),
                pinned_field=None if pin is None else PinnedField(tuple(pin["axis"]), float(pin["strength"])),
                coil=s.get("coil"),
            ))
        coils = [CoilSpec(tuple(c["center"]), float(c["radius"]), float(c["current"]),
                          float(c.get("phase", 0.0)), int(c.get("turns", 1)),
                          tuple(c.get("normal", (0.0, 0.0, 1.0))))
                 for c in d.get("coils", [])]
        return cls(sites=sites, coils=coils, lattice_constant=float(d["lattice_constant"]),
                   kind=d.get("kind", "Custom"), meta=dict(d.get("meta", {})))

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def _build(xy, a, height, kind, meta, coil_radius, current, omega_T, ion_offset=(0.0, 0.0)):
    sites, coils = [], []
    for k, (x, y) in enumerate(xy):
        if coil_radius is not None:
            coils.append(CoilSpec((x, y, 0.0), coil_radius, current))
        pos = (x + ion_offset[0], y + ion_offset[1], height)
        sites.append(Site(k, pos, omega_T, coil=k if coil_radius is not None else None))
    return LatticeLayout(sites=sites, coils=coils, lattice_constant=a, kind=kind, meta=meta)


def make_line(n, a, height=0.0, *, coil_radius=2.5e-6, current=10e-3, omega_T=DEFAULT_OMEGA_T):
    if n < 1:
        raise ValueError("a line needs at least one site")
    xy = [(k * a, 0.0) for k in range(n)]
    return _build(xy, a, height, "Line", {"n": n}, coil_radius, current, omega_T)


def make_square(nx, ny=None, a=10e-6, height=0.0, *, coil_radius=2.5e-6, current=10e-3,
                omega_T=DEFAULT_OMEGA_T, ion_offset=(0.0, 0.0)):
    """nx-by-ny array with a coil at the origin; coil columns run from -(nx//2)."""
    ny = nx if ny is None else ny
    if nx < 1 or ny < 1:
        raise ValueError("square array dimensions must be positive")
    xy = [((i - nx // 2) * a, (j - ny // 2) * a) for i in range(nx) for j in range(ny)]
    return _build(xy, a, height, "Square", {"nx": nx, "ny": ny}, coil_radius, current, omega_T,
                  ion_offset)


def ring_nnn_chord(n, a):
    """Next-nearest-neighbour chord s = a [2 + 2 cos(2 pi / n)]^(1/2)."""
    return a * math.sqrt(2.0 + 2.0 * math.cos(TWO_PI / n))


def make_ring(n, a, height=0.0, *, coil_radius=2.5e-6, current=10e-3, omega_T=DEFAULT_OMEGA_T):
    """Regular n-gon with nearest-neighbour chord exactly ``a``."""
    if int(n) != n or n < 3:
        raise ValueError(f"a ring needs n >= 3 sites, got {n}")
    n = int(n)
    r = a / (2.0 * math.sin(math.pi / n))
    xy = [(r * math.cos(TWO_PI * k / n), r * math.sin(TWO_PI * k / n)) for k in range(n)]
    meta = {"n": n, "radius": r, "nnn_chord": ring_nnn_chord(n, a)}
    return _build(xy, a, height, "Ring", meta, coil_radius, current, omega_T)


def ladder_outer_leg(n_rungs, a1, delta_r):
    """Outer-leg spacing a2 = a1 + 4 pi delta_r / n."""
    return a1 + 2.0 * TWO_PI * delta_r / n_rungs


def make_ladder_ring(n_rungs, a1, delta_r, height=0.0, *, leg_rule="formula", coil_radius=2.5e-6,
                     current=10e-3, omega_T=DEFAULT_OMEGA_T):
    """Two concentric regular n-gons sharing angular positions (radial rungs).

    ``leg_rule="formula"`` sizes the outer polygon so its chord equals
    :func:`ladder_outer_leg`; the radial rung is then ``r2 - r1`` rather than
    ``delta_r`` (recorded as ``meta["rung_length"]``). ``leg_rule="polygon"``
    uses ``r2 = r1 + delta_r`` exactly, giving a2 = a1 + 2 delta_r sin(pi/n).
    Sites 0..n-1 are the inner leg, n..2n-1 the outer leg.
    """
    if int(n_rungs) != n_rungs or n_rungs < 3:
        raise ValueError(f"a ladder ring needs n_rungs >= 3, got {n_rungs}")
    if not delta_r > 0.0 or not a1 > 0.0:
        raise ValueError("a1 and delta_r must be positive")
    n = int(n_rungs)
    sin_half = math.sin(math.pi / n)
    r1 = a1 / (2.0 * sin_half)
    if leg_rule == "formula":
        a2 = ladder_outer_leg(n, a1, delta_r)
        r2 = a2 / (2.0 * sin_half)
    elif leg_rule == "polygon":
        r2 = r1 + delta_r
        a2 = 2.0 * r2 * sin_half
    else:
        raise ValueError(f"unknown leg_rule {leg_rule!r}")
    angles = [TWO_PI * k / n for k in range(n)]
    xy = [(r1 * math.cos(t), r1 * math.sin(t)) for t in angles]
    xy += [(r2 * math.cos(t), r2 * math.sin(t)) for t in angles]
    meta = {"n_rungs": n, "a1": a1, "a2": a2, "delta_r": delta_r, "r1": r1, "r2": r2,
            "rung_length": r2 - r1, "leg_rule": leg_rule}
    return _build(xy, a1, height, "LadderRing", meta, coil_radius, current, omega_T)


# -- ratio analysis ------------------------------------------------------

def ring_excess(n):
    """Fractional excess of the ring NNN/NN cubic-law ratio over the straight-line 1/8."""
    return 8.0 * (1.0 / (2.0 + 2.0 * math.cos(TWO_PI / n))) ** 1.5 - 1.0


def ladder_leg_ratio(n_rungs, a1_over_delta_r=2.0):
    """J(a2)/J(a1) = (a1/a2)^3 under the cubic law."""
    return (1.0 + 2.0 * TWO_PI / (a1_over_delta_r * n_rungs)) ** -3


def ladder_asymmetry(n_rungs, a1_over_delta_r=2.0):
    """1 - J(a2)/J(a1)."""
    return 1.0 - ladder_leg_ratio(n_rungs, a1_over_delta_r)


def smallest_ring(tolerance, n_max=100000):
    """Smallest ring size whose NNN excess is below ``tolerance``."""
    for n in range(3, n_max + 1):
        if ring_excess(n) < tolerance:
            return n
    raise ValueError("tolerance not reached")


def smallest_ladder(tolerance, a1_over_delta_r=2.0, n_max=10**7):
    """Smallest rung count whose leg asymmetry is below ``tolerance``.

    Asymmetry is monotone in n, so the crossing is bracketed from the closed
    form and then confirmed by direct evaluation.
    """
    x = (1.0 - tolerance) ** (-1.0 / 3.0) - 1.0
    guess = max(3, int(2.0 * TWO_PI / (a1_over_delta_r * x)) - 2)
    n = guess
    while ladder_asymmetry(n, a1_over_delta_r) >= tolerance:
        n += 1
        if n > n_max:
            raise ValueError("tolerance not reached")
    while n > 3 and ladder_asymmetry(n - 1, a1_over_delta_r) < tolerance:
        n -= 1
    return n


def _distance_histogram(D, rel=1e-9):
    iu = np.triu_indices(D.shape[0], 1)
    d = np.sort(D[iu])
    groups = []
    for v in d:
        if groups and abs(v - groups[-1][0]) <= rel * groups[-1][0]:
            groups[-1][1] += 1
        else:
            groups.append([float(v), 1])
    return [(v, c) for v, c in groups]


def ratio_analysis(layout: LatticeLayout):
    """Pairwise-distance ratios and the implied cubic-law coupling ratios."""
    occ = layout.occupied
    if len(occ) < 3:
        raise ValueError("ratio analysis needs at least 3 occupied sites")
    a = layout.lattice_constant
    report = {"kind": layout.kind, "n_sites": len(occ), "lattice_constant": a}
    P = layout.positions()
    if layout.kind == "Ring":
        n = len(P)
        nn = float(np.linalg.norm(P[1] - P[0]))
        nnn = float(np.linalg.norm(P[2] - P[0]))
        ratio = (nn / nnn) ** 3
        report.update(nn=nn, nnn=nnn, nnn_formula=ring_nnn_chord(n, a), cubic_ratio=ratio,
                      straight_line_ratio=0.125, excess=ratio / 0.125 - 1.0)
    elif layout.kind == "LadderRing":
        n = len(P) // 2
        a1 = float(np.linalg.norm(P[1] - P[0]))
        a2 = float(np.linalg.norm(P[n + 1] - P[n]))
        rung = float(np.linalg.norm(P[n] - P[0]))
        leg_ratio = (a1 / a2) ** 3
        report.update(n_rungs=n, a1=a1, a2=a2, rung=rung, leg_ratio=leg_ratio,
                      asymmetry=1.0 - leg_ratio)
    else:
        hist = _distance_histogram(layout.pair_distances())
        report["distances"] = hist
        nn = hist[0][0]
        report["cubic_ratios"] = [(nn / v) ** 3 for v, _ in hist]
        if layout.kind == "Line":
            report["nnn_ratio"] = (nn / hist[1][0]) ** 3
    return report


def apply_defects(layout: LatticeLayout, removals=(), pins=(), disable_coils=False) -> LatticeLayout:
    """Return a copy with ``removals`` unoccupied and ``pins`` = (index, axis, strength) set.

    Unoccupied sites drop out of coupling matrices and spin simulations. With
    ``disable_coils`` the coil under a removed site is switched off; by default
    it stays driven.
    """
    n = len(layout.sites)
    sites = list(layout.sites)
    for i in removals:
        if not 0 <= i < n:
            raise IndexError(f"site index {i} out of range 0..{n - 1}")
        sites[i] = replace(sites[i], occupied=False)
    for i, axis, strength in pins:
        if not 0 <= i < n:
            raise IndexError(f"site index {i} out of range 0..{n - 1}")
        sites[i] = replace(sites[i], pinned_field=PinnedField(tuple(axis), float(strength)))
    coils = list(layout.coils)
    if disable_coils:
        for i in removals:
            if sites[i].coil is not None:
                coils[sites[i].coil] = coils[sites[i].coil].with_current(0.0)
    return LatticeLayout(sites=sites, coils=coils, lattice_constant=layout.lattice_constant,
                         kind=layout.kind, meta=dict(layout.meta))
