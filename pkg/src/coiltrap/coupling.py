"""Effective spin-spin couplings in the strong-binding regime and design diagnostics.

Couplings are reported as frequencies, J/h in hertz. Lateral-mode couplings
are ferromagnetic (J < 0), vertical-mode couplings antiferromagnetic (J > 0).
"""
from dataclasses import dataclass, field
from fractions import Fraction
import csv
import io
import json
import math

import numpy as np

from .constants import AMU, CODATA, E_CHARGE, H_PLANCK, MU_B
from .fieldcore import field_only

TWO_PI = 2.0 * math.pi
BETA_MARGINAL = 0.1
BETA_WARN = 0.5
LATERAL, VERTICAL = "Lateral", "Vertical"


@dataclass(frozen=True)
class IonSpecies:
    name: str
    mass: float  # kg
    nuclear_spin: float = 0.5
    hyperfine_splitting: float = 0.0  # rad/s
    mu_eff: float = MU_B / 2.0

    def __post_init__(self):
        if not self.mass > 0.0:
            raise ValueError(f"{self.name}: mass must be positive")
        if self.hyperfine_splitting < 0.0:
            raise ValueError(f"{self.name}: hyperfine splitting must be non-negative")
        if (2 * self.nuclear_spin) != int(2 * self.nuclear_spin):
            raise ValueError(f"{self.name}: nuclear spin must be a half-integer")

    @classmethod
    def from_amu(cls, name, mass_amu, nuclear_spin=0.5, hyperfine_ghz=0.0, mu_eff=MU_B / 2.0):
        return cls(name, mass_amu * AMU, nuclear_spin, TWO_PI * hyperfine_ghz * 1e9, mu_eff)


BE9 = IonSpecies.from_amu("9Be+", 9, 1.5, 1.25)
MG25 = IonSpecies.from_amu("25Mg+", 25, 2.5, 1.79)
CA43 = IonSpecies.from_amu("43Ca+", 43, 3.5, 3.23)
SPECIES = {"Be9": BE9, "Mg25": MG25, "Ca43": CA43}


@dataclass(frozen=True)
class CouplingConfig:
    """Prefactor magnitude ``alpha`` with sign fixed by the driven mode."""

    alpha: float = 2.0
    mode_orientation: str = LATERAL
    ion: IonSpecies = BE9

    def __post_init__(self):
        if not 0.0 < abs(self.alpha) < 10.0:
            raise ValueError(f"|alpha| must lie in (0, 10), got {self.alpha}")
        if self.mode_orientation not in (LATERAL, VERTICAL):
            raise ValueError(f"mode_orientation must be {LATERAL!r} or {VERTICAL!r}")

    @property
    def signed_alpha(self):
        return -abs(self.alpha) if self.mode_orientation == LATERAL else abs(self.alpha)


def mode_force(F, orientation):
    """Force magnitude driving the chosen mode: |(F_x, F_y)| for lateral, |F_z| for vertical."""
    F = np.asarray(F, dtype=float)
    if orientation == LATERAL:
        return np.hypot(F[..., 0], F[..., 1])
    if orientation == VERTICAL:
        return np.abs(F[..., 2])
    raise ValueError(f"unknown orientation {orientation!r}")


def _check_positive(**kw):
    for k, v in kw.items():
        if not (np.all(np.asarray(v) > 0.0) and np.all(np.isfinite(v))):
            raise ValueError(f"{k} must be positive and finite, got {v}")


def coupling_strength(F, ion: IonSpecies, omega_T, a, config: CouplingConfig):
    """Signed J/h (Hz) = alpha e^2 F^2 / (4 pi eps0 m^2 omega_T^4 a^3 h).

    ``F`` is the force on the moment-carrying state (N), ``omega_T`` the trap
    frequency in rad/s and ``a`` the ion separation.
    """
    _check_positive(omega_T=omega_T, a=a, mass=ion.mass)
    if not np.all(np.isfinite(F)):
        raise ValueError("force must be finite")
    energy = (config.signed_alpha * CODATA.coulomb_k * np.square(F) * E_CHARGE**2
              / (ion.mass**2 * np.power(omega_T, 4) * np.power(a, 3)))
    return energy / H_PLANCK


def binding_parameter(ion: IonSpecies, omega_T, a):
    """beta = e^2 / (4 pi eps0 m omega_T^2 a^3); strong binding needs beta << 1."""
    _check_positive(omega_T=omega_T, a=a, mass=ion.mass)
    return CODATA.coulomb_k * E_CHARGE**2 / (ion.mass * np.square(omega_T) * np.power(a, 3))


def binding_status(beta):
    if beta > BETA_WARN:
        return "weak"
    if beta > BETA_MARGINAL:
        return "marginal"
    return "strong"


@dataclass
class CouplingMatrix:
    J: np.ndarray  # (N, N) in Hz
    sites: list  # layout site index of each row
    positions: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        self.J = np.asarray(self.J, dtype=float)

    @property
    def n(self):
        return self.J.shape[0]

    def distances(self):
        P = self.positions
        return np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))

    def to_dict(self):
        return {"units": "Hz", "sites": list(map(int, self.sites)), "J": self.J.tolist(),
                "positions": None if self.positions is None else self.positions.tolist()}

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)

    @classmethod
    def from_dict(cls, d):
        pos = d.get("positions")
        return cls(J=np.array(d["J"], dtype=float), sites=list(d["sites"]),
                   positions=None if pos is None else np.array(pos, dtype=float))

    def to_csv(self):
        """Adjacency table with one row per pair i < j: (i, j, distance, J_Hz)."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["site_i", "site_j", "distance_m", "J_Hz"])
        D = self.distances() if self.positions is not None else None
        for a in range(self.n):
            for b in range(a + 1, self.n):
                w.writerow([self.sites[a], self.sites[b],
                            "" if D is None else repr(float(D[a, b])), repr(float(self.J[a, b]))])
        return buf.getvalue()


def coupling_matrix(layout, per_site_forces, config: CouplingConfig) -> CouplingMatrix:
    """Pairwise J_ij over occupied sites with separation b_ij in place of a.

    Unequal site forces and trap frequencies enter through F_i F_j and
    omega_i^2 omega_j^2 (the geometric mean of the per-site values). The trap
    frequency used is the x axis for lateral modes and z for vertical.
    """
    occ = [s for s in layout.sites if s.occupied]
    if len(occ) < 2:
        raise ValueError("coupling matrix needs at least two occupied sites")
    F = np.asarray(per_site_forces, dtype=float)
    if F.ndim == 0:
        F = np.full(len(occ), float(F))
    elif F.shape[0] == len(layout.sites):
        F = F[[s.index for s in occ]]
    elif F.shape[0] != len(occ):
        raise ValueError("per_site_forces must be a scalar or one value per (occupied) site")
    F = np.abs(F)
    axis = 0 if config.mode_orientation == LATERAL else 2
    w = np.array([s.trap_frequency[axis] for s in occ])
    P = np.array([s.position for s in occ])
    D = np.sqrt(((P[:, None, :] - P[None, :, :]) ** 2).sum(-1))
    off = ~np.eye(len(occ), dtype=bool)
    if np.any(D[off] == 0.0):
        raise ValueError("coincident sites in layout")
    _check_positive(omega_T=w)
    pref = config.signed_alpha * CODATA.coulomb_k * E_CHARGE**2 / (config.ion.mass**2 * H_PLANCK)
    num = np.outer(F, F)
    den = np.outer(w * w, w * w) * np.where(off, D, 1.0) ** 3
    J = np.where(off, pref * num / den, 0.0)
    J = 0.5 * (J + J.T)
    return CouplingMatrix(J=J, sites=[s.index for s in occ], positions=P)


# -- scaling laws --------------------------------------------------------

CONSTANT_CURRENT = "ConstantCurrent"
CONSTANT_DENSITY = "ConstantCurrentDensity"


@dataclass(frozen=True)
class DesignPoint:
    J: float  # Hz
    omega_T: float
    a: float
    R: float
    d: float
    rho: float
    current: float
    beta: float = float("nan")


def scaling_report(base: DesignPoint, r, current_law=CONSTANT_CURRENT, a_law="strong_binding"):
    """Scale R, d and the trap size rho by ``r`` and report the new design.

    Trap frequency goes as rho^(-1/2); the near-field force as I/r^2. With
    ``a_law="strong_binding"`` the spacing follows rho^(1/3), which keeps beta
    fixed; ``"proportional"`` scales it with r. Exponents are kept as exact
    fractions so the reported ratios are r**exponent.
    """
    if not r > 0.0:
        raise ValueError("scale factor must be positive")
    if current_law == CONSTANT_CURRENT:
        i_exp = Fraction(0)
    elif current_law == CONSTANT_DENSITY:
        i_exp = Fraction(2)
    else:
        raise ValueError(f"unknown current law {current_law!r}")
    a_exp = {"strong_binding": Fraction(1, 3), "proportional": Fraction(1)}.get(a_law)
    if a_exp is None:
        raise ValueError(f"unknown a_law {a_law!r}")
    f_exp = i_exp - 2
    w_exp = Fraction(-1, 2)
    j_exp = 2 * f_exp - 4 * w_exp - 3 * a_exp
    beta_exp = -2 * w_exp - 3 * a_exp

    def s(e):
        return r ** float(e)

    a_new, R_new = base.a * s(a_exp), base.R * r
    beta_new = base.beta * s(beta_exp)
    return {
        "scale": r,
        "current_law": current_law,
        "a_law": a_law,
        "exponents": {"J": str(j_exp), "omega_T": str(w_exp), "a": str(a_exp),
                      "force": str(f_exp), "current": str(i_exp), "beta": str(beta_exp)},
        "J_ratio": s(j_exp),
        "J": base.J * s(j_exp),
        "omega_T": base.omega_T * s(w_exp),
        "a": a_new,
        "R": R_new,
        "d": base.d * r,
        "rho": base.rho * r,
        "current": base.current * s(i_exp),
        "beta": beta_new,
        "beta_status": None if math.isnan(beta_new) else binding_status(beta_new),
        "strong_binding_preserved": beta_exp == 0,
        "coil_overlap": bool(a_new < 2.0 * R_new),
    }


# -- power and crosstalk ---------------------------------------------------

def power_budget(layout, impedance, duty_cycle=1.0):
    """RF dissipation (I/sqrt 2)^2 Z per driven loop, summed and scaled by duty cycle."""
    if not impedance > 0.0:
        raise ValueError("impedance must be positive")
    if not 0.0 < duty_cycle <= 1.0:
        raise ValueError("duty cycle must lie in (0, 1]")
    coils = getattr(layout, "coils", layout)
    per_loop = [c.current * c.current * impedance / 2.0 for c in coils if c.current != 0.0]
    peak = math.fsum(per_loop)
    return {
        "per_loop_W": per_loop[0] if len(set(per_loop)) == 1 else per_loop,
        "driven_coils": len(per_loop),
        "peak_total_W": peak,
        "total_W": peak * duty_cycle,
        "duty_cycle": duty_cycle,
        "impedance_ohm": impedance,
    }


def crosstalk_ratio(layout, target_site, neighbor_site, moment_height):
    """|B| of the target site's coil at the neighbour ion over |B| at the target ion.

    Both ions are taken at height ``moment_height`` above their in-plane positions.
    """
    n = len(layout.sites)
    for i in (target_site, neighbor_site):
        if not 0 <= i < n:
            raise IndexError(f"site index {i} out of range")
    coil = layout.coils[layout.coil_for(target_site)]
    pt = np.array(layout.sites[target_site].position, dtype=float)
    pn = np.array(layout.sites[neighbor_site].position, dtype=float)
    pt[2] = pn[2] = moment_height
    B = field_only([coil], np.array([pt, pn]))
    return float(np.linalg.norm(B[1]) / np.linalg.norm(B[0]))
