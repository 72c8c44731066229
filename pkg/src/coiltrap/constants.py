"""CODATA-2018 physical constants in SI units.

Values are frozen here rather than pulled from ``scipy.constants``, whose
adjustment year changes between releases.
"""
from dataclasses import dataclass
import math


@dataclass(frozen=True)
class PhysicalConstants:
    mu0: float = 1.25663706212e-6
    eps0: float = 8.8541878128e-12
    bohr_magneton: float = 9.2740100783e-24
    elementary_charge: float = 1.602176634e-19
    hbar: float = 1.054571817e-34
    planck_h: float = 6.62607015e-34
    amu: float = 1.66053906660e-27

    @property
    def coulomb_k(self) -> float:
        """1/(4 pi eps0)."""
        return 1.0 / (4.0 * math.pi * self.eps0)

    def as_dict(self) -> dict:
        return {
            "mu0": self.mu0,
            "eps0": self.eps0,
            "bohr_magneton": self.bohr_magneton,
            "elementary_charge": self.elementary_charge,
            "hbar": self.hbar,
            "planck_h": self.planck_h,
            "amu": self.amu,
            "codata": "2018",
        }


CODATA = PhysicalConstants()

MU0 = CODATA.mu0
EPS0 = CODATA.eps0
MU_B = CODATA.bohr_magneton
E_CHARGE = CODATA.elementary_charge
HBAR = CODATA.hbar
H_PLANCK = CODATA.planck_h
AMU = CODATA.amu
