"""Unit-tagged quantities ("10 mA", "2.5 um") parsed to SI floats with pint.

The number is scaled with decimal arithmetic so "2.5 um" gives exactly
2.5e-06 rather than the float product of the prefixes. ``mu_B`` uses the
package's CODATA value instead of the registry's.
"""
from decimal import Decimal, InvalidOperation
from functools import lru_cache
import re

import pint

from .constants import MU_B

_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*(.*?)\s*$")

# dimension name -> (pint dimensionality string, SI unit used for display)
DIMENSIONS = {
    "length": ("[length]", "m"),
    "current": ("[current]", "A"),
    "frequency": ("1 / [time]", "Hz"),
    "time": ("[time]", "s"),
    "resistance": ("[mass] * [length] ** 2 / [time] ** 3 / [current] ** 2", "ohm"),
    "magnetic_field": ("[mass] / [time] ** 2 / [current]", "T"),
    "magnetic_moment": ("[current] * [length] ** 2", "J/T"),
    "mass": ("[mass]", "kg"),
    "energy": ("[mass] * [length] ** 2 / [time] ** 2", "J"),
    "dimensionless": ("", ""),
}


class UnitError(ValueError):
    """Malformed quantity or wrong physical dimension."""


@lru_cache(maxsize=1)
def registry():
    return pint.UnitRegistry()


@lru_cache(maxsize=256)
def _scale(unit_text):
    ureg = registry()
    if unit_text in ("mu_B", "µ_B", "bohr_magneton"):
        return Decimal(repr(MU_B)), ureg.Quantity(1.0, "bohr_magneton").dimensionality
    q = ureg.Quantity(1.0, unit_text).to_base_units()
    return Decimal(repr(float(q.magnitude))), q.dimensionality


def parse_quantity(text, dimension):
    """SI magnitude of ``text`` after checking it has ``dimension``.

    Bare numbers are accepted only for dimensionless quantities.
    """
    if isinstance(text, bool):
        raise UnitError(f"expected a {dimension} quantity, got {text!r}")
    if isinstance(text, (int, float)):
        if dimension != "dimensionless":
            raise UnitError(f"{text!r} needs a unit ({dimension})")
        return float(text)
    m = _NUMBER.match(str(text))
    if not m:
        raise UnitError(f"cannot read a number from {text!r}")
    number, unit = m.groups()
    try:
        value = Decimal(number)
    except InvalidOperation as exc:
        raise UnitError(f"bad number in {text!r}") from exc
    if not unit:
        if dimension != "dimensionless":
            raise UnitError(f"{text!r} needs a unit ({dimension})")
        return float(value)
    try:
        scale, dim = _scale(unit)
    except (pint.errors.PintError, AttributeError, TypeError, ValueError) as exc:
        raise UnitError(f"unknown unit {unit!r} in {text!r}") from exc
    want = registry().get_dimensionality(DIMENSIONS[dimension][0] or "dimensionless")
    if dim != want:
        raise UnitError(f"{text!r} is not a {dimension} (got {dim})")
    return float(value * scale)


def normalize_quantity(text, dimension):
    """Canonical spelling: number as written (float repr), then the unit as written.

    Validates ``text`` first, so the result always re-parses to the same value.
    """
    parse_quantity(text, dimension)
    m = _NUMBER.match(str(text))
    number, unit = m.groups()
    num = repr(float(number)) if any(c in number for c in ".eE") else str(int(number))
    return f"{num} {unit}".strip()
