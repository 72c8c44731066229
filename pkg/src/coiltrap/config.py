"""Run configuration: a TOML document with unit-tagged quantities.

Parsing validates every key against :data:`SCHEMA` and normalises quantity
spellings, so ``serialize(parse(text))`` is a fixed point of ``parse``.
Errors name the offending field (``layout.current``) or, for TOML syntax,
the line and column.
"""
from dataclasses import dataclass, field
import hashlib
import math
import os
import sys

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib
import tomli_w

from .units import UnitError, normalize_quantity, parse_quantity

VERBS = ("field", "force", "couple", "spin", "report", "layout")


class ConfigError(ValueError):
    """Malformed or invalid configuration."""


@dataclass(frozen=True)
class F:
    """Schema entry: ``kind`` is a python type name, a unit dimension, or a compound."""

    kind: str
    default: object = None
    choices: tuple = ()
    inner: str = ""


Q = lambda dim, default=None: F("quantity", default, inner=dim)  # noqa: E731

SCHEMA = {
    "run": {
        "name": F("str", ""),
        "verb": F("str", None, VERBS),
        "threads": F("int", 1),
        "backend": F("str", "auto", ("auto", "compiled", "python")),
        "format": F("str", "csv", ("csv", "json")),
    },
    "layout": {
        "kind": F("str", "square", ("square", "line", "ring", "ladder_ring", "file")),
        "file": F("str"),
        "n": F("int"),
        "nx": F("int"),
        "ny": F("int"),
        "a": Q("length", "10 um"),
        "delta_r": Q("length"),
        "leg_rule": F("str", "formula", ("formula", "polygon")),
        "coil_radius": Q("length", "2.5 um"),
        "current": Q("current", "10 mA"),
        "trap_frequency": Q("frequency", "1 MHz"),
        "height": Q("length", "0 um"),
        "removals": F("list", (), inner="int"),
    },
    "ion": {
        "species": F("str", "Be9", ("Be9", "Mg25", "Ca43", "custom")),
        "mass": Q("mass"),
        "mu_eff": Q("magnetic_moment"),
    },
    "moment": {
        "model": F("str", "adiabatic", ("adiabatic", "pinned")),
        "direction": F("vec3"),
        "external_field": F("qvec3", inner="magnetic_field"),
        "rf_frequency": Q("frequency", "0 Hz"),
    },
    "coupling": {
        "alpha": F("float", 2.0),
        "mode": F("str", "Lateral", ("Lateral", "Vertical")),
    },
    "scan": {
        "kind": F("str", "diagonal_plane", ("diagonal_plane", "vertical_line", "point")),
        "diagonal": F("axis", inner="length"),
        "height": F("axis", inner="length"),
        "origin": F("qvec3", inner="length"),
        "point": F("qvec3", inner="length"),
    },
    "series": {
        "label": F("str", ""),
        "model": F("str", "adiabatic", ("adiabatic", "pinned")),
        "direction": F("vec3"),
        "mode": F("str", None, ("Lateral", "Vertical")),
    },
    "table": {
        "species": F("list", ("Be9", "Mg25", "Ca43"), inner="str"),
        "trap_frequencies": F("list", ("1 MHz", "0.75 MHz", "0.6 MHz"), inner="frequency"),
        "heights": F("list", ("1 um", "2 um", "5 um"), inner="length"),
    },
    "thresholds": {
        "kind": F("str", "ring", ("ring", "ladder")),
        "tolerances": F("list", (0.1, 0.01), inner="float"),
        "asymptote_n": F("int", 500),
        "a1_over_delta_r": F("float", 2.0),
        "ratio_n": F("list", (), inner="int"),
    },
    "spin": {
        "task": F("str", "gamma_sweep", ("gamma_sweep", "cluster", "evolve")),
        "gammas": F("axis", inner="dimensionless"),
        "b_field": Q("frequency", "-1 kHz"),
        "sweep_mode": F("str", "ground", ("ground", "evolve")),
        "time": Q("time"),
        "method": F("str", "exact", ("exact", "trotter")),
        "dt": Q("time"),
        "include_long_range": F("bool", True),
        "initial": F("list", (), inner="int"),
    },
    "report": {
        "impedance": Q("resistance", "50 ohm"),
        "duty_cycle": F("float", 1.0),
        "ion_point": F("str", "edge", ("edge", "center")),
        "ion_height": Q("length", "2.5 um"),
        "crosstalk_pitch": Q("length", "100 um"),
        "crosstalk_height": Q("length", "2.5 um"),
        "array_size": F("int"),
        "scale_factors": F("list", (0.5, 2.0), inner="float"),
    },
}
ARRAY_SECTIONS = ("series",)
SECTION_ORDER = tuple(SCHEMA)


def _err(path, msg):
    return ConfigError(f"{path}: {msg}")


def _check_type(path, value, kind):
    if kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise _err(path, f"expected an integer, got {value!r}")
        return value
    if kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
            raise _err(path, f"expected a number, got {value!r}")
        return float(value)
    if kind == "str":
        if not isinstance(value, str):
            raise _err(path, f"expected a string, got {value!r}")
        return value
    if kind == "bool":
        if not isinstance(value, bool):
            raise _err(path, f"expected true/false, got {value!r}")
        return value
    # remaining kinds are unit dimensions
    try:
        if kind == "dimensionless" and isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        return normalize_quantity(value, kind)
    except UnitError as exc:
        raise _err(path, str(exc)) from None


def _normalize(path, value, spec: F):
    if spec.kind == "quantity":
        return _check_type(path, value, spec.inner)
    if spec.kind in ("int", "float", "str", "bool"):
        v = _check_type(path, value, spec.kind)
        if spec.choices and v not in spec.choices:
            raise _err(path, f"must be one of {', '.join(spec.choices)}; got {v!r}")
        return v
    if not isinstance(value, list):
        raise _err(path, f"expected a list, got {value!r}")
    if spec.kind == "list":
        return [_check_type(f"{path}[{i}]", v, spec.inner) for i, v in enumerate(value)]
    if spec.kind in ("vec3", "qvec3"):
        if len(value) != 3:
            raise _err(path, "expected 3 components")
        inner = "float" if spec.kind == "vec3" else spec.inner
        return [_check_type(f"{path}[{i}]", v, inner) for i, v in enumerate(value)]
    if spec.kind == "axis":
        if len(value) != 3:
            raise _err(path, "expected [start, stop, count]")
        start = _check_type(f"{path}[0]", value[0], spec.inner)
        stop = _check_type(f"{path}[1]", value[1], spec.inner)
        count = _check_type(f"{path}[2]", value[2], "int")
        lo, hi = (parse_quantity(v, spec.inner) for v in (start, stop))
        if count < 2:
            raise _err(path, "count must be at least 2")
        if not lo < hi:
            raise _err(path, "start must be below stop")
        return [start, stop, count]
    raise AssertionError(spec.kind)


def _normalize_table(name, table, where):
    schema = SCHEMA[name]
    out = {}
    for key, value in table.items():
        if key not in schema:
            raise _err(f"{where}.{key}", "unknown key")
        out[key] = _normalize(f"{where}.{key}", value, schema[key])
    return {k: out[k] for k in schema if k in out}


@dataclass
class RunConfig:
    doc: dict
    base_dir: str = "."
    source: str = field(default="<string>", repr=False)

    # -- raw access ----------------------------------------------------
    def has(self, section, key=None):
        sec = self.doc.get(section)
        return sec is not None and (key is None or key in sec)

    def raw(self, section, key):
        sec = self.doc.get(section, {})
        return sec[key] if key in sec else SCHEMA[section][key].default

    def value(self, section, key):
        """Value with units resolved to SI floats."""
        spec = SCHEMA[section][key]
        v = self.raw(section, key)
        if v is None:
            return None
        return _resolve(v, spec)

    def require(self, section, key):
        v = self.value(section, key)
        if v is None:
            raise ConfigError(f"{section}.{key}: required for this run")
        return v

    @property
    def verb(self):
        return self.raw("run", "verb")

    def series(self):
        return list(self.doc.get("series", []))

    def path(self, rel):
        return rel if os.path.isabs(rel) else os.path.normpath(os.path.join(self.base_dir, rel))

    # -- canonical text ------------------------------------------------
    def serialize(self):
        return serialize(self)

    def sha256(self):
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()


def _resolve(v, spec: F):
    if spec.kind == "quantity":
        return parse_quantity(v, spec.inner)
    if spec.kind == "list" and spec.inner not in ("int", "float", "str", "bool"):
        return [parse_quantity(x, spec.inner) for x in v]
    if spec.kind == "qvec3":
        return [parse_quantity(x, spec.inner) for x in v]
    if spec.kind == "axis":
        return (parse_quantity(v[0], spec.inner), parse_quantity(v[1], spec.inner), int(v[2]))
    if isinstance(v, tuple):
        return list(v)
    return v


def parse(text, base_dir=".", source="<string>", check_files=True) -> RunConfig:
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{source}: TOML syntax error: {exc}") from None
    doc = {}
    for name, body in raw.items():
        if name not in SCHEMA:
            raise _err(name, "unknown section")
        if name in ARRAY_SECTIONS:
            if not isinstance(body, list):
                raise _err(name, "use [[series]] tables")
            doc[name] = [_normalize_table(name, t, f"{name}[{i}]") for i, t in enumerate(body)]
        else:
            if not isinstance(body, dict):
                raise _err(name, "expected a table")
            doc[name] = _normalize_table(name, body, name)
    doc = {k: doc[k] for k in SECTION_ORDER if k in doc}
    cfg = RunConfig(doc=doc, base_dir=base_dir, source=source)
    _validate(cfg, check_files)
    return cfg


def load(path, check_files=True) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read ({exc.strerror})") from None
    return parse(text, base_dir=os.path.dirname(os.path.abspath(path)), source=path,
                 check_files=check_files)


def serialize(cfg: RunConfig) -> str:
    return tomli_w.dumps(cfg.doc)


def _validate(cfg: RunConfig, check_files):
    if cfg.has("run", "threads") and cfg.raw("run", "threads") < 1:
        raise _err("run.threads", "must be at least 1")
    if cfg.has("layout"):
        kind = cfg.raw("layout", "kind")
        if kind == "file":
            rel = cfg.raw("layout", "file")
            if not rel:
                raise _err("layout.file", "required when layout.kind = 'file'")
            if check_files and not os.path.isfile(cfg.path(rel)):
                raise _err("layout.file", f"no such file {cfg.path(rel)!r}")
        else:
            for key in ("n", "nx", "ny"):
                if cfg.has("layout", key) and cfg.raw("layout", key) < 1:
                    raise _err(f"layout.{key}", "layout is empty")
            if kind in ("line", "ring", "ladder_ring") and not cfg.has("layout", "n"):
                raise _err("layout.n", f"required for a {kind} layout")
            if kind == "ladder_ring" and not cfg.has("layout", "delta_r"):
                raise _err("layout.delta_r", "required for a ladder_ring layout")
            if kind == "square" and not (cfg.has("layout", "n") or cfg.has("layout", "nx")):
                raise _err("layout.n", "required for a square layout")
            for key in ("a", "coil_radius", "trap_frequency"):
                if cfg.value("layout", key) <= 0.0:
                    raise _err(f"layout.{key}", "must be positive")
            if cfg.value("layout", "current") < 0.0:
                raise _err("layout.current", "must be non-negative")
    if cfg.has("ion") and cfg.raw("ion", "species") == "custom" and not cfg.has("ion", "mass"):
        raise _err("ion.mass", "required for a custom species")
    if cfg.raw("moment", "model") == "pinned" and not cfg.has("moment", "direction"):
        raise _err("moment.direction", "required for a pinned moment")
    for i, s in enumerate(cfg.series()):
        if s.get("model") == "pinned" and "direction" not in s:
            raise _err(f"series[{i}].direction", "required for a pinned moment")
        if "direction" in s and not any(s["direction"]):
            raise _err(f"series[{i}].direction", "must be nonzero")
    if cfg.has("moment", "direction") and not any(cfg.raw("moment", "direction")):
        raise _err("moment.direction", "must be nonzero")
    if cfg.has("table"):
        t = [cfg.raw("table", k) for k in ("species", "trap_frequencies")]
        if len(t[0]) != len(t[1]):
            raise _err("table.trap_frequencies", "needs one entry per species")
        for s in t[0]:
            if s not in ("Be9", "Mg25", "Ca43"):
                raise _err("table.species", f"unknown species {s!r}")
    if cfg.has("report"):
        if not 0.0 < cfg.value("report", "duty_cycle") <= 1.0:
            raise _err("report.duty_cycle", "must lie in (0, 1]")
        if cfg.value("report", "impedance") <= 0.0:
            raise _err("report.impedance", "must be positive")
    if cfg.raw("spin", "method") == "trotter" and cfg.has("spin") and not cfg.has("spin", "dt"):
        raise _err("spin.dt", "required for Trotter evolution")
