"""Verb implementations: each returns ``{filename: text}`` for the CLI to write."""
from dataclasses import replace
import math

import numpy as np

from . import lattice
from .artifacts import csv_text, json_text, table_json
from .config import ConfigError, RunConfig
from .constants import H_PLANCK
from .coupling import (
    SPECIES, CONSTANT_CURRENT, CONSTANT_DENSITY, CouplingConfig, DesignPoint, IonSpecies,
    binding_parameter, binding_status, coupling_matrix, coupling_strength, crosstalk_ratio,
    mode_force, power_budget, scaling_report,
)
from .design import coupling_map, edge_point, site_coupling
from .fieldcore import field_grid, field_only
from .forces import ForceMap, MomentModel, adiabaticity_check, force_map, force_vectors
from .scan import Axis, ScanGrid
from .spinsim import (
    EXACT, SpinState, Trotter, HamiltonianSpec, evolve, gamma_sweep, make_cluster_state,
    observables,
)
from .spinsim.cluster import correlation_falloff_check

TWO_PI = 2.0 * math.pi
CROSSTALK_LIMIT = 1e-3


# -- builders ------------------------------------------------------------

def build_layout(cfg: RunConfig):
    if not cfg.has("layout"):
        raise ConfigError("layout: section required for this run")
    kind = cfg.raw("layout", "kind")
    if kind == "file":
        with open(cfg.path(cfg.raw("layout", "file")), encoding="utf-8") as fh:
            try:
                layout = lattice.LatticeLayout.from_json(fh.read())
            except (KeyError, ValueError, TypeError) as exc:
                raise ConfigError(f"layout.file: invalid layout document ({exc})") from None
    else:
        common = dict(coil_radius=cfg.value("layout", "coil_radius"),
                      current=cfg.value("layout", "current"),
                      omega_T=TWO_PI * cfg.value("layout", "trap_frequency"))
        a = cfg.value("layout", "a")
        h = cfg.value("layout", "height")
        n = cfg.raw("layout", "n")
        if kind == "square":
            nx = cfg.raw("layout", "nx") or n
            ny = cfg.raw("layout", "ny") or nx
            layout = lattice.make_square(nx, ny, a, h, **common)
        elif kind == "line":
            layout = lattice.make_line(n, a, h, **common)
        elif kind == "ring":
            layout = lattice.make_ring(n, a, h, **common)
        else:
            layout = lattice.make_ladder_ring(n, a, cfg.value("layout", "delta_r"), h,
                                              leg_rule=cfg.raw("layout", "leg_rule"), **common)
    removals = cfg.raw("layout", "removals")
    if removals:
        try:
            layout = lattice.apply_defects(layout, removals=removals)
        except IndexError as exc:
            raise ConfigError(f"layout.removals: {exc}") from None
    return layout


def build_ion(cfg: RunConfig):
    sp = cfg.raw("ion", "species")
    ion = (IonSpecies("custom", cfg.require("ion", "mass")) if sp == "custom" else SPECIES[sp])
    mu = cfg.value("ion", "mu_eff")
    return replace(ion, mu_eff=mu) if mu is not None else ion


def build_moment(cfg: RunConfig, ion, series=None):
    src = series if series is not None else cfg.doc.get("moment", {})
    model = src.get("model", "adiabatic")
    if model == "pinned":
        return MomentModel.pinned(src["direction"], mu_eff=ion.mu_eff)
    return MomentModel.adiabatic(mu_eff=ion.mu_eff)


def external_field(cfg: RunConfig):
    v = cfg.value("moment", "external_field")
    return (0.0, 0.0, 0.0) if v is None else tuple(v)


def build_coupling(cfg: RunConfig, ion, series=None):
    mode = (series or {}).get("mode") or cfg.raw("coupling", "mode")
    return CouplingConfig(alpha=cfg.raw("coupling", "alpha"), mode_orientation=mode, ion=ion)


def build_grid(cfg: RunConfig):
    if not cfg.has("scan"):
        raise ConfigError("scan: section required for this run")
    kind = cfg.raw("scan", "kind")
    origin = cfg.value("scan", "origin") or (0.0, 0.0, 0.0)
    if kind == "diagonal_plane":
        return ScanGrid.diagonal_plane(Axis(*cfg.require("scan", "diagonal")),
                                       Axis(*cfg.require("scan", "height")), origin)
    if kind == "vertical_line":
        return ScanGrid.vertical_line(Axis(*cfg.require("scan", "height")), origin)
    return None


def scan_points(cfg: RunConfig):
    grid = build_grid(cfg)
    if grid is None:
        return np.array([cfg.require("scan", "point")], dtype=float)
    return grid.points().reshape(-1, 3)


def _series(cfg):
    return cfg.series() or [None]


def _suffix(series, k):
    if series is None:
        return ""
    return "_" + (series.get("label") or f"series{k}")


def _emit(cfg, stem, header, rows, extra_json=None):
    if cfg.raw("run", "format") == "json":
        if extra_json is None:
            return {f"{stem}.json": table_json(header, rows)}
        return {f"{stem}.json": json_text({**extra_json, "columns": list(header),
                                          "rows": [list(r) for r in rows]})}
    return {f"{stem}.csv": csv_text(header, rows)}


# -- verbs -----------------------------------------------------------------

def run_field(cfg, threads=1, backend=None):
    layout = build_layout(cfg)
    pts = scan_points(cfg)
    B = field_only(layout, pts, backend_name=backend, threads=threads)
    mag = np.linalg.norm(B, axis=1)
    rows = np.column_stack([pts, B, mag])
    return _emit(cfg, "field", ("x", "y", "z", "Bx", "By", "Bz", "|B|"), rows)


def run_force(cfg, threads=1, backend=None):
    layout = build_layout(cfg)
    ion = build_ion(cfg)
    ext = external_field(cfg)
    grid = build_grid(cfg)
    out = {}
    for k, s in enumerate(_series(cfg)):
        moment = build_moment(cfg, ion, s)
        if grid is None:
            pts = scan_points(cfg)
            F, mult = force_vectors(layout, pts, moment, ext, backend_name=backend, threads=threads)
            fm = ForceMap(pts, F, mult)
        else:
            fm = force_map(layout, moment, ext, grid, backend_name=backend, threads=threads)
        meta = {"moment_mode": moment.mode, "direction": moment.direction,
                "response_frequency_multiplier": fm.response_frequency_multiplier}
        out.update(_emit(cfg, "force" + _suffix(s, k), ForceMap.COLUMN_NAMES, fm.columns(), meta))
    return out


def _table1(cfg, backend):
    layout = build_layout(cfg)
    a = layout.lattice_constant
    R = layout.coils[0].radius
    rows = []
    for sp, f_t in zip(cfg.raw("table", "species"), cfg.value("table", "trap_frequencies")):
        ion = SPECIES[sp]
        mu = cfg.value("ion", "mu_eff")
        if mu is not None:
            ion = replace(ion, mu_eff=mu)
        conf = build_coupling(cfg, ion)
        beta = float(binding_parameter(ion, TWO_PI * f_t, a))
        for d in cfg.value("table", "heights"):
            sc = site_coupling(layout, edge_point(R, d), TWO_PI * f_t, a, conf,
                               moment=build_moment(cfg, ion), external_B=external_field(cfg),
                               backend_name=backend)
            rows.append((ion.name, ion.nuclear_spin, ion.hyperfine_splitting / TWO_PI / 1e9,
                         f_t, beta, binding_status(beta), d, sc.F_mode, sc.J_Hz))
    header = ("species", "nuclear_spin", "hyperfine_GHz", "trap_frequency_Hz", "beta",
              "beta_status", "d_m", "F_mode_N", "J_Hz")
    return _emit(cfg, "table1", header, rows)


def run_couple(cfg, threads=1, backend=None):
    if cfg.has("table"):
        return _table1(cfg, backend)
    layout = build_layout(cfg)
    ion = build_ion(cfg)
    omega = layout.occupied[0].trap_frequency[0]
    a = layout.lattice_constant
    if cfg.has("scan"):
        grid = build_grid(cfg)
        out = {}
        for k, s in enumerate(_series(cfg)):
            conf = build_coupling(cfg, ion, s)
            moment = build_moment(cfg, ion, s)
            if grid is None:
                pts = scan_points(cfg)
                F, _ = force_vectors(layout, pts, moment, external_field(cfg), backend_name=backend)
                Fm = mode_force(F, conf.mode_orientation)
                J = coupling_strength(Fm, ion, omega, a, conf)
            else:
                pts, F, J = coupling_map(layout, grid, omega, a, conf, moment, external_field(cfg),
                                         backend, threads)
                Fm = mode_force(F, conf.mode_orientation)
            pts = pts.reshape(-1, 3)
            Fm = np.ravel(Fm)
            J = np.ravel(J)
            with np.errstate(divide="ignore"):
                logJ = np.log10(np.abs(J))
            rows = np.column_stack([pts, Fm, J, logJ])
            meta = {"mode": conf.mode_orientation, "moment_mode": moment.mode,
                    "beta": float(binding_parameter(ion, omega, a))}
            out.update(_emit(cfg, "coupling_map" + _suffix(s, k),
                             ("x", "y", "z", "F_mode", "J_Hz", "log10|J|"), rows, meta))
        return out
    # coupling matrix from the force at each occupied site
    conf = build_coupling(cfg, ion)
    pts = layout.positions()
    F, _ = force_vectors(layout, pts, build_moment(cfg, ion), external_field(cfg),
                         backend_name=backend, threads=threads)
    cm = coupling_matrix(layout, mode_force(F, conf.mode_orientation), conf)
    return {"coupling.json": json_text(cm.to_dict()), "coupling.csv": cm.to_csv()}


def _spin_layout_matrix(cfg):
    layout = build_layout(cfg)
    ion = build_ion(cfg)
    conf = build_coupling(cfg, ion)
    # unit force: the pattern is rescaled by gamma or the pulse time anyway
    cm = coupling_matrix(layout, 1e-21, conf)
    return layout, cm


def run_spin(cfg, threads=1, backend=None):
    task = cfg.raw("spin", "task")
    layout, cm = _spin_layout_matrix(cfg)
    n = cm.n
    if task == "cluster":
        res = {}
        for long_range in sorted({False, bool(cfg.raw("spin", "include_long_range"))}):
            r = make_cluster_state(layout, cm, include_long_range=long_range)
            res["realistic" if long_range else "ideal"] = r
        edges = [[int(i), int(j)] for i, j in zip(*np.nonzero(np.triu(res["ideal"].nn_mask, 1)))]
        summary = {"n": n, "nn_edges": edges,
                   "fidelity": {k: v.fidelity for k, v in res.items()},
                   "falloff": {}}
        for D in (1, 2, 3):
            try:
                fit = correlation_falloff_check(cm, D)
                summary["falloff"][str(D)] = {"passes": fit.passes, "exponent": fit.exponent}
            except ValueError as exc:
                summary["falloff"][str(D)] = {"error": str(exc)}
        out = {"cluster.json": json_text(summary)}
        out["cluster_state.json"] = json_text(
            {k: v.state.to_dict() for k, v in res.items()})
        return out
    method = EXACT
    if cfg.raw("spin", "method") == "trotter":
        method = Trotter(cfg.require("spin", "dt"))
    b_field = H_PLANCK * cfg.value("spin", "b_field")
    initial = cfg.raw("spin", "initial")
    start = SpinState.basis(initial) if initial else None
    if task == "evolve":
        ham = HamiltonianSpec(cm.J * H_PLANCK, b_field)
        st = evolve(start or SpinState.plus(n), ham, cfg.require("spin", "time"), method)
        ob = observables(st)
        return {"evolve.json": json_text({"n": n, "time": cfg.value("spin", "time"),
                                          "observables": ob.to_dict(), "state": st.to_dict()})}
    g0, g1, count = cfg.require("spin", "gammas")
    gammas = np.linspace(g0, g1, count)
    rows = gamma_sweep(cm.J, gammas, b_field=b_field, mode=cfg.raw("spin", "sweep_mode"),
                       t=cfg.value("spin", "time"), initial=start, method=method, threads=threads)
    header = (["gamma", "energy_J", "mean_sx", "mean_sz", "nn_zz"]
              + [f"sx_{k}" for k in range(n)] + [f"sz_{k}" for k in range(n)])
    table = [[r["gamma"], r["energy"], r["mean_sx"], r["mean_sz"], r["nn_zz"]] + r["sx"] + r["sz"]
             for r in rows]
    return _emit(cfg, "gamma_sweep", header, table)


def _thresholds(cfg):
    kind = cfg.raw("thresholds", "kind")
    tols = cfg.raw("thresholds", "tolerances")
    out = {"kind": kind, "tolerances": tols}
    if kind == "ring":
        out["smallest_n"] = [lattice.smallest_ring(t) for t in tols]
        n_inf = cfg.raw("thresholds", "asymptote_n")
        s = lattice.ring_nnn_chord(n_inf, 1.0)
        out["asymptote"] = {"n": n_inf, "cubic_ratio": (1.0 / s) ** 3,
                            "deviation_from_eighth": abs((1.0 / s) ** 3 - 0.125)}
    else:
        r = cfg.raw("thresholds", "a1_over_delta_r")
        out["a1_over_delta_r"] = r
        out["smallest_n"] = [lattice.smallest_ladder(t, r) for t in tols]
        out["leg_ratio"] = {str(n): lattice.ladder_leg_ratio(n, r)
                            for n in cfg.raw("thresholds", "ratio_n")}
    return out


def run_layout(cfg, threads=1, backend=None):
    out = {}
    if cfg.has("layout"):
        layout = build_layout(cfg)
        out["layout.json"] = json_text(layout.to_dict())
        if len(layout.occupied) >= 3:
            out["ratios.json"] = json_text(lattice.ratio_analysis(layout))
    if cfg.has("thresholds"):
        out["thresholds.json"] = json_text(_thresholds(cfg))
    if not out:
        raise ConfigError("layout: a layout or thresholds section is required")
    return out


def design_report(cfg, backend=None):
    layout = build_layout(cfg)
    ion = build_ion(cfg)
    conf = build_coupling(cfg, ion)
    moment = build_moment(cfg, ion)
    a = layout.lattice_constant
    omega = layout.occupied[0].trap_frequency[0]
    centre = None
    if layout.coils:
        # the square generator puts a coil on the origin; edge effects are smallest there
        c = np.array([cl.center for cl in layout.coils])
        centre = layout.coils[int(np.argmin(np.hypot(c[:, 0], c[:, 1])))]
    R = centre.radius if centre is not None else cfg.value("layout", "coil_radius")
    c0 = centre.center if centre is not None else (0.0, 0.0, 0.0)
    h = cfg.value("report", "ion_height")
    if cfg.raw("report", "ion_point") == "edge":
        point = edge_point(R, h, c0)
    else:
        point = np.array([c0[0], c0[1], c0[2] + h])
    beta = float(binding_parameter(ion, omega, a))
    sc = site_coupling(layout, point, omega, a, conf, moment, external_field(cfg), backend)
    B, _ = field_grid(layout, point[None, :], backend_name=backend)
    Bmag = float(np.linalg.norm(B[0] + np.asarray(external_field(cfg))))
    f_rf = cfg.value("moment", "rf_frequency")
    if Bmag > 0.0:
        ratio = adiabaticity_check(Bmag, moment, f_rf)
        adiabatic = {"B_T": Bmag, "larmor_over_rf": ratio, "adiabatic": bool(ratio >= 10.0)}
    else:
        adiabatic = {"B_T": 0.0, "larmor_over_rf": None, "adiabatic": None,
                     "note": "no field at the ion"}
    size = cfg.raw("report", "array_size")
    coils = layout.coils
    if size:
        current = cfg.value("layout", "current")
        coils = lattice.make_square(size, size, a, coil_radius=R, current=current).coils
    power = power_budget(coils, cfg.value("report", "impedance"), cfg.value("report", "duty_cycle"))
    pitch = cfg.value("report", "crosstalk_pitch")
    pair = lattice.make_line(2, pitch, coil_radius=R, current=cfg.value("layout", "current") or 1.0)
    if cfg.value("layout", "current") == 0.0:
        xt = {"pitch_m": pitch, "ratio": None, "passes": None, "note": "coils not driven"}
    else:
        xr = crosstalk_ratio(pair, 0, 1, cfg.value("report", "crosstalk_height"))
        xt = {"pitch_m": pitch, "ratio": xr, "passes": bool(xr < CROSSTALK_LIMIT),
              "limit": CROSSTALK_LIMIT}
    base = DesignPoint(J=sc.J_Hz, omega_T=omega, a=a, R=R, d=h, rho=R, current=cfg.value("layout", "current"),
                       beta=beta)
    scaling = []
    for r in cfg.raw("report", "scale_factors"):
        for law in (CONSTANT_CURRENT, CONSTANT_DENSITY):
            rep = scaling_report(base, r, law)
            scaling.append({k: rep[k] for k in ("scale", "current_law", "J_ratio", "J", "beta_status",
                                                "strong_binding_preserved", "coil_overlap")}
                           | {"J_exponent": rep["exponents"]["J"]})
    return {
        "ion": ion.name, "mode": conf.mode_orientation, "moment_mode": moment.mode,
        "ion_point_m": point.tolist(),
        "beta": {"value": beta, "status": binding_status(beta)},
        "coupling": {"F_mode_N": sc.F_mode, "J_Hz": sc.J_Hz},
        "adiabaticity": adiabatic,
        "power": power,
        "crosstalk": xt,
        "scaling": scaling,
    }


def _fmt(v):
    if v is None:
        return "n/a"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def report_text(rep):
    lines = [f"design report: {rep['ion']}, {rep['mode']} mode, {rep['moment_mode']} moment",
             f"  beta = {_fmt(rep['beta']['value'])} ({rep['beta']['status']})",
             f"  J/h = {_fmt(rep['coupling']['J_Hz'])} Hz at F = {_fmt(rep['coupling']['F_mode_N'])} N",
             f"  |B| at ion = {_fmt(rep['adiabaticity']['B_T'])} T, Larmor/RF = "
             f"{_fmt(rep['adiabaticity']['larmor_over_rf'])}"]
    p = rep["power"]
    per = p["per_loop_W"]
    per = _fmt(per) if not isinstance(per, list) else "varies"
    lines.append(f"  power: {per} W per loop, {p['driven_coils']} loops, total {_fmt(p['total_W'])} W")
    x = rep["crosstalk"]
    lines.append(f"  crosstalk at {_fmt(x['pitch_m'])} m pitch: {_fmt(x['ratio'])} "
                 f"({'pass' if x['passes'] else 'fail' if x['passes'] is not None else 'n/a'})")
    for s in rep["scaling"]:
        flags = []
        if not s["strong_binding_preserved"]:
            flags.append("beta changes")
        if s["coil_overlap"]:
            flags.append("coils overlap")
        lines.append(f"  scale x{_fmt(s['scale'])} ({s['current_law']}): J x{_fmt(s['J_ratio'])}"
                     f"{' [' + ', '.join(flags) + ']' if flags else ''}")
    return "\n".join(lines) + "\n"


def run_report(cfg, threads=1, backend=None):
    rep = design_report(cfg, backend)
    return {"report.json": json_text(rep), "report.txt": report_text(rep)}


VERB_FUNCS = {"field": run_field, "force": run_force, "couple": run_couple, "spin": run_spin,
              "report": run_report, "layout": run_layout}
