import pytest
from hypothesis import given, strategies as st

from coiltrap.config import ConfigError, load, parse, serialize
from coiltrap.units import UnitError, normalize_quantity, parse_quantity

from conftest import CONFIGS

SHIPPED = sorted(CONFIGS.glob("*.toml"))
REQUIRED = {"fig2a", "fig2b", "fig3a", "fig3b", "table1", "ring_thresholds", "ladder_thresholds",
            "gamma_sweep_n8", "cluster_n6"}


def test_all_required_configs_ship():
    assert REQUIRED <= {p.stem for p in SHIPPED}


@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.stem)
def test_round_trip_is_idempotent(path):
    cfg = load(path)
    once = serialize(cfg)
    again = parse(once, base_dir=path.parent)
    assert serialize(again) == once
    assert again.sha256() == cfg.sha256()


@pytest.mark.parametrize("text,field", [
    ('[run]\nverb="field"\n[layout]\nkind="square"\nn=0\n', "layout.n"),
    ('[run]\nverb="field"\n[layout]\nkind="square"\nn=3\na="10 mA"\n', "layout.a"),
    ('[run]\nverb="field"\n[layout]\nkind="square"\nn=3\na="10"\n', "layout.a"),
    ('[run]\nverb="field"\n[layout]\nkind="file"\nfile="missing.json"\n', "layout.file"),
    ('[run]\nverb="field"\n[layout]\nkind="squar"\n', "layout.kind"),
    ('[run]\nverb="field"\nbogus=1\n', "run.bogus"),
    ('[run]\nverb="fly"\n', "run.verb"),
])
def test_errors_name_the_field(text, field):
    with pytest.raises(ConfigError) as exc:
        parse(text)
    assert str(exc.value).startswith(field)


def test_syntax_error_reports_line():
    with pytest.raises(ConfigError) as exc:
        parse('[run]\nverb = "field"\n\n[layout]\nn = \n', source="bad.toml")
    msg = str(exc.value)
    assert "bad.toml" in msg and "line 5" in msg


def test_layout_file_resolves_relative_to_config(tmp_path):
    (tmp_path / "lay.json").write_text("{}")
    cfg = parse('[run]\nverb="layout"\n[layout]\nkind="file"\nfile="lay.json"\n', base_dir=tmp_path)
    assert cfg.path("lay.json") == str(tmp_path / "lay.json")


def test_values_are_si():
    cfg = load(CONFIGS / "table1.toml")
    assert cfg.value("layout", "a") == 1e-05
    assert cfg.value("layout", "coil_radius") == 2.5e-06
    assert cfg.value("layout", "current") == 0.01


@pytest.mark.parametrize("text,dim,expected", [
    ("2.5 um", "length", 2.5e-6), ("2.5 µm", "length", 2.5e-6), ("10 mA", "current", 0.01),
    ("1 MHz", "frequency", 1e6), ("0.75 MHz", "frequency", 7.5e5), ("50 ohm", "resistance", 50.0),
    ("3 ms", "time", 3e-3), ("2 mT", "magnetic_field", 2e-3), ("9 u", "mass", None),
    ("0.5", "dimensionless", 0.5),
])
def test_parse_quantity(text, dim, expected):
    v = parse_quantity(text, dim)
    if expected is not None:
        assert v == expected


def test_bohr_magneton_uses_package_constant():
    from coiltrap.constants import MU_B
    assert parse_quantity("0.5 mu_B", "magnetic_moment") == 0.5 * MU_B


@pytest.mark.parametrize("text,dim", [("10", "length"), ("10 mA", "length"), ("ten um", "length"),
                                      ("", "length")])
def test_unit_errors(text, dim):
    with pytest.raises(UnitError):
        parse_quantity(text, dim)


@given(st.decimals(min_value="0.001", max_value="1000", places=3))
def test_decimal_scaling_is_exact(d):
    # the SI value is the correctly rounded decimal, not float(d) * 1e-6
    assert parse_quantity(f"{d} um", "length") == float(f"{d}e-6")


def test_normalize_quantity_is_stable():
    s = normalize_quantity("2.5 um", "length")
    assert normalize_quantity(s, "length") == s
