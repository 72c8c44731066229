import csv
import json
import math
import subprocess
import sys

import pytest

from coiltrap import cli
from coiltrap.config import load
from coiltrap.fieldcore import backend

from conftest import CONFIGS

SMALL_FORCE = """
[run]
verb = "force"
[layout]
kind = "square"
n = 4
[scan]
kind = "diagonal_plane"
diagonal = ["0 um", "5 um", 7]
height = ["0.5 um", "4 um", 5]
"""

SMALL_SWEEP = """
[run]
verb = "spin"
[layout]
kind = "ring"
n = 6
[coupling]
mode = "Vertical"
[spin]
task = "gamma_sweep"
gammas = [-2.0, 2.0, 9]
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(tmp_path, verb, config, *extra, out="out"):
    code = cli.run([verb, "--config", str(config), "--out", str(tmp_path / out), *extra])
    return code, tmp_path / out


def read_all(d):
    return {p.name: p.read_bytes() for p in sorted(d.iterdir()) if p.name != "manifest.json"}


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.toml")), ids=lambda p: p.stem)
def test_shipped_configs_run(tmp_path, path):
    verb = load(path).verb
    code, out = run(tmp_path, verb, path, "--threads", "2")
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["verb"] == verb and man["config_sha256"] == load(path).sha256()
    assert set(man["outputs"]) == set(read_all(out))
    assert man["constants"]["codata"] == "2018"


def test_force_csv_columns(tmp_path):
    code, out = run(tmp_path, "force", write(tmp_path, SMALL_FORCE))
    assert code == 0
    rows = list(csv.reader((out / "force.csv").read_text().splitlines()))
    assert rows[0] == ["x", "y", "z", "Fx", "Fy", "Fz", "log10|Fx|", "log10|Fz|"]
    assert len(rows) == 1 + 35


def test_json_format_flag(tmp_path):
    code, out = run(tmp_path, "force", write(tmp_path, SMALL_FORCE), "--format", "json")
    assert code == 0
    doc = json.loads((out / "force.json").read_text())
    assert doc["columns"][:3] == ["x", "y", "z"] and len(doc["rows"]) == 35


@pytest.mark.parametrize("text,verb", [(SMALL_FORCE, "force"), (SMALL_SWEEP, "spin")])
def test_outputs_are_byte_identical(tmp_path, text, verb):
    cfg = write(tmp_path, text)
    runs = [read_all(run(tmp_path, verb, cfg, "--threads", t, out=f"o{k}")[1])
            for k, t in enumerate(["1", "1", "3"])]
    assert runs[0] == runs[1] == runs[2]


@pytest.mark.skipif("compiled" not in backend.available(), reason="compiled kernel not built")
def test_backends_give_identical_csv(tmp_path):
    cfg = write(tmp_path, SMALL_FORCE)
    a = read_all(run(tmp_path, "force", cfg, "--backend", "compiled", out="c")[1])
    b = read_all(run(tmp_path, "force", cfg, "--backend", "python", out="p")[1])
    assert a == b


def test_empty_layout_is_config_error(tmp_path, capsys):
    code, _ = run(tmp_path, "layout", write(tmp_path, '[run]\nverb="layout"\n[layout]\nkind="line"\nn=0\n'))
    assert code == 2
    assert "layout.n" in capsys.readouterr().err


def test_missing_layout_file_is_config_error(tmp_path, capsys):
    cfg = write(tmp_path, '[run]\nverb="layout"\n[layout]\nkind="file"\nfile="gone.json"\n')
    assert run(tmp_path, "layout", cfg)[0] == 2
    assert "layout.file" in capsys.readouterr().err


def test_missing_config_is_config_error(tmp_path):
    assert run(tmp_path, "field", tmp_path / "nope.toml")[0] == 2


def test_singular_point_is_runtime_error(tmp_path, capsys):
    cfg = write(tmp_path, '[run]\nverb="field"\n[layout]\nkind="square"\nn=2\n'
                          '[scan]\nkind="point"\npoint=["2.5 um", "0 um", "0 um"]\n')
    assert run(tmp_path, "field", cfg)[0] == 3
    assert "runtime error in coiltrap.fieldcore" in capsys.readouterr().err


def test_layout_file_round_trip(tmp_path):
    code, out = run(tmp_path, "layout", CONFIGS / "ring_thresholds.toml")
    assert code == 0
    cfg = write(tmp_path, f'[run]\nverb="layout"\n[layout]\nkind="file"\nfile="{out / "layout.json"}"\n'
                          '[thresholds]\nkind="ring"\n')
    code, again = run(tmp_path, "layout", cfg, out="again")
    assert code == 0
    assert (again / "layout.json").read_bytes() == (out / "layout.json").read_bytes()


def test_report_prints_summary(tmp_path, capsys):
    code, out = run(tmp_path, "report", CONFIGS / "report_be9.toml")
    assert code == 0
    text = capsys.readouterr().out
    assert text == (out / "report.txt").read_text()
    rep = json.loads((out / "report.json").read_text())
    assert rep["beta"]["status"] == "marginal"
    assert rep["power"]["per_loop_W"] == pytest.approx(2.5e-3)
    assert rep["crosstalk"]["passes"]
    # ion above the edge of the coil at the origin, away from the array boundary
    x, y, z = rep["ion_point_m"]
    assert x == y and math.hypot(x, y) == pytest.approx(2.5e-6) and z == 1e-6


def test_zero_current_report_is_valid(tmp_path):
    text = (CONFIGS / "report_be9.toml").read_text()
    text = text.replace('current = "10 mA"', 'current = "0 mA"')
    code, out = run(tmp_path, "report", write(tmp_path, text))
    assert code == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["coupling"]["J_Hz"] == 0.0 and rep["coupling"]["F_mode_N"] == 0.0


def test_bad_threads_flag(tmp_path):
    assert run(tmp_path, "force", write(tmp_path, SMALL_FORCE), "--threads", "0")[0] == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "coiltrap", "layout", "--config",
                           str(CONFIGS / "ladder_thresholds.toml"), "--out", str(tmp_path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    th = json.loads((tmp_path / "thresholds.json").read_text())
    assert th["smallest_n"][0] == 176
