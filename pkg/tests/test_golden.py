"""Regression against the committed coarse fig2/fig3 grids (see golden/make_golden.py)."""
import csv
import io
import sys

import numpy as np
import pytest

from coiltrap.config import serialize
from coiltrap.fieldcore import backend
from coiltrap.runner import VERB_FUNCS

from conftest import GOLDEN

sys.path.insert(0, str(GOLDEN))
import make_golden  # noqa: E402

FILES = sorted(p for p in GOLDEN.glob("*__*.csv"))


def table(text):
    rows = list(csv.reader(io.StringIO(text)))
    return rows[0], np.array(rows[1:], dtype=float)


@pytest.mark.parametrize("name", make_golden.FIGURES)
def test_reduced_config_is_unchanged(name):
    assert serialize(make_golden.reduced(name)) == (GOLDEN / f"{name}.toml").read_text()


@pytest.mark.parametrize("name", make_golden.FIGURES)
@pytest.mark.parametrize("kernel", backend.available())
def test_grids_match_golden(name, kernel):
    cfg = make_golden.reduced(name)
    got = VERB_FUNCS[cfg.verb](cfg, threads=2, backend=kernel)
    expected = {p.name.split("__", 1)[1]: p for p in FILES if p.name.startswith(name + "__")}
    assert set(got) == set(expected)
    for fname, path in expected.items():
        text = path.read_text()
        if got[fname] == text:
            continue
        # bytes can differ across platforms' libm; values must not
        h0, ref = table(text)
        h1, new = table(got[fname])
        assert h0 == h1
        np.testing.assert_allclose(new, ref, rtol=1e-11, atol=0)


def test_golden_fig2a_shape():
    header, data = table((GOLDEN / "fig2a__force.csv").read_text())
    assert header == ["x", "y", "z", "Fx", "Fy", "Fz", "log10|Fx|", "log10|Fz|"]
    assert data.shape == (8 * 12, 8)
    assert np.all(data[:, 0] == data[:, 1])
