import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from coiltrap.lattice import (
    LatticeLayout, apply_defects, ladder_asymmetry, ladder_leg_ratio, ladder_outer_leg,
    make_ladder_ring, make_line, make_ring, make_square, ratio_analysis, ring_excess,
    ring_nnn_chord, smallest_ladder, smallest_ring,
)

A = 10e-6


def test_square_ring_chord():
    r = make_ring(4, A)
    assert r.meta["nnn_chord"] == pytest.approx(A * math.sqrt(2), rel=1e-15)
    P = r.positions()
    assert np.linalg.norm(P[2] - P[0]) == pytest.approx(A * math.sqrt(2), rel=1e-14)


def test_large_ring_tends_to_straight_line():
    assert ring_nnn_chord(10**6, A) == pytest.approx(2 * A, rel=1e-11)
    assert abs(ring_excess(500)) < 1e-4


@pytest.mark.parametrize("n", [3, 4, 7, 13, 39, 100, 1000, 10**4])
def test_ring_geometry(n):
    r = make_ring(n, A, height=2e-6)
    P = r.positions()
    radii = np.hypot(P[:, 0], P[:, 1])
    np.testing.assert_allclose(radii, radii[0], rtol=1e-12)
    assert np.all(P[:, 2] == 2e-6)
    nn = np.linalg.norm(P[1] - P[0])
    assert nn == pytest.approx(A, rel=1e-12)
    nnn = np.linalg.norm(P[2 % n] - P[0])
    assert nnn == pytest.approx(ring_nnn_chord(n, A), rel=1e-12)


@given(st.integers(3, 10**4))
def test_nnn_chord_identity(n):
    P = make_ring(n, A).positions()[:3]
    assert np.linalg.norm(P[2 % n] - P[0]) == pytest.approx(ring_nnn_chord(n, A), rel=1e-12)


def test_ring_rejects_small_n():
    for n in (0, 2, 3.5):
        with pytest.raises(ValueError):
            make_ring(n, A)


def test_ring_thresholds():
    assert smallest_ring(0.10) == 13
    assert smallest_ring(0.01) == 39
    assert ring_excess(12) >= 0.10 and ring_excess(38) >= 0.01


def test_ring_excess_strictly_decreasing():
    e = np.array([ring_excess(n) for n in range(3, 3000)])
    assert np.all(np.diff(e) < 0)


@given(st.integers(3, 5000), st.floats(0.5, 4.0))
def test_outer_leg_identity(n, ratio):
    dr = A / ratio
    lay = make_ladder_ring(n, A, dr)
    P = lay.positions()
    a2 = np.linalg.norm(P[n + 1] - P[n])
    assert a2 == pytest.approx(ladder_outer_leg(n, A, dr), rel=1e-12)
    assert np.linalg.norm(P[1] - P[0]) == pytest.approx(A, rel=1e-12)


def test_ladder_polygon_rule_keeps_rung_length():
    lay = make_ladder_ring(24, A, A / 2, leg_rule="polygon")
    P = lay.positions()
    assert np.linalg.norm(P[24] - P[0]) == pytest.approx(A / 2, rel=1e-12)
    assert lay.meta["a2"] == pytest.approx(A + 2 * (A / 2) * math.sin(math.pi / 24), rel=1e-12)
    with pytest.raises(ValueError):
        make_ladder_ring(24, A, A / 2, leg_rule="spiral")


@pytest.mark.parametrize("n", [24, 25])
def test_ladder_leg_ratio_half(n):
    assert ladder_leg_ratio(n) == pytest.approx(0.5, abs=0.02)
    report = ratio_analysis(make_ladder_ring(n, A, A / 2))
    assert report["leg_ratio"] == pytest.approx(ladder_leg_ratio(n), rel=1e-12)


def test_ladder_limits():
    assert ladder_outer_leg(10**9, A, A / 2) == pytest.approx(A, rel=1e-8)
    a = np.array([ladder_asymmetry(n) for n in range(3, 4000)])
    assert np.all(np.diff(a) < 0)
    with pytest.raises(ValueError):
        make_ladder_ring(2, A, A / 2)
    with pytest.raises(ValueError):
        make_ladder_ring(10, A, 0.0)


def test_ladder_thresholds_by_direct_search():
    # brute force over all n; also checks the bracketed search
    for tol in (0.1, 0.01):
        brute = next(n for n in range(3, 10**5) if ladder_asymmetry(n) < tol)
        assert smallest_ladder(tol) == brute
    assert smallest_ladder(0.1) == 176


def test_ring_ratio_analysis():
    rep = ratio_analysis(make_ring(39, A))
    assert rep["excess"] < 0.01
    assert rep["nnn"] == pytest.approx(rep["nnn_formula"], rel=1e-12)


def test_line_nnn_ratio_is_one_eighth():
    rep = ratio_analysis(make_line(6, A))
    assert rep["nnn_ratio"] == pytest.approx(0.125, rel=1e-14)
    assert [c for _, c in rep["distances"]] == [5, 4, 3, 2, 1]


def test_ratio_analysis_needs_three_sites():
    with pytest.raises(ValueError):
        ratio_analysis(make_line(2, A))


def test_remove_middle_site():
    lay = apply_defects(make_line(3, A), removals=[1])
    assert [s.index for s in lay.occupied] == [0, 2]
    assert lay.pair_distances()[0, 1] == pytest.approx(2 * A)
    assert lay.coils[1].current != 0.0
    off = apply_defects(make_line(3, A), removals=[1], disable_coils=True)
    assert off.coils[1].current == 0.0


def test_pin_and_identity():
    base = make_line(3, A)
    pinned = apply_defects(base, pins=[(0, (2, 0, 0), 5.0)])
    assert pinned.sites[0].pinned_field.axis == (1.0, 0.0, 0.0)
    assert pinned.sites[0].pinned_field.strength == 5.0
    assert apply_defects(base).to_dict() == base.to_dict()
    with pytest.raises(IndexError):
        apply_defects(base, removals=[3])
    with pytest.raises(IndexError):
        apply_defects(base, pins=[(-1, (1, 0, 0), 1.0)])


@pytest.mark.parametrize("layout", [
    make_square(3, 2, A, 1e-6), make_ring(5, A), make_ladder_ring(6, A, A / 2),
    apply_defects(make_line(4, A), removals=[2], pins=[(0, (0, 1, 0), 1e-30)]),
])
def test_json_round_trip(layout):
    text = layout.to_json(sort_keys=True)
    again = LatticeLayout.from_json(text)
    assert again.to_json(sort_keys=True) == text


def test_square_array_has_coil_at_origin():
    lay = make_square(20, 20, A)
    centers = np.array([c.center for c in lay.coils])
    assert np.any(np.all(centers == 0.0, axis=1))
    assert centers[:, 0].min() == -10 * A and centers[:, 0].max() == 9 * A


def test_invalid_layouts():
    with pytest.raises(ValueError):
        make_line(0, A)
    with pytest.raises(ValueError):
        make_square(0, 3, A)
    with pytest.raises(ValueError):
        LatticeLayout(sites=[], coils=[], lattice_constant=A)
    with pytest.raises(ValueError):
        make_ring(5, -A)
