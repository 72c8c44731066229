import math

import numpy as np
import pytest

from coiltrap.scan import Axis, ScanGrid


def test_diagonal_plane_points():
    g = ScanGrid.diagonal_plane(Axis(0, 2e-6, 3), Axis(1e-6, 2e-6, 2))
    P = g.points()
    assert P.shape == (3, 2, 3)
    np.testing.assert_allclose(P[2, 1], [math.sqrt(2) * 1e-6, math.sqrt(2) * 1e-6, 2e-6], rtol=1e-15)


def test_vertical_line_with_origin():
    P = ScanGrid.vertical_line(Axis(0, 1, 5), origin=(1, 2, 3)).points()
    np.testing.assert_array_equal(P[:, :2], [[1, 2]] * 5)
    np.testing.assert_array_equal(P[:, 2], [3, 3.25, 3.5, 3.75, 4])


def test_dimensionless_grid():
    g = ScanGrid(axes=((-4.0, 4.0, 81),))
    assert g.mesh()[0][40] == 0.0
    with pytest.raises(ValueError):
        g.points()


@pytest.mark.parametrize("args", [(0, 1, 1), (1, 0, 5), (0, 1, 2.5), (1, 1, 3)])
def test_axis_invariants(args):
    with pytest.raises(ValueError):
        Axis(*args)


def test_grid_validation():
    with pytest.raises(ValueError):
        ScanGrid(axes=())
    with pytest.raises(ValueError):
        ScanGrid(axes=((0, 1, 2),) * 4)
    with pytest.raises(ValueError):
        ScanGrid(axes=((0, 1, 2),), directions=((0, 0, 0),))
