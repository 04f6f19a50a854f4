import math

import numpy as np
import pytest

from timedplan.errors import (
    BoundsMismatch,
    CellSizeTooLarge,
    OutOfBounds,
)
from timedplan.workspace import (
    Box,
    CellDecomposition,
    ServiceLabeling,
    from_cuts,
    grid,
    intersect_decompositions,
    locate,
)


def unit_square():
    return Box((0.0, 0.0), (1.0, 1.0))


def test_box_basics():
    b = Box((0.0, -1.0), (2.0, 1.0))
    assert b.dim == 2
    assert b.center == (1.0, 0.0)
    assert b.diameter == pytest.approx(math.sqrt(4 + 4))
    assert b.contains((0.0, -1.0)) and b.contains((2.0, 1.0))
    assert not b.contains((2.0001, 0.0))
    assert b.contains((2.0001, 0.0), eps=1e-3)
    assert b.distance((3.0, 0.0)) == pytest.approx(1.0)
    assert b.distance((1.0, 0.0)) == 0.0


def test_box_rejects_inverted():
    with pytest.raises(Exception):
        Box((1.0,), (0.0,))


def test_grid_counts_and_clipping():
    d = grid(unit_square(), 0.5)
    assert d.n_cells == 4
    # ragged remainder: 0.4 splits 1.0 into 0.4,0.4,0.2 per axis
    d2 = grid(unit_square(), 0.4)
    assert d2.n_cells == 9
    sides = sorted(round(c.hi[0] - c.lo[0], 9) for c in d2.cells)
    assert sides[0] == pytest.approx(0.2)
    with pytest.raises(CellSizeTooLarge):
        grid(unit_square(), 1.5)
    with pytest.raises(CellSizeTooLarge):
        grid(unit_square(), 0.0)


def test_grid_diameter_is_max_cell_diagonal():
    d = grid(unit_square(), 0.5)
    assert d.diameter == pytest.approx(math.sqrt(0.5))


def test_locate_half_open_rule():
    d = grid(unit_square(), 0.5)
    # interior of first cell
    c00 = locate(d, (0.1, 0.1))
    # a shared face belongs to the higher cell except at the top boundary
    assert locate(d, (0.5, 0.1)) != c00
    assert locate(d, (1.0, 1.0)) == d.n_cells
    with pytest.raises(OutOfBounds):
        locate(d, (1.1, 0.0))


def test_locate_agrees_with_cell_membership():
    rng = np.random.default_rng(5)
    d = grid(Box((0.0, 0.0), (1.0, 0.7)), 0.3)
    for _ in range(200):
        p = (float(rng.uniform(0, 1)), float(rng.uniform(0, 0.7)))
        i = locate(d, p)
        assert d.cell(i).contains(p, eps=1e-12)


def test_cell_index_is_one_based():
    d = grid(unit_square(), 0.5)
    with pytest.raises(Exception):
        d.cell(0)
    assert d.cell(1).lo == (0.0, 0.0)
    assert d.center(d.n_cells) == (0.75, 0.75)


def test_from_cuts_fifteen_cell_layout():
    bounds = Box((-10.0, -5.0), (0.0, 0.0))
    dec = from_cuts(bounds, [(-7.5, -6.5, -3.5, -2.5), (-3.5, -2.5)])
    assert dec.n_cells == 15
    # cut points become cell faces
    assert any(abs(c.lo[0] + 6.5) < 1e-12 for c in dec.cells)


def test_from_cuts_rejects_outside_cut():
    with pytest.raises(BoundsMismatch):
        from_cuts(unit_square(), [(1.5,), ()])


def test_intersection_refines_both():
    bounds = unit_square()
    a = grid(bounds, 0.5)
    b = from_cuts(bounds, [(0.3,), (0.7,)])
    r = intersect_decompositions(a, b)
    # cut unions: x segments {0,.3,.5,1}, y segments {0,.5,.7,1} -> 3x3
    assert r.n_cells == 9
    for i in range(1, r.n_cells + 1):
        c = r.cell(i)
        inside_a = sum(
            1 for j in range(1, a.n_cells + 1)
            if a.cell(j).contains(c.center, eps=1e-12)
        )
        assert inside_a >= 1
    with pytest.raises(BoundsMismatch):
        intersect_decompositions(a, grid(Box((0.0, 0.0), (2.0, 2.0)), 0.5))


def test_intersection_drops_slivers():
    bounds = unit_square()
    a = grid(bounds, 0.5)
    r = intersect_decompositions(a, a)
    assert r.n_cells == a.n_cells


def test_service_labeling_disjointness():
    lab = ServiceLabeling({1: {3: frozenset({"a"})}, 2: {5: frozenset({"b"})}})
    assert lab.label(1, 3) == {"a"}
    assert lab.label(1, 4) == frozenset()
    assert lab.alphabet(2) == {"b"}
    assert lab.agents() == (1, 2)
    with pytest.raises(BoundsMismatch):
        ServiceLabeling({1: {3: frozenset({"a"})}, 2: {5: frozenset({"a"})}})
