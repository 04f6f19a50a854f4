import math
from fractions import Fraction

import numpy as np
import pytest

from timedplan.abstraction import (
    AgentWTS,
    Discretization,
    build_wts,
    dmax_range,
    dt_range,
    nominal_endpoint,
    successors,
)
from timedplan.dynamics import ConditionConstants, condition_constants
from timedplan.errors import (
    C1Violated,
    InfeasibleDiameter,
    LambdaOutOfRange,
    OutOfBounds,
    TimeStepOutOfRange,
)
from timedplan.graphs import build_graph, theorem1_constants
from timedplan.workspace import Box, ServiceLabeling, grid, locate


def consts(m=1.0, l_comb=14.0):
    return ConditionConstants(m_bound=m, l1=1.0, l2=1.0, l_combined=l_comb)


def quad(c, lam, v, dt, d):
    return c.m_bound * c.l_combined * dt * dt - (1.0 - lam) * v * dt + d


def test_dmax_formula():
    c = consts(m=2.0)
    lo, hi = dmax_range(c, 0.14, 1.0)
    assert lo == 0.0
    assert hi == pytest.approx(0.86**2 / (4 * 2 * 14), rel=1e-12)
    with pytest.raises(C1Violated):
        dmax_range(consts(m=1.0), 0.14, 1.0)  # v_max not strictly below M
    with pytest.raises(LambdaOutOfRange):
        dmax_range(c, 0.0, 0.5)
    with pytest.raises(LambdaOutOfRange):
        dmax_range(c, 1.0, 0.5)


def test_dt_range_reference_point():
    """Frozen endpoints for M=1, L=14, lam=0.14, v=1, d=0.01 (root
    cross-check: product = d/(M L), both endpoints kill the quadratic)."""
    c = consts()
    lo, hi = dt_range(0.01, c, 0.14, 1.0)
    assert lo == pytest.approx((0.86 - math.sqrt(0.1796)) / 28.0, rel=1e-13)
    assert hi == pytest.approx((0.86 + math.sqrt(0.1796)) / 28.0, rel=1e-13)
    assert lo == pytest.approx(0.01557886, abs=5e-8)
    assert hi == pytest.approx(0.04584972, abs=5e-8)
    assert abs(quad(c, 0.14, 1.0, lo, 0.01)) < 1e-12
    assert abs(quad(c, 0.14, 1.0, hi, 0.01)) < 1e-12
    assert lo * hi == pytest.approx(0.01 / 14.0, rel=1e-12)


def test_dt_range_interior_feasible():
    c = consts()
    lo, hi = dt_range(0.01, c, 0.14, 1.0)
    mid = 0.5 * (lo + hi)
    assert quad(c, 0.14, 1.0, mid, 0.01) < 0.0


def test_dt_range_rejects_oversized_diameter():
    c = consts(m=2.0)
    _, d_hi = dmax_range(c, 0.14, 1.0)
    with pytest.raises(InfeasibleDiameter):
        dt_range(d_hi * 1.01, c, 0.14, 1.0)
    with pytest.raises(ValueError):
        dt_range(0.0, c, 0.14, 1.0)


def test_refinement_widens_window():
    c = consts()
    lo1, hi1 = dt_range(0.01, c, 0.14, 1.0)
    lo2, hi2 = dt_range(0.004, c, 0.14, 1.0)
    assert lo2 <= lo1 and hi2 >= hi1


# -- geometric abstraction on a tiny workspace --------------------------------


def tiny_setup(lam=0.14):
    """Two agents on one edge, 3x3 grid sized inside the feasibility window."""
    g = build_graph(2, [(1, 2)])
    bp = theorem1_constants(g, v_max=1.0)
    c = condition_constants(g, bp)  # M=1.05, L=7
    _, d_hi = dmax_range(c, lam, 1.0)
    side = d_hi / math.sqrt(2.0) * 0.9
    bounds = Box((0.0, 0.0), (3 * side, 3 * side))
    dec = grid(bounds, side)
    lo, hi = dt_range(dec.diameter, c, lam, 1.0)
    disc = Discretization(dec, Fraction(0.5 * (lo + hi)).limit_denominator(10**6), lam, c, 1.0)
    return g, dec, disc


def test_discretization_validates_quantum():
    g, dec, disc = tiny_setup()
    lo, hi = dt_range(dec.diameter, disc.constants, disc.lam, 1.0)
    with pytest.raises(TimeStepOutOfRange):
        Discretization(dec, Fraction(hi * 1.5).limit_denominator(100), disc.lam, disc.constants, 1.0)
    with pytest.raises(TimeStepOutOfRange):
        Discretization(dec, Fraction(lo * 0.5).limit_denominator(100), disc.lam, disc.constants, 1.0)


def test_discretization_rejects_coarse_grid():
    g, dec, disc = tiny_setup()
    c = disc.constants
    _, d_hi = dmax_range(c, disc.lam, 1.0)
    big = grid(dec.bounds, d_hi)  # diagonal sqrt(2)*d_hi > d_hi
    with pytest.raises(InfeasibleDiameter):
        Discretization(big, disc.dt, disc.lam, c, 1.0)


def test_radius_formula_and_shrink():
    g, dec, disc = tiny_setup()
    assert disc.radius == pytest.approx(disc.lam * 1.0 * float(disc.dt))
    import dataclasses

    shrunk = dataclasses.replace(disc, radius_shrink=disc.radius / 2)
    assert shrunk.radius == pytest.approx(disc.radius / 2)


def test_nominal_endpoint_stationary_when_neighbors_coincide():
    g, dec, disc = tiny_setup()
    # neighbor in the same cell: zero drift, endpoint = own center
    assert nominal_endpoint(disc, (5, 5)) == dec.center(5)
    hit = successors(disc, g, (5, 5))
    assert locate(dec, dec.center(5)) in hit


def test_nominal_endpoint_drifts_toward_neighbor():
    g, dec, disc = tiny_setup()
    own = np.array(dec.center(1))
    nb = np.array(dec.center(9))
    got = np.array(nominal_endpoint(disc, (1, 9)))
    expect = own + float(disc.dt) * (nb - own)
    assert np.allclose(got, expect)


def test_successor_ball_is_distance_disk():
    g, dec, disc = tiny_setup()
    hit = successors(disc, g, (5, 5))
    x = np.array(dec.center(5))
    for i in range(1, dec.n_cells + 1):
        inside = dec.cell(i).distance(x) <= disc.radius + 1e-12
        assert (i in hit) == inside


def test_agent_wts_protocol():
    g, dec, disc = tiny_setup()
    lab = ServiceLabeling({1: {3: frozenset({"a"})}, 2: {}})
    w = build_wts(disc, g, 1, dec.center(5), lab)
    assert w.initial == {5}
    assert w.agent == 1 and w.neighbors == (2,)
    assert w.label(3) == {"a"} and w.label(5) == frozenset()
    assert w.alphabet == {"a"}
    with pytest.raises(ValueError):
        w.post((5,))  # arity: own cell plus one neighbor
    # post_any unions over all neighbor placements and covers post
    assert w.post((5, 9)) <= w.post_any(5)
    outs = dict(w.succ_weighted(5))
    assert set(outs) == set(w.post_any(5))
    assert all(v == disc.dt for v in outs.values())


def test_build_wts_rejects_outside_start():
    g, dec, disc = tiny_setup()
    lab = ServiceLabeling({1: {}, 2: {}})
    with pytest.raises(OutOfBounds):
        build_wts(disc, g, 1, (-1.0, 0.0), lab)
