"""Root solving for the dimension equation."""

import math

import pytest

import pressurelab as pl
from conftest import GOLDEN, moran_root


def test_bowen_root_linear():
    root = pl.bowen_root(lambda t: 1.0 - 2.0 * t, 0.0, 1.0, tol=1e-12)
    assert root == pytest.approx(0.5, abs=1e-11)


def test_bowen_root_needs_sign_change():
    with pytest.raises(pl.NoSignChange):
        pl.bowen_root(lambda t: 1.0 + t, 0.0, 1.0)


def test_self_similar_dimensions_match_independent_bisection():
    # equal slopes: closed form log 2 / log 3
    oracle = moran_root((3.0, 3.0))
    assert oracle == pytest.approx(math.log(2.0) / math.log(3.0), abs=1e-12)
    rep = pl.dimension_report(pl.cookie_cutter(3.0, 3.0), depth=12)
    # bisection stops at 1e-9 and extrapolation doubles that error
    assert rep.t_root == pytest.approx(oracle, abs=1e-8)

    # mixed slopes: closed form log(golden ratio) / log 2
    oracle = moran_root((2.0, 4.0))
    assert oracle == pytest.approx(math.log(GOLDEN) / math.log(2.0),
                                   abs=1e-12)
    rep = pl.dimension_report(pl.cookie_cutter(2.0, 4.0), depth=12)
    assert rep.t_root == pytest.approx(oracle, abs=1e-8)


def test_full_interval_maps_have_dimension_one():
    rep = pl.dimension_report(pl.doubling_map(), depth=10)
    assert rep.t_root == pytest.approx(1.0, abs=1e-10)
    rep = pl.dimension_report(pl.circle_map(2, 0.02), depth=12)
    assert rep.t_root == pytest.approx(1.0, abs=1e-3)


def test_golden_mean_dimension():
    # both branches stretch by exactly the golden ratio and the domains
    # cover the interval with no gap, so the invariant set has dimension 1
    mp = pl.golden_mean_map()
    assert mp.min_expansion == pytest.approx(GOLDEN, abs=1e-12)
    assert mp.max_expansion == pytest.approx(GOLDEN, abs=1e-12)
    rep = pl.dimension_report(mp, depth=14)
    assert rep.t_root == pytest.approx(1.0, abs=1e-12)


def test_toral_bracket_and_conformal_root():
    rep = pl.dimension_report(pl.toral_map(2, 3), depth=8)
    assert rep.t_lower == pytest.approx(math.log(6.0) / math.log(3.0),
                                        abs=1e-9)
    assert rep.t_upper == pytest.approx(2.0, abs=1e-9)
    assert math.isnan(rep.t_root)

    rep = pl.dimension_report(pl.toral_conformal_map(3), depth=8)
    assert rep.t_root == pytest.approx(2.0, abs=1e-9)


def test_report_history_depths():
    rep = pl.dimension_report(pl.cookie_cutter(3.0, 3.0), depth=12)
    assert tuple(d for d, _, _ in rep.per_depth) == (6, 12)
    assert rep.depth == 12
    assert rep.separation > 0.0
