"""Potentials, separated sets, and the pressure functionals."""

import math

import numpy as np
import pytest

import pressurelab as pl
from conftest import admissible_count


def test_logsumexp_matches_direct():
    vals = np.array([-1.0, 0.5, 2.0])
    assert pl.logsumexp(vals) == pytest.approx(math.log(np.exp(vals).sum()))
    # overflow safe
    assert pl.logsumexp(np.array([1000.0, 1000.0])) == pytest.approx(
        1000.0 + math.log(2.0))


def test_potential_constructors():
    mp = pl.doubling_map()
    pts = np.array([0.1, 0.2])
    assert np.allclose(pl.Potential.zero().pointwise(mp, pts), 0.0)
    assert np.allclose(pl.Potential.constant(0.7).pointwise(mp, pts), 0.7)
    geo = pl.Potential.geometric(0.5)
    assert np.allclose(geo.pointwise(mp, pts), -0.5 * math.log(2.0))
    fn = pl.Potential.from_function(lambda x: x * x)
    assert np.allclose(fn.pointwise(mp, pts), pts * pts)


def test_separated_set_counts_and_spacing():
    mp = pl.cookie_cutter(3.0, 3.0)
    sep = pl.separated_set(mp, 6)
    assert sep.count == 2 ** 6
    assert sep.epsilon > 0.0
    # distinct representatives really are separated in the orbit metric
    pts = np.sort(sep.points)
    orbit_gap = min(
        max(abs(a - b) for a, b in zip(pl.orbit(mp, pts[i], 6)[0],
                                       pl.orbit(mp, pts[i + 1], 6)[0]))
        for i in range(0, len(pts) - 1, 9))
    assert orbit_gap >= sep.epsilon


def test_epsilon_validation():
    mp = pl.doubling_map()
    with pytest.raises(pl.BadSpec):
        pl.separated_set(mp, 3, epsilon=0.0)
    with pytest.raises(pl.EpsilonTooLarge):
        pl.separated_set(mp, 3, epsilon=10.0)


def test_zero_potential_pressure_is_log_branch_count():
    for mp, n in ((pl.doubling_map(), 2), (pl.cookie_cutter(3.0, 3.0), 2),
                  (pl.circle_map(3, 0.05), 3), (pl.toral_map(2, 2), 4)):
        got = pl.pressure_additive(mp, pl.Potential.zero(), 6)
        assert got == pytest.approx(math.log(n), abs=1e-12)


def test_markov_zero_potential_counts_words():
    mp = pl.golden_mean_map()
    for depth in (3, 6, 10):
        got = pl.pressure_additive(mp, pl.Potential.zero(), depth)
        expect = math.log(admissible_count(mp.adjacency, depth)) / depth
        assert got == pytest.approx(expect, abs=1e-12)


def test_product_structure_closed_form():
    """Constant slopes factor the weighted sum at every depth."""
    r1, r2 = 2.0, 4.0
    mp = pl.cookie_cutter(r1, r2)
    for t in (0.3, 0.7, 1.1):
        for depth in (4, 9):
            got = pl.pressure_additive(mp, pl.Potential.geometric(t), depth)
            expect = math.log(r1 ** (-t) + r2 ** (-t))
            assert got == pytest.approx(expect, abs=1e-12)


def test_pressure_limit_converges_on_golden_mean():
    mp = pl.golden_mean_map()
    est = pl.pressure_limit(mp, pl.Potential.zero(), tol=1e-3, max_depth=16)
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    assert est.value == pytest.approx(math.log(phi), abs=1e-3)
    assert est.residual <= 1e-3
    assert est.per_depth[0][0] == 2


def test_pressure_limit_no_convergence_carries_estimate():
    mp = pl.golden_mean_map()
    with pytest.raises(pl.NoConvergence) as info:
        pl.pressure_limit(mp, pl.Potential.zero(), tol=1e-14, max_depth=8)
    assert info.value.estimate is not None
    assert info.value.estimate.depth == 8


def test_transfer_matches_separated_on_full_shift():
    mp = pl.cookie_cutter(2.0, 4.0)
    pot = pl.Potential.geometric(0.6)
    direct = pl.pressure_additive(mp, pot, 10)
    spectral = pl.transfer_pressure(mp, pot, 10)
    assert spectral == pytest.approx(direct, abs=1e-12)


def test_transfer_golden_mean_entropy():
    mp = pl.golden_mean_map()
    phi = (1.0 + math.sqrt(5.0)) / 2.0
    got = pl.transfer_pressure(mp, pl.Potential.zero(), 10)
    assert got == pytest.approx(math.log(phi), abs=5e-4)


def test_transfer_cap():
    with pytest.raises(pl.MatrixTooLarge):
        pl.transfer_pressure(pl.circle_map(3, 0.0), pl.Potential.zero(), 16)


def test_subadditive_split_spectrum_bounds():
    mp = pl.toral_map(2, 3)
    t = 1.2
    upper = pl.pressure_subadditive(mp, pl.Potential.singular_upper(t), 8)
    lower = pl.pressure_subadditive(mp, pl.Potential.singular_lower(t), 8)
    assert upper.value == pytest.approx(math.log(6.0) - t * math.log(3.0),
                                        abs=1e-12)
    assert lower.value == pytest.approx(math.log(6.0) - t * math.log(2.0),
                                        abs=1e-12)
    assert "split" in upper.advisory
    with pytest.raises(pl.BadSpec):
        pl.pressure_subadditive(mp, pl.Potential.zero(), 8)


def test_iterated_pressure_telescopes():
    mp = pl.cookie_cutter(3.0, 3.0)
    t = math.log(2.0) / math.log(3.0)
    vals = [pl.iterated_singular_pressure(mp, t, k, budget=16)
            for k in (1, 2, 4, 8)]
    assert max(vals) - min(vals) <= 1e-14
    with pytest.raises(pl.BadSpec):
        pl.iterated_singular_pressure(mp, t, 3, budget=16)


def test_variational_gap_doubling_zero_potential():
    mp = pl.doubling_map()
    gap = pl.variational_gap(mp, pl.Potential.zero(), (0, 1), depth=10)
    assert gap == pytest.approx(math.log(2.0), abs=1e-12)
    with pytest.raises(pl.InadmissibleWord):
        pl.variational_gap(pl.golden_mean_map(), pl.Potential.zero(), (1, 1))


def test_variational_gap_geometric_nonnegative():
    mp = pl.cookie_cutter(2.0, 4.0)
    pot = pl.Potential.geometric(0.8)
    for word in ((0,), (1,), (0, 1), (0, 0, 1), (0, 1, 1)):
        assert pl.variational_gap(mp, pot, word, depth=10) >= -1e-6


def test_conjugacy_identity_and_scaling(markov_example):
    mp = pl.cookie_cutter(2.0, 4.0)
    pot = pl.Potential.from_function(lambda x: 0.4 * np.sin(2 * np.pi * x))
    rep = pl.conjugate_pressure_check(mp, mp, lambda x: x, pot, depth=8)
    assert abs(rep.slack) <= 1e-12
    assert rep.residual <= 1e-12

    # the half scale Markov model is an affine change of coordinates
    half = pl.linear_markov(*markov_example)
    rep = pl.conjugate_pressure_check(mp, half, lambda x: 0.5 * x, pot,
                                      depth=10)
    assert abs(rep.slack) <= 1e-9
    assert rep.residual <= 1e-12


def test_conjugacy_rejects_wrong_intertwiner():
    # halving into branch 0 keeps points on the target domains but does
    # not intertwine the dynamics of the map with itself
    mp = pl.cookie_cutter(2.0, 4.0)
    with pytest.raises(pl.NotSemiConjugate):
        pl.conjugate_pressure_check(mp, mp, lambda x: 0.5 * x,
                                    pl.Potential.zero(), depth=6)
