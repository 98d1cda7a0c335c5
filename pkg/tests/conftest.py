"""Shared fixtures and independent oracles for the test suite.

Every expected value used in a tolerance check is produced here with the
standard library and raw numpy only, so nothing under test can leak into
its own oracle.  Bisections run 200 halvings, far past double precision.
"""

import itertools
import math

import pytest


def moran_root(slopes, hi=2.0):
    """Zero of sum(s**-t) - 1 by plain bisection."""
    slopes = [float(s) for s in slopes]

    def g(t):
        return sum(s ** (-t) for s in slopes) - 1.0

    lo = 0.0
    assert g(lo) > 0.0 > g(hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def admissible_count(adj, length):
    """Number of admissible words via exact integer matrix powers."""
    n = len(adj)
    if length < 1:
        raise ValueError("length must be positive")
    power = [[1 if i == j else 0 for j in range(n)] for i in range(n)]
    for _ in range(length - 1):
        power = [[sum(power[i][k] * adj[k][j] for k in range(n))
                  for j in range(n)] for i in range(n)]
    return sum(power[i][j] for i in range(n) for j in range(n))


def expectation_root(eps, slopes=(3.0, 3.0), coeffs=(-1.0, 1.0)):
    """Root of the letter-averaged pressure of a random cookie family.

    Each letter scales every branch slope by (1 + eps * a); by independence
    the quenched pressure at parameter t is the plain average over letters
    of log sum_i s_i(letter)**-t, and its zero is the expected dimension.
    """
    def mean_p(t):
        total = 0.0
        for a in coeffs:
            total += math.log(sum((s * (1.0 + eps * a)) ** (-t)
                                  for s in slopes))
        return total / len(coeffs)

    lo, hi = 0.0, 1.0
    assert mean_p(lo) > 0.0
    if mean_p(hi) >= 0.0:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mean_p(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def primitive_cycles(adj, period_cap):
    """All primitive admissible cycles up to rotation, as tuples."""
    n = len(adj)
    out = []
    for p in range(1, period_cap + 1):
        for w in itertools.product(range(n), repeat=p):
            if any(not adj[w[i]][w[(i + 1) % p]] for i in range(p)):
                continue
            if min(w[i:] + w[:i] for i in range(p)) != w:
                continue
            if any(p % d == 0 and w == w[:d] * (p // d)
                   for d in range(1, p)):
                continue
            out.append(w)
    return out


GOLDEN = (1.0 + math.sqrt(5.0)) / 2.0


@pytest.fixture(scope="session")
def markov_example():
    """Domain and image intervals of a two branch affine Markov map.

    Branch 0 doubles [0, 1/4] onto [0, 1/2]; branch 1 quadruples
    [3/8, 1/2] onto [0, 1/2].  Both images cover both domains, so the
    shift is full and the invariant set is an affine copy (half scale)
    of the cookie cutter with slopes 2 and 4.
    """
    return ((0.0, 0.25), (0.375, 0.5)), ((0.0, 0.5), (0.0, 0.5))
