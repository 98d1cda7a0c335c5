"""Pressure estimators over separated orbit sets.

Finite depth pressure is the normalized log of a weighted orbit count: sum
exp of the accumulated potential over one representative per cylinder.
Representatives of distinct cylinders of depth n form an (n, eps) separated
set for every eps below the map's separation threshold, and this canonical
family is the single systematic approximation used throughout: the scale
eps only gates validity, it never changes the returned numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics as dyn
from .cylinders import CylinderSet
from .errors import (
    BadSpec,
    EpsilonTooLarge,
    InadmissibleWord,
    MatrixTooLarge,
    NoConvergence,
    NotSemiConjugate,
)

TRANSFER_CAP = 1 << 16

_KINDS = ("additive", "singular_upper", "singular_lower")


def logsumexp(values):
    """Stable log of a sum of exponentials."""
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return -math.inf
    m = float(arr.max())
    if not math.isfinite(m):
        return m
    return m + float(np.log(np.exp(arr - m).sum()))


class Potential:
    """Weight model for pressure sums.

    kind "additive" carries a branchwise value function that is Birkhoff
    summed along orbits.  The singular kinds weight an orbit segment by the
    extreme singular values of the derivative product: "singular_upper"
    contributes -weight * log of the largest one (a subadditive family),
    "singular_lower" uses the smallest one (superadditive).  On interval
    maps the two coincide.
    """

    def __init__(self, kind, value_fn=None, weight=0.0, name="", symbol_free=False):
        if kind not in _KINDS:
            raise BadSpec("unknown potential kind %r" % (kind,))
        if kind == "additive" and value_fn is None:
            raise BadSpec("additive potentials need a value function")
        self.kind = kind
        self.value_fn = value_fn
        self.weight = float(weight)
        self.name = name or kind
        self.symbol_free = bool(symbol_free)

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls):
        return cls.constant(0.0)

    @classmethod
    def constant(cls, c):
        c = float(c)

        def value_fn(mapping, symbol, pts):
            pts = np.asarray(pts, dtype=float)
            rows = pts.shape[0] if pts.ndim else 1
            return np.full(rows, c)

        return cls("additive", value_fn, name="constant(%g)" % c, symbol_free=True)

    @classmethod
    def from_function(cls, func, name="function"):
        """Pointwise potential; func must be vectorized over point arrays."""

        def value_fn(mapping, symbol, pts):
            return np.asarray(func(pts), dtype=float)

        return cls("additive", value_fn, name=name, symbol_free=True)

    @classmethod
    def geometric(cls, t):
        """-t log |f'|, the conformal dimension potential (1d maps)."""
        t = float(t)

        def value_fn(mapping, symbol, pts):
            return -t * np.log(mapping.branches[symbol].deriv(np.asarray(pts, dtype=float)))

        return cls("additive", value_fn, weight=t, name="geometric(%g)" % t)

    @classmethod
    def singular_upper(cls, t):
        return cls("singular_upper", weight=t, name="singular_upper(%g)" % float(t))

    @classmethod
    def singular_lower(cls, t):
        return cls("singular_lower", weight=t, name="singular_lower(%g)" % float(t))

    # -- evaluation -----------------------------------------------------

    def fold_fn(self, mapping):
        """Branchwise value function for CylinderSet.birkhoff."""
        if self.kind == "additive":
            return lambda s, pts: self.value_fn(mapping, s, pts)
        if mapping.dim != 1:
            raise BadSpec("singular potentials fold pointwise only on interval maps")
        t = self.weight
        return lambda s, pts: -t * np.log(mapping.branches[s].deriv(np.asarray(pts, dtype=float)))

    def pointwise(self, mapping, pts):
        """Single step values at arbitrary points of the map's domain."""
        if self.kind != "additive":
            raise BadSpec("pointwise evaluation needs an additive potential")
        pts = np.asarray(pts, dtype=float)
        if self.symbol_free:
            return self.value_fn(mapping, None, pts)
        rows = pts.shape[0]
        out = np.empty(rows)
        for i in range(rows):
            x = pts[i]
            s = mapping.symbol(x)
            out[i] = float(self.value_fn(mapping, s, np.asarray([x], dtype=float))[0])
        return out

    def orbit_value(self, mapping, x, length):
        """Accumulated value of the potential over an orbit segment."""
        if self.kind == "additive":
            pts, syms = dyn.orbit(mapping, x, length)
            total = 0.0
            for p, s in zip(pts, syms):
                total += float(self.value_fn(mapping, s, np.asarray([p], dtype=float))[0])
            return total
        cp = dyn.cocycle(mapping, x, length)
        val = cp.log_norm if self.kind == "singular_upper" else cp.log_conorm
        return -self.weight * val


@dataclass(frozen=True)
class PressureEstimate:
    """Finite depth pressure value with its refinement history."""

    value: float
    depth: int
    separation: float
    per_depth: tuple
    extrapolated: float
    residual: float
    advisory: str = ""


@dataclass(frozen=True)
class SeparatedSet:
    points: np.ndarray
    epsilon: float
    depth: int

    @property
    def count(self):
        return len(self.points)


def _resolve_epsilon(mapping, epsilon):
    delta = mapping.separation_threshold
    if epsilon is None:
        scale = min(delta, mapping.diam)
        return 0.5 * scale if math.isfinite(scale) else 0.5 * mapping.diam
    eps = float(epsilon)
    if eps <= 0.0:
        raise BadSpec("separation scale must be positive")
    if eps >= delta:
        raise EpsilonTooLarge(
            "scale %g is not below the separation threshold %g" % (eps, delta))
    return eps


def separated_set(mapping, depth, epsilon=None):
    """Representatives of all depth n cylinders, one per word.

    Any two of them are (depth, eps) separated for the resolved eps: the
    orbits of two representatives disagreeing last at position i either end
    on two distinct branch centers or pass through two different inverse
    branches applied to one common point.
    """
    eps = _resolve_epsilon(mapping, epsilon)
    cyl = CylinderSet(mapping, depth)
    return SeparatedSet(points=cyl.leaves.points.copy(), epsilon=eps, depth=depth)


def _singular_log(mapping, potential, depth):
    """log of the singular value weight shared by all depth n words (2d)."""
    a_pow = np.linalg.matrix_power(mapping.constant_derivative, depth)
    log_hi, log_lo = dyn.singular_norms(a_pow)
    return log_hi if potential.kind == "singular_upper" else log_lo


def _pressure_series(mapping, potential, depth):
    """P_k for k = 1 .. depth as an array."""
    if potential.kind != "additive" and mapping.dim == 2:
        if mapping.constant_derivative is None:
            raise BadSpec("2d singular pressure needs a constant derivative")
        out = np.empty(depth)
        for k in range(1, depth + 1):
            out[k - 1] = (math.log(mapping.count_words(k))
                          - potential.weight * _singular_log(mapping, potential, k)) / k
        return out
    cyl = CylinderSet(mapping, depth)
    sums = cyl.birkhoff(potential.fold_fn(mapping))
    return np.array([logsumexp(sums[k]) / (k + 1) for k in range(depth)])


def pressure_additive(mapping, potential, depth, epsilon=None):
    """Finite depth pressure over the canonical separated set."""
    _resolve_epsilon(mapping, epsilon)
    if potential.kind != "additive" and mapping.dim == 2:
        if mapping.constant_derivative is None:
            raise BadSpec("2d singular pressure needs a constant derivative")
        return (math.log(mapping.count_words(depth))
                - potential.weight * _singular_log(mapping, potential, depth)) / depth
    cyl = CylinderSet(mapping, depth)
    sums = cyl.birkhoff(potential.fold_fn(mapping))
    return logsumexp(sums[-1]) / depth


def pressure_limit(mapping, potential, tol=1e-3, max_depth=16, epsilon=None):
    """Depth refined pressure with Richardson extrapolation.

    Depth doubles until either the raw increment or the change of the
    extrapolated value drops below tol.  The leading finite depth error is
    of order 1/depth, so 2 P(2n) - P(n) cancels it.
    """
    eps = _resolve_epsilon(mapping, epsilon)
    history = []
    extraps = []
    depth = 2
    prev = None
    while depth <= max_depth:
        value = pressure_additive(mapping, potential, depth, epsilon)
        history.append((depth, value))
        if prev is not None:
            extraps.append(2.0 * value - prev)
            raw_step = abs(value - prev)
            extrap_step = (abs(extraps[-1] - extraps[-2])
                           if len(extraps) >= 2 else math.inf)
            if raw_step <= tol or extrap_step <= tol:
                return PressureEstimate(value=extraps[-1], depth=depth,
                                        separation=eps,
                                        per_depth=tuple(history),
                                        extrapolated=extraps[-1],
                                        residual=min(raw_step, extrap_step))
        prev = value
        depth *= 2
    partial = PressureEstimate(
        value=extraps[-1] if extraps else (history[-1][1] if history else math.nan),
        depth=history[-1][0] if history else 0,
        separation=eps,
        per_depth=tuple(history),
        extrapolated=extraps[-1] if extraps else math.nan,
        residual=abs(extraps[-1] - extraps[-2]) if len(extraps) >= 2 else math.nan,
        advisory="depth limit reached before tolerance")
    raise NoConvergence("pressure did not settle within depth %d" % max_depth,
                        estimate=partial)


def pressure_subadditive(mapping, potential, depth=8, epsilon=None):
    """Pressure of a singular value potential at doubling depths.

    The weight of a word is the extreme singular value of the derivative
    product along its representative orbit; on interval maps this folds
    exactly, on linear torus maps it is a closed form.
    """
    if potential.kind == "additive":
        raise BadSpec("use pressure_additive for additive potentials")
    eps = _resolve_epsilon(mapping, epsilon)
    series = _pressure_series(mapping, potential, depth)
    depths = []
    d = 1
    while d <= depth:
        depths.append(d)
        d *= 2
    if depths[-1] != depth:
        depths.append(depth)
    history = tuple((k, float(series[k - 1])) for k in depths)
    value = history[-1][1]
    prev = history[-2][1] if len(history) >= 2 else math.nan
    advisory = ""
    if mapping.dim == 2:
        log_hi, log_lo = dyn.singular_norms(mapping.constant_derivative)
        if log_hi - log_lo > 1e-6:
            advisory = ("singular spectrum is split; upper and lower "
                        "pressures bound the limit from two sides")
    extrap = 2.0 * value - prev if len(history) >= 2 else math.nan
    residual = abs(value - prev) if len(history) >= 2 else math.nan
    return PressureEstimate(value=value, depth=depth, separation=eps,
                            per_depth=history, extrapolated=extrap,
                            residual=residual, advisory=advisory)


def iterated_singular_pressure(mapping, t, k, budget=16, kind="upper"):
    """Pressure of the k-step singular potential, normalized per base step.

    Words of the k-fold composition with inner length budget/k are exactly
    the base words of length budget, and on interval maps the k-step log
    derivative telescopes, so the value is k-invariant there by the chain
    rule.  On linear torus maps the k-step weight uses the singular values
    of the k-th matrix power.
    """
    t = float(t)
    k = int(k)
    if k < 1:
        raise BadSpec("iteration order must be positive")
    if budget % k != 0:
        raise BadSpec("budget %d is not divisible by k=%d" % (budget, k))
    n_inner = budget // k
    if n_inner < 1:
        raise BadSpec("budget too small for k=%d" % k)
    if mapping.dim == 1:
        cyl = CylinderSet(mapping, budget)
        sums = cyl.log_derivative_sums()
        return logsumexp(-t * sums[-1]) / budget
    a = mapping.constant_derivative
    if a is None:
        raise BadSpec("iterated pressure on the torus needs a constant derivative")
    a_pow = np.linalg.matrix_power(a, k)
    log_hi, log_lo = dyn.singular_norms(a_pow)
    log_sigma = log_hi if kind == "upper" else log_lo
    return math.log(mapping.count_words(budget)) / budget - (t / k) * log_sigma


def transfer_pressure(mapping, potential, block_length, tol=1e-10, max_iter=500):
    """Pressure from the spectral radius of the block weighted transfer matrix.

    States are admissible words of the block length; a word v may follow u
    when the transition from the last symbol of u to the first symbol of v
    is allowed, and the weight of u is exp of its accumulated potential.
    Power iteration with Collatz-Wielandt brackets gives the spectral
    radius; paths of this graph biject with admissible words, so on full
    shifts the value is exact at every block length.
    """
    count = mapping.count_words(block_length)
    if count > TRANSFER_CAP:
        raise MatrixTooLarge("block transfer needs %d states, cap is %d"
                             % (int(count), TRANSFER_CAP))
    cyl = CylinderSet(mapping, block_length, cap=TRANSFER_CAP)
    leaves = cyl.leaves
    if potential.kind != "additive" and mapping.dim == 2:
        s_vals = np.full(len(leaves.first),
                         -potential.weight * _singular_log(mapping, potential, block_length))
    else:
        s_vals = cyl.birkhoff(potential.fold_fn(mapping))[-1]
    shift = float(s_vals.max())
    weights = np.exp(s_vals - shift)
    adj = mapping.adjacency_matrix
    n_sym = mapping.n_symbols
    first = leaves.first
    last = leaves.last
    x = np.ones(len(weights))
    lam_lo = lam_hi = math.nan
    for _ in range(max_iter):
        by_first = np.bincount(first, weights=x, minlength=n_sym)
        reachable = adj @ by_first
        y = weights * reachable[last]
        ratio = y / x
        lam_lo = float(ratio.min())
        lam_hi = float(ratio.max())
        if lam_hi - lam_lo <= tol * max(1.0, abs(lam_hi)):
            return (math.log(0.5 * (lam_lo + lam_hi)) + shift) / block_length
        x = y / y.sum()
    estimate = (math.log(0.5 * (lam_lo + lam_hi)) + shift) / block_length
    raise NoConvergence("transfer spectral radius bracket [%g, %g] did not close"
                        % (lam_lo, lam_hi), estimate=estimate)


def variational_gap(mapping, potential, word, depth=12, epsilon=None):
    """Pressure minus the orbit average of the potential on a closed word.

    The orbit measure of a periodic point has zero entropy contribution
    here, so the gap must be nonnegative up to the finite depth error of
    the pressure term.
    """
    from .lyapunov import periodic_point

    word = mapping.check_word(word)
    if not mapping.adjacency[word[-1]][word[0]]:
        raise InadmissibleWord("word does not close up: %d -> %d forbidden"
                               % (word[-1], word[0]))
    p = len(word)
    cycle = [periodic_point(mapping, word[j:] + word[:j]) for j in range(p)]
    if potential.kind == "additive":
        total = 0.0
        for j in range(p):
            total += float(potential.value_fn(
                mapping, word[j], np.asarray([cycle[j]], dtype=float))[0])
    elif mapping.dim == 1:
        total = 0.0
        for j in range(p):
            slope = float(mapping.branches[word[j]].deriv(float(cycle[j])))
            total -= potential.weight * math.log(slope)
    else:
        total = -potential.weight * _singular_log(mapping, potential, p)
    orbit_average = total / p
    value = pressure_additive(mapping, potential, depth, epsilon)
    return value - orbit_average


@dataclass(frozen=True)
class ConjugacyReport:
    """Pressure comparison across a factor map."""

    pressure_target: float
    pressure_pulled: float
    slack: float
    residual: float


def conjugate_pressure_check(map_src, map_dst, phi, potential, depth=10,
                             tol=1e-8, sample_cap=2048):
    """Compare pressure of a potential with its pullback across a factor map.

    ``phi`` must intertwine the two maps: phi(f_src x) = f_dst(phi x) on the
    source repeller.  The equivariance defect is measured on the canonical
    depth sample; beyond tol the check refuses.  For a genuine factor map
    the pulled back pressure dominates the target pressure, with equality
    under a bijective change of coordinates.
    """
    if potential.kind != "additive":
        raise BadSpec("conjugacy comparison is defined for additive potentials")
    cyl = CylinderSet(map_src, depth)
    pts = cyl.leaves.points
    if len(pts) > sample_cap:
        idx = np.linspace(0, len(pts) - 1, sample_cap).astype(int)
        pts = pts[idx]
    residual = 0.0
    for x in pts:
        fx = map_src.apply(x)
        left = phi(fx)
        right = map_dst.apply(phi(x))
        residual = max(residual, map_dst.distance(left, right))
    if residual > tol:
        raise NotSemiConjugate(
            "equivariance defect %.3g exceeds tolerance %.3g" % (residual, tol))

    def pulled_fn(mapping, symbol, pts_arr):
        pts_arr = np.asarray(pts_arr, dtype=float)
        images = np.asarray([phi(x) for x in pts_arr], dtype=float)
        return potential.pointwise(map_dst, images)

    pulled = Potential("additive", pulled_fn,
                       name="pullback(%s)" % potential.name, symbol_free=True)
    p_target = pressure_additive(map_dst, potential, depth)
    p_pulled = pressure_additive(map_src, pulled, depth)
    return ConjugacyReport(pressure_target=p_target,
                           pressure_pulled=p_pulled,
                           slack=p_pulled - p_target,
                           residual=residual)
