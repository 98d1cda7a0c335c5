"""Random perturbations of expanding interval maps over an i.i.d. base.

A realization is a two sided sequence of letters sampled independently
from a finite alphabet.  Each letter names one perturbed map from a fixed
family, and time n composes the maps read off the sequence from position
0 to n - 1.  Perturbed maps keep the branch combinatorics of the
unperturbed map, so cylinder words mean the same thing in every fiber and
symbolic conjugacies exist by construction.

Only interval families are supported.  Their derivative cocycles are
scalar, hence conformal, and the upper and lower singular value routes
through any computation coincide by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import dynamics as dyn
from .bowen import _clamped_root, dimension_report
from .cylinders import WORD_CAP, CylinderSet, build_levels
from .errors import (BadSpec, HorizonExceeded, PerturbationTooLarge,
                     PressureLabError)
from .pressure import _resolve_epsilon, logsumexp

TWO_PI = 2.0 * math.pi


# -- base process ---------------------------------------------------------

@dataclass(frozen=True)
class BaseSample:
    """One sampled window of the driving letter sequence.

    ``symbols`` covers positions -horizon .. horizon of the realization;
    ``origin`` is the index of position 0 inside the tuple.  Lookups past
    either end raise HorizonExceeded rather than wrapping or padding, so
    every operation must request a window at least as wide as the depth
    it consumes.
    """

    symbols: tuple
    origin: int
    seed: int = -1
    n_letters: int = 0

    def symbol(self, j):
        idx = self.origin + int(j)
        if not 0 <= idx < len(self.symbols):
            raise HorizonExceeded("position %d is outside the sampled window" % j)
        return self.symbols[idx]

    def shifted(self, k=1):
        new = self.origin + int(k)
        if not 0 <= new < len(self.symbols):
            raise HorizonExceeded("shift by %d leaves the sampled window" % k)
        return BaseSample(self.symbols, new, self.seed, self.n_letters)

    @property
    def horizon(self):
        return len(self.symbols) - self.origin - 1


def sample_base(seed, horizon, n_letters=2):
    """Draw i.i.d. uniform letters for positions -horizon .. horizon.

    Forward and backward positions use two generator streams spawned from
    the seed, so the letter at any fixed position never depends on the
    requested horizon.  Operations drawing windows of different widths
    from one seed therefore see one and the same realization.
    """
    if n_letters < 1:
        raise BadSpec("need at least one letter")
    if horizon < 0:
        raise BadSpec("horizon must not be negative")
    fwd_seq, bwd_seq = np.random.SeedSequence(int(seed)).spawn(2)
    fwd = np.random.default_rng(np.random.PCG64(fwd_seq))
    bwd = np.random.default_rng(np.random.PCG64(bwd_seq))
    forward = fwd.integers(0, n_letters, size=int(horizon) + 1)
    backward = bwd.integers(0, n_letters, size=int(horizon))
    symbols = tuple(int(v) for v in backward[::-1]) + tuple(int(v) for v in forward)
    return BaseSample(symbols, int(horizon), int(seed), int(n_letters))


def constant_sample(letter, horizon, n_letters=2):
    """Window holding one letter everywhere; handy for worst case probes."""
    return BaseSample((int(letter),) * (2 * int(horizon) + 1), int(horizon),
                      -1, int(n_letters))


# -- perturbation families ------------------------------------------------

class RandomFamily:
    """Finite family of perturbed maps indexed by base letters.

    Letter coefficients are evenly spaced in [-1, 1].  Kind "circle"
    shifts the lift amplitude by epsilon times the coefficient, so the
    branch maps become x -> degree x + (amp + eps a) sin(2 pi x) mod 1.
    Kind "cookie" scales both branch slopes by 1 + epsilon * coefficient
    and recomputes the branch domains accordingly.  Construction certifies
    a uniform expansion margin: every fiber must keep at least half of the
    unperturbed margin, otherwise PerturbationTooLarge.
    """

    def __init__(self, kind, params, epsilon, n_letters=2):
        self.kind = str(kind)
        self.params = tuple(float(v) for v in params)
        self.epsilon = float(epsilon)
        self.n_letters = int(n_letters)
        if self.epsilon < 0.0:
            raise BadSpec("perturbation size must not be negative")
        if self.n_letters < 1:
            raise BadSpec("need at least one letter")
        if self.n_letters == 1:
            self.coefficients = (0.0,)
        else:
            self.coefficients = tuple(np.linspace(-1.0, 1.0, self.n_letters))
        if self.kind == "cookie":
            if len(self.params) != 2:
                raise BadSpec("cookie family takes two branch slopes")
            self.base_map = dyn.cookie_cutter(*self.params)
        elif self.kind == "circle":
            if not 1 <= len(self.params) <= 2:
                raise BadSpec("circle family takes degree and optional amplitude")
            self.base_map = dyn.circle_map(int(self.params[0]),
                                           self._base_amplitude)
        else:
            raise BadSpec("unknown random family kind %r" % kind)
        self._fibers = {}
        self.certificate = self._certify()
        self.certified_expansion = self.certificate["worst_expansion"]

    @property
    def _base_amplitude(self):
        return self.params[1] if len(self.params) == 2 else 0.0

    def _certify(self):
        reach = self.epsilon * max(abs(c) for c in self.coefficients)
        margin = self.base_map.min_expansion - 1.0
        required = 1.0 + 0.5 * margin
        if self.kind == "circle":
            worst = int(self.params[0]) - TWO_PI * (abs(self._base_amplitude)
                                                    + reach)
        else:
            r_min = min(self.params)
            worst = r_min * (1.0 - reach)
            r1, r2 = (r * (1.0 - reach) for r in self.params)
            if worst > 1.0 and 1.0 / r1 + 1.0 / r2 > 1.0:
                raise PerturbationTooLarge(
                    "slopes %.6g, %.6g let the branch domains overlap" % (r1, r2))
        if worst < required:
            raise PerturbationTooLarge(
                "worst fiber expansion %.6g is below the certified margin %.6g "
                "at epsilon %g" % (worst, required, self.epsilon))
        return {"base_margin": margin, "required_expansion": required,
                "worst_expansion": worst, "reach": reach}

    @property
    def gamma_bound(self):
        """Certified contraction rate valid for every fiber."""
        return 1.0 / self.certified_expansion

    @property
    def holder_budget(self):
        """C1 distance between any fiber and the base, per unit epsilon."""
        reach_unit = max(abs(c) for c in self.coefficients)
        if self.kind == "circle":
            return (1.0 + TWO_PI) * reach_unit
        return 2.0 * max(self.params) * reach_unit

    @property
    def displacement_bound(self):
        """Analytic bound on how far the fiber conjugacy can move a point."""
        reach = self.certificate["reach"]
        if self.kind == "circle":
            delta = reach / self.certified_expansion
        else:
            r_min = min(self.params)
            delta = reach / (r_min * (1.0 - reach)) if reach > 0.0 else 0.0
        return delta / (1.0 - self.gamma_bound)

    @property
    def slope_variation(self):
        """Analytic Lipschitz constant of f' valid for every fiber."""
        if self.kind != "circle":
            return 0.0
        return TWO_PI ** 2 * (abs(self._base_amplitude)
                              + self.certificate["reach"])

    def fiber_map(self, letter):
        letter = int(letter)
        if not 0 <= letter < self.n_letters:
            raise BadSpec("letter %d out of range" % letter)
        if letter not in self._fibers:
            a = self.coefficients[letter]
            if self.kind == "circle":
                fiber = dyn.circle_map(int(self.params[0]),
                                       self._base_amplitude + self.epsilon * a)
            else:
                scale = 1.0 + self.epsilon * a
                fiber = dyn.cookie_cutter(self.params[0] * scale,
                                          self.params[1] * scale)
            if fiber.adjacency != self.base_map.adjacency:
                raise BadSpec("fiber transition matrix drifted from the base")
            self._fibers[letter] = fiber
        return self._fibers[letter]

    def describe(self):
        return "random(kind=%s, params=%s, eps=%g, letters=%d)" % (
            self.kind, ",".join("%g" % v for v in self.params),
            self.epsilon, self.n_letters)


def perturbed_map(family, sample):
    """The fiber map acting at position 0 of the realization."""
    return family.fiber_map(sample.symbol(0))


# -- fiber cylinder chains -------------------------------------------------

class FiberCylinders:
    """Cylinder walker through the position dependent fiber maps.

    Same level structure as CylinderSet, except that extending a level
    applies the inverse branches of the fiber map acting one position
    earlier in the window ``start .. start + depth - 1``.  Leaves are the
    depth n fiber cylinder representatives for that window, enumerated in
    the same lexicographic order as the base walker.
    """

    def __init__(self, family, sample, depth, start=0, cap=WORD_CAP):
        if depth < 1:
            raise BadSpec("fiber chain depth must be positive")
        self.family = family
        self.sample = sample
        self.depth = int(depth)
        self.start = int(start)
        self.maps = [family.fiber_map(sample.symbol(self.start + i))
                     for i in range(self.depth)]
        self.levels = build_levels(self.maps, cap)
        self._logd = None

    @property
    def leaves(self):
        return self.levels[-1]

    @property
    def leaf_count(self):
        return len(self.leaves.first)

    def birkhoff(self, value_fn):
        """Accumulated values along the forward orbits of representatives.

        ``value_fn(mapping, symbol, points)`` is evaluated with the fiber
        map acting at the position of the leading symbol, so sums read the
        potential of the correct fiber at every step.
        """
        sums = []
        for li, lvl in enumerate(self.levels):
            mp = self.maps[self.depth - 1 - li]
            vals = np.empty(len(lvl.first), dtype=float)
            for s, a, b in lvl.blocks:
                vals[a:b] = value_fn(mp, s, lvl.points[a:b])
            if sums:
                vals = vals + sums[-1][lvl.parent]
            sums.append(vals)
        return sums

    def log_derivative_sums(self):
        if self._logd is None:
            self._logd = self.birkhoff(
                lambda mp, s, pts: np.log(
                    mp.branches[s].deriv(np.asarray(pts, dtype=float))))
        return self._logd


def _fiber_value_fn(potential):
    if potential.kind == "additive":
        return lambda mp, s, pts: np.asarray(
            potential.value_fn(mp, s, pts), dtype=float)
    t = potential.weight

    def value_fn(mp, s, pts):
        return -t * np.log(mp.branches[s].deriv(np.asarray(pts, dtype=float)))

    return value_fn


def _require_full_shift(mapping):
    if any(v != 1 for row in mapping.adjacency for v in row):
        raise BadSpec("this check needs a full transition matrix")


# -- symbolic conjugacies ---------------------------------------------------

class FiberConjugacy:
    """Symbolic conjugacy from the unperturbed repeller into one fiber.

    A point is mapped by reading its itinerary under the base map and
    rebuilding a point with the same symbols through the fiber inverse
    branches, innermost first, seeded at the branch domain center of the
    deepest symbol.  Truncating at depth m moves the result by at most
    gamma^m times the diameter.
    """

    def __init__(self, family, sample, depth):
        if depth < 1:
            raise BadSpec("conjugacy depth must be positive")
        self.family = family
        self.sample = sample
        self.depth = int(depth)

    @property
    def error_bound(self):
        return self.family.gamma_bound ** self.depth * self.family.base_map.diam

    def map_word(self, word):
        word = self.family.base_map.check_word(word)
        maps = [self.family.fiber_map(self.sample.symbol(i))
                for i in range(len(word))]
        z = np.asarray([maps[-1].branches[word[-1]].center], dtype=float)
        for i in range(len(word) - 2, -1, -1):
            z = maps[i].branches[word[i]].inv(z)
        return float(z[0])

    def map_point(self, x):
        return self.map_word(dyn.itinerary(self.family.base_map, x, self.depth))

    def shifted(self, k=1):
        return FiberConjugacy(self.family, self.sample.shifted(k), self.depth)


def build_conjugacy(family, sample, depth):
    """Depth m symbolic conjugacy for the realization in the sample."""
    return FiberConjugacy(family, sample, depth)


def fiber_repeller(conj, depth):
    """Conjugacy images of the depth n cylinder representatives.

    For depth up to the conjugacy depth these are exact fiber chain
    points; deeper words are mapped through the truncated evaluator, so
    several words can share one image.
    """
    family, sample = conj.family, conj.sample
    if depth <= conj.depth:
        return FiberCylinders(family, sample, depth).leaves.points.copy()
    _require_full_shift(family.base_map)
    n_sym = family.base_map.n_symbols
    pts = FiberCylinders(family, sample, conj.depth).leaves.points
    idx = np.arange(n_sym ** depth, dtype=np.int64)
    return pts[idx // n_sym ** (depth - conj.depth)].copy()


def conjugacy_displacement(family, sample, depth):
    """Largest distance the depth n conjugacy moves a cylinder point.

    Base and fiber walkers enumerate the same words in the same order, so
    the conjugacy image of every base representative is the fiber
    representative at the same index.
    """
    fiber = FiberCylinders(family, sample, depth)
    base = CylinderSet(family.base_map, depth)
    return float(np.abs(fiber.leaves.points - base.leaves.points).max())


def measure_equivariance(family, sample, depth):
    """Worst defect of (map then conjugate) against (conjugate then shift).

    Both sides are evaluated on every word of length depth + 1 with the
    depth m = depth conjugacy.  The mismatch comes only from the
    truncation seeds, so it must stay below 2 gamma^depth times the
    diameter.  Returns (measured, bound).
    """
    if depth < 2:
        raise BadSpec("equivariance needs depth at least 2")
    _require_full_shift(family.base_map)
    n_sym = family.base_map.n_symbols
    lhs = FiberCylinders(family, sample, depth - 1, start=1)
    rhs = FiberCylinders(family, sample, depth, start=1)
    idx = np.arange(rhs.leaf_count)
    residual = np.abs(lhs.leaves.points[idx // n_sym]
                      - rhs.leaves.points[idx]).max()
    bound = 2.0 * family.gamma_bound ** depth * family.base_map.diam
    return float(residual), float(bound)


# -- averaged pressure and roots --------------------------------------------

@dataclass(frozen=True)
class RandomEstimate:
    value: float
    std_error: float
    per_sample: tuple
    depth: int
    epsilon_sep: float

    @property
    def omega_samples(self):
        return len(self.per_sample)


def _std_error(values):
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def _family_epsilon_sep(family):
    return min(_resolve_epsilon(family.fiber_map(a), None)
               for a in range(family.n_letters))


def _seed_windows(family, seeds, horizon):
    if not seeds:
        raise BadSpec("need at least one base seed")
    return [sample_base(seed, horizon, family.n_letters) for seed in seeds]


def random_pressure(family, potential, seeds, depth=12):
    """Finite depth fiber pressure averaged over base realizations.

    Per realization the value is (1/n) log of the summed exponential of
    the accumulated potential over depth n fiber cylinders; the estimate
    is the mean over the seeded realizations with its sampling spread.
    """
    vfn = _fiber_value_fn(potential)
    vals = []
    for smp in _seed_windows(family, seeds, depth):
        chain = FiberCylinders(family, smp, depth)
        vals.append(logsumexp(chain.birkhoff(vfn)[-1]) / depth)
    return RandomEstimate(value=float(np.mean(vals)), std_error=_std_error(vals),
                          per_sample=tuple(vals), depth=int(depth),
                          epsilon_sep=_family_epsilon_sep(family))


@dataclass(frozen=True)
class RandomRoots:
    t_root: float
    s_root: float
    std_error: float
    per_sample: tuple
    depth: int


def random_bowen_roots(family, seeds, depth=16, tol=1e-10):
    """Roots of the averaged fiber pressure, with per realization spread.

    t_root solves mean pressure = 0 for the potential -t log of the
    derivative norm along fibers, s_root for the conorm.  Interval fibers
    are conformal, so the two roots coincide by construction and the
    sandwich t_root <= s_root is tight.
    """
    logds = [FiberCylinders(family, smp, depth).log_derivative_sums()[-1]
             for smp in _seed_windows(family, seeds, depth)]

    def mean_pressure(t):
        return float(np.mean([logsumexp(-t * sd) for sd in logds])) / depth

    root = _clamped_root(mean_pressure, 1.0, tol)
    per = tuple(_clamped_root(lambda t, sd=sd: logsumexp(-t * sd) / depth,
                              1.0, tol)
                for sd in logds)
    return RandomRoots(t_root=float(root), s_root=float(root),
                       std_error=_std_error(per), per_sample=per,
                       depth=int(depth))


def random_entropy(family, seeds, depth=12):
    """Averaged zero potential pressure; letters never change word counts."""
    from .pressure import Potential
    return random_pressure(family, Potential.zero(), seeds, depth).value


def expansivity_min_growth(family, sample, depth=8):
    """Smallest per step log expansion over depth n fiber words."""
    chain = FiberCylinders(family, sample, depth)
    return float(chain.log_derivative_sums()[-1].min()) / depth


# -- distortion --------------------------------------------------------------

@dataclass(frozen=True)
class DistortionReport:
    k0: float
    k_value: float
    worst_violation: float
    slope_variation: float
    radius: float
    alpha: float
    pairs: int


def distortion_constants(family, sample, sample_pairs=12000, depth=10,
                         alpha=1.0, seed=0):
    """Uniform two sided distortion inequality for the origin fiber map.

    Sampled pairs x, y of depth n fiber cylinder points must satisfy, in
    both orientations,

        |f'(x)| - K d^alpha <= d(f x, f y) / d(x, y) <= |f'(x)| + K d^alpha

    with d = d(x, y).  k0 is the empirical Holder constant of f' over the
    sampled pairs; K = max(k0, diam / r0, max |f'| / r0^alpha), where the
    locality terms absorb pairs farther apart than the scale r0 (half the
    smallest domain gap, or a quarter of the diameter for gapless maps).
    Circle families use circle distance, so the inequality also covers
    pairs straddling a branch boundary.  worst_violation is the smallest
    slack over all sampled pairs; the inequality holds when it is not
    negative.
    """
    if depth < 2:
        raise BadSpec("distortion sampling needs depth at least 2")
    if sample_pairs < 100:
        raise BadSpec("need at least 100 sample pairs")
    chain = FiberCylinders(family, sample, depth)
    leaves = chain.leaves
    pts = leaves.points
    images = chain.levels[-2].points[leaves.parent]
    mp = chain.maps[0]
    derivs = np.empty(len(pts), dtype=float)
    for s, a, b in leaves.blocks:
        derivs[a:b] = mp.branches[s].deriv(pts[a:b])
    circle = family.kind == "circle"

    def metric(u, v):
        d = np.abs(u - v)
        return np.minimum(d, 1.0 - d) if circle else d

    r0 = 0.25 * mp.diam
    if mp.domain_gaps:
        r0 = min(r0, 0.5 * min(mp.domain_gaps))

    m = len(pts)
    rng = np.random.default_rng(np.random.PCG64(int(seed)))
    extra = max(0, int(sample_pairs) - (m - 1))
    i = np.concatenate([np.arange(m - 1), rng.integers(0, m, size=extra)])
    j = np.concatenate([np.arange(1, m), rng.integers(0, m, size=extra)])
    keep = i != j
    i, j = i[keep], j[keep]
    dx = metric(pts[i], pts[j])
    k0 = float((np.abs(derivs[i] - derivs[j]) / dx ** alpha).max())
    k_val = max(k0, mp.diam / r0, mp.max_expansion / r0 ** alpha)
    ratio = metric(images[i], images[j]) / dx
    pad = k_val * dx ** alpha
    slack = np.minimum(
        np.minimum(derivs[i] + pad - ratio, ratio - derivs[i] + pad),
        np.minimum(derivs[j] + pad - ratio, ratio - derivs[j] + pad))
    return DistortionReport(k0=k0, k_value=float(k_val),
                            worst_violation=float(slack.min()),
                            slope_variation=float(family.slope_variation),
                            radius=float(r0), alpha=float(alpha),
                            pairs=int(len(i)))


# -- pressure transport through the conjugacy --------------------------------

@dataclass(frozen=True)
class RandomConjugacyReport:
    pressure_direct: float
    pressure_pulled: float
    residual: float
    bound: float
    depth: int
    margin: int


def random_conjugacy_pressure_check(family, conj, potential, depth=8,
                                    lipschitz=None):
    """Fiber pressure computed directly and through the conjugacy.

    Both routes score the depth n words extended by the conjugacy margin
    (trailing zero symbols), so every orbit position keeps at least
    margin = conj.depth - n known symbols ahead.  The direct route folds
    the potential along exact fiber chains inside one vectorized walker;
    the pulled route rebuilds every orbit point through the public
    word evaluator of the shifted conjugacies and scores the pulled back
    potential on the unperturbed system's words.  Both land within
    lipschitz * diam * gamma^margin / (1 - gamma) of the ideal depth n
    sum, and the reported residual is their difference, which exposes any
    misalignment between the walker and the evaluator.

    ``lipschitz`` defaults to the potential weight times the worst fiber
    log slope variation, exact for the built in geometric and singular
    potentials.
    """
    base = family.base_map
    _require_full_shift(base)
    if conj.family is not family:
        raise BadSpec("conjugacy was built for a different family")
    margin = conj.depth - int(depth)
    if margin < 1:
        raise BadSpec("conjugacy depth must exceed the word depth")
    n_sym = base.n_symbols
    total = conj.depth
    chain = FiberCylinders(family, conj.sample, total)
    vfn = _fiber_value_fn(potential)
    sums = chain.birkhoff(vfn)

    sel = np.arange(n_sym ** depth, dtype=np.int64) * (n_sym ** margin)
    anc = sel.copy()
    for li in range(total - 1, margin - 1, -1):
        anc = chain.levels[li].parent[anc]
    s_direct = sums[-1][sel] - sums[margin - 1][anc]
    p_direct = logsumexp(s_direct) / depth

    s_pulled = np.zeros(len(sel), dtype=float)
    digits = np.zeros((len(sel), total), dtype=np.int64)
    rem = np.arange(n_sym ** depth, dtype=np.int64)
    for pos in range(depth - 1, -1, -1):
        digits[:, pos] = rem % n_sym
        rem //= n_sym
    for row in range(len(sel)):
        word = tuple(int(v) for v in digits[row])
        for pos in range(depth):
            point = conj.shifted(pos).map_word(word[pos:])
            s_pulled[row] += float(vfn(family.fiber_map(conj.sample.symbol(pos)),
                                       word[pos],
                                       np.asarray([point], dtype=float))[0])
    p_pulled = logsumexp(s_pulled) / depth

    if lipschitz is None:
        lipschitz = abs(potential.weight) * max(
            family.fiber_map(a).log_deriv_lipschitz
            for a in range(family.n_letters))
    gamma = family.gamma_bound
    bound = lipschitz * base.diam * gamma ** margin / (1.0 - gamma)
    return RandomConjugacyReport(pressure_direct=float(p_direct),
                                 pressure_pulled=float(p_pulled),
                                 residual=float(abs(p_direct - p_pulled)),
                                 bound=float(bound), depth=int(depth),
                                 margin=int(margin))


# -- shrinking noise experiment ----------------------------------------------

@dataclass(frozen=True)
class StabilityRow:
    epsilon: float
    t_root: float
    s_root: float
    t_reference: float
    gap_t: float
    gap_s: float
    std_error: float
    depth: int
    seeds: int
    h_sup: float
    equivariance: float
    equivariance_bound: float
    failure: str = ""


@dataclass(frozen=True)
class StabilityResult:
    rows: tuple
    t_reference: float
    certificates: dict


def _conjugacy_depth_for(family, conj_tol):
    """Truncation depth matching the evaluator error to the tolerance."""
    return max(2, math.ceil(math.log(conj_tol)
                            / math.log(family.gamma_bound)))


def stability_experiment(family, schedule=(0.2, 0.1, 0.05, 0.025), depth=16,
                         seeds=16, conj_depth=None, base_seed=0, tol=0.02,
                         conj_tol=1e-4):
    """Root convergence of randomly perturbed repellers as noise shrinks.

    ``family`` fixes the perturbation shape; its own noise level is
    ignored and each schedule entry rebuilds the family at that level.
    The same base seeds (common random numbers) drive every level, so
    root gaps are comparable across the schedule.  Each row carries the
    averaged dimension roots, their distance to the unperturbed root, the
    conjugacy displacement and the measured equivariance defect with its
    certified bound.  Certificates collect per noise level the expansion
    margin, displacement and equivariance budgets, the smallest fiber
    growth rate and distortion constants per letter.  A noise level that
    fails certification produces a row holding the failure message
    instead of aborting the experiment.  When conj_depth is omitted it is
    chosen per level so the truncation error stays below conj_tol.
    """
    t_reference = dimension_report(family.base_map, depth=12).t_root
    seed_list = [base_seed + k for k in range(seeds)]
    rows = []
    certificates = {"reference_root": float(t_reference), "tol": float(tol),
                    "per_epsilon": {}}
    for eps in schedule:
        try:
            fam = RandomFamily(family.kind, family.params, eps,
                               family.n_letters)
            cd = conj_depth or _conjugacy_depth_for(fam, conj_tol)
            horizon = max(depth, cd + 1)
            windows = _seed_windows(fam, seed_list, horizon)
            roots = random_bowen_roots(fam, seed_list, depth=depth)
            h_vals = [conjugacy_displacement(fam, smp, cd)
                      for smp in windows]
            eq_pairs = [measure_equivariance(fam, smp, cd)
                        for smp in windows]
            growth = min(expansivity_min_growth(fam, smp, depth=8)
                         for smp in windows)
            eq_meas = max(v for v, _ in eq_pairs)
            eq_bound = eq_pairs[0][1]
            distortion = {}
            for letter in range(fam.n_letters):
                probe_window = constant_sample(letter, 10, fam.n_letters)
                rep = distortion_constants(fam, probe_window, depth=10)
                distortion[letter] = {"k0": rep.k0, "k_value": rep.k_value,
                                      "radius": rep.radius,
                                      "worst_violation": rep.worst_violation,
                                      "pairs": rep.pairs}
            rows.append(StabilityRow(
                epsilon=float(eps), t_root=roots.t_root, s_root=roots.s_root,
                t_reference=float(t_reference),
                gap_t=abs(roots.t_root - t_reference),
                gap_s=abs(roots.s_root - t_reference),
                std_error=roots.std_error, depth=int(depth),
                seeds=len(seed_list), h_sup=max(h_vals),
                equivariance=eq_meas, equivariance_bound=eq_bound))
            certificates["per_epsilon"][float(eps)] = {
                "expansion_margin": fam.certified_expansion - 1.0,
                "conj_depth": int(cd),
                "horizon": int(horizon),
                "h_sup": max(h_vals),
                "h_sup_analytic": fam.displacement_bound,
                "equivariance": eq_meas,
                "equivariance_bound": eq_bound,
                "min_growth": growth,
                "distortion": distortion,
            }
        except PressureLabError as exc:
            nan = float("nan")
            rows.append(StabilityRow(
                epsilon=float(eps), t_root=nan, s_root=nan,
                t_reference=float(t_reference), gap_t=nan, gap_s=nan,
                std_error=nan, depth=int(depth), seeds=len(seed_list),
                h_sup=nan, equivariance=nan, equivariance_bound=nan,
                failure=str(exc)))
            certificates["per_epsilon"][float(eps)] = {"failure": str(exc)}
    return StabilityResult(rows=tuple(rows), t_reference=float(t_reference),
                           certificates=certificates)
