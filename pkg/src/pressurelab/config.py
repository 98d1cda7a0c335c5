"""Experiment configuration: flat key=value files plus flag overrides.

A config is a handful of typed fields with mode dependent defaults.  The
same dictionary shape feeds the content hash, so two configs that resolve
to the same effective values always hash identically, regardless of which
file, flag, or default supplied each field.
"""

from __future__ import annotations

import argparse
import hashlib
from dataclasses import dataclass, replace

from . import dynamics as dyn
from .errors import ConfigError, PressureLabError
from .pressure import Potential

MODES = ("dimension", "pressure", "lyapunov", "stability", "entropy",
         "checks")

_MODE_DEPTH = {"dimension": 12, "pressure": 10, "lyapunov": 12,
               "stability": 16, "entropy": 12, "checks": 10}
_MODE_TOL = {"dimension": 1e-9, "pressure": 1e-9, "lyapunov": 1e-9,
             "stability": 0.02, "entropy": 1e-9, "checks": 1e-9}

_MAP_FACTORIES = {
    "doubling": dyn.doubling_map,
    "cookie_cutter": dyn.cookie_cutter,
    "cookie": dyn.cookie_cutter,
    "circle": dyn.circle_map,
    "circle_map": dyn.circle_map,
    "toral": dyn.toral_map,
    "toral_map": dyn.toral_map,
    "toral_conformal": dyn.toral_conformal_map,
    "golden_mean": dyn.golden_mean_map,
    "golden": dyn.golden_mean_map,
}

_POTENTIALS = {
    "zero": Potential.zero,
    "constant": Potential.constant,
    "geometric": Potential.geometric,
    "singular_upper": Potential.singular_upper,
    "singular_lower": Potential.singular_lower,
}


def _parse_call(text, what):
    """Split "name(a,b)" into (name, args); bare names take no args."""
    text = text.strip()
    if "(" in text:
        if not text.endswith(")"):
            raise ConfigError("malformed %s spec %r" % (what, text))
        name, inner = text[:-1].split("(", 1)
        args = []
        for part in inner.split(","):
            part = part.strip()
            if not part:
                continue
            try:
                args.append(int(part))
            except ValueError:
                try:
                    args.append(float(part))
                except ValueError:
                    raise ConfigError("bad numeric argument %r in %s spec %r"
                                      % (part, what, text))
        return name.strip(), tuple(args)
    return text, ()


def build_map(spec):
    """Construct the named built-in map, e.g. "cookie_cutter(3,3)"."""
    name, args = _parse_call(spec, "map")
    factory = _MAP_FACTORIES.get(name)
    if factory is None:
        raise ConfigError("unknown map family %r; known: %s"
                          % (name, ", ".join(sorted(set(_MAP_FACTORIES)))))
    try:
        return factory(*args)
    except TypeError:
        raise ConfigError("wrong number of arguments for map %r" % spec)


def build_potential(spec):
    """Construct the named potential, e.g. "geometric(1.0)" or "zero"."""
    name, args = _parse_call(spec, "potential")
    factory = _POTENTIALS.get(name)
    if factory is None:
        raise ConfigError("unknown potential %r; known: %s"
                          % (name, ", ".join(sorted(_POTENTIALS))))
    try:
        return factory(*args)
    except TypeError:
        raise ConfigError("wrong number of arguments for potential %r" % spec)


def family_shape(spec):
    """Perturbation family (kind, params) behind a map spec.

    Only interval families with stable branch combinatorics support random
    perturbation: the cookie kinds and the circle kinds (the doubling map
    is the degree 2 circle map with a flat lift).
    """
    name, args = _parse_call(spec, "map")
    if name in ("cookie_cutter", "cookie"):
        params = args if args else (3.0, 3.0)
        if len(params) != 2:
            raise ConfigError("cookie family takes two slopes")
        return "cookie", tuple(float(v) for v in params)
    if name in ("circle", "circle_map"):
        if not args:
            raise ConfigError("circle family needs a degree")
        degree = args[0]
        amp = float(args[1]) if len(args) > 1 else 0.0
        return "circle", (int(degree), amp)
    if name == "doubling":
        return "circle", (2, 0.0)
    raise ConfigError("map %r has no random perturbation family" % spec)


_SCHEMA = {
    "mode": str,
    "map": str,
    "potential": str,
    "depth": int,
    "tol": float,
    "eps_schedule": "floats",
    "seeds": int,
    "seed": int,
    "out": str,
    "workers": int,
    "epsilon": float,
    "letters": int,
    "conj_depth": int,
    "orbit_word": "ints",
}


def _coerce(key, raw):
    kind = _SCHEMA[key]
    try:
        if kind is str:
            return str(raw)
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        parts = [p for p in str(raw).replace(";", ",").split(",") if p.strip()]
        if kind == "floats":
            return tuple(float(p) for p in parts)
        return tuple(int(p) for p in parts)
    except ValueError:
        raise ConfigError("bad value %r for key %r" % (raw, key))


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment: what to compute, at what budget, and where to put it.

    depth and tol of 0 mean "use the mode default"; epsilon applies to the
    single noise level modes (entropy), while eps_schedule drives the
    stability sweep.  conj_depth of 0 lets the experiment match the
    conjugacy truncation error to its tolerance.
    """

    mode: str = "dimension"
    map: str = "cookie_cutter(3,3)"
    potential: str = "zero"
    depth: int = 0
    tol: float = 0.0
    eps_schedule: tuple = (0.2, 0.1, 0.05, 0.025)
    seeds: int = 16
    seed: int = 0
    out: str = "pressurelab_out"
    workers: int = 1
    epsilon: float = 0.0
    letters: int = 2
    conj_depth: int = 0
    orbit_word: tuple = (0, 1)

    def resolved(self):
        """Concrete copy with mode defaults substituted for 0 sentinels."""
        cfg = self
        if cfg.mode not in MODES:
            raise ConfigError("unknown mode %r; known: %s"
                              % (cfg.mode, ", ".join(MODES)))
        if cfg.depth == 0:
            cfg = replace(cfg, depth=_MODE_DEPTH[cfg.mode])
        if cfg.tol == 0.0:
            cfg = replace(cfg, tol=_MODE_TOL[cfg.mode])
        cfg.validate()
        return cfg

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError("unknown mode %r; known: %s"
                              % (self.mode, ", ".join(MODES)))
        if self.depth < 1:
            raise ConfigError("depth must be positive")
        if self.tol <= 0.0:
            raise ConfigError("tol must be positive")
        if self.seeds < 1:
            raise ConfigError("seeds must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        if self.letters < 1:
            raise ConfigError("letters must be positive")
        if self.epsilon < 0.0:
            raise ConfigError("epsilon must not be negative")
        if self.conj_depth < 0:
            raise ConfigError("conj_depth must not be negative")
        if any(e < 0.0 for e in self.eps_schedule):
            raise ConfigError("eps_schedule entries must not be negative")
        if not self.out:
            raise ConfigError("out directory must be set")
        try:
            build_map(self.map)
        except PressureLabError as exc:
            # the map family must exist; an out-of-range parameter is a
            # computation error surfaced later, not a config error
            if isinstance(exc, ConfigError):
                raise
        if self.mode == "pressure":
            build_potential(self.potential)
        if self.mode in ("stability", "entropy"):
            family_shape(self.map)
        if self.mode == "lyapunov" and not self.orbit_word:
            raise ConfigError("lyapunov mode needs an orbit_word")

    # -- identity ---------------------------------------------------------

    def canonical(self):
        """Stable text form of the content fields; feeds the config hash.

        The output directory and worker count are execution details with
        no effect on results (worker pools only reorder independent
        computations), so they stay outside the hash.
        """
        items = []
        for key in sorted(set(_SCHEMA) - {"out", "workers"}):
            val = getattr(self, key)
            if isinstance(val, tuple):
                text = ",".join("%r" % v for v in val)
            elif isinstance(val, float):
                text = "%r" % val
            else:
                text = str(val)
            items.append("%s=%s" % (key, text))
        return "\n".join(items)

    def config_hash(self):
        return hashlib.sha256(self.canonical().encode()).hexdigest()

    # -- builders -----------------------------------------------------------

    def build_map(self):
        return build_map(self.map)

    def build_potential(self):
        return build_potential(self.potential)

    def family_shape(self):
        return family_shape(self.map)


def read_config_file(path):
    """Parse a flat key=value file; # starts a comment, blanks ignored."""
    values = {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError("cannot read config file %s: %s" % (path, exc))
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise ConfigError("%s:%d: expected key=value, got %r"
                              % (path, lineno, text))
        key, raw = text.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _SCHEMA:
            raise ConfigError("%s:%d: unknown key %r" % (path, lineno, key))
        values[key] = _coerce(key, raw.strip())
    return values


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pressurelab",
        description="Batch experiments on expanding repellers: dimension "
                    "and pressure computations, Lyapunov exponents, random "
                    "perturbation stability sweeps, and invariant checks.")
    parser.add_argument("--config", metavar="PATH",
                        help="flat key=value config file")
    parser.add_argument("--mode", choices=MODES, help="experiment mode")
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--seed", type=int, metavar="N", help="base seed")
    parser.add_argument("--workers", type=int, metavar="K",
                        help="worker pool size")
    parser.add_argument("--tol", type=float, metavar="X", help="tolerance")
    parser.add_argument("--eps-schedule", metavar="LIST",
                        help="comma separated noise levels, largest first")
    parser.add_argument("overrides", nargs="*", metavar="KEY=VALUE",
                        help="extra config overrides, e.g. map=doubling")
    return parser


def parse_args(argv=None):
    """Config from defaults, file, key=value overrides, then flags."""
    args = _build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(read_config_file(args.config))
    for item in args.overrides:
        if "=" not in item:
            raise ConfigError("override %r is not KEY=VALUE" % item)
        key, raw = item.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _SCHEMA:
            raise ConfigError("unknown config key %r" % key)
        values[key] = _coerce(key, raw.strip())
    if args.mode is not None:
        values["mode"] = args.mode
    if args.out is not None:
        values["out"] = args.out
    if args.seed is not None:
        values["seed"] = args.seed
    if args.workers is not None:
        values["workers"] = args.workers
    if args.tol is not None:
        values["tol"] = args.tol
    if args.eps_schedule is not None:
        values["eps_schedule"] = _coerce("eps_schedule", args.eps_schedule)
    return ExperimentConfig(**values).resolved()
