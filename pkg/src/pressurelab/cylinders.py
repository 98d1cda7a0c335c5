"""Vectorized enumeration of cylinder representatives.

A depth n cylinder is an admissible word of n symbols.  The walker stores
one representative point per word, level by level, sharing suffixes: the
representative of (a, w) is the inverse branch of a applied to the
representative of w.  The forward orbit of a representative climbs the
parent chain, so Birkhoff sums fold level by level and carry no forward
iteration error.

Set the PRESSURELAB_CACHE environment variable to a directory to memoize
walkers for serializable maps across runs.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .errors import BadSpec, MatrixTooLarge

WORD_CAP = 1 << 20


@dataclass
class _Level:
    points: np.ndarray
    first: np.ndarray
    last: np.ndarray
    parent: np.ndarray
    blocks: tuple


def build_levels(maps, cap=WORD_CAP):
    """Level arrays for a chain of maps, one map per word position.

    ``maps[i]`` acts at position i, so level k (words of length k) seeds at
    the branch centers of ``maps[-1]`` and extends by the inverse branches
    of the map one position earlier.  All maps must share one transition
    matrix.
    """
    depth = len(maps)
    last = maps[-1]
    for mp in maps:
        if mp.adjacency != last.adjacency:
            raise BadSpec("maps in a chain must share the transition matrix")
    n_sym = last.n_symbols
    adj = np.array(last.adjacency, dtype=np.int64)
    levels = [
        _Level(points=np.array(last.centers, dtype=float),
               first=np.arange(n_sym, dtype=np.int32),
               last=np.arange(n_sym, dtype=np.int32),
               parent=np.full(n_sym, -1, dtype=np.int64),
               blocks=tuple((s, s, s + 1) for s in range(n_sym)))
    ]
    for k in range(1, depth):
        mp = maps[depth - 1 - k]
        prev = levels[-1]
        counts = np.bincount(prev.first, minlength=n_sym)
        total = int((adj @ counts).sum())
        if total > cap:
            raise MatrixTooLarge("level %d needs %d words, cap is %d"
                                 % (k + 1, total, cap))
        pts, first, lasts, parent, blocks = [], [], [], [], []
        start = 0
        for a in range(n_sym):
            idx = np.nonzero(adj[a, prev.first] == 1)[0]
            if idx.size == 0:
                continue
            pts.append(mp.branches[a].inv(prev.points[idx]))
            first.append(np.full(idx.size, a, dtype=np.int32))
            lasts.append(prev.last[idx])
            parent.append(idx.astype(np.int64))
            blocks.append((a, start, start + idx.size))
            start += idx.size
        levels.append(_Level(points=np.concatenate(pts),
                             first=np.concatenate(first),
                             last=np.concatenate(lasts),
                             parent=np.concatenate(parent),
                             blocks=tuple(blocks)))
    return levels


class CylinderSet:
    """All admissible words of a fixed depth with representative points.

    Entries at every level are ordered lexicographically by word, so runs
    are reproducible and each level is grouped into contiguous blocks by
    leading symbol.
    """

    def __init__(self, mapping, depth, cap=WORD_CAP):
        if depth < 1:
            raise BadSpec("cylinder depth must be positive")
        self.mapping = mapping
        self.depth = int(depth)
        self.cap = int(cap)
        self._logd = None
        levels = self._load()
        if levels is None:
            levels = self._build()
            self._save(levels)
        self.levels = levels

    # -- construction ---------------------------------------------------

    def _build(self):
        return build_levels([self.mapping] * self.depth, self.cap)

    # -- queries ----------------------------------------------------------

    @property
    def leaves(self):
        return self.levels[-1]

    @property
    def leaf_count(self):
        return len(self.leaves.first)

    def word(self, index, length=None):
        """Reconstruct the word behind an entry of the deepest level."""
        length = self.depth if length is None else int(length)
        syms = []
        li = length - 1
        i = int(index)
        while li >= 0:
            lvl = self.levels[li]
            syms.append(int(lvl.first[i]))
            i = int(lvl.parent[i])
            li -= 1
        return tuple(syms)

    def orbit_points(self, index):
        """Exact forward orbit of a leaf representative (one point per step)."""
        pts = []
        li = self.depth - 1
        i = int(index)
        while li >= 0:
            lvl = self.levels[li]
            pts.append(lvl.points[i])
            i = int(lvl.parent[i])
            li -= 1
        return np.array(pts)

    def birkhoff(self, value_fn):
        """Birkhoff sums of a branchwise function along representative orbits.

        ``value_fn(symbol, points)`` must return one value per point; it is
        called on contiguous blocks sharing a leading symbol.  Returns one
        array per level: entry k holds the depth k+1 sums for every word of
        that length, aligned with the level arrays.
        """
        sums = []
        for lvl in self.levels:
            vals = np.empty(len(lvl.first), dtype=float)
            for s, start, stop in lvl.blocks:
                vals[start:stop] = value_fn(s, lvl.points[start:stop])
            if sums:
                vals = vals + sums[-1][lvl.parent]
            sums.append(vals)
        return sums

    def log_derivative_sums(self):
        """Birkhoff sums of log f' along representative orbits (1d only)."""
        if self.mapping.dim != 1:
            raise BadSpec("pointwise log derivative needs a one dimensional map")
        if self._logd is None:
            branches = self.mapping.branches
            self._logd = self.birkhoff(
                lambda s, pts: np.log(branches[s].deriv(pts)))
        return self._logd

    # -- cache ------------------------------------------------------------

    def _cache_path(self):
        root = os.environ.get("PRESSURELAB_CACHE")
        if not root or not self.mapping.cacheable:
            return None
        text = "%s|depth=%d" % (self.mapping.describe(), self.depth)
        key = hashlib.sha256(text.encode()).hexdigest()[:32]
        return os.path.join(root, "cyl_%s.npz" % key)

    def _load(self):
        path = self._cache_path()
        if not path or not os.path.exists(path):
            return None
        try:
            levels = []
            with np.load(path) as data:
                for k in range(self.depth):
                    blocks = tuple((int(a), int(b), int(c))
                                   for a, b, c in data["blk%d" % k])
                    levels.append(_Level(points=data["pts%d" % k],
                                         first=data["fst%d" % k],
                                         last=data["lst%d" % k],
                                         parent=data["par%d" % k],
                                         blocks=blocks))
            return levels
        except Exception:
            # cache is best effort; fall back to a fresh build
            return None

    def _save(self, levels):
        path = self._cache_path()
        if not path:
            return
        arrays = {}
        for k, lvl in enumerate(levels):
            arrays["pts%d" % k] = lvl.points
            arrays["fst%d" % k] = lvl.first
            arrays["lst%d" % k] = lvl.last
            arrays["par%d" % k] = lvl.parent
            arrays["blk%d" % k] = np.array(lvl.blocks, dtype=np.int64)
        try:
            os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=os.path.dirname(path), suffix=".npz")
            os.close(fd)
            np.savez_compressed(tmp, **arrays)
            os.replace(tmp, path)
        except Exception:
            pass
