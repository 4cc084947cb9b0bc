"""Finite metric spaces and sparse l_p vectors.

Everything downstream runs on a :class:`FiniteMetricSpace`: a finite point
list with an exact pairwise distance matrix.  Word metrics are stored as
integers and compared exactly; derived real-valued metrics are compared at
absolute tolerance ``TOL``.  The empty-set distance is ``math.inf``.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import PreconditionFailed

TOL = 1e-9
INF = math.inf

# Full triple scan up to this size; randomized triples above it.
_FULL_TRIANGLE_LIMIT = 500
_SAMPLED_TRIPLES = 100_000


def _tolerance(matrix) -> float:
    return 0.0 if np.issubdtype(matrix.dtype, np.integer) else TOL


class FiniteMetricSpace:
    """Points with an explicit symmetric distance matrix.

    ``center``/``window_radius`` are optional window metadata: spaces cut
    out of an infinite group record where their boundary is, so audits can
    restrict themselves to points with enough margin.
    """

    def __init__(self, points, dist, *, validate=True, center=None, window_radius=None):
        self.points = list(points)
        self._index = {p: i for i, p in enumerate(self.points)}
        if len(self._index) != len(self.points):
            raise PreconditionFailed("duplicate points in metric space")
        d = np.asarray(dist)
        if d.shape != (len(self.points), len(self.points)):
            raise PreconditionFailed("distance matrix shape mismatch")
        self.d = d
        self.center = center
        self.window_radius = window_radius
        if validate:
            self._validate()

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dist_fn(cls, points, fn, *, integral=True, **kw):
        pts = list(points)
        n = len(pts)
        dtype = np.int32 if integral else np.float64
        d = np.zeros((n, n), dtype=dtype)
        for i in range(n):
            for j in range(i + 1, n):
                d[i, j] = d[j, i] = fn(pts[i], pts[j])
        return cls(pts, d, **kw)

    def subspace(self, points, *, validate=False):
        """Restriction to a subset; the metric is inherited, so no re-check."""
        idx = self.indices(points)
        center = self.center if self.center in set(points) else None
        radius = self.window_radius if center is not None else None
        return FiniteMetricSpace(
            [self.points[i] for i in idx],
            self.d[np.ix_(idx, idx)],
            validate=validate,
            center=center,
            window_radius=radius,
        )

    # -- basics ------------------------------------------------------------

    def __len__(self):
        return len(self.points)

    def index(self, point) -> int:
        return self._index[point]

    def indices(self, points):
        return np.array([self._index[p] for p in points], dtype=np.intp)

    def dist(self, x, y):
        value = self.d[self._index[x], self._index[y]]
        return value.item()

    def diameter(self):
        return self.d.max().item() if len(self.points) else 0

    def boundary_margin(self, point):
        """Distance budget to the window edge; inf when no window is recorded."""
        if self.center is None or self.window_radius is None:
            return INF
        return self.window_radius - self.dist(point, self.center)

    def margins(self):
        if self.center is None or self.window_radius is None:
            return np.full(len(self.points), INF)
        return self.window_radius - self.d[:, self.index(self.center)].astype(float)

    # -- validation --------------------------------------------------------

    def _validate(self):
        d = self.d
        if len(self.points) == 0:
            return
        if not np.allclose(d, d.T, atol=TOL, rtol=0):
            raise PreconditionFailed("distance matrix not symmetric")
        if np.any(np.diagonal(d) != 0):
            raise PreconditionFailed("nonzero diagonal")
        if d.min() < 0:
            raise PreconditionFailed("negative distance")
        off = d + np.where(np.eye(len(self.points), dtype=bool), np.inf, 0)
        if len(self.points) > 1 and off.min() <= _tolerance(d):
            raise PreconditionFailed("distinct points at distance 0")
        tol = _tolerance(d)
        n = len(self.points)
        if n <= _FULL_TRIANGLE_LIMIT:
            for k in range(n):
                through_k = d[:, k : k + 1] + d[k : k + 1, :]
                if np.any(d > through_k + tol):
                    i, j = np.argwhere(d > through_k + tol)[0]
                    raise PreconditionFailed(
                        "triangle inequality fails",
                        witness=[str(self.points[i]), str(self.points[k]), str(self.points[j])],
                    )
        else:
            rng = np.random.default_rng(0)
            ijk = rng.integers(0, n, size=(_SAMPLED_TRIPLES, 3))
            lhs = d[ijk[:, 0], ijk[:, 2]]
            rhs = d[ijk[:, 0], ijk[:, 1]] + d[ijk[:, 1], ijk[:, 2]]
            if np.any(lhs > rhs + tol):
                row = ijk[np.argmax(lhs > rhs + tol)]
                raise PreconditionFailed(
                    "triangle inequality fails",
                    witness=[str(self.points[i]) for i in row],
                )

    # -- serialization -----------------------------------------------------

    def to_json(self):
        return {
            "points": [point_label(p) for p in self.points],
            "dist": self.d.tolist(),
        }

    @classmethod
    def from_json(cls, obj):
        d = np.asarray(obj["dist"])
        if np.allclose(d, np.round(d)):
            d = d.astype(np.int64)
        return cls(list(obj["points"]), d)


def point_label(point) -> str:
    """Stable string id for a point; tuples render without spaces."""
    if isinstance(point, tuple):
        return "(" + ",".join(point_label(c) for c in point) + ")"
    return str(point)


# -- set operations ---------------------------------------------------------


def set_distance(space, A, B):
    """min d(a, b) over a in A, b in B; inf when either side is empty."""
    A, B = list(A), list(B)
    if not A or not B:
        return INF
    block = space.d[np.ix_(space.indices(A), space.indices(B))]
    return block.min().item()


def _member_mask(space, A):
    mask = np.zeros(len(space.points), dtype=bool)
    mask[space.indices(list(A))] = True
    return mask


def distances_to_set(space, A):
    """Vector of d(x, A) over the whole space; inf for empty A."""
    idx = space.indices(list(A))
    if idx.size == 0:
        return np.full(len(space.points), INF)
    return space.d[:, idx].min(axis=1).astype(float)


def neighborhood(space, A, r):
    """Closed r-neighborhood: every x with d(x, A) <= r."""
    dist = distances_to_set(space, A)
    keep = dist <= r + _tolerance(space.d)
    return [p for p, k in zip(space.points, keep) if k]

def inner_neighborhood(space, A, r):
    """Points of A at depth > r: A minus the closed r-neighborhood of the complement."""
    mask = _member_mask(space, A)
    comp_dist = distances_to_set(space, [p for p, m in zip(space.points, mask) if not m])
    keep = mask & (comp_dist > r + _tolerance(space.d))
    return [p for p, k in zip(space.points, keep) if k]


# -- sparse l_p vectors ------------------------------------------------------


def _norm_p(p):
    if p in ("inf", "Infinity"):
        return INF
    p = float(p)
    if not (p >= 1):
        raise PreconditionFailed("l_p norms need p >= 1", p=p)
    return p


class SparseVector:
    """Finitely supported function to the reals, tagged with its p."""

    __slots__ = ("entries", "p")

    def __init__(self, entries, p):
        self.p = _norm_p(p)
        self.entries = {k: float(v) for k, v in entries.items() if v != 0}

    def norm(self):
        values = np.array(list(self.entries.values()))
        if values.size == 0:
            return 0.0
        if self.p == INF:
            return float(np.abs(values).max())
        return float((np.abs(values) ** self.p).sum() ** (1.0 / self.p))

    def sub(self, other):
        keys = set(self.entries) | set(other.entries)
        return SparseVector(
            {k: self.entries.get(k, 0.0) - other.entries.get(k, 0.0) for k in keys}, self.p
        )

    def add(self, other):
        keys = set(self.entries) | set(other.entries)
        return SparseVector(
            {k: self.entries.get(k, 0.0) + other.entries.get(k, 0.0) for k in keys}, self.p
        )

    def scale(self, c):
        return SparseVector({k: c * v for k, v in self.entries.items()}, self.p)

    def power(self, exponent, new_p):
        """Coordinatewise |v|^exponent (sign kept for odd use is not needed:
        property-A vectors are nonnegative)."""
        return SparseVector({k: v**exponent for k, v in self.entries.items()}, new_p)

    def support(self):
        return set(self.entries)

    def is_nonnegative(self):
        return all(v >= 0 for v in self.entries.values())

    def to_json(self):
        return {
            "p": "inf" if self.p == INF else self.p,
            "entries": {point_label(k): v for k, v in sorted(self.entries.items(), key=lambda kv: point_label(kv[0]))},
        }

    @classmethod
    def from_json(cls, obj):
        return cls(dict(obj["entries"]), obj["p"])


def lp_distance(u: SparseVector, v: SparseVector, p=None) -> float:
    if p is None:
        if u.p != v.p:
            raise PreconditionFailed("mixed p without an explicit override", p=(u.p, v.p))
        p = u.p
    diff = u.sub(v)
    diff.p = _norm_p(p)
    return diff.norm()
