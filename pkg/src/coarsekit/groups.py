"""Finitely generated groups in canonical form, with word-metric machinery.

A group is a :class:`GroupSpec`: unit, multiplication, inversion and a
symmetric generating tuple, all on hashable canonical element
representations.  Norms come from breadth-first search over the Cayley
graph unless a closed form is attached.  Built-ins: Z^n, finite cyclic
groups, free groups, the discrete Heisenberg group in Hall coordinates,
and restricted wreath products (lamp configurations over a base).
"""

from __future__ import annotations

import itertools
import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .errors import BallTooLarge, NotInKernel, PreconditionFailed
from .metric import INF, FiniteMetricSpace

DEFAULT_BALL_CAP = 5_000_000


def ball_cap(explicit=None) -> int:
    if explicit is not None:
        return int(explicit)
    env = os.environ.get("COARSEKIT_BALL_CAP")
    return int(env) if env else DEFAULT_BALL_CAP


@dataclass(frozen=True)
class GroupSpec:
    name: str
    unit: object
    multiply: callable
    inverse: callable
    generators: tuple
    norm_fn: callable = None        # closed-form word norm, if known
    ball_fn: callable = None        # closed-form ball enumeration, if known
    coords_fn: callable = None      # lattice coordinates, for vectorized metrics
    asdim: int = None               # declared value, used only in envelope columns

    def __repr__(self):
        return f"GroupSpec({self.name})"


def element_key(e):
    """Canonical comparison key; group elements are nested int tuples."""
    if isinstance(e, WreathElement):
        return (e.config, e.head)
    return e


def validate_group_axioms(spec: GroupSpec, radius=3, sample=1500):
    """Unit/inverse laws and associativity, checked on the radius-3 ball."""
    for s in spec.generators:
        if spec.inverse(s) not in spec.generators:
            raise PreconditionFailed("generating set is not symmetric", group=spec.name)
    elems = sorted(_bfs_table(spec, radius, cap=200_000), key=element_key)
    for e in elems[: min(len(elems), 200)]:
        if spec.multiply(e, spec.unit) != e or spec.multiply(spec.unit, e) != e:
            raise PreconditionFailed("unit law fails", group=spec.name)
        if spec.multiply(e, spec.inverse(e)) != spec.unit:
            raise PreconditionFailed("inverse law fails", group=spec.name)
    rng = np.random.default_rng(0)
    triples = (
        itertools.product(elems, repeat=3)
        if len(elems) ** 3 <= sample
        else (tuple(elems[i] for i in rng.integers(0, len(elems), 3)) for _ in range(sample))
    )
    for a, b, c in triples:
        if spec.multiply(spec.multiply(a, b), c) != spec.multiply(a, spec.multiply(b, c)):
            raise PreconditionFailed("associativity fails", group=spec.name)


# -- Z^n, cyclic, free -------------------------------------------------------


def zn_spec(n: int) -> GroupSpec:
    unit = (0,) * n
    gens = []
    for i in range(n):
        for s in (1, -1):
            e = [0] * n
            e[i] = s
            gens.append(tuple(e))

    def ball(r):
        # the l^1 diamond |x|_1 <= r
        out = []

        def rec(prefix, budget):
            if len(prefix) == n - 1:
                for x in range(-budget, budget + 1):
                    out.append(tuple(prefix) + (x,))
                return
            for x in range(-budget, budget + 1):
                rec(prefix + [x], budget - abs(x))

        rec([], r)
        return out

    return GroupSpec(
        name=f"zn:{n}",
        unit=unit,
        multiply=lambda a, b: tuple(x + y for x, y in zip(a, b)),
        inverse=lambda a: tuple(-x for x in a),
        generators=tuple(gens),
        norm_fn=lambda a: sum(abs(x) for x in a),
        ball_fn=ball,
        coords_fn=lambda a: a,
        asdim=n,
    )


def cyclic_spec(m: int) -> GroupSpec:
    if m < 2:
        raise PreconditionFailed("cyclic order must be >= 2", m=m)
    gens = (1, m - 1) if m > 2 else (1,)
    return GroupSpec(
        name=f"cyclic:{m}",
        unit=0,
        multiply=lambda a, b: (a + b) % m,
        inverse=lambda a: (-a) % m,
        generators=gens,
        norm_fn=lambda a: min(a % m, (-a) % m),
        ball_fn=lambda r: list(range(m)) if r >= m // 2 else sorted({x % m for x in range(-r, r + 1)}),
        coords_fn=lambda a: (a,),
        asdim=0,
    )


def free_spec(k: int) -> GroupSpec:
    letters = tuple(range(1, k + 1)) + tuple(range(-k, 0))

    def mul(a, b):
        a = list(a)
        i = 0
        while a and i < len(b) and a[-1] == -b[i]:
            a.pop()
            i += 1
        return tuple(a) + b[i:]

    def ball(r):
        out = [()]
        frontier = [()]
        for _ in range(r):
            nxt = []
            for w in frontier:
                for s in letters:
                    if not w or w[-1] != -s:
                        nxt.append(w + (s,))
            out.extend(nxt)
            frontier = nxt
        return out

    return GroupSpec(
        name=f"free:{k}",
        unit=(),
        multiply=mul,
        inverse=lambda a: tuple(-x for x in reversed(a)),
        generators=tuple((s,) for s in letters),
        norm_fn=len,
        ball_fn=ball,
        asdim=1,
    )


# -- discrete Heisenberg in Hall coordinates ---------------------------------
#
# (a, b, c) stands for x^a y^b [x,y]^c; the product collects one cross term.


def heisenberg_spec() -> GroupSpec:
    return GroupSpec(
        name="heisenberg",
        unit=(0, 0, 0),
        multiply=lambda u, v: (u[0] + v[0], u[1] + v[1], u[2] + v[2] + u[0] * v[1]),
        inverse=lambda u: (-u[0], -u[1], u[0] * u[1] - u[2]),
        generators=((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)),
    )


def heisenberg_center():
    """Predicate and generators for the central copy of Z."""
    return (lambda e: e[0] == 0 and e[1] == 0, ((0, 0, 1), (0, 0, -1)))


def central_retraction(e):
    """Kill the Hall x/y coordinates, keep the center one."""
    return (0, 0, e[2])


# -- wreath products ----------------------------------------------------------


@dataclass(frozen=True, order=True)
class WreathElement:
    """(lamp configuration, head).  config maps base positions to non-unit
    lamp values, stored as a sorted tuple of pairs so elements hash."""

    config: tuple
    head: object

    def support(self):
        return tuple(k for k, _ in self.config)

    def lamp_at(self, position, lamp_unit):
        return dict(self.config).get(position, lamp_unit)


def wreath_element(config_dict, head, lamp_unit) -> WreathElement:
    cleaned = {k: v for k, v in config_dict.items() if v != lamp_unit}
    return WreathElement(tuple(sorted(cleaned.items())), head)


def wreath_spec(base: GroupSpec, lamp: GroupSpec) -> GroupSpec:
    unit = WreathElement((), base.unit)

    def mul(a: WreathElement, b: WreathElement):
        # (f, s)(g, t) = (f * s(g), s t) with s(g)(x) = g(x s^{-1}),
        # so the support of g translates by s on the right.
        cfg = dict(a.config)
        for k, g in b.config:
            kk = base.multiply(k, a.head)
            merged = lamp.multiply(cfg.get(kk, lamp.unit), g)
            if merged == lamp.unit:
                cfg.pop(kk, None)
            else:
                cfg[kk] = merged
        return WreathElement(tuple(sorted(cfg.items())), base.multiply(a.head, b.head))

    def inv(a: WreathElement):
        hinv = base.inverse(a.head)
        cfg = {base.multiply(k, hinv): lamp.inverse(g) for k, g in a.config}
        return WreathElement(tuple(sorted(cfg.items())), hinv)

    gens = [WreathElement(((base.unit, s),), base.unit) for s in lamp.generators]
    gens += [WreathElement((), t) for t in base.generators]
    return GroupSpec(
        name=f"wreath:{base.name}:{lamp.name}",
        unit=unit,
        multiply=mul,
        inverse=inv,
        generators=tuple(gens),
    )


def lamplighter_spec() -> GroupSpec:
    return wreath_spec(zn_spec(1), cyclic_spec(2))


def project_pi_A(w: WreathElement, positions, base_unit=(0,)):
    """Restrict a kernel element's lamps to the position set A."""
    if w.head != base_unit:
        raise NotInKernel("projection is defined on the kernel only", head=str(w.head))
    allowed = set(positions)
    cfg = tuple((k, v) for k, v in w.config if k in allowed)
    return WreathElement(cfg, w.head)


def wreath_restrict(w: WreathElement, positions):
    allowed = set(positions)
    return WreathElement(tuple((k, v) for k, v in w.config if k in allowed), w.head)


def wreath_outside(w: WreathElement, positions):
    allowed = set(positions)
    return tuple((k, v) for k, v in w.config if k not in allowed)


# -- BFS norms and ball spaces ------------------------------------------------


def _bfs_table(spec: GroupSpec, radius: int, cap: int):
    norms = {spec.unit: 0}
    frontier = [spec.unit]
    for r in range(1, radius + 1):
        nxt = []
        for g in frontier:
            for s in spec.generators:
                h = spec.multiply(g, s)
                if h not in norms:
                    norms[h] = r
                    nxt.append(h)
                    if len(norms) > cap:
                        raise BallTooLarge(
                            "ball enumeration exceeded cap",
                            group=spec.name,
                            cap=cap,
                            radius_reached=r - 1,
                        )
        frontier = nxt
    return norms


def word_norm_table(spec: GroupSpec, radius: int, cap=None):
    """Word norms of every element in the closed ball, by layered BFS."""
    return _bfs_table(spec, radius, ball_cap(cap))


def ball_elements(spec: GroupSpec, radius: int, cap=None):
    if spec.ball_fn is not None:
        elems = spec.ball_fn(radius)
        if len(elems) > ball_cap(cap):
            raise BallTooLarge(
                "ball enumeration exceeded cap",
                group=spec.name,
                cap=ball_cap(cap),
                radius_reached=radius,
            )
        return sorted(elems, key=lambda e: (spec.norm_fn(e), element_key(e)))
    table = word_norm_table(spec, radius, cap)
    return sorted(table, key=lambda e: (table[e], element_key(e)))


def ball_space(spec: GroupSpec, radius: int, cap=None) -> FiniteMetricSpace:
    """The closed ball around the unit with the restricted word metric.

    Pairwise distances are norms of x^{-1} y, which live in the 2*radius
    ball; they come from a closed form when the group has one and from a
    BFS table otherwise.  Window metadata is attached for margin audits.
    """
    dtype = np.int16 if 2 * radius < 32000 else np.int32
    if spec.coords_fn is not None and spec.ball_fn is not None:
        points = ball_elements(spec, radius, cap)
        coords = np.array([spec.coords_fn(p) for p in points])
        d = cdist(coords, coords, metric="cityblock").astype(dtype)
        if spec.name.startswith("cyclic:"):
            m = int(spec.name.split(":")[1])
            d = np.minimum(d, m - d).astype(dtype)
        return FiniteMetricSpace(points, d, center=spec.unit, window_radius=radius)

    if spec.norm_fn is not None:
        points = ball_elements(spec, radius, cap)
        norm, mul, inv = spec.norm_fn, spec.multiply, spec.inverse
        table_lookup = None
    else:
        table = word_norm_table(spec, 2 * radius, cap)
        points = sorted(
            (e for e, n in table.items() if n <= radius),
            key=lambda e: (table[e], element_key(e)),
        )
        norm, mul, inv = table.__getitem__, spec.multiply, spec.inverse
        table_lookup = table

    n = len(points)
    inverses = [inv(p) for p in points]
    d = np.zeros((n, n), dtype=dtype)
    for i in range(n):
        gi = inverses[i]
        row = d[i]
        for j in range(i + 1, n):
            row[j] = norm(mul(gi, points[j]))
    d = d + d.T
    if table_lookup is not None:
        # distances of ball points never exceed 2*radius, so lookups are total
        assert d.max() <= 2 * radius
    return FiniteMetricSpace(points, d, center=spec.unit, window_radius=radius)


# -- distortion ---------------------------------------------------------------


def distortion_profile(spec, member, sub_generators, radius, cap=None, inner_cap=None):
    """(inner, ambient) norm pairs for subgroup elements met in the ball.

    Inner norms come from a second BFS that only multiplies by the given
    subgroup generators.  The inner search is capped; a quadratically
    distorted subgroup needs roughly radius^2 inner steps.
    """
    table = word_norm_table(spec, radius, cap)
    targets = {e: n for e, n in table.items() if member(e)}
    limit = inner_cap if inner_cap is not None else max(8, 4 * radius * radius)
    inner = {spec.unit: 0}
    frontier = [spec.unit]
    remaining = set(targets) - {spec.unit}
    depth = 0
    while remaining and frontier and depth < limit:
        depth += 1
        nxt = []
        for g in frontier:
            for s in sub_generators:
                h = spec.multiply(g, s)
                if h not in inner:
                    inner[h] = depth
                    nxt.append(h)
                    remaining.discard(h)
        frontier = nxt
    if remaining:
        raise PreconditionFailed(
            "subgroup BFS did not reach every member in the ball",
            missing=len(remaining),
            inner_cap=limit,
        )
    pairs = [(inner[e], targets[e]) for e in targets]
    pairs.sort(key=lambda t: (t[1], t[0]))
    return pairs


def free_ball_cover_audit(k: int, lam: int, radius: int):
    """Ball-cover statistics on a free-group window, one shell at a time.

    The Cayley graph of the free group is the 2k-regular tree and its
    automorphisms act transitively on spheres, so |B_lam(y) ∩ B_radius(e)|
    depends on ||y|| only.  That makes the multiplicity of the ball cover
    computable from one representative per shell without materializing
    the window (radius 12 on two generators already exceeds 10^6 points).
    """
    spec = free_spec(k)
    small = ball_elements(spec, lam + 1)
    inner = [u for u in small if spec.norm_fn(u) <= lam]
    sphere = [u for u in small if spec.norm_fn(u) == lam + 1]
    shells = []
    mult = interior_mult = 0
    min_depth = INF
    for s in range(radius + 1):
        y = (1,) * s
        count = sum(1 for u in inner if spec.norm_fn(spec.multiply(y, u)) <= radius)
        # nearest window point outside B_lam(y); unreachable means infinite depth
        escape = any(spec.norm_fn(spec.multiply(y, u)) <= radius for u in sphere)
        depth = lam + 1 if escape else INF
        shells.append({"norm": s, "multiplicity": count, "depth": depth})
        mult = max(mult, count)
        if s + lam <= radius:
            interior_mult = max(interior_mult, count)
        min_depth = min(min_depth, depth)
    return {
        "group": spec.name,
        "lam": lam,
        "radius": radius,
        "ball_size": len(inner),
        "multiplicity": mult,
        "interior_multiplicity": interior_mult,
        "lebesgue_pointwise": min_depth,
        "shells": shells,
    }


def log_log_slope(pairs):
    """Least-squares slope of log(ambient) against log(inner)."""
    data = [(i, a) for i, a in pairs if i >= 1 and a >= 1]
    if len(data) < 2:
        raise PreconditionFailed("need at least two nontrivial pairs for a fit")
    x = np.log([i for i, _ in data])
    y = np.log([a for _, a in data])
    x = x - x.mean()
    return float((x * (y - y.mean())).sum() / (x * x).sum())


# -- token grammar ------------------------------------------------------------


def _parse_token(parts, i):
    head = parts[i]
    if head == "heisenberg":
        return heisenberg_spec(), i + 1
    if head == "lamplighter":
        return lamplighter_spec(), i + 1
    if head == "zn":
        return zn_spec(int(parts[i + 1])), i + 2
    if head == "free":
        return free_spec(int(parts[i + 1])), i + 2
    if head == "cyclic":
        return cyclic_spec(int(parts[i + 1])), i + 2
    if head == "wreath":
        base, j = _parse_token(parts, i + 1)
        lamp, k = _parse_token(parts, j)
        return wreath_spec(base, lamp), k
    raise PreconditionFailed("unknown group token", token=":".join(parts))


def group_from_token(token: str, validate=False) -> GroupSpec:
    parts = token.split(":")
    spec, end = _parse_token(parts, 0)
    if end != len(parts):
        raise PreconditionFailed("trailing junk in group token", token=token)
    if validate:
        validate_group_axioms(spec)
    return spec
