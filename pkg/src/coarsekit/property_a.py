"""Normalized function families with controlled variation, and what they buy.

Three constructions live here: families read off from cover sequences
(distance-to-complement coordinates indexed by private points), the tent
family that every discrete space carries, and exponent conversions in
both directions.  On top of them sits a coarse embedding built by greedy
subsequence selection, with both displacement bounds audited pairwise on
the window.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AuditFailed,
    LebesgueTooSmall,
    NotIrreducible,
    PreconditionFailed,
    SubsequenceUnavailable,
)
from .metric import INF, FiniteMetricSpace, SparseVector, lp_distance, point_label, _tolerance

CERT_TOL = 1e-9
PAIR_CAP = 20_000_000


class PropertyAFamily:
    """For each level n, a unit nonnegative l_p vector a^n_z per point z.

    Construction invariants are re-checked on every instantiation: unit
    norm within 1e-9, nonnegative entries, and support inside the closed
    ball of the declared radius around the owning point.
    """

    def __init__(self, space, p, levels, support_radius, bound_fn=None, meta=None):
        self.space = space
        self.p = p if p == INF else float(p)
        self.levels = levels
        self.support_radius = dict(support_radius)
        self._bound_fn = bound_fn
        self.meta = meta or {}
        self._audit()

    def schedule(self):
        return sorted(self.levels)

    def variation_bound(self, n, K):
        return None if self._bound_fn is None else self._bound_fn(n, K)

    def _audit(self):
        tol = _tolerance(self.space.d)
        for n, vectors in self.levels.items():
            radius = self.support_radius[n]
            for z in self.space.points:
                vec = vectors[z]
                if abs(vec.norm() - 1.0) > CERT_TOL:
                    raise AuditFailed("family vector is not unit", level=n, point=point_label(z))
                if not vec.is_nonnegative():
                    raise AuditFailed("family vector has a negative entry", level=n, point=point_label(z))
                for x in vec.support():
                    if self.space.dist(z, x) > radius + tol:
                        raise AuditFailed(
                            "support leaves the declared ball",
                            level=n,
                            point=point_label(z),
                            offender=point_label(x),
                            radius=radius,
                        )


def _private_injection(cover):
    """Set label -> private point, from shrink metadata or recomputed."""
    stored = cover.meta.get("injection")
    if stored is not None:
        return {label: point for label, point in stored.items()}
    counts = cover.counts()
    injection = {}
    for j in range(len(cover)):
        alone = cover.masks[j] & (counts == 1)
        if not alone.any():
            raise NotIrreducible("cover member has no private point", label=cover.labels[j])
        injection[cover.labels[j]] = cover.space.points[int(np.flatnonzero(alone)[0])]
    return injection


def family_from_covers(covers, p) -> PropertyAFamily:
    """Distance-to-complement coordinates, one per cover member, normalized.

    covers maps level n to a Cover whose surrogate Lebesgue number is at
    least n+1.  Coordinates are indexed by each member's private point so
    the family lands in l_p over the space itself.
    """
    some = next(iter(covers.values()))
    space = some.space
    levels, radii, mults = {}, {}, {}
    for n, cover in sorted(covers.items()):
        if cover.space is not space:
            raise PreconditionFailed("covers live on different spaces")
        lam = cover.pointwise_lebesgue()
        if lam < n + 1:
            raise LebesgueTooSmall("cover surrogate below n+1", level=n, measured=lam)
        injection = _private_injection(cover)
        anchors = [injection[label] for label in cover.labels]
        comp = cover.complement_distances()
        # a member equal to the whole window has infinite depth; any shared
        # finite stand-in keeps the coordinate 1-Lipschitz
        comp = np.where(np.isinf(comp), float(space.diameter() + 1), comp)
        vectors = {}
        for zi, z in enumerate(space.points):
            entries = {
                anchors[j]: comp[j, zi] for j in range(len(cover.labels)) if comp[j, zi] > 0
            }
            vec = SparseVector(entries, p)
            vectors[z] = vec.scale(1.0 / vec.norm())
        levels[n] = vectors
        radii[n] = cover.max_diameter()
        mults[n] = cover.multiplicity()

    def bound(n, K):
        return 8.0 * K * mults[n] ** (1.0 / p) / n

    return PropertyAFamily(
        space,
        p,
        levels,
        radii,
        bound_fn=bound,
        meta={"construction": "covers", "multiplicity": mults},
    )


def a_infinity_family(space, schedule, p=INF) -> PropertyAFamily:
    """Tent functions a^n_z(x) = max(1 - d(x,z)/n, 0), support radius n.

    At p = infinity the tents are already normalized and the variation is
    bounded by K/n.  For finite p each tent is renormalized; no closed
    bound is attached then, the family is meant for measured use.
    """
    levels = {}
    for n in schedule:
        if n < 1:
            raise PreconditionFailed("tent levels start at 1", level=n)
        vectors = {}
        for zi, z in enumerate(space.points):
            row = space.d[zi].astype(float)
            vals = 1.0 - row / n
            keep = vals > 0
            entries = {space.points[i]: vals[i] for i in np.flatnonzero(keep)}
            vec = SparseVector(entries, p)
            if p != INF:
                vec = vec.scale(1.0 / vec.norm())
            vectors[z] = vec
        levels[int(n)] = vectors
    bound = (lambda n, K: K / n) if p == INF else None
    return PropertyAFamily(
        space,
        p,
        levels,
        {int(n): int(n) for n in schedule},
        bound_fn=bound,
        meta={"construction": "tents"},
    )


# -- exponent conversions -----------------------------------------------------


def power_conversion_gap(u: SparseVector, v: SparseVector, p, m):
    """(lhs, rhs) of ||u^{p/m} - v^{p/m}||_m^m <= ||u - v||_p^p."""
    e = p / m
    lhs = lp_distance(u.power(e, m), v.power(e, m), m) ** m
    rhs = lp_distance(u, v, p) ** p
    return lhs, rhs


def holder_conversion_gap(u: SparseVector, v: SparseVector, p):
    """(lhs, rhs) of ||u^p - v^p||_1 <= 2^{1/q} p ||u - v||_p, 1/p + 1/q = 1."""
    q = p / (p - 1.0)
    lhs = lp_distance(u.power(p, 1), v.power(p, 1), 1)
    rhs = 2.0 ** (1.0 / q) * p * lp_distance(u, v, p)
    return lhs, rhs


def _audit_pairs(space, limit=400):
    n = len(space.points)
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    stride = max(1, len(pairs) // limit)
    return pairs[::stride]


def convert_up(family: PropertyAFamily, m) -> PropertyAFamily:
    """Raise the exponent from p to m >= p by the pointwise power p/m."""
    p = family.p
    if p == INF or m < p:
        raise PreconditionFailed("conversion raises a finite exponent", p=p, m=m)
    e = p / m
    levels = {
        n: {z: vec.power(e, m) for z, vec in vectors.items()}
        for n, vectors in family.levels.items()
    }
    pairs = _audit_pairs(family.space)
    pts = family.space.points
    for n in family.levels:
        for i, j in pairs:
            lhs, rhs = power_conversion_gap(family.levels[n][pts[i]], family.levels[n][pts[j]], p, m)
            if lhs > rhs + CERT_TOL:
                raise AuditFailed(
                    "power conversion inequality failed",
                    level=n,
                    pair=(point_label(pts[i]), point_label(pts[j])),
                    lhs=lhs,
                    rhs=rhs,
                )
    old = family.variation_bound
    bound = None if family._bound_fn is None else (lambda n, K: old(n, K) ** e)
    return PropertyAFamily(
        family.space,
        m,
        levels,
        family.support_radius,
        bound_fn=bound,
        meta=dict(family.meta, converted_from=p),
    )


def convert_down_to_1(family: PropertyAFamily) -> PropertyAFamily:
    """Drop to exponent 1 by the pointwise p-th power, p an integer >= 2."""
    p = family.p
    if p == INF or p < 2 or int(p) != p:
        raise PreconditionFailed("downward conversion needs an integer exponent >= 2", p=p)
    q = p / (p - 1.0)
    levels = {
        n: {z: vec.power(p, 1) for z, vec in vectors.items()}
        for n, vectors in family.levels.items()
    }
    pairs = _audit_pairs(family.space)
    pts = family.space.points
    for n in family.levels:
        for i, j in pairs:
            lhs, rhs = holder_conversion_gap(family.levels[n][pts[i]], family.levels[n][pts[j]], p)
            if lhs > rhs + CERT_TOL:
                raise AuditFailed(
                    "Hoelder conversion inequality failed",
                    level=n,
                    pair=(point_label(pts[i]), point_label(pts[j])),
                    lhs=lhs,
                    rhs=rhs,
                )
    old = family.variation_bound
    bound = None if family._bound_fn is None else (lambda n, K: 2.0 ** (1.0 / q) * p * old(n, K))
    return PropertyAFamily(
        family.space,
        1,
        levels,
        family.support_radius,
        bound_fn=bound,
        meta=dict(family.meta, converted_from=p),
    )


# -- variation reports --------------------------------------------------------


def _pairs_within(space, K, cap=PAIR_CAP):
    """Upper-triangle index pairs at distance <= K, strided past the cap."""
    close = np.triu(space.d <= K + _tolerance(space.d), k=1)
    idx = np.argwhere(close)
    stride = max(1, -(-len(idx) // cap))
    return idx[::stride], stride


def _sup_over_pairs(vectors, points, idx):
    sup = 0.0
    for i, j in idx:
        dist = lp_distance(vectors[points[i]], vectors[points[j]])
        if dist > sup:
            sup = dist
    return sup


@dataclass
class VariationReport:
    p: object
    levels: list
    Ks: list
    measured: dict          # K -> {n: sup}
    bounds: dict            # K -> {n: bound}, absent when no bound is attached
    strides: dict           # K -> sampling stride (1 = exact)
    decay: dict = field(default=None)
    within_bounds: dict = field(default=None)

    def __post_init__(self):
        if self.decay is None:
            self.decay = {
                K: all(
                    self.measured[K][b] <= self.measured[K][a] + CERT_TOL
                    for a, b in zip(self.levels, self.levels[1:])
                )
                for K in self.Ks
            }
        if self.within_bounds is None:
            self.within_bounds = {
                K: (
                    all(self.measured[K][n] <= self.bounds[K][n] + CERT_TOL for n in self.levels)
                    if K in self.bounds
                    else None
                )
                for K in self.Ks
            }

    def ok(self):
        return all(self.decay.values()) and all(v is not False for v in self.within_bounds.values())

    def to_json(self):
        return {
            "p": "inf" if self.p == INF else self.p,
            "levels": list(self.levels),
            "variation": {str(K): {str(n): self.measured[K][n] for n in self.levels} for K in self.Ks},
            "bounds": {
                str(K): {str(n): self.bounds[K][n] for n in self.levels}
                for K in self.Ks
                if K in self.bounds
            },
            "strides": {str(K): self.strides[K] for K in self.Ks},
            "decay": {str(K): self.decay[K] for K in self.Ks},
            "within_bounds": {str(K): self.within_bounds[K] for K in self.Ks},
        }


def variation_report(family: PropertyAFamily, Ks) -> VariationReport:
    """Exact sup of ||a^n_z - a^n_w||_p over window pairs with d <= K.

    Beyond PAIR_CAP candidate pairs the scan falls back to a deterministic
    stride, recorded per K so a certificate never passes silently on a
    sample it did not declare.
    """
    space = family.space
    levels = family.schedule()
    measured, bounds, strides = {}, {}, {}
    for K in Ks:
        idx, stride = _pairs_within(space, K)
        strides[K] = stride
        measured[K] = {n: _sup_over_pairs(family.levels[n], space.points, idx) for n in levels}
        level_bounds = {n: family.variation_bound(n, K) for n in levels}
        if all(b is not None for b in level_bounds.values()):
            bounds[K] = level_bounds
    return VariationReport(family.p, levels, list(Ks), measured, bounds, strides)


def certificate(family: PropertyAFamily, report: VariationReport) -> dict:
    failures = [
        {"K": K, "n": n, "measured": report.measured[K][n], "bound": report.bounds[K][n]}
        for K in report.Ks
        if K in report.bounds
        for n in report.levels
        if report.measured[K][n] > report.bounds[K][n] + CERT_TOL
    ]
    body = report.to_json()
    return {
        "p": body["p"],
        "levels": body["levels"],
        "support_radius": {str(n): family.support_radius[n] for n in report.levels},
        "variation": body["variation"],
        "bounds": body["bounds"],
        "strides": body["strides"],
        "audit": {
            "pass": report.ok() and not failures,
            "decay": body["decay"],
            "within_bounds": body["within_bounds"],
            "failures": failures,
        },
    }


# -- coarse embedding ---------------------------------------------------------


@dataclass
class EmbeddingResult:
    space: FiniteMetricSpace
    base_point: object
    p: float
    selected: list          # per slot: {"slot": k, "level": n, "variation": sup}
    support_radii: list     # monotonized R over selected slots
    vectors: dict           # point -> SparseVector over (point, level) coordinates
    safe_margin: float
    audit: dict

    def S(self, t):
        return sum(1 for r in self.support_radii if r <= t)

    def rho_lower(self, t):
        return max(0.0, 2.0 * self.S(t / 2.0) - 2.0) ** (1.0 / self.p)

    def rho_upper(self, t):
        return (2.0 * t + 1.0) ** (1.0 / self.p)

    def to_json(self):
        return {
            "p": self.p,
            "base_point": point_label(self.base_point),
            "selected": self.selected,
            "support_radii": list(self.support_radii),
            "safe_margin": self.safe_margin,
            "audit": self.audit,
        }


def coarse_embedding(family: PropertyAFamily, base_point, budget, *, safe_margin=None) -> EmbeddingResult:
    """Stack level differences a^n_z - a^n_{z0} into one l_p map and audit it.

    Slot k requires a fresh level whose variation over pairs at distance
    <= k stays below 2^{-k} in p-th power; the first such level wins,
    so reruns are reproducible.  Displacement is then trapped between
    (2 S(t/2) - 2)^{1/p} and (2t+1)^{1/p} on every pair of points that
    keeps the largest selected support radius away from the window edge.
    """
    if family.p == INF:
        raise PreconditionFailed("embedding needs a finite exponent")
    if budget < 1:
        raise PreconditionFailed("need at least one slot", budget=budget)
    space = family.space
    if base_point not in space._index:
        raise PreconditionFailed("base point is outside the window", base=point_label(base_point))
    p = family.p
    levels = family.schedule()

    selected = []
    cursor = 0
    for k in range(1, budget + 1):
        threshold = 2.0 ** (-k)
        idx, _ = _pairs_within(space, k)
        found = None
        best = INF
        for pos in range(cursor, len(levels)):
            n = levels[pos]
            sup = _sup_over_pairs(family.levels[n], space.points, idx)
            best = min(best, sup**p)
            if sup**p < threshold:
                found = (pos, n, sup)
                break
        if found is None:
            raise SubsequenceUnavailable(
                "no remaining level meets the variation threshold",
                slot=k,
                threshold=threshold,
                best=best,
            )
        cursor = found[0] + 1
        selected.append({"slot": k, "level": found[1], "variation": found[2]})

    radii, running = [], 0
    for entry in selected:
        running = max(running, family.support_radius[entry["level"]])
        radii.append(running)

    base_vecs = {e["level"]: family.levels[e["level"]][base_point] for e in selected}
    vectors = {}
    for z in space.points:
        entries = {}
        for e in selected:
            n = e["level"]
            az, a0 = family.levels[n][z], base_vecs[n]
            for x in az.support() | a0.support():
                val = az.entries.get(x, 0.0) - a0.entries.get(x, 0.0)
                if val != 0.0:
                    entries[(x, n)] = val
        vectors[z] = SparseVector(entries, p)
    if vectors[base_point].norm() != 0.0:
        raise AuditFailed("base point does not map to zero")

    result = EmbeddingResult(
        space,
        base_point,
        p,
        selected,
        radii,
        vectors,
        float(radii[-1] if safe_margin is None else safe_margin),
        audit={},
    )

    margins = space.margins()
    safe = np.flatnonzero(margins >= result.safe_margin)
    checked = 0
    worst_upper = worst_lower = 0.0
    for a in range(len(safe)):
        for b in range(a + 1, len(safe)):
            zi, wi = int(safe[a]), int(safe[b])
            t = float(space.d[zi, wi])
            dist = lp_distance(vectors[space.points[zi]], vectors[space.points[wi]])
            lo, hi = result.rho_lower(t), result.rho_upper(t)
            if dist > hi + CERT_TOL or dist < lo - CERT_TOL:
                raise AuditFailed(
                    "embedding displacement left the certified band",
                    pair=(point_label(space.points[zi]), point_label(space.points[wi])),
                    distance=t,
                    displacement=dist,
                    band=(lo, hi),
                )
            checked += 1
            worst_upper = max(worst_upper, dist - hi)
            worst_lower = max(worst_lower, lo - dist)
    result.audit = {
        "pass": True,
        "pairs_checked": checked,
        "safe_points": int(len(safe)),
        "max_upper_slack": worst_upper,
        "max_lower_slack": worst_lower,
    }
    return result
