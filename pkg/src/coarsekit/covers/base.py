"""Covers of finite metric spaces and their audited statistics.

The three numbers attached to a cover are multiplicity, the pointwise
Lebesgue surrogate, and member diameter.  The surrogate
``min_x max_U d(x, X setminus U)`` is what every construction is audited
against; an exhaustive subset oracle (`exact_lebesgue_at_least`) validates
it on spaces small enough to enumerate.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    AuditFailed,
    DegenerateDenominator,
    NotCovering,
    NotCoveringAfterShrink,
    NotDisjoint,
    NotIrreducible,
    PreconditionFailed,
    TooLarge,
)
from ..metric import INF, FiniteMetricSpace, SparseVector, point_label, set_distance, _tolerance


class Cover:
    """An indexed family of nonempty subsets of a finite metric space.

    Duplicate sets are allowed and counted separately (ball covers rely on
    this: multiplicity at an interior point must equal the ball size).
    ``require_total=False`` admits partial covers; constructions on window
    truncations use it and report the uncovered fringe instead of hiding it.
    """

    def __init__(self, space: FiniteMetricSpace, sets, labels=None, *, require_total=True, meta=None):
        self.space = space
        n = len(space.points)
        masks = np.zeros((len(sets), n), dtype=bool)
        for i, members in enumerate(sets):
            idx = space.indices(list(members))
            if idx.size == 0:
                raise PreconditionFailed("cover contains an empty set", index=i)
            masks[i, idx] = True
        self.masks = masks
        self.labels = list(labels) if labels is not None else [f"U{i}" for i in range(len(sets))]
        if len(self.labels) != len(sets):
            raise PreconditionFailed("label count mismatch")
        self.meta = dict(meta) if meta else {}
        self._comp = None
        if require_total and len(sets) and not self.covered_mask().all():
            missing = np.flatnonzero(~self.covered_mask())[0]
            raise NotCovering("sets do not cover the space", witness=point_label(space.points[missing]))

    def __len__(self):
        return self.masks.shape[0]

    def sets(self):
        return [tuple(p for p, m in zip(self.space.points, row) if m) for row in self.masks]

    def set_points(self, i):
        return [p for p, m in zip(self.space.points, self.masks[i]) if m]

    def covered_mask(self):
        return self.masks.any(axis=0)

    def counts(self):
        return self.masks.sum(axis=0)

    def multiplicity(self) -> int:
        return int(self.counts().max()) if len(self) else 0

    def complement_distances(self):
        """Row i holds d(x, X minus U_i) for every point x; inf rows mark
        sets equal to the whole space."""
        if self._comp is None:
            n = len(self.space.points)
            comp = np.empty((len(self), n))
            for i, row in enumerate(self.masks):
                outside = np.flatnonzero(~row)
                if outside.size == 0:
                    comp[i] = INF
                else:
                    comp[i] = self.space.d[:, outside].min(axis=1)
                    comp[i][~row] = 0.0
            self._comp = comp
        return self._comp

    def depth(self):
        """Per point: the best complement distance over all members."""
        if not len(self):
            return np.zeros(len(self.space.points))
        return self.complement_distances().max(axis=0)

    def pointwise_lebesgue(self, point_mask=None):
        depth = self.depth()
        if point_mask is not None:
            depth = depth[point_mask]
        if depth.size == 0:
            return INF
        value = depth.min()
        return int(value) if np.issubdtype(self.space.d.dtype, np.integer) and np.isfinite(value) else float(value)

    def diameters(self):
        out = []
        for row in self.masks:
            idx = np.flatnonzero(row)
            out.append(self.space.d[np.ix_(idx, idx)].max().item())
        return out

    def max_diameter(self):
        return max(self.diameters()) if len(self) else 0

    # -- exhaustive Lebesgue oracle -----------------------------------------

    def find_uncovered_subset(self, lam, cap=500_000):
        """A subset of diameter <= lam contained in no member, or None.

        Depth-first search over anchored cliques of the <=lam proximity
        graph.  Containment is tracked as a bitmask over members; a branch
        dies as soon as even the union of all remaining candidates cannot
        empty it.
        """
        d = self.space.d
        tol = _tolerance(d)
        n = len(self.space.points)
        point_bits = []
        for x in range(n):
            b = 0
            for i in range(len(self)):
                if self.masks[i, x]:
                    b |= 1 << i
            point_bits.append(b)
        nodes = 0

        def dfs(chosen, mask, candidates):
            nonlocal nodes
            nodes += 1
            if nodes > cap:
                raise TooLarge("subset enumeration exceeded cap", cap=cap, lam=lam)
            if mask == 0:
                return chosen
            remaining = mask
            for c in candidates:
                remaining &= point_bits[c]
            if remaining:
                return None
            for k, c in enumerate(candidates):
                narrowed = [
                    c2 for c2 in candidates[k + 1 :] if d[c, c2] <= lam + tol
                ]
                hit = dfs(chosen + [c], mask & point_bits[c], narrowed)
                if hit is not None:
                    return hit
            return None

        for x in range(n):
            cand = [y for y in range(x + 1, n) if d[x, y] <= lam + tol]
            hit = dfs([x], point_bits[x], cand)
            if hit is not None:
                return tuple(self.space.points[i] for i in hit)
        return None

    def exact_lebesgue_at_least(self, lam, cap=500_000) -> bool:
        return self.find_uncovered_subset(lam, cap=cap) is None

    def exact_lebesgue_number(self, cap=500_000):
        """Largest integer lam passing the subset oracle; inf when the whole
        space fits in one member, -1 when even singletons fail (not total)."""
        if not np.issubdtype(self.space.d.dtype, np.integer):
            raise PreconditionFailed("exact Lebesgue sweep needs an integer metric")
        lam = -1
        top = int(self.space.diameter())
        while lam < top:
            if not self.exact_lebesgue_at_least(lam + 1, cap=cap):
                return lam
            lam += 1
        return INF

    # -- reporting -----------------------------------------------------------

    def boundary_margin(self, point_mask=None):
        margins = self.space.margins()
        if point_mask is not None:
            margins = margins[point_mask]
        if margins.size == 0:
            return INF
        m = margins.min()
        return float(m) if np.isfinite(m) else INF

    def stats(self, point_mask=None):
        return {
            "multiplicity": self.multiplicity(),
            "lebesgue_pointwise": self.pointwise_lebesgue(point_mask),
            "diameter": self.max_diameter(),
            "boundary_margin": self.boundary_margin(point_mask),
        }

    def to_json(self):
        out = {
            "sets": [[point_label(p) for p in self.set_points(i)] for i in range(len(self))],
            "labels": self.labels,
            "stats": self.stats(),
        }
        if "method" in self.meta:
            out["method"] = self.meta["method"]
        return out


# -- constructions ------------------------------------------------------------


def ball_cover(space: FiniteMetricSpace, lam, centers=None) -> Cover:
    """Closed lam-balls around every center (default: all points)."""
    if lam < 0:
        raise PreconditionFailed("ball cover needs lam >= 0", lam=lam)
    if centers is None:
        centers = list(space.points)
    tol = _tolerance(space.d)
    idx = space.indices(centers)
    inside = space.d[:, idx] <= lam + tol
    sets = [[space.points[i] for i in np.flatnonzero(inside[:, k])] for k in range(len(centers))]
    labels = [f"B{lam}({point_label(c)})" for c in centers]
    return Cover(space, sets, labels, meta={"method": "ball", "radius": lam})


def families_to_cover(space: FiniteMetricSpace, families, r, lam) -> Cover:
    """Union of r-disjoint families, each member grown by lam.

    The growth keeps members of one family pairwise disjoint exactly when
    r > 2*lam, which caps the multiplicity at the family count; both that
    and the Lebesgue guarantee are rechecked on the window, not assumed.
    """
    if not r > 2 * lam:
        raise PreconditionFailed("need r > 2*lam for disjointness to survive growth", r=r, lam=lam)
    for fi, family in enumerate(families):
        members = [list(s) for s in family]
        for a in range(len(members)):
            for b in range(a + 1, len(members)):
                gap = set_distance(space, members[a], members[b])
                if gap < r:
                    raise NotDisjoint(
                        "family members closer than r",
                        family=fi,
                        pair=(a, b),
                        distance=gap,
                    )
    covered = np.zeros(len(space.points), dtype=bool)
    for family in families:
        for s in family:
            covered[space.indices(list(s))] = True
    if not covered.all():
        missing = np.flatnonzero(~covered)[0]
        raise NotCovering("original families do not cover", witness=point_label(space.points[missing]))

    tol = _tolerance(space.d)
    sets, labels, owner = [], [], []
    for fi, family in enumerate(families):
        for si, s in enumerate(family):
            dist = space.d[:, space.indices(list(s))].min(axis=1)
            grown = [p for p, ok in zip(space.points, dist <= lam + tol) if ok]
            sets.append(grown)
            labels.append(f"F{fi}.{si}")
            owner.append(fi)
    cover = Cover(space, sets, labels, meta={"method": "families", "family": owner, "r": r, "lam": lam})
    if cover.multiplicity() > len(families):
        raise AuditFailed(
            "multiplicity exceeds family count",
            multiplicity=cover.multiplicity(),
            families=len(families),
        )
    measured = cover.pointwise_lebesgue()
    if measured < lam:
        raise AuditFailed("Lebesgue surrogate below lam", measured=measured, lam=lam)
    return cover


class PartitionOfUnity:
    """Row-stochastic-in-columns weight matrix: one row per cover member,
    one column per point, columns summing to one."""

    def __init__(self, space, labels, matrix):
        self.space = space
        self.labels = list(labels)
        self.matrix = matrix

    def vector_at(self, point) -> SparseVector:
        col = self.matrix[:, self.space.index(point)]
        return SparseVector({self.labels[i]: v for i, v in enumerate(col) if v > 0}, p=1)


def partition_of_unity(cover: Cover):
    """Distance-to-complement weights plus the measured Lipschitz constant.

    Members equal to the whole space soak up all the weight (their
    complement distance is the inf sentinel); the classical bound
    (2n+3)^2 / Lambda is returned alongside the measured value.
    """
    comp = cover.complement_distances()
    n_points = comp.shape[1]
    phi = np.zeros_like(comp)
    finite = np.isfinite(comp)
    for x in range(n_points):
        col = comp[:, x]
        if not finite[:, x].all():
            rows = np.flatnonzero(~finite[:, x])
            phi[rows, x] = 1.0 / rows.size
            continue
        total = col.sum()
        if total <= 0:
            raise DegenerateDenominator(
                "no member has positive complement distance",
                point=point_label(cover.space.points[x]),
            )
        phi[:, x] = col / total
    sums = phi.sum(axis=0)
    if np.abs(sums - 1.0).max() > 1e-9:
        raise AuditFailed("partition weights do not sum to 1", worst=float(np.abs(sums - 1.0).max()))

    gram = phi.T @ phi
    sq = np.maximum(np.diag(gram)[:, None] + np.diag(gram)[None, :] - 2 * gram, 0.0)
    d = cover.space.d.astype(float)
    off = ~np.eye(n_points, dtype=bool)
    ratios = np.sqrt(sq[off]) / d[off]
    measured = float(ratios.max()) if ratios.size else 0.0

    pou = PartitionOfUnity(cover.space, cover.labels, phi)
    mult = cover.multiplicity()
    lam = cover.pointwise_lebesgue()
    pou.lipschitz_bound = 0.0 if lam == INF else (2 * (mult - 1) + 3) ** 2 / lam
    return pou, measured


def shrink_to_irreducible(cover: Cover, n) -> Cover:
    """Shrink members by n, drop to an irreducible subcover of the cores,
    and return the matching unshrunk members.

    Redundant cores are removed front-to-back until every survivor owns a
    point no other survivor covers; those private points are recorded in
    ``meta["injection"]`` for downstream re-indexing into l_p.
    """
    comp = cover.complement_distances()
    tol = _tolerance(cover.space.d)
    cores = cover.masks & (comp > n + tol)
    keep = [i for i in range(len(cover)) if cores[i].any()]
    if not keep or not cores[keep].any(axis=0).all():
        uncovered = np.flatnonzero(~cores[keep].any(axis=0)) if keep else range(len(cover.space.points))
        raise NotCoveringAfterShrink(
            "cores no longer cover; Lebesgue surrogate below n+1",
            n=n,
            witness=point_label(cover.space.points[list(uncovered)[0]]),
        )

    kept = list(keep)
    changed = True
    while changed:
        changed = False
        counts = cores[kept].sum(axis=0)
        for i in kept:
            core = cores[i]
            if (counts[core] >= 2).all():
                kept.remove(i)
                changed = True
                break

    counts = cores[kept].sum(axis=0)
    injection, private = {}, {}
    for i in kept:
        owned = np.flatnonzero(cores[i] & (counts == 1))
        if owned.size == 0:
            raise NotIrreducible("survivor lost all private points", member=cover.labels[i])
        pts = [point_label(cover.space.points[j]) for j in owned]
        injection[cover.labels[i]] = cover.space.points[owned[0]]
        private[cover.labels[i]] = pts

    result = Cover(
        cover.space,
        [cover.set_points(i) for i in kept],
        [cover.labels[i] for i in kept],
        meta={
            "method": "shrink_to_irreducible",
            "shrink": n,
            "injection": injection,
            "private_points": private,
        },
    )
    if result.multiplicity() > cover.multiplicity():
        raise AuditFailed("subfamily multiplicity grew", before=cover.multiplicity(), after=result.multiplicity())
    measured = result.pointwise_lebesgue()
    if measured < n + 1:
        raise AuditFailed("shrunk-and-kept cover lost its Lebesgue guarantee", measured=measured, n=n)
    return result


def audit_irreducible(cover: Cover):
    counts = cover.counts()
    for i in range(len(cover)):
        if not (cover.masks[i] & (counts == 1)).any():
            raise NotIrreducible("member has no private point", member=cover.labels[i])
    return True


# -- lattice constructions -----------------------------------------------------


def _lattice_coords(space):
    coords = np.array(space.points)
    if coords.ndim != 2:
        raise PreconditionFailed("expected integer tuple points")
    return coords


def brick_cover_zl(space: FiniteMetricSpace, lam, l=None) -> Cover:
    """l+1 shifted brick partitions of a Z^l window.

    Bricks have side 2(l+1)*lam and consecutive families shift by 2*lam
    along the diagonal, so each coordinate axis can spoil at most one
    family for any given point; lam=0 degenerates to the singleton
    partition.  Multiplicity <= l+1 and the Lebesgue bound are audited.
    """
    coords = _lattice_coords(space)
    if l is None:
        l = coords.shape[1]
    if lam == 0:
        sets = [[p] for p in space.points]
        labels = [f"pt{point_label(p)}" for p in space.points]
        cover = Cover(space, sets, labels, meta={"method": "brick", "lam": 0, "families": [0] * len(sets)})
        return cover
    side = 2 * (l + 1) * lam
    shift = 2 * lam
    sets, labels, owner = [], [], []
    for j in range(l + 1):
        keys = (coords - j * shift) // side
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        for u in range(len(uniq)):
            members = [space.points[i] for i in np.flatnonzero(inverse == u)]
            sets.append(members)
            labels.append(f"brick{j}." + ",".join(str(v) for v in uniq[u]))
            owner.append(j)
    cover = Cover(space, sets, labels, meta={"method": "brick", "lam": lam, "side": side, "families": owner})
    if cover.multiplicity() > l + 1:
        raise AuditFailed("brick multiplicity exceeds l+1", multiplicity=cover.multiplicity(), l=l)
    measured = cover.pointwise_lebesgue()
    if measured < lam:
        raise AuditFailed("brick Lebesgue surrogate below lam", measured=measured, lam=lam)
    return cover


def brick_families_zl(space: FiniteMetricSpace, lam):
    """The lam-shrunk brick partitions: (2*lam+1)-disjoint families that
    still jointly cover, ready for `families_to_cover`."""
    if lam < 1:
        raise PreconditionFailed("shrunk brick families need lam >= 1", lam=lam)
    base = brick_cover_zl(space, lam)
    owners = base.meta["families"]
    comp = base.complement_distances()
    tol = _tolerance(space.d)
    n_fam = max(owners) + 1
    families = [[] for _ in range(n_fam)]
    for i in range(len(base)):
        core_mask = base.masks[i] & (comp[i] > lam + tol)
        if core_mask.any():
            families[owners[i]].append([space.points[k] for k in np.flatnonzero(core_mask)])
    return families


def interval_cover_z(space: FiniteMetricSpace, lam) -> Cover:
    """Two staggered block partitions of a Z window (singletons at lam=0).

    Block length 2 suffices at lam=1; beyond that blocks of 4*lam put every
    point at depth >= lam in one of the two partitions.  This is the
    smallest-diameter two-set-per-point pattern the audits accept.
    """
    coords = _lattice_coords(space)
    if coords.shape[1] != 1:
        raise PreconditionFailed("interval cover expects a Z window")
    return coordinate_interval_cover(space, 0, lam)


def coordinate_interval_cover(space: FiniteMetricSpace, axis, lam) -> Cover:
    """Staggered block partitions along one lattice coordinate.

    Useful when the line of interest sits inside a larger window (a
    kernel fiber, say); the Lebesgue audit runs against the space's own
    metric, so the guarantee holds whatever that metric is.
    """
    coords = _lattice_coords(space)
    xs = coords[:, axis]
    if lam == 0:
        b, offsets = 1, [0]
    elif lam == 1:
        b, offsets = 2, [0, 1]
    else:
        b, offsets = 4 * lam, [0, 2 * lam]
    sets, labels = [], []
    for oi, off in enumerate(offsets):
        keys = (xs - off) // b
        for key in np.unique(keys):
            members = [space.points[i] for i in np.flatnonzero(keys == key)]
            sets.append(members)
            labels.append(f"I{oi}.{key}")
    cover = Cover(space, sets, labels, meta={"method": "interval", "lam": lam, "block": b})
    measured = cover.pointwise_lebesgue()
    if measured < lam:
        raise AuditFailed("interval cover below requested Lebesgue", measured=measured, lam=lam)
    if cover.multiplicity() > len(offsets):
        raise AuditFailed("interval cover multiplicity too high", multiplicity=cover.multiplicity())
    return cover
