"""Covers of group windows built from quotient and kernel covers.

The composition takes a cover of the quotient, a cover of the kernel in
the restricted metric, grows a shrunken copy of each kernel member back
by R, and translates it into each fiber by a deep preimage point.  Its
three promised statistics (Lebesgue, diameter, multiplicity) are all
asserted on the computed window, with boundary effects quarantined to a
reported safe margin rather than silently absorbed.
"""

from __future__ import annotations

import numpy as np

from ..errors import (
    AuditFailed,
    LebesgueTooSmall,
    PreconditionFailed,
    WindowTooSmall,
)
from ..groups import (
    GroupSpec,
    ball_elements,
    element_key,
    wreath_outside,
    wreath_restrict,
    word_norm_table,
)
from ..metric import FiniteMetricSpace, point_label, _tolerance
from .base import Cover


def _audit_projection(G: GroupSpec, window: FiniteMetricSpace, H: GroupSpec, pi, quotient: FiniteMetricSpace):
    """pi must restrict a homomorphism and shrink no distance."""
    images = []
    for w in window.points:
        q = pi(w)
        if q not in quotient._index:
            raise PreconditionFailed(
                "projection leaves the quotient window", point=point_label(w), image=point_label(q)
            )
        images.append(quotient.index(q))
    idx = np.asarray(images, dtype=np.intp)
    qd = quotient.d[np.ix_(idx, idx)]
    bad = qd > window.d
    if bad.any():
        i, j = np.argwhere(bad)[0]
        raise PreconditionFailed(
            "projection is not 1-Lipschitz",
            pair=(point_label(window.points[i]), point_label(window.points[j])),
        )
    window_set = window._index
    for w in window.points:
        for s in G.generators:
            ws = G.multiply(w, s)
            if ws in window_set:
                if pi(ws) != H.multiply(pi(w), pi(s)):
                    raise PreconditionFailed(
                        "projection is not a homomorphism restriction", point=point_label(w)
                    )
    return idx


def extension_cover(
    G: GroupSpec,
    window: FiniteMetricSpace,
    H: GroupSpec,
    pi,
    U_cover: Cover,
    V_cover: Cover,
    lam,
    R,
    D=None,
    *,
    safe_margin=None,
    ball_cap=None,
) -> Cover:
    """Cover the G-window by sets z_U * N_R(2R-shrunk V) within each fiber.

    Preconditions (audited): Lambda(U) >= lam with diam <= R on the
    quotient window; Lambda(V) >= 6R with diam <= D on the kernel window
    in the restricted metric.  Conclusions (asserted): multiplicity <=
    m(U) m(V) and member diameter <= D + 2R everywhere; Lambda >= lam on
    the safe region.  Points too close to the window edge may end up
    uncovered; if any point with margin >= safe_margin (default lam) is
    missed, the window was too small and we say so.
    """
    quotient = U_cover.space
    kernel = V_cover.space
    pi_idx = _audit_projection(G, window, H, pi, quotient)

    lam_u = U_cover.pointwise_lebesgue()
    if lam_u < lam:
        raise LebesgueTooSmall("quotient cover surrogate below lam", measured=lam_u, needed=lam)
    diam_u = U_cover.max_diameter()
    if diam_u > R:
        raise PreconditionFailed("quotient cover wider than R", diam=diam_u, R=R)
    lam_v = V_cover.pointwise_lebesgue()
    if lam_v < 6 * R:
        raise LebesgueTooSmall("kernel cover surrogate below 6R", measured=lam_v, needed=6 * R)
    if D is None:
        D = V_cover.max_diameter()
    diam_v = V_cover.max_diameter()
    if diam_v > D:
        raise PreconditionFailed("kernel cover wider than D", diam=diam_v, D=D)
    for v in kernel.points:
        if pi(v) != H.unit:
            raise PreconditionFailed("kernel window point projects off the unit", point=point_label(v))

    small_ball = frozenset(word_norm_table(G, R, cap=ball_cap)) if R > 0 else frozenset({G.unit})

    # 2R-shrunk kernel members, in the restricted metric of the kernel window
    comp_v = V_cover.complement_distances()
    tol = _tolerance(kernel.d)
    cores = []
    for j in range(len(V_cover)):
        keep = V_cover.masks[j] & (comp_v[j] > 2 * R + tol)
        cores.append([kernel.points[i] for i in np.flatnonzero(keep)])

    # deepest preimage point per quotient member, canonical ties
    comp_u = U_cover.complement_distances()
    norms = window.d[:, window.index(G.unit)] if G.unit in window._index else None
    reps = {}
    for i in range(len(U_cover)):
        best = None
        for wi, w in enumerate(window.points):
            qi = pi_idx[wi]
            if not U_cover.masks[i, qi]:
                continue
            rank = (
                -comp_u[i, qi],
                int(norms[wi]) if norms is not None else 0,
                element_key(w),
            )
            if best is None or rank < best[0]:
                best = (rank, w)
        if best is not None:
            reps[i] = best[1]

    sets, labels, owners = [], [], []
    for i, z in reps.items():
        z_inv = G.inverse(z)
        strip = [wi for wi in range(len(window.points)) if U_cover.masks[i, pi_idx[wi]]]
        shifted = {wi: G.multiply(z_inv, window.points[wi]) for wi in strip}
        for j, core in enumerate(cores):
            if not core:
                continue
            core_inv = [G.inverse(s) for s in core]
            members = []
            for wi in strip:
                x = shifted[wi]
                for s_inv in core_inv:
                    if G.multiply(s_inv, x) in small_ball:
                        members.append(window.points[wi])
                        break
            if members:
                sets.append(members)
                labels.append(f"W({U_cover.labels[i]},{V_cover.labels[j]})")
                owners.append((U_cover.labels[i], V_cover.labels[j]))

    guard = lam if safe_margin is None else safe_margin
    margins = window.margins()
    safe = margins >= guard
    cover = Cover(
        window,
        sets,
        labels,
        require_total=False,
        meta={
            "method": "extension",
            "pairs": owners,
            "z_points": {U_cover.labels[i]: point_label(z) for i, z in reps.items()},
            "safe_margin": guard,
            "R": R,
            "D": D,
            "lam": lam,
        },
    )

    if not safe.any():
        raise WindowTooSmall("no point has the required boundary margin", margin=guard)
    uncovered_safe = safe & ~cover.covered_mask()
    if uncovered_safe.any():
        # report the deepest miss: callers can retry with margin above it
        wi = int(np.flatnonzero(uncovered_safe)[np.argmax(margins[uncovered_safe])])
        raise WindowTooSmall(
            "safe point left uncovered by the translated kernel sets",
            witness=point_label(window.points[wi]),
            margin=float(margins[wi]),
            requested_margin=float(guard),
        )

    mult = cover.multiplicity()
    bound = U_cover.multiplicity() * V_cover.multiplicity()
    if mult > bound:
        raise AuditFailed("multiplicity exceeds m(U)m(V)", measured=mult, bound=bound)
    worst_diam = cover.max_diameter()
    if worst_diam > D + 2 * R:
        raise AuditFailed("member diameter exceeds D+2R", measured=worst_diam, bound=D + 2 * R)
    lam_w = cover.pointwise_lebesgue(point_mask=safe)
    if lam_w < lam:
        raise AuditFailed("Lebesgue surrogate below lam on the safe region", measured=lam_w, lam=lam)

    cover.meta["conclusions"] = {
        "multiplicity": mult,
        "multiplicity_bound": bound,
        "diameter": worst_diam,
        "diameter_bound": D + 2 * R,
        "lebesgue_safe": lam_w,
        "lebesgue_target": lam,
        "safe_points": int(safe.sum()),
        "uncovered_boundary_points": int((~cover.covered_mask()).sum()),
    }
    return cover


def wreath_kernel_cover(N: GroupSpec, G: GroupSpec, r, kernel_window: FiniteMetricSpace, V_cover: Cover) -> Cover:
    """Extend a cover of the lamps inside B_r(e) to the whole kernel window.

    Elements sharing an outside-lamp pattern form a class isometric to the
    inside-lamp block, so each V member translates across classes.  Changing
    any lamp beyond radius r costs more than r steps, which is what keeps
    distinct classes far apart; the resulting Lebesgue number is measured,
    not assumed.
    """
    lam_v = V_cover.pointwise_lebesgue()
    if lam_v < r:
        raise LebesgueTooSmall("inside cover surrogate below r", measured=lam_v, needed=r)
    inside_positions = ball_elements(N, r)
    inside_space = V_cover.space

    classes = {}
    for w in kernel_window.points:
        classes.setdefault(wreath_outside(w, inside_positions), []).append(w)

    inside_index = inside_space._index
    for w in kernel_window.points:
        if wreath_restrict(w, inside_positions) not in inside_index:
            raise PreconditionFailed(
                "restriction of a kernel point is missing from the inside window",
                point=point_label(w),
            )

    v_count_at = V_cover.counts()
    sets, labels = [], []
    expected_mult = 0
    for ci, (pattern, members) in enumerate(sorted(classes.items())):
        inner = [wreath_restrict(w, inside_positions) for w in members]
        inner_idx = [inside_space.index(x) for x in inner]
        expected_mult = max(expected_mult, max(int(v_count_at[i]) for i in inner_idx))
        for j in range(len(V_cover)):
            chosen = [w for w, ii in zip(members, inner_idx) if V_cover.masks[j, ii]]
            if chosen:
                sets.append(chosen)
                labels.append(f"{V_cover.labels[j]}xz{ci}")
    cover = Cover(
        kernel_window,
        sets,
        labels,
        meta={"method": "wreath_kernel", "r": r, "classes": len(classes)},
    )
    mult = cover.multiplicity()
    if mult != expected_mult:
        raise AuditFailed(
            "kernel cover multiplicity disagrees with the inside cover",
            measured=mult,
            expected=expected_mult,
        )
    measured = cover.pointwise_lebesgue()
    if measured < r:
        raise AuditFailed("kernel cover surrogate below r", measured=measured, r=r)
    return cover
