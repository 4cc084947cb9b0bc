"""Unit families with controlled variation, exponent conversions, and the
coarse embedding built from them."""

import math
import random

import pytest

from coarsekit.errors import (
    AuditFailed,
    LebesgueTooSmall,
    NotIrreducible,
    PreconditionFailed,
    SubsequenceUnavailable,
)
from coarsekit.covers import Cover, ball_cover, shrink_to_irreducible
from coarsekit.groups import ball_space, zn_spec
from coarsekit.metric import INF, SparseVector, lp_distance
from coarsekit.property_a import (
    a_infinity_family,
    certificate,
    coarse_embedding,
    convert_down_to_1,
    convert_up,
    family_from_covers,
    holder_conversion_gap,
    power_conversion_gap,
    variation_report,
)


def test_tent_values_on_the_line():
    space = ball_space(zn_spec(1), 5)
    family = a_infinity_family(space, [2])
    vec = family.levels[2][(0,)]
    assert vec.entries[(0,)] == 1.0
    assert vec.entries[(1,)] == 0.5
    assert vec.entries[(-1,)] == 0.5
    assert (2,) not in vec.entries  # the tent hits zero and is dropped
    for z in space.points:
        assert family.levels[2][z].entries[z] == 1.0


def test_tent_variation_meets_closed_bound():
    space = ball_space(zn_spec(1), 8)
    family = a_infinity_family(space, [2, 4, 8])
    report = variation_report(family, [1, 2])
    for K in (1, 2):
        for n in (2, 4, 8):
            assert report.bounds[K][n] == K / n
            assert report.measured[K][n] <= K / n + 1e-12
        assert report.decay[K]
        assert report.strides[K] == 1
    assert report.ok()


def test_tent_levels_start_at_one():
    space = ball_space(zn_spec(1), 3)
    with pytest.raises(PreconditionFailed):
        a_infinity_family(space, [0, 2])


def test_finite_p_tents_are_renormalized():
    space = ball_space(zn_spec(1), 5)
    family = a_infinity_family(space, [2], p=1)
    vec = family.levels[2][(0,)]
    assert abs(vec.entries[(0,)] - 0.5) < 1e-12
    assert abs(vec.entries[(1,)] - 0.25) < 1e-12
    assert family.variation_bound(2, 1) is None  # measured use only


def test_family_from_covers_variation_bound():
    space = ball_space(zn_spec(1), 20)
    covers = {n: shrink_to_irreducible(ball_cover(space, 2 * n), n) for n in (2, 4)}
    for p in (1, 2):
        family = family_from_covers(covers, p)
        report = variation_report(family, [1, 2])
        for K in (1, 2):
            for n in (2, 4):
                m = family.meta["multiplicity"][n]
                assert report.bounds[K][n] == 8.0 * K * m ** (1.0 / p) / n
                assert report.measured[K][n] <= report.bounds[K][n] + 1e-9
        cert = certificate(family, report)
        assert cert["audit"]["pass"]
        assert cert["audit"]["failures"] == []


def test_family_from_covers_rejects_thin_cover():
    space = ball_space(zn_spec(1), 10)
    with pytest.raises(LebesgueTooSmall):
        family_from_covers({2: ball_cover(space, 1)}, 2)


def test_family_from_covers_needs_private_points():
    space = ball_space(zn_spec(1), 6)
    pts = list(space.points)
    redundant = Cover(space, [pts[:9], pts[4:], pts[3:7]])
    with pytest.raises(NotIrreducible):
        family_from_covers({0: redundant}, 2)


def test_whole_window_cover_gives_constant_family():
    space = ball_space(zn_spec(1), 6)
    whole = Cover(space, [list(space.points)])
    family = family_from_covers({2: whole}, 2)
    report = variation_report(family, [1, 3])
    assert report.measured[1][2] == 0.0
    assert report.measured[3][2] == 0.0


def test_power_conversion_example():
    u = SparseVector({"a": 1.0}, 1)
    v = SparseVector({"a": 0.5, "b": 0.5}, 1)
    up = v.power(0.5, 2)
    assert abs(up.entries["a"] - 1 / math.sqrt(2)) < 1e-12
    assert abs(up.norm() - 1.0) < 1e-12
    lhs, rhs = power_conversion_gap(u, v, 1, 2)
    assert lhs <= rhs + 1e-12


def test_holder_conversion_example():
    s = 1 / math.sqrt(2)
    u = SparseVector({"a": s, "b": s}, 2)
    v = SparseVector({"b": s, "c": s}, 2)
    lhs, rhs = holder_conversion_gap(u, v, 2)
    assert abs(lhs - 1.0) < 1e-12
    assert abs(rhs - 2.0 * math.sqrt(2.0)) < 1e-12


def random_unit_vector(rng, p, coords=6):
    entries = {}
    for c in range(coords):
        if rng.random() < 0.6:
            entries[c] = rng.random()
    if not entries:
        entries[0] = 1.0
    vec = SparseVector(entries, p)
    return vec.scale(1.0 / vec.norm())


def test_conversion_inequalities_random_scan():
    rng = random.Random(11)
    for p, m in ((1, 2), (2, 4), (3, 3)):
        for _ in range(200):
            u = random_unit_vector(rng, p)
            v = random_unit_vector(rng, p)
            lhs, rhs = power_conversion_gap(u, v, p, m)
            assert lhs <= rhs + 1e-9
    for p in (2, 3):
        for _ in range(200):
            u = random_unit_vector(rng, p)
            v = random_unit_vector(rng, p)
            lhs, rhs = holder_conversion_gap(u, v, p)
            assert lhs <= rhs + 1e-9


def test_convert_up_family():
    space = ball_space(zn_spec(1), 8)
    family = a_infinity_family(space, [2, 4], p=1)
    raised = convert_up(family, 2)
    assert raised.p == 2.0
    for z in space.points:
        assert abs(raised.levels[2][z].norm() - 1.0) < 1e-9
    with pytest.raises(PreconditionFailed):
        convert_up(raised, 1)  # cannot lower this way


def test_convert_down_to_1_family():
    space = ball_space(zn_spec(1), 8)
    family = a_infinity_family(space, [2, 4], p=2)
    dropped = convert_down_to_1(family)
    assert dropped.p == 1.0
    for z in space.points:
        assert abs(dropped.levels[4][z].norm() - 1.0) < 1e-9
    with pytest.raises(PreconditionFailed):
        convert_down_to_1(a_infinity_family(space, [2]))  # p = inf


def test_converted_bound_tracks_the_inequality():
    space = ball_space(zn_spec(1), 16)
    covers = {4: shrink_to_irreducible(ball_cover(space, 8), 4)}
    family = family_from_covers(covers, 2)
    dropped = convert_down_to_1(family)
    base = family.variation_bound(4, 1)
    assert dropped.variation_bound(4, 1) == pytest.approx(math.sqrt(2.0) * 2 * base)
    report = variation_report(dropped, [1])
    assert report.within_bounds[1]


def test_family_audit_rejects_bad_vectors():
    space = ball_space(zn_spec(1), 3)
    family = a_infinity_family(space, [2])
    broken = {n: dict(v) for n, v in family.levels.items()}
    broken[2][(0,)] = SparseVector({(0,): 0.5}, INF)
    from coarsekit.property_a import PropertyAFamily

    with pytest.raises(AuditFailed):
        PropertyAFamily(space, INF, broken, family.support_radius)


def test_coarse_embedding_on_the_line():
    space = ball_space(zn_spec(1), 30)
    family = a_infinity_family(space, [3, 7, 15], p=2)
    result = coarse_embedding(family, (0,), 3)
    assert result.vectors[(0,)].norm() == 0.0
    picked = [e["level"] for e in result.selected]
    assert picked == sorted(picked)
    assert result.support_radii == sorted(result.support_radii)
    assert result.audit["pass"]
    assert result.audit["pairs_checked"] > 0
    assert result.rho_upper(4) == pytest.approx(9.0 ** 0.5)
    assert result.S(7) == 2
    body = result.to_json()
    assert set(body) == {"p", "base_point", "selected", "support_radii", "safe_margin", "audit"}


def test_coarse_embedding_band_holds_at_p1():
    # l_1 variation decays slower than l_2, so the levels sit further out
    space = ball_space(zn_spec(1), 36)
    family = a_infinity_family(space, [5, 30], p=1)
    result = coarse_embedding(family, (0,), 2)
    margins = space.margins()
    for i, z in enumerate(space.points):
        if margins[i] < result.safe_margin or z == (0,):
            continue
        t = space.dist(z, (0,))
        gap = lp_distance(result.vectors[z], result.vectors[(0,)])
        assert result.rho_lower(t) - 1e-9 <= gap <= result.rho_upper(t) + 1e-9


def test_coarse_embedding_runs_out_of_levels():
    space = ball_space(zn_spec(1), 12)
    family = a_infinity_family(space, [3, 5], p=2)
    with pytest.raises(SubsequenceUnavailable) as err:
        coarse_embedding(family, (0,), 4)
    assert err.value.context["threshold"] <= 0.25


def test_coarse_embedding_rejects_bad_inputs():
    space = ball_space(zn_spec(1), 8)
    family = a_infinity_family(space, [2, 4], p=2)
    with pytest.raises(PreconditionFailed):
        coarse_embedding(a_infinity_family(space, [2, 4]), (0,), 1)  # p = inf
    with pytest.raises(PreconditionFailed):
        coarse_embedding(family, (99,), 1)
    with pytest.raises(PreconditionFailed):
        coarse_embedding(family, (0,), 0)
