"""Group specs, BFS norms, ball windows, wreath and Heisenberg structure."""

import random

import numpy as np
import pytest

from coarsekit.errors import BallTooLarge, NotInKernel, PreconditionFailed
from coarsekit.groups import (
    ball_elements,
    ball_space,
    central_retraction,
    cyclic_spec,
    distortion_profile,
    free_ball_cover_audit,
    free_spec,
    group_from_token,
    heisenberg_center,
    heisenberg_spec,
    lamplighter_spec,
    log_log_slope,
    project_pi_A,
    validate_group_axioms,
    word_norm_table,
    wreath_element,
    wreath_spec,
    zn_spec,
)
from coarsekit.covers import ball_cover


def test_word_norm_table_on_z():
    table = word_norm_table(zn_spec(1), 3)
    expected = {(0,): 0, (1,): 1, (-1,): 1, (2,): 2, (-2,): 2, (3,): 3, (-3,): 3}
    assert table == expected


def test_free_group_ball_sizes():
    table = word_norm_table(free_spec(2), 2)
    assert len(table) == 17  # 1 + 4 + 12
    assert sum(1 for n in table.values() if n == 2) == 12


def test_heisenberg_commutator_norm():
    spec = heisenberg_spec()
    table = word_norm_table(spec, 4)
    assert table[(0, 0, 1)] == 4


def test_ball_space_z_is_a_segment():
    space = ball_space(zn_spec(1), 2)
    assert len(space) == 5
    # isometric to {0..4}: sorted eccentricities match
    xs = sorted(p[0] for p in space.points)
    assert xs == [-2, -1, 0, 1, 2]
    assert space.dist((-2,), (2,)) == 4


def test_ball_space_z2_restricted_metric():
    space = ball_space(zn_spec(2), 1)
    assert len(space) == 5
    assert space.dist((1, 0), (0, 1)) == 2


def test_ball_space_free_group_radius_one():
    space = ball_space(free_spec(2), 1)
    assert len(space) == 5
    gens = [p for p in space.points if p != ()]
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            assert space.dist(gens[i], gens[j]) == 2


def test_heisenberg_polynomial_laws():
    spec = heisenberg_spec()
    assert spec.multiply((1, 0, 0), (0, 1, 0)) == (1, 1, 1)
    rng = random.Random(3)
    for _ in range(50):
        g = tuple(rng.randint(-5, 5) for _ in range(3))
        a, b, c = g
        assert spec.inverse(g) == (-a, -b, a * b - c)
        assert spec.multiply(g, spec.inverse(g)) == (0, 0, 0)
    x, y = (1, 0, 0), (0, 1, 0)
    commutator = spec.multiply(
        spec.multiply(x, y), spec.multiply(spec.inverse(x), spec.inverse(y))
    )
    assert commutator == (0, 0, 1)


def test_central_retraction():
    assert central_retraction((1, 1, 1)) == (0, 0, 1)
    assert central_retraction((0, 0, 5)) == (0, 0, 5)
    spec = heisenberg_spec()
    rng = random.Random(5)
    for _ in range(50):
        g = tuple(rng.randint(-4, 4) for _ in range(3))
        z = (0, 0, rng.randint(-4, 4))
        assert central_retraction(spec.multiply(z, g)) == spec.multiply(
            z, central_retraction(g)
        )


def test_group_axioms_per_spec():
    for spec in (
        zn_spec(1),
        zn_spec(2),
        cyclic_spec(5),
        free_spec(2),
        heisenberg_spec(),
        lamplighter_spec(),
        wreath_spec(zn_spec(1), zn_spec(1)),
    ):
        validate_group_axioms(spec)


def test_left_invariance_on_lamplighter():
    spec = lamplighter_spec()
    table = word_norm_table(spec, 6)
    pts = ball_elements(spec, 2)
    shifts = ball_elements(spec, 2)
    rng = random.Random(11)
    for _ in range(300):
        g = rng.choice(shifts)
        x = rng.choice(pts)
        y = rng.choice(pts)
        base = table[spec.multiply(spec.inverse(x), y)]
        moved = table[
            spec.multiply(spec.inverse(spec.multiply(g, x)), spec.multiply(g, y))
        ]
        assert moved == base


def test_ball_space_agrees_with_norm_table():
    spec = lamplighter_spec()
    space = ball_space(spec, 3)
    table = word_norm_table(spec, 6)
    for i, x in enumerate(space.points):
        for j, y in enumerate(space.points):
            assert space.d[i, j] == table[spec.multiply(spec.inverse(x), y)]


def test_lamplighter_single_lamp_norm():
    spec = lamplighter_spec()
    table = word_norm_table(spec, 4)
    lamp_at_one = wreath_element({(1,): 1}, (0,), 0)
    assert table[lamp_at_one] == 3  # t s t^-1


def test_wreath_shift_moves_lamp_support():
    spec = lamplighter_spec()
    t = wreath_element({}, (1,), 0)
    s = wreath_element({(0,): 1}, (0,), 0)
    shifted = spec.multiply(t, s)
    assert shifted == wreath_element({(1,): 1}, (1,), 0)
    assert spec.unit.config == () and spec.unit.head == (0,)


def test_kernel_projection():
    w = wreath_element({(0,): 1, (2,): 1}, (0,), 0)
    assert project_pi_A(w, [(0,)]) == wreath_element({(0,): 1}, (0,), 0)
    assert project_pi_A(w, []) == wreath_element({}, (0,), 0)
    off_kernel = wreath_element({(0,): 1}, (1,), 0)
    with pytest.raises(NotInKernel):
        project_pi_A(off_kernel, [(0,)])


def test_distortion_profile_undistorted_axis():
    spec = zn_spec(2)

    def on_axis(e):
        return e[1] == 0

    pairs = distortion_profile(spec, on_axis, ((1, 0), (-1, 0)), 5)
    assert all(inner == ambient for inner, ambient in pairs)
    assert max(a for _, a in pairs) == 5


def test_heisenberg_center_distortion():
    spec = heisenberg_spec()
    member, sub_gens = heisenberg_center()
    pairs = distortion_profile(spec, member, sub_gens, 14)
    assert (1, 4) in pairs  # the commutator itself
    slope = log_log_slope(pairs)
    assert 0.40 <= slope <= 0.60


def test_free_ball_cover_audit_matches_materialized_window():
    audit = free_ball_cover_audit(2, 1, 4)
    space = ball_space(free_spec(2), 4)
    cover = ball_cover(space, 1)
    counts = cover.counts()
    norms = space.d[:, space.index(())]
    for shell, entry in enumerate(audit["shells"]):
        at_shell = counts[norms == shell]
        assert at_shell.size and int(at_shell.max()) == entry["multiplicity"]
    assert audit["interior_multiplicity"] == 5  # |B_1| in F_2
    assert audit["lebesgue_pointwise"] >= 2


def test_ball_cap_enforced():
    with pytest.raises(BallTooLarge) as err:
        word_norm_table(free_spec(2), 10, cap=100)
    assert err.value.exit_code == 3
    assert "radius_reached" in err.value.context


def test_group_token_grammar():
    assert group_from_token("zn:3").name == "zn:3"
    assert group_from_token("lamplighter").name == "wreath:zn:1:cyclic:2"
    assert group_from_token("wreath:zn:1:zn:1").name == "wreath:zn:1:zn:1"
    with pytest.raises(PreconditionFailed):
        group_from_token("zn:2:junk")
    with pytest.raises(PreconditionFailed):
        group_from_token("so3")
