from __future__ import annotations

import math
import random

import pytest

from goldsand import (
    ConfigurationError,
    Degeneracy,
    EmptyArrangementError,
    ParamPoint,
    UnsupportedKindError,
    classify_degeneracy,
    constants,
    distance_to_degenerate,
    is_eps_degenerate,
    make_arrangement,
    nearest_degenerate,
    potential,
    scalar_param,
    solve_value,
    weight,
)

from helpers import (
    LIST,
    PAN2,
    PB,
    PROPER3,
    l1_between,
    perturb,
    random_arrangement,
    random_degenerate_arrangement,
    random_regular_arrangement,
)


# ------------------------------------------------------------------ solve_value

def test_solve_single_cell_ladder():
    for k in (1, 2, 5, 9, 12):
        for m in (1, 4, 100):
            x = make_arrangement(PB, {(k, "0"): m})
            res = solve_value(x)
            assert res.e == pytest.approx(m * 2.0 ** (1 - k), abs=1e-9)
            assert res.p_star.scalar() == pytest.approx(0.5, abs=1e-6)


def test_solve_proper_ladder():
    from goldsand import build_path_system

    for r in (2, 3, 4):
        system = build_path_system("proper", r=r)
        for k in (1, 3, 6):
            x = make_arrangement(system, {(k, "0"): 5})
            res = solve_value(x)
            assert res.e == pytest.approx(5 * float(r) ** (1 - k), abs=1e-9)


def test_solve_pinned_flat_example():
    res = solve_value(make_arrangement(PB, {(1, "1"): 1}))
    assert res.e == 0.0
    assert res.p_star.scalar() == 0.0
    assert res.degeneracy is Degeneracy.FLAT


def test_solve_pinned_regular_example():
    res = solve_value(make_arrangement(PB, {(3, "0"): 4}))
    assert res.e == pytest.approx(1.0, abs=1e-12)
    assert res.p_star.scalar() == pytest.approx(0.5, abs=1e-9)
    assert res.degeneracy is Degeneracy.REGULAR


def test_solve_flat_slope_rule():
    # affine potential: minimizing endpoint, ties to the midpoint
    down = solve_value(make_arrangement(PB, {(1, "1"): 2, (1, "2"): 1}))
    assert down.p_star.scalar() == 0.0
    up = solve_value(make_arrangement(PB, {(1, "1"): 1, (1, "2"): 2}))
    assert up.p_star.scalar() == 1.0
    tie = solve_value(make_arrangement(PB, {(1, "1"): 1, (1, "2"): 1}))
    assert tie.p_star.scalar() == 0.5
    assert tie.e == pytest.approx(1.0, abs=1e-12)


def test_solve_one_sided_endpoints():
    res = solve_value(make_arrangement(PB, {(1, "1"): 5, (2, "2"): 1}))
    assert res.degeneracy is Degeneracy.NEGATIVE
    assert res.p_star.scalar() == 0.0
    assert res.e == pytest.approx(1.0, abs=1e-12)  # only the path-2 sand survives tau2 forever
    mirrored = solve_value(make_arrangement(PB, {(1, "2"): 5, (2, "1"): 1}))
    assert mirrored.degeneracy is Degeneracy.POSITIVE
    assert mirrored.p_star.scalar() == 1.0
    assert mirrored.e == pytest.approx(1.0, abs=1e-12)


def test_solve_value_brackets_grid_minimum():
    rng = random.Random(41)
    for trial in range(3):
        x = random_regular_arrangement(rng, eps=0.01)
        res = solve_value(x)
        points = 100_000 if trial == 0 else 10_000
        grid = min(
            float(potential(x, scalar_param(i / points))) for i in range(points + 1)
        )
        scale = max(1.0, float(x.l1()))
        assert res.e <= grid + 1e-9 * scale
        assert grid - res.e <= 1e-7 * scale


def test_solve_value_bounds():
    rng = random.Random(42)
    for _ in range(200):
        x = random_arrangement(rng, level_floor=0)
        res = solve_value(x)
        assert -1e-12 <= res.e <= float(x.l1()) + 1e-12
        assert 0.0 <= res.p_star.scalar() <= 1.0


def test_solve_interior_root_of_h():
    from goldsand import h

    rng = random.Random(43)
    for _ in range(50):
        x = random_regular_arrangement(rng, eps=0.01)
        res = solve_value(x)
        p = res.p_star.scalar()
        if 0.0 < p < 1.0:
            assert abs(h(x, scalar_param(p))) <= 1e-6 * max(1.0, float(x.l1()))


def test_solve_errors():
    with pytest.raises(EmptyArrangementError):
        solve_value(make_arrangement(PB, {}))
    with pytest.raises(ConfigurationError):
        solve_value(make_arrangement(PB, {(1, "1"): 1}), tol=0.5)


def test_solve_to_dict_shapes():
    d = solve_value(make_arrangement(PB, {(3, "0"): 4})).to_dict()
    assert set(d) == {"e", "pStar", "degeneracy", "iterations"}
    assert isinstance(d["pStar"], float) and d["degeneracy"] == "regular"
    dp = solve_value(make_arrangement(PROPER3, {(2, "1"): 1})).to_dict()
    assert isinstance(dp["pStar"], list) and len(dp["pStar"]) == 3


def test_solve_simplex_symmetric_uniform():
    x = make_arrangement(PROPER3, {(2, "1"): 1, (2, "2"): 1, (2, "3"): 1})
    res = solve_value(x)
    assert res.e == pytest.approx(1 / 3, abs=1e-9)
    for v in res.p_star.values:
        assert v == pytest.approx(1 / 3, abs=1e-6)


def test_solve_simplex_pinned_value():
    # closed form worked out by hand: min over t of 1 - 2t(1-t) + t is 7/8 at t=1/4
    x = make_arrangement(PAN2, {(2, "00"): 1, (1, "10"): 1})
    res = solve_value(x)
    assert res.e == pytest.approx(0.875, abs=1e-7)
    assert res.p_star.values[0] == pytest.approx(0.25, abs=1e-4)


def test_solve_repeat_calls_agree():
    rng = random.Random(44)
    for _ in range(20):
        x = random_arrangement(rng)
        a = solve_value(x)
        b = solve_value(x)
        assert a.e == b.e and a.p_star == b.p_star


# ------------------------------------------------------------------ degeneracy

def test_classify_each_class():
    assert classify_degeneracy(make_arrangement(PB, {(1, "1"): 3})) is Degeneracy.FLAT
    neg = make_arrangement(PB, {(1, "1"): 10, (2, "2"): 1})
    assert classify_degeneracy(neg) is Degeneracy.NEGATIVE
    pos = make_arrangement(PB, {(1, "2"): 10, (2, "1"): 1})
    assert classify_degeneracy(pos) is Degeneracy.POSITIVE
    reg = make_arrangement(PB, {(2, "1"): 1, (2, "2"): 1})
    assert classify_degeneracy(reg) is Degeneracy.REGULAR
    # flat wins the tie against the one-sided tests
    flat_heavy = make_arrangement(PB, {(1, "1"): 10, (1, "2"): 1})
    assert classify_degeneracy(flat_heavy) is Degeneracy.FLAT


def test_flat_iff_no_deep_sand():
    rng = random.Random(45)
    for _ in range(100):
        x = random_arrangement(rng, level_floor=0)
        assert (classify_degeneracy(x) is Degeneracy.FLAT) == (float(x.semi12()) == 0.0)


def test_classify_list_kind_supported():
    x = make_arrangement(LIST, {(1, "1"): 5, (2, "2"): 1})
    assert classify_degeneracy(x) is Degeneracy.NEGATIVE


def test_classify_simplex_kinds_flat_or_regular():
    assert classify_degeneracy(make_arrangement(PROPER3, {(1, "1"): 1})) is Degeneracy.FLAT
    assert classify_degeneracy(make_arrangement(PROPER3, {(2, "1"): 1})) is Degeneracy.REGULAR


def test_distance_pinned_value():
    x = make_arrangement(PB, {(3, "0"): 4})
    assert distance_to_degenerate(x) == pytest.approx(4.0)
    y, cost, side = nearest_degenerate(x)
    # enough deep mass here, so the closed form is achieved exactly
    assert cost == pytest.approx(4.0, abs=1e-12)
    assert y.is_empty()


def test_distance_zero_iff_degenerate():
    rng = random.Random(46)
    for _ in range(100):
        y = random_degenerate_arrangement(rng)
        assert classify_degeneracy(y) is not Degeneracy.REGULAR
        assert distance_to_degenerate(y) <= 1e-9


def test_distance_sandwich():
    # the closed form is a lower estimate of the set distance; the projection
    # achieves the set distance exactly, so no sampled degenerate point may
    # come closer than the projection cost
    rng = random.Random(47)
    for _ in range(60):
        x = random_arrangement(rng)
        dist = distance_to_degenerate(x)
        y, cost, side = nearest_degenerate(x)
        assert dist <= cost + 1e-9
        assert l1_between(x, y) == pytest.approx(cost, abs=1e-9)
        # the projection sits on the boundary, so allow rounding dust
        assert distance_to_degenerate(y) <= 1e-9 * max(1.0, float(y.l1()))
        assert side in (Degeneracy.FLAT, Degeneracy.NEGATIVE, Degeneracy.POSITIVE)
        for _ in range(20):
            z = random_degenerate_arrangement(rng, max_level=x.max_level)
            assert l1_between(x, z) >= cost - 1e-9


def test_eps_degenerate_matches_distance():
    rng = random.Random(48)
    for _ in range(100):
        x = random_arrangement(rng)
        eps = rng.choice((0.01, 0.05, 0.2))
        assert is_eps_degenerate(x, eps) == (
            distance_to_degenerate(x) <= eps * float(x.l1())
        )


def test_distance_rejects_simplex_kinds():
    with pytest.raises(UnsupportedKindError):
        distance_to_degenerate(make_arrangement(PROPER3, {(2, "1"): 1}))


# ------------------------------------------------------------------ constants

def test_constants_pinned_values():
    c = constants(0.1, 2)
    assert c.Q == pytest.approx(0.0125, abs=1e-15)
    assert c.P == pytest.approx(48.98979485566356, rel=1e-12)
    assert c.C == pytest.approx(9600.0, rel=1e-12)
    assert c.mu == pytest.approx(6.510416666666668e-07, rel=1e-12)
    assert c.delta == pytest.approx(c.mu / 4, rel=1e-12)


def test_constants_formulas():
    rng = random.Random(49)
    for _ in range(50):
        eps = rng.uniform(0.01, 0.5)
        n = rng.randint(1, 6)
        c = constants(eps, n)
        q = eps / (2 * n * n)
        assert c.Q == pytest.approx(q, rel=1e-12)
        assert c.P == pytest.approx(math.sqrt(3) * n**1.5 * q ** (2 - n) / eps, rel=1e-12)
        assert c.C == pytest.approx(n * n * c.P * c.P, rel=1e-12)
        half = constants(eps / 2, n)
        assert c.mu == pytest.approx(min(eps / 4, eps / (4 * half.C)), rel=1e-12)
        assert c.delta == pytest.approx(c.mu / (n * n), rel=1e-12)
        assert c.mu <= eps / 4 + 1e-15


def test_constants_validation():
    with pytest.raises(ConfigurationError):
        constants(1.5, 2)
    with pytest.raises(ConfigurationError):
        constants(0.1, 0)


# ------------------------------------------------------------------ stability

def test_pstar_interior_for_regular_arrangements():
    rng = random.Random(50)
    eps = 0.05
    for _ in range(60):
        x = random_regular_arrangement(rng, eps=eps)
        if is_eps_degenerate(x, eps):
            continue
        c = constants(eps, x.max_level)
        p = solve_value(x).p_star.scalar()
        assert c.Q < p < 1 - c.Q


def test_regular_mass_lower_bounds():
    rng = random.Random(51)
    eps = 0.05
    for _ in range(60):
        x = random_regular_arrangement(rng, eps=eps)
        l1 = float(x.l1())
        assert float(x.semi12()) >= eps * l1 - 1e-12
        side1 = sum(a for (lvl, p), a in x.amounts.items() if p in ("0", "1"))
        side2 = sum(a for (lvl, p), a in x.amounts.items() if p in ("0", "2"))
        assert side1 >= eps * l1 - 1e-12
        assert side2 >= eps * l1 - 1e-12


def test_pstar_stability_on_nearby_pairs():
    rng = random.Random(52)
    eps = 0.05
    for _ in range(40):
        x = random_regular_arrangement(rng, eps=eps, max_level=3)
        y = perturb(rng, x, 0.05)
        if distance_to_degenerate(y) <= eps * float(y.l1()):
            continue
        c = constants(eps, max(x.max_level, y.max_level))
        px = solve_value(x).p_star.scalar()
        py = solve_value(y).p_star.scalar()
        bound = c.P * l1_between(x, y) / min(float(x.l1()), float(y.l1()))
        assert abs(px - py) <= bound + 1e-9


def test_second_order_value_bound():
    rng = random.Random(53)
    eps = 0.05
    for _ in range(40):
        x = random_regular_arrangement(rng, eps=eps, max_level=3)
        y = perturb(rng, x, 0.05)
        if distance_to_degenerate(y) <= eps * float(y.l1()):
            continue
        lx, ly = float(x.l1()), float(y.l1())
        if not (lx / 2 <= ly <= lx):
            continue
        c = constants(eps, max(x.max_level, y.max_level))
        res_x = solve_value(x)
        gap = float(potential(y, res_x.p_star)) - solve_value(y).e
        assert gap >= -1e-9
        assert gap <= c.C * l1_between(x, y) ** 2 / lx + 1e-9
