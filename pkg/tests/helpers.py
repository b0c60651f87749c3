"""Shared generators and independent mini-oracles for the test suite."""
from __future__ import annotations

import random
from fractions import Fraction

from goldsand import (
    Arrangement,
    ParamPoint,
    PathSystem,
    build_path_system,
    distance_to_degenerate,
    make_arrangement,
)

PB = build_path_system("property_b")
LIST = build_path_system("list")
PROPER2 = build_path_system("proper", r=2)
PROPER3 = build_path_system("proper", r=3)
PAN2 = build_path_system("panchromatic", r=2)
PAN3 = build_path_system("panchromatic", r=3)


def live_paths(system: PathSystem) -> list[str]:
    return [p for p in system.paths if p != system.dead]


def random_arrangement(
    rng: random.Random,
    system: PathSystem = PB,
    max_level: int = 4,
    cells: int | None = None,
    integer: bool = False,
    level_floor: int = 1,
) -> Arrangement:
    live = live_paths(system)
    pool = [(lvl, p) for lvl in range(level_floor, max_level + 1) for p in live]
    n = cells if cells is not None else rng.randint(1, min(6, len(pool)))
    sand = {}
    for cell in rng.sample(pool, min(n, len(pool))):
        sand[cell] = rng.randint(1, 6) if integer else round(rng.uniform(0.05, 5.0), 6)
    mode = "discrete" if integer else "continuous"
    return make_arrangement(system, sand, mode=mode, max_level=max_level)


def random_regular_arrangement(
    rng: random.Random,
    eps: float,
    max_level: int = 4,
    system: PathSystem = PB,
) -> Arrangement:
    for _ in range(500):
        x = random_arrangement(rng, system=system, max_level=max_level)
        if distance_to_degenerate(x) > eps * float(x.l1()):
            return x
    raise AssertionError("rejection sampling starved out")


def random_degenerate_arrangement(rng: random.Random, max_level: int = 4) -> Arrangement:
    shape = rng.choice(("flat", "neg", "pos"))
    if shape == "flat":
        sand = {}
        for p in ("0", "1", "2"):
            if rng.random() < 0.75:
                sand[(1, p)] = round(rng.uniform(0.2, 5.0), 6)
        if not sand:
            sand[(1, "1")] = 1.0
        return make_arrangement(PB, sand, max_level=rng.choice((1, max_level)))
    x = random_arrangement(rng, max_level=max_level)
    sand = dict(x.amounts)
    d1 = sum(lvl * a for (lvl, p), a in sand.items() if p in ("0", "1"))
    d2 = sum(lvl * a for (lvl, p), a in sand.items() if p in ("0", "2"))
    if shape == "neg":
        need = d2 - (x.amount(1, "1") + x.amount(1, "0"))
        if need > 0:
            sand[(1, "1")] = sand.get((1, "1"), 0) + need + rng.uniform(0.0, 0.5)
    else:
        need = d1 - (x.amount(1, "2") + x.amount(1, "0"))
        if need > 0:
            sand[(1, "2")] = sand.get((1, "2"), 0) + need + rng.uniform(0.0, 0.5)
    return make_arrangement(PB, sand, max_level=x.max_level)


def random_param(rng: random.Random, system: PathSystem) -> ParamPoint:
    if system.r is None:
        return ParamPoint((rng.random(),))
    cuts = sorted(rng.random() for _ in range(system.r - 1))
    vals, prev = [], 0.0
    for c in cuts + [1.0]:
        vals.append(c - prev)
        prev = c
    return ParamPoint(tuple(vals))


def rational_scalar(rng: random.Random, den: int = 12) -> Fraction:
    return Fraction(rng.randint(0, den), den)


def rational_simplex(rng: random.Random, r: int, den: int = 12) -> tuple[Fraction, ...]:
    cuts = sorted(rng.randint(0, den) for _ in range(r - 1))
    parts, prev = [], 0
    for c in cuts + [den]:
        parts.append(Fraction(c - prev, den))
        prev = c
    return tuple(parts)


def recursion_weight(system: PathSystem, probs, level: int, path: str):
    """Survival chance by direct expectation over labelled replies.

    Independent of the closed forms: walks the transition table level by
    level, which is the defining recursion of the per-cell weights.
    """
    if path == system.dead:
        return 0
    if level == 0:
        return 1
    total = 0
    for label, pr in zip(system.labels, probs):
        total = total + pr * recursion_weight(system, probs, level - 1, system.step(path, label))
    return total


def scalar_probs(p):
    return (p, 1 - p)


def l1_between(x: Arrangement, y: Arrangement) -> float:
    cells = set(x.amounts) | set(y.amounts)
    return float(sum(abs(x.amounts.get(c, 0) - y.amounts.get(c, 0)) for c in cells))


def perturb(rng: random.Random, x: Arrangement, scale: float) -> Arrangement:
    sand = dict(x.amounts)
    for cell in list(sand):
        if rng.random() < 0.8:
            sand[cell] = max(0.0, sand[cell] + rng.uniform(-scale, scale))
    live = live_paths(x.system)
    if rng.random() < 0.3:
        cell = (rng.randint(1, x.max_level), rng.choice(live))
        sand[cell] = sand.get(cell, 0.0) + rng.uniform(0.0, scale)
    sand = {c: a for c, a in sand.items() if a > 0}
    if not sand:
        sand = dict(x.amounts)
    return make_arrangement(x.system, sand, max_level=x.max_level)
