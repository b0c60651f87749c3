"""Game-value minimization, degeneracy classification, and proof constants.

The value of an arrangement is the minimum of its potential over the weight
parameter.  For the two-label kinds the derivative is strictly increasing
whenever any sand sits at level >= 2, so bisection is exact; the simplex
kinds use entropic mirror descent with a convexity gap certificate plus a
coarse barycentric grid as a safety net.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator

from .core import (
    BUILTIN_KINDS,
    KIND_PANCHROMATIC,
    ONE_PARAM_KINDS,
    Arrangement,
    Cell,
    ConfigurationError,
    EmptyArrangementError,
    Num,
    UnsupportedKindError,
    canonical_cells,
)
from .weights import ParamPoint, h, potential


class Degeneracy(str, Enum):
    REGULAR = "regular"
    POSITIVE = "positively_degenerate"
    NEGATIVE = "negatively_degenerate"
    FLAT = "flat"


@dataclass(frozen=True)
class ValueResult:
    e: float
    p_star: ParamPoint
    degeneracy: Degeneracy
    iterations: int

    def to_dict(self) -> dict:
        p = self.p_star.values
        return {
            "e": float(self.e),
            "pStar": float(p[0]) if len(p) == 1 else [float(v) for v in p],
            "degeneracy": self.degeneracy.value,
            "iterations": self.iterations,
        }


@dataclass(frozen=True)
class Constants:
    """The chained constants behind the Pusher guarantees, per (epsilon, N)."""

    epsilon: float
    N: int
    Q: float
    P: float
    C: float
    mu: float
    delta: float


def _qpc(eps: float, n: int) -> tuple[float, float, float]:
    q = eps / (2 * n * n)
    p = math.sqrt(3.0) * n**1.5 * q ** (2 - n) / eps
    c = n * n * p * p
    return q, p, c


def constants(eps: float, n: int) -> Constants:
    """Q, P, C, mu, delta for the given accuracy and level bound.

    mu is the guaranteed step fraction (it uses C evaluated at eps/2) and
    delta = mu / N**2 is the guaranteed relative drop of the level-weighted
    mass per move.
    """
    if not 0 < eps < 1:
        raise ConfigurationError(f"eps must be in (0, 1), got {eps!r}")
    if not isinstance(n, int) or n < 1:
        raise ConfigurationError(f"N must be a positive integer, got {n!r}")
    try:
        q, p, c = _qpc(eps, n)
        _, _, c_half = _qpc(eps / 2, n)
        mu = min(eps / 4, eps / (4 * c_half))
    except OverflowError as exc:
        raise ConfigurationError(f"constants overflow doubles for eps={eps}, N={n}") from exc
    if not mu > 0:
        raise ConfigurationError(f"constants underflow doubles for eps={eps}, N={n}")
    return Constants(eps, n, q, p, c, mu, mu / (n * n))


def _side_sums(x: Arrangement) -> tuple[Num, Num, Num, Num]:
    """(x_{1,p1}+x_{1,p0}, x_{1,p2}+x_{1,p0}, sum i(x_{i,p1}+x_{i,p0}), sum i(x_{i,p2}+x_{i,p0}))."""
    lvl1_1 = x.amount(1, "1") + x.amount(1, "0")
    lvl1_2 = x.amount(1, "2") + x.amount(1, "0")
    d1: Num = 0
    d2: Num = 0
    for (lvl, path), a in x.amounts.items():
        if path == "0":
            d1 = d1 + lvl * a
            d2 = d2 + lvl * a
        elif path == "1":
            d1 = d1 + lvl * a
        elif path == "2":
            d2 = d2 + lvl * a
    return lvl1_1, lvl1_2, d1, d2


def classify_degeneracy(x: Arrangement) -> Degeneracy:
    """Flat / negatively / positively degenerate / regular.

    The one-sided classes exist only for the two-label kinds; other kinds
    report Flat or Regular.
    """
    if x.semi12() == 0:
        return Degeneracy.FLAT
    if x.system.kind not in ONE_PARAM_KINDS:
        return Degeneracy.REGULAR
    lvl1_1, lvl1_2, d1, d2 = _side_sums(x)
    if lvl1_1 >= d2:
        return Degeneracy.NEGATIVE
    if lvl1_2 >= d1:
        return Degeneracy.POSITIVE
    return Degeneracy.REGULAR


def distance_to_degenerate(x: Arrangement) -> float:
    """Closed-form lower estimate of the l1 distance to the degenerate set.

    Minimum of the two halfspace distances deficit/N (N being the largest
    level coefficient) and the flat distance (all sand at levels >= 2).
    """
    if x.system.kind not in ONE_PARAM_KINDS:
        raise UnsupportedKindError("degeneracy distance needs a two-label kind")
    lvl1_1, lvl1_2, d1, d2 = _side_sums(x)
    deficit_neg = max(0, d2 - lvl1_1)
    deficit_pos = max(0, d1 - lvl1_2)
    n = x.max_level
    return float(min(deficit_neg / n, deficit_pos / n, x.semi12()))


def is_eps_degenerate(x: Arrangement, eps: float) -> bool:
    if not 0 < eps < 1:
        raise ConfigurationError(f"eps must be in (0, 1), got {eps!r}")
    return distance_to_degenerate(x) <= eps * float(x.l1())


def nearest_degenerate(x: Arrangement) -> tuple[Arrangement, float, Degeneracy]:
    """Exact nearest degenerate arrangement in l1, with the achieved cost.

    Unlike :func:`distance_to_degenerate` (a closed form over the ambient
    halfspace) this is constructive and respects the available sand: deficits
    are covered greedily by the moves with the largest coefficient -- sand
    removed from (i, path2)/(i, path0) counts i per unit, adding sand at
    (1, heavy side) counts 1 -- so the returned cost can exceed the closed
    form but never the flat distance.
    """
    if x.system.kind not in ONE_PARAM_KINDS:
        raise UnsupportedKindError("degeneracy projection needs a two-label kind")
    cls = classify_degeneracy(x)
    if cls != Degeneracy.REGULAR:
        return x, 0.0, cls

    lvl1_1, lvl1_2, d1, d2 = _side_sums(x)

    def one_sided(heavy: str, light: str, deficit: Num) -> tuple[dict[Cell, Num], float]:
        # cover `deficit` by removing (i, light)/(i>=2, path0) sand (gain i)
        # and, as a backstop, adding sand at (1, heavy) (gain 1)
        amounts = dict(x.amounts)
        options: list[tuple[int, Cell]] = []
        for (lvl, path), _ in x.amounts.items():
            if path == light and lvl >= 1:
                options.append((lvl, (lvl, path)))
            elif path == "0" and lvl >= 2:
                options.append((lvl, (lvl, path)))
        options.sort(key=lambda t: (-t[0], t[1][1] != light, t[1]))
        cost = 0.0
        left: Num = deficit
        for gain, cell in options:
            if left <= 0:
                break
            if gain < 1:
                break
            take = min(amounts[cell], left / gain)
            if take > 0:
                rest = amounts[cell] - take
                if rest <= 0:
                    del amounts[cell]
                else:
                    amounts[cell] = rest
                cost += float(take)
                left = left - gain * take
        if left > 0:
            cell = (1, heavy)
            amounts[cell] = amounts.get(cell, 0) + left
            cost += float(left)
        return amounts, cost

    neg_amounts, neg_cost = one_sided("1", "2", d2 - lvl1_1)
    pos_amounts, pos_cost = one_sided("2", "1", d1 - lvl1_2)
    flat_amounts = {c: a for c, a in x.amounts.items() if c[0] <= 1}
    flat_cost = float(x.semi12())

    best = (neg_amounts, neg_cost, Degeneracy.NEGATIVE)
    if pos_cost < best[1]:
        best = (pos_amounts, pos_cost, Degeneracy.POSITIVE)
    if flat_cost < best[1]:
        best = (flat_amounts, flat_cost, Degeneracy.FLAT)
    y = Arrangement(x.system, x.max_level, best[0], "continuous")
    return y, best[1], best[2]


# ---------------------------------------------------------------------------
# minimization


def _solve_one_param(x: Arrangement, tol: float) -> ValueResult:
    cls = classify_degeneracy(x)
    if cls == Degeneracy.FLAT:
        # potential is affine in p: slope = level-1 mass on path 1 minus path 2
        slope = x.amount(1, "1") - x.amount(1, "2")
        if slope > 0:
            p = 0.0
        elif slope < 0:
            p = 1.0
        else:
            p = 0.5
        pp = ParamPoint((p,))
        return ValueResult(float(potential(x, pp)), pp, cls, 0)
    if cls == Degeneracy.NEGATIVE:
        pp = ParamPoint((0.0,))
        return ValueResult(float(potential(x, pp)), pp, cls, 0)
    if cls == Degeneracy.POSITIVE:
        pp = ParamPoint((1.0,))
        return ValueResult(float(potential(x, pp)), pp, cls, 0)
    # regular: h is strictly increasing and changes sign on (0, 1)
    lo, hi = 0.0, 1.0
    h_lo = float(h(x, ParamPoint((lo,))))
    h_hi = float(h(x, ParamPoint((hi,))))
    iterations = 0
    if h_lo >= 0:
        p = 0.0
    elif h_hi <= 0:
        p = 1.0
    else:
        while hi - lo > 1e-12:
            mid = 0.5 * (lo + hi)
            hm = float(h(x, ParamPoint((mid,))))
            iterations += 1
            if hm < 0:
                lo = mid
            elif hm > 0:
                hi = mid
            else:
                lo = hi = mid
        p = 0.5 * (lo + hi)
    pp = ParamPoint((p,))
    return ValueResult(float(potential(x, pp)), pp, cls, iterations)


def _barycentric_grid(r: int, res: int) -> Iterator[tuple[float, ...]]:
    """All points of the simplex grid with denominators res."""

    def rec(prefix: list[int], left: int, slots: int):
        if slots == 1:
            yield prefix + [left]
            return
        for v in range(left + 1):
            yield from rec(prefix + [v], left - v, slots - 1)

    for comp in rec([], res, r):
        yield tuple(c / res for c in comp)


def _grid_resolution(r: int) -> int:
    if r <= 3:
        return 40
    return {4: 16, 5: 10, 6: 8, 7: 6, 8: 5, 9: 4, 10: 4}.get(r, 3)


def _mirror_descent(x: Arrangement, start: tuple[float, ...], gap_target: float, max_iters: int):
    """Entropic mirror descent on the simplex; returns (p, f, iterations).

    The stopping certificate is the convexity gap bound
    f(p) - f* <= grad . p - min_j grad_j.
    """
    r = len(start)
    p = list(start)
    pp = ParamPoint(tuple(p))
    f = float(potential(x, pp))
    eta = 1.0
    iterations = 0
    for _ in range(max_iters):
        g = [float(v) for v in h(x, pp)]
        gap = sum(gi * pi for gi, pi in zip(g, p)) - min(g)
        if gap <= gap_target:
            break
        iterations += 1
        scale = max(abs(v) for v in g) or 1.0
        improved = False
        for _ in range(60):
            trial = [pi * math.exp(-eta * gi / scale) for pi, gi in zip(p, g)]
            z = sum(trial)
            if z <= 0.0 or not math.isfinite(z):
                # every component underflowed (or blew up); shrink the step
                eta *= 0.5
                continue
            trial = [max(ti / z, 1e-300) for ti in trial]
            tp = ParamPoint(tuple(trial))
            ft = float(potential(x, tp))
            if ft <= f:
                p, pp, f = trial, tp, ft
                eta = min(eta * 1.5, 1e6)
                improved = True
                break
            eta *= 0.5
        if not improved:
            break
    return tuple(p), f, iterations


def _solve_simplex(x: Arrangement, tol: float) -> ValueResult:
    r = x.system.r or 0
    cls = Degeneracy.FLAT if x.semi12() == 0 else Degeneracy.REGULAR
    if cls == Degeneracy.FLAT:
        # affine potential: the minimum sits at a vertex (or everywhere)
        uniform = tuple(1.0 / r for _ in range(r))
        best_p, best_f = uniform, float(potential(x, ParamPoint(uniform)))
        for j in range(r):
            vertex = tuple(1.0 if i == j else 0.0 for i in range(r))
            f = float(potential(x, ParamPoint(vertex)))
            if f < best_f - 1e-15 * max(1.0, abs(best_f)):
                best_p, best_f = vertex, f
        return ValueResult(best_f, ParamPoint(best_p), cls, 0)
    gap_target = 0.5 * tol * float(x.l1())
    max_iters = 2000 if r <= 4 else (300 if r <= 8 else 80)
    uniform = tuple(1.0 / r for _ in range(r))
    best_p, best_f, iterations = _mirror_descent(x, uniform, gap_target, max_iters)
    if x.system.kind == KIND_PANCHROMATIC or iterations >= max_iters:
        # barycentric safety net, locally refined by a warm descent; the
        # descent certificate assumes convexity, which only the sum-of-powers
        # family guarantees outright

        res = _grid_resolution(r)
        grid_p, grid_f = None, best_f
        for point in _barycentric_grid(r, res):
            f = float(potential(x, ParamPoint(point)))
            if f < grid_f:
                grid_p, grid_f = point, f
        if grid_p is not None:
            interior = tuple(max(v, 1e-12) for v in grid_p)
            z = sum(interior)
            interior = tuple(v / z for v in interior)
            warm_p, warm_f, it2 = _mirror_descent(x, interior, gap_target, max_iters)
            iterations += it2
            if warm_f < best_f:
                best_p, best_f = warm_p, warm_f
            if grid_f < best_f:
                best_p, best_f = grid_p, grid_f
    return ValueResult(best_f, ParamPoint(best_p), cls, iterations)


# solve_value is pure, and adversarial searches revisit the same arrangement
# across many branches; a bounded memo makes those searches tractable
_SOLVE_CACHE: dict = {}
_SOLVE_CACHE_MAX = 200_000


def solve_value(x: Arrangement, tol: float = 1e-9) -> ValueResult:
    """Minimize the potential over the parameter; also classifies degeneracy.

    Accuracy: |e - true min| <= tol * l1(x).  Two-label kinds get the exact
    bisection/endpoint treatment; simplex kinds the descent-plus-grid search.
    """
    if x.system.kind not in BUILTIN_KINDS:
        raise UnsupportedKindError(f"no value solver for kind {x.system.kind!r}")
    if x.is_empty():
        raise EmptyArrangementError("cannot value an empty arrangement")
    if not (isinstance(tol, float) and 0 < tol <= 1e-3):
        raise ConfigurationError(f"tol must be in (0, 1e-3], got {tol!r}")
    key = (x.system, x.max_level, canonical_cells(x), tol)
    hit = _SOLVE_CACHE.get(key)
    if hit is not None:
        return hit
    if x.system.kind in ONE_PARAM_KINDS:
        result = _solve_one_param(x, tol)
    else:
        result = _solve_simplex(x, tol)
    if len(_SOLVE_CACHE) < _SOLVE_CACHE_MAX:
        _SOLVE_CACHE[key] = result
    return result
