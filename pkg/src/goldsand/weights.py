"""Per-cell survival weights, the potential, and its parameter derivative.

Every family's weight has one probabilistic meaning: ``weight(system, p, i,
m)`` is the probability that ``i`` independent labels drawn from ``p`` leave
a unit of sand on path ``m`` alive all the way down to level 0.  Dead sand
has weight 0; level-0 sand has weight 1 for every family (it is already
harvested).  The potential of an arrangement is the amounts-weighted sum,
which therefore tracks live value and banked harvest in one number.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .core import (
    KIND_LIST,
    KIND_PANCHROMATIC,
    KIND_PROPER,
    KIND_PROPERTY_B,
    Arrangement,
    Cell,
    ConfigurationError,
    Num,
    PathSystem,
    UnsupportedKindError,
    mask_from_path,
)


@dataclass(frozen=True)
class ParamPoint:
    """The weight-family parameter: one scalar in [0,1], or a simplex point."""

    values: tuple[Num, ...]

    def scalar(self) -> Num:
        if len(self.values) != 1:
            raise ConfigurationError("not a scalar parameter")
        return self.values[0]


def scalar_param(p: Num) -> ParamPoint:
    return ParamPoint((p,))


def uniform_param(r: int) -> ParamPoint:
    return ParamPoint(tuple(Fraction(1, r) for _ in range(r)))


def validate_param(system: PathSystem, p: ParamPoint) -> None:
    kind = system.kind
    if kind in (KIND_PROPERTY_B, KIND_LIST):
        if len(p.values) != 1:
            raise ConfigurationError(f"{kind} takes a scalar parameter")
        v = p.values[0]
        if not 0 <= v <= 1:
            raise ConfigurationError(f"parameter {v!r} outside [0, 1]")
        return
    if kind in (KIND_PROPER, KIND_PANCHROMATIC):
        if len(p.values) != (system.r or 0):
            raise ConfigurationError(f"{kind} takes an r-vector parameter")
        if any(v < 0 for v in p.values):
            raise ConfigurationError("simplex parameter has a negative component")
        total = sum(p.values)
        if abs(float(total) - 1.0) > 1e-12:
            raise ConfigurationError(f"simplex parameter sums to {total}, not 1")
        return
    raise UnsupportedKindError(f"no weight family for kind {kind!r}")


def _panch_terms(r: int, u_mask: int):
    """Yield (mask, sign) for all masks M with U <= M < full, M != full."""
    full = (1 << r) - 1
    comp = full & ~u_mask
    sub = comp
    while True:
        mask = u_mask | sub
        if mask != full:
            bits = bin(mask).count("1")
            yield mask, (1 if (r - bits - 1) % 2 == 0 else -1)
        if sub == 0:
            break
        sub = (sub - 1) & comp


def _panch_weight(r: int, vals: Sequence[Num], level: int, path: str) -> Num:
    u_mask = mask_from_path(path)
    out: Num = 0
    for mask, sign in _panch_terms(r, u_mask):
        s: Num = 0
        for idx in range(r):
            if mask & (1 << idx):
                s = s + vals[idx]
        out = out + sign * s**level
    return out


def weight(system: PathSystem, p: ParamPoint, level: int, path: str) -> Num:
    """Survival weight of one unit of sand at ``(level, path)`` under ``p``.

    Dead path: 0 (by convention -- the sand is gone).  Level 0: 1 for every
    live path.  Exact when ``p`` carries :class:`~fractions.Fraction` values.
    """
    if path == system.dead:
        return 0
    if path not in system.paths:
        raise ConfigurationError(f"unknown path {path!r}")
    if level < 0:
        raise ConfigurationError(f"bad level {level!r}")
    if level == 0:
        return 1
    kind = system.kind
    vals = p.values
    if kind == KIND_PROPERTY_B:
        v = vals[0]
        if path == "0":
            return v**level + (1 - v) ** level
        if path == "1":
            return v**level
        return (1 - v) ** level
    if kind == KIND_LIST:
        v = vals[0]
        return v**level if path == "1" else (1 - v) ** level
    if kind == KIND_PROPER:
        if path == "0":
            return sum(pj**level for pj in vals)
        return vals[int(path) - 1] ** level
    if kind == KIND_PANCHROMATIC:
        return _panch_weight(system.r or 0, vals, level, path)
    raise UnsupportedKindError(f"no weight family for kind {kind!r}")


def amounts_potential(system: PathSystem, amounts: Mapping[Cell, Num], p: ParamPoint) -> Num:
    total: Num = 0
    for (lvl, path), a in amounts.items():
        if a:
            total = total + a * weight(system, p, lvl, path)
    return total


def potential(x: Arrangement, p: ParamPoint) -> Num:
    """The inner product of the arrangement with the weight vector at ``p``."""
    validate_param(x.system, p)
    return amounts_potential(x.system, x.amounts, p)


def shifted_amounts_potential(
    system: PathSystem, amounts: Mapping[Cell, Num], tau: int, p: ParamPoint
) -> Num:
    total: Num = 0
    for (lvl, path), a in amounts.items():
        if lvl >= 1 and a:
            total = total + a * weight(system, p, lvl - 1, system.step(path, tau))
    return total


def shifted_potential(x: Arrangement, tau: int, p: ParamPoint) -> Num:
    """Potential of the arrangement after every level >= 1 cell runs under ``tau``.

    Models the running part of a move: (n, m) lands at (n-1, tau(m)), with
    dead arrivals weighing 0 and level-0 arrivals weighing 1.  Level-0 input
    cells are not shiftable and are excluded.
    """
    validate_param(x.system, p)
    return shifted_amounts_potential(x.system, x.amounts, tau, p)


def h(x: Arrangement, p: ParamPoint):
    """Derivative of ``potential(x, .)`` at ``p``.

    Scalar for the two-label kinds; for the simplex kinds the full
    coordinate gradient (callers project onto the simplex tangent).
    """
    validate_param(x.system, p)
    kind = x.system.kind
    if kind in (KIND_PROPERTY_B, KIND_LIST):
        v = p.values[0]
        out: Num = 0
        for (lvl, path), a in x.amounts.items():
            if lvl == 0 or not a:
                continue
            if path == "0":
                out = out + a * lvl * (v ** (lvl - 1) - (1 - v) ** (lvl - 1))
            elif path == "1":
                out = out + a * lvl * v ** (lvl - 1)
            else:
                out = out - a * lvl * (1 - v) ** (lvl - 1)
        return out
    r = x.system.r or 0
    grad = [0] * r
    if kind == KIND_PROPER:
        for (lvl, path), a in x.amounts.items():
            if lvl == 0 or not a:
                continue
            if path == "0":
                for j in range(r):
                    grad[j] = grad[j] + a * lvl * p.values[j] ** (lvl - 1)
            else:
                j = int(path) - 1
                grad[j] = grad[j] + a * lvl * p.values[j] ** (lvl - 1)
        return tuple(grad)
    if kind == KIND_PANCHROMATIC:
        for (lvl, path), a in x.amounts.items():
            if lvl == 0 or not a:
                continue
            for mask, sign in _panch_terms(r, mask_from_path(path)):
                s: Num = 0
                for idx in range(r):
                    if mask & (1 << idx):
                        s = s + p.values[idx]
                term = a * sign * lvl * s ** (lvl - 1)
                for idx in range(r):
                    if mask & (1 << idx):
                        grad[idx] = grad[idx] + term
        return tuple(grad)
    raise UnsupportedKindError(f"no weight family for kind {kind!r}")
