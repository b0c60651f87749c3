"""Path systems, arrangements, and single-round move semantics.

The playing field is a sparse grid of cells indexed by ``(level, path)``.
Each round the Pusher splits the sand in every cell into a standing part and
a running part; the Remover then picks one transition label, and all running
sand descends one level while switching paths along that transition.  Sand
that reaches level 0 on a live path is harvested (Pusher's win); sand routed
onto the dead path is destroyed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Union

Num = Union[int, float, Fraction]
Cell = tuple[int, str]

DEAD = "dead"

KIND_PROPERTY_B = "property_b"
KIND_PROPER = "proper"
KIND_PANCHROMATIC = "panchromatic"
KIND_LIST = "list"
KIND_CUSTOM = "custom"

ONE_PARAM_KINDS = (KIND_PROPERTY_B, KIND_LIST)
SIMPLEX_KINDS = (KIND_PROPER, KIND_PANCHROMATIC)
BUILTIN_KINDS = ONE_PARAM_KINDS + SIMPLEX_KINDS

#: relative threshold below which post-move float dust is flushed to zero
DUST = 1e-15


class GoldSandError(Exception):
    """Base class for every error raised by this package."""


class ConfigurationError(GoldSandError):
    """Bad parameters: unknown kind, r out of range, invalid tolerances."""


class UnsupportedKindError(GoldSandError):
    """The operation is not defined for this game family."""


class EmptyArrangementError(GoldSandError):
    """An operation that needs sand was handed an empty arrangement."""


class InvalidMoveError(GoldSandError):
    """A split exceeds the available sand or names an unknown label."""


class PreconditionError(GoldSandError):
    """A strategy operation was called outside its regime."""


class InconclusiveError(GoldSandError):
    """An oracle ran out of budget before reaching a verdict."""


class StreamError(GoldSandError):
    """A coloring stream is malformed or references unknown edges."""


@dataclass(frozen=True)
class PathSystem:
    """A finite set of live paths plus one descent map per move label.

    ``transitions[label - 1]`` maps every live path to its successor (which
    may be the dead path).  The dead path is absorbing and is not listed in
    ``paths``.
    """

    kind: str
    paths: tuple[str, ...]
    dead: str
    transitions: tuple[Mapping[str, str], ...]
    r: int | None = None

    def __post_init__(self) -> None:
        if not self.paths:
            raise ConfigurationError("a path system needs at least one live path")
        if self.dead in self.paths:
            raise ConfigurationError("the dead path must not be listed as live")
        if not self.transitions:
            raise ConfigurationError("a path system needs at least one transition")
        for table in self.transitions:
            for m in self.paths:
                if m not in table:
                    raise ConfigurationError(f"transition not total: missing path {m!r}")
                dest = table[m]
                if dest != self.dead and dest not in self.paths:
                    raise ConfigurationError(f"transition leaves the path set: {m!r} -> {dest!r}")

    def __hash__(self) -> int:
        # the generated hash chokes on the transition dicts; flatten them
        tables = tuple(tuple(sorted(t.items())) for t in self.transitions)
        return hash((self.kind, self.paths, self.dead, tables, self.r))

    @property
    def labels(self) -> range:
        return range(1, len(self.transitions) + 1)

    def is_label(self, label: object) -> bool:
        return isinstance(label, int) and 1 <= label <= len(self.transitions)

    def step(self, path: str, label: int) -> str:
        """Destination of ``path`` under transition ``label`` (dead stays dead)."""
        if path == self.dead:
            return self.dead
        if not self.is_label(label):
            raise InvalidMoveError(f"unknown move label {label!r}")
        return self.transitions[label - 1][path]


def _check_r(r: int | None) -> int:
    if r is None:
        raise ConfigurationError("this kind needs a color count r")
    if not isinstance(r, int) or not 2 <= r <= 12:
        raise ConfigurationError(f"r must be an integer in 2..12, got {r!r}")
    return r


def mask_from_path(path: str) -> int:
    """Bitmask of a panchromatic path string; character i-1 is color i."""
    mask = 0
    for idx, ch in enumerate(path):
        if ch == "1":
            mask |= 1 << idx
        elif ch != "0":
            raise ConfigurationError(f"bad panchromatic path {path!r}")
    return mask


def path_from_mask(mask: int, r: int) -> str:
    return "".join("1" if mask & (1 << i) else "0" for i in range(r))


def build_path_system(kind: str, r: int | None = None) -> PathSystem:
    """Construct one of the four built-in path systems.

    * ``property_b``   two labels; paths 0/1/2; label j folds path 0 onto
      path j, keeps path j, and kills the other.
    * ``proper``       r labels; paths 0..r; label i maps 0 and i to i and
      kills everything else.
    * ``panchromatic`` r labels; paths are r-bit masks of the colors already
      seen; label i sets bit i; the all-ones mask is dead.
    * ``list``         two labels; paths 1/2; label j keeps path j and kills
      the other.
    """
    if kind == KIND_PROPERTY_B:
        tau1 = {"0": "1", "1": "1", "2": DEAD}
        tau2 = {"0": "2", "1": DEAD, "2": "2"}
        return PathSystem(kind, ("0", "1", "2"), DEAD, (tau1, tau2))
    if kind == KIND_LIST:
        tau1 = {"1": "1", "2": DEAD}
        tau2 = {"1": DEAD, "2": "2"}
        return PathSystem(kind, ("1", "2"), DEAD, (tau1, tau2))
    if kind == KIND_PROPER:
        r = _check_r(r)
        paths = tuple(str(j) for j in range(r + 1))
        transitions = tuple(
            {m: (str(i) if m in ("0", str(i)) else DEAD) for m in paths}
            for i in range(1, r + 1)
        )
        return PathSystem(kind, paths, DEAD, transitions, r=r)
    if kind == KIND_PANCHROMATIC:
        r = _check_r(r)
        dead = "1" * r
        paths = tuple(sorted(path_from_mask(m, r) for m in range((1 << r) - 1)))
        transitions = tuple(
            {m: m[: i - 1] + "1" + m[i:] for m in paths} for i in range(1, r + 1)
        )
        return PathSystem(kind, paths, dead, transitions, r=r)
    raise ConfigurationError(f"unknown kind {kind!r}")


@dataclass(frozen=True)
class Arrangement:
    """Nonnegative sand amounts on (level, path) cells, levels 0..max_level.

    Instances are immutable; ``amounts`` holds only nonzero cells.  Direct
    construction is the trusted fast path -- use :func:`make_arrangement` for
    validated input.
    """

    system: PathSystem
    max_level: int
    amounts: Mapping[Cell, Num]
    mode: str = "continuous"

    def l1(self) -> Num:
        return sum(self.amounts.values())

    def q(self) -> Num:
        """Level-weighted mass: each unit at level i counts i times."""
        return sum(lvl * a for (lvl, _), a in self.amounts.items())

    def semi12(self) -> Num:
        """Total sand sitting at levels >= 2."""
        return sum(a for (lvl, _), a in self.amounts.items() if lvl >= 2)

    def amount(self, level: int, path: str) -> Num:
        return self.amounts.get((level, path), 0)

    def is_empty(self) -> bool:
        return not self.amounts

    def cells(self) -> list[tuple[Cell, Num]]:
        return sorted(self.amounts.items())

    def replace_amounts(self, amounts: Mapping[Cell, Num], mode: str | None = None) -> "Arrangement":
        return Arrangement(self.system, self.max_level, amounts, mode or self.mode)


def norms(x: Arrangement) -> tuple[Num, Num, Num]:
    """Return (total sand, level-weighted mass, sand at levels >= 2)."""
    return x.l1(), x.q(), x.semi12()


def _is_integral(a: Num) -> bool:
    if isinstance(a, int):
        return True
    if isinstance(a, float):
        return a.is_integer()
    if isinstance(a, Fraction):
        return a.denominator == 1
    return False


def make_arrangement(
    system: PathSystem,
    sand: Mapping[Cell, Num] | Iterable[tuple[int, str, Num]],
    *,
    mode: str = "continuous",
    max_level: int | None = None,
) -> Arrangement:
    """Validate and build an arrangement.

    ``sand`` is either a mapping (level, path) -> amount or an iterable of
    (level, path, amount) triples.  Zero amounts are dropped; negative
    amounts, unknown paths, dead-path sand, and (in discrete mode)
    non-integers are rejected.
    """
    if isinstance(sand, Mapping):
        items = [(lvl, path, a) for (lvl, path), a in sand.items()]
    else:
        items = [(lvl, path, a) for lvl, path, a in sand]
    if mode not in ("continuous", "discrete"):
        raise ConfigurationError(f"unknown mode {mode!r}")
    amounts: dict[Cell, Num] = {}
    top = 0
    for lvl, path, a in items:
        if not isinstance(lvl, int) or lvl < 0:
            raise ConfigurationError(f"bad level {lvl!r}")
        if path == system.dead:
            raise ConfigurationError("sand on the dead path is destroyed, not stored")
        if path not in system.paths:
            raise ConfigurationError(f"unknown path {path!r}")
        if a < 0:
            raise ConfigurationError(f"negative amount at ({lvl}, {path!r})")
        if a == 0:
            continue
        if mode == "discrete":
            if not _is_integral(a):
                raise ConfigurationError(f"discrete mode needs integer amounts, got {a!r}")
            a = int(a)
        amounts[(lvl, path)] = amounts.get((lvl, path), 0) + a
        top = max(top, lvl)
    if max_level is None:
        max_level = max(top, 1)
    if not isinstance(max_level, int) or max_level < 1:
        raise ConfigurationError(f"max_level must be a positive integer, got {max_level!r}")
    if top > max_level:
        raise ConfigurationError(f"sand at level {top} exceeds max_level {max_level}")
    return Arrangement(system, max_level, amounts, mode)


@dataclass(frozen=True)
class MoveSplit:
    """The running part of one Pusher move: amounts leaving each cell."""

    running: Mapping[Cell, Num]

    def total(self) -> Num:
        return sum(self.running.values())

    def is_empty(self) -> bool:
        return all(a <= 0 for a in self.running.values())


def validate_split(x: Arrangement, split: MoveSplit) -> None:
    """Raise :class:`InvalidMoveError` unless ``split`` fits inside ``x``."""
    for (lvl, path), a in split.running.items():
        if a < 0:
            raise InvalidMoveError(f"negative running amount at ({lvl}, {path!r})")
        if a == 0:
            continue
        if lvl == 0:
            raise InvalidMoveError("level-0 sand cannot run")
        have = x.amounts.get((lvl, path), 0)
        slack = 1e-12 * max(1.0, float(have)) if isinstance(a, float) or isinstance(have, float) else 0
        if a > have + slack:
            raise InvalidMoveError(
                f"running {a} exceeds the {have} available at ({lvl}, {path!r})"
            )


def make_split(x: Arrangement, running: Mapping[Cell, Num]) -> MoveSplit:
    """Validated split from a raw mapping; zero entries are dropped."""
    cleaned = {c: a for c, a in running.items() if a != 0}
    split = MoveSplit(cleaned)
    validate_split(x, split)
    return split


@dataclass(frozen=True)
class MoveOutcome:
    """Result of one round: the next arrangement plus harvest/destruction."""

    next: Arrangement
    harvested: Num
    destroyed: Num
    tau: int


def apply_move(x: Arrangement, split: MoveSplit, tau: int) -> MoveOutcome:
    """Advance one round: standing sand stays, running sand descends along tau.

    Running sand at (n, m) arrives at (n-1, tau(m)); arrivals on the dead
    path are destroyed, arrivals at level 0 are harvested.  Float dust below
    ``DUST * l1`` is flushed afterwards.  A discrete arrangement stays
    discrete only when the split is integral; a fractional split relaxes the
    outcome to continuous mode.
    """
    validate_split(x, split)
    if not x.system.is_label(tau):
        raise InvalidMoveError(f"unknown move label {tau!r}")
    amounts: dict[Cell, Num] = dict(x.amounts)
    harvested: Num = 0
    destroyed: Num = 0
    integral = True
    for (lvl, path), a in split.running.items():
        if a <= 0:
            continue
        if not _is_integral(a):
            integral = False
        have = amounts.get((lvl, path), 0)
        rest = have - a
        if isinstance(rest, float) and rest <= DUST * max(1.0, float(have)):
            rest = 0
        if rest <= 0:
            amounts.pop((lvl, path), None)
        else:
            amounts[(lvl, path)] = rest
        dest = x.system.step(path, tau)
        if dest == x.system.dead:
            destroyed = destroyed + a
        elif lvl - 1 == 0:
            harvested = harvested + a
        else:
            cell = (lvl - 1, dest)
            amounts[cell] = amounts.get(cell, 0) + a
    total = sum(amounts.values())
    if amounts and isinstance(total, float):
        floor = DUST * total
        for cell in [c for c, a in amounts.items() if isinstance(a, float) and a < floor]:
            del amounts[cell]
    mode = x.mode
    if mode == "discrete" and not integral:
        mode = "continuous"
    return MoveOutcome(Arrangement(x.system, x.max_level, amounts, mode), harvested, destroyed, tau)


def canonical_cells(x: Arrangement) -> tuple[tuple[int, str, float], ...]:
    """Hashable canonical form of the occupied cells (for memo keys)."""
    return tuple((lvl, path, float(a)) for (lvl, path), a in sorted(x.amounts.items()))


# ---------------------------------------------------------------------------
# JSON wire format


def _num_to_json(a: Num) -> int | float:
    if isinstance(a, int):
        return a
    if isinstance(a, Fraction):
        return float(a)
    return a


def arrangement_to_dict(x: Arrangement) -> dict:
    sand = [
        {"level": lvl, "path": path, "amount": _num_to_json(a)}
        for (lvl, path), a in sorted(x.amounts.items())
    ]
    out: dict = {"kind": x.system.kind, "maxLevel": x.max_level, "mode": x.mode, "sand": sand}
    if x.system.r is not None:
        out["r"] = x.system.r
    return out


def arrangement_from_dict(data: Mapping) -> Arrangement:
    if not isinstance(data, Mapping):
        raise ConfigurationError("arrangement must be a JSON object")
    kind = data.get("kind")
    if kind not in BUILTIN_KINDS:
        raise ConfigurationError(f"unknown kind {kind!r}")
    r = data.get("r")
    system = build_path_system(kind, r)
    mode = data.get("mode", "continuous")
    max_level = data.get("maxLevel")
    sand = data.get("sand", [])
    if not isinstance(sand, list):
        raise ConfigurationError('"sand" must be a list')
    triples = []
    for entry in sand:
        if not isinstance(entry, Mapping) or not {"level", "path", "amount"} <= set(entry):
            raise ConfigurationError(f"bad sand entry {entry!r}")
        triples.append((entry["level"], str(entry["path"]), entry["amount"]))
    return make_arrangement(system, triples, mode=mode, max_level=max_level)


def arrangement_to_json(x: Arrangement) -> str:
    return json.dumps(arrangement_to_dict(x), sort_keys=True)


def arrangement_from_json(text: str) -> Arrangement:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"invalid JSON: {exc}") from exc
    return arrangement_from_dict(data)
