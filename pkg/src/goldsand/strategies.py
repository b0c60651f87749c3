"""Optimal play for both sides, policy plug-ins, and the audited round loop.

The Remover side is easy: pick the reply that minimizes the shifted
potential at the current minimizer p*, which caps total harvest at the game
value.  The Pusher side runs in two regimes.  While the arrangement is far
from degenerate it runs a small multiple of the balanced direction
d[k, m] = (k/N) * x[k, m], line-searching the step so that the value lost
per move stays below epsilon times the drop in level-weighted mass.  Once
the arrangement is (or comes epsilon-close to) degenerate, the optimal
policy commits to a *ghost*: the exact nearest degenerate arrangement, whose
one-sided endgame it then plays out move for move, running on the real board
whatever part of the ghost's prescription actually exists.  Sand the ghost
has but the board lacks is fictional (its absence only lowers the realized
harvest by the projection cost); sand the board has but the ghost lacks is
sacrificial and gets swept up by a fresh phase after the ghost resolves.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

from .core import (
    BUILTIN_KINDS,
    ONE_PARAM_KINDS,
    SIMPLEX_KINDS,
    Arrangement,
    Cell,
    ConfigurationError,
    EmptyArrangementError,
    GoldSandError,
    InvalidMoveError,
    MoveOutcome,
    MoveSplit,
    Num,
    PreconditionError,
    UnsupportedKindError,
    apply_move,
    arrangement_to_dict,
    canonical_cells,
    make_split,
    validate_split,
)
from .solver import (
    Degeneracy,
    classify_degeneracy,
    constants,
    is_eps_degenerate,
    nearest_degenerate,
    solve_value,
)
from .weights import (
    ParamPoint,
    amounts_potential,
    shifted_amounts_potential,
)


@dataclass(frozen=True)
class StrategyConfig:
    epsilon: float = 0.01
    pusher_mode: str = "adaptive"
    solver_tol: float = 1e-9
    audit_tol: float = 1e-9
    seed: int | None = None
    max_rounds: int = 10_000

    def __post_init__(self) -> None:
        if not 0 < self.epsilon < 1:
            raise ConfigurationError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if self.pusher_mode not in ("adaptive", "proof"):
            raise ConfigurationError(f"unknown pusher mode {self.pusher_mode!r}")
        if not self.solver_tol > 0 or not self.audit_tol > 0:
            raise ConfigurationError("tolerances must be positive")
        if self.max_rounds < 1:
            raise ConfigurationError("max_rounds must be positive")


DEFAULT_CONFIG = StrategyConfig()


def split_to_dict(split: MoveSplit) -> dict:
    return {
        "running": [
            {"level": lvl, "path": path, "amount": float(a) if isinstance(a, float) else a}
            for (lvl, path), a in sorted(split.running.items())
        ]
    }


def split_from_dict(data: Mapping) -> MoveSplit:
    if not isinstance(data, Mapping) or "running" not in data:
        raise InvalidMoveError('a split is an object with a "running" list')
    running: dict[Cell, Num] = {}
    for entry in data["running"]:
        if not isinstance(entry, Mapping) or not {"level", "path", "amount"} <= set(entry):
            raise InvalidMoveError(f"bad running entry {entry!r}")
        cell = (entry["level"], str(entry["path"]))
        running[cell] = running.get(cell, 0) + entry["amount"]
    return MoveSplit({c: a for c, a in running.items() if a != 0})


# ---------------------------------------------------------------------------
# Remover


def remover_respond(x: Arrangement, split: MoveSplit, cfg: StrategyConfig = DEFAULT_CONFIG) -> int:
    """The value-preserving reply: minimize the shifted potential at p*.

    Ties break to the smallest label.  When p* sits at an endpoint of [0, 1]
    the reply is forced outright: p* = 0 kills label-1 movement (reply 2),
    p* = 1 the mirror image.
    """
    validate_split(x, split)
    vr = solve_value(x, cfg.solver_tol)
    if x.system.kind in ONE_PARAM_KINDS:
        p = vr.p_star.values[0]
        if p == 0.0:
            return 2
        if p == 1.0:
            return 1
    best_label = None
    best_val = None
    for label in x.system.labels:
        val = float(shifted_amounts_potential(x.system, split.running, label, vr.p_star))
        if best_val is None or val < best_val:
            best_label, best_val = label, val
    assert best_label is not None
    return best_label


# ---------------------------------------------------------------------------
# Pusher


def pusher_direction(x: Arrangement) -> dict[Cell, float]:
    """The balanced running direction d[k, m] = (k/N) * x[k, m].

    Scaling each level by k/N equalizes the two shifted potentials at p*
    (their difference is h(x, p*)/N = 0) and keeps at least a 1/N share of
    the level-weighted mass moving.
    """
    if x.system.kind not in ONE_PARAM_KINDS:
        raise UnsupportedKindError("the balanced direction needs a two-label kind")
    if classify_degeneracy(x) != Degeneracy.REGULAR:
        raise PreconditionError("the balanced direction needs a regular arrangement")
    n = x.max_level
    return {(lvl, path): (lvl / n) * a for (lvl, path), a in x.amounts.items() if lvl >= 1}


def _next_value(x: Arrangement, split: MoveSplit, label: int, tol: float) -> tuple[float, float, float]:
    """(e(next) + harvested, q(next), harvested) for one hypothetical reply."""
    outcome = apply_move(x, split, label)
    harvested = float(outcome.harvested)
    if outcome.next.is_empty():
        return harvested, 0.0, harvested
    e_next = solve_value(outcome.next, tol).e
    return e_next + harvested, float(outcome.next.q()), harvested


def _progress_all_labels(x: Arrangement, split: MoveSplit, cfg: StrategyConfig, e_x: float, q_x: float) -> bool:
    slack = cfg.audit_tol * max(1.0, float(x.l1()))
    for label in x.system.labels:
        e_full, q_next, _ = _next_value(x, split, label, cfg.solver_tol)
        if e_x - e_full > cfg.epsilon * (q_x - q_next) + slack:
            return False
    return True


def _scaled_split(x: Arrangement, d: Mapping[Cell, float], lam: float) -> MoveSplit:
    running = {}
    for c, a in d.items():
        amt = min(lam * a, x.amounts.get(c, 0))
        if amt > 0:
            running[c] = amt
    return MoveSplit(running)


def _regular_move_info(x: Arrangement, cfg: StrategyConfig) -> tuple[MoveSplit, dict]:
    d = pusher_direction(x)
    cons = constants(cfg.epsilon, x.max_level)
    e_x = solve_value(x, cfg.solver_tol).e
    q_x = float(x.q())
    info: dict = {"mode": "regular", "eX": e_x, "qX": q_x}
    if cfg.pusher_mode == "proof":
        info["lambda"] = cons.mu
        return _scaled_split(x, d, cons.mu), info
    lam = 1.0
    for _ in range(240):
        split = _scaled_split(x, d, lam)
        if _progress_all_labels(x, split, cfg, e_x, q_x):
            info["lambda"] = lam
            info["accepted"] = True
            return split, info
        if lam <= cons.mu:
            break
        lam = max(lam / 2, cons.mu)
    # the guaranteed floor: the per-move guarantee holds at mu even when the
    # float audit refused every candidate
    info["lambda"] = cons.mu
    info["accepted"] = False
    return _scaled_split(x, d, cons.mu), info


def pusher_move_regular(x: Arrangement, cfg: StrategyConfig = DEFAULT_CONFIG) -> MoveSplit:
    """One regular-regime move: lambda times the balanced direction.

    Adaptive mode accepts the largest lambda in {1, 1/2, 1/4, ...} whose both
    successors keep the value loss below epsilon times the mass progress;
    proof mode always plays the guaranteed step mu.
    """
    split, _ = _regular_move_info(x, cfg)
    return split


def _degenerate_side(x: Arrangement, cls: Degeneracy) -> Degeneracy:
    if cls in (Degeneracy.POSITIVE, Degeneracy.NEGATIVE):
        return cls
    # a flat arrangement is degenerate on both sides; pick the feasible one
    if x.amount(1, "2") >= x.amount(1, "1"):
        return Degeneracy.POSITIVE
    return Degeneracy.NEGATIVE


def _endgame_scalars(x: Arrangement) -> tuple[float, float]:
    s = 0.0
    d = 0.0
    for (lvl, path), a in x.amounts.items():
        if path in ("0", "1"):
            s += float(a)
            d += lvl * float(a)
    return s, d


def _degenerate_split_amounts(x: Arrangement, side: Degeneracy) -> dict[Cell, Num]:
    """The one-sided endgame prescription, clipped to the available sand."""
    heavy, light = ("2", ("0", "1")) if side == Degeneracy.POSITIVE else ("1", ("0", "2"))
    running: dict[Cell, Num] = {}
    s: Num = 0
    for (lvl, path), a in x.amounts.items():
        if lvl >= 1 and path in light:
            running[(lvl, path)] = a
            s = s + a
    extra = min(s - x.amount(1, "0"), x.amount(1, heavy))
    if extra > 0:
        cell = (1, heavy)
        running[cell] = running.get(cell, 0) + extra
    return {c: a for c, a in running.items() if a > 0}


def pusher_move_degenerate(x: Arrangement) -> MoveSplit:
    """The exact endgame move from a degenerate arrangement.

    Positively degenerate: run every grain on paths 0 and 1 plus
    s(x) - x[1, path0] from (1, path2); whatever the Remover replies, the
    harvest telescopes to exactly s(x) = e(x).  Negatively degenerate is the
    mirror image; flat arrangements qualify on their feasible side.
    """
    if x.system.kind not in ONE_PARAM_KINDS:
        raise UnsupportedKindError("the endgame move needs a two-label kind")
    cls = classify_degeneracy(x)
    if cls == Degeneracy.REGULAR:
        raise PreconditionError("the endgame move needs a degenerate arrangement")
    return make_split(x, _degenerate_split_amounts(x, _degenerate_side(x, cls)))


def _simplex_pusher_move(x: Arrangement, cfg: StrategyConfig) -> MoveSplit:
    """Experimental analog for the simplex kinds: scaled direction with the
    same per-move value audit, falling back to running everything."""
    n = x.max_level
    d = {(lvl, path): (lvl / n) * float(a) for (lvl, path), a in x.amounts.items() if lvl >= 1}
    if not d:
        return MoveSplit({})
    e_x = solve_value(x, cfg.solver_tol).e
    q_x = float(x.q())
    lam = 1.0
    for _ in range(8):
        split = _scaled_split(x, d, lam)
        if _progress_all_labels(x, split, cfg, e_x, q_x):
            return split
        lam /= 2
    return MoveSplit({c: a for c, a in x.amounts.items() if c[0] >= 1})


def pusher_respond(x: Arrangement, cfg: StrategyConfig = DEFAULT_CONFIG) -> MoveSplit:
    """One-shot dispatcher: regular move, endgame move, or ghost projection.

    Stateless -- an epsilon-degenerate arrangement is answered with the first
    move of the nearest-degenerate endgame.  (The stateful
    :class:`OptimalPusher` policy is what plays that endgame to completion.)
    """
    if x.is_empty():
        raise EmptyArrangementError("no sand to push")
    if x.system.kind in SIMPLEX_KINDS:
        return _simplex_pusher_move(x, cfg)
    cls = classify_degeneracy(x)
    if cls != Degeneracy.REGULAR:
        return pusher_move_degenerate(x)
    if not is_eps_degenerate(x, cfg.epsilon):
        return pusher_move_regular(x, cfg)
    y, _, target = nearest_degenerate(x)
    prescription = _degenerate_split_amounts(y, _degenerate_side(y, target))
    running = {}
    for c, a in prescription.items():
        amt = min(a, x.amounts.get(c, 0))
        if amt > 0:
            running[c] = amt
    return make_split(x, running)


# ---------------------------------------------------------------------------
# Policies


class PusherPolicy:
    name = "pusher"

    def begin(self, x0: Arrangement, cfg: StrategyConfig) -> None:
        self.cfg = cfg

    def move(self, x: Arrangement) -> MoveSplit:
        raise NotImplementedError

    def observe(self, outcome: MoveOutcome) -> None:
        pass

    def state_key(self):
        """Hashable fingerprint of internal state, or None if unmemoable."""
        return ()


class RemoverPolicy:
    name = "remover"

    def begin(self, x0: Arrangement, cfg: StrategyConfig) -> None:
        self.cfg = cfg

    def move(self, x: Arrangement, split: MoveSplit) -> int:
        raise NotImplementedError

    def observe(self, outcome: MoveOutcome) -> None:
        pass


class AllRunPusher(PusherPolicy):
    name = "all-run"

    def move(self, x: Arrangement) -> MoveSplit:
        return MoveSplit({c: a for c, a in x.amounts.items() if c[0] >= 1})


class GreedyHarvestPusher(PusherPolicy):
    name = "greedy-harvest"

    def move(self, x: Arrangement) -> MoveSplit:
        return MoveSplit({c: a for c, a in x.amounts.items() if c[0] == 1})


class RandomSplitPusher(PusherPolicy):
    name = "random-split"

    def begin(self, x0: Arrangement, cfg: StrategyConfig) -> None:
        super().begin(x0, cfg)
        self.rng = random.Random(cfg.seed)

    def move(self, x: Arrangement) -> MoveSplit:
        cells = [(c, a) for c, a in sorted(x.amounts.items()) if c[0] >= 1]
        if not cells:
            return MoveSplit({})
        running: dict[Cell, Num] = {}
        for c, a in cells:
            if x.mode == "discrete" and isinstance(a, int):
                k = self.rng.randint(0, a)
                if k:
                    running[c] = k
            else:
                running[c] = self.rng.random() * float(a)
        if not running or all(v <= 0 for v in running.values()):
            c, a = cells[self.rng.randrange(len(cells))]
            running = {c: a}
        return MoveSplit({c: v for c, v in running.items() if v > 0})

    def state_key(self):
        return None


class OptimalPusher(PusherPolicy):
    """Stateful near-optimal Pusher: regular phase, then a committed ghost.

    The commit happens when the arrangement is degenerate, comes within
    epsilon * l1 of the degenerate set (exact projection cost, not the
    closed-form estimate), or when the level-weighted mass has fallen to
    epsilon times its phase-start value.  After a ghost resolves, a fresh
    phase starts on whatever real sand is left -- pure bonus for the bound.
    """

    def __init__(self, mode: str = "adaptive") -> None:
        if mode not in ("adaptive", "proof"):
            raise ConfigurationError(f"unknown pusher mode {mode!r}")
        self.mode = mode
        self.name = f"optimal-{mode}"

    def begin(self, x0: Arrangement, cfg: StrategyConfig) -> None:
        self.cfg = replace(cfg, pusher_mode=self.mode)
        self.q_floor: float | None = None
        self.ghost: Arrangement | None = None
        self.ghost_side: Degeneracy | None = None
        self.ghost_split: MoveSplit | None = None
        self.last_info: dict = {}

    # -- phase control

    def _commit(self, x: Arrangement) -> bool:
        cls = classify_degeneracy(x)
        if cls != Degeneracy.REGULAR:
            self.ghost = x
            self.ghost_side = _degenerate_side(x, cls)
            return True
        if self.q_floor is None:
            self.q_floor = self.cfg.epsilon * float(x.q())
        y, cost, target = nearest_degenerate(x)
        if cost <= self.cfg.epsilon * float(x.l1()) or float(x.q()) <= self.q_floor:
            self.ghost = y
            self.ghost_side = _degenerate_side(y, target)
            return True
        return False

    def _reset_phase(self) -> None:
        self.ghost = None
        self.ghost_side = None
        self.ghost_split = None
        self.q_floor = None

    def move(self, x: Arrangement) -> MoveSplit:
        return self._move(x, retried=False)

    def _move(self, x: Arrangement, retried: bool) -> MoveSplit:
        self.ghost_split = None
        if x.system.kind in SIMPLEX_KINDS:
            self.last_info = {"mode": "experimental-simplex"}
            return _simplex_pusher_move(x, self.cfg)
        if x.system.kind not in ONE_PARAM_KINDS:
            raise UnsupportedKindError("the optimal pusher needs a built-in kind")
        if self.ghost is None and not self._commit(x):
            split, info = _regular_move_info(x, self.cfg)
            self.last_info = info
            return split
        assert self.ghost is not None and self.ghost_side is not None
        prescription = _degenerate_split_amounts(self.ghost, self.ghost_side)
        if not prescription:
            # this ghost's endgame is over; restart once on the leftovers
            self._reset_phase()
            if not retried:
                return self._move(x, retried=True)
            self.last_info = {"mode": "idle"}
            return MoveSplit({})
        clipped = {}
        for c, a in prescription.items():
            amt = min(a, x.amounts.get(c, 0))
            if amt > 0:
                clipped[c] = amt
        if not clipped:
            # the prescription is purely fictional, so the real remainder
            # holds no winnable value on this side; stop
            self.last_info = {"mode": "degenerate", "fictional": True}
            return MoveSplit({})
        self.ghost_split = MoveSplit(prescription)
        s, d = _endgame_scalars(x)
        self.last_info = {
            "mode": "degenerate",
            "side": self.ghost_side.value,
            "s": s,
            "d": d,
        }
        return make_split(x, clipped)

    def observe(self, outcome: MoveOutcome) -> None:
        if self.ghost is not None and self.ghost_split is not None:
            advanced = apply_move(self.ghost, self.ghost_split, outcome.tau)
            self.ghost = advanced.next
            self.ghost_split = None
            if self.ghost.is_empty() or float(self.ghost.l1()) <= 1e-12:
                self._reset_phase()

    def state_key(self):
        ghost_key = canonical_cells(self.ghost) if self.ghost is not None else None
        side = self.ghost_side.value if self.ghost_side is not None else None
        return (self.q_floor, ghost_key, side)


class OptimalRemover(RemoverPolicy):
    name = "optimal"

    def move(self, x: Arrangement, split: MoveSplit) -> int:
        return remover_respond(x, split, self.cfg)


class UniformRandomRemover(RemoverPolicy):
    name = "uniform-random"

    def begin(self, x0: Arrangement, cfg: StrategyConfig) -> None:
        super().begin(x0, cfg)
        self.rng = random.Random((cfg.seed or 0) + 17)

    def move(self, x: Arrangement, split: MoveSplit) -> int:
        return self.rng.choice(list(x.system.labels))


class FixedLabelRemover(RemoverPolicy):
    def __init__(self, label: int = 1) -> None:
        self.label = label
        self.name = f"fixed-label:{label}"

    def move(self, x: Arrangement, split: MoveSplit) -> int:
        return self.label


PUSHER_POLICY_NAMES = (
    "optimal-adaptive",
    "optimal-proof",
    "all-run",
    "random-split",
    "greedy-harvest",
)
REMOVER_POLICY_NAMES = ("optimal", "uniform-random", "fixed-label")


def resolve_pusher_policy(spec: Union[str, PusherPolicy]) -> PusherPolicy:
    if isinstance(spec, PusherPolicy):
        return spec
    if spec == "optimal-adaptive":
        return OptimalPusher("adaptive")
    if spec == "optimal-proof":
        return OptimalPusher("proof")
    if spec == "all-run":
        return AllRunPusher()
    if spec == "random-split":
        return RandomSplitPusher()
    if spec == "greedy-harvest":
        return GreedyHarvestPusher()
    raise ConfigurationError(f"unknown pusher policy {spec!r}")


def resolve_remover_policy(spec: Union[str, RemoverPolicy]) -> RemoverPolicy:
    if isinstance(spec, RemoverPolicy):
        return spec
    if spec == "optimal":
        return OptimalRemover()
    if spec == "uniform-random":
        return UniformRandomRemover()
    if spec == "fixed-label" or (isinstance(spec, str) and spec.startswith("fixed-label:")):
        label = 1 if spec == "fixed-label" else int(spec.split(":", 1)[1])
        return FixedLabelRemover(label)
    raise ConfigurationError(f"unknown remover policy {spec!r}")


# ---------------------------------------------------------------------------
# The round loop


@dataclass
class RoundRecord:
    index: int
    arrangement_before: Arrangement
    split: MoveSplit
    tau: int
    harvested: float
    destroyed: float
    e_before: float | None
    p_star: ParamPoint | None
    q_before: float
    audit: dict

    def to_dict(self) -> dict:
        out = {
            "type": "round",
            "round": self.index,
            "arrangementBefore": arrangement_to_dict(self.arrangement_before),
            "split": split_to_dict(self.split),
            "tau": self.tau,
            "harvested": self.harvested,
            "destroyed": self.destroyed,
            "q": self.q_before,
            "audit": self.audit,
        }
        if self.e_before is not None:
            out["e"] = self.e_before
        if self.p_star is not None:
            values = self.p_star.values
            out["pStar"] = float(values[0]) if len(values) == 1 else [float(v) for v in values]
        return out


@dataclass
class Trace:
    x0: Arrangement
    pusher: str
    remover: str
    rounds: list[RoundRecord]
    total_harvested: float
    total_destroyed: float
    final: Arrangement
    flags: dict = field(default_factory=dict)

    def to_jsonl(self) -> str:
        import json

        lines = [
            json.dumps(
                {
                    "type": "header",
                    "arrangement": arrangement_to_dict(self.x0),
                    "pusher": self.pusher,
                    "remover": self.remover,
                },
                sort_keys=True,
            )
        ]
        lines.extend(json.dumps(r.to_dict(), sort_keys=True) for r in self.rounds)
        lines.append(
            json.dumps(
                {
                    "type": "summary",
                    "totalHarvested": self.total_harvested,
                    "totalDestroyed": self.total_destroyed,
                    "final": arrangement_to_dict(self.final),
                    "flags": self.flags,
                },
                sort_keys=True,
            )
        )
        return "\n".join(lines) + "\n"


def play(
    x0: Arrangement,
    pusher_policy: Union[str, PusherPolicy],
    remover_policy: Union[str, RemoverPolicy],
    cfg: StrategyConfig = DEFAULT_CONFIG,
) -> Trace:
    """Run a full game, auditing every round, and return the trace.

    Initial level-0 sand counts as already harvested and is swept before the
    first round.  The loop ends when the sand is gone (up to dust), the
    Pusher has nothing to run, or ``cfg.max_rounds`` hits; a policy raising
    or producing an illegal move ends the game with the error recorded in
    the trace flags rather than propagating.
    """
    if x0.is_empty():
        raise EmptyArrangementError("cannot play an empty arrangement")
    pusher = resolve_pusher_policy(pusher_policy)
    remover = resolve_remover_policy(remover_policy)
    solvable = x0.system.kind in BUILTIN_KINDS

    swept = sum(a for (lvl, _), a in x0.amounts.items() if lvl == 0)
    x = x0.replace_amounts({c: a for c, a in x0.amounts.items() if c[0] >= 1}) if swept else x0

    pusher.begin(x, cfg)
    remover.begin(x, cfg)
    audit_pusher = isinstance(pusher, OptimalPusher)
    audit_remover = isinstance(remover, OptimalRemover)
    delta = None
    if audit_pusher and solvable and x.max_level >= 1:
        delta = constants(cfg.epsilon, x.max_level).delta

    rounds: list[RoundRecord] = []
    total_h = float(swept)
    total_d = 0.0
    flags: dict = {"stopped": "exhausted"}
    if swept:
        flags["initialSweep"] = float(swept)
    dust = 1e-12 * max(1.0, float(x.l1()))

    vr = None
    for index in range(cfg.max_rounds):
        if float(x.l1()) <= dust:
            break
        if vr is None and solvable and not x.is_empty():
            vr = solve_value(x, cfg.solver_tol)
        try:
            split = pusher.move(x)
            if split.is_empty():
                flags["stopped"] = "empty_split"
                break
            validate_split(x, split)
            tau = remover.move(x, split)
            if not x.system.is_label(tau):
                raise InvalidMoveError(f"policy returned bad label {tau!r}")
        except GoldSandError as exc:
            flags["stopped"] = "policy_error"
            flags["policyError"] = str(exc)
            break
        outcome = apply_move(x, split, tau)

        scale = max(1.0, float(x.l1()))
        slack = cfg.audit_tol * scale
        audit: dict = {}
        vr_next = None
        if solvable:
            if not outcome.next.is_empty():
                vr_next = solve_value(outcome.next, cfg.solver_tol)
            e_next = vr_next.e if vr_next is not None else 0.0
            if audit_remover and vr is not None:
                run_pot = float(amounts_potential(x.system, split.running, vr.p_star))
                shift_pot = float(
                    shifted_amounts_potential(x.system, split.running, tau, vr.p_star)
                )
                audit["observationOk"] = shift_pot <= run_pot + slack
                audit["monotoneOk"] = e_next + float(outcome.harvested) <= vr.e + slack
            if audit_pusher:
                info = dict(pusher.last_info)
                audit.update(info)
                if info.get("mode") == "regular" and vr is not None:
                    q_x = float(x.q())
                    q_next = float(outcome.next.q())
                    e_full = e_next + float(outcome.harvested)
                    audit["progressOk"] = vr.e - e_full <= cfg.epsilon * (q_x - q_next) + slack
                    if delta is not None:
                        audit["decayOk"] = q_next <= (1 - delta) * q_x + slack
        elif audit_pusher:
            audit.update(pusher.last_info)

        rounds.append(
            RoundRecord(
                index=index,
                arrangement_before=x,
                split=split,
                tau=tau,
                harvested=float(outcome.harvested),
                destroyed=float(outcome.destroyed),
                e_before=vr.e if vr is not None else None,
                p_star=vr.p_star if vr is not None else None,
                q_before=float(x.q()),
                audit=audit,
            )
        )
        total_h += float(outcome.harvested)
        total_d += float(outcome.destroyed)
        pusher.observe(outcome)
        remover.observe(outcome)
        x = outcome.next
        vr = vr_next
    else:
        flags["stopped"] = "max_rounds"

    return Trace(
        x0=x0,
        pusher=pusher.name,
        remover=remover.name,
        rounds=rounds,
        total_harvested=total_h,
        total_destroyed=total_d,
        final=x,
        flags=flags,
    )
