"""Independent brute-force checkers for the game engine.

Nothing here shares logic with the solver or the strategies: the minimax
search plays the discrete chip game move by move, the panchromatic
enumerator sums over raw color sequences with exact rationals, the Remover
line search tries every label sequence against a fixed Pusher, and the
finite-difference check probes the potential numerically.  Agreement between
these and the analytic modules is what the test suite leans on.
"""

from __future__ import annotations

import itertools
from copy import deepcopy
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Mapping, Sequence, Union

from .core import (
    ONE_PARAM_KINDS,
    Arrangement,
    Cell,
    InconclusiveError,
    PathSystem,
    PreconditionError,
    canonical_cells,
)
from .solver import classify_degeneracy  # noqa: F401  (re-exported for tests)
from .strategies import (
    DEFAULT_CONFIG,
    PusherPolicy,
    StrategyConfig,
    remover_respond,
    resolve_pusher_policy,
)
from .weights import ParamPoint, amounts_potential, h

PUSHER_WINS = "PusherWins"
REMOVER_WINS = "RemoverWins"

# a discrete state is a sorted tuple of (level, path, count) triples
DiscreteState = tuple[tuple[int, str, int], ...]


def discrete_state(chips: Union[Arrangement, Mapping[Cell, int]]) -> DiscreteState:
    amounts = chips.amounts if isinstance(chips, Arrangement) else chips
    state = []
    for (lvl, path), count in amounts.items():
        if count == 0:
            continue
        if not isinstance(count, int) or count < 0:
            raise PreconditionError(f"chip counts must be nonnegative integers, got {count!r}")
        state.append((lvl, path, count))
    return tuple(sorted(state))


class _MinimaxSearch:
    """Memoized win/loss search over the discrete chip game.

    Every move with a nonempty running set strictly lowers the total level
    mass, so positions cannot repeat along a line of play; a Pusher who
    stands all chips makes no progress and by convention loses, which is why
    the empty running set is simply not enumerated.
    """

    def __init__(self, system: PathSystem, budget: int) -> None:
        self.system = system
        self.budget = budget
        self.explored = 0
        self.memo: dict[DiscreteState, bool] = {}

    def splits(self, state: DiscreteState):
        ranges = [range(c + 1) for (_, _, c) in state]
        for counts in itertools.product(*ranges):
            if any(counts):
                yield counts

    def apply(self, state: DiscreteState, running: Sequence[int], label: int):
        """Resolve one (split, label) pair -> (next state, chip harvested?)."""
        self.explored += 1
        if self.explored > self.budget:
            raise InconclusiveError(f"minimax budget of {self.budget} nodes exhausted")
        nxt: dict[tuple[int, str], int] = {}
        won = False
        for (lvl, path, count), run in zip(state, running):
            stand = count - run
            if stand:
                nxt[(lvl, path)] = nxt.get((lvl, path), 0) + stand
            if not run:
                continue
            dest = self.system.step(path, label)
            if dest == self.system.dead:
                continue
            if lvl - 1 == 0:
                won = True
                continue
            nxt[(lvl - 1, dest)] = nxt.get((lvl - 1, dest), 0) + run
        return tuple(sorted((l, m, c) for (l, m), c in nxt.items())), won

    def eval(self, state: DiscreteState) -> bool:
        """True iff the Pusher wins from ``state`` with the Pusher to move."""
        if any(lvl == 0 for lvl, _, _ in state):
            return True
        if not state:
            return False
        cached = self.memo.get(state)
        if cached is not None:
            return cached
        result = False
        for running in self.splits(state):
            ok = True
            for label in self.system.labels:
                nxt, won = self.apply(state, running, label)
                if not won and not self.eval(nxt):
                    ok = False
                    break
            if ok:
                result = True
                break
        self.memo[state] = result
        return result

    def winning_split(self, state: DiscreteState) -> dict[Cell, int] | None:
        """A running multiset that wins for the Pusher, or None."""
        if not self.eval(state):
            return None
        if any(lvl == 0 for lvl, _, _ in state):
            return {}
        for running in self.splits(state):
            if all(
                won or self.eval(nxt)
                for nxt, won in (self.apply(state, running, lbl) for lbl in self.system.labels)
            ):
                return {
                    (lvl, path): run
                    for (lvl, path, _), run in zip(state, running)
                    if run
                }
        return None

    def winning_reply(self, state: DiscreteState, running: Sequence[int]) -> int | None:
        """A label that keeps the Remover winning against ``running``."""
        for label in self.system.labels:
            nxt, won = self.apply(state, running, label)
            if not won and not self.eval(nxt):
                return label
        return None


@dataclass
class MinimaxResult:
    winner: str
    explored: int
    search: _MinimaxSearch

    def winning_split(self, chips: Union[Arrangement, Mapping[Cell, int]]) -> dict[Cell, int] | None:
        return self.search.winning_split(discrete_state(chips))

    def winning_reply(
        self, chips: Union[Arrangement, Mapping[Cell, int]], running: Mapping[Cell, int]
    ) -> int | None:
        state = discrete_state(chips)
        run_counts = [running.get((lvl, path), 0) for (lvl, path, _) in state]
        return self.search.winning_reply(state, run_counts)


def minimax_discrete(chips: Union[Arrangement, Mapping[Cell, int]], budget: int = 2_000_000) -> MinimaxResult:
    """Exact winner of the discrete chip game, by exhaustive memoized search.

    The Pusher wins iff some live chip ever arrives at level 0.  Guards keep
    the state space honest: at most 8 chips, levels up to 5, at most 3 move
    labels; blowing the node ``budget`` raises rather than guessing.
    """
    if isinstance(chips, Arrangement):
        system = chips.system
        if chips.mode != "discrete":
            raise PreconditionError("minimax needs a discrete arrangement")
    else:
        raise PreconditionError("pass a discrete Arrangement (it carries the path system)")
    state = discrete_state(chips)
    total = sum(c for _, _, c in state)
    if total > 8:
        raise PreconditionError(f"at most 8 chips supported, got {total}")
    if any(lvl > 5 for lvl, _, _ in state):
        raise PreconditionError("chip levels above 5 are out of oracle bounds")
    if len(system.transitions) > 3:
        raise PreconditionError("more than 3 move labels is out of oracle bounds")
    search = _MinimaxSearch(system, budget)
    winner = PUSHER_WINS if search.eval(state) else REMOVER_WINS
    return MinimaxResult(winner, search.explored, search)


# ---------------------------------------------------------------------------
# Panchromatic enumeration


@lru_cache(maxsize=4096)
def _colorset_distribution(r: int, i: int, p: tuple[Fraction, ...]) -> tuple[tuple[int, Fraction], ...]:
    """Probability of each color-set mask after i independent draws from p."""
    dist: dict[int, Fraction] = {}
    fact_i = factorial(i)
    for counts in itertools.product(range(i + 1), repeat=r):
        if sum(counts) != i:
            continue
        ways = fact_i
        prob = Fraction(1)
        mask = 0
        for j, c in enumerate(counts):
            ways //= factorial(c)
            prob *= p[j] ** c
            if c:
                mask |= 1 << j
        dist[mask] = dist.get(mask, Fraction(0)) + ways * prob
    return tuple(sorted(dist.items()))


def panchromatic_fail_probability(
    u_mask: int, i: int, p: Union[ParamPoint, Sequence], r: int
) -> Fraction:
    """P[i color draws, unioned with the mask, still miss some color].

    Exact rational arithmetic throughout; this is the direct semantic
    enumeration that the closed-form panchromatic weight must reproduce.
    """
    if not 2 <= r <= 4:
        raise PreconditionError("exact enumeration supports r in 2..4")
    if not 0 <= i <= 6:
        raise PreconditionError("exact enumeration supports i in 0..6")
    values = p.values if isinstance(p, ParamPoint) else tuple(p)
    if len(values) != r:
        raise PreconditionError(f"need {r} color probabilities, got {len(values)}")
    probs = tuple(Fraction(v) for v in values)
    if sum(probs) != 1 or any(v < 0 for v in probs):
        raise PreconditionError("color probabilities must be rational, nonnegative, sum 1")
    if not 0 <= u_mask < (1 << r):
        raise PreconditionError(f"mask {u_mask!r} out of range for r={r}")
    full = (1 << r) - 1
    total = Fraction(0)
    for mask, prob in _colorset_distribution(r, i, probs):
        if (mask | u_mask) != full:
            total += prob
    return total


# ---------------------------------------------------------------------------
# Exhaustive Remover search


def _continuation_harvest(x: Arrangement, pusher: PusherPolicy, cfg: StrategyConfig) -> float:
    """Play the rest of the game out against the value-preserving Remover."""
    from .core import apply_move, validate_split

    total = 0.0
    dust = 1e-12 * max(1.0, float(x.l1()))
    for _ in range(cfg.max_rounds):
        if float(x.l1()) <= dust:
            break
        split = pusher.move(x)
        if split.is_empty():
            break
        validate_split(x, split)
        tau = remover_respond(x, split, cfg)
        outcome = apply_move(x, split, tau)
        total += float(outcome.harvested)
        pusher.observe(outcome)
        x = outcome.next
    return total


def best_remover_line(
    x0: Arrangement,
    pusher_policy: Union[str, PusherPolicy],
    horizon: int,
    cfg: StrategyConfig = DEFAULT_CONFIG,
) -> float:
    """Minimum harvest over every Remover label sequence of length <= horizon.

    Each leaf is finished off with the value-preserving Remover, so the
    result is what a perfect-opening adversary concedes to this Pusher.
    Branches that reach an identical (arrangement, pusher state, depth)
    triple are shared through a memo; policies whose state_key() is None
    (e.g. random ones) are searched without sharing.
    """
    from .core import apply_move, validate_split

    labels = list(x0.system.labels)
    if len(labels) ** max(horizon, 1) > 2**20:
        raise InconclusiveError(f"label tree {len(labels)}^{horizon} exceeds the search bound")
    if horizon < 0:
        raise PreconditionError("horizon must be nonnegative")

    swept = float(sum(a for (lvl, _), a in x0.amounts.items() if lvl == 0))
    x = x0.replace_amounts({c: a for c, a in x0.amounts.items() if c[0] >= 1}) if swept else x0
    pusher = resolve_pusher_policy(pusher_policy)
    pusher.begin(x, cfg)
    dust = 1e-12 * max(1.0, float(x.l1()))
    memo: dict = {}

    def search(x: Arrangement, pusher: PusherPolicy, depth: int) -> float:
        if float(x.l1()) <= dust:
            return 0.0
        state = pusher.state_key()
        key = None
        if state is not None:
            key = (canonical_cells(x), depth, type(pusher).__name__, pusher.name, state)
            if key in memo:
                return memo[key]
        if depth == 0:
            value = _continuation_harvest(x, pusher, cfg)
            if key is not None:
                memo[key] = value
            return value
        split = pusher.move(x)
        if split.is_empty():
            value = 0.0
        else:
            validate_split(x, split)
            value = None
            for label in labels:
                branch = deepcopy(pusher)
                outcome = apply_move(x, split, label)
                branch.observe(outcome)
                got = float(outcome.harvested) + search(outcome.next, branch, depth - 1)
                if value is None or got < value:
                    value = got
            assert value is not None
        if key is not None:
            memo[key] = value
        return value

    return swept + search(x, pusher, horizon)


# ---------------------------------------------------------------------------
# Finite differences


@dataclass(frozen=True)
class FiniteDiffReport:
    deviation: float
    second_difference: float


def finite_difference_check(
    x: Arrangement, p: Union[float, ParamPoint, Sequence], step: float = 1e-6
) -> FiniteDiffReport:
    """Probe dPhi/dp against h(x, p) and report the convexity second difference.

    For two-label kinds this is the plain centered difference in p; for
    simplex kinds each coordinate is perturbed on its own (off the simplex --
    the weight polynomials extend smoothly) and the worst coordinate wins.
    """
    if not 1e-8 <= step <= 1e-4:
        raise PreconditionError(f"step must be in [1e-8, 1e-4], got {step!r}")

    def phi(values: tuple) -> float:
        return float(amounts_potential(x.system, x.amounts, ParamPoint(values)))

    if x.system.kind in ONE_PARAM_KINDS:
        v = p.scalar() if isinstance(p, ParamPoint) else float(p)
        if not step < v < 1 - step:
            raise PreconditionError("p must be interior")
        up, mid, down = phi((v + step,)), phi((v,)), phi((v - step,))
        grad = float(h(x, ParamPoint((v,))))
        deviation = abs(grad - (up - down) / (2 * step))
        second = (up - 2 * mid + down) / (step * step)
        return FiniteDiffReport(deviation, second)

    values = p.values if isinstance(p, ParamPoint) else tuple(p)
    if any(not step < float(v) < 1 - step for v in values):
        raise PreconditionError("p must be interior")
    grad = h(x, ParamPoint(values))
    deviation = 0.0
    second = float("inf")
    mid = phi(values)
    for j in range(len(values)):
        bumped = list(float(v) for v in values)
        bumped[j] += step
        up = phi(tuple(bumped))
        bumped[j] -= 2 * step
        down = phi(tuple(bumped))
        deviation = max(deviation, abs(float(grad[j]) - (up - down) / (2 * step)))
        second = min(second, (up - 2 * mid + down) / (step * step))
    return FiniteDiffReport(deviation, second)
