"""On-line hypergraph coloring driven by the game engine.

Each declared edge of cardinality a is a chip at (a, starting path); a
vertex arrival runs exactly the chips of its incident edges one level down,
and the color the painter answers is the move label the value-preserving
Remover would pick.  An edge whose path dies is satisfied (it can never
become monochromatic / color-missing); an edge that reaches zero uncolored
vertices while still alive is a recorded violation -- a harvested chip.

The reverse direction drives the adversary: a Pusher winning strategy (the
exact minimax one when the instance is small enough, the rounded continuous
one otherwise) is realized as a vertex stream in which "the next vertex
belongs to exactly the running edges".
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence, Union

from .core import (
    KIND_PANCHROMATIC,
    KIND_PROPER,
    KIND_PROPERTY_B,
    Arrangement,
    Cell,
    GoldSandError,
    MoveSplit,
    PathSystem,
    StreamError,
    UnsupportedKindError,
    build_path_system,
    make_arrangement,
)
from .strategies import DEFAULT_CONFIG, StrategyConfig, remover_respond

PAINTER_KINDS = (KIND_PROPERTY_B, KIND_PROPER, KIND_PANCHROMATIC)


class IncompleteColoringError(GoldSandError):
    """verify_coloring was handed a coloring with uncolored vertices."""


@dataclass(frozen=True)
class StreamHeader:
    kind: str
    edges: tuple[tuple[str, int], ...]
    r: int | None = None

    def __post_init__(self) -> None:
        seen = set()
        for edge_id, size in self.edges:
            if edge_id in seen:
                raise StreamError(f"duplicate edge id {edge_id!r}")
            seen.add(edge_id)
            if not isinstance(size, int) or size < 1:
                raise StreamError(f"edge {edge_id!r} needs a cardinality >= 1, got {size!r}")


@dataclass(frozen=True)
class VertexEvent:
    vertex: str
    edges: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(set(self.edges)) != len(self.edges):
            raise StreamError(f"vertex {self.vertex!r} lists an edge twice")


@dataclass
class _Edge:
    remaining: int
    path: str
    alive: bool = True


class PainterState:
    """Mutable per-stream painter: edge chips plus the running violations."""

    def __init__(self, system: PathSystem, max_level: int, cfg: StrategyConfig) -> None:
        self.system = system
        self.max_level = max_level
        self.cfg = cfg
        self.edges: dict[str, _Edge] = {}
        self.violations: list[str] = []
        self.colors: list[tuple[str, int]] = []

    def live_amounts(self) -> dict[Cell, int]:
        amounts: dict[Cell, int] = {}
        for e in self.edges.values():
            if e.alive and e.remaining > 0:
                cell = (e.remaining, e.path)
                amounts[cell] = amounts.get(cell, 0) + 1
        return amounts

    def arrangement(self) -> Arrangement:
        return make_arrangement(
            self.system, self.live_amounts(), mode="discrete", max_level=self.max_level
        )


def _initial_path(system: PathSystem) -> str:
    if system.kind == KIND_PANCHROMATIC:
        return "0" * (system.r or 0)
    return "0"


def painter_new(header: StreamHeader, cfg: StrategyConfig = DEFAULT_CONFIG) -> PainterState:
    """Set up a painter for one stream: one chip per declared edge."""
    if header.kind not in PAINTER_KINDS:
        raise UnsupportedKindError(f"no painter for kind {header.kind!r}")
    system = build_path_system(header.kind, header.r)
    max_level = max((size for _, size in header.edges), default=1)
    state = PainterState(system, max_level, cfg)
    start = _initial_path(system)
    for edge_id, size in header.edges:
        state.edges[edge_id] = _Edge(remaining=size, path=start)
    return state


def painter_on_vertex(state: PainterState, event: VertexEvent) -> int:
    """Color one vertex: the Remover's reply to running the incident edges.

    Incidences on discarded (dead-path) edges carry no constraint and only
    tick the edge's vertex count down; a vertex on an already fully colored
    or undeclared edge is a malformed stream.
    """
    live_incident: list[str] = []
    for edge_id in event.edges:
        edge = state.edges.get(edge_id)
        if edge is None:
            raise StreamError(f"vertex {event.vertex!r} references unknown edge {edge_id!r}")
        if edge.remaining <= 0:
            raise StreamError(f"edge {edge_id!r} is already fully colored")
        if edge.alive:
            live_incident.append(edge_id)

    if not live_incident:
        label = min(state.system.labels)
    else:
        x = state.arrangement()
        running: dict[Cell, int] = {}
        for edge_id in live_incident:
            edge = state.edges[edge_id]
            cell = (edge.remaining, edge.path)
            running[cell] = running.get(cell, 0) + 1
        label = remover_respond(x, MoveSplit(running), state.cfg)

    for edge_id in event.edges:
        edge = state.edges[edge_id]
        edge.remaining -= 1
        if edge.alive:
            edge.path = state.system.step(edge.path, label)
            if edge.path == state.system.dead:
                edge.alive = False
            elif edge.remaining == 0:
                state.violations.append(edge_id)
    state.colors.append((event.vertex, label))
    return label


# ---------------------------------------------------------------------------
# Stream wire format


def parse_stream(text: Union[str, Iterable[str]], kind: str, r: int | None = None) -> tuple[StreamHeader, tuple[VertexEvent, ...]]:
    """Parse the line format: "edge <id> <size>"*, "vertex <id> <edges>"*, "end"."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    edges: list[tuple[str, int]] = []
    events: list[VertexEvent] = []
    ended = False
    for raw in lines:
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if ended:
            raise StreamError(f"content after end: {line!r}")
        parts = line.split()
        if parts[0] == "edge":
            if events:
                raise StreamError("edge declared after the first vertex event")
            if len(parts) != 3:
                raise StreamError(f"malformed edge line: {line!r}")
            try:
                size = int(parts[2])
            except ValueError:
                raise StreamError(f"bad edge cardinality in {line!r}") from None
            edges.append((parts[1], size))
        elif parts[0] == "vertex":
            if len(parts) < 2:
                raise StreamError(f"malformed vertex line: {line!r}")
            events.append(VertexEvent(parts[1], tuple(parts[2:])))
        elif parts[0] == "end":
            ended = True
        else:
            raise StreamError(f"unknown stream line: {line!r}")
    return StreamHeader(kind, tuple(edges), r=r), tuple(events)


def format_stream(header: StreamHeader, events: Sequence[VertexEvent]) -> str:
    lines = [f"edge {edge_id} {size}" for edge_id, size in header.edges]
    lines.extend(f"vertex {ev.vertex} {' '.join(ev.edges)}".rstrip() for ev in events)
    lines.append("end")
    return "\n".join(lines) + "\n"


@dataclass
class StreamRun:
    header: StreamHeader
    colors: list[tuple[str, int]]
    violations: list[str]
    state: PainterState

    def report(self) -> dict:
        return {
            "kind": self.header.kind,
            "edges": len(self.header.edges),
            "vertices": len(self.colors),
            "violations": sorted(self.violations),
        }


def run_stream(
    text: Union[str, Iterable[str]],
    kind: str,
    r: int | None = None,
    cfg: StrategyConfig = DEFAULT_CONFIG,
) -> StreamRun:
    header, events = parse_stream(text, kind, r)
    state = painter_new(header, cfg)
    colors = [(ev.vertex, painter_on_vertex(state, ev)) for ev in events]
    return StreamRun(header, colors, list(state.violations), state)


def random_stream(kind: str, k: int, m: int, seed: int = 0, r: int | None = None) -> str:
    """A complete random stream: m edges of size k, random incidence pattern."""
    rng = random.Random(seed)
    header = StreamHeader(kind, tuple((f"e{i + 1}", k) for i in range(m)), r=r)
    remaining = {edge_id: size for edge_id, size in header.edges}
    events = []
    v = 0
    while any(c > 0 for c in remaining.values()):
        open_edges = sorted(e for e, c in remaining.items() if c > 0)
        count = rng.randint(1, len(open_edges))
        chosen = sorted(rng.sample(open_edges, count))
        v += 1
        events.append(VertexEvent(f"v{v}", tuple(chosen)))
        for e in chosen:
            remaining[e] -= 1
    return format_stream(header, events)


# ---------------------------------------------------------------------------
# Off-line verification


def verify_coloring(
    hypergraph: Mapping[str, Iterable[str]],
    colors: Mapping[str, int],
    kind: str,
    r: int | None = None,
) -> list[str]:
    """Check a finished coloring; returns the violating edge ids.

    PropertyB and Proper(r) flag monochromatic edges; Panchromatic(r) flags
    edges that miss one of the r colors.
    """
    if kind in (KIND_PROPERTY_B, KIND_PROPER, KIND_PANCHROMATIC):
        system = build_path_system(kind, r)
    else:
        raise UnsupportedKindError(f"no coloring semantics for kind {kind!r}")
    labels = set(system.labels)
    violations = []
    for edge_id, vertices in hypergraph.items():
        seen = set()
        for v in vertices:
            if v not in colors:
                raise IncompleteColoringError(f"vertex {v!r} of edge {edge_id!r} is uncolored")
            c = colors[v]
            if c not in labels:
                raise IncompleteColoringError(f"vertex {v!r} has out-of-range color {c!r}")
            seen.add(c)
        if not seen:
            continue
        if kind == KIND_PANCHROMATIC:
            if seen != labels:
                violations.append(edge_id)
        elif len(seen) == 1:
            violations.append(edge_id)
    return violations


# ---------------------------------------------------------------------------
# Adversarial stream generation


PainterFn = Callable[[str, tuple[str, ...], Sequence[int]], int]


@dataclass
class AdversaryReport:
    defeated: bool
    experimental: bool
    stream: str
    colors: list[tuple[str, int]]
    violations: list[str]

    def report(self) -> dict:
        return {
            "defeated": self.defeated,
            "experimental": self.experimental,
            "violations": sorted(self.violations),
            "vertices": len(self.colors),
        }


def _painter_under_test(
    spec: Union[str, PainterFn, None],
    header: StreamHeader,
    cfg: StrategyConfig,
    seed: int,
) -> PainterFn:
    if spec is None or spec == "optimal":
        state = painter_new(header, cfg)

        def optimal(vertex: str, edges: tuple[str, ...], labels: Sequence[int]) -> int:
            return painter_on_vertex(state, VertexEvent(vertex, edges))

        return optimal
    if spec == "uniform-random":
        rng = random.Random(seed)

        def uniform(vertex: str, edges: tuple[str, ...], labels: Sequence[int]) -> int:
            return rng.choice(list(labels))

        return uniform
    if callable(spec):
        return spec
    raise UnsupportedKindError(f"unknown painter under test {spec!r}")


def presenter_adversary(
    kind: str,
    k: int,
    m: int,
    painter: Union[str, PainterFn, None] = None,
    r: int | None = None,
    seed: int = 0,
    cfg: StrategyConfig = DEFAULT_CONFIG,
) -> AdversaryReport:
    """Attack a painter with m edges of size k, one vertex event at a time.

    Within the minimax oracle bounds the exact winning strategy (when one
    exists) is replayed, so a beatable painter is beaten with certainty.
    Larger instances round the continuous Pusher's split to whole edges,
    which is a heuristic -- the report says so via ``experimental``.
    """
    if kind not in PAINTER_KINDS:
        raise UnsupportedKindError(f"no painter semantics for kind {kind!r}")
    system = build_path_system(kind, r)
    header = StreamHeader(kind, tuple((f"e{i + 1}", k) for i in range(m)), r=r)
    answer = _painter_under_test(painter, header, cfg, seed)
    labels = list(system.labels)
    start = _initial_path(system)
    edges = {edge_id: _Edge(remaining=size, path=start) for edge_id, size in header.edges}

    exact = m <= 8 and k <= 5 and len(labels) <= 3
    minimax = None
    if exact:
        from .oracles import minimax_discrete

        x0 = make_arrangement(system, {(k, start): m}, mode="discrete", max_level=k)
        minimax = minimax_discrete(x0)

    events: list[VertexEvent] = []
    colors: list[tuple[str, int]] = []
    violations: list[str] = []
    v = 0

    def live_cells() -> dict[Cell, list[str]]:
        cells: dict[Cell, list[str]] = {}
        for edge_id in sorted(edges):
            e = edges[edge_id]
            if e.alive and e.remaining > 0:
                cells.setdefault((e.remaining, e.path), []).append(edge_id)
        return cells

    def emit(chosen: list[str]) -> None:
        nonlocal v
        v += 1
        event = VertexEvent(f"v{v}", tuple(sorted(chosen)))
        label = answer(event.vertex, event.edges, labels)
        if label not in labels:
            raise StreamError(f"painter under test answered a non-label {label!r}")
        events.append(event)
        colors.append((event.vertex, label))
        for edge_id in event.edges:
            e = edges[edge_id]
            e.remaining -= 1
            if e.alive:
                e.path = system.step(e.path, label)
                if e.path == system.dead:
                    e.alive = False
                elif e.remaining == 0:
                    violations.append(edge_id)

    guard = sum(size for _, size in header.edges) + 1
    for _ in range(guard):
        cells = live_cells()
        if not cells or violations:
            break
        chosen: list[str] = []
        split = None
        if minimax is not None:
            counts = {cell: len(ids) for cell, ids in cells.items()}
            split = minimax.winning_split(counts)
        if split is None and minimax is None:
            split = _rounded_continuous_split(system, cells, cfg)
        if not split:
            # no winning line (or nothing worth running): run everything
            split = {cell: len(ids) for cell, ids in cells.items()}
        chosen = [edge_id for cell, n in split.items() for edge_id in cells.get(cell, [])[:n]]
        if not chosen:
            break
        emit(chosen)

    # complete the stream: dead edges still hold uncolored vertices
    for _ in range(guard):
        leftover = sorted(e for e, st in edges.items() if st.remaining > 0)
        if not leftover:
            break
        emit(leftover)

    return AdversaryReport(
        defeated=bool(violations),
        experimental=not exact,
        stream=format_stream(header, events),
        colors=colors,
        violations=violations,
    )


def _rounded_continuous_split(
    system: PathSystem, cells: Mapping[Cell, list[str]], cfg: StrategyConfig
) -> dict[Cell, int]:
    """Round the continuous Pusher's split to whole edges (experimental)."""
    from .strategies import pusher_respond

    amounts = {cell: len(ids) for cell, ids in cells.items()}
    max_level = max(lvl for lvl, _ in amounts)
    x = make_arrangement(system, amounts, mode="continuous", max_level=max_level)
    try:
        split = pusher_respond(x, cfg)
    except GoldSandError:
        return {}
    rounded: dict[Cell, int] = {}
    for cell, amount in split.running.items():
        n = min(int(round(float(amount))), len(cells.get(cell, ())))
        if n > 0:
            rounded[cell] = n
    if not rounded and split.running:
        # keep at least one edge moving so the attack makes progress
        cell = max(split.running, key=lambda c: float(split.running[c]))
        if cells.get(cell):
            rounded[cell] = 1
    return rounded
