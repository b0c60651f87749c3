from __future__ import annotations

import random

import pytest

from goldsand.coloring import (
    AdversaryReport,
    IncompleteColoringError,
    StreamHeader,
    VertexEvent,
    format_stream,
    parse_stream,
    presenter_adversary,
    random_stream,
    run_stream,
    verify_coloring,
)
from goldsand.core import StreamError, UnsupportedKindError


# ---------------------------------------------------------------------------
# wire format


def test_parse_format_round_trip():
    text = "edge a 2\nedge b 3\nvertex v1 a b\nvertex v2 b\nend\n"
    header, events = parse_stream(text, "property_b")
    assert header.edges == (("a", 2), ("b", 3))
    assert events == (VertexEvent("v1", ("a", "b")), VertexEvent("v2", ("b",)))
    assert format_stream(header, events) == text
    # comments and blank lines are skipped; a missing "end" is tolerated
    messy = "# a comment\n\nedge a 2\n  vertex v1 a  \n"
    header2, events2 = parse_stream(messy, "property_b")
    assert header2.edges == (("a", 2),)
    assert events2 == (VertexEvent("v1", ("a",)),)


def test_parse_stream_errors():
    with pytest.raises(StreamError, match="edge declared after the first vertex"):
        parse_stream("edge a 2\nvertex v a\nedge b 2\n", "property_b")
    with pytest.raises(StreamError, match="content after end"):
        parse_stream("edge a 1\nend\nvertex v a\n", "property_b")
    with pytest.raises(StreamError, match="lists an edge twice"):
        parse_stream("edge a 2\nvertex v a a\n", "property_b")
    with pytest.raises(StreamError, match="cardinality >= 1"):
        parse_stream("edge a 0\n", "property_b")
    with pytest.raises(StreamError, match="duplicate edge id"):
        parse_stream("edge a 1\nedge a 2\n", "property_b")
    with pytest.raises(StreamError, match="malformed edge line"):
        parse_stream("edge a\n", "property_b")
    with pytest.raises(StreamError, match="bad edge cardinality"):
        parse_stream("edge a two\n", "property_b")
    with pytest.raises(StreamError, match="malformed vertex line"):
        parse_stream("edge a 1\nvertex\n", "property_b")
    with pytest.raises(StreamError, match="unknown stream line"):
        parse_stream("frobnicate\n", "property_b")


def test_run_stream_errors():
    with pytest.raises(StreamError, match="references unknown edge 'b'"):
        run_stream("edge a 2\nvertex v b\n", "property_b")
    with pytest.raises(StreamError, match="'a' is already fully colored"):
        run_stream("edge a 1\nvertex v1 a\nvertex v2 a\n", "property_b")


# ---------------------------------------------------------------------------
# the on-line painter


def test_tiny_stream_pinned_colors():
    text = (
        "edge a 2\nedge b 2\nedge c 2\n"
        "vertex v1 a b\nvertex v2 a\nvertex v3 b c\nvertex v4 c\nend\n"
    )
    run = run_stream(text, "property_b")
    assert run.colors == [("v1", 1), ("v2", 2), ("v3", 2), ("v4", 1)]
    assert run.violations == []
    assert run.report() == {
        "kind": "property_b",
        "edges": 3,
        "vertices": 4,
        "violations": [],
    }


def test_single_vertex_edge_is_always_lost():
    run = run_stream("edge a 1\nvertex v1 a\nend\n", "property_b")
    assert run.violations == ["a"]


def test_random_stream_is_complete_and_parses():
    for seed in range(5):
        text = random_stream("property_b", 3, 4, seed=seed)
        header, events = parse_stream(text, "property_b")
        assert header.edges == tuple((f"e{i}", 3) for i in range(1, 5))
        counts = {e: 0 for e, _ in header.edges}
        for ev in events:
            for e in ev.edges:
                counts[e] += 1
        assert all(c == 3 for c in counts.values())
        assert format_stream(header, events) == text


def test_painter_guarantee_small_streams():
    # fewer than 2^(k-1) two-colorable edges: the painter never loses one
    for k in (3, 4):
        m = 2 ** (k - 1) - 1
        for seed in range(6):
            run = run_stream(random_stream("property_b", k, m, seed=seed), "property_b")
            assert run.violations == [], (k, m, seed)
    # proper, r colors: the bound is r^(k-1) - 1
    run = run_stream(random_stream("proper", 3, 8, seed=2, r=3), "proper", r=3)
    assert run.violations == []
    # panchromatic painter exists and saves a lone roomy edge
    run = run_stream(random_stream("panchromatic", 3, 1, seed=0, r=2), "panchromatic", r=2)
    assert run.violations == []


# ---------------------------------------------------------------------------
# off-line verification


def test_verify_coloring_monochromatic():
    hg = {"a": ["v1", "v2"], "b": ["v2", "v3"]}
    assert verify_coloring(hg, {"v1": 1, "v2": 1, "v3": 2}, "property_b") == ["a"]
    assert verify_coloring(hg, {"v1": 1, "v2": 2, "v3": 1}, "property_b") == []
    assert verify_coloring(hg, {"v1": 1, "v2": 1, "v3": 1}, "property_b") == ["a", "b"]
    assert verify_coloring({"a": []}, {}, "property_b") == []


def test_verify_coloring_panchromatic_and_proper():
    hg = {"a": ["v1", "v2", "v3"]}
    colors = {"v1": 1, "v2": 1, "v3": 2}
    assert verify_coloring(hg, colors, "panchromatic", r=3) == ["a"]  # color 3 missing
    assert verify_coloring(hg, {"v1": 1, "v2": 2, "v3": 3}, "panchromatic", r=3) == []
    assert verify_coloring(hg, {"v1": 2, "v2": 2, "v3": 2}, "proper", r=3) == ["a"]
    assert verify_coloring(hg, colors, "proper", r=3) == []


def test_verify_coloring_errors():
    hg = {"a": ["v1", "v2"]}
    with pytest.raises(IncompleteColoringError, match="is uncolored"):
        verify_coloring(hg, {"v1": 1}, "property_b")
    with pytest.raises(IncompleteColoringError, match="out-of-range color"):
        verify_coloring(hg, {"v1": 1, "v2": 9}, "property_b")
    with pytest.raises(UnsupportedKindError):
        verify_coloring(hg, {"v1": 1, "v2": 2}, "list")


# ---------------------------------------------------------------------------
# adversarial presenter


def test_presenter_beats_overloaded_painters():
    rep = presenter_adversary("property_b", 2, 3, painter="optimal", seed=3)
    assert rep.defeated and not rep.experimental
    rep = presenter_adversary("property_b", 3, 8, painter="optimal", seed=3)
    assert rep.defeated and not rep.experimental
    rep = presenter_adversary("property_b", 2, 3, painter="uniform-random", seed=3)
    assert rep.defeated


def test_presenter_cannot_beat_painter_under_the_bound():
    rep = presenter_adversary("property_b", 3, 3, painter="optimal", seed=1)
    assert not rep.defeated
    assert rep.violations == []


def test_presenter_single_vertex_edges():
    rep = presenter_adversary("property_b", 1, 1, painter="optimal")
    assert rep.defeated
    assert rep.violations == ["e1"]


def test_presenter_defeats_agree_with_offline_verification():
    for kind, k, m, painter in [
        ("property_b", 2, 3, "optimal"),
        ("property_b", 3, 8, "optimal"),
        ("property_b", 2, 3, "uniform-random"),
    ]:
        rep = presenter_adversary(kind, k, m, painter=painter, seed=5)
        assert rep.defeated
        header, events = parse_stream(rep.stream, kind)
        hg: dict[str, list[str]] = {e: [] for e, _ in header.edges}
        for ev in events:
            for e in ev.edges:
                hg[e].append(ev.vertex)
        offline = verify_coloring(hg, dict(rep.colors), kind)
        assert set(rep.violations) <= set(offline)


def test_presenter_experimental_flag_and_report():
    rep = presenter_adversary("property_b", 3, 9, painter="optimal", seed=1)
    assert rep.experimental
    assert isinstance(rep, AdversaryReport)
    d = rep.report()
    assert set(d) == {"defeated", "experimental", "violations", "vertices"}
    with pytest.raises(UnsupportedKindError):
        presenter_adversary("list", 2, 2)
    with pytest.raises(UnsupportedKindError):
        presenter_adversary("property_b", 2, 2, painter="telepathic")


def test_presenter_accepts_callable_painter():
    rng = random.Random(9)

    def stubborn(vertex: str, edges: tuple[str, ...], labels) -> int:
        return 1  # always the same color: loses as soon as an edge fills up

    rep = presenter_adversary("property_b", 2, 2, painter=stubborn, seed=0)
    assert rep.defeated


def test_stream_header_validation():
    with pytest.raises(StreamError):
        StreamHeader("property_b", (("a", 1), ("a", 2)))
    with pytest.raises(StreamError):
        StreamHeader("property_b", (("a", 0),))
    with pytest.raises(StreamError):
        VertexEvent("v", ("a", "a"))
