"""Command-line entry point: values, duels, oracles, coloring, the service.

Exit codes: 0 on success, 1 on domain errors (bad inputs, out-of-bounds
oracle calls), 2 on usage errors (argparse's convention).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

from .core import (
    GoldSandError,
    arrangement_from_json,
    mask_from_path,
)
from .coloring import run_stream, random_stream
from .oracles import best_remover_line, minimax_discrete, panchromatic_fail_probability
from .solver import solve_value
from .strategies import (
    PUSHER_POLICY_NAMES,
    REMOVER_POLICY_NAMES,
    StrategyConfig,
    play,
)


def _read_arrangement(path: str):
    with open(path, "r", encoding="utf-8") as fh:
        return arrangement_from_json(fh.read())


def _print_json(data: dict) -> None:
    print(json.dumps(data, sort_keys=True))


def _cmd_value(args: argparse.Namespace) -> int:
    x = _read_arrangement(args.infile)
    result = solve_value(x, args.tol)
    _print_json(result.to_dict())
    return 0


def _make_config(args: argparse.Namespace) -> StrategyConfig:
    return StrategyConfig(
        epsilon=args.eps,
        pusher_mode=getattr(args, "mode", "adaptive"),
        seed=getattr(args, "seed", None),
    )


def _cmd_simulate(args: argparse.Namespace) -> int:
    x = _read_arrangement(args.infile)
    pusher = args.pusher
    if pusher == "optimal":
        pusher = f"optimal-{args.mode}"
    trace = play(x, pusher, args.remover, _make_config(args))
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as fh:
            fh.write(trace.to_jsonl())
    _print_json(
        {
            "totalHarvested": trace.total_harvested,
            "totalDestroyed": trace.total_destroyed,
            "rounds": len(trace.rounds),
            "flags": trace.flags,
        }
    )
    return 0


def _cmd_duel(args: argparse.Namespace) -> int:
    x = _read_arrangement(args.infile)
    e0 = solve_value(x).e
    trace = play(x, "optimal-adaptive", "optimal", _make_config(args))
    _print_json(
        {
            "harvest": trace.total_harvested,
            "e": e0,
            "gap": e0 - trace.total_harvested,
            "rounds": len(trace.rounds),
        }
    )
    return 0


def _cmd_oracle_minimax(args: argparse.Namespace) -> int:
    x = _read_arrangement(args.infile)
    result = minimax_discrete(x, budget=args.budget)
    _print_json({"winner": result.winner, "explored": result.explored})
    return 0


def _cmd_oracle_panchromatic(args: argparse.Namespace) -> int:
    probs = tuple(Fraction(part.strip()) for part in args.p.split(","))
    mask = mask_from_path(args.mask) if args.mask else 0
    value = panchromatic_fail_probability(mask, args.i, probs, args.r)
    _print_json({"probability": str(value), "float": float(value)})
    return 0


def _cmd_oracle_remover_line(args: argparse.Namespace) -> int:
    x = _read_arrangement(args.infile)
    pusher = args.pusher
    if pusher == "optimal":
        pusher = "optimal-adaptive"
    value = best_remover_line(x, pusher, args.horizon, _make_config(args))
    _print_json({"harvest": value, "horizon": args.horizon, "pusher": pusher})
    return 0


def _cmd_color(args: argparse.Namespace) -> int:
    if args.stream == "-":
        text = sys.stdin.read()
    else:
        with open(args.stream, "r", encoding="utf-8") as fh:
            text = fh.read()
    result = run_stream(text, args.kind, r=args.r)
    for _, label in result.colors:
        print(f"color {label}")
    _print_json(result.report())
    return 0 if not result.violations else 1


def _cmd_bench_thresholds(args: argparse.Namespace) -> int:
    if args.kind == "property_b":
        m = 2 ** (args.k - 1) - 1
        r = None
    elif args.kind == "proper":
        if args.r is None:
            raise GoldSandError("proper thresholds need --r")
        m = args.r ** (args.k - 1) - 1
        r = args.r
    else:
        raise GoldSandError(f"no threshold bench for kind {args.kind!r}")
    violations = 0
    for i in range(args.streams):
        text = random_stream(args.kind, args.k, m, seed=args.seed + i, r=r)
        violations += len(run_stream(text, args.kind, r=r).violations)
    _print_json(
        {
            "kind": args.kind,
            "k": args.k,
            "m": m,
            "streams": args.streams,
            "violations": violations,
            "ok": violations == 0,
        }
    )
    return 0 if violations == 0 else 1


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    port = int(os.environ.get("GOLDSAND_PORT", args.port))
    app = create_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="goldsand", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_value = sub.add_parser("value", help="compute e(x), p*, and the degeneracy class")
    p_value.add_argument("--in", dest="infile", required=True)
    p_value.add_argument("--tol", type=float, default=1e-9)
    p_value.set_defaults(func=_cmd_value)

    p_sim = sub.add_parser("simulate", help="play one game between named policies")
    p_sim.add_argument("--in", dest="infile", required=True)
    p_sim.add_argument("--pusher", default="optimal-adaptive",
                       help=f"one of {', '.join(PUSHER_POLICY_NAMES)} (or 'optimal')")
    p_sim.add_argument("--remover", default="optimal",
                       help=f"one of {', '.join(REMOVER_POLICY_NAMES)}")
    p_sim.add_argument("--eps", type=float, default=0.01)
    p_sim.add_argument("--mode", choices=("adaptive", "proof"), default="adaptive")
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--trace", default=None, help="write the game trace as JSONL")
    p_sim.set_defaults(func=_cmd_simulate)

    p_duel = sub.add_parser("duel", help="optimal Pusher vs optimal Remover")
    p_duel.add_argument("--in", dest="infile", required=True)
    p_duel.add_argument("--eps", type=float, default=0.01)
    p_duel.add_argument("--seed", type=int, default=None)
    p_duel.set_defaults(func=_cmd_duel)

    p_oracle = sub.add_parser("oracle", help="independent brute-force checkers")
    oracle_sub = p_oracle.add_subparsers(dest="oracle", required=True)

    p_mm = oracle_sub.add_parser("minimax", help="exact winner of a discrete chip game")
    p_mm.add_argument("--in", dest="infile", required=True)
    p_mm.add_argument("--budget", type=int, default=2_000_000)
    p_mm.set_defaults(func=_cmd_oracle_minimax)

    p_pan = oracle_sub.add_parser("panchromatic", help="exact color-miss probability")
    p_pan.add_argument("--r", type=int, required=True)
    p_pan.add_argument("--i", type=int, required=True)
    p_pan.add_argument("--p", required=True, help="comma-separated rationals, e.g. 1/4,1/4,1/2")
    p_pan.add_argument("--mask", default=None, help="already-seen colors as a path string, e.g. 10")
    p_pan.set_defaults(func=_cmd_oracle_panchromatic)

    p_line = oracle_sub.add_parser("remover-line", help="exhaustive Remover opening search")
    p_line.add_argument("--in", dest="infile", required=True)
    p_line.add_argument("--horizon", type=int, required=True)
    p_line.add_argument("--pusher", default="optimal-adaptive")
    p_line.add_argument("--eps", type=float, default=0.01)
    p_line.add_argument("--seed", type=int, default=None)
    p_line.set_defaults(func=_cmd_oracle_remover_line)

    p_color = sub.add_parser("color", help="color an on-line stream, report violations")
    p_color.add_argument("--kind", required=True)
    p_color.add_argument("--r", type=int, default=None)
    p_color.add_argument("--stream", required=True, help="stream file, or - for stdin")
    p_color.set_defaults(func=_cmd_color)

    p_bench = sub.add_parser("bench", help="threshold benchmarks")
    bench_sub = p_bench.add_subparsers(dest="bench", required=True)
    p_thr = bench_sub.add_parser("thresholds", help="painter guarantee at the edge-count threshold")
    p_thr.add_argument("--kind", default="property_b")
    p_thr.add_argument("--k", type=int, required=True)
    p_thr.add_argument("--r", type=int, default=None)
    p_thr.add_argument("--streams", type=int, default=100)
    p_thr.add_argument("--seed", type=int, default=0)
    p_thr.set_defaults(func=_cmd_bench_thresholds)

    p_serve = sub.add_parser("serve", help="start the HTTP session service")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--state-dir", default=None)
    p_serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GoldSandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
