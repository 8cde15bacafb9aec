"""Command-line interface: eval (cross-play), play (one logged episode),
replay (hermetic re-run from a log), and serve (live play server)."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .harness import cross_play, summarize, write_cells_csv, write_seats_csv
from .layout import list_layouts
from .orchestrator import replay_episode, run_episode


def _split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def cmd_eval(args: argparse.Namespace) -> int:
    layouts = _split_list(args.layouts)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    matrix = cross_play(
        args.policies, layouts, args.episodes, args.horizon, args.seed,
        workers=args.workers,
        log_dir=out / "episodes" if args.save_episodes else None,
    )
    summary = summarize(matrix)
    (out / "matrix.json").write_text(
        json.dumps(matrix.to_json(), indent=2), encoding="utf-8"
    )
    (out / "summary.json").write_text(
        json.dumps(summary.to_json(), indent=2), encoding="utf-8"
    )
    write_cells_csv(summary, out / "cells.csv")
    write_seats_csv(summary, out / "seats.csv")
    if not args.no_figures:
        from .report import render_heatmaps, render_seat_chart

        render_heatmaps(summary, out)
        render_seat_chart(summary, out)
    print(f"{matrix.total_episodes()} episodes across "
          f"{len(matrix.cells)} cells -> {out}")
    for row in summary.incomplete_cells:
        print(f"INCOMPLETE {row['layout']} ({row['p0']}, {row['p1']}): {row['reason']}")
    return 1 if matrix.has_incomplete() else 0


def cmd_play(args: argparse.Namespace) -> int:
    result = run_episode(
        args.layout, (args.p0, args.p1), seed=args.seed, horizon=args.horizon
    )
    print(f"layout={result.layout} policies={result.policies} seed={result.seed}")
    print(f"reward={result.total_reward} deliveries={result.deliveries} "
          f"trace_hash={result.trace_hash}")
    if args.out:
        Path(args.out).write_text(json.dumps(result.to_json()), encoding="utf-8")
        print(f"log written to {args.out}")
    return 0


def cmd_replay(args: argparse.Namespace) -> int:
    log = json.loads(Path(args.log).read_text(encoding="utf-8"))
    result = replay_episode(log)
    expected = log["trace_hash"]
    print(f"replayed {log['layout']} seed={log['seed']}: "
          f"reward={result.total_reward} trace_hash={result.trace_hash}")
    if result.trace_hash != expected:
        print(f"MISMATCH: log hash {expected}")
        return 1
    print("trace hash matches the log")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import ServerConfig, create_app

    config = ServerConfig(
        layouts=_split_list(args.layouts) if args.layouts else list_layouts(),
        log_dir=Path(args.log_dir),
        tick_rate=args.tick_rate,
        horizon=args.horizon,
    )
    app = create_app(config)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coopkitchen",
        description="Two-cook kitchen coordination sandbox",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_eval = sub.add_parser("eval", help="cross-play evaluation over policy pairs")
    p_eval.add_argument("--layouts", required=True,
                        help="comma-separated layout names")
    p_eval.add_argument("--policies", required=True, nargs="+",
                        help="policy specs, e.g. proagent:backend=scripted greedy stay random:7")
    p_eval.add_argument("--episodes", type=int, default=10)
    p_eval.add_argument("--horizon", type=int, default=400)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--out", required=True, help="output directory")
    p_eval.add_argument("--workers", type=int, default=1)
    p_eval.add_argument("--save-episodes", action="store_true",
                        help="also write every full episode log")
    p_eval.add_argument("--no-figures", action="store_true",
                        help="skip PNG rendering")
    p_eval.set_defaults(func=cmd_eval)

    p_play = sub.add_parser("play", help="run one logged episode")
    p_play.add_argument("--layout", required=True)
    p_play.add_argument("--p0", required=True)
    p_play.add_argument("--p1", required=True)
    p_play.add_argument("--seed", type=int, default=0)
    p_play.add_argument("--horizon", type=int, default=400)
    p_play.add_argument("--out", help="write the episode log JSON here")
    p_play.set_defaults(func=cmd_play)

    p_replay = sub.add_parser("replay", help="re-run an episode from its log")
    p_replay.add_argument("--log", required=True)
    p_replay.set_defaults(func=cmd_replay)

    p_serve = sub.add_parser("serve", help="live human-vs-agent play server")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    p_serve.add_argument("--layouts", help="comma-separated subset of layouts")
    p_serve.add_argument("--log-dir", default="play_logs")
    p_serve.add_argument("--tick-rate", type=float, default=5.0)
    p_serve.add_argument("--horizon", type=int, default=400)
    p_serve.set_defaults(func=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
