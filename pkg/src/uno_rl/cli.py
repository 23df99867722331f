"""Command line entry point: train / eval / serve / play.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime failure.
"""

import argparse
import logging
import sys
import time
from pathlib import Path

from .config import ConfigError, TrainConfig, load_config, parse_config_text


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uno-rl", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train an agent per a config file")
    p_train.add_argument("config", nargs="?", help="flat key-value config file")
    p_train.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                         help="override a config key")

    p_eval = sub.add_parser("eval", help="pit checkpoints against each other")
    p_eval.add_argument("checkpoints", nargs="+", help="checkpoint files; "
                        "'random' for a random seat")
    p_eval.add_argument("--games", type=int, default=1000)
    p_eval.add_argument("--seed", type=int, default=0)
    p_eval.add_argument("--no-rotation", action="store_true")
    p_eval.add_argument("--csv", help="also write the report to this CSV path")

    p_serve = sub.add_parser("serve", help="run the game service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--udp-port", type=int, default=47701)
    p_serve.add_argument("--ws-port", type=int, default=47702)
    p_serve.add_argument("--http-port", type=int, default=47703)
    p_serve.add_argument("--static-dir", default=None,
                         help="browser client assets (default: bundled frontend)")
    p_serve.add_argument("--seed", type=int, default=0)
    p_serve.add_argument("--turn-timeout", type=float, default=None,
                         help="seconds before a human turn is auto-played")

    p_play = sub.add_parser("play", help="terminal client")
    p_play.add_argument("address", help="host:port of a running server (UDP)")
    p_play.add_argument("--create", type=int, default=0, metavar="N",
                        help="create an N-player table before joining")
    p_play.add_argument("--bots", type=int, default=0, help="random bots to seat")
    p_play.add_argument("--session", default="", help="join an existing table")
    p_play.add_argument("--auto", action="store_true",
                        help="play random legal moves unattended")
    p_play.add_argument("--seed", type=int, default=0)
    return parser


def cmd_train(args) -> int:
    try:
        cfg = load_config(args.config) if args.config else TrainConfig()
        overrides = "\n".join(s.replace("=", " = ", 1) for s in args.set)
        if overrides:
            cfg = parse_config_text(overrides, base=cfg)
        cfg.validate()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    from .training import train

    try:
        summary = train(cfg)
    except Exception as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return 2
    print(f"trained {summary['episodes']} episodes "
          f"({summary['env_steps']} decisions, {summary['train_steps']} updates) "
          f"in {summary['wall_clock_s']:.1f}s")
    if summary["eval_series"]:
        episode, win_rate, avg_reward = summary["eval_series"][-1]
        print(f"last eval @ episode {episode}: win_rate={win_rate:.3f} "
              f"avg_reward={avg_reward:+.3f}")
    print(f"checkpoint: {summary['checkpoint']}")
    return 0


def cmd_eval(args) -> int:
    from .agents import GreedyNetAgent, RandomAgent
    from .evaluation import play_match
    from .net import CheckpointError, load_checkpoint

    agents = []
    try:
        for i, spec in enumerate(args.checkpoints):
            if spec == "random":
                agent = RandomAgent()
                agent.name = f"random{i}"
                agents.append(agent)
            else:
                params, _, meta = load_checkpoint(spec, expect_layer_sizes=(240, 64, 64, 61))
                name = f"{meta.get('algorithm', 'net')}:{Path(spec).stem}"
                agents.append(GreedyNetAgent(params, name=name))
    except (CheckpointError, OSError) as exc:
        print(f"cannot load checkpoint: {exc}", file=sys.stderr)
        return 1
    if len(agents) < 2:
        print("need at least two seats (checkpoints and/or 'random')", file=sys.stderr)
        return 1
    try:
        report = play_match(agents, args.games, args.seed,
                            seat_rotation=not args.no_rotation)
    except Exception as exc:
        print(f"evaluation failed: {exc}", file=sys.stderr)
        return 2
    for line in report.summary_lines():
        print(line)
    if args.csv:
        import csv as _csv

        with open(args.csv, "w", newline="", encoding="utf-8") as f:
            writer = _csv.writer(f)
            writer.writerow(("agent", "games", "wins", "win_rate", "avg_reward"))
            for s in report.scores:
                writer.writerow((s.name, s.games, s.wins, repr(s.win_rate),
                                 repr(s.avg_reward)))
        print(f"report written to {args.csv}")
    return 0


def cmd_serve(args) -> int:
    from .server import (
        GameService,
        HttpStaticServer,
        Router,
        TimeoutWorker,
        UdpTransport,
        WsTransport,
    )

    static_dir = args.static_dir
    if static_dir is None:
        bundled = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        static_dir = str(bundled) if bundled.is_dir() else None

    service = GameService(seed=args.seed, turn_timeout=args.turn_timeout)
    router = Router()
    closers = []
    try:
        udp = UdpTransport(service, router, args.host, args.udp_port).start()
        closers.append(udp)
        ws = WsTransport(service, router, args.host, args.ws_port).start()
        closers.append(ws)
        print(f"udp on {args.host}:{udp.port}  ws on {args.host}:{ws.port}", flush=True)
        if static_dir:
            http_srv = HttpStaticServer(static_dir, args.host, args.http_port).start()
            closers.append(http_srv)
            print(f"browser client: http://{args.host}:{http_srv.port}/"
                  f"?ws=ws://{args.host}:{ws.port}", flush=True)
        if args.turn_timeout:
            closers.append(TimeoutWorker(service, router).start())
        while True:
            time.sleep(1)
    except KeyboardInterrupt:
        print("shutting down")
        return 0
    except OSError as exc:
        print(f"cannot bind: {exc}", file=sys.stderr)
        return 2
    finally:
        for c in closers:
            c.close()


def cmd_play(args) -> int:
    from .client import main_play

    host, _, port = args.address.partition(":")
    if not port.isdigit():
        print("address must be host:port", file=sys.stderr)
        return 1
    return main_play(host or "127.0.0.1", int(port), args.create, args.bots,
                     args.session, args.auto, args.seed)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING)
    args = build_parser().parse_args(argv)
    command = {
        "train": cmd_train,
        "eval": cmd_eval,
        "serve": cmd_serve,
        "play": cmd_play,
    }[args.command]
    return command(args)


if __name__ == "__main__":
    sys.exit(main())
