#!/usr/bin/env python3
"""Train all four algorithms under one budget and print the eval curves.

Runs ddqn_mcts, ddqn, dmc, and nfsp sequentially in the same environment
with shared hyperparameters, then tabulates the periodic-evaluation win
rates side by side (the experiment behind the training-graph comparison).
"""

import argparse
from pathlib import Path

from uno_rl.config import TrainConfig
from uno_rl.training import train


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--players", type=int, default=2)
    parser.add_argument("--episodes", type=int, default=3000)
    parser.add_argument("--eval-every", type=int, default=250)
    parser.add_argument("--eval-games", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--out", default="runs/compare")
    parser.add_argument("--algorithms", nargs="+",
                        default=["ddqn_mcts", "ddqn", "dmc", "nfsp"])
    args = parser.parse_args()

    curves = {}
    for algorithm in args.algorithms:
        cfg = TrainConfig(
            algorithm=algorithm,
            num_players=args.players,
            episodes=args.episodes,
            eval_every=args.eval_every,
            eval_games=args.eval_games,
            seed=args.seed,
            out_dir=str(Path(args.out) / algorithm),
        )
        print(f"=== training {algorithm} ===")
        summary = train(cfg)
        curves[algorithm] = summary["eval_series"]

    episodes = sorted({ep for series in curves.values() for ep, _, _ in series})
    header = "episode " + " ".join(f"{a:>10}" for a in curves)
    print("\nwin rate vs random opponents")
    print(header)
    for ep in episodes:
        cells = []
        for series in curves.values():
            match = [w for e, w, _ in series if e == ep]
            cells.append(f"{match[0]:>10.3f}" if match else " " * 10)
        print(f"{ep:>7} " + " ".join(cells))


if __name__ == "__main__":
    main()
