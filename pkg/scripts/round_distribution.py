#!/usr/bin/env python3
"""Round-length distribution of random 3-player games.

Plays N seeded games with every seat uniform random and prints the
percentiles of the per-game round count (one round = one player action),
plus a coarse text histogram.  Reproduces the shape of the published
round-distribution figure.
"""

import argparse
import collections

from uno_rl.game import play_random_game


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--games", type=int, default=100_000)
    parser.add_argument("--players", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rounds = []
    wins = collections.Counter()
    for i in range(args.games):
        r, result = play_random_game(args.players, args.seed + i)
        rounds.append(r)
        wins[result.winner] += 1
    rounds.sort()

    def pct(p):
        return rounds[min(len(rounds) - 1, int(p / 100 * len(rounds)))]

    print(f"{args.games} games, {args.players} players")
    print(f"rounds: p10={pct(10)} p25={pct(25)} median={pct(50)} "
          f"p75={pct(75)} p90={pct(90)} max={rounds[-1]}")
    print("per-seat win rates:",
          {seat: round(w / args.games, 4) for seat, w in sorted(wins.items())})

    bucket = 20
    hist = collections.Counter(min(r // bucket * bucket, 300) for r in rounds)
    peak = max(hist.values())
    for lo in sorted(hist):
        bar = "#" * max(1, round(40 * hist[lo] / peak))
        label = f"{lo:>3}-{lo + bucket - 1}" if lo < 300 else "300+   "
        print(f"{label:>8} {bar} {hist[lo]}")


if __name__ == "__main__":
    main()
