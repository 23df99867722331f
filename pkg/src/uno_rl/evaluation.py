"""Tournament and checkpoint-evaluation harness.

Evaluation is always greedy: agents pick the masked argmax of their
network (search stays off so every algorithm is compared on the same
footing).  Win rate and total average reward are reported per agent; with
+1/-1 rewards the two are tied by avg_reward = 2 * win_rate - 1.  A 95%
binomial interval accompanies each win rate.
"""

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import game


@dataclass
class AgentScore:
    name: str
    games: int
    wins: int

    @property
    def win_rate(self) -> float:
        return self.wins / self.games

    @property
    def avg_reward(self) -> float:
        # one +1 per win, -1 otherwise, summed then divided by games;
        # computed as 2*win_rate - 1 so the identity holds bit-exactly
        return 2 * self.win_rate - 1

    @property
    def ci95(self) -> float:
        p = self.win_rate
        return 1.96 * math.sqrt(p * (1 - p) / self.games)


@dataclass
class EvalReport:
    scores: list  # [AgentScore], one per agent in input order
    seed: int
    num_games: int
    seat_rotation: bool
    config: dict = field(default_factory=dict)

    def summary_lines(self) -> list:
        lines = []
        for s in self.scores:
            lines.append(
                f"{s.name}: games={s.games} wins={s.wins} "
                f"win_rate={s.win_rate:.4f} (+/-{s.ci95:.4f}) "
                f"avg_reward={s.avg_reward:+.4f}"
            )
        return lines


def play_match(
    agents: Sequence,
    num_games: int,
    seed: int,
    seat_rotation: bool = True,
    max_rounds: int = 100_000,
) -> EvalReport:
    """Play seeded games between the agents; seats rotate cyclically per
    game when enabled, cancelling first-player advantage."""
    k = len(agents)
    if not 2 <= k <= 10:
        raise ValueError(f"need 2..10 agents, got {k}")
    master = np.random.default_rng(seed)
    game_seeds = master.integers(0, 1 << 62, size=num_games)
    act_rng = np.random.default_rng(master.integers(1 << 62))
    wins = [0] * k
    for g in range(num_games):
        # seat s is played by agents[(s + g) % k] under rotation
        shift = g % k if seat_rotation else 0
        state = game.init_game(k, int(game_seeds[g]))
        rounds = 0
        while True:
            seat = state.current_player
            agent = agents[(seat + shift) % k]
            view = game.player_view(state, seat)
            action = agent.act(view, act_rng)
            try:
                _, done, result = game.apply_action(state, action)
            except game.IllegalAction as exc:
                raise RuntimeError(
                    f"agent {agent.name!r} played an illegal action in game {g}"
                ) from exc
            if done:
                wins[(result.winner + shift) % k] += 1
                break
            rounds += 1
            if rounds > max_rounds:
                raise RuntimeError(f"game {g} exceeded {max_rounds} rounds")
    scores = [
        AgentScore(name=getattr(a, "name", f"agent{i}"), games=num_games, wins=w)
        for i, (a, w) in enumerate(zip(agents, wins))
    ]
    return EvalReport(
        scores=scores, seed=seed, num_games=num_games, seat_rotation=seat_rotation
    )


def evaluate_vs_random(
    agent,
    num_players: int,
    num_games: int,
    seed: int,
) -> tuple[float, float]:
    """(win_rate, avg_reward) of one agent against random opponents."""
    from .agents import RandomAgent

    agents = [agent] + [RandomAgent() for _ in range(num_players - 1)]
    report = play_match(agents, num_games, seed, seat_rotation=True)
    return report.scores[0].win_rate, report.scores[0].avg_reward


CURVE_COLUMNS = ("episode", "win_rate", "total_avg_reward")


def export_curves(series: Sequence[tuple], path) -> None:
    """Write (episode, win_rate, total_avg_reward) rows for plotting."""
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(CURVE_COLUMNS)
        for episode, win_rate, avg_reward in series:
            writer.writerow([episode, repr(win_rate), repr(avg_reward)])


def parse_curves(path) -> list:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.reader(f)
        header = next(reader)
        if tuple(header) != CURVE_COLUMNS:
            raise ValueError(f"unexpected curve columns: {header}")
        return [(int(r[0]), float(r[1]), float(r[2])) for r in reader]


class PeriodicEvaluator:
    """Evaluates checkpoints on a fixed cadence during training and keeps
    the curve series for export."""

    def __init__(
        self,
        num_players: int,
        every: int = 1000,
        eval_games: int = 1000,
        seed: int = 0,
    ):
        self.num_players = num_players
        self.every = every
        self.eval_games = eval_games
        self.seed = seed
        self.series: list = []

    def maybe_eval(self, episode: int, agent) -> Optional[tuple]:
        if self.every <= 0 or episode % self.every != 0:
            return None
        win_rate, avg_reward = evaluate_vs_random(
            agent, self.num_players, self.eval_games, self.seed + episode
        )
        row = (episode, win_rate, avg_reward)
        self.series.append(row)
        return row
