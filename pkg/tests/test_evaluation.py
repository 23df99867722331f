"""Evaluation harness tests: match bookkeeping, rotation, curve files."""

import pytest

from uno_rl.agents import GreedyNetAgent, RandomAgent
from uno_rl.evaluation import (
    PeriodicEvaluator,
    evaluate_vs_random,
    export_curves,
    parse_curves,
    play_match,
)
from uno_rl.net import init_params


class TestPlayMatch:
    def test_rates_sum_to_one_and_reward_identity(self):
        agents = [RandomAgent(), RandomAgent(), RandomAgent()]
        report = play_match(agents, num_games=300, seed=1)
        assert sum(s.wins for s in report.scores) == 300
        assert sum(s.win_rate for s in report.scores) == pytest.approx(1.0)
        for s in report.scores:
            assert s.avg_reward == 2 * s.win_rate - 1  # exact, both are ratios of ints

    def test_deterministic_per_seed(self):
        agents = [RandomAgent(), RandomAgent()]
        a = play_match(agents, num_games=50, seed=7)
        b = play_match(agents, num_games=50, seed=7)
        assert [s.wins for s in a.scores] == [s.wins for s in b.scores]

    def test_rotation_evens_identical_agents(self):
        params = init_params(1)
        agents = [GreedyNetAgent(params, "a"), GreedyNetAgent(params, "b")]
        report = play_match(agents, num_games=2000, seed=3, seat_rotation=True)
        rates = [s.win_rate for s in report.scores]
        assert abs(rates[0] - rates[1]) < 0.05

    def test_agent_count_validated(self):
        with pytest.raises(ValueError):
            play_match([RandomAgent()], num_games=1, seed=0)

    def test_rigged_agent_reported(self):
        class Cheater:
            name = "cheater"

            def act(self, view, rng):
                return (view.legal_actions[0] + 1) % 60  # usually illegal

        with pytest.raises(RuntimeError, match="illegal action"):
            play_match([Cheater(), RandomAgent()], num_games=20, seed=0)

    def test_untrained_net_near_random_in_3p(self):
        win_rate, avg_reward = evaluate_vs_random(
            GreedyNetAgent(init_params(2)), num_players=3, num_games=1000, seed=5
        )
        assert abs(win_rate - 1 / 3) < 0.05
        assert avg_reward == pytest.approx(2 * win_rate - 1)


class TestCurves:
    def test_round_trip(self, tmp_path):
        series = [(1000, 0.41, -0.18), (2000, 0.5, 0.0)]
        path = tmp_path / "curve.csv"
        export_curves(series, path)
        assert parse_curves(path) == series

    def test_empty_series_header_only(self, tmp_path):
        path = tmp_path / "curve.csv"
        export_curves([], path)
        assert path.read_text().strip() == "episode,win_rate,total_avg_reward"
        assert parse_curves(path) == []

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "curve.csv"
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(ValueError):
            parse_curves(path)


class TestPeriodicEvaluator:
    def test_cadence_and_monotone_episodes(self):
        ev = PeriodicEvaluator(num_players=2, every=2, eval_games=20, seed=0)
        agent = RandomAgent()
        for episode in range(1, 7):
            ev.maybe_eval(episode, agent)
        episodes = [row[0] for row in ev.series]
        assert episodes == [2, 4, 6]
        assert all(a < b for a, b in zip(episodes, episodes[1:]))

    def test_row_shape(self):
        ev = PeriodicEvaluator(num_players=2, every=1, eval_games=10, seed=1)
        row = ev.maybe_eval(1, RandomAgent())
        episode, win_rate, avg_reward = row
        assert episode == 1
        assert 0 <= win_rate <= 1
        assert avg_reward == pytest.approx(2 * win_rate - 1)
