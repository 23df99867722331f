"""Config parsing and short end-to-end training runs for all algorithms."""

import pytest

from uno_rl.config import (
    ConfigError,
    TrainConfig,
    dump_config,
    load_config,
    parse_config_text,
)
from uno_rl.evaluation import parse_curves
from uno_rl.net import load_checkpoint
from uno_rl.training import train


class TestConfig:
    def test_paper_defaults(self):
        cfg = TrainConfig()
        assert cfg.learning_rate == 5e-5
        assert cfg.batch_size == 32
        assert cfg.discount == 0.99
        assert cfg.num_simulations == 50

    def test_round_trip(self):
        cfg = TrainConfig(algorithm="dmc", num_players=4, seed=9, learning_rate=1e-3)
        again = parse_config_text(dump_config(cfg))
        assert again == cfg

    def test_unknown_key_named(self):
        with pytest.raises(ConfigError, match="flux_capacitor"):
            parse_config_text("flux_capacitor = 1.21")

    def test_bad_value_named(self):
        with pytest.raises(ConfigError, match="batch_size"):
            parse_config_text("batch_size = many")

    def test_bad_algorithm(self):
        with pytest.raises(ConfigError, match="algorithm"):
            parse_config_text("algorithm = sarsa")

    def test_bad_player_count(self):
        with pytest.raises(ConfigError, match="num_players"):
            parse_config_text("num_players = 1")

    def test_missing_file_names_path(self, tmp_path):
        missing = tmp_path / "nope.cfg"
        with pytest.raises(ConfigError, match="nope.cfg"):
            load_config(missing)

    def test_comments_and_blanks(self):
        cfg = parse_config_text("# a comment\n\nseed = 5  # trailing\n")
        assert cfg.seed == 5


def _tiny_cfg(tmp_path, algorithm, **overrides):
    base = dict(
        algorithm=algorithm,
        num_players=2,
        seed=11,
        episodes=6,
        num_simulations=4,
        batch_size=8,
        min_buffer=8,
        epsilon_decay_steps=50,
        eval_every=3,
        eval_games=6,
        checkpoint_every=6,
        target_sync_every=10,
        out_dir=str(tmp_path / algorithm),
    )
    base.update(overrides)
    return TrainConfig(**base)


class TestTrainingRuns:
    @pytest.mark.parametrize("algorithm", ["ddqn_mcts", "ddqn", "dmc", "nfsp"])
    def test_all_algorithms_produce_artifacts(self, tmp_path, algorithm):
        cfg = _tiny_cfg(tmp_path, algorithm)
        summary = train(cfg, log_every=0)
        out = tmp_path / algorithm
        assert (out / "manifest.txt").exists()
        assert (out / "train_log.csv").exists()
        assert (out / "eval_curve.csv").exists()
        episodes = [row[0] for row in parse_curves(out / "eval_curve.csv")]
        assert episodes == [3, 6]
        params, opt, meta = load_checkpoint(summary["checkpoint"])
        assert meta["algorithm"] == algorithm
        assert params.layer_sizes == (240, 64, 64, 61)
        assert summary["env_steps"] > 0

    def test_manifest_reproduces_config(self, tmp_path):
        cfg = _tiny_cfg(tmp_path, "ddqn")
        train(cfg, log_every=0)
        again = load_config(tmp_path / "ddqn" / "manifest.txt")
        assert again == cfg

    def test_bit_reproducible(self, tmp_path):
        logs = []
        for run in ("a", "b"):
            cfg = _tiny_cfg(tmp_path / run, "ddqn_mcts")
            summary = train(cfg, log_every=0)
            out = tmp_path / run / "ddqn_mcts"
            logs.append(
                (
                    (out / "eval_curve.csv").read_bytes(),
                    open(summary["checkpoint"], "rb").read(),
                )
            )
        assert logs[0][0] == logs[1][0]
        assert logs[0][1] == logs[1][1]

    def test_resume_algorithm_mismatch_rejected(self, tmp_path):
        cfg = _tiny_cfg(tmp_path, "ddqn")
        summary = train(cfg, log_every=0)
        bad = _tiny_cfg(tmp_path, "dmc", resume=summary["checkpoint"],
                        out_dir=str(tmp_path / "resumed"))
        with pytest.raises(Exception, match="algorithm"):
            train(bad, log_every=0)

    def test_resume_continues(self, tmp_path):
        cfg = _tiny_cfg(tmp_path, "ddqn")
        summary = train(cfg, log_every=0)
        cfg2 = _tiny_cfg(
            tmp_path, "ddqn", resume=summary["checkpoint"],
            out_dir=str(tmp_path / "resumed"), episodes=2,
        )
        summary2 = train(cfg2, log_every=0)
        assert summary2["episodes"] == 2
