"""Flat key-value experiment configuration.

Files hold one ``key = value`` pair per line; ``#`` starts a comment.
Every field of :class:`TrainConfig` is a key; unknown keys and bad values
are rejected by name.  Defaults follow the reported experiment setup:
learning rate 5e-5, batch size 32, discount 0.99, 50 simulations per
search decision.
"""

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

ALGORITHMS = ("ddqn_mcts", "ddqn", "dmc", "nfsp")


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


@dataclass
class TrainConfig:
    algorithm: str = "ddqn_mcts"
    num_players: int = 2
    seed: int = 0
    episodes: int = 3000
    learning_rate: float = 5e-5
    batch_size: int = 32
    discount: float = 0.99
    num_simulations: int = 50
    c_puct: float = 1.0
    mcts_mode: str = "oracle"
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_decay_steps: int = 20_000
    replay_capacity: int = 20_000
    msl_capacity: int = 100_000
    eta: float = 0.1
    target_sync_every: int = 1000
    min_buffer: int = 100
    train_every: int = 1
    eval_every: int = 1000
    eval_games: int = 1000
    checkpoint_every: int = 1000
    out_dir: str = "runs/default"
    resume: str = ""

    def validate(self) -> "TrainConfig":
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(
                f"algorithm must be one of {', '.join(ALGORITHMS)}: got {self.algorithm!r}"
            )
        if not 2 <= self.num_players <= 10:
            raise ConfigError(f"num_players must be in 2..10: got {self.num_players}")
        if self.mcts_mode not in ("oracle", "determinized"):
            raise ConfigError(f"mcts_mode must be oracle or determinized: got {self.mcts_mode!r}")
        for name in ("episodes", "batch_size", "num_simulations", "replay_capacity",
                     "msl_capacity", "train_every"):
            if getattr(self, name) <= 0:
                raise ConfigError(f"{name} must be positive: got {getattr(self, name)}")
        for name in ("learning_rate", "discount", "c_puct", "epsilon_start",
                     "epsilon_end", "eta"):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative: got {getattr(self, name)}")
        if not 0 <= self.discount <= 1:
            raise ConfigError(f"discount must be in [0, 1]: got {self.discount}")
        return self


def _parse_value(field_obj, raw: str, key: str):
    try:
        if field_obj.type in (int, "int"):
            return int(raw)
        if field_obj.type in (float, "float"):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {field_obj.type}") from exc


def parse_config_text(text: str, base: TrainConfig = None) -> TrainConfig:
    cfg = dataclasses.replace(base) if base else TrainConfig()
    by_name = {f.name: f for f in fields(TrainConfig)}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = line.partition("=")
        key, raw = key.strip(), raw.strip()
        if key not in by_name:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        setattr(cfg, key, _parse_value(by_name[key], raw, key))
    return cfg.validate()


def load_config(path) -> TrainConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"))


def dump_config(cfg: TrainConfig) -> str:
    """Effective configuration in the same flat format (manifest form);
    parse_config_text round-trips it."""
    lines = []
    for f in fields(TrainConfig):
        value = getattr(cfg, f.name)
        if isinstance(value, float):
            value = repr(value)
        lines.append(f"{f.name} = {value}")
    return "\n".join(lines) + "\n"


def write_manifest(cfg: TrainConfig, path) -> None:
    Path(path).write_text(dump_config(cfg), encoding="utf-8")
