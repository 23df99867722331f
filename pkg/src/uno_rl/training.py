"""Training drivers for the four algorithms.

One learner per environment, all opponents random.  An episode is
generated, its transitions stored, and one train step runs per stored
transition (gated on the buffer holding at least ``min_buffer`` items).
The target network re-syncs every ``target_sync_every`` train steps.
After every ``eval_every`` episodes the current greedy policy plays
``eval_games`` games against random opponents and the result is appended
to the evaluation curve.
"""

import csv
import logging
import time
from pathlib import Path

import numpy as np

from .agents import (
    EpsilonSchedule,
    GreedyNetAgent,
    ReplayBuffer,
    ReservoirBuffer,
    ddqn_mcts_train_step,
    ddqn_train_step,
    dmc_train_step,
    generate_episode_dmc,
    generate_episode_dqn,
    generate_episode_mcts,
    generate_episode_nfsp,
    nfsp_train_step,
)
from .config import TrainConfig
from .evaluation import PeriodicEvaluator, export_curves
from .mcts import MctsConfig
from .net import (
    AdamState,
    CheckpointError,
    init_params,
    load_checkpoint,
    save_checkpoint,
    sync_target,
)

logger = logging.getLogger(__name__)

LOSS_COLUMNS = {
    "ddqn_mcts": ("loss_ddqn", "loss_mcts"),
    "ddqn": ("loss",),
    "dmc": ("loss",),
    "nfsp": ("value_loss", "policy_loss"),
}


def train(cfg: TrainConfig, log_every: int = 50) -> dict:
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    from .config import write_manifest

    write_manifest(cfg, out_dir / "manifest.txt")

    master = np.random.default_rng(cfg.seed)
    episode_rng = np.random.default_rng(master.integers(1 << 62))
    buffer_seed = int(master.integers(1 << 62))
    net_seed = int(master.integers(1 << 62))

    estimator = init_params(net_seed)
    if cfg.resume:
        estimator, _, meta = load_checkpoint(cfg.resume, expect_layer_sizes=(240, 64, 64, 61))
        if meta.get("algorithm", cfg.algorithm) != cfg.algorithm:
            raise CheckpointError(
                f"checkpoint algorithm {meta.get('algorithm')!r} does not match "
                f"configured {cfg.algorithm!r}"
            )
    target = sync_target(estimator)
    opt = AdamState.for_params(estimator, lr=cfg.learning_rate)
    policy = init_params(net_seed + 1)  # NFSP average-policy network
    opt_policy = AdamState.for_params(policy, lr=cfg.learning_rate)

    buffer = ReplayBuffer(cfg.replay_capacity, seed=buffer_seed)
    msl = ReservoirBuffer(cfg.msl_capacity, seed=buffer_seed + 1)
    schedule = EpsilonSchedule(cfg.epsilon_start, cfg.epsilon_end, cfg.epsilon_decay_steps)
    decisions = [0]

    def epsilon_fn() -> float:
        eps = schedule.value(decisions[0])
        decisions[0] += 1
        return eps

    mcts_cfg = MctsConfig(
        num_simulations=cfg.num_simulations,
        c_puct=cfg.c_puct,
        discount=cfg.discount,
        mode=cfg.mcts_mode,
    )

    def eval_agent():
        if cfg.algorithm == "nfsp":
            return GreedyNetAgent(policy, name="nfsp")
        return GreedyNetAgent(estimator, name=cfg.algorithm)

    evaluator = PeriodicEvaluator(
        cfg.num_players,
        every=cfg.eval_every,
        eval_games=cfg.eval_games,
        seed=int(master.integers(1 << 62)),
    )

    loss_names = LOSS_COLUMNS[cfg.algorithm]
    train_log_path = out_dir / "train_log.csv"
    log_file = open(train_log_path, "w", newline="", encoding="utf-8")
    log_writer = csv.writer(log_file)
    log_writer.writerow(
        ("episode", "env_steps", "train_steps") + loss_names + ("epsilon", "wall_clock_s")
    )

    train_steps = 0
    wins = 0
    t0 = time.time()

    def maybe_sync():
        if train_steps % cfg.target_sync_every == 0:
            target.weights = [w.copy() for w in estimator.weights]
            target.biases = [b.copy() for b in estimator.biases]

    def save(tag: str) -> Path:
        path = out_dir / f"checkpoint_{tag}.bin"
        meta = {
            "algorithm": cfg.algorithm,
            "episode": episode,
            "seed": cfg.seed,
            "network": "estimator",
        }
        save_checkpoint(estimator, opt, meta, path)
        if cfg.algorithm == "nfsp":
            meta = {**meta, "network": "policy"}
            save_checkpoint(policy, opt_policy, meta, out_dir / f"policy_{tag}.bin")
        return path

    try:
        for episode in range(1, cfg.episodes + 1):
            losses: list[tuple] = []
            seed = int(episode_rng.integers(1 << 62))

            if cfg.algorithm == "ddqn_mcts":
                transitions, result = generate_episode_mcts(
                    cfg.num_players, seed, estimator, mcts_cfg, episode_rng, epsilon_fn
                )
                for t in transitions:
                    buffer.add(t)
                new = len(transitions)
            elif cfg.algorithm == "ddqn":
                transitions, result = generate_episode_dqn(
                    cfg.num_players, seed, estimator, episode_rng, epsilon_fn
                )
                for t in transitions:
                    buffer.add(t)
                new = len(transitions)
            elif cfg.algorithm == "dmc":
                triples, result = generate_episode_dmc(
                    cfg.num_players, seed, estimator, episode_rng, epsilon_fn, cfg.discount
                )
                for t in triples:
                    buffer.add(t)
                new = len(triples)
            else:  # nfsp
                transitions, br_pairs, result = generate_episode_nfsp(
                    cfg.num_players, seed, estimator, policy, episode_rng,
                    epsilon_fn, cfg.eta,
                )
                for t in transitions:
                    buffer.add(t)
                for pair in br_pairs:
                    msl.add(pair)
                new = len(transitions)

            wins += int(result.rewards[0] == 1)

            ready = len(buffer) >= max(cfg.batch_size, cfg.min_buffer)
            if cfg.algorithm == "nfsp":
                ready = ready and len(msl) >= cfg.batch_size
            if ready:
                for _ in range(max(1, new // cfg.train_every)):
                    if cfg.algorithm == "ddqn_mcts":
                        losses.append(
                            ddqn_mcts_train_step(
                                buffer, estimator, target, opt,
                                cfg.discount, cfg.batch_size,
                            )
                        )
                    elif cfg.algorithm == "ddqn":
                        losses.append(
                            (ddqn_train_step(
                                buffer, estimator, target, opt,
                                cfg.discount, cfg.batch_size,
                            ),)
                        )
                    elif cfg.algorithm == "dmc":
                        losses.append(
                            (dmc_train_step(
                                buffer.sample(min(cfg.batch_size, len(buffer))),
                                estimator, opt, episode_rng, cfg.batch_size,
                            ),)
                        )
                    else:
                        losses.append(
                            nfsp_train_step(
                                buffer, msl, estimator, target, policy,
                                opt, opt_policy, cfg.discount, cfg.batch_size,
                            )
                        )
                    train_steps += 1
                    maybe_sync()

            mean_losses = (
                tuple(float(np.mean([l[i] for l in losses])) for i in range(len(loss_names)))
                if losses else tuple("" for _ in loss_names)
            )
            log_writer.writerow(
                (episode, decisions[0], train_steps)
                + mean_losses
                + (f"{schedule.value(decisions[0]):.4f}", f"{time.time() - t0:.2f}")
            )

            row = evaluator.maybe_eval(episode, eval_agent())
            if row is not None:
                export_curves(evaluator.series, out_dir / "eval_curve.csv")
                logger.info(
                    "episode %d: eval win_rate=%.3f avg_reward=%+.3f",
                    episode, row[1], row[2],
                )
                if log_every:
                    print(
                        f"[{cfg.algorithm}] episode {episode}: "
                        f"win_rate={row[1]:.3f} avg_reward={row[2]:+.3f}",
                        flush=True,
                    )
            if cfg.checkpoint_every and episode % cfg.checkpoint_every == 0:
                save(f"ep{episode}")
                save("latest")
    finally:
        log_file.close()

    episode = cfg.episodes
    final_checkpoint = save("latest")
    export_curves(evaluator.series, out_dir / "eval_curve.csv")
    return {
        "algorithm": cfg.algorithm,
        "episodes": cfg.episodes,
        "env_steps": decisions[0],
        "train_steps": train_steps,
        "train_win_rate": wins / cfg.episodes,
        "eval_series": list(evaluator.series),
        "checkpoint": str(final_checkpoint),
        "out_dir": str(out_dir),
        "wall_clock_s": time.time() - t0,
    }
