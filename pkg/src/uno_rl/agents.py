"""Learning agents and their plumbing: replay/reservoir buffers, epsilon
schedules, episode generation, and the per-algorithm training steps.

Training environments follow the evaluation protocol of the experiments:
one learner in the game, every other seat acting uniformly at random.
Environment rewards are +1/-1 at the end and 0 otherwise; the search-based
agent additionally receives the shaping term r_m from its own search, so a
stored transition carries r_t = r + r_m.
"""

import dataclasses
from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import game
from .encoding import encode_state
from .mcts import MctsConfig, run_search
from .net import (
    AdamState,
    Gradients,
    MLPParams,
    forward,
    grad_mse,
    grad_nll,
    optimizer_step,
    softmax_policy,
)


@dataclass
class Transition:
    s: np.ndarray
    a: int
    s_next: np.ndarray
    legal_next: tuple
    r_t: float  # environment reward plus r_m for the search-based agent
    done: bool
    q_m: Optional[float] = None  # averaged search value; None for non-MCTS agents


class ReplayBuffer:
    """FIFO ring buffer with uniform sampling."""

    def __init__(self, capacity: int, seed: int = 0):
        self._buf: deque = deque(maxlen=capacity)
        self._rng = np.random.default_rng(seed)
        self.capacity = capacity

    def add(self, item) -> None:
        self._buf.append(item)

    def sample(self, n: int) -> list:
        if n > len(self._buf):
            raise ValueError(f"asked for {n} samples, buffer holds {len(self._buf)}")
        idx = self._rng.choice(len(self._buf), size=n, replace=False)
        return [self._buf[i] for i in idx]

    def __len__(self) -> int:
        return len(self._buf)

    def __iter__(self):
        return iter(self._buf)


class ReservoirBuffer:
    """Fixed-capacity uniform reservoir over everything ever added."""

    def __init__(self, capacity: int, seed: int = 0):
        self._buf: list = []
        self._rng = np.random.default_rng(seed)
        self.capacity = capacity
        self.items_seen = 0

    def add(self, item) -> None:
        self.items_seen += 1
        if len(self._buf) < self.capacity:
            self._buf.append(item)
        else:
            j = int(self._rng.integers(self.items_seen))
            if j < self.capacity:
                self._buf[j] = item

    def sample(self, n: int) -> list:
        if n > len(self._buf):
            raise ValueError(f"asked for {n} samples, reservoir holds {len(self._buf)}")
        idx = self._rng.choice(len(self._buf), size=n, replace=False)
        return [self._buf[i] for i in idx]

    def __len__(self) -> int:
        return len(self._buf)

    def __contains__(self, item) -> bool:
        return item in self._buf


@dataclass
class EpsilonSchedule:
    """Linear decay from start to end over decay_steps, then constant."""

    start: float = 1.0
    end: float = 0.05
    decay_steps: int = 20_000

    def value(self, step: int) -> float:
        if self.decay_steps <= 0 or step >= self.decay_steps:
            return self.end
        return self.start + (self.end - self.start) * (step / self.decay_steps)


def epsilon_greedy(
    q: np.ndarray, legal: tuple, eps: float, rng: np.random.Generator
) -> int:
    """Uniform over legal with probability eps, else the legal argmax
    (ties break to the lowest id)."""
    if not legal:
        raise ValueError("empty legal action set")
    if eps > 0 and rng.random() < eps:
        return legal[0] if len(legal) == 1 else legal[int(rng.integers(len(legal)))]
    ordered = sorted(legal)
    best_a = ordered[0]
    best_v = q[best_a]
    for a in ordered[1:]:
        if q[a] > best_v:
            best_v = q[a]
            best_a = a
    return int(best_a)


def random_act(legal: tuple, rng: np.random.Generator) -> int:
    if not legal:
        raise ValueError("empty legal action set")
    return legal[0] if len(legal) == 1 else legal[int(rng.integers(len(legal)))]


class RandomAgent:
    """Uniform random over legal actions."""

    name = "random"

    def act(self, view: game.PlayerView, rng: np.random.Generator) -> int:
        return random_act(view.legal_actions, rng)


class GreedyNetAgent:
    """Masked argmax over a network's 61 outputs (evaluation-time policy)."""

    def __init__(self, params: MLPParams, name: str = "net"):
        self.params = params
        self.name = name

    def act(self, view: game.PlayerView, rng: np.random.Generator) -> int:
        q = forward(self.params, encode_state(view))[0]
        return epsilon_greedy(q, view.legal_actions, 0.0, rng)


def _opponents_move(
    state: game.TableState, agent_seat: int, rng: np.random.Generator
) -> Optional[game.TerminalResult]:
    """Random play for every seat until the learner is to move or the game
    ends."""
    while state.current_player != agent_seat:
        legal = game.legal_actions_for(state.hands[state.current_player], state.target)
        _, done, result = game.apply_action(state, random_act(legal, rng))
        if done:
            return result
    return None


def run_episode(num_players, seed, decide, rng, agent_seat=0):
    """Play one full game, the learner deciding via ``decide(state, view)``.

    Returns (steps, result) where each step is
    (enc, action, extras, reward, enc_next, legal_next, done) and reward is
    the learner's environment reward observed before its next decision.
    """
    state = game.init_game(num_players, seed)
    result = _opponents_move(state, agent_seat, rng)
    steps = []
    view = None if result else game.player_view(state, agent_seat)
    enc = None if result else encode_state(view)
    while result is None:
        action, extras = decide(state, view)
        _, done, res = game.apply_action(state, action)
        if not done:
            res = _opponents_move(state, agent_seat, rng)
        next_view = game.player_view(state, agent_seat)
        next_enc = encode_state(next_view)
        reward = 0.0 if res is None else float(res.rewards[agent_seat])
        legal_next = next_view.legal_actions if res is None else ()
        steps.append((enc, action, extras, reward, next_enc, legal_next, res is not None))
        view, enc, result = next_view, next_enc, res
    return steps, result


def generate_episode_mcts(
    num_players: int,
    seed: int,
    estimator: MLPParams,
    mcts_cfg: MctsConfig,
    rng: np.random.Generator,
    epsilon_fn=None,
    agent_seat: int = 0,
) -> tuple[list[Transition], game.TerminalResult]:
    """One search-guided episode: every learner decision runs a full search
    and the stored reward is r_t = r + r_m."""

    def decide(state, view):
        cfg = mcts_cfg
        if epsilon_fn is not None:
            cfg = dataclasses.replace(mcts_cfg, epsilon=epsilon_fn())
        result = run_search(state, estimator, cfg, rng)
        return result.a_best, {"q_m": result.q_m_chosen, "r_m": result.r_m}

    steps, result = run_episode(num_players, seed, decide, rng, agent_seat)
    transitions = [
        Transition(
            s=enc,
            a=action,
            s_next=next_enc,
            legal_next=legal_next,
            r_t=reward + extras["r_m"],
            done=done,
            q_m=extras["q_m"],
        )
        for enc, action, extras, reward, next_enc, legal_next, done in steps
    ]
    return transitions, result


def generate_episode_dqn(
    num_players: int,
    seed: int,
    estimator: MLPParams,
    rng: np.random.Generator,
    epsilon_fn,
    agent_seat: int = 0,
) -> tuple[list[Transition], game.TerminalResult]:
    """Plain epsilon-greedy episode; transitions carry the raw reward."""

    def decide(state, view):
        q = forward(estimator, encode_state(view))[0]
        return epsilon_greedy(q, view.legal_actions, epsilon_fn(), rng), {}

    steps, result = run_episode(num_players, seed, decide, rng, agent_seat)
    transitions = [
        Transition(s=enc, a=action, s_next=next_enc, legal_next=legal_next,
                   r_t=reward, done=done)
        for enc, action, _, reward, next_enc, legal_next, done in steps
    ]
    return transitions, result


def double_q_targets(
    estimator: MLPParams,
    target: MLPParams,
    batch: list,
    discount: float,
) -> np.ndarray:
    """Double-Q targets: the estimator picks the best legal next action,
    the target network evaluates it; terminal transitions keep just r_t."""
    s_next = np.stack([t.s_next for t in batch])
    est_next = forward(estimator, s_next)
    tgt_next = forward(target, s_next)
    out = np.empty(len(batch))
    for i, t in enumerate(batch):
        if t.done:
            out[i] = t.r_t
        else:
            legal = list(t.legal_next)
            a_star = legal[int(np.argmax(est_next[i][legal]))]
            out[i] = t.r_t + discount * tgt_next[i][a_star]
    return out


def _add_grads(a: Gradients, b: Gradients) -> Gradients:
    return Gradients(
        [x + y for x, y in zip(a.weights, b.weights)],
        [x + y for x, y in zip(a.biases, b.biases)],
    )


def ddqn_train_step(
    buffer: ReplayBuffer,
    estimator: MLPParams,
    target: MLPParams,
    opt: AdamState,
    discount: float = 0.99,
    batch_size: int = 32,
) -> float:
    """One double-Q regression step on a uniform batch.  Returns the loss."""
    batch = buffer.sample(batch_size)
    y = double_q_targets(estimator, target, batch, discount)
    s = np.stack([t.s for t in batch])
    a = [t.a for t in batch]
    loss, grads = grad_mse(estimator, s, a, y)
    optimizer_step(estimator, opt, grads)
    return loss


def ddqn_mcts_train_step(
    buffer: ReplayBuffer,
    estimator: MLPParams,
    target: MLPParams,
    opt: AdamState,
    discount: float = 0.99,
    batch_size: int = 32,
) -> tuple[float, float]:
    """Composite step: the double-Q loss on shaped rewards plus the
    regression of Q(s, a) toward the search value Q_m(s, a).  One optimizer
    update on the summed gradients.  Returns (ddqn_loss, mcts_loss)."""
    batch = buffer.sample(batch_size)
    y = double_q_targets(estimator, target, batch, discount)
    s = np.stack([t.s for t in batch])
    a = [t.a for t in batch]
    q_m = [t.q_m for t in batch]
    if any(v is None for v in q_m):
        raise ValueError("batch contains transitions without search values")
    loss_ddqn, grads_ddqn = grad_mse(estimator, s, a, y)
    loss_mcts, grads_mcts = grad_mse(estimator, s, a, q_m)
    optimizer_step(estimator, opt, _add_grads(grads_ddqn, grads_mcts))
    return loss_ddqn, loss_mcts


def dmc_returns(rewards: list, discount: float) -> list:
    """Discounted returns by backward recursion, zero after the terminal."""
    g = 0.0
    out = [0.0] * len(rewards)
    for i in range(len(rewards) - 1, -1, -1):
        g = rewards[i] + discount * g
        out[i] = g
    return out


def generate_episode_dmc(
    num_players: int,
    seed: int,
    net: MLPParams,
    rng: np.random.Generator,
    epsilon_fn,
    discount: float,
    agent_seat: int = 0,
):
    """Full-episode rollout returning (s, a, G) triples for regression."""
    steps, result = generate_episode_dqn(
        num_players, seed, net, rng, epsilon_fn, agent_seat
    )
    rewards = [t.r_t for t in steps]
    returns = dmc_returns(rewards, discount)
    return [(t.s, t.a, g) for t, g in zip(steps, returns)], result


def dmc_train_step(
    triples: list,
    net: MLPParams,
    opt: AdamState,
    rng: np.random.Generator,
    batch_size: int = 32,
) -> float:
    """Regress Q(s_t, a_t) toward the sampled episode returns."""
    if not triples:
        raise ValueError("no training triples")
    if len(triples) > batch_size:
        idx = rng.choice(len(triples), size=batch_size, replace=False)
        triples = [triples[i] for i in idx]
    s = np.stack([t[0] for t in triples])
    a = [t[1] for t in triples]
    g = [t[2] for t in triples]
    loss, grads = grad_mse(net, s, a, g)
    optimizer_step(net, opt, grads)
    return loss


def nfsp_act(
    enc: np.ndarray,
    legal: tuple,
    value_params: MLPParams,
    policy_params: MLPParams,
    eta: float,
    eps: float,
    rng: np.random.Generator,
) -> tuple[int, bool]:
    """Anticipatory mixing: best response (epsilon-greedy on the value net)
    with probability eta, else a sample from the average policy."""
    if not legal:
        raise ValueError("empty legal action set")
    if rng.random() < eta:
        q = forward(value_params, enc)[0]
        return epsilon_greedy(q, legal, eps, rng), True
    probs = softmax_policy(policy_params, enc, legal)
    return int(legal[int(rng.choice(len(legal), p=probs))]), False


def generate_episode_nfsp(
    num_players: int,
    seed: int,
    value_params: MLPParams,
    policy_params: MLPParams,
    rng: np.random.Generator,
    epsilon_fn,
    eta: float,
    agent_seat: int = 0,
):
    """Returns (transitions for MRL, best-response (s, a) pairs for MSL)."""

    def decide(state, view):
        enc = encode_state(view)
        action, used_br = nfsp_act(
            enc, view.legal_actions, value_params, policy_params, eta,
            epsilon_fn(), rng,
        )
        return action, {"br": used_br}

    steps, result = run_episode(num_players, seed, decide, rng, agent_seat)
    transitions = []
    br_pairs = []
    for enc, action, extras, reward, next_enc, legal_next, done in steps:
        transitions.append(
            Transition(s=enc, a=action, s_next=next_enc, legal_next=legal_next,
                       r_t=reward, done=done)
        )
        if extras["br"]:
            br_pairs.append((enc, action))
    return transitions, br_pairs, result


def nfsp_train_step(
    mrl: ReplayBuffer,
    msl: ReservoirBuffer,
    value_estimator: MLPParams,
    value_target: MLPParams,
    policy: MLPParams,
    opt_value: AdamState,
    opt_policy: AdamState,
    discount: float = 0.99,
    batch_size: int = 32,
) -> tuple[float, float]:
    """Value net trained exactly like plain DDQN on MRL; policy net by
    negative log-likelihood on MSL."""
    value_loss = ddqn_train_step(
        mrl, value_estimator, value_target, opt_value, discount, batch_size
    )
    pairs = msl.sample(batch_size)
    s = np.stack([p[0] for p in pairs])
    a = [p[1] for p in pairs]
    policy_loss, grads = grad_nll(policy, s, a)
    optimizer_step(policy, opt_policy, grads)
    return value_loss, policy_loss
