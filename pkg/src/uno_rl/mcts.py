"""Multi-player tree search with Q-value averaging and reward averaging.

The search is run from one player's decision point (the root player).
Statistics are kept only for root-player states, keyed by the canonical
240-bit view encoding, so transpositions share a single entry.  Other
players' turns are stepped through with their own policy and never
evaluated or backed up.  Each simulation expands at most one new state:
the descent stops as soon as it reaches a state without statistics, which
is initialized from the network's Q predictions over its legal actions.

Backups follow the running-mean recurrence

    Q_new(s, a) = (Q_old(s, a) * N(s, a) + q_back) / (N(s, a) + 1)

with q_back = discount * max_a' Q(s', a') for a non-terminal child and
q_back = +/-1 (the root player's terminal reward) when the simulated game
ends.  Terminal rewards r_k are also accumulated across the whole search
into r_m = sum(r_k) / num_simulations, the shaping reward.

Hidden information enters a simulation in one of two ways (``mode``):

* ``oracle``: clone the true table state, hidden hands included.
* ``determinized``: resample unseen cards behind the root view (public
  discard history pinned) once per simulation.
"""

from dataclasses import dataclass, field
from math import sqrt
from typing import Callable, Optional

import numpy as np

from . import game
from .encoding import encode_planes, state_key
from .net import MLPParams, forward

OpponentPolicy = Callable[[game.TableState, tuple, np.random.Generator], int]


def random_opponent(state: game.TableState, legal: tuple, rng: np.random.Generator) -> int:
    """Default in-simulation policy for the other seats: uniform random."""
    return legal[0] if len(legal) == 1 else legal[int(rng.integers(len(legal)))]


@dataclass
class MctsConfig:
    num_simulations: int = 50
    c_puct: float = 1.0
    discount: float = 0.99
    epsilon: float = 0.0          # root epsilon-greedy (trainer's schedule)
    mode: str = "oracle"          # "oracle" | "determinized"
    max_descent: int = 400        # safety cap on root-player states per simulation


@dataclass
class NodeStats:
    """Per-state search statistics for one root-player state."""

    q: dict          # action -> running-mean Q
    n_sa: dict       # action -> number of uses
    n_s: int         # number of visits (updates) of this state
    legal: tuple
    player: int      # seat the state belongs to; always the root player


@dataclass
class SearchResult:
    q_m_chosen: float
    r_m: float
    a_best: int
    root_q_table: dict


@dataclass
class SearchTrace:
    """Optional per-simulation record for debugging and the averaging tests."""

    sims: list = field(default_factory=list)


def uct(n_s: int, n_sa: int, c_puct: float) -> float:
    return c_puct * sqrt(n_s / (1 + n_sa))


def select_action(stats: dict, s: bytes, c_puct: float) -> int:
    """Highest Q + UCT over the legal set of a known state; ties break to
    the lowest action id (legal sets are stored sorted)."""
    node = stats.get(s)
    if node is None:
        raise KeyError(f"unknown state key {s!r}")
    best_a = None
    best_v = -float("inf")
    for a in node.legal:
        v = node.q[a] + uct(node.n_s, node.n_sa[a], c_puct)
        if v > best_v:
            best_v = v
            best_a = a
    return best_a


def backprop_update(stats: dict, s: bytes, a: int, q_back_value: float) -> None:
    """Running-mean update, then count increments."""
    node = stats[s]
    n = node.n_sa[a]
    node.q[a] = (node.q[a] * n + q_back_value) / (n + 1)
    node.n_sa[a] = n + 1
    node.n_s += 1


def q_back(child, discount: float) -> float:
    """Backup value for an edge: discount * max child Q for a live child
    (NodeStats), or the raw terminal reward (a number) when the game ended."""
    if isinstance(child, NodeStats):
        return discount * max(child.q[a] for a in child.legal)
    return float(child)


def step_through_opponents(
    sim_state: game.TableState,
    root_player: int,
    opponent_policy: OpponentPolicy,
    rng: np.random.Generator,
) -> tuple[Optional[game.TableState], Optional[game.TerminalResult]]:
    """Advance the game until the root player is to move or it ends.

    No statistics are recorded for the opponent states passed through.
    """
    while sim_state.current_player != root_player:
        legal = game.legal_actions_for(
            sim_state.hands[sim_state.current_player], sim_state.target
        )
        action = opponent_policy(sim_state, legal, rng)
        _, done, result = game.apply_action(sim_state, action)
        if done:
            return None, result
    return sim_state, None


def _predict_node(net_params: MLPParams, hand, target, player: int) -> NodeStats:
    legal = game.legal_actions_for(hand, target)
    encoded = encode_planes(hand, target).reshape(-1).astype(np.float64)
    q_all = forward(net_params, encoded)[0]
    return NodeStats(
        q={a: float(q_all[a]) for a in legal},
        n_sa={a: 0 for a in legal},
        n_s=0,
        legal=legal,
        player=player,
    )


def _epsilon_greedy_root(node: NodeStats, epsilon: float, rng: np.random.Generator) -> int:
    if epsilon > 0 and rng.random() < epsilon:
        return node.legal[int(rng.integers(len(node.legal)))]
    best_a = node.legal[0]
    best_v = node.q[best_a]
    for a in node.legal[1:]:
        if node.q[a] > best_v:
            best_v = node.q[a]
            best_a = a
    return best_a


def run_search(
    state: game.TableState,
    net_params: MLPParams,
    cfg: MctsConfig,
    rng: np.random.Generator,
    opponent_policy: OpponentPolicy = random_opponent,
    trace: Optional[SearchTrace] = None,
    stats: Optional[dict] = None,
) -> SearchResult:
    """Run ``cfg.num_simulations`` simulations from the current player's
    decision point and return the chosen action with its averaged value.

    ``stats`` lets a caller supply (and afterwards inspect) the statistics
    map; by default a fresh one is created and discarded per search.
    """
    root_player = state.current_player
    root_hand = state.hands[root_player]
    if not root_hand:
        raise ValueError("no legal actions at root: the game is already over")
    root_key = state_key(root_hand, state.target)
    if cfg.mode == "determinized":
        root_view = game.player_view(state, root_player)
        known_discards = list(state.discard_pile)
    elif cfg.mode != "oracle":
        raise ValueError(f"unknown simulation mode: {cfg.mode}")

    if stats is None:
        stats = {}
    reward_sum = 0.0

    for sim_index in range(cfg.num_simulations):
        if cfg.mode == "oracle":
            sim = game.clone(state)
        else:
            sim = game.sample_determinization(
                root_view,
                seed=int(rng.integers(1 << 62)),
                known_discards=known_discards,
            )
        rec = {"sim": sim_index, "path": [], "terminal": None, "expanded": None}

        path: list[tuple[bytes, int]] = []
        outcome: Optional[float] = None
        leaf_max_q = 0.0
        while True:
            key = state_key(sim.hands[root_player], sim.target)
            node = stats.get(key)
            if node is None:
                node = _predict_node(
                    net_params, sim.hands[root_player], sim.target, root_player
                )
                stats[key] = node
                leaf_max_q = max(node.q[a] for a in node.legal)
                rec["expanded"] = key.hex()
                break
            if len(path) >= cfg.max_descent:
                leaf_max_q = max(node.q[a] for a in node.legal)
                break
            a = select_action(stats, key, cfg.c_puct)
            path.append((key, a))
            _, done, result = game.apply_action(sim, a)
            if not done:
                _, result = step_through_opponents(sim, root_player, opponent_policy, rng)
            if result is not None:
                outcome = float(result.rewards[root_player])
                break

        if outcome is not None:
            reward_sum += outcome
            backup = outcome
            rec["terminal"] = outcome
        else:
            backup = cfg.discount * leaf_max_q
        for key, a in reversed(path):
            backprop_update(stats, key, a, backup)
            rec["path"].append({"state": key.hex(), "action": a, "q_back": backup})
            backup = q_back(stats[key], cfg.discount)
        if trace is not None:
            trace.sims.append(rec)

    root = stats[root_key]
    a_best = _epsilon_greedy_root(root, cfg.epsilon, rng)
    return SearchResult(
        q_m_chosen=root.q[a_best],
        r_m=reward_sum / cfg.num_simulations,
        a_best=a_best,
        root_q_table=dict(root.q),
    )


def dump_trace(trace: SearchTrace, path) -> None:
    """Plain-text search trace: one line per backup step plus terminals."""
    lines = []
    for rec in trace.sims:
        if rec["expanded"]:
            lines.append(f"sim {rec['sim']} expand {rec['expanded']}")
        for step in rec["path"]:
            lines.append(
                f"sim {rec['sim']} state {step['state']} action {step['action']} "
                f"q_back {step['q_back']:.12f}"
            )
        if rec["terminal"] is not None:
            lines.append(f"sim {rec['sim']} terminal {rec['terminal']:+.1f}")
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
