"""Shared fixtures: hand-built table states for scripted scenarios."""

import collections

import numpy as np

from uno_rl.cards import Card, WILD, build_deck
from uno_rl.game import TableState


def make_state(hands, target, num_players=None, current=0, direction=1, seed=0):
    """Table state with the given hands and target; the remaining deck
    forms the draw pile so card conservation holds."""
    num_players = num_players or len(hands)
    used = collections.Counter(card for h in hands for card in h)
    used[Card(None, target.kind) if target.kind >= WILD else target] += 1
    pile = []
    for card in build_deck():
        if used[card] > 0:
            used[card] -= 1
        else:
            pile.append(card)
    return TableState(
        hands=[list(h) for h in hands],
        draw_pile=pile,
        discard_pile=[],
        target=target,
        current_player=current,
        direction=direction,
        num_players=num_players,
        rng=np.random.default_rng(seed),
    )
