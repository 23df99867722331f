"""Deterministic, seedable Uno rules engine for 2-10 players.

The engine is a plain mutable value: :func:`apply_action` advances the
state in place and returns it.  Search code takes explicit snapshots via
:func:`clone`.  All randomness (shuffles, wild reinsertion, reshuffles)
flows through the state's own PCG64 generator, so a (seed, action
sequence) pair replays to a byte-identical trajectory on any platform.

Rule choices that the public rules leave open:

* After Draw the turn passes; the drawn card cannot be played the same
  turn.
* Wild Draw 4 is playable regardless of hand contents.
* Reverse acts as Skip in a 2-player game.
* If the flipped starting card is a wild it goes back into the deck at a
  random position and the next card is flipped.
* A forced draw with both piles empty is skipped silently.
* The "Uno call" penalty is not modelled (it has no action id).
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import json

import numpy as np

from .cards import (
    Card,
    Color,
    DRAW2,
    REVERSE,
    SKIP,
    WILD,
    WILD4,
    build_deck,
    card_from_text,
    card_to_text,
    deck_form,
    sort_key,
)
from .encoding import DRAW_ACTION, action_to_id, id_to_action

FULL_DECK_SIZE = 108


class IllegalAction(ValueError):
    """Raised when an action id is not legal in the current state."""


class OutOfTurn(ValueError):
    """Raised when a player queries or acts outside their turn."""


@dataclass
class TerminalResult:
    winner: int
    rewards: tuple[int, ...]  # +1 for the winner, -1 for everyone else

    @classmethod
    def for_winner(cls, winner: int, num_players: int) -> "TerminalResult":
        return cls(winner, tuple(1 if p == winner else -1 for p in range(num_players)))


@dataclass
class TableState:
    hands: list[list[Card]]
    draw_pile: list[Card]  # top of the pile is the end of the list
    discard_pile: list[Card]
    target: Card  # always carries a concrete color
    current_player: int
    direction: int  # +1 clockwise, -1 counterclockwise
    num_players: int
    rng: np.random.Generator
    round_count: int = 0


# Play-action lookup tables, built once.  Wild kinds own four ids each
# (one per declared color); every other card owns exactly one.
_WILD_IDS = {
    kind: tuple(action_to_id(Card(color, kind)) for color in Color)
    for kind in (WILD, WILD4)
}
_REMOVE_FOR_ID: dict[int, Card] = {}
_TARGET_FOR_ID: dict[int, Card] = {}
for _id in range(DRAW_ACTION):
    _played = id_to_action(_id)
    _TARGET_FOR_ID[_id] = _played
    _REMOVE_FOR_ID[_id] = Card(None, _played.kind) if _played.kind >= WILD else _played


def _fresh_rng(seed: Optional[int] = None) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def clone_rng(rng: np.random.Generator) -> np.random.Generator:
    out = np.random.Generator(np.random.PCG64())
    out.bit_generator.state = rng.bit_generator.state
    return out


def init_game(num_players: int, seed: int) -> TableState:
    """Shuffle with ``seed``, deal 7 cards each, flip a non-wild target."""
    if not 2 <= num_players <= 10:
        raise ValueError(f"num_players must be in 2..10, got {num_players}")
    rng = _fresh_rng(seed)
    deck = build_deck()
    rng.shuffle(deck)
    hands = [[deck.pop() for _ in range(7)] for _ in range(num_players)]
    target = deck.pop()
    while target.kind >= WILD:
        deck.insert(int(rng.integers(0, len(deck) + 1)), target)
        target = deck.pop()
    return TableState(
        hands=hands,
        draw_pile=deck,
        discard_pile=[],
        target=target,
        current_player=0,
        direction=1,
        num_players=num_players,
        rng=rng,
    )


def clone(state: TableState) -> TableState:
    """Deep, independent copy including the generator state."""
    return TableState(
        hands=[list(h) for h in state.hands],
        draw_pile=list(state.draw_pile),
        discard_pile=list(state.discard_pile),
        target=state.target,
        current_player=state.current_player,
        direction=state.direction,
        num_players=state.num_players,
        rng=clone_rng(state.rng),
        round_count=state.round_count,
    )


def legal_actions_for(hand: Sequence[Card], target: Card) -> tuple[int, ...]:
    """Sorted legal action ids for a hand facing a target card.

    Legality depends only on (hand, target): color match, kind match
    (rank-on-rank or special-on-special), or any wild.  Draw (60) is
    present exactly when nothing else is.
    """
    ids: set[int] = set()
    t_color, t_kind = target.color, target.kind
    for card in hand:
        if card.kind >= WILD:
            ids.update(_WILD_IDS[card.kind])
        elif card.color == t_color or card.kind == t_kind:
            ids.add(action_to_id(card))
    if not ids:
        return (DRAW_ACTION,)
    return tuple(sorted(ids))


def legal_actions(state: TableState, player: int) -> tuple[int, ...]:
    if player != state.current_player:
        raise OutOfTurn(f"player {player} acted on player {state.current_player}'s turn")
    return legal_actions_for(state.hands[player], state.target)


def _draw_cards(state: TableState, player: int, count: int) -> None:
    hand = state.hands[player]
    for _ in range(count):
        if not state.draw_pile:
            if not state.discard_pile:
                return  # nothing left anywhere: the draw is skipped
            state.draw_pile = state.discard_pile
            state.discard_pile = []
            state.rng.shuffle(state.draw_pile)
        hand.append(state.draw_pile.pop())


def _advance(state: TableState, seats: int) -> None:
    state.current_player = (state.current_player + state.direction * seats) % state.num_players


def apply_action(
    state: TableState, action: int
) -> tuple[TableState, bool, Optional[TerminalResult]]:
    """Apply one action id for the current player.

    Returns ``(state, done, result)``; the state is advanced in place.
    """
    player = state.current_player
    legal = legal_actions_for(state.hands[player], state.target)
    if action not in legal:
        raise IllegalAction(f"action {action} not legal (legal: {legal})")
    state.round_count += 1

    if action == DRAW_ACTION:
        _draw_cards(state, player, 1)
        _advance(state, 1)
        return state, False, None

    hand = state.hands[player]
    hand.remove(_REMOVE_FOR_ID[action])
    # A retired wild target re-enters circulation without its declared color.
    state.discard_pile.append(deck_form(state.target))
    state.target = _TARGET_FOR_ID[action]

    if not hand:
        return state, True, TerminalResult.for_winner(player, state.num_players)

    kind = state.target.kind
    if kind == SKIP:
        _advance(state, 2)
    elif kind == REVERSE:
        state.direction = -state.direction
        _advance(state, 2 if state.num_players == 2 else 1)
    elif kind == DRAW2:
        _draw_cards(state, (player + state.direction) % state.num_players, 2)
        _advance(state, 2)
    elif kind == WILD4:
        _draw_cards(state, (player + state.direction) % state.num_players, 4)
        _advance(state, 2)
    else:  # number cards and plain wild
        _advance(state, 1)
    return state, False, None


@dataclass(frozen=True)
class PlayerView:
    """What one seat is allowed to see: own hand, target, public metadata.

    Never contains another seat's cards or any pile contents.
    ``legal_actions`` is empty unless it is this seat's turn.
    """

    seat: int
    hand: tuple[Card, ...]
    target: Card
    legal_actions: tuple[int, ...]
    num_players: int
    current_player: int
    direction: int
    card_counts: tuple[int, ...]
    round_count: int = 0


def player_view(state: TableState, player: int) -> PlayerView:
    legal = ()
    if player == state.current_player:
        legal = legal_actions_for(state.hands[player], state.target)
    return PlayerView(
        seat=player,
        hand=tuple(state.hands[player]),
        target=state.target,
        legal_actions=legal,
        num_players=state.num_players,
        current_player=state.current_player,
        direction=state.direction,
        card_counts=tuple(len(h) for h in state.hands),
        round_count=state.round_count,
    )


def sample_determinization(
    view: PlayerView,
    opponent_counts: Optional[Sequence[int]] = None,
    seed: int = 0,
    known_discards: Sequence[Card] = (),
) -> TableState:
    """Build a full state consistent with a view by dealing the unseen
    cards uniformly at random into the opponents' hands and the draw pile.

    ``opponent_counts`` defaults to the counts carried by the view (own
    seat's entry is ignored).  ``known_discards`` lets a caller who has
    tracked the public discard history pin those cards as well.
    """
    if opponent_counts is None:
        opponent_counts = view.card_counts
    if len(opponent_counts) != view.num_players:
        raise ValueError("opponent_counts length must equal num_players")

    remaining: dict[Card, int] = {}
    for card in build_deck():
        remaining[card] = remaining.get(card, 0) + 1
    known = list(view.hand) + [view.target] + list(known_discards)
    for card in known:
        card = Card(None, card.kind) if card.kind >= WILD else card
        if remaining.get(card, 0) == 0:
            raise ValueError(f"known cards exceed the deck inventory at {card}")
        remaining[card] -= 1

    unseen: list[Card] = []
    for card in sorted(remaining, key=sort_key):
        unseen.extend([card] * remaining[card])
    need = sum(n for p, n in enumerate(opponent_counts) if p != view.seat)
    if need > len(unseen):
        raise ValueError(f"opponent counts need {need} cards, only {len(unseen)} unseen")

    rng = _fresh_rng(seed)
    rng.shuffle(unseen)
    hands: list[list[Card]] = []
    for p in range(view.num_players):
        if p == view.seat:
            hands.append(list(view.hand))
        else:
            n = opponent_counts[p]
            hands.append(unseen[:n])
            unseen = unseen[n:]
    return TableState(
        hands=hands,
        draw_pile=unseen,
        discard_pile=list(known_discards),
        target=view.target,
        current_player=view.current_player,
        direction=view.direction,
        num_players=view.num_players,
        rng=rng,
        round_count=view.round_count,
    )


def total_cards(state: TableState) -> int:
    return (
        sum(len(h) for h in state.hands)
        + len(state.draw_pile)
        + len(state.discard_pile)
        + 1  # the target
    )


def play_random_game(
    num_players: int, seed: int, max_rounds: int = 100_000
) -> tuple[int, TerminalResult]:
    """Play one game with every seat acting uniformly at random.

    Returns (rounds, result).  Used by the termination and fairness
    checks; kept free of view construction for speed.
    """
    state = init_game(num_players, seed)
    rng = state.rng
    while state.round_count < max_rounds:
        legal = legal_actions_for(state.hands[state.current_player], state.target)
        action = legal[0] if len(legal) == 1 else legal[int(rng.integers(len(legal)))]
        _, done, result = apply_action(state, action)
        if done:
            return state.round_count, result
    raise RuntimeError(f"random game exceeded {max_rounds} rounds")


# --- canonical text serialization (replay logs, protocol payloads) ---


def view_to_dict(view: PlayerView) -> dict:
    return {
        "seat": view.seat,
        "hand": [card_to_text(c) for c in view.hand],
        "target": card_to_text(view.target),
        "legal_actions": list(view.legal_actions),
        "num_players": view.num_players,
        "current_player": view.current_player,
        "direction": view.direction,
        "card_counts": list(view.card_counts),
        "round_count": view.round_count,
    }


def view_from_dict(data: dict) -> PlayerView:
    return PlayerView(
        seat=data["seat"],
        hand=tuple(card_from_text(t) for t in data["hand"]),
        target=card_from_text(data["target"]),
        legal_actions=tuple(data["legal_actions"]),
        num_players=data["num_players"],
        current_player=data["current_player"],
        direction=data["direction"],
        card_counts=tuple(data["card_counts"]),
        round_count=data.get("round_count", 0),
    )


def state_to_json(state: TableState) -> str:
    data = {
        "hands": [[card_to_text(c) for c in h] for h in state.hands],
        "draw_pile": [card_to_text(c) for c in state.draw_pile],
        "discard_pile": [card_to_text(c) for c in state.discard_pile],
        "target": card_to_text(state.target),
        "current_player": state.current_player,
        "direction": state.direction,
        "num_players": state.num_players,
        "round_count": state.round_count,
        "rng_state": state.rng.bit_generator.state,
    }
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def state_from_json(text: str) -> TableState:
    data = json.loads(text)
    rng = _fresh_rng()
    rng.bit_generator.state = data["rng_state"]
    return TableState(
        hands=[[card_from_text(t) for t in h] for h in data["hands"]],
        draw_pile=[card_from_text(t) for t in data["draw_pile"]],
        discard_pile=[card_from_text(t) for t in data["discard_pile"]],
        target=card_from_text(data["target"]),
        current_player=data["current_player"],
        direction=data["direction"],
        num_players=data["num_players"],
        rng=rng,
        round_count=data["round_count"],
    )
