"""Uno card inventory and canonical text form."""

from enum import IntEnum
from typing import NamedTuple, Optional


class Color(IntEnum):
    RED = 0
    GREEN = 1
    BLUE = 2
    YELLOW = 3


# Kind codes: 0-9 are the number ranks, then the five specials.
SKIP = 10
REVERSE = 11
DRAW2 = 12
WILD = 13
WILD4 = 14

NUM_KINDS = 15


class Card(NamedTuple):
    """One Uno card.

    ``color`` is None only for wild/wild4 sitting in a hand or the deck;
    a played wild (and therefore any target card) always carries its
    declared color.
    """

    color: Optional[Color]
    kind: int

    def is_wild(self) -> bool:
        return self.kind >= WILD


def deck_form(card: Card) -> Card:
    """Strip a declared color off a wild so it matches its deck identity."""
    if card.kind >= WILD:
        return Card(None, card.kind)
    return card


def build_deck() -> list[Card]:
    """The canonical 108-card inventory, in a fixed pre-shuffle order.

    Per color: one 0, two of each 1-9, two skip, two reverse, two draw2.
    Plus four undeclared wilds and four undeclared wild-draw-4.
    """
    deck = []
    for color in Color:
        deck.append(Card(color, 0))
        for rank in range(1, 10):
            deck.append(Card(color, rank))
            deck.append(Card(color, rank))
        for kind in (SKIP, REVERSE, DRAW2):
            deck.append(Card(color, kind))
            deck.append(Card(color, kind))
    deck.extend(Card(None, WILD) for _ in range(4))
    deck.extend(Card(None, WILD4) for _ in range(4))
    return deck


_COLOR_LETTER = {Color.RED: "R", Color.GREEN: "G", Color.BLUE: "B", Color.YELLOW: "Y"}
_LETTER_COLOR = {v: k for k, v in _COLOR_LETTER.items()}
_KIND_CODE = {SKIP: "S", REVERSE: "R", DRAW2: "D2", WILD: "W", WILD4: "W4"}
_CODE_KIND = {v: k for k, v in _KIND_CODE.items()}


def card_to_text(card: Card) -> str:
    """Canonical token, e.g. R5, GS, BD2, YW4, or bare W / W4 for undeclared wilds."""
    code = str(card.kind) if card.kind <= 9 else _KIND_CODE[card.kind]
    if card.color is None:
        return code
    return _COLOR_LETTER[card.color] + code


def card_from_text(token: str) -> Card:
    token = token.strip().upper()
    if not token:
        raise ValueError("empty card token")
    if token[0] in _LETTER_COLOR:
        color: Optional[Color] = _LETTER_COLOR[token[0]]
        code = token[1:]
    else:
        color = None
        code = token
    if code.isdigit() and len(code) == 1:
        kind = int(code)
    elif code in _CODE_KIND:
        kind = _CODE_KIND[code]
    else:
        raise ValueError(f"bad card token: {token!r}")
    if color is None and kind < WILD:
        raise ValueError(f"non-wild card needs a color: {token!r}")
    return Card(color, kind)


def sort_key(card: Card) -> tuple[int, int]:
    """Deterministic ordering; undeclared wilds sort after the colors."""
    return (4 if card.color is None else int(card.color), card.kind)
