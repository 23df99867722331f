"""Action-id table and binary state planes for the 240-input network.

Golden layout, pinned by test vectors:

* Action ids: blocks of 15 per color in the order red, green, blue,
  yellow (ranks 0-9, then skip, reverse, draw2, wild, wild4), and 60 for
  Draw.  Wild ids carry the declared color, so each wild kind owns four
  ids.
* State planes: 4 binary matrices of shape 4x15.  Rows are the colors
  yellow, green, blue, red; columns are ranks 0-9 then skip, reverse,
  draw2, wild, wild4.  Planes 0-2 encode holding exactly 0 / 1 / 2-or-more
  copies; plane 3 is a one-hot of the target card.  Flattening is
  plane-major then row-major: bit = plane*60 + row*15 + column.
* Undeclared wilds in a hand have no color, so their counts are recorded
  in row 0 (the yellow row) of the wild / wild4 column.
"""

from typing import Iterable, Optional

import numpy as np

from .cards import Card, Color, WILD, NUM_KINDS

NUM_ACTIONS = 61
DRAW_ACTION = 60
STATE_SIZE = 240

_COLOR_OFFSET = {Color.RED: 0, Color.GREEN: 15, Color.BLUE: 30, Color.YELLOW: 45}
_OFFSET_COLOR = {v: k for k, v in _COLOR_OFFSET.items()}

# Plane row per color (yellow first, red last).
ROW_OF_COLOR = {Color.YELLOW: 0, Color.GREEN: 1, Color.BLUE: 2, Color.RED: 3}
WILD_ROW = 0  # row used for undeclared wilds held in hand


def action_to_id(card: Optional[Card]) -> int:
    """Map a card (wilds must carry a declared color) or None (Draw) to its id."""
    if card is None:
        return DRAW_ACTION
    if card.color is None:
        raise ValueError("wild action needs a declared color")
    return _COLOR_OFFSET[card.color] + card.kind


def id_to_action(action_id: int) -> Optional[Card]:
    """Inverse of action_to_id; returns None for the Draw id."""
    if not 0 <= action_id < NUM_ACTIONS:
        raise ValueError(f"action id out of range: {action_id}")
    if action_id == DRAW_ACTION:
        return None
    offset = (action_id // 15) * 15
    return Card(_OFFSET_COLOR[offset], action_id - offset)


def legal_mask(legal: Iterable[int]) -> np.ndarray:
    """Binary vector of length 61 with ones at the given action ids."""
    mask = np.zeros(NUM_ACTIONS, dtype=np.float64)
    for a in legal:
        mask[a] = 1.0
    return mask


def _cell(card: Card) -> tuple[int, int]:
    row = WILD_ROW if card.color is None else ROW_OF_COLOR[card.color]
    return row, card.kind


def encode_planes(hand: Iterable[Card], target: Card) -> np.ndarray:
    """The raw (4, 4, 15) uint8 planes for a hand and target card."""
    planes = np.zeros((4, 4, NUM_KINDS), dtype=np.uint8)
    counts: dict[tuple[int, int], int] = {}
    for card in hand:
        cell = _cell(card)
        counts[cell] = counts.get(cell, 0) + 1
    planes[0, :, :] = 1
    for (row, col), count in counts.items():
        planes[0, row, col] = 0
        planes[min(count, 2), row, col] = 1
    if target.color is None:
        raise ValueError("target card must carry a color")
    planes[3, ROW_OF_COLOR[target.color], target.kind] = 1
    return planes


def encode_state(view) -> np.ndarray:
    """Flattened 240-entry float64 encoding of a PlayerView (or anything
    exposing ``hand`` and ``target``)."""
    return encode_planes(view.hand, view.target).reshape(-1).astype(np.float64)


def state_key(hand: Iterable[Card], target: Card) -> bytes:
    """Compact hashable key for the encoded state (30 packed bytes)."""
    return np.packbits(encode_planes(hand, target).reshape(-1)).tobytes()


def bits_string(encoded: np.ndarray) -> str:
    """240-character 0/1 string in flattening order (golden-vector form)."""
    return "".join("1" if b else "0" for b in np.asarray(encoded).reshape(-1))
