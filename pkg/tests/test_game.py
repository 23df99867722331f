"""Rules engine tests: inventory, dealing, legality, effects, determinism."""

import collections

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uno_rl.cards import (
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
)
from uno_rl.encoding import DRAW_ACTION, action_to_id
from uno_rl.game import (
    IllegalAction,
    OutOfTurn,
    apply_action,
    clone,
    init_game,
    legal_actions,
    legal_actions_for,
    play_random_game,
    player_view,
    sample_determinization,
    state_from_json,
    state_to_json,
    total_cards,
)


def c(token):
    return card_from_text(token)


class TestDeck:
    def test_total_108(self):
        assert len(build_deck()) == 108

    def test_wild_counts(self):
        deck = build_deck()
        assert sum(1 for card in deck if card.kind == WILD4) == 4
        assert sum(1 for card in deck if card.kind == WILD) == 4

    def test_per_color_25(self):
        deck = build_deck()
        for color in Color:
            assert sum(1 for card in deck if card.color == color) == 25

    def test_rank_multiplicities(self):
        counts = collections.Counter(build_deck())
        for color in Color:
            assert counts[Card(color, 0)] == 1
            for rank in range(1, 10):
                assert counts[Card(color, rank)] == 2
            for kind in (SKIP, REVERSE, DRAW2):
                assert counts[Card(color, kind)] == 2


class TestInitGame:
    def test_deal_three_players(self):
        state = init_game(3, seed=7)
        assert [len(h) for h in state.hands] == [7, 7, 7]
        assert len(state.draw_pile) == 108 - 21 - 1
        assert state.discard_pile == []
        assert state.current_player == 0
        assert state.target.color is not None and state.target.kind < WILD
        assert total_cards(state) == 108

    def test_deal_ten_players(self):
        state = init_game(10, seed=7)
        assert all(len(h) == 7 for h in state.hands)
        assert len(state.draw_pile) == 37

    def test_seeded_determinism(self):
        a = init_game(2, seed=123)
        b = init_game(2, seed=123)
        assert state_to_json(a) == state_to_json(b)

    @pytest.mark.parametrize("n", [0, 1, 11])
    def test_invalid_player_count(self, n):
        with pytest.raises(ValueError):
            init_game(n, seed=0)

    def test_first_target_never_wild(self):
        for seed in range(300):
            state = init_game(2, seed)
            assert state.target.kind < WILD
            assert total_cards(state) == 108


from conftest import make_state as _state_with


class TestLegalActions:
    def test_color_match_only(self):
        ids = legal_actions_for([c("B5"), c("G7")], c("R5"))
        assert ids == (action_to_id(c("B5")),)

    def test_single_wild_gives_four_actions(self):
        ids = legal_actions_for([Card(None, WILD)], c("R5"))
        assert ids == (13, 28, 43, 58)

    def test_draw_when_nothing_matches(self):
        assert legal_actions_for([c("G7")], c("R5")) == (DRAW_ACTION,)

    def test_kind_match_across_colors(self):
        ids = legal_actions_for([c("GS")], c("RS"))
        assert ids == (action_to_id(c("GS")),)

    def test_draw_absent_when_card_playable(self):
        ids = legal_actions_for([c("R0"), c("B9")], c("R5"))
        assert DRAW_ACTION not in ids

    def test_out_of_turn_raises(self):
        state = init_game(3, seed=1)
        with pytest.raises(OutOfTurn):
            legal_actions(state, 1)

    def test_never_empty(self):
        assert legal_actions_for([], c("R5")) == (DRAW_ACTION,)


class TestApplyAction:
    def test_winning_play(self):
        state = _state_with([[c("R5")], [c("G7")], [c("B2")]], c("R9"))
        _, done, result = apply_action(state, action_to_id(c("R5")))
        assert done
        assert result.winner == 0
        assert result.rewards == (1, -1, -1)

    def test_non_terminal_has_no_result(self):
        state = _state_with([[c("R5"), c("R6")], [c("G7")]], c("R9"))
        _, done, result = apply_action(state, action_to_id(c("R5")))
        assert not done and result is None

    def test_reverse_two_players_same_player_again(self):
        state = _state_with([[c("RR"), c("B2")], [c("G7")]], c("R9"))
        apply_action(state, action_to_id(c("RR")))
        assert state.current_player == 0

    def test_reverse_three_players_flips_direction(self):
        state = _state_with([[c("RR"), c("B2")], [c("G7")], [c("Y1")]], c("R9"))
        apply_action(state, action_to_id(c("RR")))
        assert state.direction == -1
        assert state.current_player == 2

    def test_skip_advances_two(self):
        state = _state_with([[c("RS"), c("B2")], [c("G7")], [c("Y1")]], c("R9"))
        apply_action(state, action_to_id(c("RS")))
        assert state.current_player == 2

    def test_draw2_gives_cards_and_skips(self):
        state = _state_with([[c("RD2"), c("B2")], [c("G7")], [c("Y1")]], c("R9"))
        apply_action(state, action_to_id(c("RD2")))
        assert len(state.hands[1]) == 3
        assert state.current_player == 2

    def test_wild4_gives_four_and_skips(self):
        state = _state_with([[Card(None, WILD4), c("B2")], [c("G7")], [c("Y1")]], c("R9"))
        apply_action(state, action_to_id(Card(Color.BLUE, WILD4)))
        assert len(state.hands[1]) == 5
        assert state.current_player == 2
        assert state.target == Card(Color.BLUE, WILD4)

    def test_draw_action_draws_one_and_passes(self):
        state = _state_with([[c("G7")], [c("B5")], [c("Y1")]], c("R9"))
        before = len(state.draw_pile)
        apply_action(state, DRAW_ACTION)
        assert len(state.hands[0]) == 2
        assert len(state.draw_pile) == before - 1
        assert state.current_player == 1

    def test_illegal_action_raises(self):
        state = _state_with([[c("G7")], [c("B5")]], c("R9"))
        with pytest.raises(IllegalAction):
            apply_action(state, action_to_id(c("G7")))

    def test_empty_pile_reshuffles_discard(self):
        state = _state_with([[c("G7")], [c("B5")]], c("R9"))
        state.discard_pile = state.draw_pile
        state.draw_pile = []
        before = len(state.discard_pile)
        apply_action(state, DRAW_ACTION)
        assert len(state.hands[0]) == 2
        assert len(state.draw_pile) == before - 1
        assert state.discard_pile == []

    def test_both_piles_empty_skips_draw_silently(self):
        state = _state_with([[c("G7")], [c("B5")]], c("R9"))
        state.draw_pile = []
        apply_action(state, DRAW_ACTION)
        assert len(state.hands[0]) == 1
        assert state.current_player == 1

    def test_round_count_increments(self):
        state = _state_with([[c("G7")], [c("B5")]], c("R9"))
        apply_action(state, DRAW_ACTION)
        assert state.round_count == 1

    def test_played_wild_returns_to_discard_undeclared(self):
        state = _state_with(
            [[Card(None, WILD), c("B2")], [c("G7")]], c("R9"), num_players=2
        )
        apply_action(state, action_to_id(Card(Color.GREEN, WILD)))
        # next player plays G7 onto the green wild; the wild retires colorless
        apply_action(state, action_to_id(c("G7")))
        assert Card(None, WILD) in state.discard_pile

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000), players=st.integers(2, 6))
    def test_card_conservation_through_random_play(self, seed, players):
        state = init_game(players, seed)
        rng = np.random.default_rng(seed + 1)
        for _ in range(40):
            legal = legal_actions_for(state.hands[state.current_player], state.target)
            _, done, _ = apply_action(state, legal[int(rng.integers(len(legal)))])
            assert total_cards(state) == 108
            assert 0 <= state.current_player < players
            assert state.target.color is not None
            if done:
                break


class TestClone:
    def test_mutation_isolation(self):
        state = init_game(3, seed=5)
        snapshot = state_to_json(state)
        copy = clone(state)
        legal = legal_actions_for(copy.hands[0], copy.target)
        apply_action(copy, legal[0])
        assert state_to_json(state) == snapshot

    def test_fieldwise_equality(self):
        state = init_game(4, seed=9)
        copy = clone(state)
        assert state_to_json(copy) == state_to_json(state)

    def test_rng_clone_same_future(self):
        state = init_game(2, seed=11)
        copy = clone(state)
        assert state.rng.integers(1 << 30) == copy.rng.integers(1 << 30)


class TestSerialization:
    def test_round_trip(self):
        state = init_game(5, seed=17)
        again = state_from_json(state_to_json(state))
        assert state_to_json(again) == state_to_json(state)
        assert again.rng.integers(1 << 30) == state.rng.integers(1 << 30)

    def test_trajectory_replay_byte_identical(self):
        script = np.random.default_rng(2).integers(0, 1 << 20, size=30)
        snapshots = []
        for _ in range(2):
            state = init_game(3, seed=99)
            rng = np.random.default_rng(3)
            log = [state_to_json(state)]
            for _ in range(30):
                legal = legal_actions_for(state.hands[state.current_player], state.target)
                _, done, _ = apply_action(state, legal[int(rng.integers(len(legal)))])
                log.append(state_to_json(state))
                if done:
                    break
            snapshots.append(log)
        assert snapshots[0] == snapshots[1]
        assert script is not None


class TestPlayerView:
    def test_hides_hidden_state(self):
        state = init_game(3, seed=21)
        view = player_view(state, 1)
        assert view.hand == tuple(state.hands[1])
        assert view.card_counts == (7, 7, 7)
        assert view.legal_actions == ()  # not player 1's turn
        text = str(view)
        for card in state.hands[0]:
            pass  # hands may share card types; hygiene is checked at the protocol layer
        assert not hasattr(view, "draw_pile")

    def test_legal_actions_on_turn(self):
        state = init_game(3, seed=21)
        view = player_view(state, 0)
        assert view.legal_actions == legal_actions(state, 0)


class TestDeterminization:
    def _view(self, seed=3):
        state = init_game(3, seed)
        return state, player_view(state, 0)

    def test_counts_respected(self):
        _, view = self._view()
        sampled = sample_determinization(view, seed=1)
        assert [len(h) for h in sampled.hands] == list(view.card_counts)
        assert sampled.hands[0] == list(view.hand)

    def test_union_is_full_deck(self):
        _, view = self._view()
        sampled = sample_determinization(view, seed=2)
        everything = [card for h in sampled.hands for card in h]
        everything += sampled.draw_pile + sampled.discard_pile + [sampled.target]
        assert collections.Counter(everything) == collections.Counter(build_deck())

    def test_seeds_vary_partitions(self):
        _, view = self._view()
        hands = {
            tuple(sorted(map(card_to_text, sample_determinization(view, seed=s).hands[1])))
            for s in range(1000)
        }
        assert len(hands) > 500

    def test_inconsistent_counts_rejected(self):
        _, view = self._view()
        with pytest.raises(ValueError):
            sample_determinization(view, opponent_counts=(7, 95, 7), seed=0)


class TestRandomPlay:
    def test_termination_and_round_band(self):
        rounds = []
        for seed in range(2000):
            r, result = play_random_game(3, seed)
            rounds.append(r)
            assert sum(result.rewards) == -1  # one +1, two -1
            assert result.rewards.count(1) == 1
        rounds.sort()
        assert 30 <= rounds[len(rounds) // 2] <= 100

    def test_seat_fairness_rough(self):
        wins = [0, 0, 0]
        n = 3000
        for seed in range(n):
            _, result = play_random_game(3, seed + 50_000)
            wins[result.winner] += 1
        for w in wins:
            assert abs(w / n - 1 / 3) < 0.05
