"""Reference client speaking the UDP protocol.

Reliability: every request is retransmitted every 250 ms (up to 20 times)
until the matching ACK or ERROR arrives; the server deduplicates repeats
by sequence number.  STATE and RESULT messages arriving meanwhile are
queued for the caller.  The same client drives both the interactive
terminal mode and the unattended auto mode used by the protocol tests.
"""

import socket
import sys
import time
from typing import Optional

import numpy as np

from .cards import card_to_text
from .encoding import id_to_action
from .game import view_from_dict
from .protocol import Message, decode_message, encode_message


class ClientTimeout(ConnectionError):
    pass


class UdpClient:
    def __init__(self, host: str, port: int, timeout: float = 0.25, retries: int = 20):
        self.addr = (host, port)
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.settimeout(timeout)
        self.timeout = timeout
        self.retries = retries
        self.seq = 0
        self.session = ""
        self.seat = -1
        self.inbox: list[Message] = []

    def close(self):
        self.sock.close()

    def _drain_once(self) -> Optional[Message]:
        try:
            raw, _ = self.sock.recvfrom(65536)
        except socket.timeout:
            return None
        return decode_message(raw)

    def poll(self, duration: float = 0.0) -> list[Message]:
        """Collect queued messages plus anything arriving within duration."""
        out, self.inbox = self.inbox, []
        deadline = time.monotonic() + duration
        while True:
            msg = self._drain_once()
            if msg is not None:
                out.append(msg)
            elif time.monotonic() >= deadline:
                break
        return out

    def request(self, msg_type: str, body: Optional[dict] = None) -> Message:
        """Send and retransmit until the matching ACK/ERROR arrives."""
        self.seq += 1
        msg = Message(type=msg_type, seq=self.seq, session=self.session,
                      player=self.seat, body=body or {})
        payload = encode_message(msg)
        for _ in range(self.retries):
            self.sock.sendto(payload, self.addr)
            deadline = time.monotonic() + self.timeout
            while time.monotonic() < deadline:
                reply = self._drain_once()
                if reply is None:
                    continue
                if reply.type in ("ACK", "ERROR") and reply.seq == self.seq:
                    return reply
                self.inbox.append(reply)
        raise ClientTimeout(f"no reply to {msg_type} after {self.retries} retries")

    # -- conveniences -------------------------------------------------------

    def hello(self) -> Message:
        return self.request("HELLO")

    def create(self, num_players: int, seats: list, seed: Optional[int] = None) -> Message:
        body = {"num_players": num_players, "seats": seats}
        if seed is not None:
            body["seed"] = seed
        reply = self.request("CREATE", body)
        if reply.type == "ACK":
            self.session = reply.body["session"]
        return reply

    def join(self, session: Optional[str] = None, seat: Optional[int] = None) -> Message:
        if session:
            self.session = session
        body = {"session": self.session}
        if seat is not None:
            body["seat"] = seat
        reply = self.request("JOIN", body)
        if reply.type == "ACK":
            self.seat = reply.body["seat"]
        return reply

    def act(self, action: int) -> Message:
        return self.request("ACT", {"action": int(action)})


def render_view(view) -> str:
    lines = [
        f"target: {card_to_text(view.target)}   "
        f"turn: seat {view.current_player}   "
        f"direction: {'cw' if view.direction == 1 else 'ccw'}   "
        f"counts: {list(view.card_counts)}",
        "hand: " + " ".join(card_to_text(c) for c in view.hand),
    ]
    if view.legal_actions:
        parts = []
        for a in view.legal_actions:
            card = id_to_action(a)
            parts.append(f"[{a}]={'draw' if card is None else card_to_text(card)}")
        lines.append("legal: " + " ".join(parts))
    return "\n".join(lines)


def play_auto(client: UdpClient, seed: int = 0, max_seconds: float = 60.0) -> Message:
    """Play random legal moves until RESULT; returns the RESULT message."""
    rng = np.random.default_rng(seed)
    acted_round = -1
    deadline = time.monotonic() + max_seconds
    while time.monotonic() < deadline:
        for msg in client.poll(0.05):
            if msg.type == "RESULT":
                return msg
            if msg.type != "STATE":
                continue
            view = view_from_dict(msg.body["view"])
            if view.current_player == client.seat and view.legal_actions:
                if view.round_count <= acted_round:
                    continue  # duplicate of a state we already answered
                acted_round = view.round_count
                legal = view.legal_actions
                action = legal[int(rng.integers(len(legal)))]
                client.act(action)
    raise ClientTimeout("game did not finish in time")


def play_interactive(client: UdpClient) -> int:
    """Terminal loop: render states, prompt for action ids."""
    print(f"seated at {client.seat} in session {client.session}")
    while True:
        for msg in client.poll(0.2):
            if msg.type == "RESULT":
                winner = msg.body["winner"]
                outcome = "you win!" if winner == client.seat else f"seat {winner} wins"
                print(f"game over: {outcome} rewards={msg.body['rewards']}")
                return 0
            if msg.type == "ERROR":
                print(f"server error: {msg.body.get('reason')}")
                continue
            if msg.type != "STATE":
                continue
            view = view_from_dict(msg.body["view"])
            print(render_view(view))
            if view.current_player == client.seat and view.legal_actions:
                while True:
                    choice = input("action id> ").strip()
                    if not choice:
                        continue
                    try:
                        action = int(choice)
                    except ValueError:
                        print("enter one of the listed action ids")
                        continue
                    reply = client.act(action)
                    if reply.type == "ERROR":
                        print(f"rejected: {reply.body.get('reason')}")
                        continue
                    break


def main_play(host: str, port: int, create: Optional[int], bots: int,
              session: str, auto: bool, seed: int = 0) -> int:
    client = UdpClient(host, port)
    try:
        hello = client.hello()
        if hello.type == "ERROR":
            print(f"server rejected hello: {hello.body.get('reason')}", file=sys.stderr)
            return 2
        if create:
            seats = [{"kind": "human"}] + [{"kind": "bot"}] * bots
            if len(seats) != create:
                seats += [{"kind": "bot"}] * (create - len(seats))
            reply = client.create(create, seats, seed=seed if seed else None)
            if reply.type == "ERROR":
                print(f"create failed: {reply.body.get('reason')}", file=sys.stderr)
                return 2
        reply = client.join(session or None)
        if reply.type == "ERROR":
            print(f"join failed: {reply.body.get('reason')}", file=sys.stderr)
            return 2
        if auto:
            result = play_auto(client, seed=seed)
            print(f"winner: seat {result.body['winner']} rewards={result.body['rewards']}")
            return 0
        return play_interactive(client)
    except (ClientTimeout, ConnectionError, OSError) as exc:
        print(f"connection failed: {exc}", file=sys.stderr)
        return 2
    finally:
        client.close()
