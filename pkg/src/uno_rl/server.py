"""Turn-based game service: Uno tables with human, bot, and agent seats.

The service itself is transport-agnostic: :meth:`GameService.handle_raw`
maps one inbound payload to a list of (connection, payload) replies, and
all session mutation happens under one lock, so messages are processed
strictly serially.  Two transports feed it: UDP datagrams and WebSocket
frames, both carrying the same canonical JSON messages, plus a plain HTTP
server for the browser client's static files.

Reliability over UDP is the client's retransmission plus server-side
deduplication: each seat's ACT carries a fresh ``seq``; a repeated or
older ``seq`` re-sends that seat's previous replies without touching the
game.  A seat's STATE contains only its own view, never another hand.
"""

import http.server
import functools
import logging
import socket
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import game
from .agents import GreedyNetAgent, RandomAgent
from .encoding import DRAW_ACTION
from .net import load_checkpoint
from .protocol import (
    PROTOCOL_VERSION,
    Message,
    ProtocolError,
    decode_message,
    encode_message,
    error_message,
)

logger = logging.getLogger(__name__)

DEFAULT_UDP_PORT = 47701
DEFAULT_WS_PORT = 47702
DEFAULT_HTTP_PORT = 47703


@dataclass
class Seat:
    kind: str                      # "human" | "bot" | "agent"
    agent: object = None           # policy object for non-human seats
    conn: Optional[tuple] = None   # connection id once a human joined
    joined: bool = False
    last_seq: int = -1
    last_replies: list = field(default_factory=list)  # encoded payloads


@dataclass
class Session:
    sid: str
    seats: list
    seed: int
    state: Optional[game.TableState] = None
    started: bool = False
    finished: bool = False
    result: Optional[game.TerminalResult] = None
    events: list = field(default_factory=list)   # actions since last broadcast
    turn_deadline: Optional[float] = None

    def human_seats(self):
        return [i for i, s in enumerate(self.seats) if s.kind == "human"]


class GameService:
    """All sessions of one server process.  Thread-safe via one lock."""

    def __init__(
        self,
        seed: int = 0,
        turn_timeout: Optional[float] = None,
        checkpoint_loader: Optional[Callable] = None,
    ):
        self._lock = threading.RLock()
        self._sessions: dict[str, Session] = {}
        self._counter = 0
        self._rng = np.random.default_rng(seed)
        self._turn_timeout = turn_timeout
        self._load_checkpoint = checkpoint_loader or self._default_loader
        self.transcript: list = []  # (conn, raw) inbound log for replay

    @staticmethod
    def _default_loader(path):
        params, _, _ = load_checkpoint(path, expect_layer_sizes=(240, 64, 64, 61))
        return GreedyNetAgent(params, name=f"agent:{path}")

    # -- inbound ---------------------------------------------------------

    def handle_raw(self, raw: bytes, conn) -> list:
        """Decode, dispatch, encode.  Returns [(conn, payload bytes)]."""
        with self._lock:
            self.transcript.append((conn, raw))
            try:
                msg = decode_message(raw)
            except ProtocolError as exc:
                return [(conn, encode_message(error_message(f"bad_message: {exc}")))]
            replies = self.handle(msg, conn)
            return [(c, encode_message(m)) for c, m in replies]

    def handle(self, msg: Message, conn) -> list:
        if msg.version != PROTOCOL_VERSION:
            return [(conn, error_message("version_mismatch"))]
        handler = getattr(self, f"_on_{msg.type.lower()}", None)
        if handler is None:
            return [(conn, error_message(f"unexpected_type: {msg.type}"))]
        return handler(msg, conn)

    # -- message handlers --------------------------------------------------

    def _on_hello(self, msg: Message, conn) -> list:
        return [(conn, Message(type="ACK", seq=msg.seq,
                               body={"server": "uno-rl", "version": PROTOCOL_VERSION}))]

    def _on_ping(self, msg: Message, conn) -> list:
        return [(conn, Message(type="ACK", seq=msg.seq, session=msg.session,
                               body={"pong": True}))]

    def _on_create(self, msg: Message, conn) -> list:
        body = msg.body
        seat_specs = body.get("seats", [])
        num_players = body.get("num_players", len(seat_specs))
        if not 2 <= num_players <= 10:
            return [(conn, error_message("bad_seat_spec: num_players must be 2..10"))]
        if len(seat_specs) != num_players:
            return [(conn, error_message("bad_seat_spec: seats must match num_players"))]
        seats = []
        for spec in seat_specs:
            kind = spec.get("kind")
            if kind == "human":
                seats.append(Seat(kind="human"))
            elif kind == "bot":
                seats.append(Seat(kind="bot", agent=RandomAgent()))
            elif kind == "agent":
                try:
                    agent = self._load_checkpoint(spec.get("checkpoint", ""))
                except Exception as exc:
                    return [(conn, error_message(f"checkpoint_load_failed: {exc}"))]
                seats.append(Seat(kind="agent", agent=agent))
            else:
                return [(conn, error_message(f"bad_seat_spec: unknown kind {kind!r}"))]
        seed = int(body.get("seed", self._rng.integers(1 << 62)))
        self._counter += 1
        sid = f"table-{self._counter}"
        session = Session(sid=sid, seats=seats, seed=seed)
        self._sessions[sid] = session
        replies = [(conn, Message(type="ACK", seq=msg.seq, session=sid,
                                  body={"session": sid,
                                        "humans_needed": len(session.human_seats())}))]
        if not session.human_seats():
            replies += self._start(session)
            # nobody is seated, so report the outcome to the creator
            if session.finished:
                replies.append((conn, self._result_message(session)))
        return replies

    def _on_join(self, msg: Message, conn) -> list:
        session = self._sessions.get(msg.session or msg.body.get("session", ""))
        if session is None:
            return [(conn, error_message("unknown_session", msg.session, msg.seq))]
        want = msg.body.get("seat")
        seat_index = None
        for i in session.human_seats():
            if not session.seats[i].joined and (want is None or want == i):
                seat_index = i
                break
        if seat_index is None:
            # allow rejoin of an already-bound seat (reconnect)
            for i in session.human_seats():
                if want == i or (want is None and session.seats[i].joined):
                    seat_index = i
                    break
        if seat_index is None:
            return [(conn, error_message("no_free_seat", session.sid, msg.seq))]
        seat = session.seats[seat_index]
        seat.conn = conn
        seat.joined = True
        replies = [(conn, Message(type="ACK", seq=msg.seq, session=session.sid,
                                  player=seat_index, body={"seat": seat_index}))]
        if not session.started and all(
            session.seats[i].joined for i in session.human_seats()
        ):
            replies += self._start(session)
        elif session.started and not session.finished:
            # reconnect: resend the current view
            replies.append((conn, self._state_message(session, seat_index)))
        return replies

    def _on_act(self, msg: Message, conn) -> list:
        session = self._sessions.get(msg.session)
        if session is None:
            return [(conn, error_message("unknown_session", msg.session, msg.seq))]
        seat_index = msg.player
        if not 0 <= seat_index < len(session.seats):
            return [(conn, error_message("unknown_seat", session.sid, msg.seq))]
        seat = session.seats[seat_index]
        if seat.kind != "human" or seat.conn != conn:
            return [(conn, error_message("seat_not_yours", session.sid, msg.seq))]
        if msg.seq <= seat.last_seq:
            # retransmit: acknowledge idempotently without re-applying
            return [(conn, raw) for raw in seat.last_replies]
        if not session.started or session.finished:
            return [(conn, error_message("session_not_live", session.sid, msg.seq))]

        action = msg.body.get("action")
        state = session.state
        if state.current_player != seat_index:
            return [(conn, error_message("out_of_turn", session.sid, msg.seq))]
        legal = game.legal_actions(state, seat_index)
        if action not in legal:
            return [(conn, error_message("illegal_action", session.sid, msg.seq))]

        seat.last_seq = msg.seq
        ack = Message(type="ACK", seq=msg.seq, session=session.sid, player=seat_index,
                      body={"applied": action})
        replies = [(conn, ack)]
        replies += self._apply_and_advance(session, seat_index, action)
        seat.last_replies = [m for c, m in replies if c == conn]
        return replies

    # -- game flow ---------------------------------------------------------

    def _start(self, session: Session) -> list:
        session.state = game.init_game(len(session.seats), session.seed)
        session.started = True
        return self._run_bots_and_broadcast(session)

    def _apply_and_advance(self, session: Session, seat_index: int, action: int) -> list:
        state = session.state
        _, done, result = game.apply_action(state, action)
        session.events.append({"player": seat_index, "action": int(action)})
        if done:
            session.finished = True
            session.result = result
            return self._broadcast(session)
        return self._run_bots_and_broadcast(session)

    def _run_bots_and_broadcast(self, session: Session) -> list:
        state = session.state
        bot_rng = state.rng  # session-seeded; keeps bot play replayable
        while not session.finished:
            seat = session.seats[state.current_player]
            if seat.kind == "human":
                break
            view = game.player_view(state, state.current_player)
            action = seat.agent.act(view, bot_rng)
            mover = state.current_player
            _, done, result = game.apply_action(state, action)
            session.events.append({"player": mover, "action": int(action)})
            if done:
                session.finished = True
                session.result = result
        self._arm_timer(session)
        return self._broadcast(session)

    def _arm_timer(self, session: Session) -> None:
        if session.finished or self._turn_timeout is None:
            session.turn_deadline = None
        elif session.seats[session.state.current_player].kind == "human":
            session.turn_deadline = time.monotonic() + self._turn_timeout

    def _state_message(self, session: Session, seat_index: int) -> Message:
        view = game.player_view(session.state, seat_index)
        return Message(
            type="STATE",
            session=session.sid,
            player=seat_index,
            body={"view": game.view_to_dict(view), "events": list(session.events)},
        )

    def _result_message(self, session: Session) -> Message:
        return Message(
            type="RESULT",
            session=session.sid,
            body={
                "winner": session.result.winner,
                "rewards": list(session.result.rewards),
                "events": list(session.events),
            },
        )

    def _broadcast(self, session: Session) -> list:
        """Current view to every joined human; RESULT as well when over."""
        replies = []
        for i in session.human_seats():
            seat = session.seats[i]
            if seat.conn is None:
                continue
            replies.append((seat.conn, self._state_message(session, i)))
            if session.finished:
                replies.append((seat.conn, self._result_message(session)))
        session.events.clear()
        return replies

    # -- turn timeouts -------------------------------------------------------

    def check_timeouts(self) -> list:
        """Force a move on any human seat idle past the deadline.  The
        forced action is Draw when legal, otherwise the single legal action."""
        out = []
        with self._lock:
            now = time.monotonic()
            for session in self._sessions.values():
                if (
                    session.turn_deadline is None
                    or now < session.turn_deadline
                    or session.finished
                ):
                    continue
                out += self.force_timeout(session.sid)
        return out

    def force_timeout(self, sid: str) -> list:
        with self._lock:
            session = self._sessions[sid]
            seat_index = session.state.current_player
            legal = game.legal_actions(session.state, seat_index)
            action = DRAW_ACTION if DRAW_ACTION in legal else legal[0]
            logger.info("session %s seat %d timed out; forcing action %d",
                        sid, seat_index, action)
            replies = self._apply_and_advance(session, seat_index, action)
            return [(c, encode_message(m)) for c, m in replies]

    # -- replay ---------------------------------------------------------------

    def session_log(self, sid: str) -> dict:
        session = self._sessions[sid]
        return {"session": sid, "seed": session.seed,
                "finished": session.finished,
                "winner": session.result.winner if session.result else None}


def replay_transcript(transcript: list, seed: int = 0) -> list:
    """Re-drive a recorded inbound transcript against a fresh service and
    return every outbound (conn, payload)."""
    service = GameService(seed=seed)
    out = []
    for conn, raw in transcript:
        out += service.handle_raw(raw, conn)
    return out


# -- transports ---------------------------------------------------------------


class Router:
    """Maps connection ids to send callables so a reply triggered on one
    transport can reach a recipient on another."""

    def __init__(self):
        self._sends: dict = {}
        self._lock = threading.Lock()

    def register(self, conn, send_fn) -> None:
        with self._lock:
            self._sends[conn] = send_fn

    def unregister(self, conn) -> None:
        with self._lock:
            self._sends.pop(conn, None)

    def deliver(self, replies) -> None:
        for conn, payload in replies:
            with self._lock:
                send = self._sends.get(conn)
            if send is not None:
                try:
                    send(payload)
                except OSError:
                    logger.warning("send to %r failed", conn)


class UdpTransport:
    """Datagram transport; one service shared with the other transports."""

    def __init__(self, service: GameService, router: Router,
                 host: str = "127.0.0.1", port: int = 0):
        self.service = service
        self.router = router
        self.sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self.sock.bind((host, port))
        self.sock.settimeout(0.2)
        self.port = self.sock.getsockname()[1]
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop, daemon=True)

    def start(self):
        self._thread.start()
        return self

    def _loop(self):
        while not self._stop.is_set():
            try:
                raw, addr = self.sock.recvfrom(65536)
            except socket.timeout:
                continue
            except OSError:
                break
            conn = ("udp", addr)
            self.router.register(conn, lambda p, a=addr: self.sock.sendto(p, a))
            self.router.deliver(self.service.handle_raw(raw, conn))

    def close(self):
        self._stop.set()
        self.sock.close()
        if self._thread.is_alive():
            self._thread.join(timeout=2)


class WsTransport:
    """WebSocket transport carrying the same JSON payloads as UDP."""

    def __init__(self, service: GameService, router: Router,
                 host: str = "127.0.0.1", port: int = 0):
        from websockets.sync.server import serve

        self.service = service
        self.router = router
        self._server = serve(self._handler, host, port)
        self.port = self._server.socket.getsockname()[1]
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)

    def start(self):
        self._thread.start()
        return self

    def _handler(self, ws):
        conn = ("ws", id(ws))
        send_lock = threading.Lock()

        def send(payload: bytes):
            with send_lock:
                ws.send(payload.decode("utf-8"))

        self.router.register(conn, send)
        try:
            for raw in ws:
                if isinstance(raw, str):
                    raw = raw.encode("utf-8")
                self.router.deliver(self.service.handle_raw(raw, conn))
        except Exception:
            logger.info("websocket %r closed", conn)
        finally:
            self.router.unregister(conn)

    def close(self):
        self._server.shutdown()
        if self._thread.is_alive():
            self._thread.join(timeout=2)


class HttpStaticServer:
    """Static file server for the browser client assets."""

    def __init__(self, directory: str, host: str = "127.0.0.1", port: int = 0):
        handler = functools.partial(
            http.server.SimpleHTTPRequestHandler, directory=directory
        )
        self._httpd = http.server.ThreadingHTTPServer((host, port), handler)
        self.port = self._httpd.server_address[1]
        self._thread = threading.Thread(target=self._httpd.serve_forever, daemon=True)

    def start(self):
        self._thread.start()
        return self

    def close(self):
        self._httpd.shutdown()
        self._httpd.server_close()


class TimeoutWorker:
    """Background sweep for turn deadlines."""

    def __init__(self, service: GameService, router: Router, interval: float = 0.1):
        self.service = service
        self.router = router
        self.interval = interval
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._loop, daemon=True)

    def start(self):
        self._thread.start()
        return self

    def _loop(self):
        while not self._stop.wait(self.interval):
            self.router.deliver(self.service.check_timeouts())

    def close(self):
        self._stop.set()
