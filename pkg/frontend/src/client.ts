// Transport-agnostic session state machine.  The server stays
// authoritative: the client never judges legality beyond mirroring the
// legal_actions set carried by the latest STATE.

import {
  CardInfo,
  DRAW_ACTION,
  Message,
  PROTOCOL_VERSION,
  View,
  actionIdsForCard,
  decodeMessage,
  encodeMessage,
  makeMessage,
  parseCard,
} from "./protocol.js";

export interface ClientSocket {
  send(text: string): void;
}

export interface GameEvent {
  player: number;
  action: number;
}

export interface ClientCallbacks {
  onState?: (view: View, events: GameEvent[]) => void;
  onResult?: (body: { winner: number; rewards: number[] }) => void;
  onServerError?: (reason: string) => void;
  onBanner?: (text: string) => void; // blocking condition (version mismatch, malformed STATE)
  onLockChange?: (locked: boolean) => void;
  onLog?: (line: string) => void;
}

export interface HandEntry {
  index: number;
  card: CardInfo;
  /** legal ids this card can emit right now (intersection with the
   * server's legal set); empty means the card is not clickable */
  enabledIds: number[];
}

export function handEntries(view: View): HandEntry[] {
  const legal = new Set(view.legal_actions);
  return view.hand.map((token, index) => {
    const card = parseCard(token);
    return {
      index,
      card,
      enabledIds: actionIdsForCard(card).filter((id) => legal.has(id)),
    };
  });
}

export function drawEnabled(view: View): boolean {
  return view.legal_actions.includes(DRAW_ACTION);
}

export function isMyTurn(view: View, seat: number): boolean {
  return view.current_player === seat && view.legal_actions.length > 0;
}

export class GameClient {
  session = "";
  seat = -1;
  latestView: View | null = null;
  finished = false;

  private seq = 0;
  private pendingSeq: number | null = null; // in-flight request: input locked
  private pendingAction: number | null = null;
  private actedRound = -1; // double-click / duplicate-STATE guard
  private frozen = false;

  constructor(
    private socket: ClientSocket,
    private cb: ClientCallbacks = {},
  ) {}

  get locked(): boolean {
    return this.pendingSeq !== null || this.frozen;
  }

  private send(msg: Message) {
    this.socket.send(encodeMessage(msg));
  }

  private request(msg: Message) {
    this.pendingSeq = msg.seq;
    this.cb.onLockChange?.(true);
    this.send(msg);
  }

  private nextSeq(): number {
    this.seq += 1;
    return this.seq;
  }

  hello() {
    this.request(makeMessage("HELLO", { seq: this.nextSeq() }));
  }

  createTable(numPlayers: number, bots: number, agents: string[] = []) {
    const seats: Record<string, string>[] = [{ kind: "human" }];
    for (const checkpoint of agents) seats.push({ kind: "agent", checkpoint });
    while (seats.length < numPlayers && seats.length - 1 < bots + agents.length) {
      seats.push({ kind: "bot" });
    }
    while (seats.length < numPlayers) seats.push({ kind: "human" });
    this.request(
      makeMessage("CREATE", {
        seq: this.nextSeq(),
        body: { num_players: numPlayers, seats },
      }),
    );
  }

  join(session?: string, seat?: number) {
    if (session) this.session = session;
    const body: Record<string, any> = { session: this.session };
    if (seat !== undefined && seat >= 0) body.seat = seat;
    this.request(
      makeMessage("JOIN", { seq: this.nextSeq(), session: this.session, body }),
    );
  }

  /** Submit an action id.  Returns false (and sends nothing) when input
   * is locked, it is not our turn, the id is not server-legal, or we
   * already acted on this round (double-click guard). */
  act(actionId: number): boolean {
    const view = this.latestView;
    if (this.locked || this.finished || view === null) return false;
    if (!isMyTurn(view, this.seat)) return false;
    if (!view.legal_actions.includes(actionId)) return false;
    if (view.round_count <= this.actedRound) return false;
    this.actedRound = view.round_count;
    this.pendingAction = actionId;
    this.request(
      makeMessage("ACT", {
        seq: this.nextSeq(),
        session: this.session,
        player: this.seat,
        body: { action: actionId },
      }),
    );
    return true;
  }

  handleRaw(raw: string) {
    let msg: Message;
    try {
      msg = decodeMessage(raw);
    } catch (err) {
      this.frozen = true;
      this.cb.onBanner?.(`malformed message from server: ${err}`);
      return;
    }
    this.handle(msg);
  }

  private unlock() {
    this.pendingSeq = null;
    this.pendingAction = null;
    this.cb.onLockChange?.(this.locked);
  }

  private handle(msg: Message) {
    switch (msg.type) {
      case "ACK": {
        if (msg.seq === this.pendingSeq) this.unlock();
        if (msg.body.session) this.session = msg.body.session;
        if (msg.body.seat !== undefined) this.seat = msg.body.seat;
        if (msg.body.version !== undefined && msg.body.version !== PROTOCOL_VERSION) {
          this.frozen = true;
          this.cb.onBanner?.(
            `server speaks protocol v${msg.body.version}, client v${PROTOCOL_VERSION}`,
          );
        }
        break;
      }
      case "STATE": {
        const view = msg.body.view as View;
        if (
          !view ||
          !Array.isArray(view.hand) ||
          !Array.isArray(view.legal_actions) ||
          typeof view.target !== "string"
        ) {
          this.frozen = true;
          this.cb.onBanner?.("malformed STATE from server");
          return;
        }
        this.latestView = view;
        this.cb.onState?.(view, (msg.body.events ?? []) as GameEvent[]);
        break;
      }
      case "RESULT": {
        this.finished = true;
        this.unlock();
        this.cb.onResult?.(msg.body as { winner: number; rewards: number[] });
        break;
      }
      case "ERROR": {
        const reason = msg.body.reason ?? "unknown error";
        if (msg.seq === this.pendingSeq) {
          // restore interactivity; allow retrying the same round
          if (this.pendingAction !== null) this.actedRound -= 1;
          this.unlock();
        }
        if (String(reason).startsWith("version_mismatch")) {
          this.frozen = true;
          this.cb.onBanner?.("protocol version mismatch with server");
        } else {
          this.cb.onServerError?.(String(reason));
        }
        break;
      }
      default:
        this.cb.onLog?.(`ignoring ${msg.type}`);
    }
  }
}
