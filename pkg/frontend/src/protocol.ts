// Wire types shared with the Python service (see docs/protocol.md).

export const PROTOCOL_VERSION = 1;

export type MessageType =
  | "HELLO" | "CREATE" | "JOIN" | "STATE" | "ACT" | "ACK" | "RESULT" | "ERROR" | "PING";

export interface Message {
  v: number;
  type: MessageType;
  seq: number;
  session: string;
  player: number;
  body: Record<string, any>;
}

export interface View {
  seat: number;
  hand: string[];
  target: string;
  legal_actions: number[];
  num_players: number;
  current_player: number;
  direction: number;
  card_counts: number[];
  round_count: number;
}

export function makeMessage(
  type: MessageType,
  fields: Partial<Omit<Message, "type" | "v">> = {},
): Message {
  return {
    v: PROTOCOL_VERSION,
    type,
    seq: fields.seq ?? 0,
    session: fields.session ?? "",
    player: fields.player ?? -1,
    body: fields.body ?? {},
  };
}

export function encodeMessage(msg: Message): string {
  return JSON.stringify(msg);
}

export function decodeMessage(raw: string): Message {
  const data = JSON.parse(raw);
  if (typeof data !== "object" || data === null) throw new Error("not an object");
  if (typeof data.v !== "number" || typeof data.type !== "string") {
    throw new Error("missing v/type");
  }
  return {
    v: data.v,
    type: data.type as MessageType,
    seq: data.seq ?? 0,
    session: data.session ?? "",
    player: data.player ?? -1,
    body: data.body ?? {},
  };
}

// --- card tokens and the fixed action-id table ---

export const COLORS = ["R", "G", "B", "Y"] as const;
export type Color = (typeof COLORS)[number];

const COLOR_OFFSET: Record<Color, number> = { R: 0, G: 15, B: 30, Y: 45 };
const KIND_CODES = ["0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "S", "R", "D2", "W", "W4"];

export const DRAW_ACTION = 60;

export interface CardInfo {
  color: Color | null; // null: undeclared wild in hand
  kind: number;        // 0-9 ranks, 10 skip, 11 reverse, 12 draw2, 13 wild, 14 wild4
  token: string;
}

export function parseCard(token: string): CardInfo {
  const head = token[0];
  const color = (COLORS as readonly string[]).includes(head) ? (head as Color) : null;
  const code = color === null ? token : token.slice(1);
  const kind = KIND_CODES.indexOf(code);
  if (kind < 0) throw new Error(`bad card token: ${token}`);
  if (color === null && kind < 13) throw new Error(`colorless non-wild: ${token}`);
  return { color, kind, token };
}

export function isWild(card: CardInfo): boolean {
  return card.kind >= 13;
}

/** Action ids this hand card can emit: one for a colored card, four
 * (one per declared color) for an undeclared wild. */
export function actionIdsForCard(card: CardInfo): number[] {
  if (card.color !== null) return [COLOR_OFFSET[card.color] + card.kind];
  return COLORS.map((c) => COLOR_OFFSET[c] + card.kind);
}

/** The specific id for a wild played with a declared color. */
export function wildActionId(card: CardInfo, declared: Color): number {
  return COLOR_OFFSET[declared] + card.kind;
}

export function describeAction(id: number): string {
  if (id === DRAW_ACTION) return "draw";
  const color = COLORS[Math.floor(id / 15)];
  return color + KIND_CODES[id % 15];
}
