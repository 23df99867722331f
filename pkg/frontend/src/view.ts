// DOM rendering: lobby, table, wild-color chooser, log, result screen.
// Pure view of the latest STATE; every click routes through GameClient.act.

import { GameClient, GameEvent, drawEnabled, handEntries, isMyTurn } from "./client.js";
import {
  COLORS,
  CardInfo,
  Color,
  DRAW_ACTION,
  View,
  describeAction,
  isWild,
  parseCard,
  wildActionId,
} from "./protocol.js";

const COLOR_NAMES: Record<Color, string> = { R: "red", G: "green", B: "blue", Y: "yellow" };

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

function cardLabel(card: CardInfo): string {
  if (card.kind <= 9) return String(card.kind);
  return ["skip", "rev", "+2", "wild", "wild+4"][card.kind - 10];
}

function cardClass(card: CardInfo): string {
  const color = card.color ? COLOR_NAMES[card.color] : "wild";
  return `card ${color}`;
}

export class TableScreen {
  private root: HTMLElement;
  private banner = el("div", "banner hidden");
  private lobby = el("div", "lobby");
  private table = el("div", "table hidden");
  private status = el("div", "status");
  private target = el("div", "target");
  private opponents = el("div", "opponents");
  private hand = el("div", "hand");
  private controls = el("div", "controls");
  private chooser = el("div", "chooser hidden");
  private logBox = el("div", "log");
  private result = el("div", "result hidden");
  private locked = false;

  constructor(root: HTMLElement, private client: GameClient) {
    this.root = root;
    root.append(this.banner, this.lobby, this.table, this.result);
    this.table.append(
      this.status, this.opponents, this.target,
      this.hand, this.controls, this.chooser, this.logBox,
    );
  }

  showBanner(text: string) {
    this.banner.textContent = text;
    this.banner.classList.remove("hidden");
  }

  log(line: string) {
    const entry = el("div", "log-line", line);
    this.logBox.prepend(entry);
    while (this.logBox.childElementCount > 60) this.logBox.lastChild?.remove();
  }

  setLocked(locked: boolean) {
    this.locked = locked;
    this.table.classList.toggle("locked", locked);
  }

  renderLobby(onCreate: (players: number, bots: number) => void, onJoin: (session: string) => void) {
    this.lobby.replaceChildren();
    const title = el("h1", "", "uno-rl");
    const createRow = el("div", "row");
    const playersInput = el("input");
    playersInput.type = "number";
    playersInput.min = "2";
    playersInput.max = "10";
    playersInput.value = "3";
    const createBtn = el("button", "", "create table vs bots");
    createBtn.onclick = () => {
      const n = Math.max(2, Math.min(10, Number(playersInput.value) || 3));
      onCreate(n, n - 1);
    };
    createRow.append(el("span", "", "players:"), playersInput, createBtn);
    const joinRow = el("div", "row");
    const sessionInput = el("input");
    sessionInput.placeholder = "table id, e.g. table-1";
    const joinBtn = el("button", "", "join table");
    joinBtn.onclick = () => sessionInput.value && onJoin(sessionInput.value.trim());
    joinRow.append(sessionInput, joinBtn);
    this.lobby.append(title, createRow, joinRow);
  }

  enterTable() {
    this.lobby.classList.add("hidden");
    this.table.classList.remove("hidden");
  }

  renderState(view: View, events: GameEvent[]) {
    this.enterTable();
    this.chooser.classList.add("hidden");
    for (const ev of events) {
      this.log(`seat ${ev.player} played ${describeAction(ev.action)}`);
    }

    const mine = isMyTurn(view, this.client.seat);
    this.status.textContent = mine
      ? `your turn (seat ${this.client.seat})`
      : `waiting for seat ${view.current_player}`;
    this.status.classList.toggle("my-turn", mine);

    this.opponents.replaceChildren();
    view.card_counts.forEach((count, seat) => {
      if (seat === this.client.seat) return;
      const chip = el("div", "opponent", `seat ${seat}: ${count} cards`);
      if (seat === view.current_player) chip.classList.add("active");
      this.opponents.append(chip);
    });

    this.target.replaceChildren(el("span", "", "target: "));
    this.target.append(this.cardNode(view.target));

    this.hand.replaceChildren();
    for (const entry of handEntries(view)) {
      const node = this.cardNode(entry.card.token);
      const clickable = mine && entry.enabledIds.length > 0;
      node.classList.toggle("enabled", clickable);
      (node as HTMLButtonElement).disabled = !clickable;
      if (clickable) {
        node.onclick = () => {
          if (this.locked) return;
          if (isWild(entry.card) && entry.enabledIds.length > 1) {
            this.openChooser(entry.card, entry.enabledIds);
          } else {
            this.client.act(entry.enabledIds[0]);
          }
        };
      }
      this.hand.append(node);
    }

    this.controls.replaceChildren();
    const draw = el("button", "draw-button", "draw a card");
    draw.disabled = !(mine && drawEnabled(view));
    draw.onclick = () => this.client.act(DRAW_ACTION);
    this.controls.append(draw);
  }

  private cardNode(token: string): HTMLButtonElement {
    const node = el("button");
    try {
      const card = parseCard(token);
      node.className = cardClass(card);
      node.textContent = cardLabel(card);
    } catch {
      node.className = "card";
      node.textContent = token;
    }
    return node;
  }

  private openChooser(card: CardInfo, enabledIds: number[]) {
    this.chooser.replaceChildren(el("span", "", "declare a color: "));
    for (const color of COLORS) {
      const id = wildActionId(card, color);
      if (!enabledIds.includes(id)) continue;
      const btn = el("button", `chooser-btn ${COLOR_NAMES[color]}`, COLOR_NAMES[color]);
      btn.onclick = () => {
        this.chooser.classList.add("hidden");
        this.client.act(id);
      };
      this.chooser.append(btn);
    }
    this.chooser.classList.remove("hidden");
  }

  renderError(reason: string) {
    this.log(`server: ${reason}`);
    const toast = el("div", "toast", reason);
    this.root.append(toast);
    setTimeout(() => toast.remove(), 2500);
  }

  renderResult(body: { winner: number; rewards: number[] }) {
    this.result.replaceChildren();
    const mine = body.winner === this.client.seat;
    this.result.append(
      el("h2", "", mine ? "you win!" : `seat ${body.winner} wins`),
      el("div", "", `rewards: ${body.rewards.join(", ")}`),
    );
    const again = el("button", "", "back to lobby");
    again.onclick = () => location.reload();
    this.result.append(again);
    this.result.classList.remove("hidden");
    this.table.classList.add("locked");
  }
}
