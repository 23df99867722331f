// Browser entry point.  Query parameters configure the connection:
//   ?ws=ws://host:port   server address (default: same host, port 47702)
//   &table=table-1       join an existing table instead of showing create
//   &seat=0              reconnect token: re-bind this seat

import { ClientCallbacks, GameClient } from "./client.js";
import { TableScreen } from "./view.js";

function wsAddress(): string {
  const params = new URLSearchParams(location.search);
  const given = params.get("ws");
  if (given) return given;
  return `ws://${location.hostname}:47702`;
}

function start() {
  const root = document.getElementById("app");
  if (!root) throw new Error("missing #app element");
  const params = new URLSearchParams(location.search);

  const socket = new WebSocket(wsAddress());
  // callbacks are filled in below, once the screen exists; GameClient
  // keeps the reference
  const callbacks: ClientCallbacks = {};
  const client = new GameClient({ send: (text) => socket.send(text) }, callbacks);
  const screen = new TableScreen(root, client);
  callbacks.onState = (view, events) => screen.renderState(view, events);
  callbacks.onResult = (body) => screen.renderResult(body);
  callbacks.onServerError = (reason) => screen.renderError(reason);
  callbacks.onBanner = (text) => screen.showBanner(text);
  callbacks.onLockChange = (locked) => screen.setLocked(locked);
  callbacks.onLog = (line) => screen.log(line);

  socket.onmessage = (ev) => client.handleRaw(String(ev.data));
  socket.onclose = () => screen.showBanner("connection closed; reload to retry");
  socket.onerror = () => screen.showBanner(`cannot reach ${wsAddress()}`);
  socket.onopen = () => {
    client.hello();
    const table = params.get("table");
    const seat = params.get("seat");
    if (table) {
      client.join(table, seat !== null ? Number(seat) : undefined);
      screen.enterTable();
    } else {
      screen.renderLobby(
        (players, bots) => {
          client.createTable(players, bots);
          // join the table we just created once its ACK assigns the id
          const poll = setInterval(() => {
            if (client.session) {
              clearInterval(poll);
              client.join();
            }
          }, 50);
        },
        (session) => client.join(session),
      );
    }
  };
}

window.addEventListener("DOMContentLoaded", start);
