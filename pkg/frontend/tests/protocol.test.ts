import { describe, expect, it } from "vitest";

import {
  DRAW_ACTION,
  actionIdsForCard,
  decodeMessage,
  describeAction,
  encodeMessage,
  makeMessage,
  parseCard,
  wildActionId,
} from "../src/protocol.js";

describe("message codec", () => {
  it("round-trips", () => {
    const msg = makeMessage("ACT", { seq: 4, session: "table-1", player: 2, body: { action: 9 } });
    expect(decodeMessage(encodeMessage(msg))).toEqual(msg);
  });

  it("rejects junk", () => {
    expect(() => decodeMessage("[1,2]")).toThrow();
    expect(() => decodeMessage('{"seq":1}')).toThrow();
  });
});

describe("card tokens", () => {
  it("parses colored cards", () => {
    expect(parseCard("R5")).toMatchObject({ color: "R", kind: 5 });
    expect(parseCard("GS")).toMatchObject({ color: "G", kind: 10 });
    expect(parseCard("YD2")).toMatchObject({ color: "Y", kind: 12 });
  });

  it("parses undeclared wilds", () => {
    expect(parseCard("W")).toMatchObject({ color: null, kind: 13 });
    expect(parseCard("W4")).toMatchObject({ color: null, kind: 14 });
  });

  it("rejects colorless non-wilds", () => {
    expect(() => parseCard("5")).toThrow();
    expect(() => parseCard("ZZ")).toThrow();
  });
});

describe("action-id table", () => {
  it("pins the fixed rows", () => {
    expect(actionIdsForCard(parseCard("RS"))).toEqual([10]);
    expect(actionIdsForCard(parseCard("GD2"))).toEqual([27]);
    expect(actionIdsForCard(parseCard("B0"))).toEqual([30]);
    expect(actionIdsForCard(parseCard("Y9"))).toEqual([54]);
  });

  it("wilds emit one id per declared color", () => {
    expect(actionIdsForCard(parseCard("W"))).toEqual([13, 28, 43, 58]);
    expect(actionIdsForCard(parseCard("W4"))).toEqual([14, 29, 44, 59]);
  });

  it("wild chooser maps declared colors to the table ids", () => {
    const wild = parseCard("W");
    expect(wildActionId(wild, "R")).toBe(13);
    expect(wildActionId(wild, "G")).toBe(28);
    expect(wildActionId(wild, "B")).toBe(43);
    expect(wildActionId(wild, "Y")).toBe(58);
    const wild4 = parseCard("W4");
    expect(wildActionId(wild4, "Y")).toBe(59);
  });

  it("describes actions", () => {
    expect(describeAction(DRAW_ACTION)).toBe("draw");
    expect(describeAction(10)).toBe("RS");
    expect(describeAction(59)).toBe("YW4");
  });
});
