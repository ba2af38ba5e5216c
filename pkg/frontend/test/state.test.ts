import { describe, expect, it } from "vitest";

import {
  decodeState,
  defaultState,
  encodeState,
  normalize,
  statesEqual,
  withQueryAdded,
  withQueryRemoved,
  MAX_QUERIES,
  type ExplorerState,
} from "../src/state.js";

function roundTrip(state: ExplorerState): ExplorerState {
  return decodeState(encodeState(state));
}

describe("state URL round-trip", () => {
  it("reproduces the default state", () => {
    expect(roundTrip(defaultState())).toEqual(normalize(defaultState()));
  });

  it("reproduces a fully populated state", () => {
    const state: ExplorerState = {
      queries: ["obama", "euro", "olympic"],
      match: "term",
      field: "anchor",
      granularity: "day",
      from: "2011-01-01",
      to: "2013-07-13",
      pair: ["usain_bolt", "mo_farah"],
    };
    expect(roundTrip(state)).toEqual(state);
    expect(statesEqual(roundTrip(state), state)).toBe(true);
  });

  it("survives unicode and separators in queries", () => {
    const state = normalize({
      ...defaultState(),
      queries: ["straße", "a&b", "x=y"],
      pair: ["ünï corn", "q?z"],
    });
    expect(roundTrip(state)).toEqual(state);
  });

  it("is idempotent: encode(decode(encode(s))) == encode(s)", () => {
    const states = [
      defaultState(),
      normalize({ ...defaultState(), queries: ["one"], granularity: "day" }),
      normalize({ ...defaultState(), pair: ["a", "b"], field: "fulltext" }),
    ];
    for (const s of states) {
      const once = encodeState(s);
      expect(encodeState(decodeState(once))).toBe(once);
    }
  });
});

describe("normalization", () => {
  it("clamps queries to the maximum and deduplicates", () => {
    const state = normalize({
      ...defaultState(),
      queries: ["a", "b", "a", "c", "d", "e"],
    });
    expect(state.queries).toEqual(["a", "b", "c"]);
    expect(state.queries.length).toBe(MAX_QUERIES);
  });

  it("drops blank queries and trims", () => {
    expect(normalize({ ...defaultState(), queries: ["  ", " x "] }).queries).toEqual([
      "x",
    ]);
  });

  it("falls back to defaults for bad enum and date values", () => {
    const state = decodeState("field=banana&granularity=hour&from=nope&to=2012-01-01");
    expect(state.field).toBe("anchor");
    expect(state.granularity).toBe("week");
    expect(state.from).toBe(defaultState().from);
    expect(state.to).toBe("2012-01-01");
  });

  it("requires both halves of a comparison pair", () => {
    expect(normalize({ ...defaultState(), pair: ["a", " "] }).pair).toBeNull();
    expect(decodeState("a=only").pair).toBeNull();
  });
});

describe("query add/remove", () => {
  it("adds up to the cap, removes by value", () => {
    let state = defaultState();
    for (const q of ["a", "b", "c", "d"]) state = withQueryAdded(state, q);
    expect(state.queries).toEqual(["a", "b", "c"]);
    state = withQueryRemoved(state, "b");
    expect(state.queries).toEqual(["a", "c"]);
  });
});
