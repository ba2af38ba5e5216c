/**
 * Explorer view state and its URL serialization.
 *
 * The whole view is a pure function of this state, and the state round
 * trips through the URL query string so any view is shareable: decoding
 * what we encoded always reproduces the identical state.
 */

export type Field = "anchor" | "fulltext";
export type Granularity = "day" | "week";
export type Match = "term" | "entity";

export const MAX_QUERIES = 3;

export interface ExplorerState {
  /** up to MAX_QUERIES active queries, rendered as overlaid series */
  queries: string[];
  match: Match;
  field: Field;
  granularity: Granularity;
  /** half-open [from, to) range, YYYY-MM-DD */
  from: string;
  to: string;
  /** optional entity pair for the co-occurrence panel */
  pair: [string, string] | null;
}

export const DEFAULT_RANGE = { from: "2011-01-01", to: "2013-07-13" };

export function defaultState(): ExplorerState {
  return {
    queries: [],
    match: "term",
    field: "anchor",
    granularity: "week",
    from: DEFAULT_RANGE.from,
    to: DEFAULT_RANGE.to,
    pair: null,
  };
}

const DATE_RE = /^\d{4}-\d{2}-\d{2}$/;

function normQueries(queries: string[]): string[] {
  const out: string[] = [];
  for (const raw of queries) {
    const q = raw.trim();
    if (q && !out.includes(q)) out.push(q);
    if (out.length >= MAX_QUERIES) break;
  }
  return out;
}

/** Canonical copy: trimmed, deduplicated, clamped, defaults filled in. */
export function normalize(state: ExplorerState): ExplorerState {
  const base = defaultState();
  return {
    queries: normQueries(state.queries),
    match: state.match === "entity" ? "entity" : "term",
    field: state.field === "fulltext" ? "fulltext" : "anchor",
    granularity: state.granularity === "day" ? "day" : "week",
    from: DATE_RE.test(state.from) ? state.from : base.from,
    to: DATE_RE.test(state.to) ? state.to : base.to,
    pair:
      state.pair && state.pair[0].trim() && state.pair[1].trim()
        ? [state.pair[0].trim(), state.pair[1].trim()]
        : null,
  };
}

export function encodeState(state: ExplorerState): string {
  const s = normalize(state);
  const params = new URLSearchParams();
  for (const q of s.queries) params.append("q", q);
  params.set("match", s.match);
  params.set("field", s.field);
  params.set("granularity", s.granularity);
  params.set("from", s.from);
  params.set("to", s.to);
  if (s.pair) {
    params.set("a", s.pair[0]);
    params.set("b", s.pair[1]);
  }
  return params.toString();
}

export function decodeState(query: string): ExplorerState {
  const params = new URLSearchParams(query);
  const base = defaultState();
  const a = params.get("a");
  const b = params.get("b");
  return normalize({
    queries: params.getAll("q"),
    match: (params.get("match") ?? base.match) as Match,
    field: (params.get("field") ?? base.field) as Field,
    granularity: (params.get("granularity") ?? base.granularity) as Granularity,
    from: params.get("from") ?? base.from,
    to: params.get("to") ?? base.to,
    pair: a !== null && b !== null ? [a, b] : null,
  });
}

export function withQueryAdded(state: ExplorerState, q: string): ExplorerState {
  return normalize({ ...state, queries: [...state.queries, q] });
}

export function withQueryRemoved(state: ExplorerState, q: string): ExplorerState {
  return normalize({ ...state, queries: state.queries.filter((x) => x !== q) });
}

export function statesEqual(a: ExplorerState, b: ExplorerState): boolean {
  return encodeState(a) === encodeState(b);
}
