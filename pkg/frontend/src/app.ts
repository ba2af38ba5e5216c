/**
 * Explorer wiring: controls at the top, three panels below (timelines,
 * top terms, co-occurrence). Each state change re-renders from the
 * service; the URL always carries the serialized state. Panels fetch
 * independently with per-panel cancellation.
 */

import { ApiClient, ApiError, PanelFetcher } from "./api.js";
import type { TimelinePayload } from "./api.js";
import { renderCooccur, renderTimelines, renderTopTerms } from "./charts.js";
import {
  ExplorerState,
  MAX_QUERIES,
  decodeState,
  defaultState,
  encodeState,
  normalize,
  statesEqual,
  withQueryAdded,
  withQueryRemoved,
} from "./state.js";

export interface AppOptions {
  api: ApiClient;
  /** pushes the serialized state somewhere shareable */
  onStateChange?: (encoded: string) => void;
}

const PANELS = ["timelines", "topterms", "cooccur", "suggest"] as const;
type Panel = (typeof PANELS)[number];

export class ExplorerApp {
  state: ExplorerState;
  private fetchers: Record<Panel, PanelFetcher> = {
    timelines: new PanelFetcher(),
    topterms: new PanelFetcher(),
    cooccur: new PanelFetcher(),
    suggest: new PanelFetcher(),
  };
  /** resolves whenever all panel refreshes spawned so far settle */
  refreshing: Promise<void> = Promise.resolve();

  constructor(
    private root: HTMLElement,
    private options: AppOptions,
    initial?: ExplorerState,
  ) {
    this.state = normalize(initial ?? defaultState());
    this.renderShell();
    this.bindControls();
  }

  /** builds the app from a URL query string */
  static fromQueryString(root: HTMLElement, options: AppOptions, qs: string): ExplorerApp {
    return new ExplorerApp(root, options, decodeState(qs));
  }

  private q(selector: string): HTMLElement {
    const found = this.root.querySelector(selector);
    if (!found) throw new Error(`missing element ${selector}`);
    return found as HTMLElement;
  }

  private renderShell(): void {
    this.root.innerHTML = `
      <header class="controls">
        <form id="query-form" autocomplete="off">
          <input id="query-input" type="text" placeholder="add a query (term or entity key)" />
          <button type="submit">add</button>
          <ul id="suggestions" class="suggestions" hidden></ul>
        </form>
        <div id="chips" class="chips"></div>
        <div class="selectors">
          <label>match
            <select id="match">
              <option value="term">term</option>
              <option value="entity">entity</option>
            </select>
          </label>
          <label>field
            <select id="field">
              <option value="anchor">anchor</option>
              <option value="fulltext">fulltext</option>
            </select>
          </label>
          <label>granularity
            <select id="granularity">
              <option value="week">week</option>
              <option value="day">day</option>
            </select>
          </label>
          <label>from <input id="from" type="date" /></label>
          <label>to <input id="to" type="date" /></label>
        </div>
        <div class="selectors">
          <label>compare <input id="pair-a" type="text" placeholder="entity a" /></label>
          <label>with <input id="pair-b" type="text" placeholder="entity b" /></label>
          <button id="pair-go" type="button">compare</button>
        </div>
        <div id="banner" class="banner" hidden></div>
      </header>
      <section class="panel"><h2>timelines</h2><div id="timelines"></div></section>
      <section class="panel"><h2>top terms</h2><div id="topterms"></div></section>
      <section class="panel"><h2>co-occurrence</h2><div id="cooccur"></div></section>
    `;
    this.syncControls();
  }

  private syncControls(): void {
    (this.q("#match") as HTMLSelectElement).value = this.state.match;
    (this.q("#field") as HTMLSelectElement).value = this.state.field;
    (this.q("#granularity") as HTMLSelectElement).value = this.state.granularity;
    (this.q("#from") as HTMLInputElement).value = this.state.from;
    (this.q("#to") as HTMLInputElement).value = this.state.to;
    if (this.state.pair) {
      (this.q("#pair-a") as HTMLInputElement).value = this.state.pair[0];
      (this.q("#pair-b") as HTMLInputElement).value = this.state.pair[1];
    }
    const chips = this.q("#chips");
    chips.innerHTML = this.state.queries
      .map(
        (q) =>
          `<span class="chip" data-query="${q.replace(/"/g, "&quot;")}">${q}` +
          `<button class="remove" data-remove="${q.replace(/"/g, "&quot;")}">×</button></span>`,
      )
      .join("");
    for (const btn of Array.from(chips.querySelectorAll("button.remove"))) {
      btn.addEventListener("click", () => {
        this.setState(withQueryRemoved(this.state, (btn as HTMLElement).dataset.remove ?? ""));
      });
    }
  }

  private bindControls(): void {
    const form = this.q("#query-form") as HTMLFormElement;
    const input = this.q("#query-input") as HTMLInputElement;
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      const value = input.value.trim();
      if (!value) return;
      if (this.state.queries.length >= MAX_QUERIES) {
        this.banner(`at most ${MAX_QUERIES} simultaneous queries; remove one first`);
        return;
      }
      input.value = "";
      this.hideSuggestions();
      this.setState(withQueryAdded(this.state, value));
    });
    input.addEventListener("input", () => {
      const prefix = input.value.trim();
      if (prefix.length < 2) {
        this.hideSuggestions();
        return;
      }
      void this.loadSuggestions(prefix);
    });
    for (const [id, key] of [
      ["#match", "match"],
      ["#field", "field"],
      ["#granularity", "granularity"],
    ] as const) {
      this.q(id).addEventListener("change", () => {
        const value = (this.q(id) as HTMLSelectElement).value;
        this.setState({ ...this.state, [key]: value } as ExplorerState);
      });
    }
    for (const id of ["#from", "#to"] as const) {
      this.q(id).addEventListener("change", () => {
        this.setState({
          ...this.state,
          from: (this.q("#from") as HTMLInputElement).value,
          to: (this.q("#to") as HTMLInputElement).value,
        });
      });
    }
    this.q("#pair-go").addEventListener("click", () => {
      const a = (this.q("#pair-a") as HTMLInputElement).value.trim();
      const b = (this.q("#pair-b") as HTMLInputElement).value.trim();
      this.setState({ ...this.state, pair: a && b ? [a, b] : null });
    });
  }

  /** single entry point for state transitions; re-renders everything */
  setState(next: ExplorerState): void {
    const normalized = normalize(next);
    if (statesEqual(this.state, normalized)) {
      this.refresh();
      return;
    }
    this.state = normalized;
    this.options.onStateChange?.(encodeState(this.state));
    this.syncControls();
    this.refresh();
  }

  /** re-fetches every panel for the current state */
  refresh(): void {
    const jobs = [this.refreshTimelines(), this.refreshTopTerms(), this.refreshCooccur()];
    this.refreshing = Promise.allSettled(jobs).then(() => undefined);
  }

  private banner(message: string | null): void {
    const banner = this.q("#banner");
    if (message === null) {
      banner.setAttribute("hidden", "");
    } else {
      banner.removeAttribute("hidden");
      banner.textContent = message;
    }
  }

  private describe(err: unknown): string {
    if (err instanceof ApiError) return `${err.code}: ${err.message}`;
    return "service unreachable";
  }

  private async refreshTimelines(): Promise<void> {
    const target = this.q("#timelines");
    if (!this.state.queries.length) {
      // empty state: prompt, and no request is issued
      target.innerHTML = `<p class="empty" id="empty-prompt">add a query above to see its timeline</p>`;
      return;
    }
    const { field, match, granularity, from, to } = this.state;
    try {
      const payloads = await this.fetchers.timelines.issue(async (signal) => {
        const out: TimelinePayload[] = [];
        for (const q of this.state.queries) {
          out.push(
            await this.options.api.timeline(
              { q, field, match, granularity, from, to },
              signal,
            ),
          );
        }
        return out;
      });
      if (payloads === null) return; // superseded
      this.banner(null);
      renderTimelines(target, payloads);
    } catch (err) {
      this.banner(this.describe(err));
    }
  }

  private async refreshTopTerms(): Promise<void> {
    const target = this.q("#topterms");
    const first = this.state.queries[0];
    if (!first) {
      target.innerHTML = `<p class="empty">top terms appear once a query is active</p>`;
      return;
    }
    const { field, match, from, to } = this.state;
    try {
      const payload = await this.fetchers.topterms.issue((signal) =>
        this.options.api.topTerms(
          { q: first, field, match, k: "10", from, to },
          signal,
        ),
      );
      if (payload === null) return;
      renderTopTerms(target, payload.entries);
    } catch (err) {
      this.banner(this.describe(err));
    }
  }

  private async refreshCooccur(): Promise<void> {
    const target = this.q("#cooccur");
    if (!this.state.pair) {
      target.innerHTML = `<p class="empty">pick two entities to compare</p>`;
      return;
    }
    const [a, b] = this.state.pair;
    const { field, granularity, from, to } = this.state;
    try {
      const payload = await this.fetchers.cooccur.issue((signal) =>
        this.options.api.cooccur(
          { a, b, field, granularity, from, to, strict: "true" },
          signal,
        ),
      );
      if (payload === null) return;
      renderCooccur(target, payload);
    } catch (err) {
      if (err instanceof ApiError && err.code === "unknown-entity") {
        target.innerHTML = `<p class="empty" id="cooccur-miss">unknown entity; try the suggestions in the query box</p>`;
        return;
      }
      this.banner(this.describe(err));
    }
  }

  private async loadSuggestions(prefix: string): Promise<void> {
    try {
      const payload = await this.fetchers.suggest.issue((signal) =>
        this.options.api.entitySearch(prefix, signal),
      );
      if (payload === null) return;
      const list = this.q("#suggestions");
      if (!payload.entities.length) {
        this.hideSuggestions();
        return;
      }
      list.removeAttribute("hidden");
      list.innerHTML = payload.entities
        .slice(0, 8)
        .map(
          (e) =>
            `<li data-key="${e.key.replace(/"/g, "&quot;")}">${e.key}` +
            `<span class="count">${e.postings}</span></li>`,
        )
        .join("");
      for (const item of Array.from(list.querySelectorAll("li"))) {
        item.addEventListener("click", () => {
          this.hideSuggestions();
          (this.q("#query-input") as HTMLInputElement).value = "";
          this.setState(
            withQueryAdded(
              { ...this.state, match: "entity" },
              (item as HTMLElement).dataset.key ?? "",
            ),
          );
        });
      }
    } catch {
      this.hideSuggestions();
    }
  }

  private hideSuggestions(): void {
    const list = this.q("#suggestions");
    list.setAttribute("hidden", "");
    list.innerHTML = "";
  }
}

/** Browser bootstrap: state lives in the URL, range defaults come from
 * /health when the URL does not pin one. */
export async function boot(root: HTMLElement, api: ApiClient): Promise<ExplorerApp> {
  const app = ExplorerApp.fromQueryString(
    root,
    {
      api,
      onStateChange: (encoded) => {
        history.replaceState(null, "", `?${encoded}`);
      },
    },
    location.search.replace(/^\?/, ""),
  );
  if (!location.search) {
    try {
      const health = await api.health();
      if (health.time_span) {
        app.setState({
          ...app.state,
          from: health.time_span.min,
          to: nextDay(health.time_span.max),
        });
        return app;
      }
    } catch {
      // fall through: service down banner appears on first fetch
    }
  }
  app.refresh();
  return app;
}

export function nextDay(date: string): string {
  const dt = new Date(`${date}T00:00:00Z`);
  dt.setUTCDate(dt.getUTCDate() + 1);
  return dt.toISOString().slice(0, 10);
}
