/**
 * SVG renderers for the explorer panels.
 *
 * Every displayed number is taken verbatim from a service payload; the
 * renderers never re-bucket or aggregate. Counts are also mirrored into
 * data-count attributes so tests (and curious users) can read exactly
 * what the service said.
 */

import type { Bucket, CooccurPayload, TermEntry, TimelinePayload } from "./api.js";

export const SERIES_COLORS = ["#2563eb", "#dc2626", "#059669"];

const W = 720;
const H = 200;
const PAD = { left: 44, right: 12, top: 12, bottom: 24 };

function scaleY(count: number, max: number): number {
  const usable = H - PAD.top - PAD.bottom;
  return H - PAD.bottom - (max === 0 ? 0 : (count / max) * usable);
}

function scaleX(i: number, n: number): number {
  const usable = W - PAD.left - PAD.right;
  return PAD.left + (n <= 1 ? 0 : (i / (n - 1)) * usable);
}

function el(name: string, attrs: Record<string, string>, text?: string): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${escapeAttr(v)}"`)
    .join(" ");
  return text === undefined
    ? `<${name} ${parts}/>`
    : `<${name} ${parts}>${escapeText(text)}</${name}>`;
}

function escapeText(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function escapeAttr(s: string): string {
  return escapeText(s).replace(/"/g, "&quot;");
}

export interface Series {
  label: string;
  color: string;
  buckets: Bucket[];
}

/** Overlaid line chart; one polyline per series, shared scale. */
export function renderTimelineChart(container: HTMLElement, series: Series[]): void {
  const max = Math.max(1, ...series.flatMap((s) => s.buckets.map((b) => b.count)));
  const n = Math.max(...series.map((s) => s.buckets.length), 0);
  const pieces: string[] = [];
  pieces.push(el("line", {
    x1: String(PAD.left), y1: String(H - PAD.bottom),
    x2: String(W - PAD.right), y2: String(H - PAD.bottom),
    stroke: "#999", "stroke-width": "1",
  }));
  pieces.push(el("text", {
    x: "4", y: String(PAD.top + 10), class: "axis", "data-axis-max": String(max),
  }, String(max)));
  for (const s of series) {
    const points = s.buckets
      .map((b, i) => `${scaleX(i, n).toFixed(1)},${scaleY(b.count, max).toFixed(1)}`)
      .join(" ");
    pieces.push(el("polyline", {
      points, fill: "none", stroke: s.color, "stroke-width": "1.5",
      "data-series": s.label,
    }));
  }
  const labels = series
    .map((s) =>
      `<span class="legend" style="color:${s.color}" data-legend="${escapeAttr(s.label)}">${escapeText(s.label)}</span>`)
    .join(" ");
  const first = series[0];
  const ticks = first && first.buckets.length
    ? `<span class="tick">${escapeText(first.buckets[0]!.start)}</span>` +
      `<span class="tick tick-end">${escapeText(first.buckets[first.buckets.length - 1]!.start)}</span>`
    : "";
  container.innerHTML =
    `<div class="legend-row">${labels}</div>` +
    `<svg viewBox="0 0 ${W} ${H}" role="img">${pieces.join("")}</svg>` +
    `<div class="tick-row">${ticks}</div>` +
    renderBucketTable(series);
}

/** Per-series bucket counts, verbatim; hidden by default, used by tests
 * and the details toggle. */
function renderBucketTable(series: Series[]): string {
  const rows = series
    .map((s) => {
      const cells = s.buckets
        .map(
          (b) =>
            `<td data-series="${escapeAttr(s.label)}" data-start="${escapeAttr(b.start)}" data-count="${b.count}">${b.count}</td>`,
        )
        .join("");
      return `<tr><th>${escapeText(s.label)}</th>${cells}</tr>`;
    })
    .join("");
  return `<details class="bucket-details"><summary>buckets</summary><table class="buckets">${rows}</table></details>`;
}

export function renderTimelines(
  container: HTMLElement,
  payloads: TimelinePayload[],
): void {
  renderTimelineChart(
    container,
    payloads.map((p, i) => ({
      label: p.q,
      color: SERIES_COLORS[i % SERIES_COLORS.length]!,
      buckets: p.buckets,
    })),
  );
}

export function renderTopTerms(container: HTMLElement, entries: TermEntry[]): void {
  if (!entries.length) {
    container.innerHTML = `<p class="empty">no terms in range</p>`;
    return;
  }
  const rows = entries
    .map(
      (e, i) =>
        `<tr><td class="rank">${i + 1}</td>` +
        `<td data-term="${escapeAttr(e.term)}">${escapeText(e.term)}</td>` +
        `<td class="score" data-score="${e.score}">${e.score}</td></tr>`,
    )
    .join("");
  container.innerHTML =
    `<table class="top-terms"><thead><tr><th>#</th><th>term</th><th>score</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
}

function argmaxBucket(buckets: Bucket[]): number {
  let best = -1;
  let bestCount = -1;
  buckets.forEach((b, i) => {
    if (b.count > bestCount) {
      best = i;
      bestCount = b.count;
    }
  });
  return bestCount > 0 ? best : -1;
}

/** Two aligned entity series plus the overlap; the peak-overlap bucket
 * is marked visually and exposed as data-peak-start. */
export function renderCooccur(container: HTMLElement, payload: CooccurPayload): void {
  const peak = argmaxBucket(payload.overlap);
  const series: Series[] = [
    { label: payload.a.key, color: SERIES_COLORS[0]!, buckets: payload.a.buckets },
    { label: payload.b.key, color: SERIES_COLORS[1]!, buckets: payload.b.buckets },
    { label: "overlap", color: "#9333ea", buckets: payload.overlap },
  ];
  const max = Math.max(1, ...series.flatMap((s) => s.buckets.map((b) => b.count)));
  const n = payload.overlap.length;
  const pieces: string[] = [];
  if (peak >= 0) {
    const x = scaleX(peak, n);
    pieces.push(el("line", {
      x1: x.toFixed(1), y1: String(PAD.top), x2: x.toFixed(1),
      y2: String(H - PAD.bottom), stroke: "#f59e0b", "stroke-width": "6",
      opacity: "0.45", class: "peak-marker",
    }));
  }
  for (const s of series) {
    const points = s.buckets
      .map((b, i) => `${scaleX(i, n).toFixed(1)},${scaleY(b.count, max).toFixed(1)}`)
      .join(" ");
    pieces.push(el("polyline", {
      points, fill: "none", stroke: s.color, "stroke-width": "1.5",
      "data-series": s.label,
    }));
  }
  const peakStart = peak >= 0 ? payload.overlap[peak]!.start : "";
  const legend = series
    .map((s) => `<span class="legend" style="color:${s.color}">${escapeText(s.label)}</span>`)
    .join(" ");
  container.innerHTML =
    `<div class="legend-row">${legend}` +
    (peak >= 0
      ? ` <span class="peak-label" data-peak-start="${escapeAttr(peakStart)}">peak overlap: ${escapeText(peakStart)}</span>`
      : "") +
    `</div><svg viewBox="0 0 ${W} ${H}" role="img">${pieces.join("")}</svg>` +
    renderBucketTable(series);
}
