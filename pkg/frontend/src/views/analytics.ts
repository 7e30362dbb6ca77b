// Analytics view: misconception counts as a sortable table and a bar chart.
// The chart is plain proportional divs so it renders anywhere and stays
// trivially testable.

import { escapeHtml } from "../markdown.js";
import type { Stats } from "../types.js";

export type SortKey = "code" | "count";

export interface SortState {
  key: SortKey;
  direction: 1 | -1;
}

export const DEFAULT_SORT: SortState = { key: "code", direction: 1 };

export function sortedCounts(
  stats: Stats,
  sort: SortState,
): [string, number][] {
  const entries = Object.entries(stats.counts);
  entries.sort((a, b) => {
    const cmp =
      sort.key === "code" ? a[0].localeCompare(b[0]) : a[1] - b[1];
    return cmp !== 0 ? cmp * sort.direction : a[0].localeCompare(b[0]);
  });
  return entries;
}

export function renderStatsTable(stats: Stats, sort: SortState): string {
  const arrow = sort.direction === 1 ? "(asc)" : "(desc)";
  const mark = (key: SortKey) => (sort.key === key ? ` ${arrow}` : "");
  const rows = sortedCounts(stats, sort)
    .map(
      ([code, count]) =>
        `<tr data-code="${escapeHtml(code)}">` +
        `<td>${escapeHtml(code)}</td><td class="count">${count}</td></tr>`,
    )
    .join("");
  return (
    `<table class="stats-table" id="stats-table">` +
    `<thead><tr>` +
    `<th><button type="button" data-sort="code">Misconception${mark("code")}</button></th>` +
    `<th><button type="button" data-sort="count">Count${mark("count")}</button></th>` +
    `</tr></thead><tbody>${rows}</tbody></table>`
  );
}

export function renderBarChart(stats: Stats): string {
  const entries = Object.entries(stats.counts);
  const max = Math.max(1, ...entries.map(([, count]) => count));
  const bars = entries
    .map(([code, count]) => {
      const width = Math.round((count / max) * 100);
      return (
        `<div class="bar-row" data-code="${escapeHtml(code)}">` +
        `<span class="bar-label">${escapeHtml(code)}</span>` +
        `<span class="bar" style="width: ${width}%"></span>` +
        `<span class="bar-value">${count}</span></div>`
      );
    })
    .join("");
  return `<div class="bar-chart" id="bar-chart">${bars}</div>`;
}

export function renderTotals(stats: Stats): string {
  return `<p class="totals">Submissions for this reference: <strong>${stats.total_submissions}</strong></p>`;
}
