// Application bootstrap: hash routing between the submit and analytics
// views, event wiring, and error banners. All feedback and analytics text
// comes from the service verbatim; this file only moves it around.

import { ApiClient, ApiError } from "./api.js";
import { escapeHtml } from "./markdown.js";
import {
  DEFAULT_SORT,
  renderBarChart,
  renderStatsTable,
  renderTotals,
  SortState,
} from "./views/analytics.js";
import {
  renderDiagnostics,
  renderFeedback,
  renderOfflineBadge,
  renderReferencePicker,
} from "./views/submit.js";
import type { ReferenceSummary, Stats, SubmissionResponse } from "./types.js";

// Trivial shared token for the instructor form; real authentication is out
// of scope. Instructors get the value from their course material.
const INSTRUCTOR_TOKEN = "open-sesame";

const client = new ApiClient("");

interface State {
  references: ReferenceSummary[];
  selectedReference: string | null;
  lastResponse: SubmissionResponse | null;
  showEducator: boolean;
  pending: boolean;
  sort: SortState;
  stats: Stats | null;
}

const state: State = {
  references: [],
  selectedReference: null,
  lastResponse: null,
  showEducator: false,
  pending: false,
  sort: { ...DEFAULT_SORT },
  stats: null,
};

function el(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
}

function banner(target: HTMLElement, error: unknown): void {
  const apiError =
    error instanceof ApiError
      ? error
      : new ApiError(0, "unexpected", String(error));
  const label =
    apiError.code === "unknown_reference" ? "unknown reference" : apiError.code;
  target.innerHTML = `<p class="error-banner">${escapeHtml(label)}: ${escapeHtml(
    apiError.message,
  )}</p>`;
}

async function refreshHealth(): Promise<void> {
  try {
    const health = await client.health();
    el("health-badge").innerHTML = renderOfflineBadge(health.offline);
  } catch {
    el("health-badge").innerHTML =
      '<span class="badge badge-down">service unreachable</span>';
  }
}

async function refreshReferences(): Promise<void> {
  try {
    state.references = await client.listReferences();
    if (
      state.selectedReference === null &&
      state.references.length > 0 &&
      state.references[0] !== undefined
    ) {
      state.selectedReference = state.references[0].id;
    }
    el("picker-slot").innerHTML = renderReferencePicker(
      state.references,
      state.selectedReference ?? undefined,
    );
  } catch (error) {
    banner(el("picker-slot"), error);
  }
}

async function submitDiagram(plantuml: string): Promise<void> {
  if (!state.selectedReference || state.pending) return;
  state.pending = true;
  const button = el("submit-button") as HTMLButtonElement;
  button.disabled = true;
  const output = el("result-slot");
  try {
    const response = await client.submit(state.selectedReference, plantuml);
    state.lastResponse = response;
    output.innerHTML = renderFeedback(response, state.showEducator);
  } catch (error) {
    state.lastResponse = null;
    if (error instanceof ApiError) {
      output.innerHTML = renderDiagnostics(error);
    } else {
      banner(output, error);
    }
  } finally {
    state.pending = false;
    button.disabled = false;
  }
}

function wireSubmitView(): void {
  el("picker-slot").addEventListener("change", (event) => {
    const target = event.target as HTMLSelectElement;
    if (target.id === "reference-picker") {
      state.selectedReference = target.value;
    }
  });

  const fileInput = el("file-input") as HTMLInputElement;
  fileInput.addEventListener("change", async () => {
    const file = fileInput.files?.[0];
    if (!file) return;
    const text = await file.text();
    (el("source-input") as HTMLTextAreaElement).value = text;
  });

  el("submit-button").addEventListener("click", () => {
    const source = (el("source-input") as HTMLTextAreaElement).value;
    if (source.trim() === "") return;
    void submitDiagram(source);
  });

  const toggle = el("educator-toggle") as HTMLInputElement;
  toggle.addEventListener("change", () => {
    state.showEducator = toggle.checked;
    if (state.lastResponse) {
      el("result-slot").innerHTML = renderFeedback(
        state.lastResponse,
        state.showEducator,
      );
    }
  });

  el("instructor-open").addEventListener("click", () => {
    const token = (el("instructor-token") as HTMLInputElement).value;
    const form = el("instructor-form");
    if (token === INSTRUCTOR_TOKEN) {
      form.classList.remove("hidden");
    } else {
      banner(el("instructor-result"), new ApiError(0, "instructor_token", "token not recognized"));
    }
  });

  el("instructor-create").addEventListener("click", async () => {
    const name = (el("ref-name") as HTMLInputElement).value;
    const kind = (el("ref-kind") as HTMLSelectElement).value as "class" | "er";
    const plantuml = (el("ref-source") as HTMLTextAreaElement).value;
    const output = el("instructor-result");
    try {
      const created = await client.createReference(name, kind, plantuml);
      output.innerHTML = `<p class="ok">Reference registered with id <code>${escapeHtml(
        created.id,
      )}</code></p>`;
      await refreshReferences();
    } catch (error) {
      if (error instanceof ApiError) {
        output.innerHTML = renderDiagnostics(error);
      } else {
        banner(output, error);
      }
    }
  });
}

async function refreshAnalytics(): Promise<void> {
  const output = el("analytics-slot");
  const picker = el("analytics-reference") as HTMLSelectElement;
  const referenceId = picker.value || state.selectedReference;
  if (!referenceId) {
    output.innerHTML = '<p class="muted">No reference selected.</p>';
    return;
  }
  try {
    state.stats = await client.analytics(referenceId);
    output.innerHTML =
      renderTotals(state.stats) +
      renderStatsTable(state.stats, state.sort) +
      renderBarChart(state.stats);
  } catch (error) {
    state.stats = null;
    banner(output, error);
  }
}

function wireAnalyticsView(): void {
  el("analytics-refresh").addEventListener("click", () => {
    void refreshAnalytics();
  });
  el("analytics-slot").addEventListener("click", (event) => {
    const target = event.target as HTMLElement;
    const key = target.dataset?.sort as "code" | "count" | undefined;
    if (!key || !state.stats) return;
    if (state.sort.key === key) {
      state.sort.direction = state.sort.direction === 1 ? -1 : 1;
    } else {
      state.sort = { key, direction: 1 };
    }
    void refreshAnalytics();
  });
}

function route(): void {
  const hash = window.location.hash || "#/submit";
  const submitView = el("view-submit");
  const analyticsView = el("view-analytics");
  if (hash.startsWith("#/analytics")) {
    submitView.classList.add("hidden");
    analyticsView.classList.remove("hidden");
    const picker = el("analytics-reference") as HTMLSelectElement;
    picker.innerHTML = state.references
      .map(
        (ref) =>
          `<option value="${escapeHtml(ref.id)}">${escapeHtml(ref.name || ref.id)}</option>`,
      )
      .join("");
    if (state.selectedReference) picker.value = state.selectedReference;
    void refreshAnalytics();
  } else {
    analyticsView.classList.add("hidden");
    submitView.classList.remove("hidden");
  }
}

async function start(): Promise<void> {
  wireSubmitView();
  wireAnalyticsView();
  window.addEventListener("hashchange", route);
  await refreshHealth();
  await refreshReferences();
  route();
}

if (typeof document !== "undefined") {
  void start();
}
