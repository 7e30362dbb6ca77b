// Upload-and-review view: pure render functions returning HTML strings.

import { ApiError } from "../api.js";
import {
  escapeHtml,
  renderMarkdown,
  splitSections,
} from "../markdown.js";
import type { ReferenceSummary, SubmissionResponse } from "../types.js";

export function renderReferencePicker(
  references: ReferenceSummary[],
  selected?: string,
): string {
  if (references.length === 0) {
    return '<p class="muted">No references registered yet. Ask your instructor, or open the instructor panel below.</p>';
  }
  const options = references
    .map((ref) => {
      const chosen = ref.id === selected ? " selected" : "";
      return `<option value="${escapeHtml(ref.id)}"${chosen}>${escapeHtml(
        ref.name || ref.id,
      )} (${ref.kind})</option>`;
    })
    .join("");
  return `<select id="reference-picker" aria-label="Reference diagram">${options}</select>`;
}

function renderDocumentSections(markdown: string, audience: string): string {
  const doc = splitSections(markdown);
  const parts: string[] = [];
  if (doc.title) parts.push(`<h3>${escapeHtml(doc.title)}</h3>`);
  if (doc.preamble) parts.push(renderMarkdown(doc.preamble));
  for (const section of doc.sections) {
    parts.push(
      `<details class="feedback-section" data-audience="${escapeHtml(audience)}" open>` +
        `<summary>${escapeHtml(section.heading)}</summary>` +
        renderMarkdown(section.body) +
        `</details>`,
    );
  }
  return parts.join("\n");
}

export function renderFeedback(
  response: SubmissionResponse,
  showEducator: boolean,
): string {
  const parts: string[] = ['<div class="feedback" id="feedback">'];
  parts.push('<div class="feedback-student">');
  parts.push(renderDocumentSections(response.feedback.student_markdown, "student"));
  parts.push("</div>");
  if (showEducator) {
    parts.push('<div class="feedback-educator">');
    parts.push(
      renderDocumentSections(response.feedback.educator_markdown, "educator"),
    );
    parts.push("</div>");
  }
  if (response.feedback.warnings.length > 0) {
    const items = response.feedback.warnings
      .map((w) => `<li>${escapeHtml(w)}</li>`)
      .join("");
    parts.push(`<ul class="warnings">${items}</ul>`);
  }
  parts.push("</div>");
  return parts.join("\n");
}

export function renderDiagnostics(error: ApiError): string {
  const heading = `<p class="error-banner">${escapeHtml(error.code)}: ${escapeHtml(
    error.message,
  )}</p>`;
  if (error.diagnostics.length === 0) {
    return heading;
  }
  const rows = error.diagnostics
    .map(
      (d) =>
        `<li class="diagnostic diagnostic-${escapeHtml(d.severity)}">` +
        `line ${d.line}, column ${d.column}: ${escapeHtml(d.severity)}: ` +
        `${escapeHtml(d.message)}</li>`,
    )
    .join("");
  return `${heading}<ul class="diagnostics" id="diagnostics">${rows}</ul>`;
}

export function renderOfflineBadge(offline: boolean): string {
  return offline
    ? '<span class="badge badge-offline">offline mode</span>'
    : '<span class="badge badge-online">online</span>';
}
