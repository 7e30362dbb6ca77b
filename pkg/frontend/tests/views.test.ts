// Acceptance for the upload-and-review flow and the analytics view, driven
// end to end through the API client against the fixture-replaying stub.

import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { ApiClient, ApiError } from "../src/api.js";
import { stripMarkdown, textFromHtml } from "../src/markdown.js";
import {
  DEFAULT_SORT,
  renderBarChart,
  renderStatsTable,
  sortedCounts,
} from "../src/views/analytics.js";
import {
  renderDiagnostics,
  renderFeedback,
  renderReferencePicker,
} from "../src/views/submit.js";
import { fixtures, startStubServer, StubServer } from "./stub-server.js";

let stub: StubServer;
let client: ApiClient;

beforeAll(async () => {
  stub = await startStubServer();
  client = new ApiClient(stub.baseUrl);
});

afterAll(async () => {
  await stub.close();
});

describe("upload-and-review flow", () => {
  test("reference picker lists the recorded references", async () => {
    const references = await client.listReferences();
    const html = renderReferencePicker(references, references[0]?.id);
    for (const reference of references) {
      expect(html).toContain(reference.id);
      expect(html).toContain(reference.name);
    }
  });

  test("multiplicity fixture renders one feedback section per non-empty category", async () => {
    const response = await client.submit(
      fixtures.meta.reference_id,
      fixtures.meta.sources.multiplicity_mutant,
    );
    const categories = new Set(
      response.diff_report.differences.map((d) => d.category),
    );
    const html = renderFeedback(response, false);
    const sections = html.match(/<details class="feedback-section"/g) ?? [];
    expect(sections.length).toBe(categories.size);
    expect(html).toContain("<summary>Multiplicities</summary>");
    // educator content stays hidden until toggled
    expect(html).not.toContain('data-audience="educator"');
    const withEducator = renderFeedback(response, true);
    expect(withEducator).toContain('data-audience="educator"');
  });

  test("identity fixture renders the no-differences paragraph", async () => {
    const response = await client.submit(
      fixtures.meta.reference_id,
      fixtures.meta.sources.reference,
    );
    const html = renderFeedback(response, false);
    expect(html).toContain("No structural differences");
    expect(html).not.toContain("<details");
  });

  test("rendered feedback text equals the service Markdown, stripped of markup", async () => {
    const response = await client.submit(
      fixtures.meta.reference_id,
      fixtures.meta.sources.multiplicity_mutant,
    );
    const html = renderFeedback(response, true);
    const studentPart = html.split('data-audience="educator"')[0] ?? html;
    const rendered = textFromHtml(html);
    const expected =
      stripMarkdown(response.feedback.student_markdown) +
      " " +
      stripMarkdown(response.feedback.educator_markdown);
    expect(rendered).toBe(expected);
    expect(textFromHtml(studentPart)).toContain(
      stripMarkdown(response.feedback.student_markdown),
    );
  });

  test("parse failure renders each diagnostic with line and column", async () => {
    let failure: ApiError | null = null;
    try {
      await client.submit(
        fixtures.meta.reference_id,
        fixtures.meta.sources.broken,
      );
    } catch (error) {
      failure = error as ApiError;
    }
    expect(failure).not.toBeNull();
    const html = renderDiagnostics(failure!);
    expect(html).toContain("parse_error");
    for (const diagnostic of failure!.diagnostics) {
      expect(html).toContain(
        `line ${diagnostic.line}, column ${diagnostic.column}`,
      );
    }
    expect(html).not.toContain("<details");
  });
});

describe("analytics view", () => {
  test("table rows equal the fixture counts exactly", async () => {
    const stats = await client.analytics(fixtures.meta.reference_id);
    const html = renderStatsTable(stats, DEFAULT_SORT);
    const rows = [...html.matchAll(/<tr data-code="([^"]+)"><td>[^<]+<\/td><td class="count">(\d+)<\/td><\/tr>/g)];
    const fromTable = Object.fromEntries(
      rows.map((m) => [m[1], Number(m[2])]),
    );
    expect(fromTable).toEqual(fixtures.analytics.counts);
  });

  test("sorting by count descending puts the largest first", async () => {
    const stats = await client.analytics(fixtures.meta.reference_id);
    const entries = sortedCounts(stats, { key: "count", direction: -1 });
    const counts = entries.map(([, count]) => count);
    expect(counts).toEqual([...counts].sort((a, b) => b - a));
    expect(entries[0]?.[0]).toBe("WrongMultiplicity");
  });

  test("bar chart carries one row per code with its value", async () => {
    const stats = await client.analytics(fixtures.meta.reference_id);
    const html = renderBarChart(stats);
    for (const [code, count] of Object.entries(stats.counts)) {
      expect(html).toContain(`data-code="${code}"`);
      expect(html).toContain(`<span class="bar-value">${count}</span>`);
    }
  });

  test("unknown reference shows as unknown_reference error, no table", async () => {
    await expect(client.analytics("GHOST")).rejects.toMatchObject({
      code: "unknown_reference",
      status: 404,
    });
  });
});
