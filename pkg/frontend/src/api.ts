// Thin typed client over the service API. Every non-2xx response becomes an
// ApiError carrying the server's code and message verbatim; an unreachable
// server becomes code "api_unreachable" so views can show a banner instead
// of stale data.

import type {
  Diagnostic,
  Health,
  ReferenceSummary,
  Stats,
  SubmissionResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly diagnostics: Diagnostic[] = [],
  ) {
    super(message);
    this.name = "ApiError";
  }
}

async function asApiError(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  let diagnostics: Diagnostic[] = [];
  try {
    const body = await response.json();
    if (typeof body.code === "string") code = body.code;
    if (typeof body.message === "string") message = body.message;
    if (Array.isArray(body.diagnostics)) diagnostics = body.diagnostics;
  } catch {
    // non-JSON error body; keep the HTTP status text
  }
  return new ApiError(response.status, code, message, diagnostics);
}

export class ApiClient {
  constructor(readonly baseUrl: string = "") {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    let response: Response;
    try {
      response = await fetch(this.baseUrl + path, init);
    } catch (cause) {
      throw new ApiError(0, "api_unreachable", `cannot reach the service: ${cause}`);
    }
    if (!response.ok) {
      throw await asApiError(response);
    }
    return (await response.json()) as T;
  }

  health(): Promise<Health> {
    return this.request<Health>("/api/health");
  }

  async listReferences(): Promise<ReferenceSummary[]> {
    const body = await this.request<{ references: ReferenceSummary[] }>(
      "/api/references",
    );
    return body.references;
  }

  createReference(
    name: string,
    kind: "class" | "er",
    plantuml: string,
  ): Promise<{ id: string }> {
    return this.request<{ id: string }>("/api/references", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ name, kind, plantuml }),
    });
  }

  submit(referenceId: string, plantuml: string): Promise<SubmissionResponse> {
    return this.request<SubmissionResponse>(
      `/api/references/${encodeURIComponent(referenceId)}/submissions`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ plantuml }),
      },
    );
  }

  analytics(referenceId: string): Promise<Stats> {
    return this.request<Stats>(
      `/api/references/${encodeURIComponent(referenceId)}/analytics`,
    );
  }
}
