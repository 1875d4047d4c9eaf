import type {
  CatalogResponse,
  FeedbackRequest,
  RecommendationResponse,
  ReportSummary,
  ReportView,
  UploadResponse,
} from "./types.js";

export class ApiError extends Error {
  constructor(message: string, readonly status: number) {
    super(message);
  }
}

async function parse<T>(res: Response): Promise<T> {
  if (!res.ok) {
    let detail = res.statusText;
    try {
      const body = await res.json();
      detail = body.error ?? body.detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(String(detail), res.status);
  }
  return res.json() as Promise<T>;
}

export class ApiClient {
  constructor(private readonly baseUrl: string = "") {}

  getCatalog(): Promise<CatalogResponse> {
    return fetch(`${this.baseUrl}/requirements`).then((r) => parse(r));
  }

  listReports(): Promise<ReportSummary[]> {
    return fetch(`${this.baseUrl}/reports`).then((r) => parse(r));
  }

  getReport(docId: string): Promise<ReportView> {
    return fetch(`${this.baseUrl}/reports/${encodeURIComponent(docId)}`).then(
      (r) => parse(r),
    );
  }

  async uploadReport(file: Blob, filename: string, format: string): Promise<UploadResponse> {
    const form = new FormData();
    form.append("file", file, filename);
    form.append("format", format);
    const res = await fetch(`${this.baseUrl}/reports`, { method: "POST", body: form });
    return parse(res);
  }

  getRecommendations(
    docId: string,
    reqId: string,
    k: number,
    signal?: AbortSignal,
  ): Promise<RecommendationResponse> {
    const params = new URLSearchParams({ req: reqId, k: String(k) });
    return fetch(
      `${this.baseUrl}/reports/${encodeURIComponent(docId)}/recommendations?${params}`,
      { signal },
    ).then((r) => parse(r));
  }

  async submitFeedback(event: FeedbackRequest): Promise<{ event_id: string }> {
    const res = await fetch(`${this.baseUrl}/feedback`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(event),
    });
    return parse(res);
  }
}
