/** Typed client for the relquery HTTP service. The console never touches
 * files or inference directly; these endpoints are its whole world. */

export interface ColumnInfo {
  name: string;
  stat_type: string;
  arity: number | null;
}

export interface SessionInfo {
  session_id: string;
  name: string;
  rows: number;
  columns: number;
  key_column: string | null;
  schema: ColumnInfo[];
}

export interface QueryResponse {
  columns: string[];
  rows: (string | number | null)[][];
  kinds: string[];
  warnings: string[];
  timing_ms: number;
}

export interface HeatmapResponse {
  measure: string;
  context: string;
  labels: string[];
  matrix: number[][];
  ordering: number[];
}

export interface AnalyzeStatus {
  running: boolean;
  total_iterations: number | null;
  error: string | null;
}

export interface CreateSessionRequest {
  name?: string;
  dataset?: string;
  csv_text?: string;
  csv_path?: string;
  key?: string;
  seed?: number;
  models?: number;
  analyze_iterations?: number;
}

/** Error carrying the parse position the server reported, when any. */
export class QueryError extends Error {
  constructor(
    message: string,
    readonly line: number | null = null,
    readonly column: number | null = null,
    readonly status: number = 400,
  ) {
    super(message);
    this.name = "QueryError";
  }
}

interface ErrorBody {
  error?: { message?: string; line?: number | null; column?: number | null };
  detail?: string;
}

async function raise(resp: Response): Promise<never> {
  let message = `HTTP ${resp.status}`;
  let line: number | null = null;
  let column: number | null = null;
  try {
    const body = (await resp.json()) as ErrorBody;
    if (body.error?.message) {
      message = body.error.message;
      line = body.error.line ?? null;
      column = body.error.column ?? null;
    } else if (body.detail) {
      message = body.detail;
    }
  } catch {
    /* non-JSON error body; keep the status line */
  }
  throw new QueryError(message, line, column, resp.status);
}

export class RelqueryClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path);
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as T;
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) await raise(resp);
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string }> {
    return this.get("/health");
  }

  createSession(body: CreateSessionRequest): Promise<SessionInfo> {
    return this.post("/sessions", body);
  }

  query(sessionId: string, text: string): Promise<QueryResponse> {
    return this.post(`/sessions/${sessionId}/query`, { text });
  }

  schema(sessionId: string): Promise<{ name: string; key_column: string | null }> {
    return this.get(`/sessions/${sessionId}/schema`);
  }

  heatmap(
    sessionId: string,
    measure: string,
    context: string,
    k = 10,
  ): Promise<HeatmapResponse> {
    const params = new URLSearchParams({ measure, context, k: String(k) });
    return this.get(`/sessions/${sessionId}/heatmap?${params}`);
  }

  analyze(sessionId: string, iterations: number): Promise<{ status: string }> {
    return this.post(`/sessions/${sessionId}/analyze`, { iterations });
  }

  analyzeStatus(sessionId: string): Promise<AnalyzeStatus> {
    return this.get(`/sessions/${sessionId}/analyze/status`);
  }
}
