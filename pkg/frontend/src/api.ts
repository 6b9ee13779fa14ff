/**
 * Typed client for the pipeline's v1 HTTP API.
 *
 * Every decision (eligibility, grading, aggregation) lives on the server;
 * this module only moves JSON. The fetch implementation is injectable so
 * tests can run against an in-memory contract fake.
 */

export interface RegisterResponse {
  worker_id: number;
  token: string;
  expires_at: number;
}

export interface TranslateTask {
  kind: "translate";
  task_id: number;
  direction: string;
  instruction: string;
  source_text: string;
  deadline: number;
}

export interface VerifyTask {
  kind: "verify";
  assignment_id: number;
  direction: string;
  instruction: string;
  source_text: string;
  candidate_text: string;
  deadline: number;
}

export type Task = TranslateTask | VerifyTask;

export interface SubmissionOutcome {
  outcome: "queued_for_verification" | "auto_rejected";
  reason?: string;
}

export interface VerdictOutcome {
  outcome: "recorded" | "finalized";
  result?: "accepted" | "rejected";
}

export interface ExamItemView {
  src: string;
  tgt: string;
}

export interface ExamFormView {
  direction: string;
  version: string;
  pass_threshold: number;
  already_passed: boolean;
  items: ExamItemView[];
}

export interface ExamGrade {
  score: number;
  passed: boolean;
}

export interface FunnelRow {
  translated: number;
  fully_verified: number;
  in_corpus: number;
}

export interface FunnelStats {
  directions: Record<string, FunnelRow>;
  totals: FunnelRow;
  flags_raised: number;
}

export interface CostTotals {
  totals: Record<string, string>;
  by_worker?: Record<string, string>;
}

export interface IngestReport {
  input_count: number;
  kept: number;
  dropped_template: number;
  dropped_duplicate: number;
  dropped_language: number;
  dropped_malformed: number;
}

export interface UploadResult {
  report: IngestReport;
  tasks_created: number;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

export class ApiClient {
  token: string | null = null;

  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) =>
      fetch(input, init),
  ) {}

  private headers(): Record<string, string> {
    const headers: Record<string, string> = {
      "content-type": "application/json",
    };
    if (this.token !== null) {
      headers["authorization"] = `Bearer ${this.token}`;
    }
    return headers;
  }

  private async request<T>(
    method: string,
    path: string,
    body?: unknown,
  ): Promise<T | null> {
    const response = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (response.status === 204) {
      return null;
    }
    if (!response.ok) {
      let message = `HTTP ${response.status}`;
      try {
        const payload = (await response.json()) as { error?: string };
        if (payload.error) {
          message = payload.error;
        }
      } catch {
        // non-JSON error body: keep the generic message
      }
      throw new ApiError(response.status, message);
    }
    return (await response.json()) as T;
  }

  async register(name: string, langs: string[]): Promise<RegisterResponse> {
    const payload = (await this.request<RegisterResponse>(
      "POST",
      "/v1/workers",
      { name, langs },
    ))!;
    this.token = payload.token;
    return payload;
  }

  async nextTask(kind: "translate" | "verify"): Promise<Task | null> {
    return this.request<Task>("GET", `/v1/tasks/next?kind=${kind}`);
  }

  async submitTranslation(
    taskId: number,
    text: string,
    elapsedMs: number,
  ): Promise<SubmissionOutcome> {
    return (await this.request<SubmissionOutcome>(
      "POST",
      `/v1/tasks/${taskId}/translation`,
      { text, elapsed_ms: elapsedMs },
    ))!;
  }

  async submitVerdict(
    assignmentId: number,
    verdict: "good" | "bad",
    elapsedMs: number,
  ): Promise<VerdictOutcome> {
    return (await this.request<VerdictOutcome>(
      "POST",
      `/v1/assignments/${assignmentId}/verdict`,
      { verdict, elapsed_ms: elapsedMs },
    ))!;
  }

  async getExam(direction: string): Promise<ExamFormView> {
    return (await this.request<ExamFormView>(
      "GET",
      `/v1/exam/${direction}`,
    ))!;
  }

  async submitExam(
    direction: string,
    version: string,
    answers: string[],
  ): Promise<ExamGrade> {
    return (await this.request<ExamGrade>(
      "POST",
      `/v1/exam/${direction}/answers`,
      { version, answers },
    ))!;
  }

  async funnel(): Promise<FunnelStats> {
    return (await this.request<FunnelStats>("GET", "/v1/stats/funnel"))!;
  }

  async cost(by?: "worker"): Promise<CostTotals> {
    const query = by ? `?by=${by}` : "";
    return (await this.request<CostTotals>("GET", `/v1/cost${query}`))!;
  }

  async uploadSources(
    direction: string,
    origin: string,
    lines: string[],
  ): Promise<UploadResult> {
    return (await this.request<UploadResult>("POST", "/v1/sources", {
      direction,
      origin,
      lines,
    }))!;
  }

  exportUrl(direction: string, format: "jsonl" | "tsv"): string {
    return `${this.baseUrl}/v1/export?direction=${encodeURIComponent(
      direction,
    )}&format=${format}`;
  }
}

/** Canonical JSON: recursively sorted object keys, no whitespace. */
export function stableStringify(value: unknown): string {
  if (Array.isArray(value)) {
    return `[${value.map(stableStringify).join(",")}]`;
  }
  if (value !== null && typeof value === "object") {
    const entries = Object.entries(value as Record<string, unknown>)
      .sort(([a], [b]) => (a < b ? -1 : a > b ? 1 : 0))
      .map(([key, inner]) => `${JSON.stringify(key)}:${stableStringify(inner)}`);
    return `{${entries.join(",")}}`;
  }
  return JSON.stringify(value);
}
