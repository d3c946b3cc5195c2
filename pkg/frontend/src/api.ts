/** Typed client for the polylab gateway /v1 API.
 *
 * Every number the studio displays originates from these payloads; the
 * UI performs no property or similarity math of its own.
 */

export interface Prediction {
  psmiles: string;
  property: string;
  value: number;
  units: string;
}

export interface PredictResponse {
  predictions: Prediction[];
  render_id: string;
}

export interface CandidatePayload {
  psmiles: string | null;
  seed_index: number;
  oracle_pred: number;
  accepted: boolean;
  rejection_reason: string | null;
  novelty: number | null;
  predictions: Record<string, number>;
  render_id: string | null;
}

export interface GenReportPayload {
  validity_pct: number;
  novelty_pct: number;
  diversity: number;
  accepted_count: number;
  rejected_count: number;
}

export interface GenerateResponse {
  candidates: CandidatePayload[];
  report: GenReportPayload;
  rejection_histogram: Record<string, number>;
}

export interface AttributeResponse {
  baseline: number;
  scores: number[];
  flags: number[];
  highlights: number[];
  render_id: string;
}

export interface Citation {
  title: string;
  authors: string[];
  year: number | null;
  identifier: string;
}

export interface RetrievedChunk {
  text: string;
  doc_id: string;
  scores: Record<string, number>;
  citation: Citation;
}

export interface RetrieveResponse {
  chunks: RetrievedChunk[];
  statuses: Array<{ source: string; ok: boolean; error?: string }>;
  rewritten_query: string;
}

export interface AgentClaim {
  text: string;
  kind: string;
  tool_ref: string | null;
  citation_refs: number[];
  gap: boolean;
}

export interface AskResponse {
  request: string;
  sections: Record<string, string[]>;
  claims: AgentClaim[];
  citations: Citation[];
  evidence_gaps: string[];
}

export type FetchLike = (url: string, init?: RequestInit) =>
  Promise<Response>;

export class GatewayError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class GatewayClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async post<T>(path: string, body: unknown): Promise<T> {
    const resp = await this.fetchImpl(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    if (!resp.ok) {
      const text = await resp.text();
      throw new GatewayError(resp.status, text || resp.statusText);
    }
    return (await resp.json()) as T;
  }

  health(): Promise<{ status: string; snapshot_hash: string }> {
    return this.fetchImpl(`${this.baseUrl}/v1/health`).then((r) => {
      if (!r.ok) throw new GatewayError(r.status, "health check failed");
      return r.json();
    });
  }

  predict(psmiles: string, properties: string[]): Promise<PredictResponse> {
    return this.post("/v1/predict", { psmiles, properties });
  }

  generate(property: string, target: number, n: number):
    Promise<GenerateResponse> {
    return this.post("/v1/generate", { property, target, n });
  }

  attribute(psmiles: string, property: string): Promise<AttributeResponse> {
    return this.post("/v1/attribute", { psmiles, property });
  }

  retrieve(query: string, k = 5, web = false): Promise<RetrieveResponse> {
    return this.post("/v1/retrieve", { query, k, web });
  }

  ask(text: string): Promise<AskResponse> {
    return this.post("/v1/agent/ask", { text });
  }

  renderUrl(renderId: string): string {
    return `${this.baseUrl}/v1/render/${renderId}`;
  }
}
