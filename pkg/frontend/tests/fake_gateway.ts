/** In-memory gateway double: serves canned /v1 payloads through the
 * fetch interface and records all traffic so tests can check that every
 * displayed numeral came from a payload. */

import type { FetchLike } from "../src/api.js";

export interface RecordedCall {
  url: string;
  body: unknown;
}

export const fixturePayloads = {
  predict: {
    predictions: [
      { psmiles: "[*]CC[*]", property: "Tg", value: 341.25, units: "K" },
    ],
    render_id: "abc123def456",
  },
  generate: {
    candidates: [
      { psmiles: "[*]CCOC[*]", seed_index: 3, oracle_pred: 0.4812,
        accepted: true, rejection_reason: null, novelty: 0.6617,
        predictions: { Tg: 352.75 }, render_id: "r1" },
      { psmiles: "[*]CC(C)C[*]", seed_index: 5, oracle_pred: 1.925,
        accepted: false, rejection_reason: "oracle-filter",
        novelty: 0.4125, predictions: { Tg: 298.5 }, render_id: "r2" },
      { psmiles: "[*]COC(=O)C[*]", seed_index: 3, oracle_pred: 0.3361,
        accepted: true, rejection_reason: null, novelty: 0.7459,
        predictions: { Tg: 344.125 }, render_id: "r3" },
    ],
    report: { validity_pct: 93.75, novelty_pct: 66.6875,
              diversity: 0.5521, accepted_count: 2, rejected_count: 1 },
    rejection_histogram: { "oracle-filter": 1 },
  },
  attribute: {
    baseline: 341.25, scores: [0, 1.375, -0.625, 0],
    flags: [], highlights: [1], render_id: "abc123def456",
  },
  retrieve: {
    chunks: [
      { text: "rigid aromatic segments raise the glass transition",
        doc_id: "doc1", scores: { cosine: 0.8125, rerank: 0.75 },
        citation: { title: "Aromatic polyester glass transitions",
                    authors: ["Ada Writer"], year: 2021,
                    identifier: "10.9000/doc1" } },
    ],
    statuses: [],
    rewritten_query: "Tg (glass transition temperature) 2015..2025",
  },
  ask: {
    request: "predict Tg of [*]CC[*]",
    sections: {
      diagnosis: ["Predicted Tg of [*]CC[*]: 341.25 K"],
      proposals: [],
      verification_plan: ["Verify with the measurement standard."],
    },
    claims: [
      { text: "Predicted Tg of [*]CC[*]: 341.25 K", kind: "numerical",
        tool_ref: "s1", citation_refs: [], gap: false },
    ],
    citations: [
      { title: "Aromatic polyester glass transitions",
        authors: ["Ada Writer"], year: 2021,
        identifier: "10.9000/doc1" },
    ],
    evidence_gaps: ["no web sources configured"],
  },
  health: { status: "ok", snapshot_hash: "deadbeef" },
};

export function collectNumerals(value: unknown, out: Set<string>): void {
  if (typeof value === "number") {
    out.add(String(value));
  } else if (Array.isArray(value)) {
    value.forEach((v) => collectNumerals(v, out));
  } else if (typeof value === "string") {
    for (const m of value.match(/-?\d+(?:\.\d+)?/g) ?? []) {
      out.add(m);
      out.add(String(Number(m)));
    }
  } else if (value && typeof value === "object") {
    Object.values(value).forEach((v) => collectNumerals(v, out));
  }
}

export class FakeGateway {
  calls: RecordedCall[] = [];
  delayMs = 0;

  fetch: FetchLike = async (url, init) => {
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    this.calls.push({ url: String(url), body });
    if (this.delayMs > 0) {
      await new Promise((resolve) => setTimeout(resolve, this.delayMs));
    }
    const payload = this.payloadFor(String(url));
    return new Response(JSON.stringify(payload), {
      status: 200, headers: { "Content-Type": "application/json" },
    });
  };

  private payloadFor(url: string): unknown {
    if (url.endsWith("/v1/predict")) return fixturePayloads.predict;
    if (url.endsWith("/v1/generate")) return fixturePayloads.generate;
    if (url.endsWith("/v1/attribute")) return fixturePayloads.attribute;
    if (url.endsWith("/v1/retrieve")) return fixturePayloads.retrieve;
    if (url.endsWith("/v1/agent/ask")) return fixturePayloads.ask;
    if (url.endsWith("/v1/health")) return fixturePayloads.health;
    throw new Error(`unexpected url ${url}`);
  }

  /** All numerals present anywhere in payloads served so far. */
  servedNumerals(): Set<string> {
    const out = new Set<string>();
    for (const call of this.calls) {
      collectNumerals(this.payloadFor(call.url), out);
    }
    return out;
  }
}
