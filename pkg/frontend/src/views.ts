/** Pure view renderers: payloads in, HTML strings out.
 *
 * Numbers are echoed verbatim from gateway payloads (no arithmetic,
 * no rounding beyond String(...) of the payload value), which is what
 * the zero-computation traffic test asserts.
 */

import type {
  AskResponse,
  AttributeResponse,
  CandidatePayload,
  Citation,
  GenerateResponse,
  PredictResponse,
  RetrieveResponse,
} from "./api.js";
import type { SessionState } from "./state.js";

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;")
    .replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

function num(value: number | null): string {
  return value === null || value === undefined ? "-" : String(value);
}

export function renderPredictions(payload: PredictResponse): string {
  const rows = payload.predictions.map((p) =>
    `<tr><td class="psmiles">${esc(p.psmiles)}</td>` +
    `<td>${esc(p.property)}</td>` +
    `<td class="value">${num(p.value)}</td>` +
    `<td>${esc(p.units)}</td></tr>`).join("");
  return `<table class="predictions"><thead><tr><th>polymer</th>` +
    `<th>property</th><th>value</th><th>units</th></tr></thead>` +
    `<tbody>${rows}</tbody></table>`;
}

export function renderCandidateTable(payload: GenerateResponse,
                                     selected: string | null): string {
  const rows = payload.candidates.map((c: CandidatePayload) => {
    const cls = [
      c.accepted ? "accepted" : "rejected",
      c.psmiles && c.psmiles === selected ? "selected" : "",
    ].filter(Boolean).join(" ");
    const preds = Object.entries(c.predictions)
      .map(([prop, value]) => `${esc(prop)}=${num(value)}`).join(" ");
    return `<tr class="${cls}" data-psmiles="${esc(c.psmiles ?? "")}">` +
      `<td class="psmiles">${esc(c.psmiles ?? "(rejected)")}</td>` +
      `<td class="oracle">${num(c.oracle_pred)}</td>` +
      `<td class="novelty">${num(c.novelty)}</td>` +
      `<td class="accepted-flag">${c.accepted ? "yes" : "no"}</td>` +
      `<td class="predicted">${preds}</td></tr>`;
  }).join("");
  const report = payload.report;
  return `<div class="gen-report">validity ${num(report.validity_pct)}%` +
    ` / novelty ${num(report.novelty_pct)}%` +
    ` / diversity ${num(report.diversity)}</div>` +
    `<table class="candidates"><thead><tr><th>candidate</th>` +
    `<th>oracle</th><th>novelty</th><th>accepted</th>` +
    `<th>predicted</th></tr></thead><tbody>${rows}</tbody></table>`;
}

export function renderAttribution(payload: AttributeResponse,
                                  renderUrl: string): string {
  const scores = payload.scores.map((s, i) => {
    const mark = payload.highlights.includes(i) ? " highlighted" : "";
    return `<li class="atom-score${mark}" data-atom="${i}">` +
      `atom ${i}: ${num(s)}</li>`;
  }).join("");
  return `<div class="attribution">` +
    `<img class="structure" src="${esc(renderUrl)}" ` +
    `alt="structure depiction"/>` +
    `<div class="baseline">baseline ${num(payload.baseline)}</div>` +
    `<ol class="scores">${scores}</ol></div>`;
}

export function renderCitationPanel(citations: Citation[],
                                    gaps: string[],
                                    uncitedNumeric = 0): string {
  const entries = citations.map((c, i) => {
    const year = c.year === null ? "n.d." : String(c.year);
    const link = c.identifier
      ? `https://doi.org/${encodeURIComponent(c.identifier)}`
      : "";
    const anchor = link
      ? `<a class="identifier" href="${esc(link)}">${esc(c.identifier)}</a>`
      : `<span class="identifier missing">no identifier</span>`;
    return `<li class="citation" data-index="${i + 1}">` +
      `${esc(c.title)} (${esc(c.authors.join(", "))}, ${esc(year)}) ` +
      `${anchor}</li>`;
  }).join("");
  const badges = gaps.map((g) =>
    `<div class="badge evidence-gap">${esc(g)}</div>`).join("");
  const warn = uncitedNumeric > 0
    ? `<div class="badge warning">uncited numerical claims: ` +
      `${uncitedNumeric}</div>`
    : "";
  return `<div class="citation-panel"><ul>${entries}</ul>` +
    `${badges}${warn}</div>`;
}

export function renderDiagnosis(payload: AskResponse): string {
  const sections = Object.entries(payload.sections).map(([name, lines]) => {
    const body = lines.map((l) => `<p>${esc(l)}</p>`).join("");
    return `<section class="${esc(name)}"><h3>${esc(name)}</h3>` +
      `${body}</section>`;
  }).join("");
  const uncited = payload.claims.filter(
    (c) => c.kind === "numerical" && !c.tool_ref).length;
  return `<div class="diagnosis">${sections}` +
    renderCitationPanel(payload.citations, payload.evidence_gaps,
                        uncited) + `</div>`;
}

export function renderRetrieval(payload: RetrieveResponse): string {
  const rows = payload.chunks.map((chunk) =>
    `<li class="chunk" data-doc="${esc(chunk.doc_id)}">` +
    `${esc(chunk.text)}</li>`).join("");
  return `<div class="retrieval">` +
    `<div class="rewritten">${esc(payload.rewritten_query)}</div>` +
    `<ul>${rows}</ul></div>`;
}

export function renderHistory(state: SessionState): string {
  const turns = state.turns.map((turn, i) =>
    `<li class="turn" data-kind="${esc(turn.kind)}" data-index="${i}">` +
    `${esc(turn.request)}</li>`).join("");
  return `<ol class="history">${turns}</ol>`;
}

/** Every screen the studio can show for a session, rendered at once;
 * session replay must reproduce this map exactly. */
export function renderScreens(state: SessionState,
                              renderUrlFor: (id: string) => string):
  Record<string, string> {
  const screens: Record<string, string> = {
    history: renderHistory(state),
  };
  state.turns.forEach((turn, i) => {
    if (turn.kind === "predict") {
      screens[`turn${i}`] = renderPredictions(
        turn.payload as PredictResponse);
    } else if (turn.kind === "generate") {
      screens[`turn${i}`] = renderCandidateTable(
        turn.payload as GenerateResponse, state.selectedCandidate);
    } else if (turn.kind === "retrieve") {
      screens[`turn${i}`] = renderRetrieval(
        turn.payload as RetrieveResponse);
    } else if (turn.kind === "attribute") {
      const att = turn.payload as AttributeResponse;
      screens[`turn${i}`] = renderAttribution(
        att, renderUrlFor(att.render_id));
    } else {
      screens[`turn${i}`] = renderDiagnosis(turn.payload as AskResponse);
    }
  });
  return screens;
}
