/** Session state for the design loop: append-only turn history plus
 * current selections. Serializing and reloading reproduces identical
 * screens (replay invariant tested against the view renderers). */

import type {
  AskResponse,
  AttributeResponse,
  GenerateResponse,
  PredictResponse,
  RetrieveResponse,
} from "./api.js";

export interface Turn {
  request: string;
  kind: "predict" | "generate" | "retrieve" | "attribute" | "ask";
  payload: PredictResponse | GenerateResponse | RetrieveResponse |
    AttributeResponse | AskResponse;
}

export interface TargetSpec {
  property: string;
  target: number;
  n: number;
}

export interface SessionState {
  turns: Turn[];
  selectedCandidate: string | null;   // psmiles from the latest table
  activeTargets: TargetSpec[];
  pinnedCitations: string[];          // identifiers
}

export function newSession(): SessionState {
  return { turns: [], selectedCandidate: null, activeTargets: [],
           pinnedCitations: [] };
}

export function addTurn(state: SessionState, turn: Turn): SessionState {
  // history is append-only: prior turns are never rewritten
  return { ...state, turns: [...state.turns, turn] };
}

export function latestGenerate(state: SessionState):
  GenerateResponse | null {
  for (let i = state.turns.length - 1; i >= 0; i--) {
    const turn = state.turns[i];
    if (turn.kind === "generate") {
      return turn.payload as GenerateResponse;
    }
  }
  return null;
}

export function selectCandidate(state: SessionState, psmiles: string):
  SessionState {
  const latest = latestGenerate(state);
  const known = latest?.candidates.some((c) => c.psmiles === psmiles);
  if (!known) {
    throw new Error(`candidate ${psmiles} is not in the latest table`);
  }
  return { ...state, selectedCandidate: psmiles };
}

export function setTarget(state: SessionState, spec: TargetSpec):
  SessionState {
  const others = state.activeTargets.filter(
    (t) => t.property !== spec.property);
  return { ...state, activeTargets: [...others, spec] };
}

export function pinCitation(state: SessionState, identifier: string):
  SessionState {
  if (state.pinnedCitations.includes(identifier)) return state;
  return { ...state,
           pinnedCitations: [...state.pinnedCitations, identifier] };
}

export function serializeSession(state: SessionState): string {
  return JSON.stringify(state);
}

export function restoreSession(blob: string): SessionState {
  const parsed = JSON.parse(blob) as SessionState;
  if (!Array.isArray(parsed.turns)) {
    throw new Error("corrupt session blob: missing turns");
  }
  return parsed;
}
