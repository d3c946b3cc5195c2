/** Browser bootstrap: wires DOM controls to the gateway client and the
 * session state. All content comes from gateway payloads; failures
 * surface as inline status text, never blank panels. */

import { GatewayClient } from "./api.js";
import {
  addTurn,
  newSession,
  restoreSession,
  selectCandidate,
  serializeSession,
  setTarget,
  type SessionState,
} from "./state.js";
import { renderScreens } from "./views.js";

const STORAGE_KEY = "polylab-studio-session";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function startStudio(baseUrl: string): void {
  const client = new GatewayClient(baseUrl);
  let state: SessionState = newSession();
  const saved = window.localStorage.getItem(STORAGE_KEY);
  if (saved) {
    try {
      state = restoreSession(saved);
    } catch {
      state = newSession();
    }
  }

  const status = el<HTMLDivElement>("status");
  const screens = el<HTMLDivElement>("screens");

  function refresh(): void {
    window.localStorage.setItem(STORAGE_KEY, serializeSession(state));
    const rendered = renderScreens(state, (id) => client.renderUrl(id));
    screens.innerHTML = Object.entries(rendered)
      .map(([name, html]) =>
        `<div class="screen" data-screen="${name}">${html}</div>`)
      .join("");
    const rows = Array.from(screens.querySelectorAll("tr[data-psmiles]"));
    for (const row of rows) {
      row.addEventListener("click", () => {
        const psmiles = row.getAttribute("data-psmiles");
        if (!psmiles) return;
        try {
          state = selectCandidate(state, psmiles);
          refresh();
        } catch (err) {
          status.textContent = String(err);
        }
      });
    }
  }

  function report(err: unknown): void {
    status.textContent = `gateway error: ${String(err)}`;
  }

  el<HTMLButtonElement>("predict-btn").addEventListener("click", () => {
    const psmiles = el<HTMLInputElement>("psmiles-input").value.trim();
    const prop = el<HTMLInputElement>("property-input").value.trim();
    status.textContent = "predicting...";
    client.predict(psmiles, [prop]).then((payload) => {
      state = addTurn(state, { request: `predict ${prop} of ${psmiles}`,
                               kind: "predict", payload });
      status.textContent = "";
      refresh();
    }).catch(report);
  });

  el<HTMLButtonElement>("generate-btn").addEventListener("click", () => {
    const prop = el<HTMLInputElement>("property-input").value.trim();
    const target = Number(el<HTMLInputElement>("target-input").value);
    const n = Number(el<HTMLInputElement>("count-input").value || "8");
    state = setTarget(state, { property: prop, target, n });
    status.textContent = "generating...";
    client.generate(prop, target, n).then((payload) => {
      state = addTurn(state, {
        request: `generate ${n} near ${prop}=${target}`,
        kind: "generate", payload });
      status.textContent = "";
      refresh();
    }).catch(report);
  });

  el<HTMLButtonElement>("attribute-btn").addEventListener("click", () => {
    const prop = el<HTMLInputElement>("property-input").value.trim();
    const psmiles = state.selectedCandidate
      ?? el<HTMLInputElement>("psmiles-input").value.trim();
    status.textContent = "attributing...";
    client.attribute(psmiles, prop).then((payload) => {
      state = addTurn(state, { request: `attribute ${prop} of ${psmiles}`,
                               kind: "attribute", payload });
      status.textContent = "";
      refresh();
    }).catch(report);
  });

  el<HTMLButtonElement>("ask-btn").addEventListener("click", () => {
    const text = el<HTMLInputElement>("ask-input").value.trim();
    status.textContent = "asking...";
    client.ask(text).then((payload) => {
      state = addTurn(state, { request: text, kind: "ask", payload });
      status.textContent = "";
      refresh();
    }).catch(report);
  });

  refresh();
}

declare global {
  interface Window { startStudio: typeof startStudio }
}
window.startStudio = startStudio;
