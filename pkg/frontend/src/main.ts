// Console bootstrap: wires the API client, the event stream and the pure
// state store to the DOM.  All numbers shown come from server responses.

import { ApiClient } from "./api.js";
import { readEventStream } from "./sse.js";
import {
  applyAnswer,
  applyBusy,
  applyError,
  applyEvent,
  applySnapshot,
  applySpeak,
  initialState,
  validateSetup,
  type ConsoleState,
} from "./state.js";
import { renderInteraction, renderPanel, renderSetup } from "./ui.js";

const api = new ApiClient("");
let state: ConsoleState = initialState();
let streamAbort: AbortController | null = null;

const doc = document;
const setupRoot = doc.getElementById("setup-root") as HTMLElement;
const interactionRoot = doc.getElementById("interaction-root") as HTMLElement;
const panelRoot = doc.getElementById("panel-root") as HTMLElement;
const debugEnabled = new URLSearchParams(location.search).get("debug") === "1";

function dispatch(next: ConsoleState): void {
  state = next;
  render();
}

function render(): void {
  if (state.phase === "setup") {
    renderSetup(doc, setupRoot, handlers);
    interactionRoot.innerHTML = "";
    panelRoot.innerHTML = "";
    return;
  }
  setupRoot.innerHTML = "";
  renderInteraction(doc, interactionRoot, state, handlers);
  renderPanel(doc, panelRoot, state);
}

async function refreshSnapshot(): Promise<void> {
  if (!state.sessionId) {
    return;
  }
  const snapshot = await api.getSession(state.sessionId, debugEnabled);
  dispatch(applySnapshot(state, snapshot));
}

function subscribe(sessionId: string): void {
  streamAbort?.abort();
  streamAbort = new AbortController();
  void readEventStream(
    api.eventsUrl(sessionId),
    (event) => dispatch(applyEvent(state, event)),
    { signal: streamAbort.signal },
  ).catch(() => {
    /* stream ends when the session closes */
  });
}

const handlers = {
  onCreate: () => {
    const value = (id: string) =>
      (doc.getElementById(id) as HTMLInputElement | null)?.value ?? "";
    const epaFields = ["setup-epa-e", "setup-epa-p", "setup-epa-a"].map(value);
    const identity = epaFields.every((v) => v.trim() !== "")
      ? epaFields.map(Number)
      : null;
    const form = {
      kind: (doc.getElementById("setup-kind") as HTMLSelectElement).value,
      seed: Number(value("setup-seed")),
      nParticles: Number(value("setup-n")),
      betaA: Number(value("setup-beta-a")),
      betaC: Number(value("setup-beta-c")),
      clientIdentity: identity,
    };
    const problem = validateSetup(form);
    const errorBox = doc.getElementById("setup-error");
    if (problem) {
      if (errorBox) {
        errorBox.textContent = problem;
      }
      return;
    }
    void api
      .createSession(form.kind, {
        seed: form.seed,
        n_particles: form.nParticles,
        beta_a: form.betaA,
        beta_c: form.betaC,
        client_identity: form.clientIdentity,
      })
      .then((snapshot) => {
        dispatch(applySnapshot({ ...state, kind: form.kind }, snapshot));
        subscribe(snapshot.id);
      })
      .catch((error) => dispatch(applyError(state, String(error))));
  },
  onAnswer: (choice: number) => {
    if (!state.sessionId || state.busy) {
      return;
    }
    dispatch(applyBusy(state, true));
    void api
      .answer(state.sessionId, choice)
      .then((response) => dispatch(applyAnswer(state, response)))
      .catch((error) => dispatch(applyError(state, String(error))));
  },
  onSpeak: (statementId: string) => {
    if (!state.sessionId || state.busy) {
      return;
    }
    dispatch(applyBusy(state, true));
    void api
      .speak(state.sessionId, statementId)
      .then((response) => {
        dispatch(applySpeak(state, response));
        if (debugEnabled) {
          void refreshSnapshot();
        }
      })
      .catch((error) => dispatch(applyError(state, String(error))));
  },
};

render();
