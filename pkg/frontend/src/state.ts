// Pure console state: everything the views render derives from the last
// session snapshot, the event stream, and act responses.  The identity
// panel only ever consumes belief summaries computed server-side; no
// sentiment arithmetic happens here.

import type {
  ActResponse,
  BeliefSummary,
  QuestionOut,
  SessionDescriptor,
  SessionEvent,
  StatementOut,
} from "./types.js";

export type Phase = "setup" | "answering" | "speaking" | "done";

export interface PanelState {
  step: number;
  selfIdentity: number[];
  otherIdentity: number[];
  deflection: number;
  skillMarginal: number[] | null;
  awareness: number | null;
  deflectionHistory: number[];
}

export interface ConsoleState {
  sessionId: string | null;
  kind: string;
  phase: Phase;
  question: QuestionOut | null;
  statements: StatementOut[];
  feedback: boolean | null;
  agentStatement: StatementOut | null;
  prompted: boolean | null;
  planstep: number | null;
  planstepLabel: string | null;
  panel: PanelState | null;
  lastEventIndex: number;
  particles: { f: number[][]; weights: number[] } | null;
  busy: boolean;
  error: string | null;
}

export function initialState(): ConsoleState {
  return {
    sessionId: null,
    kind: "tutor",
    phase: "setup",
    question: null,
    statements: [],
    feedback: null,
    agentStatement: null,
    prompted: null,
    planstep: null,
    planstepLabel: null,
    panel: null,
    lastEventIndex: -1,
    particles: null,
    busy: false,
    error: null,
  };
}

function panelFromBelief(belief: BeliefSummary, history: number[]): PanelState {
  return {
    step: belief.step,
    selfIdentity: [...belief.self_identity],
    otherIdentity: [...belief.other_identity],
    deflection: belief.expected_deflection,
    skillMarginal: belief.skill_marginal ? [...belief.skill_marginal] : null,
    awareness: belief.awareness ?? null,
    deflectionHistory: history,
  };
}

export function applySnapshot(state: ConsoleState, snapshot: SessionDescriptor): ConsoleState {
  const history = state.panel ? state.panel.deflectionHistory : [];
  return {
    ...state,
    sessionId: snapshot.id,
    kind: snapshot.kind,
    phase: snapshot.kind === "coach" ? "speaking" : "answering",
    question: snapshot.question ?? null,
    statements:
      snapshot.kind === "coach"
        ? (snapshot.client_statements ?? [])
        : state.statements,
    planstep: snapshot.planstep ?? null,
    planstepLabel: snapshot.planstep_label ?? null,
    panel: panelFromBelief(
      snapshot.belief,
      history.length > 0 ? history : [snapshot.belief.expected_deflection],
    ),
    particles: snapshot.debug_particles ?? null,
    error: null,
  };
}

export function applyEvent(state: ConsoleState, event: SessionEvent): ConsoleState {
  if (event.index <= state.lastEventIndex) {
    return state;
  }
  const history = state.panel
    ? [...state.panel.deflectionHistory, event.belief.expected_deflection]
    : [event.belief.expected_deflection];
  return {
    ...state,
    lastEventIndex: event.index,
    panel: panelFromBelief(event.belief, history),
  };
}

export function applyAnswer(state: ConsoleState, response: ActResponse): ConsoleState {
  return {
    ...state,
    phase: "speaking",
    feedback: response.feedback ?? null,
    statements: response.client_statements ?? [],
    busy: false,
    error: null,
  };
}

export function applySpeak(state: ConsoleState, response: ActResponse): ConsoleState {
  return {
    ...state,
    phase: "answering",
    question: response.next_question ?? state.question,
    agentStatement: response.agent_statement ?? null,
    prompted: response.prompted ?? null,
    planstep: response.planstep ?? state.planstep,
    planstepLabel: response.planstep_label ?? state.planstepLabel,
    statements: state.kind === "coach" ? state.statements : [],
    busy: false,
    error: null,
  };
}

export function applyBusy(state: ConsoleState, busy: boolean): ConsoleState {
  return { ...state, busy };
}

export function applyError(state: ConsoleState, message: string): ConsoleState {
  return { ...state, busy: false, error: message };
}

export interface SetupForm {
  kind: string;
  seed: number;
  nParticles: number;
  betaA: number;
  betaC: number;
  clientIdentity: number[] | null;
}

// Identity presets transcribed from the shipped dictionary; data only.
export const IDENTITY_PRESETS: Record<string, number[]> = {
  student: [1.5, 0.3, 0.8],
  patient: [0.9, -0.69, -1.05],
  elder: [1.67, 0.01, -1.03],
  boss: [0.48, 2.16, 0.94],
  convalescent: [0.3, 0.09, -0.03],
};

export function validateSetup(form: SetupForm): string | null {
  if (!Number.isInteger(form.nParticles) || form.nParticles < 1 || form.nParticles > 5000) {
    return "particle count must be an integer between 1 and 5000";
  }
  if (form.betaA <= 0 || form.betaC <= 0) {
    return "identity inertia values must be positive";
  }
  if (form.clientIdentity !== null && form.clientIdentity.length !== 3) {
    return "client identity needs exactly three EPA values";
  }
  return null;
}
