// Payload shapes mirroring the session service's OpenAPI schema.

export interface SessionConfig {
  seed?: number;
  n_particles?: number;
  beta_a?: number;
  beta_c?: number;
  beta0_a?: number;
  beta0_c?: number;
  gamma?: number;
  alpha?: number;
  client_identity?: number[] | null;
}

export interface StatementOut {
  statement_id: string;
  context: string;
  text: string;
  label: string;
  epa: number[];
}

export interface QuestionOut {
  question_id: string;
  difficulty: number;
  prompt: string;
  choices: string[];
}

export interface BeliefSummary {
  step: number;
  self_identity: number[];
  other_identity: number[];
  expected_deflection: number;
  skill_marginal?: number[] | null;
  awareness?: number | null;
  planstep_marginal?: number[] | null;
}

export interface SessionDescriptor {
  id: string;
  kind: string;
  step: number;
  created: number;
  updated: number;
  belief: BeliefSummary;
  question?: QuestionOut | null;
  planstep?: number | null;
  planstep_label?: string | null;
  client_statements?: StatementOut[] | null;
  debug_particles?: { f: number[][]; weights: number[] } | null;
}

export interface ActResponse {
  feedback?: boolean | null;
  agent_statement?: StatementOut | null;
  client_statements?: StatementOut[] | null;
  prompted?: boolean | null;
  next_question?: QuestionOut | null;
  planstep?: number | null;
  planstep_label?: string | null;
  belief: BeliefSummary;
  deflection: number;
  event_index?: number | null;
}

export interface SessionEvent {
  index: number;
  step: number;
  belief: BeliefSummary;
}
