// DOM rendering: one render pass per state change.  The document is passed
// in so tests can drive the console without a real browser.

import { sparklinePath, scatterPoints } from "./sparkline.js";
import type { ConsoleState } from "./state.js";
import { IDENTITY_PRESETS } from "./state.js";
import type { StatementOut } from "./types.js";

export interface Handlers {
  onCreate: () => void;
  onAnswer: (choice: number) => void;
  onSpeak: (statementId: string) => void;
}

const DIMENSIONS = ["evaluation", "potency", "activity"];

function el(doc: Document, tag: string, className?: string, text?: string): HTMLElement {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

export function renderSetup(doc: Document, root: HTMLElement, handlers: Handlers): void {
  root.innerHTML = "";
  const form = el(doc, "div", "setup");
  form.append(el(doc, "h2", undefined, "New session"));

  const kind = doc.createElement("select");
  kind.id = "setup-kind";
  for (const value of ["tutor", "coach"]) {
    const option = doc.createElement("option");
    option.value = value;
    option.textContent = value;
    kind.append(option);
  }

  const preset = doc.createElement("select");
  preset.id = "setup-preset";
  const none = doc.createElement("option");
  none.value = "";
  none.textContent = "identity preset (optional)";
  preset.append(none);
  for (const name of Object.keys(IDENTITY_PRESETS)) {
    const option = doc.createElement("option");
    option.value = name;
    option.textContent = name;
    preset.append(option);
  }

  const fields: [string, string, string][] = [
    ["setup-n", "particles", "300"],
    ["setup-seed", "seed", "0"],
    ["setup-beta-a", "beta_a", "0.01"],
    ["setup-beta-c", "beta_c", "0.01"],
    ["setup-epa-e", "identity E", ""],
    ["setup-epa-p", "identity P", ""],
    ["setup-epa-a", "identity A", ""],
  ];
  const inputs: Record<string, HTMLInputElement> = {};
  for (const [id, label, initial] of fields) {
    const wrap = el(doc, "label", "field", `${label} `);
    const input = doc.createElement("input");
    input.id = id;
    input.value = initial;
    wrap.append(input);
    form.append(wrap);
    inputs[id] = input;
  }
  form.prepend(kind, preset);

  preset.addEventListener("change", () => {
    const epa = IDENTITY_PRESETS[preset.value];
    if (epa) {
      inputs["setup-epa-e"].value = String(epa[0]);
      inputs["setup-epa-p"].value = String(epa[1]);
      inputs["setup-epa-a"].value = String(epa[2]);
    }
  });

  const error = el(doc, "div", "error");
  error.id = "setup-error";
  const button = el(doc, "button", undefined, "start") as HTMLButtonElement;
  button.id = "setup-start";
  button.addEventListener("click", handlers.onCreate);
  form.append(button, error);
  root.append(form);
}

function renderStatements(
  doc: Document,
  statements: StatementOut[],
  enabled: boolean,
  onSpeak: (id: string) => void,
): HTMLElement {
  const wrap = el(doc, "div", "statements");
  const groups = new Map<string, StatementOut[]>();
  for (const statement of statements) {
    const group = groups.get(statement.context) ?? [];
    group.push(statement);
    groups.set(statement.context, group);
  }
  for (const [context, group] of groups) {
    const section = el(doc, "div", "statement-group");
    section.append(el(doc, "h4", undefined, context));
    for (const statement of group) {
      const button = el(doc, "button", "statement", statement.text) as HTMLButtonElement;
      button.dataset.statementId = statement.statement_id;
      button.disabled = !enabled;
      button.addEventListener("click", () => onSpeak(statement.statement_id));
      section.append(button);
    }
    wrap.append(section);
  }
  return wrap;
}

export function renderInteraction(
  doc: Document,
  root: HTMLElement,
  state: ConsoleState,
  handlers: Handlers,
): void {
  root.innerHTML = "";
  const view = el(doc, "div", "interaction");

  if (state.agentStatement) {
    const reply = el(doc, "div", "agent-statement");
    reply.id = "agent-statement";
    reply.textContent = `agent: ${state.agentStatement.text}`;
    view.append(reply);
  }
  if (state.feedback !== null) {
    const feedback = el(
      doc,
      "div",
      state.feedback ? "feedback correct" : "feedback incorrect",
      state.feedback ? "correct!" : "not quite",
    );
    feedback.id = "feedback";
    view.append(feedback);
  }

  if (state.kind === "tutor" && state.question) {
    const question = el(doc, "div", "question");
    question.id = "question";
    question.append(el(doc, "p", undefined, state.question.prompt));
    state.question.choices.forEach((choice, index) => {
      const button = el(doc, "button", "choice", choice) as HTMLButtonElement;
      button.dataset.choice = String(index);
      button.disabled = state.phase !== "answering" || state.busy;
      button.addEventListener("click", () => handlers.onAnswer(index));
      question.append(button);
    });
    view.append(question);
  }
  if (state.kind === "coach") {
    const step = el(
      doc,
      "div",
      "planstep",
      `plan step ${state.planstep ?? 0}: ${state.planstepLabel ?? ""}`,
    );
    step.id = "planstep";
    view.append(step);
  }

  view.append(
    renderStatements(
      doc,
      state.statements,
      state.phase === "speaking" && !state.busy,
      handlers.onSpeak,
    ),
  );
  if (state.error) {
    view.append(el(doc, "div", "error", state.error));
  }
  root.append(view);
}

export function renderPanel(doc: Document, root: HTMLElement, state: ConsoleState): void {
  root.innerHTML = "";
  if (!state.panel) {
    return;
  }
  const panel = el(doc, "div", "identity-panel");
  panel.append(el(doc, "h3", undefined, "agent's estimate of you"));
  const axes = el(doc, "div", "axes");
  axes.id = "identity-axes";
  state.panel.otherIdentity.forEach((value, i) => {
    const row = el(doc, "div", "axis");
    row.append(el(doc, "span", "axis-name", DIMENSIONS[i]));
    const meter = el(doc, "span", "axis-value", value.toFixed(2));
    meter.dataset.dimension = DIMENSIONS[i];
    row.append(meter);
    axes.append(row);
  });
  panel.append(axes);

  const deflection = el(
    doc,
    "div",
    "deflection",
    `deflection ${state.panel.deflection.toFixed(3)}`,
  );
  deflection.id = "deflection-readout";
  panel.append(deflection);

  const svgNs = "http://www.w3.org/2000/svg";
  const svg = doc.createElementNS(svgNs, "svg");
  svg.setAttribute("width", "220");
  svg.setAttribute("height", "48");
  svg.setAttribute("id", "deflection-sparkline");
  const path = doc.createElementNS(svgNs, "path");
  path.setAttribute("d", sparklinePath(state.panel.deflectionHistory, 220, 48));
  path.setAttribute("fill", "none");
  path.setAttribute("stroke", "#c0392b");
  svg.append(path);
  panel.append(svg);

  if (state.panel.skillMarginal) {
    const skill = el(
      doc,
      "div",
      "skill",
      `skill belief: ${state.panel.skillMarginal.map((v) => v.toFixed(2)).join(" / ")}`,
    );
    skill.id = "skill-readout";
    panel.append(skill);
  }
  if (state.panel.awareness !== null) {
    const aware = el(doc, "div", "awareness", `Pr(aware) ${state.panel.awareness.toFixed(2)}`);
    aware.id = "awareness-readout";
    panel.append(aware);
  }

  if (state.particles) {
    const scatterSvg = doc.createElementNS(svgNs, "svg");
    scatterSvg.setAttribute("width", "220");
    scatterSvg.setAttribute("height", "220");
    scatterSvg.setAttribute("id", "particle-scatter");
    // object-identity block: evaluation (x) vs potency (y)
    for (const point of scatterPoints(state.particles.f, state.particles.weights, 6, 7, 220, 220)) {
      const dot = doc.createElementNS(svgNs, "circle");
      dot.setAttribute("cx", point.x.toFixed(1));
      dot.setAttribute("cy", point.y.toFixed(1));
      dot.setAttribute("r", point.r.toFixed(1));
      dot.setAttribute("fill", "rgba(41, 128, 185, 0.4)");
      scatterSvg.append(dot);
    }
    panel.append(scatterSvg);
  }
  root.append(panel);
}
