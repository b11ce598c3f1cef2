// DOM rendering for the drill screen.  Builds everything through the
// container's ownerDocument so it runs under any DOM implementation.

import type { DrillViewState } from "./state.js";

export interface ViewHandlers {
  onSubmit: (attempt: string) => void;
  onNext: () => void;
  onRetry: () => void;
  onDialectChange: (dialect: string | null) => void;
}

const ALL_DIALECTS = "__all__";

function el(
  root: HTMLElement,
  tag: string,
  className: string,
  text?: string,
): HTMLElement {
  const node = root.ownerDocument.createElement(tag);
  node.className = className;
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderDialectFilter(
  root: HTMLElement,
  state: DrillViewState,
  dialects: string[],
  handlers: ViewHandlers,
): HTMLElement {
  const wrap = el(root, "label", "dialect-filter", "Dialect: ");
  const select = root.ownerDocument.createElement("select");
  select.id = "dialect-select";
  const options = [ALL_DIALECTS, ...dialects];
  for (const name of options) {
    const option = root.ownerDocument.createElement("option");
    option.value = name;
    option.textContent = name === ALL_DIALECTS ? "all" : name;
    if ((state.dialect ?? ALL_DIALECTS) === name) {
      option.selected = true;
    }
    select.appendChild(option);
  }
  select.addEventListener("change", () => {
    handlers.onDialectChange(
      select.value === ALL_DIALECTS ? null : select.value,
    );
  });
  wrap.appendChild(select);
  return wrap;
}

function renderProgress(root: HTMLElement, state: DrillViewState): HTMLElement {
  const { attempts, correct, boxes, remaining } = state.counters;
  const boxText = ["1", "2", "3"]
    .map((box) => `${box}:${boxes[box] ?? 0}`)
    .join(" ");
  const line = el(
    root,
    "p",
    "progress",
    `answered ${correct}/${attempts} · boxes ${boxText} · ${remaining} to learn`,
  );
  line.id = "progress-line";
  return line;
}

function renderPrompt(
  root: HTMLElement,
  state: DrillViewState,
  handlers: ViewHandlers,
): HTMLElement {
  const panel = el(root, "section", "prompt-panel");
  const exercise = state.exercise;
  if (exercise === null) {
    return panel;
  }
  const prompt = el(root, "p", "prompt-text", exercise.prompt);
  prompt.id = "prompt-text";
  panel.appendChild(prompt);
  if (exercise.provenance === "predicted") {
    const badge = el(
      root,
      "span",
      "badge badge-predicted",
      "machine-predicted",
    );
    badge.id = "provenance-badge";
    panel.appendChild(badge);
  }
  if (exercise.dialect) {
    panel.appendChild(
      el(root, "span", "badge badge-dialect", exercise.dialect),
    );
  }

  const form = root.ownerDocument.createElement("form");
  form.id = "answer-form";
  const input = root.ownerDocument.createElement("input");
  input.type = "text";
  input.id = "answer-input";
  input.autocomplete = "off";
  input.spellcheck = false;
  input.disabled = state.pending;
  const submit = root.ownerDocument.createElement("button");
  submit.type = "submit";
  submit.id = "submit-button";
  submit.textContent = "Check";
  submit.disabled = state.pending;
  form.appendChild(input);
  form.appendChild(submit);
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    handlers.onSubmit(input.value);
  });
  panel.appendChild(form);
  return panel;
}

function renderFeedback(
  root: HTMLElement,
  state: DrillViewState,
  handlers: ViewHandlers,
): HTMLElement {
  const panel = el(root, "section", "feedback-panel");
  const result = state.result;
  const exercise = state.exercise;
  if (result === null || exercise === null) {
    return panel;
  }
  const verdict = el(
    root,
    "p",
    result.correct ? "verdict verdict-correct" : "verdict verdict-incorrect",
    result.correct ? "Correct!" : "Not quite.",
  );
  verdict.id = "verdict";
  panel.appendChild(verdict);
  const expected = el(root, "p", "expected");
  expected.id = "expected-form";
  expected.textContent = `Expected form: ${result.expected}`;
  panel.appendChild(expected);
  if (exercise.provenance === "predicted") {
    const badge = el(
      root,
      "span",
      "badge badge-predicted",
      "machine-predicted",
    );
    badge.id = "provenance-badge";
    panel.appendChild(badge);
  }
  const next = root.ownerDocument.createElement("button");
  next.type = "button";
  next.id = "next-button";
  next.textContent = "Next";
  next.disabled = state.pending;
  next.addEventListener("click", () => handlers.onNext());
  panel.appendChild(next);
  return panel;
}

function renderDone(root: HTMLElement, state: DrillViewState): HTMLElement {
  const panel = el(root, "section", "done-panel");
  const headline = el(root, "p", "done", "All exercises learned!");
  headline.id = "done-message";
  panel.appendChild(headline);
  const { attempts, correct } = state.counters;
  panel.appendChild(
    el(root, "p", "done-counts", `Final score: ${correct}/${attempts}`),
  );
  return panel;
}

export function render(
  root: HTMLElement,
  state: DrillViewState,
  dialects: string[],
  handlers: ViewHandlers,
): void {
  root.textContent = "";
  root.appendChild(el(root, "h1", "title", "Inflection drills"));

  if (state.error !== null) {
    const banner = el(root, "div", "error-banner");
    banner.id = "error-banner";
    banner.appendChild(el(root, "span", "error-text", state.error));
    const retry = root.ownerDocument.createElement("button");
    retry.type = "button";
    retry.id = "retry-button";
    retry.textContent = "Retry";
    retry.addEventListener("click", () => handlers.onRetry());
    banner.appendChild(retry);
    root.appendChild(banner);
  }

  root.appendChild(renderDialectFilter(root, state, dialects, handlers));
  root.appendChild(renderProgress(root, state));

  if (state.phase === "loading") {
    const loading = el(root, "p", "loading", "Loading…");
    loading.id = "loading-message";
    root.appendChild(loading);
  } else if (state.phase === "prompt") {
    root.appendChild(renderPrompt(root, state, handlers));
  } else if (state.phase === "feedback") {
    root.appendChild(renderFeedback(root, state, handlers));
  } else {
    root.appendChild(renderDone(root, state));
  }
}
