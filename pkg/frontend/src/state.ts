// Pure view-state machine for the drill screen.
//
// Legal phase transitions:
//
//   loading -> prompt      (exercise served)
//   loading -> done        (session already exhausted)
//   prompt  -> feedback    (answer submitted)
//   feedback -> prompt     (next exercise served)
//   feedback -> done       (session exhausted)
//
// Everything else throws.  Network failures never change phase; they set a
// retryable error banner on the current state.

import type { AnswerResult, ExerciseView } from "./api.js";

export type Phase = "loading" | "prompt" | "feedback" | "done";

export interface Counters {
  attempts: number;
  correct: number;
  boxes: Record<string, number>;
  remaining: number;
}

export interface DrillViewState {
  phase: Phase;
  exercise: ExerciseView | null;
  result: AnswerResult | null;
  counters: Counters;
  dialect: string | null;
  error: string | null;
  pending: boolean;
}

export function initialState(): DrillViewState {
  return {
    phase: "loading",
    exercise: null,
    result: null,
    counters: { attempts: 0, correct: 0, boxes: {}, remaining: 0 },
    dialect: null,
    error: null,
    pending: false,
  };
}

class IllegalTransition extends Error {
  constructor(from: Phase, to: Phase) {
    super(`illegal transition ${from} -> ${to}`);
    this.name = "IllegalTransition";
  }
}

function expectPhase(state: DrillViewState, allowed: Phase[], to: Phase): void {
  if (!allowed.includes(state.phase)) {
    throw new IllegalTransition(state.phase, to);
  }
}

export function toPrompt(
  state: DrillViewState,
  exercise: ExerciseView,
): DrillViewState {
  expectPhase(state, ["loading", "feedback"], "prompt");
  return {
    ...state,
    phase: "prompt",
    exercise,
    result: null,
    error: null,
    pending: false,
  };
}

export function toFeedback(
  state: DrillViewState,
  result: AnswerResult,
): DrillViewState {
  expectPhase(state, ["prompt"], "feedback");
  return {
    ...state,
    phase: "feedback",
    result,
    error: null,
    pending: false,
    counters: {
      ...state.counters,
      attempts: state.counters.attempts + 1,
      correct: state.counters.correct + (result.correct ? 1 : 0),
    },
  };
}

export function toDone(state: DrillViewState): DrillViewState {
  expectPhase(state, ["loading", "feedback"], "done");
  return {
    ...state,
    phase: "done",
    exercise: null,
    result: null,
    error: null,
    pending: false,
  };
}

export function withCounters(
  state: DrillViewState,
  counters: Counters,
): DrillViewState {
  return { ...state, counters };
}

export function withError(
  state: DrillViewState,
  message: string,
): DrillViewState {
  return { ...state, error: message, pending: false };
}

export function withPending(state: DrillViewState): DrillViewState {
  return { ...state, pending: true };
}

export function withDialect(
  state: DrillViewState,
  dialect: string | null,
): DrillViewState {
  return { ...state, dialect };
}
