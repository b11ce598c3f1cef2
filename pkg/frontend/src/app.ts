// Controller: drives the API client through the state machine and keeps a
// single request in flight at a time.

import { ApiError, DrillApi } from "./api.js";
import type { DrillViewState } from "./state.js";
import {
  initialState,
  toDone,
  toFeedback,
  toPrompt,
  withCounters,
  withDialect,
  withError,
  withPending,
} from "./state.js";
import { render } from "./view.js";
import type { ViewHandlers } from "./view.js";

export type StateListener = (state: DrillViewState) => void;

export class DrillController {
  state: DrillViewState;
  private session: string | null = null;
  private seenDialects = new Set<string>();

  constructor(
    private readonly api: DrillApi,
    private readonly onChange: StateListener = () => {},
  ) {
    this.state = initialState();
  }

  private update(state: DrillViewState): void {
    this.state = state;
    this.onChange(state);
  }

  dialects(): string[] {
    return [...this.seenDialects].sort();
  }

  async start(): Promise<void> {
    if (this.state.pending) {
      return;
    }
    this.update(withPending(this.state));
    try {
      this.session = await this.api.createSession();
    } catch (err) {
      this.update(withError(this.state, describe(err)));
      return;
    }
    await this.next();
  }

  async next(): Promise<void> {
    if (this.session === null) {
      await this.start();
      return;
    }
    this.update(withPending(this.state));
    try {
      const exercise = await this.api.nextExercise(
        this.session,
        this.state.dialect,
      );
      if (exercise.dialect) {
        this.seenDialects.add(exercise.dialect);
      }
      this.update(toPrompt(this.state, exercise));
    } catch (err) {
      if (err instanceof ApiError && err.code === "session_exhausted") {
        this.update(toDone(this.state));
        return;
      }
      this.update(withError(this.state, describe(err)));
    }
  }

  async submit(rawAttempt: string): Promise<void> {
    if (this.state.phase !== "prompt" || this.state.pending) {
      return;
    }
    const exercise = this.state.exercise;
    if (exercise === null || this.session === null) {
      return;
    }
    const attempt = rawAttempt.normalize("NFC").trim();
    this.update(withPending(this.state));
    try {
      const result = await this.api.submitAnswer(
        this.session,
        exercise.id,
        attempt,
      );
      this.update(toFeedback(this.state, result));
      await this.refreshCounters();
    } catch (err) {
      if (err instanceof ApiError && err.code === "unknown_exercise") {
        // The session no longer knows this exercise; resync by fetching
        // the next one.
        this.update({ ...this.state, phase: "feedback", pending: false });
        await this.next();
        return;
      }
      this.update(withError(this.state, describe(err)));
    }
  }

  async refreshCounters(): Promise<void> {
    if (this.session === null) {
      return;
    }
    try {
      const progress = await this.api.progress(this.session);
      this.update(
        withCounters(this.state, {
          attempts: progress.attempts,
          correct: progress.correct,
          boxes: progress.boxes,
          remaining: progress.remaining,
        }),
      );
    } catch {
      // Counter refresh is cosmetic; the local counts stand.
    }
  }

  setDialect(dialect: string | null): void {
    this.update(withDialect(this.state, dialect));
  }

  async retry(): Promise<void> {
    if (this.session === null) {
      await this.start();
    } else if (this.state.phase === "prompt") {
      // Re-render without the banner; the prompt is still valid.
      this.update({ ...this.state, error: null });
    } else {
      await this.next();
    }
  }
}

function describe(err: unknown): string {
  if (err instanceof ApiError) {
    return err.detail;
  }
  if (err instanceof Error) {
    return `network failure: ${err.message}`;
  }
  return "network failure";
}

export function bootstrap(root: HTMLElement, api: DrillApi): DrillController {
  const controller = new DrillController(api, (state) => {
    const handlers: ViewHandlers = {
      onSubmit: (attempt) => void controller.submit(attempt),
      onNext: () => void controller.next(),
      onRetry: () => void controller.retry(),
      onDialectChange: (dialect) => controller.setDialect(dialect),
    };
    render(root, state, controller.dialects(), handlers);
  });
  void controller.start();
  return controller;
}
