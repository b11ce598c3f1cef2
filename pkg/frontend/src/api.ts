// Typed client for the drill service JSON API.

export interface ExerciseView {
  id: string;
  lexeme_id: string;
  variant_form: string;
  dialect: string | null;
  slot: string;
  prompt: string;
  provenance: "attested" | "predicted";
}

export interface AnswerResult {
  correct: boolean;
  expected: string;
  box: number;
}

export interface Progress {
  session_id: string;
  boxes: Record<string, number>;
  attempts: number;
  correct: number;
  accuracy: number;
  remaining: number;
  done: boolean;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    readonly detail: string,
  ) {
    super(`${code}: ${detail}`);
    this.name = "ApiError";
  }
}

export type FetchLike = (
  input: string,
  init?: RequestInit,
) => Promise<Response>;

async function readJson(response: Response): Promise<unknown> {
  try {
    return await response.json();
  } catch {
    throw new ApiError(response.status, "bad_response", "response was not JSON");
  }
}

export class DrillApi {
  private readonly fetchImpl: FetchLike;

  constructor(
    readonly baseUrl: string = "",
    fetchImpl?: FetchLike,
  ) {
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const payload = await readJson(response);
    if (!response.ok) {
      const body = payload as { error?: string; detail?: string };
      throw new ApiError(
        response.status,
        body.error ?? "bad_response",
        body.detail ?? "request failed",
      );
    }
    return payload;
  }

  async createSession(): Promise<string> {
    const payload = (await this.request("/api/session")) as {
      session_id: string;
    };
    return payload.session_id;
  }

  async nextExercise(
    session: string,
    dialect: string | null = null,
  ): Promise<ExerciseView> {
    const params = new URLSearchParams({ session });
    if (dialect !== null) {
      params.set("dialect", dialect);
    }
    return (await this.request(
      `/api/exercise/next?${params.toString()}`,
    )) as ExerciseView;
  }

  async submitAnswer(
    session: string,
    exerciseId: string,
    attempt: string,
  ): Promise<AnswerResult> {
    return (await this.request(
      `/api/exercise/${encodeURIComponent(exerciseId)}/answer`,
      {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ session, attempt }),
      },
    )) as AnswerResult;
  }

  async progress(session: string): Promise<Progress> {
    const params = new URLSearchParams({ session });
    return (await this.request(
      `/api/progress?${params.toString()}`,
    )) as Progress;
  }
}
