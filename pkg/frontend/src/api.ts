// Typed client for the cfgeq HTTP API. The UI never synthesizes explanation
// text: everything rendered comes from these response shapes.

export interface ExerciseInfo {
  id: string;
  target: string;
  witness: string[] | null;
  description: string;
}

export interface CounterexamplePiece {
  word: string;
  side: "only_in_left" | "only_in_right";
}

export interface StructuralPiece {
  word: string;
  witness: string[];
}

export interface ParikhPiece {
  formula: string;
  valuation: Record<string, number>;
  concise: boolean;
}

export interface SetNotationPiece {
  rendered: string;
  concise?: boolean;
}

export interface BugFixPiece {
  transformation: string;
  grammar: string;
}

export interface ExplanationJson {
  counterexample?: CounterexamplePiece;
  structural_counterexample?: StructuralPiece;
  parikh_difference?: ParikhPiece;
  attempt_set_notation?: SetNotationPiece;
  target_set_notation?: SetNotationPiece;
  bug_fix?: BugFixPiece;
}

export interface AttemptResponse {
  verdict: "equivalent" | "not_equivalent" | "undecided";
  method: string;
  cache_tier: "none" | "canon" | "simplified" | "normalized";
  explanation: ExplanationJson | null;
}

export interface ClusterInfo {
  id: string;
  kind: "solution" | "error" | "unrecognized";
  representative: string;
  member_count: number;
  member_keys: string[];
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class CfgeqClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, {
      headers: { "Content-Type": "application/json" },
      ...init,
    });
    const body = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof body === "object" && body !== null && "detail" in body
          ? String((body as { detail: unknown }).detail)
          : `HTTP ${response.status}`;
      throw new ApiError(response.status, detail);
    }
    return body as T;
  }

  getExercise(id: string): Promise<ExerciseInfo> {
    return this.request(`/exercises/${encodeURIComponent(id)}`);
  }

  submitAttempt(exerciseId: string, grammar: string): Promise<AttemptResponse> {
    return this.request(`/exercises/${encodeURIComponent(exerciseId)}/attempts`, {
      method: "POST",
      body: JSON.stringify({ grammar }),
    });
  }

  getClusters(exerciseId: string): Promise<{ clusters: ClusterInfo[] }> {
    return this.request(`/exercises/${encodeURIComponent(exerciseId)}/clusters`);
  }

  classifyCluster(
    clusterId: string,
    verdict: "equivalent" | "not_equivalent",
    rationale: string,
  ): Promise<{ cached_keys: number }> {
    return this.request(`/clusters/${encodeURIComponent(clusterId)}/classification`, {
      method: "POST",
      body: JSON.stringify({ verdict, rationale }),
    });
  }
}
