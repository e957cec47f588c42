// Typed client for the elicitation session service. All model quantities
// come from the server; the console never computes them locally.

export type SessionConfig = {
  problem_id?: string;
  problem_seed?: number;
  dataset_n?: number;
  dataset_seed?: number;
  dirichlet_alpha?: number;
  budget_t?: number;
  preselect_l?: number;
  estimator_kind?: string;
  clip_m?: number;
  seed?: number;
};

export type ObjectiveDisplay = {
  name: string;
  unit: string;
  value: number;
  normalized: number;
};

export type QueryView = {
  round: number;
  total: number;
  values: number[];
  display: ObjectiveDisplay[];
};

export type HistoryRow = {
  round: number;
  values: number[];
  display: ObjectiveDisplay[];
  answer: 0 | 1;
};

export type ResultView = {
  theta_hat: number[];
  final_policy: number[][];
  final_value: number[];
  final_value_display: ObjectiveDisplay[];
  utility_under_theta_hat: number;
  num_candidates: number;
  g_value: number | null;
};

export type SessionView = {
  session_id: string;
  state: 'awaiting_answer' | 'completed' | 'expired';
  progress: { answered: number; total: number };
  query?: QueryView;
  result?: ResultView;
  history?: HistoryRow[];
};

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
    this.name = 'ApiError';
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ServiceClient {
  constructor(
    private baseUrl: string,
    private fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, init);
    if (!res.ok) {
      let detail = res.statusText;
      try {
        const body = await res.json();
        detail = typeof body.detail === 'string' ? body.detail : JSON.stringify(body.detail);
      } catch {
        // non-JSON error body; keep the status text
      }
      throw new ApiError(res.status, detail);
    }
    return (await res.json()) as T;
  }

  listProblems(): Promise<{ problems: string[] }> {
    return this.request('/problems');
  }

  createSession(config: SessionConfig): Promise<SessionView> {
    return this.request('/sessions', {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(config),
    });
  }

  getSession(sessionId: string): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}`);
  }

  submitAnswer(sessionId: string, round: number, answer: 0 | 1): Promise<SessionView> {
    return this.request(`/sessions/${sessionId}/answers`, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify({ round, answer }),
    });
  }
}
