// Typed client for the platform's JSON API. Every request goes through a
// fixed endpoint table, so the UI cannot issue a route the backend does not
// document; tests record traffic through the same funnel.

export type Role = "instructor" | "learner";
export type Visibility = "public" | "private";
export type PromptMode = "restricted" | "relaxed" | "medical";

export interface Course {
  course_id: string;
  title: string;
  slug: string;
  visibility: Visibility;
  owner_id: string;
  created_at: string;
  manifest_version?: number | null;
  n_documents?: number;
}

export interface ChatReply {
  answer: string;
  context_chunk_ids: string[];
  turn_id: string;
}

export interface ChatTurn {
  turn_id: string;
  user_id: string;
  mode: PromptMode;
  question: string;
  context_chunk_ids: string[];
  rendered_prompt: string;
  answer: string;
  model_id: string;
  latency_ms: number;
  created_at: string;
}

export interface JobStatus {
  job_id: string;
  course_id: string;
  status: "queued" | "building" | "done" | "failed";
  manifest_version?: number;
  error?: string;
}

export interface QuizQuestion {
  question_text: string;
  options: string[];
  correct_index?: number;
}

export interface Quiz {
  quiz_id: string;
  course_id: string;
  module_label: string;
  questions: QuizQuestion[];
  created_at: string;
}

export type WeakModuleReport = Record<string, number>;

export interface TimeReport {
  course_id: string;
  avg_seconds: number;
}

export class ApiRequestError extends Error {
  status: number;
  code: string;

  constructor(status: number, code: string, message: string) {
    super(message);
    this.status = status;
    this.code = code;
  }
}

// The complete published surface of the backend, as (method, path template).
export const DOCUMENTED_ENDPOINTS: ReadonlySet<string> = new Set([
  "POST /auth/register",
  "POST /auth/pay",
  "POST /auth/login",
  "POST /auth/logout",
  "POST /auth/reset-request",
  "POST /auth/reset-confirm",
  "GET /courses",
  "POST /courses",
  "GET /courses/{course_id}",
  "POST /courses/{course_id}/grants",
  "DELETE /courses/{course_id}/grants/{user_id}",
  "POST /courses/{course_id}/documents",
  "POST /courses/{course_id}/youtube",
  "GET /jobs/{job_id}",
  "POST /courses/{course_id}/chat",
  "GET /courses/{course_id}/turns",
  "GET /courses/{course_id}/analytics/weak-modules",
  "GET /courses/{course_id}/analytics/time",
  "POST /courses/{course_id}/quizzes",
  "GET /courses/{course_id}/quizzes",
  "POST /quizzes/{quiz_id}/attempts",
  "POST /courses/{course_id}/sessions",
  "POST /sessions/{session_id}/end",
]);

export interface RecordedCall {
  method: string;
  template: string;
  path: string;
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  baseUrl: string;
  token: string | null = null;
  readonly recorded: RecordedCall[] = [];
  private fetchImpl: FetchLike;

  constructor(baseUrl = "", fetchImpl?: FetchLike) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchImpl = fetchImpl ?? ((input, init) => fetch(input, init));
  }

  private async request<T>(
    method: string,
    template: string,
    params: Record<string, string> = {},
    options: { json?: unknown; body?: FormData; query?: Record<string, string> } = {},
  ): Promise<T> {
    const key = `${method} ${template}`;
    if (!DOCUMENTED_ENDPOINTS.has(key)) {
      throw new Error(`undocumented endpoint: ${key}`);
    }
    let path = template;
    for (const [name, value] of Object.entries(params)) {
      path = path.replace(`{${name}}`, encodeURIComponent(value));
    }
    this.recorded.push({ method, template, path });

    const headers: Record<string, string> = {};
    if (this.token) {
      headers["Authorization"] = `Bearer ${this.token}`;
    }
    let body: BodyInit | undefined;
    if (options.json !== undefined) {
      headers["Content-Type"] = "application/json";
      body = JSON.stringify(options.json);
    } else if (options.body) {
      body = options.body;
    }
    let url = this.baseUrl + path;
    if (options.query) {
      url += "?" + new URLSearchParams(options.query).toString();
    }
    const resp = await this.fetchImpl(url, { method, headers, body });
    if (resp.status === 204) {
      return undefined as T;
    }
    const text = await resp.text();
    let parsed: unknown = null;
    try {
      parsed = text ? JSON.parse(text) : null;
    } catch {
      parsed = null;
    }
    if (!resp.ok) {
      const err = (parsed ?? {}) as { code?: string; message?: string };
      throw new ApiRequestError(
        resp.status,
        err.code ?? "unknown_error",
        err.message ?? `request failed with ${resp.status}`,
      );
    }
    return parsed as T;
  }

  // --- auth ---------------------------------------------------------------

  register(username: string, email: string, password: string, role: Role,
           plan: string) {
    return this.request<{ user_id: string; status: string }>(
      "POST", "/auth/register", {},
      { json: { username, email, password, role, plan } },
    );
  }

  pay(username: string, plan: string) {
    return this.request<{ payment_id: string; merchant_txn_id: string; status: string }>(
      "POST", "/auth/pay", {}, { json: { username, plan } },
    );
  }

  async login(username: string, password: string) {
    const reply = await this.request<{
      token: string;
      expires_at: string;
      user_id: string;
      username: string;
      role: Role;
    }>("POST", "/auth/login", {}, { json: { username, password } });
    this.token = reply.token;
    return reply;
  }

  async logout() {
    await this.request<void>("POST", "/auth/logout");
    this.token = null;
  }

  requestPasswordReset(username: string) {
    return this.request<{ reset_token: string; expires_at: string }>(
      "POST", "/auth/reset-request", {}, { json: { username } },
    );
  }

  confirmPasswordReset(resetToken: string, newPassword: string) {
    return this.request<void>(
      "POST", "/auth/reset-confirm", {},
      { json: { reset_token: resetToken, new_password: newPassword } },
    );
  }

  // --- courses --------------------------------------------------------------

  listCourses() {
    return this.request<Course[]>("GET", "/courses");
  }

  createCourse(title: string, visibility: Visibility) {
    return this.request<Course>("POST", "/courses", {},
                                { json: { title, visibility } });
  }

  courseDetail(courseId: string) {
    return this.request<Course>("GET", "/courses/{course_id}",
                                { course_id: courseId });
  }

  grantAccess(courseId: string, userId: string) {
    return this.request<void>("POST", "/courses/{course_id}/grants",
                              { course_id: courseId },
                              { json: { user_id: userId } });
  }

  revokeAccess(courseId: string, userId: string) {
    return this.request<void>(
      "DELETE", "/courses/{course_id}/grants/{user_id}",
      { course_id: courseId, user_id: userId },
    );
  }

  // --- ingestion ---------------------------------------------------------------

  uploadDocument(courseId: string, file: File, declaredFormat: string) {
    const form = new FormData();
    form.append("file", file);
    form.append("declared_format", declaredFormat);
    return this.request<{ job_id: string }>(
      "POST", "/courses/{course_id}/documents",
      { course_id: courseId }, { body: form },
    );
  }

  ingestYoutube(courseId: string, url: string, preferredLangs: string[]) {
    return this.request<{ job_id: string }>(
      "POST", "/courses/{course_id}/youtube",
      { course_id: courseId },
      { json: { url, preferred_langs: preferredLangs } },
    );
  }

  jobStatus(jobId: string) {
    return this.request<JobStatus>("GET", "/jobs/{job_id}",
                                   { job_id: jobId });
  }

  // --- chat ------------------------------------------------------------------

  chat(courseId: string, question: string, mode: PromptMode, k = 4) {
    return this.request<ChatReply>(
      "POST", "/courses/{course_id}/chat",
      { course_id: courseId }, { json: { question, mode, k } },
    );
  }

  listTurns(courseId: string) {
    return this.request<ChatTurn[]>("GET", "/courses/{course_id}/turns",
                                    { course_id: courseId });
  }

  // --- analytics ----------------------------------------------------------------

  weakModules(courseId: string, threshold: number) {
    return this.request<WeakModuleReport>(
      "GET", "/courses/{course_id}/analytics/weak-modules",
      { course_id: courseId },
      { query: { threshold: String(threshold) } },
    );
  }

  timeSpent(courseId: string) {
    return this.request<TimeReport>(
      "GET", "/courses/{course_id}/analytics/time",
      { course_id: courseId },
    );
  }

  createQuiz(courseId: string, moduleLabel: string, nQuestions: number) {
    return this.request<Quiz>(
      "POST", "/courses/{course_id}/quizzes",
      { course_id: courseId },
      { json: { module_label: moduleLabel, n_questions: nQuestions } },
    );
  }

  listQuizzes(courseId: string) {
    return this.request<Quiz[]>("GET", "/courses/{course_id}/quizzes",
                                { course_id: courseId });
  }

  submitAttempt(quizId: string, answers: number[]) {
    return this.request<{ attempt_id: string; score: number }>(
      "POST", "/quizzes/{quiz_id}/attempts",
      { quiz_id: quizId }, { json: { answers } },
    );
  }

  // --- study sessions ---------------------------------------------------------------

  startSession(courseId: string) {
    return this.request<{ session_id: string; started_at: string }>(
      "POST", "/courses/{course_id}/sessions", { course_id: courseId },
    );
  }

  endSession(sessionId: string) {
    return this.request<{ session_id: string; seconds: number }>(
      "POST", "/sessions/{session_id}/end", { session_id: sessionId },
    );
  }
}
