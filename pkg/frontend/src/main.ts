// Browser entry point: binds the API client, router, and views together.
// All interaction goes through event delegation on the app root.

import { ApiClient, ApiRequestError } from "./api.js";
import type { Course, JobStatus, PromptMode } from "./api.js";
import {
  authReduce,
  clearSession,
  initialAuthState,
  loadSession,
  saveSession,
} from "./state.js";
import type { AuthState, Session } from "./state.js";
import { hashFor, parseHash, resolve } from "./router.js";
import {
  analyticsView,
  chatView,
  coursesView,
  dashboardView,
  deniedView,
  loginView,
  registerView,
} from "./views.js";

const JOB_POLL_MS = 2000;

const root = document.querySelector<HTMLElement>("#app");
const api = new ApiClient(
  (window as { COURSECHAT_API_BASE?: string }).COURSECHAT_API_BASE ?? "",
);

let session: Session | null = loadSession(localStorage);
if (session) {
  api.token = session.token;
}
let auth: AuthState = { ...initialAuthState };
let chatMode: PromptMode = "restricted";
let chatBusy = false;
let threshold = 0.5;
let trackedJobs: JobStatus[] = [];
let pollTimer: number | null = null;

function navigate(hash: string) {
  window.location.hash = hash;
}

async function render() {
  if (!root) {
    return;
  }
  const route = resolve(parseHash(window.location.hash),
                        session?.role ?? null);
  try {
    switch (route.name) {
      case "login":
        root.innerHTML = loginView(auth);
        return;
      case "register":
        root.innerHTML = registerView(auth);
        return;
      case "courses": {
        const courses = await api.listCourses();
        root.innerHTML = coursesView(courses, session?.role ?? "learner");
        return;
      }
      case "course":
      case "chat": {
        const course = await api.courseDetail(route.params.courseId);
        const turns = await api.listTurns(route.params.courseId);
        root.innerHTML = chatView(course, turns, chatMode, chatBusy);
        return;
      }
      case "dashboard": {
        const courses = await api.listCourses();
        const authored = courses.filter(
          (c: Course) => c.owner_id === session?.userId,
        );
        root.innerHTML = dashboardView(authored, trackedJobs);
        return;
      }
      case "analytics": {
        const course = await api.courseDetail(route.params.courseId);
        const weak = await api.weakModules(route.params.courseId, threshold);
        const time = await api.timeSpent(route.params.courseId);
        root.innerHTML = analyticsView(course, weak, time.avg_seconds,
                                       threshold);
        return;
      }
      default:
        root.innerHTML = deniedView();
    }
  } catch (err) {
    if (err instanceof ApiRequestError && err.status === 401) {
      session = null;
      clearSession(localStorage);
      api.token = null;
      navigate("#/login");
      return;
    }
    root.innerHTML = `<section class="panel"><p class="error">${
      err instanceof Error ? err.message : String(err)
    }</p></section>`;
  }
}

function trackJob(jobId: string) {
  const poll = async () => {
    try {
      const status = await api.jobStatus(jobId);
      trackedJobs = [
        status,
        ...trackedJobs.filter((j) => j.job_id !== jobId),
      ].slice(0, 10);
      await render();
      if (status.status === "queued" || status.status === "building") {
        pollTimer = window.setTimeout(poll, JOB_POLL_MS);
      }
    } catch {
      // job endpoints are owner-gated; stop polling on error
    }
  };
  if (pollTimer !== null) {
    window.clearTimeout(pollTimer);
  }
  void poll();
}

async function handleSubmit(event: SubmitEvent) {
  const form = event.target as HTMLFormElement;
  const action = form.dataset.action;
  if (!action) {
    return;
  }
  event.preventDefault();
  const fields = new FormData(form);
  const text = (name: string) => String(fields.get(name) ?? "");

  try {
    switch (action) {
      case "login": {
        try {
          const reply = await api.login(text("username"), text("password"));
          session = {
            token: reply.token,
            username: reply.username,
            role: reply.role,
            userId: reply.user_id,
          };
          saveSession(localStorage, session);
          auth = authReduce(auth, { kind: "login_succeeded" });
          navigate("#/courses");
        } catch (err) {
          if (err instanceof ApiRequestError) {
            auth = authReduce(auth, {
              kind: "login_failed",
              status: err.status,
              message: err.message,
              username: text("username"),
            });
            await render();
            return;
          }
          throw err;
        }
        break;
      }
      case "register": {
        await api.register(text("username"), text("email"), text("password"),
                           text("role") as Session["role"], text("plan"));
        auth = authReduce(auth, {
          kind: "registered",
          username: text("username"),
          plan: text("plan"),
        });
        navigate("#/login");
        break;
      }
      case "pay": {
        try {
          await api.pay(auth.username, text("plan"));
          auth = authReduce(auth, { kind: "payment_confirmed" });
        } catch (err) {
          auth = authReduce(auth, {
            kind: "payment_failed",
            message: err instanceof Error ? err.message : String(err),
          });
        }
        break;
      }
      case "create-course": {
        await api.createCourse(text("title"),
                               text("visibility") as Course["visibility"]);
        break;
      }
      case "upload-document": {
        const file = fields.get("file");
        if (file instanceof File) {
          const job = await api.uploadDocument(
            form.dataset.courseId ?? "", file, text("declared_format"),
          );
          trackJob(job.job_id);
        }
        break;
      }
      case "ingest-youtube": {
        const job = await api.ingestYoutube(
          form.dataset.courseId ?? "", text("url"),
          text("langs").split(",").map((s) => s.trim()).filter(Boolean),
        );
        trackJob(job.job_id);
        break;
      }
      case "grant": {
        await api.grantAccess(form.dataset.courseId ?? "", text("user_id"));
        break;
      }
      case "ask": {
        chatBusy = true;
        await render();
        chatMode = text("mode") as PromptMode;
        try {
          await api.chat(form.dataset.courseId ?? "", text("question"),
                         chatMode);
        } finally {
          chatBusy = false;
        }
        break;
      }
      default:
        return;
    }
    await render();
  } catch (err) {
    chatBusy = false;
    if (root) {
      const message = err instanceof Error ? err.message : String(err);
      root.insertAdjacentHTML(
        "afterbegin",
        `<p class="error banner">${message.replace(/</g, "&lt;")}</p>`,
      );
    }
  }
}

async function handleClick(event: MouseEvent) {
  const target = event.target as HTMLElement;
  const action = target.dataset.action;
  if (action === "revoke") {
    const form = target.closest("form");
    if (form) {
      const userId = String(new FormData(form).get("user_id") ?? "");
      if (userId) {
        event.preventDefault();
        await api.revokeAccess(form.dataset.courseId ?? "", userId);
        await render();
      }
    }
  }
  if (action === "logout") {
    event.preventDefault();
    await api.logout().catch(() => undefined);
    session = null;
    clearSession(localStorage);
    navigate("#/login");
  }
}

async function handleInput(event: Event) {
  const target = event.target as HTMLInputElement;
  if (target.dataset.action === "threshold") {
    threshold = Number(target.value);
    await render();
  }
}

if (root) {
  window.addEventListener("hashchange", () => void render());
  root.addEventListener("submit", (e) => void handleSubmit(e));
  root.addEventListener("click", (e) => void handleClick(e));
  root.addEventListener("change", (e) => void handleInput(e));
  void render();
}
