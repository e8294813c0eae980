// View renderers: pure functions from data to HTML strings. All dynamic
// text is escaped; answers (refusals included) render verbatim as text.

import type { ChatTurn, Course, JobStatus, PromptMode, Quiz } from "./api.js";
import { barChart, weakModuleBars } from "./charts.js";
import type { AuthState } from "./state.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

const PLANS = [
  { id: "learner_basic", label: "Learner plan" },
  { id: "instructor_basic", label: "Instructor plan" },
];

export function loginView(auth: AuthState): string {
  if (auth.step === "payment") {
    return paymentStepView(auth);
  }
  return `
    <section class="panel" data-view="login">
      <h1>Sign in</h1>
      ${auth.notice ? `<p class="notice">${escapeHtml(auth.notice)}</p>` : ""}
      ${auth.error ? `<p class="error" data-testid="login-error">${escapeHtml(auth.error)}</p>` : ""}
      <form data-action="login">
        <label>Username <input name="username" required
          value="${escapeHtml(auth.username)}"></label>
        <label>Password <input name="password" type="password" required></label>
        ${auth.showForgotPassword
          ? `<a href="#/login" class="forgot" data-action="forgot-password"
               data-testid="forgot-password">Forgot Password?</a>`
          : ""}
        <button type="submit">Log in</button>
      </form>
      <p><a href="#/register" data-testid="create-account">Create Account</a></p>
    </section>
  `;
}

function paymentStepView(auth: AuthState): string {
  return `
    <section class="panel" data-view="payment" data-testid="payment-step">
      <h1>Complete payment</h1>
      ${auth.notice ? `<p class="notice">${escapeHtml(auth.notice)}</p>` : ""}
      ${auth.error ? `<p class="error">${escapeHtml(auth.error)}</p>` : ""}
      <p>Subscription for <strong>${escapeHtml(auth.username)}</strong></p>
      <form data-action="pay">
        <label>Plan
          <select name="plan">
            ${PLANS.map(
              (p) => `<option value="${p.id}"
                ${p.id === auth.plan ? "selected" : ""}>${p.label}</option>`,
            ).join("")}
          </select>
        </label>
        <button type="submit">Pay now</button>
      </form>
      <p><a href="#/login" data-action="back-to-login">Back to sign in</a></p>
    </section>
  `;
}

export function registerView(auth: AuthState): string {
  return `
    <section class="panel" data-view="register">
      <h1>Create Account</h1>
      ${auth.error ? `<p class="error">${escapeHtml(auth.error)}</p>` : ""}
      <form data-action="register">
        <label>Username <input name="username" required></label>
        <label>Email <input name="email" type="email" required></label>
        <label>Password <input name="password" type="password"
          minlength="8" required></label>
        <label>Role
          <select name="role">
            <option value="learner">Learner</option>
            <option value="instructor">Instructor</option>
          </select>
        </label>
        <label>Plan
          <select name="plan">
            ${PLANS.map((p) => `<option value="${p.id}">${p.label}</option>`).join("")}
          </select>
        </label>
        <button type="submit">Register</button>
      </form>
      <p><a href="#/login">Back to sign in</a></p>
    </section>
  `;
}

export function coursesView(courses: Course[], role: string): string {
  const rows = courses
    .map(
      (c) => `
      <li class="course-row" data-course-id="${escapeHtml(c.course_id)}">
        <a href="#/courses/${escapeHtml(c.course_id)}/chat"
           class="course-title">${escapeHtml(c.title)}</a>
        <span class="badge">${c.visibility}</span>
      </li>`,
    )
    .join("");
  return `
    <section class="panel" data-view="courses">
      <h1>Your courses</h1>
      <ul class="course-list">${rows || "<li class='muted'>No courses yet.</li>"}</ul>
      ${role === "instructor"
        ? `<p><a href="#/dashboard" data-testid="dashboard-link">Instructor dashboard</a></p>`
        : ""}
    </section>
  `;
}

export function dashboardView(authored: Course[],
                              jobs: JobStatus[]): string {
  const courseRows = authored
    .map(
      (c) => `
      <li class="course-row" data-course-id="${escapeHtml(c.course_id)}">
        <strong>${escapeHtml(c.title)}</strong>
        <span class="badge">${c.visibility}</span>
        <span class="muted">index v${c.manifest_version ?? "–"}</span>
        <a href="#/courses/${escapeHtml(c.course_id)}/analytics">analytics</a>
        <details>
          <summary>manage</summary>
          <form data-action="upload-document"
                data-course-id="${escapeHtml(c.course_id)}">
            <input type="file" name="file" required>
            <select name="declared_format">
              <option value="txt">txt</option>
              <option value="md">md</option>
              <option value="csv">csv</option>
            </select>
            <button type="submit">Upload document</button>
          </form>
          <form data-action="ingest-youtube"
                data-course-id="${escapeHtml(c.course_id)}">
            <input name="url" placeholder="YouTube URL" required>
            <input name="langs" value="en" size="6">
            <button type="submit">Ingest video</button>
          </form>
          <form data-action="grant" data-course-id="${escapeHtml(c.course_id)}">
            <input name="user_id" placeholder="user id" required>
            <button type="submit">Grant access</button>
            <button type="button" data-action="revoke">Revoke</button>
          </form>
        </details>
      </li>`,
    )
    .join("");
  const jobRows = jobs
    .map(
      (j) => `
      <li data-job-id="${escapeHtml(j.job_id)}" class="job-${j.status}">
        ${escapeHtml(j.job_id.slice(0, 8))}: ${j.status}
        ${j.manifest_version != null ? `(index v${j.manifest_version})` : ""}
        ${j.error ? `<span class="error">${escapeHtml(j.error)}</span>` : ""}
      </li>`,
    )
    .join("");
  return `
    <section class="panel" data-view="dashboard">
      <h1>Instructor dashboard</h1>
      <form data-action="create-course" class="inline-form">
        <input name="title" placeholder="New course title" required>
        <select name="visibility">
          <option value="private">private</option>
          <option value="public">public</option>
        </select>
        <button type="submit">Create course</button>
      </form>
      <h2>Authored courses</h2>
      <ul class="course-list">${courseRows || "<li class='muted'>None yet.</li>"}</ul>
      <h2>Ingestion jobs</h2>
      <ul class="job-list">${jobRows || "<li class='muted'>No jobs.</li>"}</ul>
    </section>
  `;
}

export function chatView(course: Course, turns: ChatTurn[],
                         mode: PromptMode, busy: boolean): string {
  const messages = turns
    .map(
      (t) => `
      <div class="turn">
        <p class="question">${escapeHtml(t.question)}</p>
        <p class="answer" data-testid="answer">${escapeHtml(t.answer)}</p>
        <details class="context">
          <summary>${t.context_chunk_ids.length} context chunk(s)</summary>
          <ul>${t.context_chunk_ids
            .map((id) => `<li class="chunk-id">${escapeHtml(id)}</li>`)
            .join("")}</ul>
        </details>
      </div>`,
    )
    .join("");
  const modes: PromptMode[] = ["restricted", "relaxed", "medical"];
  return `
    <section class="panel" data-view="chat">
      <h1>${escapeHtml(course.title)}</h1>
      <div class="messages">${messages || "<p class='muted'>Ask away.</p>"}</div>
      <form data-action="ask" data-course-id="${escapeHtml(course.course_id)}">
        <select name="mode" data-testid="mode-select">
          ${modes
            .map(
              (m) => `<option value="${m}" ${m === mode ? "selected" : ""}>${m}</option>`,
            )
            .join("")}
        </select>
        <input name="question" placeholder="Ask about this course" required
          ${busy ? "disabled" : ""}>
        <button type="submit" ${busy ? "disabled" : ""}>
          ${busy ? "Thinking…" : "Send"}
        </button>
      </form>
    </section>
  `;
}

export function analyticsView(course: Course,
                              weak: Record<string, number>,
                              avgSeconds: number,
                              threshold: number): string {
  return `
    <section class="panel" data-view="analytics">
      <h1>${escapeHtml(course.title)} analytics</h1>
      <h2>Users with weak scores per module</h2>
      <label class="slider">
        Weak-score threshold: <output>${threshold.toFixed(2)}</output>
        <input type="range" min="0.05" max="0.95" step="0.05"
               value="${threshold}" name="threshold"
               data-action="threshold" data-testid="threshold-slider"
               data-course-id="${escapeHtml(course.course_id)}">
      </label>
      <div class="chart-holder" data-testid="weak-modules-chart">
        ${barChart(weakModuleBars(weak))}
      </div>
      <h2>Average time on course</h2>
      <div class="chart-holder" data-testid="time-chart">
        ${barChart([{ label: course.title, value: Math.round(avgSeconds) }],
                   { unit: "s" })}
      </div>
    </section>
  `;
}

export function deniedView(): string {
  return `
    <section class="panel" data-view="denied">
      <h1>Not available</h1>
      <p class="muted">This area is for instructors.</p>
    </section>
  `;
}
