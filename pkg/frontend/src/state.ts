// Pure state machines for session and the login/register flow, kept free
// of DOM concerns so behavior is unit-testable.

import type { Role } from "./api.js";

export interface Session {
  token: string;
  username: string;
  role: Role;
  userId: string;
}

export type AuthStep = "credentials" | "payment" | "register";

export interface AuthState {
  step: AuthStep;
  username: string;
  plan: string;
  error: string | null;
  // Shown under the password field once an auth attempt failed.
  showForgotPassword: boolean;
  notice: string | null;
}

export const initialAuthState: AuthState = {
  step: "credentials",
  username: "",
  plan: "learner_basic",
  error: null,
  showForgotPassword: false,
  notice: null,
};

export type AuthEvent =
  | { kind: "open_register" }
  | { kind: "open_login" }
  | { kind: "login_failed"; status: number; message: string; username: string }
  | { kind: "login_succeeded" }
  | { kind: "registered"; username: string; plan: string }
  | { kind: "payment_confirmed" }
  | { kind: "payment_failed"; message: string }
  | { kind: "plan_chosen"; plan: string };

export function authReduce(state: AuthState, event: AuthEvent): AuthState {
  switch (event.kind) {
    case "open_register":
      return { ...initialAuthState, step: "register" };
    case "open_login":
      return { ...initialAuthState };
    case "login_failed":
      if (event.status === 402) {
        // Account exists but the subscription is unpaid: surface the
        // stub-payment step instead of a dead-end error.
        return {
          ...state,
          step: "payment",
          username: event.username,
          error: null,
          notice: "Your subscription is unpaid. Complete payment to log in.",
        };
      }
      return {
        ...state,
        step: "credentials",
        error: event.message,
        showForgotPassword: true,
      };
    case "login_succeeded":
      return { ...initialAuthState };
    case "registered":
      return {
        ...state,
        step: "payment",
        username: event.username,
        plan: event.plan,
        error: null,
        notice: "Account created. Complete the payment step to activate it.",
      };
    case "payment_confirmed":
      return {
        ...initialAuthState,
        username: state.username,
        notice: "Payment confirmed. You can log in now.",
      };
    case "payment_failed":
      return { ...state, error: event.message };
    case "plan_chosen":
      return { ...state, plan: event.plan };
  }
}

const SESSION_KEY = "coursechat.session";

export function saveSession(storage: Pick<Storage, "setItem">,
                            session: Session): void {
  storage.setItem(SESSION_KEY, JSON.stringify(session));
}

export function loadSession(
  storage: Pick<Storage, "getItem">,
): Session | null {
  const raw = storage.getItem(SESSION_KEY);
  if (!raw) {
    return null;
  }
  try {
    const parsed = JSON.parse(raw) as Session;
    if (parsed.token && parsed.username && parsed.role) {
      return parsed;
    }
  } catch {
    // fall through
  }
  return null;
}

export function clearSession(storage: Pick<Storage, "removeItem">): void {
  storage.removeItem(SESSION_KEY);
}
