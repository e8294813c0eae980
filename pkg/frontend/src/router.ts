// Hash-based routing with role gating: instructor-only views are not
// reachable from a learner session.

import type { Role } from "./api.js";

export type RouteName =
  | "login"
  | "register"
  | "courses"
  | "course"
  | "chat"
  | "dashboard"
  | "analytics"
  | "not_found";

export interface Route {
  name: RouteName;
  params: Record<string, string>;
}

const INSTRUCTOR_ONLY: ReadonlySet<RouteName> = new Set([
  "dashboard",
  "analytics",
]);

const PUBLIC: ReadonlySet<RouteName> = new Set(["login", "register"]);

export function parseHash(hash: string): Route {
  const raw = hash.replace(/^#/, "").replace(/^\//, "");
  const parts = raw.split("/").filter(Boolean);
  if (parts.length === 0) {
    return { name: "courses", params: {} };
  }
  switch (parts[0]) {
    case "login":
      return { name: "login", params: {} };
    case "register":
      return { name: "register", params: {} };
    case "courses":
      if (parts[1] && parts[2] === "chat") {
        return { name: "chat", params: { courseId: parts[1] } };
      }
      if (parts[1] && parts[2] === "analytics") {
        return { name: "analytics", params: { courseId: parts[1] } };
      }
      if (parts[1]) {
        return { name: "course", params: { courseId: parts[1] } };
      }
      return { name: "courses", params: {} };
    case "dashboard":
      return { name: "dashboard", params: {} };
    default:
      return { name: "not_found", params: {} };
  }
}

export function routeAllowed(route: Route, role: Role | null): boolean {
  if (PUBLIC.has(route.name)) {
    return true;
  }
  if (role === null) {
    return false;
  }
  if (INSTRUCTOR_ONLY.has(route.name)) {
    return role === "instructor";
  }
  return true;
}

/** Resolve the route a session may actually see; gated routes bounce. */
export function resolve(route: Route, role: Role | null): Route {
  if (routeAllowed(route, role)) {
    return route;
  }
  if (role === null) {
    return { name: "login", params: {} };
  }
  return { name: "courses", params: {} };
}

export function hashFor(route: Route): string {
  switch (route.name) {
    case "login":
      return "#/login";
    case "register":
      return "#/register";
    case "courses":
      return "#/courses";
    case "course":
      return `#/courses/${route.params.courseId}`;
    case "chat":
      return `#/courses/${route.params.courseId}/chat`;
    case "analytics":
      return `#/courses/${route.params.courseId}/analytics`;
    case "dashboard":
      return "#/dashboard";
    default:
      return "#/";
  }
}
