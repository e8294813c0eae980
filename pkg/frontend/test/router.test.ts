import assert from "node:assert/strict";
import { test } from "node:test";

import { hashFor, parseHash, resolve, routeAllowed } from "../src/router.js";

test("hash parsing covers the app's views", () => {
  assert.deepEqual(parseHash(""), { name: "courses", params: {} });
  assert.deepEqual(parseHash("#/login"), { name: "login", params: {} });
  assert.deepEqual(parseHash("#/register"), { name: "register", params: {} });
  assert.deepEqual(parseHash("#/courses"), { name: "courses", params: {} });
  assert.deepEqual(parseHash("#/courses/c1"), {
    name: "course", params: { courseId: "c1" },
  });
  assert.deepEqual(parseHash("#/courses/c1/chat"), {
    name: "chat", params: { courseId: "c1" },
  });
  assert.deepEqual(parseHash("#/courses/c1/analytics"), {
    name: "analytics", params: { courseId: "c1" },
  });
  assert.deepEqual(parseHash("#/dashboard"), { name: "dashboard", params: {} });
  assert.deepEqual(parseHash("#/junk"), { name: "not_found", params: {} });
});

test("learners cannot reach instructor views", () => {
  const dashboard = parseHash("#/dashboard");
  const analytics = parseHash("#/courses/c1/analytics");
  assert.equal(routeAllowed(dashboard, "learner"), false);
  assert.equal(routeAllowed(analytics, "learner"), false);
  // Gated routes bounce the learner to their course list.
  assert.deepEqual(resolve(dashboard, "learner"),
                   { name: "courses", params: {} });
  assert.deepEqual(resolve(analytics, "learner"),
                   { name: "courses", params: {} });
});

test("instructors reach dashboard and analytics", () => {
  assert.equal(routeAllowed(parseHash("#/dashboard"), "instructor"), true);
  assert.deepEqual(
    resolve(parseHash("#/courses/c1/analytics"), "instructor"),
    { name: "analytics", params: { courseId: "c1" } },
  );
});

test("anonymous sessions land on login", () => {
  assert.deepEqual(resolve(parseHash("#/courses"), null),
                   { name: "login", params: {} });
  assert.deepEqual(resolve(parseHash("#/dashboard"), null),
                   { name: "login", params: {} });
  assert.deepEqual(resolve(parseHash("#/login"), null),
                   { name: "login", params: {} });
});

test("hashFor round-trips every named route", () => {
  for (const hash of ["#/login", "#/register", "#/courses", "#/courses/c9",
                      "#/courses/c9/chat", "#/courses/c9/analytics",
                      "#/dashboard"]) {
    assert.deepEqual(hashFor(parseHash(hash)), hash);
  }
});
