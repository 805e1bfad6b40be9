/**
 * In-memory stand-in for the attendance service: implements the REST
 * endpoints the console consumes, with the same status codes and body shapes,
 * over a plain in-process state object. Linking a stranger marks attendance
 * for the capture date, so later report reads reflect the change, exactly
 * like the real pipeline.
 */

import type { FetchLike } from "../src/api.js";

export interface FixtureStudent {
  student_id: number;
  name: string;
  roll_number: string;
  parent_contact: string;
}

export interface FixtureStranger {
  stranger_id: number;
  capture_id: string;
  camera_id: string;
  timestamp: string;
  status: "pending" | "linked" | "confirmed_stranger";
  student_id: number | null;
  suggestions: Array<{ student_id: number; distance: number }>;
}

export interface FixtureState {
  workingDays: string[];
  students: FixtureStudent[];
  strangers: FixtureStranger[];
  marks: Set<string>; // "studentId|YYYY-MM-DD"
  log: Array<{ method: string; path: string }>;
  percentageOverrides: Map<number, string>;
}

export interface FixtureOptions {
  workingDays?: string[];
  students?: FixtureStudent[];
  strangers?: FixtureStranger[];
  marks?: Array<[number, string]>;
  percentageOverrides?: Record<number, string>;
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

function markKey(studentId: number, day: string): string {
  return `${studentId}|${day}`;
}

/** Half-up at two decimals over exact integers, like the service. */
export function percentString(marked: number, total: number): string {
  const numerator = 10000 * marked;
  let cents = Math.floor(numerator / total);
  if (2 * (numerator - cents * total) >= total) cents += 1;
  return `${Math.floor(cents / 100)}.${String(cents % 100).padStart(2, "0")}%`;
}

export function makeFixtureServer(options: FixtureOptions = {}): {
  fetch: FetchLike;
  state: FixtureState;
} {
  const state: FixtureState = {
    workingDays: options.workingDays ?? [],
    students: options.students ?? [],
    strangers: options.strangers ?? [],
    marks: new Set((options.marks ?? []).map(([sid, day]) => markKey(sid, day))),
    log: [],
    percentageOverrides: new Map(
      Object.entries(options.percentageOverrides ?? {}).map(([k, v]) => [Number(k), v]),
    ),
  };

  function percentages(from: string, to: string): Response {
    const days = state.workingDays.filter((d) => d >= from && d <= to);
    if (days.length === 0) {
      return json({ detail: `no working days between ${from} and ${to}` }, 400);
    }
    const rows = state.students.map((s) => {
      const present = days.filter((d) => state.marks.has(markKey(s.student_id, d))).length;
      const percentage =
        state.percentageOverrides.get(s.student_id) ?? percentString(present, days.length);
      return { student_id: s.student_id, name: s.name, percentage };
    });
    return json(rows);
  }

  function monthly(studentId: number, year: number): Response {
    if (!state.students.some((s) => s.student_id === studentId)) {
      return json({ detail: `unknown student_id ${studentId}` }, 404);
    }
    const counts: Record<string, number> = {};
    for (let month = 1; month <= 12; month++) counts[String(month)] = 0;
    for (const key of state.marks) {
      const [sid, day] = key.split("|") as [string, string];
      if (Number(sid) !== studentId) continue;
      if (!day.startsWith(`${year}-`)) continue;
      const month = Number(day.slice(5, 7));
      counts[String(month)] = (counts[String(month)] ?? 0) + 1;
    }
    return json(counts);
  }

  function resolve(strangerId: number, body: { action: string; student_id?: number }): Response {
    const record = state.strangers.find((s) => s.stranger_id === strangerId);
    if (!record) return json({ detail: `unknown stranger_id ${strangerId}` }, 404);
    if (record.status !== "pending") {
      return json({ detail: `stranger ${strangerId} already resolved (${record.status})` }, 409);
    }
    if (body.action === "link") {
      const studentId = body.student_id;
      if (typeof studentId !== "number") return json({ detail: "link requires student_id" }, 400);
      if (!state.students.some((s) => s.student_id === studentId)) {
        return json({ detail: `cannot link: unknown student_id ${studentId}` }, 404);
      }
      record.status = "linked";
      record.student_id = studentId;
      const day = record.timestamp.slice(0, 10);
      let marked = false;
      if (state.workingDays.includes(day) && !state.marks.has(markKey(studentId, day))) {
        state.marks.add(markKey(studentId, day));
        marked = true;
      }
      return json({
        capture_id: record.capture_id,
        decision: "matched",
        student_id: studentId,
        stranger_id: strangerId,
        attendance_marked: marked,
        attendance_date: day,
      });
    }
    if (body.action === "confirm") {
      record.status = "confirmed_stranger";
      return json({
        capture_id: record.capture_id,
        decision: "stranger",
        student_id: null,
        stranger_id: strangerId,
        attendance_marked: false,
        attendance_date: null,
      });
    }
    return json({ detail: `unknown action ${body.action}` }, 400);
  }

  function enroll(body: {
    name?: string;
    roll_number?: string;
    parent_contact?: string;
    scans?: string[];
  }): Response {
    if (!body.name || !body.roll_number || !body.scans || body.scans.length === 0) {
      return json({ detail: "name, roll_number and at least one scan are required" }, 400);
    }
    if (state.students.some((s) => s.roll_number === body.roll_number)) {
      return json({ detail: `roll number '${body.roll_number}' already enrolled` }, 409);
    }
    const studentId = Math.max(0, ...state.students.map((s) => s.student_id)) + 1;
    state.students.push({
      student_id: studentId,
      name: body.name,
      roll_number: body.roll_number,
      parent_contact: body.parent_contact ?? "",
    });
    return json({ student_id: studentId }, 201);
  }

  const fetchImpl: FetchLike = async (input, init) => {
    const url = new URL(input, "http://fixture");
    const method = (init?.method ?? "GET").toUpperCase();
    state.log.push({ method, path: url.pathname + url.search });
    const body = init?.body ? (JSON.parse(String(init.body)) as Record<string, unknown>) : {};

    if (method === "GET" && url.pathname === "/strangers") {
      const status = url.searchParams.get("status");
      const rows = status
        ? state.strangers.filter((s) => s.status === status)
        : state.strangers;
      return json(rows);
    }
    const resolveMatch = url.pathname.match(/^\/strangers\/(\d+)\/resolve$/);
    if (method === "POST" && resolveMatch) {
      return resolve(Number(resolveMatch[1]), body as { action: string; student_id?: number });
    }
    if (method === "POST" && url.pathname === "/students") {
      return enroll(body);
    }
    if (method === "GET" && url.pathname === "/reports/percentages") {
      return percentages(url.searchParams.get("from") ?? "", url.searchParams.get("to") ?? "");
    }
    const monthlyMatch = url.pathname.match(/^\/reports\/monthly\/(\d+)$/);
    if (method === "GET" && monthlyMatch) {
      return monthly(Number(monthlyMatch[1]), Number(url.searchParams.get("year")));
    }
    return json({ detail: `no fixture route for ${method} ${url.pathname}` }, 404);
  };

  return { fetch: fetchImpl, state };
}
