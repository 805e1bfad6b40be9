import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  computePieSegments,
  renderMonthlyPie,
  renderPercentageTable,
  ReportsController,
  renderReports,
} from "../src/views/reports.js";
import { makeFixtureServer, percentString } from "./fixture_server.js";

function januaryWorkdays(count: number): string[] {
  // plain run of January dates; the fixture does not care about weekends
  return Array.from({ length: count }, (_, i) => `2026-01-${String(i + 1).padStart(2, "0")}`);
}

describe("percentage table", () => {
  it("renders the server percentage string verbatim (13 of 74 days)", async () => {
    const working = Array.from({ length: 74 }, (_, i) =>
      `2026-${String(Math.floor(i / 28) + 1).padStart(2, "0")}-${String((i % 28) + 1).padStart(2, "0")}`);
    const fixture = makeFixtureServer({
      workingDays: working,
      students: [{ student_id: 1, name: "Dinesh Singh", roll_number: "R1", parent_contact: "+1" }],
      marks: working.slice(0, 13).map((d) => [1, d]),
    });
    const api = new ApiClient("", fixture.fetch);
    const rows = await api.percentages(working[0]!, working[working.length - 1]!);
    expect(rows[0]!.percentage).toBe("17.57%");
    const html = renderPercentageTable(rows);
    expect(html).toContain(">17.57%<");
    expect(html).toContain("Show Attendance");
  });

  it("never recomputes: an unusual server string passes through untouched", async () => {
    const fixture = makeFixtureServer({
      workingDays: januaryWorkdays(10),
      students: [{ student_id: 1, name: "Edge Case", roll_number: "R1", parent_contact: "+1" }],
      percentageOverrides: { 1: "12.3456789%" },
    });
    const api = new ApiClient("", fixture.fetch);
    const rows = await api.percentages("2026-01-01", "2026-01-10");
    expect(renderPercentageTable(rows)).toContain(">12.3456789%<");
  });

  it("a range with zero working days shows the message instead of a table", async () => {
    const fixture = makeFixtureServer({
      workingDays: januaryWorkdays(5),
      students: [{ student_id: 1, name: "Asha", roll_number: "R1", parent_contact: "+1" }],
    });
    const api = new ApiClient("", fixture.fetch);
    const reports = new ReportsController(api, {
      from: "2030-06-01", to: "2030-06-30", year: 2030,
    });
    await reports.loadPercentages();
    expect(reports.state.rangeError).toContain("no working days");
    const html = renderReports(reports.state);
    expect(html).toContain("no working days");
    expect(html).not.toContain("<table");
  });

  it("half-up rounding helper agrees with the displayed style", () => {
    expect(percentString(13, 74)).toBe("17.57%");
    expect(percentString(0, 10)).toBe("0.00%");
    expect(percentString(10, 10)).toBe("100.00%");
    expect(percentString(1, 32)).toBe("3.13%");
  });
});

describe("month-wise pie", () => {
  const counts = {
    "1": 3, "2": 0, "3": 1, "4": 0, "5": 0, "6": 0,
    "7": 0, "8": 0, "9": 0, "10": 0, "11": 0, "12": 0,
  };

  it("draws one segment per nonzero month and totals them in the legend", () => {
    const { segments, total } = computePieSegments(counts);
    expect(segments).toHaveLength(2);
    expect(total).toBe(4);
    expect(segments.map((s) => s.label)).toEqual(["Jan", "Mar"]);
    expect(segments.reduce((acc, s) => acc + s.count, 0)).toBe(total);

    const html = renderMonthlyPie(counts, 2026);
    expect(html).toContain("Jan: <strong>3</strong>");
    expect(html).toContain("Mar: <strong>1</strong>");
    expect(html).toContain('data-total>4</strong>');
    expect((html.match(/<path /g) ?? [])).toHaveLength(2);
  });

  it("covers the full circle", () => {
    const { segments } = computePieSegments(counts);
    const sweep = segments.reduce((acc, s) => acc + (s.endAngle - s.startAngle), 0);
    expect(sweep).toBeCloseTo(2 * Math.PI, 9);
  });

  it("a single nonzero month renders as a full disc", () => {
    const single = { ...counts, "1": 5, "3": 0 };
    const html = renderMonthlyPie(single, 2026);
    expect(html).toContain("<circle");
    expect(html).toContain('data-total>5</strong>');
  });

  it("all-zero counts show an explicit empty message", () => {
    const zero = Object.fromEntries(
      Array.from({ length: 12 }, (_, i) => [String(i + 1), 0]),
    );
    expect(renderMonthlyPie(zero, 2026)).toContain("No attendance recorded in 2026");
  });

  it("controller pulls counts from the server and renders them", async () => {
    const fixture = makeFixtureServer({
      workingDays: ["2026-01-05", "2026-01-06", "2026-01-07", "2026-03-02"],
      students: [{ student_id: 3, name: "Asha", roll_number: "R3", parent_contact: "+1" }],
      marks: [
        [3, "2026-01-05"], [3, "2026-01-06"], [3, "2026-01-07"], [3, "2026-03-02"],
      ],
    });
    const api = new ApiClient("", fixture.fetch);
    const reports = new ReportsController(api, {
      from: "2026-01-01", to: "2026-12-31", year: 2026,
    });
    await reports.loadMonthly(3);
    expect(reports.state.monthly!["1"]).toBe(3);
    expect(reports.state.monthly!["3"]).toBe(1);
    const html = renderReports(reports.state);
    expect(html).toContain("Student 3, month-wise");
    expect(html).toContain('data-total>4</strong>');
  });
});
