import { describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import {
  EnrollController,
  renderEnrollForm,
  renderRoster,
  validateEnrollment,
} from "../src/views/enroll.js";
import { makeFixtureServer } from "./fixture_server.js";

const OFF_DOC = "OFF\n4 4 0\n0 0 0\n1 0 0\n0 1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 1 2 3\n3 0 2 3\n";

function makeEnv() {
  const fixture = makeFixtureServer({
    workingDays: ["2026-03-02"],
    students: [
      { student_id: 1, name: "Asha Rao", roll_number: "R001", parent_contact: "+91-1" },
    ],
  });
  return { fixture, api: new ApiClient("", fixture.fetch) };
}

describe("enrollment form", () => {
  it("blocks an empty name client-side without calling the server", async () => {
    const { api, fixture } = makeEnv();
    const enroll = new EnrollController(api);
    enroll.state.roll = "R010";
    enroll.state.scans = [{ name: "a.off", text: OFF_DOC }];
    const result = await enroll.submit();
    expect(result).toBeNull();
    expect(enroll.state.fieldErrors.name).toMatch(/required/);
    expect(fixture.state.log).toHaveLength(0);
    expect(renderEnrollForm(enroll.state)).toContain("Name is required");
  });

  it("requires at least one scan", () => {
    const errors = validateEnrollment({
      name: "New Kid", roll: "R011", contact: "", scans: [],
      fieldErrors: {}, submitting: false, enrolledId: null, error: null,
    });
    expect(errors.scans).toMatch(/at least one scan/i);
  });

  it("valid submission adds a roster row", async () => {
    const { api } = makeEnv();
    const enroll = new EnrollController(api);
    enroll.state.name = "Chitra Menon";
    enroll.state.roll = "R012";
    enroll.state.contact = "+91-3";
    enroll.state.scans = [{ name: "c.off", text: OFF_DOC }];
    const id = await enroll.submit();
    expect(id).toBe(2);
    expect(enroll.state.enrolledId).toBe(2);

    const rows = await api.percentages("2026-03-02", "2026-03-02");
    const roster = renderRoster(rows);
    expect(roster).toContain("Chitra Menon");
    expect(roster).toContain('data-student-id="2"');
    expect(roster).toContain(">CM<"); // initials avatar, no photos stored
  });

  it("renders a duplicate roll as a field error from the 409", async () => {
    const { api } = makeEnv();
    const enroll = new EnrollController(api);
    enroll.state.name = "Imposter";
    enroll.state.roll = "R001";
    enroll.state.scans = [{ name: "x.off", text: OFF_DOC }];
    const id = await enroll.submit();
    expect(id).toBeNull();
    expect(enroll.state.fieldErrors.roll).toContain("already enrolled");
    const html = renderEnrollForm(enroll.state);
    expect(html).toContain("already enrolled");
  });
});
