/**
 * Enrollment form plus roster table.
 *
 * Client-side validation mirrors the server rules (nonempty name and roll,
 * at least one scan); a duplicate roll number comes back as HTTP 409 and is
 * rendered as a field error. The roster is read from the percentages report,
 * the one roster-shaped resource the API exposes.
 */

import { ApiClient, ApiError, ReportRow } from "../api.js";
import { escapeHtml, initials } from "../format.js";

export interface ScanFile {
  name: string;
  text: string;
}

export interface EnrollState {
  name: string;
  roll: string;
  contact: string;
  scans: ScanFile[];
  fieldErrors: { name?: string; roll?: string; scans?: string };
  submitting: boolean;
  enrolledId: number | null;
  error: string | null;
}

export function validateEnrollment(state: EnrollState): EnrollState["fieldErrors"] {
  const errors: EnrollState["fieldErrors"] = {};
  if (!state.name.trim()) errors.name = "Name is required";
  if (!state.roll.trim()) errors.roll = "Roll number is required";
  if (state.scans.length === 0) errors.scans = "At least one scan file is required";
  return errors;
}

export class EnrollController {
  readonly state: EnrollState = {
    name: "",
    roll: "",
    contact: "",
    scans: [],
    fieldErrors: {},
    submitting: false,
    enrolledId: null,
    error: null,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: () => void = () => {},
  ) {}

  /** Returns the new student id, or null when blocked or rejected. */
  async submit(): Promise<number | null> {
    this.state.fieldErrors = validateEnrollment(this.state);
    this.state.error = null;
    this.state.enrolledId = null;
    if (Object.keys(this.state.fieldErrors).length > 0) {
      this.onChange();
      return null; // blocked client-side, nothing sent
    }
    this.state.submitting = true;
    this.onChange();
    try {
      const result = await this.api.enrollStudent({
        name: this.state.name.trim(),
        roll_number: this.state.roll.trim(),
        parent_contact: this.state.contact.trim(),
        scans: this.state.scans.map((scan) => scan.text),
      });
      this.state.enrolledId = result.student_id;
      this.state.name = "";
      this.state.roll = "";
      this.state.contact = "";
      this.state.scans = [];
      return result.student_id;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.fieldErrors = { roll: err.message };
      } else {
        this.state.error = err instanceof Error ? err.message : String(err);
      }
      return null;
    } finally {
      this.state.submitting = false;
      this.onChange();
    }
  }
}

function fieldError(message?: string): string {
  return message ? `<p class="field-error">${escapeHtml(message)}</p>` : "";
}

export function renderEnrollForm(state: EnrollState): string {
  const scanList = state.scans
    .map((scan) => `<li>${escapeHtml(scan.name)}</li>`)
    .join("");
  return `
  <form class="enroll-form" data-form="enroll">
    <label>Name
      <input name="name" value="${escapeHtml(state.name)}" ${state.submitting ? "disabled" : ""}>
    </label>
    ${fieldError(state.fieldErrors.name)}
    <label>Roll number
      <input name="roll" value="${escapeHtml(state.roll)}" ${state.submitting ? "disabled" : ""}>
    </label>
    ${fieldError(state.fieldErrors.roll)}
    <label>Parent contact
      <input name="contact" value="${escapeHtml(state.contact)}" ${state.submitting ? "disabled" : ""}>
    </label>
    <label>Scan files (OFF)
      <input name="scans" type="file" multiple accept=".off">
    </label>
    <ul class="scan-list">${scanList}</ul>
    ${fieldError(state.fieldErrors.scans)}
    <button type="submit" ${state.submitting ? "disabled" : ""}>Enroll</button>
    ${state.enrolledId !== null ? `<p class="notice">Enrolled as student ${state.enrolledId}</p>` : ""}
    ${state.error ? `<p class="error">${escapeHtml(state.error)}</p>` : ""}
  </form>`;
}

export function renderRoster(rows: ReportRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty-state">No students enrolled yet.</p>`;
  }
  const body = rows
    .map(
      (row) => `
      <tr data-student-id="${row.student_id}">
        <td><span class="avatar">${escapeHtml(initials(row.name))}</span></td>
        <td>${row.student_id}</td>
        <td>${escapeHtml(row.name)}</td>
      </tr>`,
    )
    .join("");
  return `
  <table class="roster">
    <thead><tr><th></th><th>ID</th><th>Name</th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}
