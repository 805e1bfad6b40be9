/**
 * Stranger triage: the pending queue with Link / Confirm actions.
 *
 * Actions are disabled while a request is in flight (double-click safety) and
 * server rejections surface inline on the row they belong to. Resolved items
 * drop out of the queue because only pending records are fetched.
 */

import { ApiClient, ApiError, TriageItem } from "../api.js";
import { escapeHtml, formatDistance, formatTimestamp } from "../format.js";

export interface TriageState {
  items: TriageItem[];
  loading: boolean;
  error: string | null;
  inFlight: Set<number>;
  rowErrors: Map<number, string>;
  lastResolved: string | null;
}

export class TriageController {
  readonly state: TriageState = {
    items: [],
    loading: false,
    error: null,
    inFlight: new Set(),
    rowErrors: new Map(),
    lastResolved: null,
  };

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: () => void = () => {},
  ) {}

  async load(): Promise<void> {
    this.state.loading = true;
    this.state.error = null;
    this.onChange();
    try {
      this.state.items = await this.api.pendingStrangers();
    } catch (err) {
      this.state.error = err instanceof Error ? err.message : String(err);
    } finally {
      this.state.loading = false;
      this.onChange();
    }
  }

  async link(strangerId: number, studentId: number): Promise<void> {
    await this.resolve(strangerId, "link", studentId);
  }

  async confirm(strangerId: number): Promise<void> {
    await this.resolve(strangerId, "confirm");
  }

  private async resolve(
    strangerId: number,
    action: "link" | "confirm",
    studentId?: number,
  ): Promise<void> {
    if (this.state.inFlight.has(strangerId)) return; // a click is already being served
    this.state.inFlight.add(strangerId);
    this.state.rowErrors.delete(strangerId);
    this.onChange();
    try {
      const report = await this.api.resolveStranger(strangerId, action, studentId);
      this.state.lastResolved =
        action === "link"
          ? `Stranger ${strangerId} linked to student ${studentId}` +
            (report.attendance_marked ? ` (attendance marked ${report.attendance_date})` : "")
          : `Stranger ${strangerId} confirmed as stranger`;
    } catch (err) {
      const detail = err instanceof ApiError ? err.message : String(err);
      this.state.rowErrors.set(strangerId, detail);
    } finally {
      this.state.inFlight.delete(strangerId);
      this.onChange();
    }
    await this.load(); // refresh: resolved items leave the queue
  }
}

function renderItem(item: TriageItem, state: TriageState): string {
  const busy = state.inFlight.has(item.stranger_id);
  const disabled = busy || item.status !== "pending" ? "disabled" : "";
  const suggestions = item.suggestions
    .map(
      (s) => `
      <button class="suggestion" data-action="link" data-stranger="${item.stranger_id}"
              data-student="${s.student_id}" ${disabled}>
        Link #${s.student_id} <span class="distance">${formatDistance(s.distance)}</span>
      </button>`,
    )
    .join("");
  const rowError = state.rowErrors.get(item.stranger_id);
  return `
  <li class="triage-item" data-stranger-id="${item.stranger_id}">
    <div class="triage-meta">
      <span class="capture">${escapeHtml(item.capture_id)}</span>
      <span class="camera">${escapeHtml(item.camera_id)}</span>
      <span class="time">${escapeHtml(formatTimestamp(item.timestamp))}</span>
    </div>
    <div class="triage-actions">
      ${suggestions}
      <label>Link other:
        <input type="number" min="1" class="link-id" data-stranger="${item.stranger_id}" ${disabled}>
      </label>
      <button data-action="link-custom" data-stranger="${item.stranger_id}" ${disabled}>Link</button>
      <button data-action="confirm" data-stranger="${item.stranger_id}" ${disabled}>Confirm stranger</button>
    </div>
    ${rowError ? `<p class="error inline-error">${escapeHtml(rowError)}</p>` : ""}
  </li>`;
}

export function renderTriage(state: TriageState): string {
  if (state.loading && state.items.length === 0) {
    return `<p class="loading">Loading pending queue...</p>`;
  }
  if (state.error) {
    return `<p class="error">${escapeHtml(state.error)}</p>`;
  }
  const banner = state.lastResolved
    ? `<p class="notice">${escapeHtml(state.lastResolved)}</p>`
    : "";
  if (state.items.length === 0) {
    return `${banner}<p class="empty-state">No pending strangers. All clear.</p>`;
  }
  return `
  ${banner}
  <ul class="triage-list">
    ${state.items.map((item) => renderItem(item, state)).join("")}
  </ul>`;
}
