/**
 * Report views: the percentage table and the month-wise pie.
 *
 * Percentage cells show the server's string verbatim; the pie is plain SVG
 * whose segment values are the server's monthly counts, with the legend total
 * equal to their sum.
 */

import { ApiClient, ApiError, MonthlyCounts, ReportRow } from "../api.js";
import { escapeHtml, initials, MONTH_LABELS } from "../format.js";

export interface PieSegment {
  month: number; // 1..12
  label: string;
  count: number;
  startAngle: number; // radians
  endAngle: number;
  color: string;
}

const PIE_COLORS = [
  "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948",
  "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac", "#86bcb6", "#d37295",
];

export function computePieSegments(counts: MonthlyCounts): { segments: PieSegment[]; total: number } {
  let total = 0;
  for (let month = 1; month <= 12; month++) {
    total += counts[String(month)] ?? 0;
  }
  const segments: PieSegment[] = [];
  if (total === 0) return { segments, total };
  let angle = -Math.PI / 2; // noon
  for (let month = 1; month <= 12; month++) {
    const count = counts[String(month)] ?? 0;
    if (count === 0) continue;
    const sweep = (count / total) * 2 * Math.PI;
    segments.push({
      month,
      label: MONTH_LABELS[month - 1] ?? String(month),
      count,
      startAngle: angle,
      endAngle: angle + sweep,
      color: PIE_COLORS[(month - 1) % PIE_COLORS.length] ?? "#888",
    });
    angle += sweep;
  }
  return { segments, total };
}

function arcPath(segment: PieSegment, cx: number, cy: number, r: number): string {
  const x1 = cx + r * Math.cos(segment.startAngle);
  const y1 = cy + r * Math.sin(segment.startAngle);
  const x2 = cx + r * Math.cos(segment.endAngle);
  const y2 = cy + r * Math.sin(segment.endAngle);
  const largeArc = segment.endAngle - segment.startAngle > Math.PI ? 1 : 0;
  return `M ${cx} ${cy} L ${x1.toFixed(3)} ${y1.toFixed(3)} ` +
         `A ${r} ${r} 0 ${largeArc} 1 ${x2.toFixed(3)} ${y2.toFixed(3)} Z`;
}

export function renderMonthlyPie(counts: MonthlyCounts, year: number): string {
  const { segments, total } = computePieSegments(counts);
  if (total === 0) {
    return `<p class="empty-state">No attendance recorded in ${year}.</p>`;
  }
  if (segments.length === 1) {
    // A single nonzero month is the full disc; an arc would degenerate.
    const only = segments[0]!;
    return pieFigure(
      `<circle cx="90" cy="90" r="80" fill="${only.color}" data-month="${only.month}" data-count="${only.count}"></circle>`,
      segments, total, year,
    );
  }
  const paths = segments
    .map(
      (segment) =>
        `<path d="${arcPath(segment, 90, 90, 80)}" fill="${segment.color}" ` +
        `data-month="${segment.month}" data-count="${segment.count}"></path>`,
    )
    .join("");
  return pieFigure(paths, segments, total, year);
}

function pieFigure(shapes: string, segments: PieSegment[], total: number, year: number): string {
  const legend = segments
    .map(
      (segment) =>
        `<li><span class="swatch" style="background:${segment.color}"></span>` +
        `${segment.label}: <strong>${segment.count}</strong></li>`,
    )
    .join("");
  return `
  <figure class="monthly-pie">
    <svg viewBox="0 0 180 180" role="img" aria-label="attendance by month">${shapes}</svg>
    <figcaption>
      <ul class="legend">${legend}</ul>
      <p class="pie-total">Total for ${year}: <strong data-total>${total}</strong> day(s)</p>
    </figcaption>
  </figure>`;
}

export function renderPercentageTable(rows: ReportRow[]): string {
  if (rows.length === 0) {
    return `<p class="empty-state">No students enrolled yet.</p>`;
  }
  const body = rows
    .map(
      (row) => `
      <tr data-student-id="${row.student_id}">
        <td><span class="avatar">${escapeHtml(initials(row.name))}</span></td>
        <td>${escapeHtml(row.name)}</td>
        <td class="percentage">${escapeHtml(row.percentage)}</td>
        <td><a href="#reports/${row.student_id}" data-action="show-attendance"
               data-student="${row.student_id}">Show Attendance</a></td>
      </tr>`,
    )
    .join("");
  return `
  <table class="percentages">
    <thead><tr><th></th><th>Student Name</th><th>Percentage</th><th></th></tr></thead>
    <tbody>${body}</tbody>
  </table>`;
}

export interface ReportsState {
  from: string;
  to: string;
  rows: ReportRow[];
  rangeError: string | null;
  loading: boolean;
  selectedStudent: number | null;
  year: number;
  monthly: MonthlyCounts | null;
  monthlyError: string | null;
}

export class ReportsController {
  readonly state: ReportsState;

  constructor(
    private readonly api: ApiClient,
    initial: { from: string; to: string; year: number },
    private readonly onChange: () => void = () => {},
  ) {
    this.state = {
      from: initial.from,
      to: initial.to,
      rows: [],
      rangeError: null,
      loading: false,
      selectedStudent: null,
      year: initial.year,
      monthly: null,
      monthlyError: null,
    };
  }

  async loadPercentages(): Promise<void> {
    this.state.loading = true;
    this.state.rangeError = null;
    this.onChange();
    try {
      this.state.rows = await this.api.percentages(this.state.from, this.state.to);
    } catch (err) {
      this.state.rows = [];
      this.state.rangeError = err instanceof ApiError ? err.message : String(err);
    } finally {
      this.state.loading = false;
      this.onChange();
    }
  }

  async loadMonthly(studentId: number): Promise<void> {
    this.state.selectedStudent = studentId;
    this.state.monthlyError = null;
    this.onChange();
    try {
      this.state.monthly = await this.api.monthly(studentId, this.state.year);
    } catch (err) {
      this.state.monthly = null;
      this.state.monthlyError = err instanceof ApiError ? err.message : String(err);
    }
    this.onChange();
  }
}

export function renderReports(state: ReportsState): string {
  const table = state.rangeError
    ? `<p class="error range-error">${escapeHtml(state.rangeError)}</p>`
    : renderPercentageTable(state.rows);
  let pie = "";
  if (state.monthlyError) {
    pie = `<p class="error">${escapeHtml(state.monthlyError)}</p>`;
  } else if (state.monthly && state.selectedStudent !== null) {
    pie = `<h3>Student ${state.selectedStudent}, month-wise</h3>` +
          renderMonthlyPie(state.monthly, state.year);
  }
  return `
  <div class="reports">
    <div class="range">
      <label>From <input name="from" type="date" value="${escapeHtml(state.from)}"></label>
      <label>To <input name="to" type="date" value="${escapeHtml(state.to)}"></label>
      <button data-action="load-percentages" ${state.loading ? "disabled" : ""}>Show</button>
    </div>
    ${table}
    ${pie}
  </div>`;
}
