/**
 * Typed client for the attendance service REST API.
 *
 * Every number shown in the console comes from these responses; the console
 * never recomputes percentages or match decisions.
 */

export interface Suggestion {
  student_id: number;
  distance: number;
}

export interface TriageItem {
  stranger_id: number;
  capture_id: string;
  camera_id: string;
  timestamp: string;
  status: string;
  student_id: number | null;
  suggestions: Suggestion[];
}

export interface ReportRow {
  student_id: number;
  name: string;
  percentage: string; // server-rendered, e.g. "17.57%"
}

export type MonthlyCounts = Record<string, number>;

export interface ResolveReport {
  capture_id: string;
  decision: string;
  student_id: number | null;
  stranger_id: number | null;
  attendance_marked: boolean;
  attendance_date: string | null;
}

export interface EnrollmentRequest {
  name: string;
  roll_number: string;
  parent_contact: string;
  scans: string[];
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

async function errorDetail(response: Response): Promise<string> {
  try {
    const body = (await response.json()) as { detail?: unknown };
    if (typeof body.detail === "string") return body.detail;
    return JSON.stringify(body);
  } catch {
    return `HTTP ${response.status}`;
  }
}

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    if (!response.ok) {
      throw new ApiError(response.status, await errorDetail(response));
    }
    return (await response.json()) as T;
  }

  pendingStrangers(): Promise<TriageItem[]> {
    return this.request<TriageItem[]>("/strangers?status=pending");
  }

  resolveStranger(strangerId: number, action: "link" | "confirm", studentId?: number): Promise<ResolveReport> {
    const body = action === "link" ? { action, student_id: studentId } : { action };
    return this.request<ResolveReport>(`/strangers/${strangerId}/resolve`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  enrollStudent(body: EnrollmentRequest): Promise<{ student_id: number }> {
    return this.request<{ student_id: number }>("/students", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  percentages(from: string, to: string): Promise<ReportRow[]> {
    const params = new URLSearchParams({ from, to });
    return this.request<ReportRow[]>(`/reports/percentages?${params}`);
  }

  monthly(studentId: number, year: number): Promise<MonthlyCounts> {
    return this.request<MonthlyCounts>(`/reports/monthly/${studentId}?year=${year}`);
  }
}
