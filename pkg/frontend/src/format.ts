export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;")
    .replaceAll("'", "&#39;");
}

export const MONTH_LABELS = [
  "Jan", "Feb", "Mar", "Apr", "May", "Jun",
  "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
] as const;

/** Compact scientific notation for match distances, e.g. "2.3e+12". */
export function formatDistance(value: number): string {
  if (value === 0) return "0";
  return value.toExponential(1);
}

export function formatTimestamp(iso: string): string {
  return iso.replace("T", " ").replace(/([+-]\d\d:\d\d|Z)$/, "");
}

/** Initials avatar text: the gallery stores no photos, only templates. */
export function initials(name: string): string {
  const parts = name.trim().split(/\s+/).filter(Boolean);
  if (parts.length === 0) return "?";
  return parts
    .slice(0, 2)
    .map((part) => (part[0] ?? "").toUpperCase())
    .join("");
}
