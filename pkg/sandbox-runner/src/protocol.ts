/**
 * Wire protocol spoken over stdin/stdout, one JSON object per line.
 *
 * request  {"id", "source", "setup", "cases", "timeout_ms"}
 * response {"id", "results": [{"status", "detail"}], "duration_ms"}
 *
 * Unknown request fields are ignored. Any line that does not satisfy the
 * request shape gets a response with id "" and a single error result.
 */

export type CaseStatus = "pass" | "fail" | "error" | "timeout";

export interface CaseResult {
  status: CaseStatus;
  detail: string;
}

export interface WireRequest {
  id: string;
  source: string;
  setup: string;
  cases: string[];
  timeout_ms: number;
}

export interface WireResponse {
  id: string;
  results: CaseResult[];
  duration_ms: number;
}

export function parseRequest(line: string): WireRequest | null {
  let raw: unknown;
  try {
    raw = JSON.parse(line);
  } catch {
    return null;
  }
  if (typeof raw !== "object" || raw === null || Array.isArray(raw)) {
    return null;
  }
  const obj = raw as Record<string, unknown>;
  if (typeof obj.id !== "string") return null;
  if (typeof obj.source !== "string") return null;
  if (typeof obj.setup !== "string") return null;
  if (!Array.isArray(obj.cases) || obj.cases.length === 0) return null;
  if (!obj.cases.every((c) => typeof c === "string")) return null;
  if (typeof obj.timeout_ms !== "number" || !Number.isFinite(obj.timeout_ms) || obj.timeout_ms <= 0) {
    return null;
  }
  return {
    id: obj.id,
    source: obj.source,
    setup: obj.setup,
    cases: obj.cases as string[],
    timeout_ms: Math.floor(obj.timeout_ms),
  };
}

export function malformedResponse(): WireResponse {
  return {
    id: "",
    results: [{ status: "error", detail: "malformed request line" }],
    duration_ms: 0,
  };
}
