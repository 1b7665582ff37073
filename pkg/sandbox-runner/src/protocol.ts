// Wire types for the line-delimited sandbox protocol (see PROTOCOL.md at
// the repository root). Field names are the contract; keep them bit-exact.

export type TestStatus = "pass" | "fail" | "error" | "timeout";

export interface ValidateRequest {
  mode: "validate";
  tests: string[];
}

export interface ExecuteRequest {
  mode: "execute";
  source: string;
  tests: string[];
  timeout_ms?: number;
}

export type Request = ValidateRequest | ExecuteRequest;

export interface TestResult {
  status: TestStatus;
  message: string;
  duration_ms: number;
}

export interface ValidateResponse {
  mode: "validate";
  results: boolean[];
}

export interface ExecuteResponse {
  mode: "execute";
  results: TestResult[];
}

export interface ErrorResponse {
  mode: "error";
  error: string;
}

export type Response = ValidateResponse | ExecuteResponse | ErrorResponse;

export const DEFAULT_TEST_TIMEOUT_MS = 5000;
export const SUITE_CAP_MS = 30000;

export function errorResponse(error: string): ErrorResponse {
  return { mode: "error", error };
}

export function parseRequest(line: string): Request | ErrorResponse {
  let data: unknown;
  try {
    data = JSON.parse(line);
  } catch (exc) {
    return errorResponse(`malformed request line: ${String(exc)}`);
  }
  if (typeof data !== "object" || data === null) {
    return errorResponse("request must be a JSON object");
  }
  const req = data as Record<string, unknown>;
  if (req.mode === "validate") {
    if (!isStringArray(req.tests)) {
      return errorResponse("validate requests need a tests array of strings");
    }
    return { mode: "validate", tests: req.tests };
  }
  if (req.mode === "execute") {
    if (typeof req.source !== "string") {
      return errorResponse("execute requests need a source string");
    }
    if (!isStringArray(req.tests) || req.tests.length === 0) {
      return errorResponse("execute requests need a non-empty tests array");
    }
    const timeout = req.timeout_ms;
    if (timeout !== undefined && (typeof timeout !== "number" || timeout <= 0)) {
      return errorResponse("timeout_ms must be a positive number");
    }
    return {
      mode: "execute",
      source: req.source,
      tests: req.tests,
      timeout_ms: timeout as number | undefined,
    };
  }
  return errorResponse(`unknown mode ${JSON.stringify(req.mode)}`);
}

function isStringArray(value: unknown): value is string[] {
  return Array.isArray(value) && value.every((item) => typeof item === "string");
}

export function suiteBudgetMs(testCount: number, perTestMs: number): number {
  return Math.min(testCount * perTestMs, SUITE_CAP_MS);
}
