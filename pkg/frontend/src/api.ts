// Thin typed client over the service's five endpoints. Server-side failures
// surface as ApiError carrying the {code, message, path} body; transport
// failures (server unreachable, connection dropped) become NetworkError so
// callers can show a retry state instead of a server message.

import type {
  ApiErrorBody,
  GraphInventory,
  RunBrief,
  RunRequest,
  RunSnapshot,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
    public path: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

export class NetworkError extends Error {
  constructor(message = "service unreachable") {
    super(message);
    this.name = "NetworkError";
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export interface Client {
  uploadGraph(facts: unknown): Promise<GraphInventory>;
  getGraph(graphId: string): Promise<GraphInventory>;
  launchRun(req: RunRequest): Promise<{ run_id: string; status: string }>;
  getRun(runId: string): Promise<RunSnapshot>;
  listRuns(): Promise<RunBrief[]>;
}

async function request<T>(
  fetchFn: FetchLike,
  url: string,
  init?: RequestInit,
): Promise<T> {
  let resp: Response;
  try {
    resp = await fetchFn(url, init);
  } catch {
    throw new NetworkError();
  }
  if (resp.ok) {
    return (await resp.json()) as T;
  }
  let body: Partial<ApiErrorBody> = {};
  try {
    body = await resp.json();
  } catch {
    // non-JSON error page; fall through to the generic message
  }
  throw new ApiError(
    resp.status,
    body.code ?? "http-error",
    body.message ?? `request failed with status ${resp.status}`,
    body.path ?? url,
  );
}

export function createClient(base = "", fetchFn?: FetchLike): Client {
  const doFetch: FetchLike = fetchFn ?? ((url, init) => fetch(url, init));
  const json = (payload: unknown): RequestInit => ({
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
  return {
    uploadGraph: (facts) =>
      request<GraphInventory>(doFetch, `${base}/graphs`, json(facts)),
    getGraph: (graphId) =>
      request<GraphInventory>(doFetch, `${base}/graphs/${graphId}`),
    launchRun: (req) =>
      request<{ run_id: string; status: string }>(doFetch, `${base}/runs`, json(req)),
    getRun: (runId) => request<RunSnapshot>(doFetch, `${base}/runs/${runId}`),
    listRuns: async () => {
      const out = await request<{ runs: RunBrief[] }>(doFetch, `${base}/runs`);
      return out.runs;
    },
  };
}
