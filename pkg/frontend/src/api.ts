/** HTTP client for the generation service.
 *
 * Every request is checked against the documented route table and recorded in
 * `log`, so tests can verify that the page never talks to anything outside
 * the published API.
 */

import type {
  AlignAnswer,
  AntecedentAnswer,
  Batch,
  DraftAccepted,
  GenerateRequest,
  LocationAnswer,
  Menu,
  PlanDraft,
  PlanList,
} from "./types.js";

/** Subset of the fetch Response surface the client relies on. */
export interface ApiResponse {
  ok: boolean;
  status: number;
  json(): Promise<unknown>;
  text(): Promise<string>;
}

export type Fetcher = (url: string, init?: RequestInit) => Promise<ApiResponse>;

export interface LoggedRequest {
  method: string;
  url: string;
}

const DOCUMENTED_ROUTES: ReadonlyArray<readonly [string, RegExp]> = [
  ["GET", /^\/plans(\?.*)?$/],
  ["GET", /^\/menu\?.+$/],
  ["POST", /^\/draft-plan$/],
  ["POST", /^\/generate$/],
  ["POST", /^\/simulate$/],
  ["POST", /^\/tell$/],
  ["GET", /^\/query\/antecedent\?.+$/],
  ["GET", /^\/query\/align\?.+$/],
  ["GET", /^\/query\/location\?.+$/],
  ["GET", /^\/alignment\/[^/?]+$/],
  ["GET", /^\/assets\/[^/?]+$/],
];

/** True when method + path (with query string) appear in the API reference. */
export function isDocumented(method: string, path: string): boolean {
  return DOCUMENTED_ROUTES.some(
    ([m, pattern]) => m === method && pattern.test(path),
  );
}

/** Error body of a non-2xx answer; `detail` keeps the service's payload. */
export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly detail: unknown,
  ) {
    super(typeof detail === "string" ? detail : `request failed (${status})`);
    this.name = "ApiError";
  }
}

function query(params: Record<string, string>): string {
  return "?" + new URLSearchParams(params).toString();
}

export class ApiClient {
  readonly log: LoggedRequest[] = [];

  constructor(
    private readonly base: string = "",
    private readonly fetcher: Fetcher = (url, init) => fetch(url, init),
  ) {}

  /** Issue one request; rejects paths missing from the documented table. */
  async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    if (!isDocumented(method, path)) {
      throw new Error(`undocumented request: ${method} ${path}`);
    }
    this.log.push({ method, url: path });
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "Content-Type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const response = await this.fetcher(this.base + path, init);
    if (!response.ok) {
      let detail: unknown;
      try {
        detail = (await response.json() as { detail?: unknown }).detail;
      } catch {
        detail = `request failed (${response.status})`;
      }
      throw new ApiError(response.status, detail);
    }
    return (await response.json()) as T;
  }

  plans(device?: string): Promise<PlanList> {
    const path = device === undefined ? "/plans" : "/plans" + query({ device });
    return this.request("GET", path);
  }

  deviceMenu(): Promise<Menu> {
    return this.request("GET", "/menu" + query({ context: "device" }));
  }

  roleMenu(role: string): Promise<Menu> {
    return this.request("GET", "/menu" + query({ role }));
  }

  conceptMenu(concept: string): Promise<Menu> {
    return this.request("GET", "/menu" + query({ concept }));
  }

  draftPlan(session: string, plan: PlanDraft, save = false): Promise<DraftAccepted> {
    return this.request("POST", "/draft-plan", { session, plan, save });
  }

  generate(requestBody: GenerateRequest): Promise<Batch> {
    return this.request("POST", "/generate", requestBody);
  }

  tell(assertions: unknown[]): Promise<unknown> {
    return this.request("POST", "/tell", { assertions });
  }

  antecedent(doc: string, span: string): Promise<AntecedentAnswer> {
    return this.request("GET", "/query/antecedent" + query({ doc, span }));
  }

  align(doc: string, span: string): Promise<AlignAnswer> {
    return this.request("GET", "/query/align" + query({ doc, span }));
  }

  location(instance: string): Promise<LocationAnswer> {
    return this.request("GET", "/query/location" + query({ instance }));
  }

  /** Absolute URL for a service-relative path such as an asset link. */
  resolve(path: string): string {
    return this.base + path;
  }
}
