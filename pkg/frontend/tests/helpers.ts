/**
 * In-memory service doubles for the client and panel tests. Routes are keyed
 * by "METHOD /path"; a trailing * makes the key a prefix match. Every call is
 * logged so tests can assert on what did (or did not) leave the panel.
 */

import { FetchLike, SessionConfig, ThresholdResult } from "../src/api";

export interface LoggedCall {
  method: string;
  path: string;
  body: unknown;
}

export type Handler = (body: any, path: string) => Response | Promise<Response>;

export function jsonResponse(status: number, body: unknown): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export function errorResponse(status: number, detail: string): Response {
  return jsonResponse(status, { detail });
}

export function makeFetch(
  routes: { [key: string]: Handler },
  calls: LoggedCall[] = [],
): FetchLike {
  return async (input, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(String(init.body)) : undefined;
    calls.push({ method, path: input, body });
    const exact = routes[`${method} ${input}`];
    if (exact) return exact(body, input);
    for (const [key, handler] of Object.entries(routes)) {
      if (key.endsWith("*") && `${method} ${input}`.startsWith(key.slice(0, -1))) {
        return handler(body, input);
      }
    }
    return errorResponse(404, `no route for ${method} ${input}`);
  };
}

export const DEFAULT_CONFIG: SessionConfig = {
  version: 1,
  background: null,
  delta: 50,
  curve_fraction: 0.5,
  bias_correction_cm: 0.0,
  split_row: null,
  search: {
    lo: 0,
    hi: 255,
    step: 1,
    min_frac: 0.2,
    max_frac: 0.7,
    edge_weight: 20.0,
    polarity: "dark",
    literal_divisor: false,
  },
  profile_path: null,
  refresh_plots: true,
};

/** Compare-and-set config store mirroring the server's PUT semantics. */
export function configStore(initial: Partial<SessionConfig> = {}) {
  let config: SessionConfig = structuredClone({ ...DEFAULT_CONFIG, ...initial });
  return {
    get current(): SessionConfig {
      return structuredClone(config);
    },
    routes: {
      "GET /config": () => jsonResponse(200, config),
      "PUT /config": (body: any) => {
        if (body.version !== config.version) {
          return errorResponse(
            409,
            `version conflict: config is at ${config.version}, update sent ${body.version}`,
          );
        }
        const { version: _version, ...fields } = body;
        const unknown = Object.keys(fields).filter((k) => !(k in config));
        if (unknown.length > 0) {
          return errorResponse(400, `unknown config field(s): ${unknown.sort().join(", ")}`);
        }
        const merged: any = structuredClone(config);
        for (const [k, v] of Object.entries(fields)) {
          merged[k] = k === "search" ? { ...merged.search, ...(v as object) } : v;
        }
        merged.version = config.version + 1;
        config = merged;
        return jsonResponse(200, config);
      },
    } as { [key: string]: Handler },
  };
}

let maskCounter = 0;

export function makeResult(overrides: Partial<ThresholdResult> = {}): ThresholdResult {
  maskCounter += 1;
  return {
    method: "soit",
    threshold: 97,
    z: 1.2345,
    nac_fraction: 0.41,
    feasible: true,
    mask_id: `mask-${maskCounter}`,
    mask_url: `/masks/mask-${maskCounter}`,
    ...overrides,
  };
}

export function deferred<T>() {
  let resolve!: (value: T) => void;
  let reject!: (err: unknown) => void;
  const promise = new Promise<T>((res, rej) => {
    resolve = res;
    reject = rej;
  });
  return { promise, resolve, reject };
}

/** Let queued microtasks (settled promises) run without advancing timers. */
export async function flushMicrotasks(rounds = 5): Promise<void> {
  for (let i = 0; i < rounds; i += 1) await Promise.resolve();
}
