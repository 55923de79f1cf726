/**
 * Typed client for the footmetry measurement service.
 *
 * Every request goes through one fetch wrapper so error handling is uniform:
 * non-2xx responses become ApiError carrying the server's detail string, and
 * a 202 on /threshold is returned as a job ticket for the caller to poll.
 * The UI never computes measurement or threshold numbers itself; this module
 * is the only way data enters the panel.
 */

export interface UploadResponse {
  image_id: string;
  width: number;
  height: number;
}

export interface CurvePoint {
  threshold: number;
  z: number;
  nac_fraction: number;
  feasible: boolean;
}

export interface ThresholdResult {
  method: string;
  threshold: number;
  z?: number;
  nac_fraction: number;
  feasible?: boolean;
  curve?: CurvePoint[];
  mask_id: string;
  mask_url: string;
}

export interface JobTicket {
  job_id: string;
  status_url: string;
}

export interface JobStatus {
  status: "running" | "done" | "error";
  progress: number;
  result: ThresholdResult | null;
  error: string | null;
}

export interface SearchOverrides {
  lo?: number;
  hi?: number;
  step?: number;
  min_frac?: number;
  max_frac?: number;
  edge_weight?: number;
  polarity?: "dark" | "bright";
  literal_divisor?: boolean;
}

export interface ThresholdRequest extends SearchOverrides {
  image_id: string;
  method?: string;
  include_curve?: boolean;
  fraction?: number;
  alpha?: number;
  variant?: string;
}

export interface SessionConfig {
  version: number;
  background: number | null;
  delta: number;
  curve_fraction: number;
  bias_correction_cm: number;
  split_row: number | null;
  search: Required<SearchOverrides>;
  profile_path: string | null;
  refresh_plots: boolean;
}

export interface ScaleObservation {
  view: "side" | "under";
  distance_px: number;
  px_per_cm: number;
}

export interface CalibrationResponse {
  views: { [view: string]: { slope: number; intercept: number } };
  profile: string;
}

export interface MeasureRequest extends SearchOverrides {
  image_id: string;
  background?: number | null;
  delta?: number;
  curve_fraction?: number;
  bias_correction_cm?: number;
  split_row?: number | null;
}

/** Raw curve rows inside measure diagnostics: [threshold, z, accepted_count, feasible]. */
export type DiagnosticCurveRow = [number, number, number, boolean];

export interface Measurement {
  length_side_cm: number;
  length_under_cm: number;
  height_cm: number;
  width_cm: number;
  distance_to_background_px: number;
  upper_curve: [number, number][];
  diagnostics: {
    threshold?: number;
    curve?: DiagnosticCurveRow[];
    [key: string]: unknown;
  };
}

export interface BatchEntry {
  image_id: string;
  ok: boolean;
  error?: string;
  measurements?: Measurement;
}

export interface BatchResponse {
  results: BatchEntry[];
}

export type ThresholdOutcome =
  | { kind: "done"; result: ThresholdResult }
  | { kind: "job"; ticket: JobTicket };

export class ApiError extends Error {
  constructor(readonly status: number, readonly detail: string) {
    super(detail);
    this.name = "ApiError";
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

async function readDetail(res: Response): Promise<string> {
  const text = await res.text();
  try {
    const doc = JSON.parse(text);
    if (doc && typeof doc.detail === "string") return doc.detail;
  } catch {
    // non-JSON error body, fall through to raw text
  }
  return text || `http ${res.status}`;
}

export class ServiceClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request(method: string, path: string, body?: unknown): Promise<Response> {
    const init: RequestInit = { method };
    if (body !== undefined) {
      init.headers = { "content-type": "application/json" };
      init.body = JSON.stringify(body);
    }
    const res = await this.fetchFn(this.baseUrl + path, init);
    if (!res.ok) throw new ApiError(res.status, await readDetail(res));
    return res;
  }

  private async json<T>(method: string, path: string, body?: unknown): Promise<T> {
    const res = await this.request(method, path, body);
    return (await res.json()) as T;
  }

  uploadImage(dataBase64: string): Promise<UploadResponse> {
    return this.json("POST", "/images", { data_base64: dataBase64 });
  }

  async runThreshold(req: ThresholdRequest): Promise<ThresholdOutcome> {
    const res = await this.request("POST", "/threshold", req);
    if (res.status === 202) {
      return { kind: "job", ticket: (await res.json()) as JobTicket };
    }
    return { kind: "done", result: (await res.json()) as ThresholdResult };
  }

  jobStatus(jobId: string): Promise<JobStatus> {
    return this.json("GET", `/jobs/${jobId}`);
  }

  /** Poll a job ticket until it settles; an error status is raised as ApiError. */
  async awaitJob(ticket: JobTicket, intervalMs = 250): Promise<ThresholdResult> {
    for (;;) {
      const status = await this.jobStatus(ticket.job_id);
      if (status.status === "done" && status.result) return status.result;
      if (status.status === "error") throw new ApiError(400, status.error ?? "job failed");
      await new Promise((resolve) => setTimeout(resolve, intervalMs));
    }
  }

  maskUrl(maskId: string): string {
    return `${this.baseUrl}/masks/${maskId}`;
  }

  calibrate(observations: ScaleObservation[]): Promise<CalibrationResponse> {
    return this.json("POST", "/calibrate", { observations });
  }

  measure(req: MeasureRequest): Promise<Measurement> {
    return this.json("POST", "/measure", req);
  }

  batch(imageIds: string[], overrides: Partial<MeasureRequest> = {}): Promise<BatchResponse> {
    return this.json("POST", "/batch", { ...overrides, image_ids: imageIds });
  }

  getConfig(): Promise<SessionConfig> {
    return this.json("GET", "/config");
  }

  /** Compare-and-set update: callers must pass the version they read. */
  putConfig(update: Partial<SessionConfig> & { version: number }): Promise<SessionConfig> {
    return this.json("PUT", "/config", update);
  }
}
