/**
 * Panel state and the rules for changing it.
 *
 * One Panel instance is the single source of truth for the operator screen.
 * Every number it exposes was copied verbatim from a server response: the
 * panel stages parameter edits, debounces them into at most one in-flight
 * threshold request, and discards responses whose sequence number is no
 * longer current, so the curve on screen always belongs to the mask on
 * screen. Config edits go through the server's compare-and-set PUT and the
 * mirror is only ever replaced by what the server returned.
 */

import {
  ApiError,
  Measurement,
  SearchOverrides,
  ServiceClient,
  SessionConfig,
  ThresholdResult,
} from "./api";
import { CurveViewPoint } from "./curve";

export const DEBOUNCE_MS = 300;

export interface TuneValues extends SearchOverrides {
  method?: string;
  background?: number | null;
  delta?: number;
  curve_fraction?: number;
}

export interface BatchFile {
  name: string;
  dataBase64: string;
}

export interface BatchRow {
  image: string;
  ok: boolean;
  length_side_cm?: number;
  length_under_cm?: number;
  height_cm?: number;
  width_cm?: number;
  distance_to_background_px?: number;
  error?: string;
}

export interface PanelState {
  imageId: string | null;
  imageSize: { width: number; height: number } | null;
  config: SessionConfig | null;
  tune: TuneValues;
  result: ThresholdResult | null;
  curve: CurveViewPoint[] | null;
  bestThreshold: number | null;
  maskUrl: string | null;
  overlayOpacity: number;
  formError: string | null;
  batch: BatchRow[];
  batchRunning: boolean;
}

type Bound = { lo: number; hi: number; int?: boolean };

// Client-side sanity bounds. Anything outside never leaves the browser; the
// server still revalidates whatever does.
const BOUNDS: { [field: string]: Bound } = {
  background: { lo: 0, hi: 255, int: true },
  delta: { lo: 1, hi: 255, int: true },
  lo: { lo: 0, hi: 255, int: true },
  hi: { lo: 0, hi: 255, int: true },
  step: { lo: 1, hi: 255, int: true },
  min_frac: { lo: 0, hi: 1 },
  max_frac: { lo: 0, hi: 1 },
  edge_weight: { lo: 0, hi: Number.POSITIVE_INFINITY },
  curve_fraction: { lo: 0, hi: 1 },
};

function boundsError(field: string, value: unknown): string | null {
  const bound = BOUNDS[field];
  if (!bound || value === null || value === undefined) return null;
  const v = Number(value);
  if (!Number.isFinite(v)) return `${field} must be a number`;
  if (bound.int && !Number.isInteger(v)) return `${field} must be an integer`;
  if (v < bound.lo || v > bound.hi) {
    return `${field} must be between ${bound.lo} and ${bound.hi}`;
  }
  return null;
}

export class Panel {
  readonly state: PanelState = {
    imageId: null,
    imageSize: null,
    config: null,
    tune: {},
    result: null,
    curve: null,
    bestThreshold: null,
    maskUrl: null,
    overlayOpacity: 0.6,
    formError: null,
    batch: [],
    batchRunning: false,
  };

  private seq = 0;
  private inflight = 0;
  private dirty = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly client: ServiceClient,
    private readonly onChange: (state: PanelState) => void = () => {},
  ) {}

  /** Number of threshold requests currently on the wire (drives the busy spinner). */
  inflightCount(): number {
    return this.inflight;
  }

  private notify(): void {
    this.onChange(this.state);
  }

  setOverlayOpacity(value: number): void {
    this.state.overlayOpacity = Math.min(1, Math.max(0, value));
    this.notify();
  }

  /**
   * Stage one tuning field and schedule a debounced re-run. Out-of-range
   * values become an inline form error and no request is made.
   */
  setParam(field: keyof TuneValues, value: TuneValues[keyof TuneValues]): void {
    const err = boundsError(field, value);
    if (err) {
      this.state.formError = err;
      this.notify();
      return;
    }
    (this.state.tune as { [k: string]: unknown })[field] = value;
    this.state.formError = null;
    this.notify();
    this.scheduleRerun();
  }

  private scheduleRerun(): void {
    if (!this.state.imageId) return;
    if (this.timer !== null) clearTimeout(this.timer);
    this.timer = setTimeout(() => {
      this.timer = null;
      this.submit();
    }, DEBOUNCE_MS);
  }

  // Debounced path: while a request is on the wire, remember that the params
  // moved and re-submit once, instead of stacking a backlog.
  private submit(): void {
    if (!this.state.imageId) return;
    if (this.inflight > 0) {
      this.dirty = true;
      return;
    }
    void this.issue();
  }

  /** Run the threshold now, cancelling any pending debounce. */
  rerun(): Promise<void> {
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    return this.issue();
  }

  private async issue(): Promise<void> {
    const imageId = this.state.imageId;
    if (!imageId) return;
    const seq = ++this.seq;
    this.inflight += 1;
    this.notify();
    try {
      const outcome = await this.client.runThreshold({
        image_id: imageId,
        include_curve: true,
        ...this.state.tune,
      });
      const result =
        outcome.kind === "done" ? outcome.result : await this.client.awaitJob(outcome.ticket);
      if (seq === this.seq) this.applyThreshold(result);
    } catch (err) {
      if (seq === this.seq) this.surface(err);
    } finally {
      this.inflight -= 1;
      this.notify();
      if (this.dirty) {
        this.dirty = false;
        this.submit();
      }
    }
  }

  // Result, curve and mask swap in together so the plot always matches the
  // overlay that is on screen.
  private applyThreshold(result: ThresholdResult): void {
    this.state.result = result;
    this.state.curve = result.curve ?? null;
    this.state.bestThreshold = result.threshold;
    this.state.maskUrl = this.client.maskUrl(result.mask_id);
    this.state.formError = null;
    this.notify();
  }

  private surface(err: unknown): void {
    if (err instanceof ApiError) {
      this.state.formError = err.detail;
    } else {
      this.state.formError = err instanceof Error ? err.message : String(err);
    }
    this.notify();
  }

  /** Upload a new image and immediately run it; any in-flight tune becomes stale. */
  async showImage(dataBase64: string): Promise<void> {
    const up = await this.client.uploadImage(dataBase64);
    this.state.imageId = up.image_id;
    this.state.imageSize = { width: up.width, height: up.height };
    this.notify();
    await this.rerun();
  }

  async loadConfig(): Promise<void> {
    this.state.config = await this.client.getConfig();
    this.notify();
  }

  /**
   * Push config edits through the server's compare-and-set endpoint. The
   * mirror is replaced by the response; a version conflict or rejected field
   * shows up as an inline error and leaves the mirror untouched.
   */
  async saveConfig(fields: Partial<SessionConfig>): Promise<boolean> {
    const cfg = this.state.config;
    if (!cfg) throw new Error("config not loaded yet");
    try {
      this.state.config = await this.client.putConfig({ ...fields, version: cfg.version });
      this.state.formError = null;
      this.notify();
      return true;
    } catch (err) {
      this.surface(err);
      return false;
    }
  }

  /**
   * Measure a list of files one after another, streaming rows into the
   * results grid. A file that fails stays in the grid as an inline error row
   * and the rest of the batch carries on. Whether each file refreshes the
   * curve plot follows the refresh_plots flag as it stands when that file
   * starts, so toggling mid-batch affects the next file, not past ones.
   */
  async runBatch(
    files: BatchFile[],
    onRow?: (row: BatchRow, index: number) => void | Promise<void>,
  ): Promise<BatchRow[]> {
    this.state.batch = [];
    this.state.batchRunning = true;
    this.notify();
    try {
      for (let i = 0; i < files.length; i += 1) {
        const refresh = this.state.config ? this.state.config.refresh_plots : true;
        let row: BatchRow;
        try {
          const up = await this.client.uploadImage(files[i].dataBase64);
          const m = await this.client.measure({ image_id: up.image_id, ...this.state.tune });
          row = {
            image: files[i].name,
            ok: true,
            length_side_cm: m.length_side_cm,
            length_under_cm: m.length_under_cm,
            height_cm: m.height_cm,
            width_cm: m.width_cm,
            distance_to_background_px: m.distance_to_background_px,
          };
          if (refresh) this.refreshPlotFrom(m);
        } catch (err) {
          if (!(err instanceof ApiError)) throw err;
          row = { image: files[i].name, ok: false, error: err.detail };
        }
        this.state.batch.push(row);
        this.notify();
        if (onRow) await onRow(row, i);
      }
    } finally {
      this.state.batchRunning = false;
      this.notify();
    }
    return this.state.batch;
  }

  private refreshPlotFrom(m: Measurement): void {
    const rows = m.diagnostics.curve;
    if (!rows) return;
    // Diagnostic rows carry a raw accepted-pixel count, not a fraction, so
    // the secondary series is omitted rather than derived locally.
    this.state.curve = rows.map(([threshold, z, , feasible]) => ({ threshold, z, feasible }));
    this.state.result = null;
    this.state.bestThreshold =
      typeof m.diagnostics.threshold === "number" ? m.diagnostics.threshold : null;
    this.notify();
  }
}

const CSV_HEADER = [
  "image",
  "ok",
  "length_side_cm",
  "length_under_cm",
  "height_cm",
  "width_cm",
  "distance_to_background_px",
  "error",
] as const;

const CM_COLUMNS = new Set(["length_side_cm", "length_under_cm", "height_cm", "width_cm"]);

// Matches how the measurement service's own tooling prints floats: integral
// values keep a trailing .0, everything else uses shortest round-trip form.
function cmText(v: number): string {
  return Number.isInteger(v) ? v.toFixed(1) : String(v);
}

function csvCell(column: string, value: unknown): string {
  let s: string;
  if (value === null || value === undefined) s = "";
  else if (typeof value === "boolean") s = value ? "1" : "0";
  else if (typeof value === "number" && CM_COLUMNS.has(column)) s = cmText(value);
  else s = String(value);
  if (/[",\n\r]/.test(s)) s = `"${s.replace(/"/g, '""')}"`;
  return s;
}

/** Results grid as CSV, byte-identical to the service tooling's batch output. */
export function buildBatchCsv(rows: BatchRow[]): string {
  const lines = [CSV_HEADER.join(",")];
  for (const row of rows) {
    const cells = row as unknown as { [k: string]: unknown };
    lines.push(CSV_HEADER.map((col) => csvCell(col, cells[col])).join(","));
  }
  return lines.join("\n") + "\n";
}
