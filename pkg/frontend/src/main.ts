/**
 * Wires the operator panel to the page. All behaviour lives in Panel,
 * renderNoiseCurve and renderMaskOverlay; this file only moves values
 * between DOM elements and the panel state.
 */

import { ServiceClient } from "./api";
import { renderNoiseCurve } from "./curve";
import { renderMaskOverlay } from "./overlay";
import { buildBatchCsv, Panel, PanelState, TuneValues } from "./state";

const client = new ServiceClient("");
const panel = new Panel(client, render);

const curveBox = document.getElementById("curve") as HTMLElement;
const overlayBox = document.getElementById("overlay") as HTMLElement;
const errorBox = document.getElementById("form-error") as HTMLElement;
const busyBox = document.getElementById("busy") as HTMLElement;
const resultBox = document.getElementById("result") as HTMLElement;
const batchTable = document.getElementById("batch-table") as HTMLTableElement;

function render(state: PanelState): void {
  renderNoiseCurve(curveBox, state.curve, state.bestThreshold);
  renderMaskOverlay(overlayBox, imageObjectUrl, state.maskUrl, state.overlayOpacity);
  errorBox.textContent = state.formError ?? "";
  errorBox.hidden = state.formError === null;
  busyBox.hidden = panel.inflightCount() === 0 && !state.batchRunning;

  if (state.result) {
    const r = state.result;
    resultBox.textContent =
      `threshold ${r.threshold}` +
      (r.z !== undefined ? `  z ${r.z.toFixed(6)}` : "") +
      `  accepted ${(r.nac_fraction * 100).toFixed(1)}%`;
  } else {
    resultBox.textContent = "";
  }

  const body = batchTable.tBodies[0];
  body.textContent = "";
  for (const row of state.batch) {
    const tr = body.insertRow();
    tr.insertCell().textContent = row.image;
    if (row.ok) {
      for (const v of [row.length_side_cm, row.length_under_cm, row.height_cm, row.width_cm]) {
        tr.insertCell().textContent = v === undefined ? "" : v.toFixed(3);
      }
      tr.insertCell().textContent = String(row.distance_to_background_px ?? "");
    } else {
      const cell = tr.insertCell();
      cell.colSpan = 5;
      cell.className = "batch-error";
      cell.textContent = row.error ?? "failed";
    }
  }

  const refresh = document.getElementById("cfg-refresh-plots") as HTMLInputElement | null;
  if (refresh && state.config) refresh.checked = state.config.refresh_plots;
}

let imageObjectUrl: string | null = null;

function fileToBase64(file: File): Promise<string> {
  return new Promise((resolve, reject) => {
    const reader = new FileReader();
    // readAsDataURL yields "data:image/png;base64,<payload>"
    reader.onload = () => resolve(String(reader.result).split(",", 2)[1] ?? "");
    reader.onerror = () => reject(reader.error);
    reader.readAsDataURL(file);
  });
}

function hookNumber(id: string, field: keyof TuneValues): void {
  const input = document.getElementById(id) as HTMLInputElement | null;
  if (!input) return;
  input.addEventListener("input", () => {
    panel.setParam(field, input.value === "" ? undefined : Number(input.value));
  });
}

function hookTuning(): void {
  hookNumber("lo", "lo");
  hookNumber("hi", "hi");
  hookNumber("step", "step");
  hookNumber("min-frac", "min_frac");
  hookNumber("max-frac", "max_frac");
  hookNumber("edge-weight", "edge_weight");
  hookNumber("background", "background");
  hookNumber("delta", "delta");

  const polarity = document.getElementById("polarity") as HTMLSelectElement | null;
  polarity?.addEventListener("change", () => {
    panel.setParam("polarity", polarity.value as "dark" | "bright");
  });

  const opacity = document.getElementById("opacity") as HTMLInputElement | null;
  opacity?.addEventListener("input", () => {
    panel.setOverlayOpacity(Number(opacity.value));
  });
}

function hookImage(): void {
  const picker = document.getElementById("image-file") as HTMLInputElement | null;
  picker?.addEventListener("change", async () => {
    const file = picker.files?.[0];
    if (!file) return;
    if (imageObjectUrl) URL.revokeObjectURL(imageObjectUrl);
    imageObjectUrl = URL.createObjectURL(file);
    await panel.showImage(await fileToBase64(file));
  });
}

function hookConfig(): void {
  const refresh = document.getElementById("cfg-refresh-plots") as HTMLInputElement | null;
  refresh?.addEventListener("change", () => {
    void panel.saveConfig({ refresh_plots: refresh.checked });
  });
}

function hookBatch(): void {
  const files = document.getElementById("batch-files") as HTMLInputElement | null;
  const run = document.getElementById("batch-run") as HTMLButtonElement | null;
  const download = document.getElementById("batch-csv") as HTMLButtonElement | null;

  run?.addEventListener("click", async () => {
    const picked = Array.from(files?.files ?? []);
    if (picked.length === 0) return;
    const payload = [];
    for (const f of picked) payload.push({ name: f.name, dataBase64: await fileToBase64(f) });
    await panel.runBatch(payload);
  });

  download?.addEventListener("click", () => {
    const blob = new Blob([buildBatchCsv(panel.state.batch)], { type: "text/csv" });
    const link = document.createElement("a");
    link.href = URL.createObjectURL(blob);
    link.download = "batch.csv";
    link.click();
    URL.revokeObjectURL(link.href);
  });
}

hookTuning();
hookImage();
hookConfig();
hookBatch();
void panel.loadConfig();
render(panel.state);
