import { describe, expect, it } from "vitest";

import { Measurement, ServiceClient } from "../src/api";
import { renderNoiseCurve } from "../src/curve";
import { BatchRow, buildBatchCsv, Panel } from "../src/state";
import {
  configStore,
  errorResponse,
  Handler,
  jsonResponse,
  LoggedCall,
  makeFetch,
} from "./helpers";

const CORRUPT = "Y29ycnVwdA==";

function measurement(seed: number, curve = false): Measurement {
  const m: Measurement = {
    length_side_cm: 26.417 + seed,
    length_under_cm: 24.882 + seed,
    height_cm: 7.75 + seed / 10,
    width_cm: 9.5 + seed / 10,
    distance_to_background_px: 120 + seed,
    upper_curve: [
      [30, 200],
      [31, 199],
    ],
    diagnostics: { threshold: 40 + seed },
  };
  if (curve) {
    m.diagnostics.curve = [
      [39 + seed, 2.0, 900, false],
      [40 + seed, 1.0, 1200, true],
      [41 + seed, 1.5, 1500, true],
    ];
  }
  return m;
}

function batchService(withCurves: boolean) {
  const store = configStore();
  const calls: LoggedCall[] = [];
  let uploads = 0;
  const byImage = new Map<string, Measurement>();
  const routes: { [key: string]: Handler } = {
    ...store.routes,
    "POST /images": (body) => {
      if (body.data_base64 === CORRUPT) {
        return errorResponse(400, "cannot decode image data");
      }
      uploads += 1;
      const id = `img-${uploads}`;
      byImage.set(id, measurement(uploads, withCurves));
      return jsonResponse(201, { image_id: id, width: 960, height: 583 });
    },
    "POST /measure": (body) => {
      const m = byImage.get(body.image_id);
      return m ? jsonResponse(200, m) : errorResponse(404, `unknown image_id ${body.image_id}`);
    },
  };
  return { store, calls, fetchFn: makeFetch(routes, calls), byImage };
}

describe("batch panel", () => {
  it("streams five files and keeps one corrupt input inline as an error row", async () => {
    const svc = batchService(false);
    const panel = new Panel(new ServiceClient("", svc.fetchFn));
    await panel.loadConfig();

    const seen: number[] = [];
    const rows = await panel.runBatch(
      [
        { name: "n01.png", dataBase64: "QQ==" },
        { name: "n02.png", dataBase64: "Qg==" },
        { name: "broken.png", dataBase64: CORRUPT },
        { name: "n04.png", dataBase64: "RA==" },
        { name: "n05.png", dataBase64: "RQ==" },
      ],
      (_row, i) => {
        expect(panel.state.batchRunning).toBe(true);
        seen.push(i);
      },
    );

    expect(rows).toHaveLength(5);
    expect(seen).toEqual([0, 1, 2, 3, 4]);
    expect(panel.state.batchRunning).toBe(false);

    const okRows = rows.filter((r) => r.ok);
    expect(okRows).toHaveLength(4);
    // The failure stays in place, between its neighbours.
    expect(rows[2]).toEqual({ image: "broken.png", ok: false, error: "cannot decode image data" });

    // Numbers land in the grid exactly as the server sent them.
    expect(rows[0].length_side_cm).toBe(27.417);
    expect(rows[1].length_under_cm).toBe(26.882);
    expect(rows[3].width_cm).toBe(9.8);
    expect(rows[4].distance_to_background_px).toBe(124);
  });

  it("builds the download CSV byte-for-byte like the service tooling", () => {
    const rows: BatchRow[] = [
      {
        image: "a.png",
        ok: true,
        length_side_cm: 26.417,
        length_under_cm: 24.882,
        height_cm: 7.75,
        width_cm: 9.0,
        distance_to_background_px: 120,
      },
      { image: "bad.png", ok: false, error: 'cannot decode image: not a PNG, "really"' },
      {
        image: "c.png",
        ok: true,
        length_side_cm: 25.0,
        length_under_cm: 23.5,
        height_cm: 8.125,
        width_cm: 9.625,
        distance_to_background_px: 98,
      },
    ];
    // Frozen against the reference CSV writer for identical rows: integral
    // centimetre values keep their trailing .0 and the error cell is quoted.
    expect(buildBatchCsv(rows)).toBe(
      "image,ok,length_side_cm,length_under_cm,height_cm,width_cm,distance_to_background_px,error\n" +
        "a.png,1,26.417,24.882,7.75,9.0,120,\n" +
        'bad.png,0,,,,,,"cannot decode image: not a PNG, ""really"""\n' +
        "c.png,1,25.0,23.5,8.125,9.625,98,\n",
    );
  });

  it("suppresses plot refreshes from the toggle onward, not retroactively", async () => {
    const svc = batchService(true);
    let lastCurve: unknown = null;
    const refreshedAt: number[] = [];
    const panel = new Panel(new ServiceClient("", svc.fetchFn), (s) => {
      if (s.curve !== lastCurve) {
        lastCurve = s.curve;
        refreshedAt.push(s.batch.length);
      }
    });
    await panel.loadConfig();
    expect(panel.state.config?.refresh_plots).toBe(true);

    await panel.runBatch(
      [
        { name: "n01.png", dataBase64: "QQ==" },
        { name: "n02.png", dataBase64: "Qg==" },
        { name: "n03.png", dataBase64: "Qw==" },
      ],
      async (_row, i) => {
        if (i === 0) expect(await panel.saveConfig({ refresh_plots: false })).toBe(true);
      },
    );

    // Only the first file refreshed the plot; the toggle took hold before the
    // second file started and the first file's curve stayed on screen.
    expect(refreshedAt).toEqual([0]);
    expect(panel.state.curve).toEqual([
      { threshold: 40, z: 2.0, feasible: false },
      { threshold: 41, z: 1.0, feasible: true },
      { threshold: 42, z: 1.5, feasible: true },
    ]);
    expect(panel.state.bestThreshold).toBe(41);
  });

  it("renders measurement curves without inventing an accepted fraction", async () => {
    const svc = batchService(true);
    const panel = new Panel(new ServiceClient("", svc.fetchFn));
    await panel.loadConfig();
    await panel.runBatch([{ name: "n01.png", dataBase64: "QQ==" }]);

    const box = document.createElement("div");
    renderNoiseCurve(box, panel.state.curve, panel.state.bestThreshold);
    // Diagnostic rows carry raw counts, not fractions; deriving one locally
    // would be exactly the kind of math the panel must not do.
    expect(box.querySelectorAll("polyline.fraction-line")).toHaveLength(0);
    expect(box.querySelector("circle.best-marker")?.getAttribute("data-threshold")).toBe("41");
  });
});
