/**
 * Noise-curve plot: objective score z against candidate threshold.
 *
 * The plot is plain SVG so its contents stay inspectable. Feasible stretches
 * of the curve draw green, infeasible stretches red with a shaded band behind
 * them, the accepted-pixel fraction rides along as a secondary yellow series,
 * and the server-reported best threshold gets a marker. All numbers come from
 * the server response; this module only maps them to pixels.
 */

export interface CurveViewPoint {
  threshold: number;
  z: number;
  nac_fraction?: number;
  feasible: boolean;
}

export interface CurvePlotOptions {
  width?: number;
  height?: number;
  margin?: number;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function el<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: { [name: string]: string | number },
): SVGElementTagNameMap[K] {
  const node = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) {
    node.setAttribute(name, String(value));
  }
  return node;
}

function fmt(v: number): string {
  return String(Math.round(v * 100) / 100);
}

interface Scale {
  (value: number): number;
}

function linearScale(lo: number, hi: number, outLo: number, outHi: number): Scale {
  const span = hi - lo;
  // Degenerate domain (single candidate) pins to the middle of the range.
  if (span === 0) return () => (outLo + outHi) / 2;
  return (value) => outLo + ((value - lo) / span) * (outHi - outLo);
}

/** Contiguous runs of a predicate over curve points, as [start, end] index pairs. */
function runs(curve: CurveViewPoint[], pred: (p: CurveViewPoint) => boolean): [number, number][] {
  const out: [number, number][] = [];
  let start = -1;
  curve.forEach((p, i) => {
    if (pred(p)) {
      if (start < 0) start = i;
    } else if (start >= 0) {
      out.push([start, i - 1]);
      start = -1;
    }
  });
  if (start >= 0) out.push([start, curve.length - 1]);
  return out;
}

export function renderNoiseCurve(
  container: HTMLElement,
  curve: CurveViewPoint[] | null,
  best: number | null,
  opts: CurvePlotOptions = {},
): void {
  container.textContent = "";
  if (!curve || curve.length === 0) {
    const empty = document.createElement("div");
    empty.className = "curve-empty";
    empty.textContent = "no curve yet - upload an image and run a threshold";
    container.appendChild(empty);
    return;
  }

  const width = opts.width ?? 640;
  const height = opts.height ?? 240;
  const margin = opts.margin ?? 10;
  const svg = el("svg", {
    class: "noise-curve",
    width,
    height,
    viewBox: `0 0 ${width} ${height}`,
  });

  const thresholds = curve.map((p) => p.threshold);
  const zs = curve.map((p) => p.z);
  const x = linearScale(Math.min(...thresholds), Math.max(...thresholds), margin, width - margin);
  const y = linearScale(Math.min(...zs), Math.max(...zs), height - margin, margin);
  const yFrac = linearScale(0, 1, height - margin, margin);

  // Shaded background for every infeasible stretch. Each band extends halfway
  // toward the neighbouring points so adjacent samples tile without gaps.
  for (const [i0, i1] of runs(curve, (p) => !p.feasible)) {
    const left = i0 > 0 ? (x(curve[i0 - 1].threshold) + x(curve[i0].threshold)) / 2 : margin;
    const right =
      i1 < curve.length - 1
        ? (x(curve[i1].threshold) + x(curve[i1 + 1].threshold)) / 2
        : width - margin;
    svg.appendChild(
      el("rect", {
        class: "infeasible-band",
        "data-from": curve[i0].threshold,
        "data-to": curve[i1].threshold,
        x: fmt(left),
        y: margin,
        width: fmt(Math.max(right - left, 1)),
        height: height - 2 * margin,
      }),
    );
  }

  const toPairs = (i0: number, i1: number, scale: Scale) =>
    curve
      .slice(i0, i1 + 1)
      .map((p) => `${fmt(x(p.threshold))},${fmt(scale(p.z))}`)
      .join(" ");

  if (curve.length === 1) {
    // One candidate: a lone dot, no line to draw.
    const p = curve[0];
    svg.appendChild(
      el("circle", {
        class: `z-point ${p.feasible ? "feasible" : "infeasible"}`,
        "data-threshold": p.threshold,
        cx: fmt(x(p.threshold)),
        cy: fmt(y(p.z)),
        r: 3,
      }),
    );
  } else {
    for (const feasible of [false, true]) {
      for (const [i0, i1] of runs(curve, (p) => p.feasible === feasible)) {
        // Stretch one point back so segments meet instead of leaving gaps.
        const from = Math.max(i0 - 1, 0);
        svg.appendChild(
          el("polyline", {
            class: `z-line ${feasible ? "feasible" : "infeasible"}`,
            points: toPairs(from, i1, y),
            fill: "none",
          }),
        );
      }
    }
  }

  if (curve.every((p) => typeof p.nac_fraction === "number") && curve.length > 1) {
    svg.appendChild(
      el("polyline", {
        class: "fraction-line",
        points: curve
          .map((p) => `${fmt(x(p.threshold))},${fmt(yFrac(p.nac_fraction as number))}`)
          .join(" "),
        fill: "none",
      }),
    );
  }

  if (best !== null) {
    const hit = curve.find((p) => p.threshold === best);
    if (hit && hit.feasible) {
      svg.appendChild(
        el("circle", {
          class: "best-marker",
          "data-threshold": hit.threshold,
          cx: fmt(x(hit.threshold)),
          cy: fmt(y(hit.z)),
          r: 5,
        }),
      );
    }
  }

  container.appendChild(svg);
}
