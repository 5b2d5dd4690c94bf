// The four plot kinds. Every figure is a pure view of stored run
// artifacts: values and error bars are read from report.json / the path
// CSVs, never recomputed.

import { writeFileSync, mkdirSync } from "fs";
import path from "path";
import { Resvg } from "@resvg/resvg-js";
import { assertSameModel, modelIdentity, pathFiles, readPathCsv, readReport } from "./io.js";
import { Chart } from "./svg.js";
import { theoryCurve } from "./theory.js";
import { PlotSpec, Report, ReportStat, seOf } from "./types.js";

export interface PlotResult {
  svgPath: string;
  pngPath: string;
  svg: string;
}

function statEntries(report: Report, prefix: string): [string, ReportStat][] {
  return Object.entries(report.stats)
    .filter(([k]) => k.startsWith(prefix))
    .sort(([a], [b]) => a.localeCompare(b, undefined, { numeric: true }));
}

function ladderChart(runs: string[]): Chart {
  const chart = new Chart({
    title: "Scheme convergence ladder",
    xLabel: "rung",
    yLabel: "tagged-displacement Wasserstein distance",
  });
  for (const dir of runs) {
    const report = readReport(dir);
    const entries = statEntries(report, "w1[");
    if (!entries.length) {
      throw new Error(`${dir} report carries no w1[...] distances`);
    }
    const labels = entries.map(([k]) => k.slice(3, -1));
    const xs = entries.map((_, i) => i + 1);
    const ys = entries.map(([, s]) => s.value);
    const es = entries.map(([, s]) => seOf(s));
    const color = chart.nextColor();
    chart.line(xs, ys, { color, label: path.basename(dir) });
    chart.points(xs, ys, { color });
    chart.errorBars(xs, ys, es);
    // rung names along the x axis as a caption line
    chart.line([xs[0]], [ys[0]], { color, width: 0.01, label: labels.join(" | ") });
  }
  return chart;
}

function paircorrChart(runs: string[]): Chart {
  const chart = new Chart({
    title: "Pair correlation",
    xLabel: "r",
    yLabel: "g(r)",
  });
  let rMax = 0;
  for (const dir of runs) {
    const report = readReport(dir);
    const entries = statEntries(report, "g@");
    if (!entries.length) {
      throw new Error(`${dir} report carries no g@r statistics`);
    }
    const xs = entries.map(([k]) => Number(k.slice(2)));
    const ys = entries.map(([, s]) => s.value);
    const es = entries.map(([, s]) => seOf(s));
    rMax = Math.max(rMax, ...xs);
    const color = chart.nextColor();
    chart.band(xs, ys.map((y, i) => y - es[i]), ys.map((y, i) => y + es[i]), { color });
    chart.line(xs, ys, { color, label: path.basename(dir) });
    chart.points(xs, ys, { color });
  }
  const curve = theoryCurve(modelIdentity(runs[0]));
  if (curve) {
    const xs: number[] = [];
    const ys: number[] = [];
    for (let r = rMax / 200; r <= rMax * 1.02; r += rMax / 200) {
      xs.push(r);
      ys.push(curve.g(r));
    }
    chart.line(xs, ys, { color: "#111827", dash: "6 4", width: 1.5, label: curve.label });
  }
  return chart;
}

function slopeChart(runs: string[]): Chart {
  const chart = new Chart({
    title: "Fourth-moment growth",
    xLabel: "lag",
    yLabel: "E|dX|^4",
    xLog: true,
    yLog: true,
  });
  for (const dir of runs) {
    const report = readReport(dir);
    const entries = statEntries(report, "moment4@");
    if (!entries.length) {
      throw new Error(`${dir} report carries no moment4@lag statistics`);
    }
    const xs = entries.map(([k]) => Number(k.slice(8)));
    const ys = entries.map(([, s]) => s.value);
    const es = entries.map(([, s]) => seOf(s));
    const color = chart.nextColor();
    chart.points(xs, ys, { color, label: path.basename(dir) });
    chart.errorBars(xs, ys, es, { color });
    const slopeStat = report.stats["slope"];
    if (slopeStat) {
      // anchored power law through the geometric midpoint, stored slope
      const slope = slopeStat.value;
      const midX = Math.exp((Math.log(xs[0]) + Math.log(xs[xs.length - 1])) / 2);
      const midY = Math.exp(
        ys.reduce((acc, y) => acc + Math.log(y), 0) / ys.length
      );
      const fx = [xs[0] * 0.8, xs[xs.length - 1] * 1.25];
      const fy = fx.map((x) => midY * Math.pow(x / midX, slope));
      chart.line(fx, fy, {
        color,
        dash: "5 4",
        width: 1.5,
        label: `slope ${slope.toFixed(3)}`,
      });
    }
  }
  return chart;
}

function localtimeChart(runs: string[]): Chart {
  const chart = new Chart({
    title: "Boundary local time",
    xLabel: "t",
    yLabel: "mean local time per particle",
  });
  for (const dir of runs) {
    const color = chart.nextColor();
    const files = pathFiles(dir);
    const meanTimes: number[] = [];
    const meanVals: number[] = [];
    files.forEach((file, idx) => {
      const data = readPathCsv(file);
      const ts: number[] = [];
      const vals: number[] = [];
      data.frames.forEach((frame, i) => {
        const free = frame.filter((r) => !r.frozen);
        if (!free.length) return;
        ts.push(data.times[i]);
        vals.push(free.reduce((acc, r) => acc + r.localTime, 0) / free.length);
      });
      chart.line(ts, vals, {
        color,
        width: 1,
        opacity: 0.35,
        label: idx === 0 ? `${path.basename(dir)} replicas` : undefined,
      });
      ts.forEach((t, i) => {
        const slot = meanTimes.indexOf(t);
        if (slot === -1) {
          meanTimes.push(t);
          meanVals.push(vals[i]);
        } else {
          meanVals[slot] += vals[i];
        }
      });
    });
    const scaled = meanVals.map((v) => v / files.length);
    chart.line(meanTimes, scaled, { color, width: 3, label: "replica mean" });
  }
  return chart;
}

export function renderPlot(spec: PlotSpec): PlotResult {
  if (!spec.runs.length) {
    throw new Error("at least one run directory is required");
  }
  assertSameModel(spec.runs);
  let chart: Chart;
  switch (spec.kind) {
    case "ladder":
      chart = ladderChart(spec.runs);
      break;
    case "paircorr":
      chart = paircorrChart(spec.runs);
      break;
    case "slope":
      chart = slopeChart(spec.runs);
      break;
    case "localtime":
      chart = localtimeChart(spec.runs);
      break;
    default:
      throw new Error(`unknown plot kind ${String(spec.kind)}`);
  }
  const svg = chart.render();
  const base = spec.out.replace(/\.(svg|png)$/i, "");
  mkdirSync(path.dirname(path.resolve(base)), { recursive: true });
  const svgPath = `${base}.svg`;
  const pngPath = `${base}.png`;
  writeFileSync(svgPath, svg, "utf-8");
  const png = new Resvg(svg, { fitTo: { mode: "width", value: 1440 } }).render().asPng();
  writeFileSync(pngPath, png);
  return { svgPath, pngPath, svg };
}
