// Shapes of the simulator's on-disk artifacts (manifest.json, report.json,
// path CSVs). These mirror the Python side's serialisation exactly; the
// plotting layer only reads them and never recomputes any statistic.

export interface Manifest {
  schema: number;
  rng: string;
  code_version: string;
  kind?: string;
  files?: string[];
  model?: Record<string, unknown>;
  scheme?: Record<string, unknown>;
  seeds?: Record<string, unknown>;
  window_radius?: number;
  events?: Record<string, [number, string, number][]>;
  [extra: string]: unknown;
}

export interface ReportStat {
  value: number;
  se: number | "deterministic";
  n: number;
  detail?: Record<string, unknown>;
}

export interface Report {
  name: string;
  passed: boolean;
  stats: Record<string, ReportStat>;
  verdicts: Record<string, boolean>;
  tolerances: Record<string, string>;
  provenance: Record<string, unknown>;
}

/** One (time, particle) row of a path CSV. */
export interface PathRow {
  time: number;
  label: number;
  frozen: boolean;
  x: number[];
  localTime: number;
}

export interface PathData {
  times: number[];
  /** rows grouped per recorded time, in file order */
  frames: PathRow[][];
  dim: number;
}

export type PlotKind = "ladder" | "paircorr" | "slope" | "localtime";

export interface PlotSpec {
  kind: PlotKind;
  /** input run directories (manifest.json + report.json / CSVs) */
  runs: string[];
  /** output image path; .svg and .png siblings are written */
  out: string;
}

export function seOf(stat: ReportStat): number {
  return typeof stat.se === "number" ? stat.se : 0;
}
