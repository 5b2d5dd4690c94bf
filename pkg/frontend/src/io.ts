// Reading and validating run directories.

import { readFileSync, existsSync } from "fs";
import path from "path";
import { Manifest, PathData, PathRow, Report } from "./types.js";

export function readManifest(runDir: string): Manifest {
  const file = path.join(runDir, "manifest.json");
  if (!existsSync(file)) {
    throw new Error(`no manifest.json under ${runDir}`);
  }
  return JSON.parse(readFileSync(file, "utf-8")) as Manifest;
}

export function readReport(runDir: string): Report {
  const file = path.join(runDir, "report.json");
  if (!existsSync(file)) {
    throw new Error(`no report.json under ${runDir}`);
  }
  return JSON.parse(readFileSync(file, "utf-8")) as Report;
}

/** Model identity of a run: the manifest's model block, falling back to the
 *  report provenance for verify-style directories. */
export function modelIdentity(runDir: string): Record<string, unknown> {
  const manifestPath = path.join(runDir, "manifest.json");
  if (existsSync(manifestPath)) {
    const manifest = JSON.parse(readFileSync(manifestPath, "utf-8")) as Manifest;
    if (manifest.model) return manifest.model;
  }
  const reportPath = path.join(runDir, "report.json");
  if (existsSync(reportPath)) {
    const report = JSON.parse(readFileSync(reportPath, "utf-8")) as Report;
    const model = report.provenance?.model;
    if (model && typeof model === "object") return model as Record<string, unknown>;
  }
  return {};
}

/** Overlay guard: every run must describe the same model. Throws with the
 *  list of differing keys; never silently mixes fields. */
export function assertSameModel(runs: string[]): void {
  if (runs.length < 2) return;
  const first = modelIdentity(runs[0]);
  for (const dir of runs.slice(1)) {
    const other = modelIdentity(dir);
    const keys = new Set([...Object.keys(first), ...Object.keys(other)]);
    const differing: string[] = [];
    for (const key of keys) {
      if (JSON.stringify(first[key]) !== JSON.stringify(other[key])) {
        differing.push(
          `${key}: ${JSON.stringify(first[key])} vs ${JSON.stringify(other[key])}`
        );
      }
    }
    if (differing.length) {
      throw new Error(
        `manifest mismatch between ${runs[0]} and ${dir}; differing keys: ${differing.join("; ")}`
      );
    }
  }
}

export function readPathCsv(file: string): PathData {
  const text = readFileSync(file, "utf-8");
  const lines = text.split("\n").filter((l) => l.length > 0);
  const header = lines[0].split(",");
  if (header[0] !== "time" || header[header.length - 1] !== "local_time") {
    throw new Error(`${file} is not a path CSV (header ${header.join(",")})`);
  }
  const dim = header.length - 4;
  const times: number[] = [];
  const frames: PathRow[][] = [];
  let current = Number.NaN;
  for (const line of lines.slice(1)) {
    const parts = line.split(",");
    const row: PathRow = {
      time: Number(parts[0]),
      label: Number(parts[1]),
      frozen: parts[2] === "1",
      x: parts.slice(3, 3 + dim).map(Number),
      localTime: Number(parts[parts.length - 1]),
    };
    if (row.time !== current) {
      current = row.time;
      times.push(row.time);
      frames.push([]);
    }
    frames[frames.length - 1].push(row);
  }
  return { times, frames, dim };
}

export function pathFiles(runDir: string): string[] {
  const manifest = readManifest(runDir);
  const files = (manifest.files ?? []).filter((f) => f.startsWith("path_"));
  if (!files.length) {
    throw new Error(`${runDir} holds no path CSVs`);
  }
  return files.map((f) => path.join(runDir, f));
}
