#!/usr/bin/env node
// Render figures from simulator run directories.
//
// Usage:
//   ibsim-plots --kind ladder|paircorr|slope|localtime \
//               --runs dirA[,dirB...] --out figure
//
// Writes <out>.svg and <out>.png. Exit codes: 0 ok, 2 bad input.

import { renderPlot } from "./plots.js";
import { PlotKind } from "./types.js";

function parseArgs(argv: string[]): { kind: PlotKind; runs: string[]; out: string } {
  const args: Record<string, string> = {};
  for (let i = 0; i < argv.length; i += 2) {
    const key = argv[i];
    const value = argv[i + 1];
    if (!key?.startsWith("--") || value === undefined) {
      throw new Error(`malformed arguments near ${key ?? "<end>"}`);
    }
    args[key.slice(2)] = value;
  }
  const kind = args["kind"] as PlotKind;
  if (!["ladder", "paircorr", "slope", "localtime"].includes(kind)) {
    throw new Error(`--kind must be ladder|paircorr|slope|localtime, got ${kind}`);
  }
  if (!args["runs"]) throw new Error("--runs is required");
  if (!args["out"]) throw new Error("--out is required");
  return { kind, runs: args["runs"].split(",").filter(Boolean), out: args["out"] };
}

try {
  const spec = parseArgs(process.argv.slice(2));
  const result = renderPlot(spec);
  console.log(`wrote ${result.svgPath} and ${result.pngPath}`);
} catch (err) {
  console.error(`error: ${err instanceof Error ? err.message : String(err)}`);
  process.exit(2);
}
