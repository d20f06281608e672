#!/usr/bin/env node
// Command-line entry: plot --kind heatmap|stacked|box|hops --in <report file>
// --out <figure.svg>. Reads one analyzer report file and writes one SVG.
// Exit codes: 0 ok, 1 bad input data or unwritable output, 2 bad usage.
import fs from "node:fs";
import path from "node:path";
import { pathToFileURL } from "node:url";
import { parseArgs } from "node:util";
import { FIGURE_KINDS, type FigureKind, type FigureOptions, renderFromText } from "./figures.js";
import { SchemaError } from "./schema.js";

export const USAGE = `usage: plot --kind heatmap|stacked|box|hops --in <file> --out <figure.svg>
            [--title <text>] [--width <px>] [--height <px>]

  --kind     figure to draw: heatmap | stacked | box | hops
  --in       report file from the analyzer (breakdown.csv for heatmap and
             stacked, summary.json for box, hop_hist.csv or mcast_hist.csv
             for hops)
  --out      output path; SVG is the supported image format
  --title    override the default figure title
  --width    canvas width in pixels
  --height   canvas height in pixels
`;

export interface CliIo {
  stdout: (line: string) => void;
  stderr: (line: string) => void;
}

const realIo: CliIo = {
  stdout: (line) => process.stdout.write(line + "\n"),
  stderr: (line) => process.stderr.write(line + "\n"),
};

function parsePixels(raw: string | undefined, flag: string): number | undefined {
  if (raw === undefined) return undefined;
  const value = Number(raw);
  if (!Number.isFinite(value) || value <= 0) {
    throw new UsageError(`${flag} must be a positive number, got '${raw}'`);
  }
  return value;
}

class UsageError extends Error {}

/** Run the CLI against argv (without the node/script prefix); returns the exit code. */
export function runCli(argv: string[], io: CliIo = realIo): number {
  let kind: FigureKind;
  let inPath: string;
  let outPath: string;
  let options: FigureOptions;
  try {
    const { values } = parseArgs({
      args: argv,
      options: {
        kind: { type: "string" },
        in: { type: "string" },
        out: { type: "string" },
        title: { type: "string" },
        width: { type: "string" },
        height: { type: "string" },
        help: { type: "boolean", short: "h" },
      },
      allowPositionals: false,
    });
    if (values.help) {
      io.stdout(USAGE);
      return 0;
    }
    for (const flag of ["kind", "in", "out"] as const) {
      if (values[flag] === undefined) throw new UsageError(`missing required flag --${flag}`);
    }
    if (!FIGURE_KINDS.includes(values.kind as FigureKind)) {
      throw new UsageError(`--kind must be one of ${FIGURE_KINDS.join(", ")}, got '${values.kind}'`);
    }
    kind = values.kind as FigureKind;
    inPath = values.in as string;
    outPath = values.out as string;
    options = {
      title: values.title,
      width: parsePixels(values.width, "--width"),
      height: parsePixels(values.height, "--height"),
    };
  } catch (err) {
    io.stderr(`plot: ${(err as Error).message}`);
    io.stderr(USAGE);
    return 2;
  }

  const ext = path.extname(outPath).toLowerCase();
  if (ext !== ".svg") {
    io.stderr(`plot: unsupported output format '${ext || outPath}'; write an .svg file`);
    return 1;
  }

  let text: string;
  try {
    text = fs.readFileSync(inPath, "utf8");
  } catch (err) {
    io.stderr(`plot: cannot read ${inPath}: ${(err as NodeJS.ErrnoException).message}`);
    return 1;
  }

  let svg: string;
  try {
    svg = renderFromText(kind, text, options);
  } catch (err) {
    if (err instanceof SchemaError) {
      io.stderr(`plot: ${inPath}: ${err.message}`);
      return 1;
    }
    throw err;
  }

  try {
    fs.mkdirSync(path.dirname(path.resolve(outPath)), { recursive: true });
    fs.writeFileSync(outPath, svg, "utf8");
  } catch (err) {
    io.stderr(`plot: cannot write ${outPath}: ${(err as NodeJS.ErrnoException).message}`);
    return 1;
  }
  io.stdout(`wrote ${outPath}`);
  return 0;
}

const invokedPath = process.argv[1];
if (invokedPath !== undefined) {
  let direct = false;
  try {
    direct = import.meta.url === pathToFileURL(fs.realpathSync(invokedPath)).href;
  } catch {
    direct = false;
  }
  if (direct) {
    process.exit(runCli(process.argv.slice(2)));
  }
}
