// Parsing and validation for the report files emitted by the chiplet-lab
// analyzer. Figures must echo report numbers exactly, so every CSV cell is
// kept as the raw string from the file; callers convert to numbers only for
// geometry.
import Papa from "papaparse";

/** Raised when an input file does not match the expected report schema. */
export class SchemaError extends Error {
  constructor(message: string) {
    super(message);
    this.name = "SchemaError";
  }
}

/** One row of breakdown.csv: communication-time split for a workload/config pair. */
export interface BreakdownRow {
  workload: string;
  config: string;
  noc_cycles: string;
  nop_cycles: string;
  dram_cycles: string;
  total_comm_cycles: string;
  makespan: string;
  frac_noc: string;
  frac_nop: string;
  frac_dram: string;
}

/** One row of hop_hist.csv: message count at a hop distance, split by cast kind. */
export interface HopRow {
  workload: string;
  config: string;
  kind: string;
  hops: string;
  messages: string;
}

/** One row of mcast_hist.csv: multicast message count by destination-set size. */
export interface McastRow {
  workload: string;
  config: string;
  n_dsts: string;
  messages: string;
}

/** Hop-style inputs come in two shapes; the header decides which. */
export type HopInput =
  | { schema: "by-kind"; rows: HopRow[] }
  | { schema: "by-degree"; rows: McastRow[] };

/** Five-number summary as precomputed by the analyzer. */
export interface FiveNumber {
  min: number;
  q1: number;
  median: number;
  q3: number;
  max: number;
}

/** The slice of summary.json the box figure consumes. */
export interface RatioSummary {
  /** Config label (e.g. "3x3") to five-number summary of per-workload ratios. */
  stats: Record<string, FiveNumber>;
}

const BREAKDOWN_COLUMNS: (keyof BreakdownRow)[] = [
  "workload",
  "config",
  "noc_cycles",
  "nop_cycles",
  "dram_cycles",
  "total_comm_cycles",
  "makespan",
  "frac_noc",
  "frac_nop",
  "frac_dram",
];

const HOP_COLUMNS: (keyof HopRow)[] = ["workload", "config", "kind", "hops", "messages"];
const MCAST_COLUMNS: (keyof McastRow)[] = ["workload", "config", "n_dsts", "messages"];
const FIVE_KEYS: (keyof FiveNumber)[] = ["min", "q1", "median", "q3", "max"];

interface ParsedCsv {
  fields: string[];
  rows: Record<string, string>[];
}

function parseCsv(text: string, label: string): ParsedCsv {
  const result = Papa.parse<Record<string, string>>(text, {
    header: true,
    skipEmptyLines: true,
  });
  const fields = result.meta.fields ?? [];
  if (fields.length === 0) {
    throw new SchemaError(`${label}: empty input, expected a CSV header row`);
  }
  const hard = result.errors.filter((e) => e.type !== "FieldMismatch");
  if (hard.length > 0) {
    throw new SchemaError(`${label}: malformed CSV (${hard[0].message})`);
  }
  if (result.data.length === 0) {
    throw new SchemaError(`${label}: no data rows`);
  }
  return { fields, rows: result.data };
}

function requireColumns(parsed: ParsedCsv, columns: readonly string[], label: string): void {
  for (const col of columns) {
    if (!parsed.fields.includes(col)) {
      throw new SchemaError(`${label}: missing column '${col}'`);
    }
  }
}

function requireNumeric(rows: Record<string, string>[], columns: readonly string[], label: string): void {
  rows.forEach((row, i) => {
    for (const col of columns) {
      const raw = row[col];
      if (raw === undefined || raw === "" || !Number.isFinite(Number(raw))) {
        throw new SchemaError(`${label}: row ${i + 1} has non-numeric value ${JSON.stringify(raw ?? "")} in column '${col}'`);
      }
    }
  });
}

/** Parse breakdown.csv text into validated rows (cell values kept verbatim). */
export function parseBreakdown(text: string): BreakdownRow[] {
  const label = "breakdown input";
  const parsed = parseCsv(text, label);
  requireColumns(parsed, BREAKDOWN_COLUMNS, label);
  requireNumeric(parsed.rows, BREAKDOWN_COLUMNS.slice(2), label);
  return parsed.rows as unknown as BreakdownRow[];
}

/**
 * Parse a hop-style histogram. Accepts either hop_hist.csv
 * (workload,config,kind,hops,messages) or mcast_hist.csv
 * (workload,config,n_dsts,messages); the header picks the schema.
 */
export function parseHopInput(text: string): HopInput {
  const label = "hop histogram input";
  const parsed = parseCsv(text, label);
  if (parsed.fields.includes("n_dsts")) {
    requireColumns(parsed, MCAST_COLUMNS, label);
    requireNumeric(parsed.rows, ["n_dsts", "messages"], label);
    return { schema: "by-degree", rows: parsed.rows as unknown as McastRow[] };
  }
  requireColumns(parsed, HOP_COLUMNS, label);
  requireNumeric(parsed.rows, ["hops", "messages"], label);
  return { schema: "by-kind", rows: parsed.rows as unknown as HopRow[] };
}

/** Parse summary.json text and extract the per-config ratio five-number summaries. */
export function parseSummary(text: string): RatioSummary {
  const label = "summary input";
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch (err) {
    throw new SchemaError(`${label}: not valid JSON (${(err as Error).message})`);
  }
  if (typeof doc !== "object" || doc === null || Array.isArray(doc)) {
    throw new SchemaError(`${label}: expected a JSON object`);
  }
  const statsRaw = (doc as Record<string, unknown>)["nop_ratio_stats"];
  if (statsRaw === undefined) {
    throw new SchemaError(`${label}: missing key 'nop_ratio_stats'`);
  }
  if (typeof statsRaw !== "object" || statsRaw === null || Array.isArray(statsRaw)) {
    throw new SchemaError(`${label}: 'nop_ratio_stats' must be an object keyed by config`);
  }
  const stats: Record<string, FiveNumber> = {};
  for (const [config, entry] of Object.entries(statsRaw as Record<string, unknown>)) {
    if (typeof entry !== "object" || entry === null || Array.isArray(entry)) {
      throw new SchemaError(`${label}: nop_ratio_stats['${config}'] must be an object`);
    }
    const box = entry as Record<string, unknown>;
    for (const key of FIVE_KEYS) {
      const v = box[key];
      if (typeof v !== "number" || !Number.isFinite(v)) {
        throw new SchemaError(`${label}: missing key '${key}' in nop_ratio_stats['${config}']`);
      }
    }
    stats[config] = {
      min: box.min as number,
      q1: box.q1 as number,
      median: box.median as number,
      q3: box.q3 as number,
      max: box.max as number,
    };
  }
  if (Object.keys(stats).length === 0) {
    throw new SchemaError(`${label}: 'nop_ratio_stats' has no configs`);
  }
  return { stats };
}
