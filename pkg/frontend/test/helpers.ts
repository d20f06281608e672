import fs from "node:fs";
import path from "node:path";
import { fileURLToPath } from "node:url";

export const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures");

export function fixture(...parts: string[]): string {
  return fs.readFileSync(path.join(FIXTURES, ...parts), "utf8");
}

export function fixturePath(...parts: string[]): string {
  return path.join(FIXTURES, ...parts);
}

/** Pull every total annotation out of a stacked-bars SVG as workload/config -> text. */
export function extractTotals(svg: string): Map<string, string> {
  const totals = new Map<string, string>();
  const re = /<text class="bar-total" data-workload="([^"]+)" data-config="([^"]+)"[^>]*>([^<]*)<\/text>/g;
  for (const match of svg.matchAll(re)) {
    totals.set(`${match[1]}/${match[2]}`, match[3]);
  }
  return totals;
}
