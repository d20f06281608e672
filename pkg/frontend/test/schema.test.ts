import { describe, expect, it } from "vitest";
import { parseBreakdown, parseHopInput, parseSummary, SchemaError } from "../src/schema.js";
import { fixture } from "./helpers.js";

describe("parseBreakdown", () => {
  it("reads the aggregate breakdown with values kept verbatim", () => {
    const rows = parseBreakdown(fixture("full", "breakdown.csv"));
    expect(rows).toHaveLength(36);
    const first = rows[0];
    expect(first.workload).toBe("darknet19");
    expect(first.config).toBe("1x2");
    // Raw strings, not parsed numbers: exact echo is the contract.
    expect(typeof first.total_comm_cycles).toBe("string");
    expect(first.total_comm_cycles).toMatch(/^\d+$/);
    expect(first.frac_nop).toMatch(/^0\.\d+$/);
  });

  it("names the missing column on a header mismatch", () => {
    const text = fixture("full", "breakdown.csv")
      .split("\n")
      .map((line) => line.split(",").filter((_, i) => i !== 8).join(","))
      .join("\n");
    expect(() => parseBreakdown(text)).toThrowError(SchemaError);
    expect(() => parseBreakdown(text)).toThrowError(/missing column 'frac_nop'/);
  });

  it("rejects non-numeric cells naming row and column", () => {
    const lines = fixture("tiny", "breakdown9.csv").split("\n");
    lines[2] = lines[2].replace(/^(\w+,\w+,)\d+/, "$1oops");
    expect(() => parseBreakdown(lines.join("\n"))).toThrowError(/row 2 .* column 'noc_cycles'/);
  });

  it("rejects empty input and header-only input", () => {
    expect(() => parseBreakdown("")).toThrowError(SchemaError);
    expect(() => parseBreakdown(fixture("full", "breakdown.csv").split("\n")[0] + "\n")).toThrowError(
      /no data rows/,
    );
  });
});

describe("parseHopInput", () => {
  it("detects the kind/hops schema", () => {
    const parsed = parseHopInput(fixture("full", "hop_hist.csv"));
    expect(parsed.schema).toBe("by-kind");
    if (parsed.schema !== "by-kind") return;
    expect(parsed.rows.length).toBeGreaterThan(100);
    expect(new Set(parsed.rows.map((r) => r.kind))).toEqual(new Set(["unicast", "multicast"]));
  });

  it("detects the destination-degree schema", () => {
    const parsed = parseHopInput(fixture("tiny", "mcast_single.csv"));
    expect(parsed.schema).toBe("by-degree");
    if (parsed.schema !== "by-degree") return;
    expect(parsed.rows).toHaveLength(1);
    expect(parsed.rows[0].n_dsts).toBe("2");
    expect(parsed.rows[0].messages).toBe("4");
  });

  it("names the missing column when neither schema matches", () => {
    const text = "workload,config,messages\na,1x2,3\n";
    expect(() => parseHopInput(text)).toThrowError(/missing column 'kind'/);
  });
});

describe("parseSummary", () => {
  it("extracts per-config five-number summaries", () => {
    const summary = parseSummary(fixture("full", "summary.json"));
    expect(Object.keys(summary.stats).sort()).toEqual(["1x2", "3x3", "6x3"]);
    const box = summary.stats["3x3"];
    expect(box.min).toBeLessThanOrEqual(box.q1);
    expect(box.q1).toBeLessThanOrEqual(box.median);
    expect(box.median).toBeLessThanOrEqual(box.q3);
    expect(box.q3).toBeLessThanOrEqual(box.max);
  });

  it("accepts a degenerate flat summary", () => {
    const summary = parseSummary(fixture("tiny", "summary_flat.json"));
    const box = summary.stats["3x3"];
    expect(box).toEqual({ min: 0.5, q1: 0.5, median: 0.5, q3: 0.5, max: 0.5 });
  });

  it("names the missing key inside a config entry", () => {
    const doc = JSON.parse(fixture("tiny", "summary_flat.json"));
    delete doc.nop_ratio_stats["3x3"].median;
    expect(() => parseSummary(JSON.stringify(doc))).toThrowError(
      /missing key 'median' in nop_ratio_stats\['3x3'\]/,
    );
  });

  it("requires the stats table itself", () => {
    expect(() => parseSummary("{}")).toThrowError(/missing key 'nop_ratio_stats'/);
    expect(() => parseSummary("[1,2]")).toThrowError(SchemaError);
    expect(() => parseSummary("not json")).toThrowError(/not valid JSON/);
  });
});
