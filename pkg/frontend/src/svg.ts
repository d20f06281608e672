// Minimal deterministic SVG emission. Every figure is assembled from these
// helpers so that identical inputs always serialize to the identical string.

export type Attrs = Record<string, string | number | undefined>;

/** Escape a string for use in SVG text nodes and attribute values. */
export function escapeXml(value: string): string {
  return value
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Format a geometry coordinate: fixed precision so output is stable. */
export function px(value: number): string {
  const rounded = value.toFixed(2);
  return rounded === "-0.00" ? "0.00" : rounded;
}

function renderAttrs(attrs: Attrs): string {
  const parts: string[] = [];
  for (const [key, value] of Object.entries(attrs)) {
    if (value === undefined) continue;
    const text = typeof value === "number" ? px(value) : escapeXml(value);
    parts.push(` ${key}="${text}"`);
  }
  return parts.join("");
}

/** Emit one element; children are pre-rendered markup strings. */
export function el(name: string, attrs: Attrs, ...children: string[]): string {
  const body = children.join("");
  if (body === "") return `<${name}${renderAttrs(attrs)}/>`;
  return `<${name}${renderAttrs(attrs)}>${body}</${name}>`;
}

/** Emit a text element with escaped content. */
export function textEl(content: string, attrs: Attrs): string {
  return el("text", attrs, escapeXml(content));
}

/** Emit a <title> child (hover annotation carrying exact values). */
export function titleEl(content: string): string {
  return el("title", {}, escapeXml(content));
}

export const FONT_STACK = "Helvetica, Arial, sans-serif";

/** Wrap figure body in a complete standalone SVG document. */
export function svgDocument(width: number, height: number, body: string): string {
  const attrs: Attrs = {
    xmlns: "http://www.w3.org/2000/svg",
    width,
    height,
    viewBox: `0 0 ${px(width)} ${px(height)}`,
    "font-family": FONT_STACK,
  };
  const background = el("rect", { x: 0, y: 0, width, height, fill: "#ffffff" });
  return `${el("svg", attrs, background + body)}\n`;
}

/** Horizontal tick label row under an axis. */
export function axisLine(x1: number, y1: number, x2: number, y2: number, stroke = "#333333"): string {
  return el("line", { x1, y1, x2, y2, stroke, "stroke-width": 1 });
}

export interface LegendEntry {
  label: string;
  color: string;
}

/** Simple swatch legend, one entry per line, anchored at (x, y). */
export function legend(x: number, y: number, entries: LegendEntry[]): string {
  const rowH = 16;
  const parts = entries.map((entry, i) => {
    const rowY = y + i * rowH;
    const swatch = el("rect", {
      x,
      y: rowY,
      width: 11,
      height: 11,
      fill: entry.color,
      stroke: "#333333",
      "stroke-width": 0.5,
    });
    const label = textEl(entry.label, {
      x: x + 16,
      y: rowY + 9.5,
      "font-size": 11,
      fill: "#333333",
    });
    return swatch + label;
  });
  return el("g", { class: "legend" }, ...parts);
}

/** Linear interpolation between two hex colors like "#rrggbb". */
export function mixHex(from: string, to: string, t: number): string {
  const clamp = Math.min(1, Math.max(0, t));
  const parse = (hex: string) => [1, 3, 5].map((i) => parseInt(hex.slice(i, i + 2), 16));
  const [fr, fg, fb] = parse(from);
  const [tr, tg, tb] = parse(to);
  const mix = (a: number, b: number) => Math.round(a + (b - a) * clamp);
  const part = (v: number) => v.toString(16).padStart(2, "0");
  return `#${part(mix(fr, tr))}${part(mix(fg, tg))}${part(mix(fb, tb))}`;
}
