export {
  SchemaError,
  parseBreakdown,
  parseHopInput,
  parseSummary,
  type BreakdownRow,
  type HopRow,
  type McastRow,
  type HopInput,
  type FiveNumber,
  type RatioSummary,
} from "./schema.js";
export {
  DEFAULT_PALETTE,
  FIGURE_KINDS,
  renderBoxPlot,
  renderFromText,
  renderHeatmap,
  renderHopPlot,
  renderStackedBars,
  type FigureKind,
  type FigureOptions,
  type Palette,
} from "./figures.js";
export { runCli, USAGE, type CliIo } from "./cli.js";
