/**
 * The seven benchmark figures, each a pure function from CSV text to an SVG
 * string.  Aggregation is fixed (mean over seeds, labels sorted, values
 * ascending) and rendering uses fixed-precision coordinates, so re-rendering
 * the same CSV yields byte-identical output.
 */
import {
  EnergyTable,
  LearningRow,
  TimingTable,
  parseEnergyCsv,
  parseLearningCsv,
  parseTimingCsv,
} from "./csv.js";
import { Scale, fmtNum, linearScale, logScale } from "./scale.js";
import { el, fmtCoord, svgDoc, text } from "./svg.js";

export const PALETTE = [
  "#1f77b4",
  "#ff7f0e",
  "#2ca02c",
  "#d62728",
  "#9467bd",
  "#8c564b",
  "#e377c2",
  "#7f7f7f",
  "#bcbd22",
  "#17becf",
] as const;

const W = 640;
const H = 400;
const PLOT = { x0: 66, x1: W - 180, y0: 46, y1: H - 54 };

export interface Pt {
  x: number;
  y: number;
  solid: boolean;
}

export interface Series {
  label: string;
  points: Pt[];
}

function mean(vals: number[]): number {
  return vals.reduce((a, b) => a + b, 0) / vals.length;
}

function sortedUnique(vals: number[]): number[] {
  return [...new Set(vals)].sort((a, b) => a - b);
}

// ---------------------------------------------------------------------------
// Chart scaffolding

function frame(title: string, xLabel: string, yLabel: string, xs: Scale, ys: Scale): string[] {
  const parts: string[] = [];
  parts.push(el("rect", { x: 0, y: 0, width: W, height: H, fill: "#ffffff" }));
  for (const t of ys.ticks) {
    const y = ys.map(t);
    parts.push(
      el("line", { x1: PLOT.x0, y1: y, x2: PLOT.x1, y2: y, stroke: "#dddddd" }),
      text(PLOT.x0 - 8, y + 4, fmtNum(t), { "text-anchor": "end", "font-size": "11" }),
    );
  }
  for (const t of xs.ticks) {
    const x = xs.map(t);
    parts.push(
      el("line", { x1: x, y1: PLOT.y1, x2: x, y2: PLOT.y1 + 5, stroke: "#333333" }),
      text(x, PLOT.y1 + 19, fmtNum(t), { "text-anchor": "middle", "font-size": "11" }),
    );
  }
  parts.push(
    el("rect", {
      x: PLOT.x0,
      y: PLOT.y0,
      width: PLOT.x1 - PLOT.x0,
      height: PLOT.y1 - PLOT.y0,
      fill: "none",
      stroke: "#333333",
    }),
    text((PLOT.x0 + PLOT.x1) / 2, 26, title, {
      "text-anchor": "middle",
      "font-size": "14",
      "font-weight": "bold",
    }),
    text((PLOT.x0 + PLOT.x1) / 2, H - 14, xLabel, { "text-anchor": "middle", "font-size": "12" }),
    el(
      "g",
      { transform: `translate(16 ${fmtCoord((PLOT.y0 + PLOT.y1) / 2)}) rotate(-90)` },
      text(0, 0, yLabel, { "text-anchor": "middle", "font-size": "12" }),
    ),
  );
  return parts;
}

function legend(labels: string[], swatch: (i: number) => string): string[] {
  const parts: string[] = [];
  labels.forEach((label, i) => {
    const y = PLOT.y0 + 10 + i * 20;
    const x = PLOT.x1 + 14;
    parts.push(
      el("line", { x1: x, y1: y, x2: x + 22, y2: y, stroke: swatch(i), "stroke-width": 2 }),
      text(x + 28, y + 4, label, { "font-size": "12" }),
    );
  });
  return parts;
}

interface LineChartOpts {
  title: string;
  xLabel: string;
  yLabel: string;
  series: Series[];
  logY?: boolean;
  includeZeroY?: boolean;
  note?: string;
}

function lineChart(opts: LineChartOpts): string {
  const series = [...opts.series].sort((a, b) => (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
  const pts = series.flatMap((s) => s.points);
  if (pts.length === 0) throw new Error(`nothing to plot for "${opts.title}"`);
  const xVals = pts.map((p) => p.x);
  const yVals = pts.map((p) => p.y);
  const xs = linearScale(Math.min(...xVals), Math.max(...xVals), PLOT.x0, PLOT.x1);
  const yMin = Math.min(...yVals);
  const yMax = Math.max(...yVals);
  const ys = opts.logY
    ? logScale(yMin, yMax, PLOT.y1, PLOT.y0)
    : linearScale(opts.includeZeroY ? Math.min(0, yMin) : yMin, yMax, PLOT.y1, PLOT.y0);

  const parts = frame(opts.title, opts.xLabel, opts.yLabel, xs, ys);
  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length]!;
    const coords = s.points.map((p) => `${fmtCoord(xs.map(p.x))},${fmtCoord(ys.map(p.y))}`);
    if (coords.length > 1) {
      parts.push(
        el("polyline", {
          points: coords.join(" "),
          fill: "none",
          stroke: color,
          "stroke-width": 2,
        }),
      );
    }
    for (const p of s.points) {
      parts.push(
        el("circle", {
          cx: xs.map(p.x),
          cy: ys.map(p.y),
          r: 3,
          fill: p.solid ? color : "#ffffff",
          stroke: color,
          "stroke-width": 1.5,
        }),
      );
    }
  });
  parts.push(...legend(series.map((s) => s.label), (i) => PALETTE[i % PALETTE.length]!));
  if (opts.note) {
    parts.push(text(PLOT.x1, H - 14, opts.note, { "text-anchor": "end", "font-size": "10", fill: "#555555" }));
  }
  return svgDoc(W, H, parts);
}

interface BarChartOpts {
  title: string;
  yLabel: string;
  bars: { label: string; parts: number[] }[]; // stack segments bottom-up
  stacks: string[]; // segment names, aligned with parts
}

function stackedBarChart(opts: BarChartOpts): string {
  const bars = [...opts.bars].sort((a, b) => (a.label < b.label ? -1 : a.label > b.label ? 1 : 0));
  if (bars.length === 0) throw new Error(`nothing to plot for "${opts.title}"`);
  const totals = bars.map((b) => b.parts.reduce((x, y) => x + y, 0));
  const ys = linearScale(0, Math.max(...totals), PLOT.y1, PLOT.y0);
  const xs: Scale = {
    map: (v) => PLOT.x0 + ((PLOT.x1 - PLOT.x0) * (v + 0.5)) / bars.length,
    ticks: [],
    domain: [0, bars.length],
  };
  const parts = frame(opts.title, "", opts.yLabel, xs, ys);
  const band = (PLOT.x1 - PLOT.x0) / bars.length;
  const width = band * 0.55;
  bars.forEach((bar, i) => {
    const xc = xs.map(i);
    let base = 0;
    bar.parts.forEach((v, j) => {
      const yTop = ys.map(base + v);
      const yBot = ys.map(base);
      parts.push(
        el("rect", {
          x: xc - width / 2,
          y: yTop,
          width,
          height: yBot - yTop,
          fill: PALETTE[j % PALETTE.length]!,
          stroke: "#333333",
          "stroke-width": 0.5,
        }),
      );
      base += v;
    });
    parts.push(text(xc, PLOT.y1 + 19, bar.label, { "text-anchor": "middle", "font-size": "11" }));
  });
  parts.push(...legend(opts.stacks, (i) => PALETTE[i % PALETTE.length]!));
  return svgDoc(W, H, parts);
}

// ---------------------------------------------------------------------------
// Aggregation

const OK_STATUSES = new Set(["ok", "optimal"]);

export function energySeries(table: EnergyTable): { series: Series[]; anyOpen: boolean } {
  const solvers = [...new Set(table.rows.map((r) => r.solver))].sort();
  let anyOpen = false;
  const series = solvers.map((solver) => {
    const mine = table.rows.filter((r) => r.solver === solver);
    const points: Pt[] = [];
    for (const v of sortedUnique(mine.map((r) => r.axisValue))) {
      const cell = mine.filter((r) => r.axisValue === v);
      const finite = cell.filter((r) => Number.isFinite(r.totalJ));
      if (finite.length === 0) continue; // every seed declined the instance
      const solid = cell.every((r) => OK_STATUSES.has(r.status) && Number.isFinite(r.totalJ));
      if (!solid) anyOpen = true;
      points.push({ x: v, y: mean(finite.map((r) => r.totalJ)), solid });
    }
    return { label: solver, points };
  });
  return { series, anyOpen };
}

function axisTitle(axis: string): string {
  if (axis === "K") return "users per cluster K";
  if (axis === "T_max") return "mission horizon T_max (frames)";
  return axis;
}

function requireAxis(actual: string, expected: string, figure: string): void {
  if (actual !== expected) {
    throw new Error(`${figure} needs a ${expected} sweep, got axis ${actual}`);
  }
}

function energyVsAxisFigure(table: EnergyTable, expected: string): string {
  requireAxis(table.axis, expected, "this figure");
  const { series, anyOpen } = energySeries(table);
  return lineChart({
    title: `mission energy vs ${axisTitle(expected)}`,
    xLabel: axisTitle(expected),
    yLabel: "energy (J)",
    series,
    includeZeroY: true,
    note: anyOpen ? "open markers: at least one seed infeasible or declined" : undefined,
  });
}

export function learningSeries(
  rows: LearningRow[],
  metric: (r: LearningRow) => number,
  window: number,
): Series[] {
  const labels = [...new Set(rows.map((r) => r.solver))].sort();
  return labels.map((label) => {
    const mine = rows.filter((r) => r.solver === label);
    const episodes = sortedUnique(mine.map((r) => r.episode));
    const raw = episodes.map((ep) => mean(mine.filter((r) => r.episode === ep).map(metric)));
    const points: Pt[] = episodes.map((ep, i) => {
      const from = Math.max(0, i - window + 1);
      return { x: ep, y: mean(raw.slice(from, i + 1)), solid: true };
    });
    return { label, points };
  });
}

export interface RenderOptions {
  /** Trailing moving-average window for the per-episode figures. */
  window?: number;
}

// ---------------------------------------------------------------------------
// The seven figure kinds

export function energyVsK(csvText: string): string {
  return energyVsAxisFigure(parseEnergyCsv(csvText), "K");
}

export function energyVsTmax(csvText: string): string {
  return energyVsAxisFigure(parseEnergyCsv(csvText), "T_max");
}

export function timeVsK(csvText: string): string {
  const table: TimingTable = parseTimingCsv(csvText);
  requireAxis(table.axis, "K", "the timing figure");
  const solvers = [...new Set(table.rows.map((r) => r.solver))].sort();
  const series: Series[] = solvers.map((solver) => {
    const mine = table.rows.filter((r) => r.solver === solver);
    const points = sortedUnique(mine.map((r) => r.axisValue)).map((v) => ({
      x: v,
      y: mean(mine.filter((r) => r.axisValue === v).map((r) => r.wallMs)),
      solid: true,
    }));
    return { label: solver, points };
  });
  return lineChart({
    title: "solve time vs users per cluster K",
    xLabel: axisTitle("K"),
    yLabel: "wall time (ms, log scale)",
    series,
    logY: true,
  });
}

export function commHoverSplit(csvText: string): string {
  const table = parseEnergyCsv(csvText);
  const solvers = [...new Set(table.rows.map((r) => r.solver))].sort();
  const bars = solvers
    .map((solver) => {
      const mine = table.rows.filter(
        (r) => r.solver === solver && Number.isFinite(r.commJ) && Number.isFinite(r.hoverJ),
      );
      if (mine.length === 0) return null;
      return {
        label: solver,
        parts: [mean(mine.map((r) => r.commJ)), mean(mine.map((r) => r.hoverJ))],
      };
    })
    .filter((b): b is { label: string; parts: number[] } => b !== null);
  return stackedBarChart({
    title: "mean energy split by solver",
    yLabel: "energy (J)",
    bars,
    stacks: ["transmit", "hover"],
  });
}

export function feasibilityVsEpisode(csvText: string, opts: RenderOptions = {}): string {
  const series = learningSeries(parseLearningCsv(csvText), (r) => r.deliveredRatio, opts.window ?? 1);
  return lineChart({
    title: "delivered fraction vs training episode",
    xLabel: "episode",
    yLabel: "delivered fraction",
    series,
    includeZeroY: true,
  });
}

export function energyVsEpisode(csvText: string, opts: RenderOptions = {}): string {
  const series = learningSeries(parseLearningCsv(csvText), (r) => r.energyJ, opts.window ?? 1);
  return lineChart({
    title: "episode energy vs training episode",
    xLabel: "episode",
    yLabel: "energy (J)",
    series,
    includeZeroY: true,
  });
}

export function rewardVsEpisode(csvText: string, opts: RenderOptions = {}): string {
  const series = learningSeries(parseLearningCsv(csvText), (r) => r.reward, opts.window ?? 1);
  return lineChart({
    title: "episode reward vs training episode",
    xLabel: "episode",
    yLabel: "summed per-frame reward",
    series,
    includeZeroY: true,
  });
}

// ---------------------------------------------------------------------------
// Registry used by the command line

export type FigureKind =
  | "energy-vs-k"
  | "time-vs-k"
  | "energy-vs-tmax"
  | "comm-hover-split"
  | "feasibility-vs-episode"
  | "energy-vs-episode"
  | "reward-vs-episode";

export interface FigureSpec {
  /** Default CSV artifact this figure consumes (file name inside a sweep directory). */
  input: string;
  render(csvText: string, opts?: RenderOptions): string;
}

export const FIGURES: Record<FigureKind, FigureSpec> = {
  "energy-vs-k": { input: "energy_vs_K.csv", render: energyVsK },
  "time-vs-k": { input: "timing_vs_K.csv", render: timeVsK },
  "energy-vs-tmax": { input: "energy_vs_T_max.csv", render: energyVsTmax },
  "comm-hover-split": { input: "energy_vs_K.csv", render: commHoverSplit },
  "feasibility-vs-episode": { input: "learning_curve.csv", render: feasibilityVsEpisode },
  "energy-vs-episode": { input: "learning_curve.csv", render: energyVsEpisode },
  "reward-vs-episode": { input: "learning_curve.csv", render: rewardVsEpisode },
};

export const FIGURE_KINDS = Object.keys(FIGURES) as FigureKind[];
