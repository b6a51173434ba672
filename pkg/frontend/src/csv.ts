/**
 * Typed readers for the three benchmark CSV shapes produced by the scheduling
 * laboratory: per-cell energy tables, per-cell timing tables, and per-episode
 * learning curves.  The second column of the energy/timing tables is named
 * after the swept axis (e.g. `K` or `T_max`), so the parsers report that name
 * alongside the rows.
 *
 * Parsing is strict: unknown headers, short rows, or non-numeric cells raise
 * with the 1-based line number.  The only tolerated non-number is the literal
 * `nan` the tables use for solvers that declined an instance.
 */
import Papa from "papaparse";

export interface EnergyRow {
  solver: string;
  axisValue: number;
  seed: number;
  totalJ: number;
  commJ: number;
  hoverJ: number;
  deliveredRatio: number;
  status: string;
}

export interface TimingRow {
  solver: string;
  axisValue: number;
  seed: number;
  wallMs: number;
}

export interface LearningRow {
  solver: string;
  seed: number;
  episode: number;
  reward: number;
  energyJ: number;
  deliveredRatio: number;
}

export interface EnergyTable {
  axis: string;
  rows: EnergyRow[];
}

export interface TimingTable {
  axis: string;
  rows: TimingRow[];
}

function grid(text: string): string[][] {
  const parsed = Papa.parse<string[]>(text.trim(), { skipEmptyLines: true });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0]!;
    throw new Error(`CSV parse error on line ${(first.row ?? 0) + 1}: ${first.message}`);
  }
  if (parsed.data.length < 2) {
    throw new Error("CSV has no data rows");
  }
  return parsed.data;
}

function num(tok: string | undefined, line: number, column: string): number {
  if (tok === "nan") return Number.NaN; // a solver that declined the instance
  const v = Number(tok);
  if (tok === undefined || tok.trim() === "" || Number.isNaN(v)) {
    throw new Error(`line ${line}: column ${column} is not a number: ${JSON.stringify(tok)}`);
  }
  return v;
}

function expectHeader(actual: string[], expected: (string | null)[], what: string): void {
  const ok =
    actual.length === expected.length &&
    expected.every((name, i) => name === null || actual[i] === name);
  if (!ok) {
    const shape = expected.map((name) => name ?? "<axis>").join(",");
    throw new Error(`not a ${what} table: header ${actual.join(",")} (expected ${shape})`);
  }
}

export function parseEnergyCsv(text: string): EnergyTable {
  const data = grid(text);
  const header = data[0]!;
  expectHeader(
    header,
    ["solver", null, "seed", "total_J", "comm_J", "hover_J", "delivered_ratio", "status"],
    "sweep energy",
  );
  const axis = header[1]!;
  const rows = data.slice(1).map((cells, i) => {
    const line = i + 2;
    if (cells.length !== 8) throw new Error(`line ${line}: expected 8 columns, got ${cells.length}`);
    return {
      solver: cells[0]!,
      axisValue: num(cells[1], line, axis),
      seed: num(cells[2], line, "seed"),
      totalJ: num(cells[3], line, "total_J"),
      commJ: num(cells[4], line, "comm_J"),
      hoverJ: num(cells[5], line, "hover_J"),
      deliveredRatio: num(cells[6], line, "delivered_ratio"),
      status: cells[7]!,
    };
  });
  return { axis, rows };
}

export function parseTimingCsv(text: string): TimingTable {
  const data = grid(text);
  const header = data[0]!;
  expectHeader(header, ["solver", null, "seed", "wall_ms"], "sweep timing");
  const axis = header[1]!;
  const rows = data.slice(1).map((cells, i) => {
    const line = i + 2;
    if (cells.length !== 4) throw new Error(`line ${line}: expected 4 columns, got ${cells.length}`);
    return {
      solver: cells[0]!,
      axisValue: num(cells[1], line, axis),
      seed: num(cells[2], line, "seed"),
      wallMs: num(cells[3], line, "wall_ms"),
    };
  });
  return { axis, rows };
}

export function parseLearningCsv(text: string): LearningRow[] {
  const data = grid(text);
  expectHeader(
    data[0]!,
    ["solver", "seed", "episode", "reward", "energy_J", "delivered_ratio"],
    "learning curve",
  );
  return data.slice(1).map((cells, i) => {
    const line = i + 2;
    if (cells.length !== 6) throw new Error(`line ${line}: expected 6 columns, got ${cells.length}`);
    return {
      solver: cells[0]!,
      seed: num(cells[1], line, "seed"),
      episode: num(cells[2], line, "episode"),
      reward: num(cells[3], line, "reward"),
      energyJ: num(cells[4], line, "energy_J"),
      deliveredRatio: num(cells[5], line, "delivered_ratio"),
    };
  });
}
