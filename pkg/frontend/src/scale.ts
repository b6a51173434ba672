/**
 * Axis arithmetic: value-to-pixel mapping plus tick placement.  Everything is
 * plain floating-point math on explicit inputs, so the same data always puts
 * the same ink in the same place.
 */

/** Round away accumulated float noise (0.30000000000000004 -> 0.3). */
export function clean(v: number): number {
  return v === 0 ? 0 : Number(v.toPrecision(12));
}

/** Evenly spaced round-number ticks covering [min, max] (d3-style 1/2/5). */
export function niceTicks(min: number, max: number, count = 5): number[] {
  if (!Number.isFinite(min) || !Number.isFinite(max)) {
    throw new Error(`cannot place ticks on [${min}, ${max}]`);
  }
  if (min > max) [min, max] = [max, min];
  if (min === max) return [clean(min)];
  const step0 = (max - min) / Math.max(1, count);
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  const norm = step0 / mag;
  const step = mag * (norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10);
  const ticks: number[] = [];
  for (let v = Math.ceil(min / step) * step; v <= max + step * 1e-9; v += step) {
    ticks.push(clean(v));
  }
  return ticks;
}

/** Powers of ten spanning [min, max]; min must be positive. */
export function logTicks(min: number, max: number): number[] {
  if (!(min > 0) || !(max >= min)) {
    throw new Error(`log ticks need 0 < min <= max, got [${min}, ${max}]`);
  }
  const lo = Math.floor(Math.log10(min));
  const hi = Math.ceil(Math.log10(max));
  const ticks: number[] = [];
  for (let e = lo; e <= hi; e += 1) ticks.push(clean(Math.pow(10, e)));
  return ticks;
}

export interface Scale {
  map(v: number): number;
  ticks: number[];
  domain: [number, number];
}

/** Linear map from a (tick-expanded) domain onto pixel range. */
export function linearScale(
  dataMin: number,
  dataMax: number,
  rangeMin: number,
  rangeMax: number,
  tickCount = 5,
): Scale {
  let ticks = niceTicks(dataMin, dataMax, tickCount);
  if (ticks.length === 1) {
    const v = ticks[0]!;
    const pad = v === 0 ? 1 : Math.abs(v) * 0.5;
    ticks = niceTicks(v - pad, v + pad, tickCount);
  }
  const lo = Math.min(dataMin, ticks[0]!);
  const hi = Math.max(dataMax, ticks[ticks.length - 1]!);
  const span = hi - lo || 1;
  return {
    map: (v) => rangeMin + ((v - lo) / span) * (rangeMax - rangeMin),
    ticks,
    domain: [lo, hi],
  };
}

/** Log10 map; domain expanded to whole decades. */
export function logScale(
  dataMin: number,
  dataMax: number,
  rangeMin: number,
  rangeMax: number,
): Scale {
  const ticks = logTicks(dataMin, dataMax);
  const lo = Math.log10(ticks[0]!);
  const hi = Math.log10(ticks[ticks.length - 1]!);
  const span = hi - lo || 1;
  return {
    map: (v) => rangeMin + ((Math.log10(v) - lo) / span) * (rangeMax - rangeMin),
    ticks,
    domain: [ticks[0]!, ticks[ticks.length - 1]!],
  };
}

/** Tick label: plain decimal in a comfortable range, exponent outside it. */
export function fmtNum(v: number): string {
  if (v === 0) return "0";
  const a = Math.abs(v);
  if (a >= 1e5 || a < 1e-3) {
    const [mantissa, exp] = v.toExponential(2).split("e") as [string, string];
    const m = mantissa.replace(/\.?0+$/, "");
    return `${m}e${exp}`;
  }
  return String(clean(Number(v.toPrecision(6))));
}
