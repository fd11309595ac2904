/**
 * Minimal self-contained SVG renderer for line/scatter plots with optional
 * log axes, error bands, a legend, and corner annotations. No DOM, no
 * dependencies: figures are plain vector files built from strings.
 */

export interface Series {
  label: string;
  /** [x, y] in data coordinates */
  points: Array<[number, number]>;
  /** optional [x, lo, hi] band (e.g. mean +- stderr) */
  band?: Array<[number, number, number]>;
  /** draw markers instead of a connected line */
  scatter?: boolean;
  /** extra straight line in data coords, e.g. a fitted power law */
  overlayLine?: Array<[number, number]>;
}

export interface PlotOptions {
  title: string;
  xLabel: string;
  yLabel: string;
  logX?: boolean;
  logY?: boolean;
  annotations?: string[];
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const MARGIN = { left: 70, right: 20, top: 40, bottom: 55 };

function esc(text: string): string {
  return text.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

interface Scale {
  toPx(v: number): number;
  ticks(): number[];
}

function makeScale(min: number, max: number, pxMin: number, pxMax: number, log: boolean): Scale {
  if (log) {
    const lo = Math.log10(min);
    const hi = Math.log10(max);
    const span = hi - lo || 1;
    return {
      toPx: (v) => pxMin + ((Math.log10(v) - lo) / span) * (pxMax - pxMin),
      ticks: () => {
        const out: number[] = [];
        for (let d = Math.ceil(lo - 1e-9); d <= Math.floor(hi + 1e-9); d++) out.push(10 ** d);
        if (out.length < 3) {
          out.length = 0;
          for (let d = Math.floor(lo); d <= Math.ceil(hi); d++) {
            for (const m of [1, 2, 5]) {
              const v = m * 10 ** d;
              if (v >= min && v <= max) out.push(v);
            }
          }
        }
        return out;
      },
    };
  }
  const span = max - min || 1;
  return {
    toPx: (v) => pxMin + ((v - min) / span) * (pxMax - pxMin),
    ticks: () => {
      const step = niceStep(span / 5);
      const out: number[] = [];
      for (let v = Math.ceil(min / step) * step; v <= max + 1e-9 * span; v += step) out.push(v);
      return out;
    },
  };
}

function niceStep(raw: number): number {
  const mag = 10 ** Math.floor(Math.log10(raw || 1));
  const norm = raw / mag;
  const nice = norm < 1.5 ? 1 : norm < 3.5 ? 2 : norm < 7.5 ? 5 : 10;
  return nice * mag;
}

function fmtTick(v: number): string {
  if (v === 0) return "0";
  const abs = Math.abs(v);
  if (abs >= 10000 || abs < 0.01) return v.toExponential(0).replace("e+", "e");
  return String(Number(v.toPrecision(4)));
}

export function renderPlot(series: Series[], opts: PlotOptions): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 480;
  const x0 = MARGIN.left;
  const x1 = width - MARGIN.right;
  const y0 = height - MARGIN.bottom;
  const y1 = MARGIN.top;

  const xs: number[] = [];
  const ys: number[] = [];
  for (const s of series) {
    for (const [x, y] of s.points) {
      xs.push(x);
      ys.push(y);
    }
    for (const [x, lo, hi] of s.band ?? []) {
      xs.push(x);
      ys.push(lo, hi);
    }
    for (const [x, y] of s.overlayLine ?? []) {
      xs.push(x);
      ys.push(y);
    }
  }
  const usableX = opts.logX ? xs.filter((v) => v > 0) : xs;
  const usableY = opts.logY ? ys.filter((v) => v > 0) : ys;
  if (usableX.length === 0 || usableY.length === 0) {
    throw new Error("nothing to plot: no finite positive data for the chosen axes");
  }
  const pad = (lo: number, hi: number, log: boolean): [number, number] => {
    if (log) return [lo / 1.3, hi * 1.3];
    const span = hi - lo || Math.abs(hi) || 1;
    return [lo - 0.05 * span, hi + 0.05 * span];
  };
  const [xMin, xMax] = pad(Math.min(...usableX), Math.max(...usableX), !!opts.logX);
  const [yMin, yMax] = pad(Math.min(...usableY), Math.max(...usableY), !!opts.logY);
  const sx = makeScale(xMin, xMax, x0, x1, !!opts.logX);
  const sy = makeScale(yMin, yMax, y0, y1, !!opts.logY);

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  parts.push(`<text x="${width / 2}" y="20" text-anchor="middle" font-size="15">${esc(opts.title)}</text>`);

  for (const tick of sx.ticks()) {
    if (tick < xMin || tick > xMax) continue;
    const px = sx.toPx(tick);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y1}" stroke="#eee"/>`);
    parts.push(`<line x1="${px}" y1="${y0}" x2="${px}" y2="${y0 + 4}" stroke="#333"/>`);
    parts.push(`<text x="${px}" y="${y0 + 18}" text-anchor="middle">${fmtTick(tick)}</text>`);
  }
  for (const tick of sy.ticks()) {
    if (tick < yMin || tick > yMax) continue;
    const py = sy.toPx(tick);
    parts.push(`<line x1="${x0}" y1="${py}" x2="${x1}" y2="${py}" stroke="#eee"/>`);
    parts.push(`<line x1="${x0 - 4}" y1="${py}" x2="${x0}" y2="${py}" stroke="#333"/>`);
    parts.push(`<text x="${x0 - 8}" y="${py + 4}" text-anchor="end">${fmtTick(tick)}</text>`);
  }
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x1}" y2="${y0}" stroke="#333"/>`);
  parts.push(`<line x1="${x0}" y1="${y0}" x2="${x0}" y2="${y1}" stroke="#333"/>`);
  parts.push(`<text x="${(x0 + x1) / 2}" y="${height - 12}" text-anchor="middle">${esc(opts.xLabel)}</text>`);
  parts.push(
    `<text x="16" y="${(y0 + y1) / 2}" text-anchor="middle" ` +
    `transform="rotate(-90 16 ${(y0 + y1) / 2})">${esc(opts.yLabel)}</text>`,
  );

  const inRange = (x: number, y: number) =>
    (!opts.logX || x > 0) && (!opts.logY || y > 0);

  series.forEach((s, i) => {
    const color = PALETTE[i % PALETTE.length];
    if (s.band) {
      const upper = s.band.filter(([x, , hi]) => inRange(x, hi || yMin));
      if (upper.length > 1) {
        const fwd = upper.map(([x, , hi]) => `${sx.toPx(x)},${sy.toPx(opts.logY ? Math.max(hi, yMin) : hi)}`);
        const back = [...upper].reverse().map(([x, lo]) =>
          `${sx.toPx(x)},${sy.toPx(opts.logY ? Math.max(lo, yMin) : lo)}`);
        parts.push(`<polygon points="${fwd.concat(back).join(" ")}" fill="${color}" fill-opacity="0.15"/>`);
      }
    }
    const pts = s.points.filter(([x, y]) => inRange(x, y));
    if (!s.scatter && pts.length > 1) {
      const path = pts.map(([x, y]) => `${sx.toPx(x)},${sy.toPx(y)}`).join(" ");
      parts.push(`<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.8"/>`);
    }
    for (const [x, y] of pts) {
      parts.push(`<circle cx="${sx.toPx(x)}" cy="${sy.toPx(y)}" r="3" fill="${color}"/>`);
    }
    if (s.overlayLine && s.overlayLine.length > 1) {
      const path = s.overlayLine
        .filter(([x, y]) => inRange(x, y))
        .map(([x, y]) => `${sx.toPx(x)},${sy.toPx(y)}`)
        .join(" ");
      parts.push(
        `<polyline points="${path}" fill="none" stroke="${color}" stroke-width="1.2" stroke-dasharray="6 4"/>`,
      );
    }
    const ly = y1 + 16 + 16 * i;
    parts.push(`<line x1="${x1 - 150}" y1="${ly - 4}" x2="${x1 - 126}" y2="${ly - 4}" stroke="${color}" stroke-width="2"/>`);
    parts.push(`<text x="${x1 - 120}" y="${ly}">${esc(s.label)}</text>`);
  });

  (opts.annotations ?? []).forEach((note, i) => {
    parts.push(`<text x="${x0 + 10}" y="${y1 + 16 + 16 * i}" fill="#444">${esc(note)}</text>`);
  });

  parts.push("</svg>");
  return parts.join("\n");
}
