/** Ordinary least squares in log-log space, mirroring the harness fit. */

export interface PowerLawFit {
  exponent: number;
  intercept: number;
  r2: number;
  pointsUsed: number;
}

export function fitPowerLaw(points: Array<[number, number]>): PowerLawFit {
  if (points.length < 2) {
    throw new Error(`need at least 2 points to fit a power law, got ${points.length}`);
  }
  if (points.some(([x, y]) => x <= 0 || y <= 0)) {
    throw new Error("power-law fit needs strictly positive coordinates");
  }
  const lx = points.map(([x]) => Math.log(x));
  const ly = points.map(([, y]) => Math.log(y));
  const n = points.length;
  const mx = lx.reduce((a, b) => a + b, 0) / n;
  const my = ly.reduce((a, b) => a + b, 0) / n;
  let sxx = 0;
  let sxy = 0;
  for (let i = 0; i < n; i++) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (sxx === 0) throw new Error("power-law fit needs at least two distinct x values");
  const exponent = sxy / sxx;
  const intercept = my - exponent * mx;
  let ssRes = 0;
  let ssTot = 0;
  for (let i = 0; i < n; i++) {
    const resid = ly[i] - (exponent * lx[i] + intercept);
    ssRes += resid * resid;
    ssTot += (ly[i] - my) * (ly[i] - my);
  }
  const r2 = ssTot === 0 ? (ssRes < 1e-24 ? 1 : 0) : Math.max(0, Math.min(1, 1 - ssRes / ssTot));
  return { exponent, intercept, r2, pointsUsed: n };
}
