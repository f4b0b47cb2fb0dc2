// Display-only scaling: map a numeric series onto an SVG polyline path.

export function sparklinePath(
  values: number[],
  width: number,
  height: number,
  pad = 2,
): string {
  if (values.length === 0) {
    return "";
  }
  const lo = Math.min(...values);
  const hi = Math.max(...values);
  const span = hi - lo || 1;
  const innerW = width - 2 * pad;
  const innerH = height - 2 * pad;
  const step = values.length > 1 ? innerW / (values.length - 1) : 0;
  return values
    .map((v, i) => {
      const x = pad + i * step;
      const y = pad + innerH * (1 - (v - lo) / span);
      return `${i === 0 ? "M" : "L"}${x.toFixed(1)},${y.toFixed(1)}`;
    })
    .join(" ");
}

// Project particle EPA triples onto two chosen axes for the debug scatter.
export function scatterPoints(
  particles: number[][],
  weights: number[],
  xAxis: number,
  yAxis: number,
  width: number,
  height: number,
  range = 4.3,
): { x: number; y: number; r: number }[] {
  const maxW = Math.max(...weights, 1e-12);
  return particles.map((p, i) => ({
    x: ((p[xAxis] + range) / (2 * range)) * width,
    y: (1 - (p[yAxis] + range) / (2 * range)) * height,
    r: 1 + 2 * (weights[i] / maxW),
  }));
}
