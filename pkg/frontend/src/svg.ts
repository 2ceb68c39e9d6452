/**
 * Deterministic SVG line charts with error bars. No DOM, no dates, no
 * randomness: identical input produces identical bytes.
 */

export interface ChartSeries {
  label: string;
  points: { x: number; y: number; err: number }[];
}

export interface ChartSpec {
  title: string;
  xLabel: string;
  yLabel: string;
  series: ChartSeries[];
  /** Tick label per x position; when set, x values are category indices. */
  xCategories?: string[];
  note?: string;
}

const WIDTH = 640;
const HEIGHT = 420;
const MARGIN = { top: 42, right: 24, bottom: 64, left: 64 };
const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];
const DASHES = ["", "6,3", "2,2", "8,3,2,3", "4,4", "1,3"];

const fmt = (v: number): string => {
  const s = v.toFixed(6);
  return s.replace(/\.?0+$/, "").replace(/^-0$/, "0");
};

function niceTicks(lo: number, hi: number, n = 5): number[] {
  if (!(hi > lo)) {
    hi = lo + 1;
  }
  const span = hi - lo;
  const step0 = span / n;
  const mag = Math.pow(10, Math.floor(Math.log10(step0)));
  let step = mag;
  for (const m of [1, 2, 2.5, 5, 10]) {
    if (m * mag >= step0) {
      step = m * mag;
      break;
    }
  }
  const start = Math.ceil(lo / step) * step;
  const ticks: number[] = [];
  for (let t = start; t <= hi + 1e-9; t += step) {
    ticks.push(Number(t.toPrecision(12)));
  }
  return ticks;
}

const esc = (s: string): string =>
  s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;").replace(/"/g, "&quot;");

export function renderChart(spec: ChartSpec): string {
  const plotW = WIDTH - MARGIN.left - MARGIN.right;
  const plotH = HEIGHT - MARGIN.top - MARGIN.bottom;

  const xs = spec.series.flatMap((s) => s.points.map((p) => p.x));
  const yLo = Math.min(0, ...spec.series.flatMap((s) => s.points.map((p) => p.y - p.err)));
  const yHi = Math.max(...spec.series.flatMap((s) => s.points.map((p) => p.y + p.err)));
  const xLo = Math.min(...xs);
  const xHi = Math.max(...xs);
  const yTicks = niceTicks(yLo, yHi * 1.05);
  const yMax = Math.max(yTicks[yTicks.length - 1], yHi);
  const xPad = spec.xCategories ? 0.5 : (xHi - xLo || 1) * 0.05;

  const sx = (x: number) =>
    MARGIN.left + ((x - xLo + xPad) / (xHi - xLo + 2 * xPad || 1)) * plotW;
  const sy = (y: number) => MARGIN.top + plotH - ((y - yLo) / (yMax - yLo || 1)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${WIDTH}" height="${HEIGHT}" ` +
      `viewBox="0 0 ${WIDTH} ${HEIGHT}" font-family="DejaVu Sans, Helvetica, sans-serif">`,
  );
  parts.push(`<rect width="${WIDTH}" height="${HEIGHT}" fill="#ffffff"/>`);
  parts.push(
    `<text x="${WIDTH / 2}" y="24" text-anchor="middle" font-size="15">${esc(spec.title)}</text>`,
  );

  // frame and gridlines
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#444444" stroke-width="1"/>`,
  );
  for (const t of yTicks) {
    const y = sy(t);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" y2="${fmt(y)}" ` +
        `stroke="#dddddd" stroke-width="0.5"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end" font-size="11">${fmt(t)}</text>`,
    );
  }

  const xTickVals = spec.xCategories
    ? spec.xCategories.map((_, i) => i)
    : niceTicks(xLo, xHi, Math.min(6, xs.length));
  xTickVals.forEach((t, i) => {
    if (t < xLo - 1e-9 || t > xHi + 1e-9) return;
    const x = sx(t);
    const label = spec.xCategories ? spec.xCategories[i] : fmt(t);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top + plotH}" x2="${fmt(x)}" ` +
        `y2="${MARGIN.top + plotH + 5}" stroke="#444444" stroke-width="1"/>`,
    );
    parts.push(
      `<text x="${fmt(x)}" y="${MARGIN.top + plotH + 20}" text-anchor="middle" ` +
        `font-size="11">${esc(label)}</text>`,
    );
  });

  // series lines, error bars and markers
  spec.series.forEach((series, si) => {
    const color = PALETTE[si % PALETTE.length];
    const dash = DASHES[si % DASHES.length];
    const path = series.points
      .map((p, i) => `${i === 0 ? "M" : "L"}${fmt(sx(p.x))},${fmt(sy(p.y))}`)
      .join(" ");
    parts.push(
      `<path d="${path}" fill="none" stroke="${color}" stroke-width="1.8"` +
        (dash ? ` stroke-dasharray="${dash}"` : "") + `/>`,
    );
    for (const p of series.points) {
      const x = sx(p.x);
      if (p.err > 0) {
        const yl = sy(p.y - p.err);
        const yh = sy(p.y + p.err);
        parts.push(
          `<line x1="${fmt(x)}" y1="${fmt(yl)}" x2="${fmt(x)}" y2="${fmt(yh)}" ` +
            `stroke="${color}" stroke-width="1"/>`,
        );
        for (const ye of [yl, yh]) {
          parts.push(
            `<line x1="${fmt(x - 3)}" y1="${fmt(ye)}" x2="${fmt(x + 3)}" y2="${fmt(ye)}" ` +
              `stroke="${color}" stroke-width="1"/>`,
          );
        }
      }
      parts.push(
        `<circle cx="${fmt(x)}" cy="${fmt(sy(p.y))}" r="3" fill="${color}"/>`,
      );
    }
  });

  // legend (top-left inside the frame)
  spec.series.forEach((series, si) => {
    const color = PALETTE[si % PALETTE.length];
    const y = MARGIN.top + 14 + si * 16;
    parts.push(
      `<line x1="${MARGIN.left + 10}" y1="${y}" x2="${MARGIN.left + 34}" y2="${y}" ` +
        `stroke="${color}" stroke-width="1.8"/>`,
    );
    parts.push(
      `<text x="${MARGIN.left + 40}" y="${y + 4}" font-size="11">${esc(series.label)}</text>`,
    );
  });

  parts.push(
    `<text x="${MARGIN.left + plotW / 2}" y="${HEIGHT - 26}" text-anchor="middle" ` +
      `font-size="12">${esc(spec.xLabel)}</text>`,
  );
  parts.push(
    `<text x="18" y="${MARGIN.top + plotH / 2}" text-anchor="middle" font-size="12" ` +
      `transform="rotate(-90 18 ${MARGIN.top + plotH / 2})">${esc(spec.yLabel)}</text>`,
  );
  if (spec.note) {
    parts.push(
      `<text x="${WIDTH / 2}" y="${HEIGHT - 8}" text-anchor="middle" font-size="9" ` +
        `fill="#666666">${esc(spec.note)}</text>`,
    );
  }
  parts.push("</svg>");
  return parts.join("\n") + "\n";
}
