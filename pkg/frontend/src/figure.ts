/**
 * Deterministic SVG rendering of log-log regret panels: one mean line per
 * curve, a shaded +-1 std band, and a legend annotating each curve with
 * its fitted order ("name (o=slope)", three decimals).
 */

import type { ResultCell, TracePoint } from "./data.js";

export interface Curve {
  /** Legend label before the slope annotation. */
  name: string;
  /** Fitted order from the JSON report. */
  slope: number;
  points: TracePoint[];
}

export interface PanelOptions {
  title?: string;
  width?: number;
  height?: number;
}

const PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

const MARGIN = { top: 36, right: 16, bottom: 44, left: 64 };

export function cellToCurve(cell: ResultCell): Curve {
  return {
    name: cell.name,
    slope: cell.report.aggregate_slope,
    points: cell.trace,
  };
}

export function legendLabel(curve: Curve): string {
  return `${curve.name} (o=${curve.slope.toFixed(3)})`;
}

function log10(v: number): number {
  return Math.log(v) / Math.LN10;
}

function fmtTick(exp: number): string {
  return `1e${exp}`;
}

export function renderPanel(curves: Curve[], options: PanelOptions = {}): string {
  if (curves.length === 0) {
    throw new Error("panel needs at least one curve");
  }
  const width = options.width ?? 640;
  const height = options.height ?? 480;
  const plotW = width - MARGIN.left - MARGIN.right;
  const plotH = height - MARGIN.top - MARGIN.bottom;

  // The log axes only admit positive values; the band's lower edge is
  // clipped at the smallest positive plotted mean so early near-zero
  // std intervals do not blow up the scale.
  let floor = Infinity;
  for (const c of curves) {
    for (const p of c.points) {
      if (p.mean > 0 && p.mean < floor) floor = p.mean;
    }
  }
  if (!Number.isFinite(floor)) {
    throw new Error("no positive mean values to plot");
  }

  let xMin = Infinity;
  let xMax = -Infinity;
  let yMin = Infinity;
  let yMax = -Infinity;
  for (const c of curves) {
    for (const p of c.points) {
      if (p.mean <= 0) continue;
      xMin = Math.min(xMin, p.t);
      xMax = Math.max(xMax, p.t);
      yMin = Math.min(yMin, Math.max(p.mean - p.std, floor));
      yMax = Math.max(yMax, p.mean + p.std);
    }
  }
  const lx0 = log10(xMin);
  const lx1 = log10(xMax);
  const ly0 = log10(yMin);
  const ly1 = log10(yMax);
  const sx = (t: number) =>
    MARGIN.left + ((log10(t) - lx0) / Math.max(lx1 - lx0, 1e-12)) * plotW;
  const sy = (v: number) =>
    MARGIN.top + plotH - ((log10(v) - ly0) / Math.max(ly1 - ly0, 1e-12)) * plotH;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
      `viewBox="0 0 ${width} ${height}" font-family="sans-serif" font-size="12">`,
  );
  parts.push(`<rect width="${width}" height="${height}" fill="white"/>`);
  if (options.title) {
    parts.push(
      `<text x="${width / 2}" y="20" text-anchor="middle" font-size="14">` +
        `${escapeXml(options.title)}</text>`,
    );
  }

  // Decade grid lines and tick labels.
  for (let e = Math.ceil(lx0); e <= Math.floor(lx1); e++) {
    const x = sx(10 ** e);
    parts.push(
      `<line x1="${fmt(x)}" y1="${MARGIN.top}" x2="${fmt(x)}" ` +
        `y2="${MARGIN.top + plotH}" stroke="#ddd"/>`,
      `<text x="${fmt(x)}" y="${MARGIN.top + plotH + 18}" text-anchor="middle">` +
        `${fmtTick(e)}</text>`,
    );
  }
  for (let e = Math.ceil(ly0); e <= Math.floor(ly1); e++) {
    const y = sy(10 ** e);
    parts.push(
      `<line x1="${MARGIN.left}" y1="${fmt(y)}" x2="${MARGIN.left + plotW}" ` +
        `y2="${fmt(y)}" stroke="#ddd"/>`,
      `<text x="${MARGIN.left - 8}" y="${fmt(y + 4)}" text-anchor="end">${fmtTick(e)}</text>`,
    );
  }
  parts.push(
    `<rect x="${MARGIN.left}" y="${MARGIN.top}" width="${plotW}" height="${plotH}" ` +
      `fill="none" stroke="#333"/>`,
    `<text x="${MARGIN.left + plotW / 2}" y="${height - 8}" text-anchor="middle">round t</text>`,
    `<text x="16" y="${MARGIN.top + plotH / 2}" text-anchor="middle" ` +
      `transform="rotate(-90 16 ${MARGIN.top + plotH / 2})">cumulative dueling regret</text>`,
  );

  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const pts = curve.points.filter((p) => p.mean > 0);
    const upper = pts.map((p) => `${fmt(sx(p.t))},${fmt(sy(p.mean + p.std))}`);
    const lower = pts
      .slice()
      .reverse()
      .map((p) => `${fmt(sx(p.t))},${fmt(sy(Math.max(p.mean - p.std, floor)))}`);
    parts.push(
      `<polygon points="${upper.join(" ")} ${lower.join(" ")}" fill="${color}" ` +
        `fill-opacity="0.15" stroke="none"/>`,
    );
    const line = pts.map((p) => `${fmt(sx(p.t))},${fmt(sy(p.mean))}`).join(" ");
    parts.push(`<polyline points="${line}" fill="none" stroke="${color}" stroke-width="1.5"/>`);
  });

  // Legend (top-left inside the plot area).
  curves.forEach((curve, i) => {
    const color = PALETTE[i % PALETTE.length];
    const y = MARGIN.top + 16 + i * 16;
    parts.push(
      `<line x1="${MARGIN.left + 10}" y1="${y - 4}" x2="${MARGIN.left + 34}" ` +
        `y2="${y - 4}" stroke="${color}" stroke-width="2"/>`,
      `<text x="${MARGIN.left + 40}" y="${y}">${escapeXml(legendLabel(curve))}</text>`,
    );
  });

  parts.push("</svg>");
  return parts.join("\n");
}

function fmt(v: number): string {
  return v.toFixed(2);
}

function escapeXml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}
