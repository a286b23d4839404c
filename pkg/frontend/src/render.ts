/**
 * Directory-level rendering: discover result cells, group sweep cells
 * into one panel per algorithm, and write one SVG per panel.
 */

import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import { discoverCells, groupByAlgorithm } from "./data.js";
import { cellToCurve, renderPanel } from "./figure.js";

export interface RenderedFigure {
  panel: string;
  path: string;
  curves: number;
}

export function renderFigures(resultDir: string, outDir: string): RenderedFigure[] {
  const cells = discoverCells(resultDir);
  const groups = groupByAlgorithm(cells);
  mkdirSync(outDir, { recursive: true });
  const written: RenderedFigure[] = [];
  for (const [panel, members] of groups) {
    const curves = members.map((cell) => {
      const m = cell.name.match(/_rho([-\d.]+)$/);
      const curve = cellToCurve(cell);
      // Within a per-algorithm panel, label curves by their rho value.
      if (m && groups.size > 1) curve.name = `rho=${m[1]}`;
      return curve;
    });
    const svg = renderPanel(curves, { title: panel });
    const path = join(outDir, `${panel}.svg`);
    writeFileSync(path, svg + "\n");
    written.push({ panel, path, curves: curves.length });
  }
  return written;
}
