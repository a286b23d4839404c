import { describe, expect, it } from "vitest";

import { legendLabel, renderPanel, type Curve } from "../src/figure.js";
import { ROUNDS } from "./fixtures.js";

function powerCurve(expo: number, std = 0, name = "alg"): Curve {
  return {
    name,
    slope: expo,
    points: ROUNDS.map((t) => ({
      t,
      mean: Math.pow(t, expo),
      std: std * Math.pow(t, expo),
      functionalMean: 0,
    })),
  };
}

function polylinePoints(svg: string): Array<[number, number]> {
  const m = svg.match(/<polyline points="([^"]+)"/);
  expect(m).not.toBeNull();
  return m![1].split(" ").map((pair) => {
    const [x, y] = pair.split(",").map(Number);
    return [x, y];
  });
}

describe("legendLabel", () => {
  it("annotates the fitted order to three decimals", () => {
    expect(legendLabel(powerCurve(0.75))).toBe("alg (o=0.750)");
    expect(legendLabel({ ...powerCurve(0.75), slope: 0.98765 })).toBe("alg (o=0.988)");
  });
});

describe("renderPanel", () => {
  it("draws an exact power law as a straight line on log-log axes", () => {
    const svg = renderPanel([powerCurve(0.75)]);
    const pts = polylinePoints(svg);
    expect(pts.length).toBe(ROUNDS.length);
    // Collinearity in pixel space: interior points sit on the chord.
    const [x0, y0] = pts[0];
    const [x1, y1] = pts[pts.length - 1];
    const slope = (y1 - y0) / (x1 - x0);
    for (const [x, y] of pts) {
      expect(Math.abs(y - (y0 + slope * (x - x0)))).toBeLessThan(0.1);
    }
  });

  it("renders a band spanning mean +- std with horizontal edges for constant traces", () => {
    const curve: Curve = {
      name: "const",
      slope: 0,
      points: ROUNDS.map((t) => ({ t, mean: 2, std: 1, functionalMean: 0 })),
    };
    // A second, lower curve keeps the positive floor below mean - std so the
    // first curve's band is not clipped.
    const below: Curve = {
      name: "low",
      slope: 0,
      points: ROUNDS.map((t) => ({ t, mean: 0.5, std: 0, functionalMean: 0 })),
    };
    const svg = renderPanel([curve, below]);
    const m = svg.match(/<polygon points="([^"]+)"/);
    expect(m).not.toBeNull();
    const coords = m![1].split(" ").map((p) => p.split(",").map(Number) as [number, number]);
    expect(coords.length).toBe(2 * ROUNDS.length);
    const upperYs = new Set(coords.slice(0, ROUNDS.length).map(([, y]) => y));
    const lowerYs = new Set(coords.slice(ROUNDS.length).map(([, y]) => y));
    expect(upperYs.size).toBe(1); // mean + std = 3 everywhere
    expect(lowerYs.size).toBe(1); // mean - std = 1 everywhere
    const upperY = [...upperYs][0];
    const lowerY = [...lowerYs][0];
    const meanY = polylinePoints(svg)[0][1];
    expect(upperY).toBeLessThan(meanY);
    expect(meanY).toBeLessThan(lowerY);
  });

  it("clips the band's lower edge at the smallest positive plotted mean", () => {
    // std > mean early on: mean - std <= 0 must not reach the log axis.
    const svg = renderPanel([powerCurve(0.75, 2.0)]);
    expect(svg).not.toMatch(/NaN|Infinity/);
    const m = svg.match(/<polygon points="([^"]+)"/);
    const ys = m![1].split(" ").map((p) => Number(p.split(",")[1]));
    const floorY = Math.max(...polylinePoints(svg).map(([, y]) => y));
    for (const y of ys) {
      expect(y).toBeLessThanOrEqual(floorY + 0.01);
    }
  });

  it("is deterministic and includes one legend entry per curve", () => {
    const curves = [powerCurve(0.5, 0.1, "a"), powerCurve(0.75, 0.1, "b")];
    const svg1 = renderPanel(curves, { title: "panel" });
    const svg2 = renderPanel(curves, { title: "panel" });
    expect(svg1).toBe(svg2);
    expect(svg1).toContain("a (o=0.500)");
    expect(svg1).toContain("b (o=0.750)");
    expect((svg1.match(/<polyline /g) ?? []).length).toBe(2);
    expect((svg1.match(/<polygon /g) ?? []).length).toBe(2);
  });

  it("rejects empty input", () => {
    expect(() => renderPanel([])).toThrow(/at least one curve/);
    const allZero: Curve = {
      name: "z",
      slope: 0,
      points: ROUNDS.map((t) => ({ t, mean: 0, std: 0, functionalMean: 0 })),
    };
    expect(() => renderPanel([allZero])).toThrow(/no positive/);
  });
});
