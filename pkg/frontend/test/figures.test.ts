import { execFileSync } from "node:child_process";
import { mkdtempSync, readFileSync, statSync, writeFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { describe, expect, it } from "vitest";

import { aggregate, loadResults } from "../src/data.js";
import { FIGURE_KINDS, buildChart, renderFigure } from "../src/figures.js";
import { SchemaError } from "../src/schema.js";

const GOLDEN = join(__dirname, "golden");

const goldenFor = (kind: string): string[] =>
  kind === "fig5"
    ? [join(GOLDEN, "fig5_k08.csv"), join(GOLDEN, "fig5_k04.csv")]
    : [join(GOLDEN, `${kind}.csv`)];

describe("data loading", () => {
  it("parses the harness CSV contract", () => {
    const file = loadResults(join(GOLDEN, "fig1.csv"));
    expect(file.rows.length).toBe(27);
    expect(file.metadata.axis).toBe("n");
    const algs = new Set(file.rows.map((r) => r.algorithm));
    expect(algs).toEqual(new Set(["approximation", "heuristic", "greedy"]));
  });

  it("raises SchemaError naming missing columns", () => {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "axis,algorithm,seed\n1,approximation,0\n");
    expect(() => loadResults(bad)).toThrowError(SchemaError);
    expect(() => loadResults(bad)).toThrowError(/profit_norm/);
  });

  it("raises SchemaError on an empty CSV", () => {
    const dir = mkdtempSync(join(tmpdir(), "figs-"));
    const empty = join(dir, "empty.csv");
    writeFileSync(empty, "");
    expect(() => loadResults(empty)).toThrowError(SchemaError);
  });

  it("aggregates mean and stddev over seeds", () => {
    const file = loadResults(join(GOLDEN, "fig1.csv"));
    const pts = aggregate(file.rows, "heuristic");
    expect(pts.length).toBe(3);
    for (const p of pts) {
      expect(p.n).toBe(3);
      expect(p.mean).toBeGreaterThan(0);
      expect(p.std).toBeGreaterThanOrEqual(0);
    }
  });
});

describe("figure construction", () => {
  it("builds one series per algorithm for fig1", () => {
    const chart = buildChart("fig1", [loadResults(join(GOLDEN, "fig1.csv"))]);
    expect(chart.series.map((s) => s.label)).toEqual([
      "approximation",
      "heuristic",
      "greedy",
    ]);
    expect(chart.series[0].points.map((p) => p.x)).toEqual([8, 12, 16]);
  });

  it("uses categorical ticks for fig3 topologies", () => {
    const chart = buildChart("fig3", [loadResults(join(GOLDEN, "fig3.csv"))]);
    expect(chart.xCategories).toEqual(["bellcanada_like", "cesnet_like"]);
  });

  it("labels fig5 series with the k from each file's metadata", () => {
    const files = goldenFor("fig5").map((p) => loadResults(p));
    const chart = buildChart("fig5", files);
    expect(chart.series.map((s) => s.label)).toEqual([
      "heuristic (k=0.8)",
      "greedy (k=0.8)",
      "heuristic (k=0.4)",
      "greedy (k=0.4)",
    ]);
  });
});

describe("rendering", () => {
  for (const kind of FIGURE_KINDS) {
    it(`renders ${kind} without error, non-empty and deterministic`, () => {
      const files = goldenFor(kind).map((p) => loadResults(p));
      const first = renderFigure(kind, files);
      const second = renderFigure(kind, files);
      expect(first.length).toBeGreaterThan(1000);
      expect(first.startsWith("<svg")).toBe(true);
      expect(second).toBe(first); // byte-for-byte across consecutive runs
    });
  }

  it("carries the normalization note from metadata", () => {
    const svg = renderFigure("fig1", [loadResults(join(GOLDEN, "fig1.csv"))]);
    expect(svg).toContain("max profit across compared algorithms");
  });
});

describe("cli end-to-end", () => {
  it("writes all four figure kinds byte-identically across two runs", () => {
    const cli = join(__dirname, "..", "dist", "cli.js");
    const outs: Record<string, Buffer>[] = [];
    for (let run = 0; run < 2; run += 1) {
      const dir = mkdtempSync(join(tmpdir(), `figs-run${run}-`));
      for (const kind of FIGURE_KINDS) {
        execFileSync(
          "node",
          [cli, "--results", goldenFor(kind).join(","), "--out-dir", dir, "--kind", kind],
          { stdio: "pipe" },
        );
      }
      const snapshot: Record<string, Buffer> = {};
      for (const kind of FIGURE_KINDS) {
        const svg = readFileSync(join(dir, `${kind}.svg`));
        expect(svg.length).toBeGreaterThan(0);
        snapshot[`${kind}.svg`] = svg;
        try {
          const png = readFileSync(join(dir, `${kind}.png`));
          expect(png.length).toBeGreaterThan(0);
          snapshot[`${kind}.png`] = png;
        } catch {
          // png emission is optional (requires the rasterizer + a font)
        }
      }
      outs.push(snapshot);
    }
    expect(Object.keys(outs[0])).toEqual(Object.keys(outs[1]));
    for (const name of Object.keys(outs[0])) {
      expect(outs[0][name].equals(outs[1][name]), `${name} differs`).toBe(true);
    }
  });

  it("fails with a schema message on a malformed CSV", () => {
    const cli = join(__dirname, "..", "dist", "cli.js");
    const dir = mkdtempSync(join(tmpdir(), "figs-bad-"));
    const bad = join(dir, "bad.csv");
    writeFileSync(bad, "nope\n1\n");
    let failed = false;
    try {
      execFileSync("node", [cli, "--results", bad, "--out-dir", dir], { stdio: "pipe" });
    } catch (err: any) {
      failed = true;
      expect(String(err.stderr)).toContain("missing column");
    }
    expect(failed).toBe(true);
  });
});
