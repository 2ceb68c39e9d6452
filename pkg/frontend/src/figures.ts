import { ResultsFile, aggregate, algorithmsIn } from "./data.js";
import { ChartSpec, renderChart } from "./svg.js";

export const FIGURE_KINDS = ["fig1", "fig2", "fig3", "fig5"] as const;
export type FigureKind = (typeof FIGURE_KINDS)[number];

function basename(path: string): string {
  const parts = path.split("/");
  const last = parts[parts.length - 1];
  return last.replace(/\.[^.]*$/, "");
}

/** Numeric x when every axis value parses as a number, else categories. */
function axisValues(files: ResultsFile[]): { numeric: boolean; categories: string[] } {
  const seen: string[] = [];
  for (const f of files) {
    for (const row of f.rows) {
      if (!seen.includes(row.axis)) seen.push(row.axis);
    }
  }
  const numeric = seen.every((v) => v !== "" && !Number.isNaN(Number(v)));
  if (numeric) seen.sort((a, b) => Number(a) - Number(b));
  return { numeric, categories: seen };
}

export function buildChart(kind: FigureKind, files: ResultsFile[]): ChartSpec {
  const { numeric, categories } = axisValues(files);
  const axisIndex = new Map(categories.map((c, i) => [c, i]));
  const multiFile = files.length > 1;

  const series = files.flatMap((file) => {
    const k = file.metadata?.config?.k;
    const suffix = multiFile
      ? ` (${k !== undefined ? `k=${k}` : basename(file.path)})`
      : "";
    return algorithmsIn(file.rows).map((alg) => {
      const points = aggregate(file.rows, alg).map((p) => ({
        x: numeric ? Number(p.axis) : axisIndex.get(p.axis)!,
        y: p.mean,
        err: p.std,
      }));
      points.sort((a, b) => a.x - b.x);
      return { label: alg + suffix, points };
    });
  });

  const xLabels: Record<FigureKind, string> = {
    fig1: "substrate size |N|",
    fig2: "incentive policy",
    fig3: "topology",
    fig5: "maximum destinations |D|max",
  };
  const titles: Record<FigureKind, string> = {
    fig1: "Normalized aggregate profit vs substrate size",
    fig2: "Normalized aggregate profit with and without incentive",
    fig3: "Normalized aggregate profit on imported topologies",
    fig5: "Normalized aggregate profit vs destination count",
  };
  const note = files[0].metadata?.normalization;
  const spec: ChartSpec = {
    title: titles[kind],
    xLabel: files[0].metadata?.axis
      ? `${xLabels[kind]}`
      : xLabels[kind],
    yLabel: "normalized aggregate profit",
    series,
    note: typeof note === "string" ? note : undefined,
  };
  if (!numeric) {
    spec.xCategories = categories.map((c) =>
      kind === "fig3" ? c.split("/").pop()!.replace(/\.graphml$/, "") : c,
    );
  }
  return spec;
}

export function renderFigure(kind: FigureKind, files: ResultsFile[]): string {
  return renderChart(buildChart(kind, files));
}
