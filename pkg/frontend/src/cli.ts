import { mkdirSync, writeFileSync } from "node:fs";
import { join } from "node:path";
import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { loadResults } from "./data.js";
import { FIGURE_KINDS, FigureKind, renderFigure } from "./figures.js";
import { renderPng } from "./png.js";
import { SchemaError } from "./schema.js";

async function main(): Promise<number> {
  const argv = await yargs(hideBin(process.argv))
    .command("figures", "render figures from sweep results", {})
    .option("results", {
      type: "string",
      demandOption: true,
      describe: "results CSV path(s), comma-separated for multi-series figures",
    })
    .option("out-dir", { type: "string", demandOption: true })
    .option("kind", { type: "string", choices: FIGURE_KINDS as unknown as string[] })
    .option("png", { type: "boolean", default: true })
    .strict()
    .parse();

  const files = (argv.results as string).split(",").map((p) => loadResults(p.trim()));
  const outDir = argv["out-dir"] as string;
  mkdirSync(outDir, { recursive: true });
  const kinds: FigureKind[] = argv.kind
    ? [argv.kind as FigureKind]
    : [...FIGURE_KINDS];

  for (const kind of kinds) {
    const svg = renderFigure(kind, files);
    const svgPath = join(outDir, `${kind}.svg`);
    writeFileSync(svgPath, svg);
    let wrote = `${svgPath}`;
    if (argv.png) {
      const png = await renderPng(svg);
      if (png) {
        const pngPath = join(outDir, `${kind}.png`);
        writeFileSync(pngPath, png);
        wrote += `, ${pngPath}`;
      }
    }
    console.log(`wrote ${wrote}`);
  }
  return 0;
}

main()
  .then((code) => process.exit(code))
  .catch((err) => {
    if (err instanceof SchemaError) {
      console.error(err.message);
    } else {
      console.error(err);
    }
    process.exit(1);
  });
