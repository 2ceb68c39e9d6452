import { existsSync } from "node:fs";

// DejaVu Sans as bundled with matplotlib; present in this project's Python
// environment. PNG output is skipped when neither resvg nor a font resolves.
const FONT_CANDIDATES = [
  process.env.NFVSIM_FONT ?? "",
  "/usr/local/lib/python3.10/dist-packages/matplotlib/mpl-data/fonts/ttf/DejaVuSans.ttf",
  "/usr/share/fonts/truetype/dejavu/DejaVuSans.ttf",
].filter((p) => p.length > 0);

export async function renderPng(svg: string): Promise<Buffer | null> {
  let resvg: typeof import("@resvg/resvg-js") | null = null;
  try {
    resvg = await import("@resvg/resvg-js");
  } catch {
    return null;
  }
  const fontFiles = FONT_CANDIDATES.filter((p) => existsSync(p));
  const renderer = new resvg.Resvg(svg, {
    font: {
      loadSystemFonts: fontFiles.length === 0,
      fontFiles,
      defaultFontFamily: "DejaVu Sans",
    },
  });
  return Buffer.from(renderer.render().asPng());
}
