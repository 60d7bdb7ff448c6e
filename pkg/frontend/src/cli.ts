#!/usr/bin/env node
/**
 * render_figure <name> <data-dir> <out.svg>
 *
 * Renders one named figure from the CSV artifacts the calculator CLI wrote
 * to <data-dir>. Exit code 2 on bad usage or missing inputs.
 */

import { writeFileSync } from "node:fs";
import { renderFigure, FIGURES } from "./figures.js";

export function main(argv: string[]): number {
  if (argv.length !== 3) {
    process.stderr.write(
      "usage: render_figure <name> <data-dir> <out.svg>\n" +
        `figures: ${Object.keys(FIGURES).sort().join(", ")}\n`,
    );
    return 2;
  }
  const [name, dataDir, outPath] = argv;
  let svg: string;
  try {
    svg = renderFigure(name, dataDir);
  } catch (err) {
    process.stderr.write(`${(err as Error).name}: ${(err as Error).message}\n`);
    return 2;
  }
  writeFileSync(outPath, svg, "utf-8");
  process.stdout.write(`${name}: wrote ${outPath}\n`);
  return 0;
}

if (process.argv[1] && process.argv[1].endsWith("cli.js")) {
  process.exit(main(process.argv.slice(2)));
}
