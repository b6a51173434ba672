/**
 * Command line for turning sweep CSV artifacts into SVG figures.
 *
 *   uavsched-plots render energy-vs-k --in energy_vs_K.csv --out energy.svg
 *   uavsched-plots render-all --dir verify_out --out-dir figures
 */
import { mkdir, readFile, writeFile } from "node:fs/promises";
import { join } from "node:path";
import yargs from "yargs";

import { FIGURES, FIGURE_KINDS, FigureKind, RenderOptions } from "./figures.js";

async function renderOne(kind: FigureKind, inPath: string, outPath: string, opts: RenderOptions): Promise<void> {
  const csvText = await readFile(inPath, "utf8");
  const svg = FIGURES[kind].render(csvText, opts);
  await writeFile(outPath, svg, "utf8");
}

export async function runCli(argv: string[], log: (line: string) => void = console.log): Promise<number> {
  let status = 0;
  const parser = yargs(argv)
    .scriptName("uavsched-plots")
    .strict()
    .exitProcess(false)
    .fail((msg, err) => {
      log(msg ?? err?.message ?? "unknown error");
      status = 1;
    })
    .command(
      "render <kind>",
      "render one figure from a CSV artifact",
      (y) =>
        y
          .positional("kind", { choices: FIGURE_KINDS, demandOption: true, type: "string" })
          .option("in", { demandOption: true, describe: "input CSV path", type: "string" })
          .option("out", { demandOption: true, describe: "output SVG path", type: "string" })
          .option("window", { default: 1, describe: "moving-average window for per-episode figures", type: "number" }),
      async (args) => {
        const kind = args.kind as FigureKind;
        await renderOne(kind, args.in, args.out, { window: args.window });
        log(`wrote ${args.out}`);
      },
    )
    .command(
      "render-all",
      "render every figure whose input CSV exists in a sweep directory",
      (y) =>
        y
          .option("dir", { demandOption: true, describe: "directory holding the sweep CSV files", type: "string" })
          .option("out-dir", { demandOption: true, describe: "directory to write SVG files into", type: "string" })
          .option("window", { default: 1, describe: "moving-average window for per-episode figures", type: "number" }),
      async (args) => {
        await mkdir(args.outDir, { recursive: true });
        let rendered = 0;
        for (const kind of FIGURE_KINDS) {
          const inPath = join(args.dir, FIGURES[kind].input);
          let csvText: string;
          try {
            csvText = await readFile(inPath, "utf8");
          } catch {
            log(`skip ${kind}: no ${FIGURES[kind].input}`);
            continue;
          }
          const outPath = join(args.outDir, `${kind}.svg`);
          await writeFile(outPath, FIGURES[kind].render(csvText, { window: args.window }), "utf8");
          log(`wrote ${outPath}`);
          rendered += 1;
        }
        if (rendered === 0) throw new Error(`no figure inputs found in ${args.dir}`);
      },
    )
    .demandCommand(1, "pick a command: render or render-all")
    .help();

  try {
    await parser.parseAsync();
  } catch (err) {
    log(err instanceof Error ? err.message : String(err));
    return 1;
  }
  return status;
}
