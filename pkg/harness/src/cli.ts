import yargs from "yargs";
import { hideBin } from "yargs/helpers";
import { MODEL_KINDS, ModelKind } from "./models.js";
import { runComparison, writeComparison } from "./compare.js";

async function main(): Promise<void> {
  const argv = await yargs(hideBin(process.argv))
    .usage("compare Linear/LSTM/GRU forecasters on a lagrank dataset export")
    .option("manifest", { type: "string", demandOption: true, describe: "export directory" })
    .option("kinds", { type: "string", default: "linear,lstm,gru" })
    .option("npics", { type: "string", default: "0,1,2", describe: "comma-separated feature counts" })
    .option("out", { type: "string", default: "comparison.csv" })
    .option("seed", { type: "number" })
    .option("lr", { type: "number", describe: "override learning rate" })
    .option("epochs", { type: "number" })
    .option("patience", { type: "number" })
    .option("hidden", { type: "number", default: 32 })
    .strict()
    .parse();

  const kinds = argv.kinds.split(",").map((k) => k.trim()) as ModelKind[];
  for (const kind of kinds) {
    if (!MODEL_KINDS.includes(kind)) throw new Error(`unknown kind ${kind}`);
  }
  const nPics = argv.npics.split(",").map((n) => parseInt(n.trim(), 10));

  const { rows, metadata } = await runComparison(argv.manifest, kinds, nPics, {
    seed: argv.seed,
    learningRate: argv.lr,
    epochs: argv.epochs,
    patience: argv.patience,
    hiddenUnits: argv.hidden,
  });
  writeComparison(argv.out, rows, metadata);
  for (const r of rows) {
    console.log(`${r.kind} n_pic=${r.nPic} mae=${r.mae.toFixed(4)} epochs=${r.epochsRan}`);
  }
  console.log(`wrote ${argv.out}`);
}

main().catch((err) => {
  console.error(err instanceof Error ? err.message : err);
  process.exit(1);
});
