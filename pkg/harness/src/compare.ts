import { writeFileSync } from "node:fs";
import { ensureBackend } from "./backend.js";
import { DatasetExport, loadExport } from "./manifest.js";
import { ModelKind, buildModel } from "./models.js";
import { DEFAULT_TRAIN, TrainOptions, evaluateMae, trainModel } from "./train.js";
import { buildSplit } from "./windows.js";

export interface ComparisonRow {
  kind: ModelKind;
  nPic: number;
  mae: number;
  epochsRan: number;
  seed: number;
}

export interface ComparisonOptions extends Partial<TrainOptions> {
  hiddenUnits?: number;
  seed?: number;
}

/** Train options: explicit overrides > manifest train_defaults > harness defaults. */
export function resolveTrainOptions(data: DatasetExport, opts: ComparisonOptions): TrainOptions {
  const defaults = data.manifest.train_defaults;
  return {
    epochs: opts.epochs ?? defaults?.epochs ?? DEFAULT_TRAIN.epochs,
    learningRate: opts.learningRate ?? defaults?.learning_rate ?? DEFAULT_TRAIN.learningRate,
    patience: opts.patience ?? defaults?.patience ?? DEFAULT_TRAIN.patience,
    beta1: opts.beta1 ?? DEFAULT_TRAIN.beta1,
    beta2: opts.beta2 ?? DEFAULT_TRAIN.beta2,
    epsilon: opts.epsilon ?? DEFAULT_TRAIN.epsilon,
  };
}

/** Train and score one (kind, n_pic) cell on an already-loaded export. */
export async function runCell(
  data: DatasetExport,
  kind: ModelKind,
  nPic: number,
  opts: ComparisonOptions = {},
): Promise<ComparisonRow> {
  await ensureBackend();
  const trainOpts = resolveTrainOptions(data, opts);
  const seed = opts.seed ?? data.manifest.seed;
  const train = buildSplit(data, "train", nPic);
  const val = buildSplit(data, "val", nPic);
  const test = buildSplit(data, "test", nPic);
  const model = buildModel(
    kind,
    data.manifest.t_in,
    train.inputs[0][0].length,
    data.manifest.t_out,
    opts.hiddenUnits ?? 32,
    seed,
  );
  try {
    const fit = await trainModel(model, train, val, trainOpts);
    return { kind, nPic, mae: evaluateMae(model, test), epochsRan: fit.epochsRan, seed };
  } finally {
    model.dispose();
  }
}

/** The full (kind x n_pic) grid over one export directory. */
export async function runComparison(
  manifestDir: string,
  kinds: ModelKind[],
  nPics: number[],
  opts: ComparisonOptions = {},
): Promise<{ rows: ComparisonRow[]; metadata: string }> {
  const data = loadExport(manifestDir);
  const trainOpts = resolveTrainOptions(data, opts);
  const rows: ComparisonRow[] = [];
  for (const kind of kinds) {
    for (const nPic of nPics) {
      rows.push(await runCell(data, kind, nPic, opts));
    }
  }
  const metadata =
    `source=${manifestDir} config_hash=${data.manifest.config_hash} ` +
    `lr=${trainOpts.learningRate} epochs=${trainOpts.epochs} patience=${trainOpts.patience} ` +
    `init=zero-dense-output recurrent_kernels=seeded-defaults(not-zero)`;
  return { rows, metadata };
}

export function toCsv(rows: ComparisonRow[], metadata: string): string {
  const lines = [`# ${metadata}`, "kind,n_pic,mae,epochs_ran,seed"];
  for (const r of rows) {
    lines.push(`${r.kind},${r.nPic},${r.mae.toFixed(6)},${r.epochsRan},${r.seed}`);
  }
  return lines.join("\n") + "\n";
}

export function writeComparison(path: string, rows: ComparisonRow[], metadata: string): void {
  writeFileSync(path, toCsv(rows, metadata), "utf-8");
}

/** Lowest test MAE across the swept n_pic values, per kind. */
export function optimalByKind(rows: ComparisonRow[]): Map<ModelKind, number> {
  const out = new Map<ModelKind, number>();
  for (const r of rows) {
    const cur = out.get(r.kind);
    if (cur === undefined || r.mae < cur) out.set(r.kind, r.mae);
  }
  return out;
}
