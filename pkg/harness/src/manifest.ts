import { readFileSync } from "node:fs";
import { join } from "node:path";
import Papa from "papaparse";

export interface SplitBounds {
  train: [number, number];
  val: [number, number];
  test: [number, number];
}

export interface Manifest {
  t_in: number;
  t_out: number;
  batch_size: number;
  columns: string[];
  label: string;
  pic_columns: string[];
  base_columns: string[];
  splits: SplitBounds;
  norm: {
    mean: Record<string, number>;
    std: Record<string, number>;
    train_rows: [number, number];
  };
  ranking: { target: string; order: string[] };
  seed: number;
  config_hash: string;
  train_defaults?: { learning_rate: number; epochs: number; patience: number };
}

export interface DatasetExport {
  dir: string;
  manifest: Manifest;
  /** normalized feature matrix, row-major, aligned with manifest.columns */
  rows: number[][];
}

function fail(dir: string, message: string): never {
  throw new Error(`invalid export at ${dir}: ${message}`);
}

/** Load and validate one features.csv + manifest.json export directory. */
export function loadExport(dir: string): DatasetExport {
  const manifest = JSON.parse(
    readFileSync(join(dir, "manifest.json"), "utf-8"),
  ) as Manifest;
  for (const key of ["t_in", "t_out", "batch_size", "columns", "label", "splits", "norm"]) {
    if (!(key in manifest)) fail(dir, `manifest missing ${key}`);
  }
  if (!manifest.columns.includes(manifest.label)) {
    fail(dir, `label ${manifest.label} not among columns`);
  }
  for (const col of manifest.pic_columns ?? []) {
    if (!manifest.columns.includes(col)) fail(dir, `pic column ${col} not among columns`);
  }

  const parsed = Papa.parse<number[]>(readFileSync(join(dir, "features.csv"), "utf-8").trim(), {
    dynamicTyping: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) fail(dir, `features.csv: ${parsed.errors[0].message}`);
  const [header, ...rows] = parsed.data as unknown as [string[], ...number[][]];
  if (header.join(",") !== manifest.columns.join(",")) {
    fail(dir, "features.csv header disagrees with manifest columns");
  }
  for (const row of rows) {
    if (row.length !== manifest.columns.length) fail(dir, "ragged features.csv row");
    if (row.some((v) => typeof v !== "number" || Number.isNaN(v))) {
      fail(dir, "non-numeric cell in features.csv");
    }
  }
  const total = rows.length;
  for (const [name, [lo, hi]] of Object.entries(manifest.splits)) {
    if (!(0 <= lo && lo <= hi && hi <= total)) fail(dir, `split ${name} out of range`);
  }
  return { dir, manifest, rows };
}

/** Column names for an n_pic-sized feature set: base + label + first n ranked. */
export function selectColumns(manifest: Manifest, nPic: number): string[] {
  if (nPic < 0 || nPic > manifest.pic_columns.length) {
    throw new Error(`n_pic=${nPic} outside [0, ${manifest.pic_columns.length}]`);
  }
  return [...manifest.base_columns, manifest.label, ...manifest.pic_columns.slice(0, nPic)];
}
