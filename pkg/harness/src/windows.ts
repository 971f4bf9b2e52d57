import { DatasetExport, selectColumns } from "./manifest.js";

export type SplitName = "train" | "val" | "test";

export interface WindowedSplit {
  /** [n, t_in, F] input blocks in strict time order, never shuffled */
  inputs: number[][][];
  /** [n, t_out] label blocks; block i starts right where input i ends */
  labels: number[][];
  tIn: number;
  tOut: number;
  batchSize: number;
}

/** Sliding windows over one split's rows for an n_pic-sized feature subset. */
export function buildSplit(data: DatasetExport, split: SplitName, nPic: number): WindowedSplit {
  const { manifest, rows } = data;
  const [lo, hi] = manifest.splits[split];
  const names = selectColumns(manifest, nPic);
  const indices = names.map((n) => manifest.columns.indexOf(n));
  const labelIdx = manifest.columns.indexOf(manifest.label);
  const span = manifest.t_in + manifest.t_out;
  const n = hi - lo - span + 1;
  if (n < 1) {
    throw new Error(`split ${split} has ${hi - lo} rows, too few for t_in+t_out=${span}`);
  }
  const inputs: number[][][] = [];
  const labels: number[][] = [];
  for (let i = 0; i < n; i++) {
    const block: number[][] = [];
    for (let t = 0; t < manifest.t_in; t++) {
      const row = rows[lo + i + t];
      block.push(indices.map((c) => row[c]));
    }
    inputs.push(block);
    const out: number[] = [];
    for (let t = 0; t < manifest.t_out; t++) {
      out.push(rows[lo + i + manifest.t_in + t][labelIdx]);
    }
    labels.push(out);
  }
  return { inputs, labels, tIn: manifest.t_in, tOut: manifest.t_out, batchSize: manifest.batch_size };
}

/** Sequential [start, end) batch ranges; the short tail batch is kept. */
export function batchRanges(n: number, batchSize: number): Array<[number, number]> {
  const out: Array<[number, number]> = [];
  for (let lo = 0; lo < n; lo += batchSize) {
    out.push([lo, Math.min(lo + batchSize, n)]);
  }
  return out;
}
