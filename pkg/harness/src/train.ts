import * as tf from "@tensorflow/tfjs";
import { WindowedSplit, batchRanges } from "./windows.js";

export interface TrainOptions {
  epochs: number;
  learningRate: number;
  patience: number;
  beta1?: number;
  beta2?: number;
  epsilon?: number;
}

export const DEFAULT_TRAIN: TrainOptions = {
  epochs: 120,
  learningRate: 1e-3,
  patience: 10,
  beta1: 0.9,
  beta2: 0.999,
  epsilon: 1e-8,
};

export interface TrainResult {
  epochsRan: number;
  bestEpoch: number;
  valLoss: number[];
}

function toTensors(split: WindowedSplit): { x: tf.Tensor3D; y: tf.Tensor2D } {
  return { x: tf.tensor3d(split.inputs), y: tf.tensor2d(split.labels) };
}

function mseOf(model: tf.LayersModel, x: tf.Tensor, y: tf.Tensor): number {
  return tf.tidy(() => {
    const pred = model.predict(x) as tf.Tensor;
    return pred.sub(y).square().mean().dataSync()[0];
  });
}

/**
 * MSE training with sequential batches, early stopping on validation loss,
 * and best-weight restoration. Batches are fed strictly in time order.
 */
export async function trainModel(
  model: tf.LayersModel,
  train: WindowedSplit,
  val: WindowedSplit,
  opts: TrainOptions = DEFAULT_TRAIN,
): Promise<TrainResult> {
  const optimizer = tf.train.adam(
    opts.learningRate,
    opts.beta1 ?? 0.9,
    opts.beta2 ?? 0.999,
    opts.epsilon ?? 1e-8,
  );
  model.compile({ optimizer, loss: "meanSquaredError" });

  const trainT = toTensors(train);
  const valT = toTensors(val);
  const batches = batchRanges(train.inputs.length, train.batchSize).map(([lo, hi]) => ({
    x: trainT.x.slice([lo, 0, 0], [hi - lo, -1, -1]),
    y: trainT.y.slice([lo, 0], [hi - lo, -1]),
  }));

  const result: TrainResult = { epochsRan: 0, bestEpoch: 0, valLoss: [] };
  let best = Infinity;
  let bestWeights: tf.Tensor[] | null = null;
  let bad = 0;
  try {
    for (let epoch = 1; epoch <= opts.epochs; epoch++) {
      for (const batch of batches) {
        await model.trainOnBatch(batch.x, batch.y);
      }
      const valLoss = mseOf(model, valT.x, valT.y);
      if (!Number.isFinite(valLoss)) {
        throw new Error(`training diverged: non-finite validation loss at epoch ${epoch}`);
      }
      result.valLoss.push(valLoss);
      result.epochsRan = epoch;
      if (valLoss < best) {
        best = valLoss;
        result.bestEpoch = epoch;
        bestWeights?.forEach((w) => w.dispose());
        bestWeights = model.getWeights().map((w) => w.clone());
        bad = 0;
      } else {
        bad += 1;
        if (bad >= opts.patience) break;
      }
    }
    if (bestWeights) {
      model.setWeights(bestWeights);
    }
  } finally {
    bestWeights?.forEach((w) => w.dispose());
    batches.forEach((b) => {
      b.x.dispose();
      b.y.dispose();
    });
    trainT.x.dispose();
    trainT.y.dispose();
    valT.x.dispose();
    valT.y.dispose();
    optimizer.dispose();
  }
  return result;
}

/** Mean absolute error over every sample and output step. */
export function evaluateMae(model: tf.LayersModel, split: WindowedSplit): number {
  const x = tf.tensor3d(split.inputs);
  const y = tf.tensor2d(split.labels);
  try {
    return tf.tidy(() => {
      const pred = model.predict(x) as tf.Tensor;
      return pred.sub(y).abs().mean().dataSync()[0];
    });
  } finally {
    x.dispose();
    y.dispose();
  }
}
