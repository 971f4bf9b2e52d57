import * as tf from "@tensorflow/tfjs";

export type ModelKind = "linear" | "lstm" | "gru";

export const MODEL_KINDS: ModelKind[] = ["linear", "lstm", "gru"];

/**
 * Drops everything but the final time step: [batch, t_in, F] -> [batch, F].
 *
 * Keeping the slice inside the model (instead of pre-slicing the data) lets
 * tests probe that the linear kind really ignores earlier steps.
 */
class LastStep extends tf.layers.Layer {
  static className = "LastStep";

  computeOutputShape(inputShape: tf.Shape): tf.Shape {
    return [inputShape[0], inputShape[2]];
  }

  call(inputs: tf.Tensor | tf.Tensor[]): tf.Tensor {
    const x = Array.isArray(inputs) ? inputs[0] : inputs;
    const tIn = x.shape[1] as number;
    return x.slice([0, tIn - 1, 0], [-1, 1, -1]).squeeze([1]);
  }
}
tf.serialization.registerClass(LastStep);

/**
 * Build one forecaster. All kinds emit every output step at once through a
 * zero-initialized dense layer; the recurrent kinds read the whole input
 * sequence while the linear kind sees only the last step.
 *
 * Recurrent input/recurrent kernels use seeded default initializers rather
 * than zeros (all-zero recurrent kernels cannot learn); this deviation is
 * flagged in the comparison metadata.
 */
export function buildModel(
  kind: ModelKind,
  tIn: number,
  nFeatures: number,
  tOut: number,
  hiddenUnits = 32,
  seed = 0,
): tf.LayersModel {
  const model = tf.sequential();
  const inputShape: [number, number] = [tIn, nFeatures];
  if (kind === "linear") {
    model.add(new LastStep({ inputShape }));
  } else if (kind === "lstm") {
    model.add(
      tf.layers.lstm({
        units: hiddenUnits,
        inputShape,
        kernelInitializer: tf.initializers.glorotUniform({ seed }),
        recurrentInitializer: tf.initializers.orthogonal({ seed: seed + 1, gain: 1 }),
        biasInitializer: tf.initializers.zeros(),
        unitForgetBias: true,
      }),
    );
  } else if (kind === "gru") {
    model.add(
      tf.layers.gru({
        units: hiddenUnits,
        inputShape,
        kernelInitializer: tf.initializers.glorotUniform({ seed }),
        recurrentInitializer: tf.initializers.orthogonal({ seed: seed + 1, gain: 1 }),
        biasInitializer: tf.initializers.zeros(),
      }),
    );
  } else {
    throw new Error(`unknown model kind ${kind as string}`);
  }
  model.add(
    tf.layers.dense({
      units: tOut,
      kernelInitializer: tf.initializers.zeros(),
      biasInitializer: tf.initializers.zeros(),
    }),
  );
  return model;
}
