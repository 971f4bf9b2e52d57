import * as tf from "@tensorflow/tfjs";
import "@tensorflow/tfjs-backend-wasm";

let ready: Promise<string> | null = null;

/**
 * Prefer the wasm backend (XNNPACK matmuls, several times faster for these
 * small models); fall back to the pure-JS cpu backend if it cannot load.
 */
export function ensureBackend(): Promise<string> {
  if (!ready) {
    ready = (async () => {
      try {
        await tf.setBackend("wasm");
        await tf.ready();
      } catch {
        await tf.setBackend("cpu");
        await tf.ready();
      }
      return tf.getBackend();
    })();
  }
  return ready;
}
