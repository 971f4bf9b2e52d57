import { beforeAll, describe, expect, it } from "vitest";
import { ensureBackend } from "../src/backend.js";
import { ComparisonRow, optimalByKind, runCell } from "../src/compare.js";
import { loadExport } from "../src/manifest.js";
import { laggedDir } from "./paths.js";

beforeAll(async () => {
  await ensureBackend();
});

const SEEDS = 20;
const N_PICS = [0, 1];

describe("lagged-source exports", () => {
  it(
    "recurrent kinds beat or tie the linear optimal MAE in a majority of seeds",
    async () => {
      let lstmWins = 0;
      let gruWins = 0;
      for (let seed = 0; seed < SEEDS; seed++) {
        const data = loadExport(laggedDir(seed));
        const rows: ComparisonRow[] = [];
        for (const kind of ["linear", "lstm", "gru"] as const) {
          for (const nPic of N_PICS) {
            rows.push(await runCell(data, kind, nPic, {}));
          }
        }
        const opt = optimalByKind(rows);
        const linear = opt.get("linear")!;
        if (opt.get("lstm")! <= linear) lstmWins++;
        if (opt.get("gru")! <= linear) gruWins++;
      }
      // majority rule over the seed family, per recurrent kind
      expect(lstmWins, `lstm won ${lstmWins}/${SEEDS}`).toBeGreaterThan(SEEDS / 2);
      expect(gruWins, `gru won ${gruWins}/${SEEDS}`).toBeGreaterThan(SEEDS / 2);
    },
  );
});
