import { describe, expect, it } from "vitest";

import {
  VERSION,
  coreVersion,
  diagram,
  diagramCsv,
  lossAndGrad,
  parseDiagramCsv,
  toDiagramCsv,
  type LikelihoodView,
  type MaskView,
} from "../src/index.js";
import { decodeNpy, encodeNpy } from "../src/npy.js";

function likelihood(rows: number, cols: number, fill: (r: number, c: number) => number): LikelihoodView {
  const data = new Float32Array(rows * cols);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      data[r * cols + c] = Math.fround(fill(r, c));
    }
  }
  return { rows, cols, data };
}

function mask(rows: number, cols: number, fill: (r: number, c: number) => 0 | 1): MaskView {
  const data = new Uint8Array(rows * cols);
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      data[r * cols + c] = fill(r, c);
    }
  }
  return { rows, cols, data };
}

/** Deterministic quantized noise: multiples of 1/16, no tiny magnitudes,
 * so float text round-trips identically in both languages. */
function quantizedNoise(rows: number, cols: number, seed: number): LikelihoodView {
  let state = seed >>> 0;
  const next = () => {
    state = (state * 1664525 + 1013904223) >>> 0;
    return state / 2 ** 32;
  };
  return likelihood(rows, cols, () => Math.floor(next() * 17) / 16);
}

describe("npy codec", () => {
  it("round-trips buffers", () => {
    const view = quantizedNoise(5, 7, 3);
    const decoded = decodeNpy(encodeNpy(view.data, 5, 7));
    expect(decoded.rows).toBe(5);
    expect(decoded.cols).toBe(7);
    expect(Array.from(decoded.data)).toEqual(Array.from(view.data));
  });
});

describe("diagram", () => {
  it("constant-one image yields a single essential component", async () => {
    const records = await diagram(likelihood(6, 6, () => 1.0));
    expect(records).toHaveLength(1);
    const only = records[0];
    expect(only.dim).toBe(0);
    expect(only.birth).toBe(1.0);
    expect(only.death).toBe(0.0);
    expect(only.destroyerRow).toBeNull();
    expect([only.plotX, only.plotY]).toEqual([0.0, 1.0]);
  });

  it("ring image yields one loop feature", async () => {
    const ring = likelihood(5, 5, (r, c) => {
      const onRing = Math.max(Math.abs(r - 2), Math.abs(c - 2)) === 1;
      return onRing ? 1.0 : 0.0;
    });
    const records = await diagram(ring, false);
    const loops = records.filter((p) => p.dim === 1);
    expect(loops).toHaveLength(1);
    expect(loops[0].birth).toBe(1.0);
    expect(loops[0].death).toBe(0.0);
  });

  it("rejects a wrong dtype, naming the expected one", async () => {
    const bad = { rows: 2, cols: 2, data: new Float64Array(4) } as unknown as LikelihoodView;
    await expect(diagram(bad)).rejects.toThrow(/Float32Array/);
  });

  it("rejects a shape/buffer mismatch", async () => {
    const bad: LikelihoodView = { rows: 3, cols: 3, data: new Float32Array(4) };
    await expect(diagram(bad)).rejects.toThrow(/does not match shape/);
  });

  it("surfaces core validation errors verbatim", async () => {
    const tooBig = likelihood(3, 3, () => 1.0);
    tooBig.data[4] = 1.5;
    await expect(diagram(tooBig)).rejects.toThrow(/value out of range/);
  });

  it("does not mutate its input buffer", async () => {
    const view = quantizedNoise(8, 8, 11);
    const before = Array.from(view.data);
    await diagram(view);
    expect(Array.from(view.data)).toEqual(before);
  });
});

describe("lossAndGrad", () => {
  it("perfect prediction has zero topology loss and zero gradient", async () => {
    const t = mask(10, 10, (r, c) => (r >= 3 && r < 7 && c >= 2 && c < 8 ? 1 : 0));
    const l = likelihood(10, 10, (r, c) => t.data[r * 10 + c]);
    const out = await lossAndGrad(l, t, 0.5);
    expect(out.breakdown.topoLoss.total).toBe(0.0);
    expect(out.gradient.every((g) => g === 0)).toBe(true);
    expect(out.breakdown.total).toBe(out.breakdown.pixelLoss);
  });

  it("reproduces the diagonal-feature fixture bitwise", async () => {
    // one bump at 0.6 over a 0.4 background against an empty mask: the
    // bump matches the diagonal, so its contribution and creator gradient
    // follow from the midpoint target; expectations are computed here with
    // the same float32-then-float64 arithmetic the core performs
    const l = likelihood(8, 8, (r, c) => (r === 4 && c === 4 ? 0.6 : 0.4));
    const t = mask(8, 8, () => 0);
    const out = await lossAndGrad(l, t, 0.01, "vanilla");

    const b = Math.fround(0.6);
    const d = Math.fround(0.4);
    const mid = 0.5 * (b + d);
    const expectContribution = (b - mid) ** 2 + (d - mid) ** 2;
    const diagonalPairs = out.breakdown.pairs.filter(
      (p) => p.dim === 0 && p.target === "diagonal"
    );
    expect(diagonalPairs).toHaveLength(1);
    expect(diagonalPairs[0].s).toBe(1.0);
    expect(diagonalPairs[0].contribution).toBe(expectContribution);

    const expectCreatorGrad = Math.fround(2 * (b - mid));
    expect(out.gradient[4 * 8 + 4]).toBe(expectCreatorGrad);
  });

  it("shape mismatch is rejected at the boundary", async () => {
    const l = likelihood(4, 4, () => 0.5);
    const t = mask(4, 5, () => 0);
    await expect(lossAndGrad(l, t)).rejects.toThrow(/shape mismatch/);
  });

  it("rejects non-binary mask bytes", async () => {
    const l = likelihood(4, 4, () => 0.5);
    const bad: MaskView = { rows: 4, cols: 4, data: new Uint8Array(16).fill(2) };
    await expect(lossAndGrad(l, bad)).rejects.toThrow(/0 or 1/);
  });

  it("is pure: a batch of calls equals per-item calls elementwise", async () => {
    const items = [3, 5, 9].map((seed) => ({
      l: quantizedNoise(8, 8, seed),
      t: mask(8, 8, (r, c) => ((r + c + seed) % 3 === 0 ? 1 : 0)),
    }));
    const batched = await Promise.all(items.map((it) => lossAndGrad(it.l, it.t)));
    for (let i = 0; i < items.length; i++) {
      const single = await lossAndGrad(items[i].l, items[i].t);
      expect(single.breakdown).toEqual(batched[i].breakdown);
      expect(Array.from(single.gradient)).toEqual(Array.from(batched[i].gradient));
    }
  });
});

describe("versioning", () => {
  it("binding version matches the installed core", async () => {
    expect(await coreVersion()).toBe(VERSION);
  });
});

describe("core parity", () => {
  it("100 random images serialize byte-identically through the binding", async () => {
    const seeds = Array.from({ length: 100 }, (_, i) => i + 1);
    const chunk = 8;
    for (let start = 0; start < seeds.length; start += chunk) {
      await Promise.all(
        seeds.slice(start, start + chunk).map(async (seed) => {
          const view = quantizedNoise(8, 8, seed * 2654435761);
          const csv = await diagramCsv(view, true);
          const roundTrip = toDiagramCsv(parseDiagramCsv(csv));
          expect(roundTrip).toBe(csv);
        })
      );
    }
  });
});

describe("process-level concurrency", () => {
  const big = () =>
    likelihood(
      512,
      512,
      (r, c) => 0.5 + 0.25 * Math.sin((2 * Math.PI * r) / 64) + 0.25 * Math.cos((2 * Math.PI * c) / 48)
    );

  it("concurrent calls overlap in time instead of serializing", async () => {
    // structural form of the no-shared-lock contract: each call runs in its
    // own process, so two in-flight calls' wall-clock intervals intersect
    const input = big();
    const timed = async () => {
      const start = performance.now();
      await diagram(input, false);
      return { start, end: performance.now() };
    };
    const [a, b] = await Promise.all([timed(), timed()]);
    expect(a.start).toBeLessThan(b.end);
    expect(b.start).toBeLessThan(a.end);
  });

  it("two concurrent 512x512 calls beat serialized calls by >= 1.5x", async () => {
    // NOTE: known-red in the build sandbox. Its two vCPUs only parallelize
    // register-level work (raw busy-loop processes reach 1.99x) while any
    // memory-bound numeric work caps near 1.1-1.2x (even two plain
    // `import numpy` processes measure ~1.09x), so no implementation of
    // this contract can reach 1.5x there. On hardware with two full cores
    // the overlap shown above yields the expected near-2x speedup.
    const input = big();

    const t0 = performance.now();
    await diagram(input, false);
    await diagram(input, false);
    const serial = performance.now() - t0;

    const t1 = performance.now();
    await Promise.all([diagram(input, false), diagram(input, false)]);
    const concurrent = performance.now() - t1;

    expect(serial / concurrent).toBeGreaterThanOrEqual(1.5);
  });
});
