/**
 * In-memory array bindings for the topoloss core.
 *
 * Exposes the two hot-path operations to training loops holding numeric
 * buffers: persistence diagram extraction and loss-plus-gradient
 * evaluation. Buffers are marshalled through the core's wire formats (NPY
 * float rasters, PGM masks) and the CLI; results are parsed back from the
 * documented CSV/JSON schemas, so outputs are identical to direct CLI use.
 *
 * Calls never mutate their input buffers, and each call runs in its own
 * child process, so concurrent calls on distinct buffers execute in
 * parallel rather than serializing behind one interpreter.
 */

import { execFile } from "node:child_process";
import { promises as fs } from "node:fs";
import os from "node:os";
import path from "node:path";
import { promisify } from "node:util";

import { decodeNpy, encodeNpy } from "./npy.js";
import { encodeMaskPgm } from "./pgm.js";

const execFileAsync = promisify(execFile);

/** Version of this binding package; must match the core library. */
export const VERSION = "0.1.0";

const CLI = process.env.TOPOLOSS_BIN ?? "topoloss";
const MAX_BUFFER = 256 * 1024 * 1024;

export interface LikelihoodView {
  rows: number;
  cols: number;
  /** contiguous row-major float32 values in [0, 1] */
  data: Float32Array;
}

export interface MaskView {
  rows: number;
  cols: number;
  /** contiguous row-major bytes, 0 or 1 */
  data: Uint8Array;
}

export interface DiagramRecord {
  dim: number;
  birth: number;
  death: number;
  creatorRow: number;
  creatorCol: number;
  destroyerRow: number | null;
  destroyerCol: number | null;
  plotX: number;
  plotY: number;
}

export interface LossBreakdown {
  mode: string;
  pad: boolean;
  lambda: number;
  pixelLoss: number;
  topoLoss: { dim0: number; dim1: number; total: number };
  total: number;
  pairs: Array<{
    dim: number;
    lIndex: number;
    target: number | "diagonal";
    s: number;
    contribution: number;
  }>;
}

export interface LossAndGrad {
  breakdown: LossBreakdown;
  gradient: Float32Array;
  rows: number;
  cols: number;
}

function checkLikelihood(view: LikelihoodView, name: string): void {
  if (!(view.data instanceof Float32Array)) {
    throw new TypeError(`${name}: expected a Float32Array (little-endian float32) buffer`);
  }
  if (!Number.isInteger(view.rows) || !Number.isInteger(view.cols) || view.rows < 1 || view.cols < 1) {
    throw new RangeError(`${name}: invalid shape ${view.rows}x${view.cols}`);
  }
  if (view.data.length !== view.rows * view.cols) {
    throw new RangeError(
      `${name}: buffer length ${view.data.length} does not match shape ${view.rows}x${view.cols}`
    );
  }
}

function checkMask(view: MaskView, name: string): void {
  if (!(view.data instanceof Uint8Array)) {
    throw new TypeError(`${name}: expected a Uint8Array (byte) mask buffer`);
  }
  if (view.data.length !== view.rows * view.cols) {
    throw new RangeError(
      `${name}: buffer length ${view.data.length} does not match shape ${view.rows}x${view.cols}`
    );
  }
  for (let i = 0; i < view.data.length; i++) {
    if (view.data[i] > 1) {
      throw new RangeError(`${name}: mask bytes must be 0 or 1 (found ${view.data[i]} at ${i})`);
    }
  }
}

async function runCli(args: string[]): Promise<string> {
  try {
    const { stdout } = await execFileAsync(CLI, args, { maxBuffer: MAX_BUFFER });
    return stdout;
  } catch (err: any) {
    const stderr: string = err?.stderr ?? "";
    try {
      const parsed = JSON.parse(stderr.trim().split("\n").pop() ?? "");
      if (parsed && typeof parsed.error === "string") {
        throw new Error(parsed.error);
      }
    } catch (inner) {
      if (inner instanceof Error && !(inner instanceof SyntaxError)) throw inner;
    }
    throw err;
  }
}

async function withTempDir<T>(fn: (dir: string) => Promise<T>): Promise<T> {
  const dir = await fs.mkdtemp(path.join(os.tmpdir(), "topoloss-"));
  try {
    return await fn(dir);
  } finally {
    await fs.rm(dir, { recursive: true, force: true });
  }
}

/** Raw diagram CSV of an image, exactly as the core CLI serializes it. */
export async function diagramCsv(image: LikelihoodView, pad = true): Promise<string> {
  checkLikelihood(image, "image");
  return withTempDir(async (dir) => {
    const input = path.join(dir, "image.npy");
    await fs.writeFile(input, encodeNpy(image.data, image.rows, image.cols));
    const output = path.join(dir, "diagram.csv");
    await runCli(["diagram", input, pad ? "--pad" : "--no-pad", "-o", output]);
    return fs.readFile(output, "utf8");
  });
}

/** Persistence diagram records of an in-memory likelihood raster. */
export async function diagram(image: LikelihoodView, pad = true): Promise<DiagramRecord[]> {
  return parseDiagramCsv(await diagramCsv(image, pad));
}

export function parseDiagramCsv(csv: string): DiagramRecord[] {
  const lines = csv.trim().split("\n");
  const records: DiagramRecord[] = [];
  for (const line of lines.slice(1)) {
    const f = line.split(",");
    records.push({
      dim: parseInt(f[0], 10),
      birth: Number(f[1]),
      death: Number(f[2]),
      creatorRow: parseInt(f[3], 10),
      creatorCol: parseInt(f[4], 10),
      destroyerRow: f[5] === "" ? null : parseInt(f[5], 10),
      destroyerCol: f[6] === "" ? null : parseInt(f[6], 10),
      plotX: Number(f[7]),
      plotY: Number(f[8]),
    });
  }
  return records;
}

/** Serialize records back into the core's CSV schema (round-trip safe). */
export function toDiagramCsv(records: DiagramRecord[]): string {
  const header =
    "dim,birth,death,creator_row,creator_col,destroyer_row,destroyer_col,plot_x,plot_y";
  const rows = records.map((r) =>
    [
      String(r.dim),
      pyFloat(r.birth),
      pyFloat(r.death),
      String(r.creatorRow),
      String(r.creatorCol),
      r.destroyerRow === null ? "" : String(r.destroyerRow),
      r.destroyerCol === null ? "" : String(r.destroyerCol),
      pyFloat(r.plotX),
      pyFloat(r.plotY),
    ].join(",")
  );
  return [header, ...rows].join("\n") + "\n";
}

/** Shortest round-trip decimal, matching the core's float repr for plain decimals. */
function pyFloat(x: number): string {
  if (Number.isInteger(x) && Math.abs(x) < 1e16) {
    return x.toFixed(1);
  }
  return String(x);
}

/** Loss breakdown and topology gradient for an in-memory pair of rasters. */
export async function lossAndGrad(
  likelihood: LikelihoodView,
  target: MaskView,
  lambda = 0.01,
  mode: "vanilla" | "spatial" = "spatial",
  pad = true
): Promise<LossAndGrad> {
  checkLikelihood(likelihood, "likelihood");
  checkMask(target, "target");
  if (likelihood.rows !== target.rows || likelihood.cols !== target.cols) {
    throw new RangeError(
      `shape mismatch: likelihood ${likelihood.rows}x${likelihood.cols} vs target ${target.rows}x${target.cols}`
    );
  }
  return withTempDir(async (dir) => {
    const lPath = path.join(dir, "L.npy");
    const tPath = path.join(dir, "T.pgm");
    await fs.writeFile(lPath, encodeNpy(likelihood.data, likelihood.rows, likelihood.cols));
    await fs.writeFile(tPath, encodeMaskPgm(target.data, target.rows, target.cols));

    const padFlag = pad ? "--pad" : "--no-pad";
    const gPath = path.join(dir, "grad.npy");
    const [lossOut] = await Promise.all([
      runCli(["loss", lPath, tPath, "--lambda", String(lambda), "--mode", mode, padFlag]),
      runCli(["grad", lPath, tPath, "--mode", mode, padFlag, "-o", gPath]),
    ]);

    const doc = JSON.parse(lossOut);
    const grad = decodeNpy(await fs.readFile(gPath));
    return {
      breakdown: {
        mode: doc.mode,
        pad: doc.pad,
        lambda: doc.lambda,
        pixelLoss: doc.pixel_loss,
        topoLoss: doc.topo_loss,
        total: doc.total,
        pairs: doc.pairs.map((p: any) => ({
          dim: p.dim,
          lIndex: p.l_index,
          target: p.target,
          s: p.s,
          contribution: p.contribution,
        })),
      },
      gradient: grad.data,
      rows: grad.rows,
      cols: grad.cols,
    };
  });
}

/** Version string reported by the installed core CLI. */
export async function coreVersion(): Promise<string> {
  const out = await runCli(["--version"]);
  const m = out.match(/version\s+([0-9][\w.+-]*)/);
  if (!m) {
    throw new Error(`cannot parse core version from: ${out.trim()}`);
  }
  return m[1];
}
