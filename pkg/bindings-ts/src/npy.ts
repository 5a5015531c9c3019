/**
 * Minimal NPY v1.0 codec for 2D little-endian float32 rasters (C order),
 * the float raster wire format of the core CLI.
 */

const MAGIC = Buffer.from("\x93NUMPY", "latin1");

export function encodeNpy(data: Float32Array, rows: number, cols: number): Buffer {
  const headerBody = `{'descr': '<f4', 'fortran_order': False, 'shape': (${rows}, ${cols}), }`;
  // total header (magic + version + length field + text + newline) padded to 64
  const unpadded = MAGIC.length + 2 + 2 + headerBody.length + 1;
  const padding = (64 - (unpadded % 64)) % 64;
  const headerText = headerBody + " ".repeat(padding) + "\n";

  const head = Buffer.alloc(MAGIC.length + 4);
  MAGIC.copy(head, 0);
  head[6] = 1; // major version
  head[7] = 0; // minor version
  head.writeUInt16LE(headerText.length, 8);

  const payload = Buffer.alloc(data.length * 4);
  for (let i = 0; i < data.length; i++) {
    payload.writeFloatLE(data[i], i * 4);
  }
  return Buffer.concat([head, Buffer.from(headerText, "latin1"), payload]);
}

export function decodeNpy(buf: Buffer): { rows: number; cols: number; data: Float32Array } {
  if (!buf.subarray(0, 6).equals(MAGIC)) {
    throw new Error("not an NPY file (bad magic)");
  }
  const headerLen = buf.readUInt16LE(8);
  const header = buf.subarray(10, 10 + headerLen).toString("latin1");
  if (!header.includes("'descr': '<f4'")) {
    throw new Error(`unsupported NPY dtype in header: ${header.trim()}`);
  }
  if (!header.includes("'fortran_order': False")) {
    throw new Error("unsupported NPY layout (fortran order)");
  }
  const shapeMatch = header.match(/'shape':\s*\((\d+),\s*(\d+)\)/);
  if (!shapeMatch) {
    throw new Error(`cannot parse NPY shape from header: ${header.trim()}`);
  }
  const rows = parseInt(shapeMatch[1], 10);
  const cols = parseInt(shapeMatch[2], 10);
  const body = buf.subarray(10 + headerLen);
  if (body.length < rows * cols * 4) {
    throw new Error("NPY payload shorter than its declared shape");
  }
  const data = new Float32Array(rows * cols);
  for (let i = 0; i < data.length; i++) {
    data[i] = body.readFloatLE(i * 4);
  }
  return { rows, cols, data };
}
