/** Binary PGM (P5, maxval 255) writer for 0/1 mask buffers. */

export function encodeMaskPgm(data: Uint8Array, rows: number, cols: number): Buffer {
  const header = Buffer.from(`P5\n${cols} ${rows}\n255\n`, "latin1");
  const payload = Buffer.alloc(data.length);
  for (let i = 0; i < data.length; i++) {
    payload[i] = data[i] ? 255 : 0;
  }
  return Buffer.concat([header, payload]);
}
