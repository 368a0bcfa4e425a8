/**
 * QKTRAJ binary trajectory format (little-endian throughout):
 *
 *   magic   7 bytes  "QKTRAJ\0"
 *   version u32      1
 *   kind    u8       0 = raw snapshots, 1 = latent (r, phi) planes
 *   rank    u8       axes of one snapshot
 *   dims    rank*u64 snapshot shape
 *   T       u64      step count (payload holds T+1 snapshots)
 *   dt      f64      uniform time step
 *   nmeta   u32      metadata pair count
 *   pairs   (u32 length + utf-8) per key, then value; keys sorted
 *   payload (T+1) * prod(dims) f64, time-major, row-major
 */

export const QKTRAJ_MAGIC = 'QKTRAJ\0';
export const QKTRAJ_VERSION = 1;

export type TrajectoryKind = 'raw' | 'latent';

const KIND_CODES: Record<TrajectoryKind, number> = { raw: 0, latent: 1 };

export interface Trajectory {
  /** Snapshot shape, excluding the leading time axis. */
  shape: number[];
  /** Step count; the payload holds steps + 1 snapshots. */
  steps: number;
  dt: number;
  metadata: Record<string, string>;
  /** Flattened time-major snapshot values, (steps + 1) * prod(shape) long. */
  values: Float64Array;
  kind: TrajectoryKind;
}

export class FormatError extends Error {}

const encoder = new TextEncoder();
const decoder = new TextDecoder();

export function encodeTrajectory(traj: Trajectory): Uint8Array {
  const perSnapshot = traj.shape.reduce((a, b) => a * b, 1);
  const expected = (traj.steps + 1) * perSnapshot;
  if (traj.values.length !== expected) {
    throw new FormatError(
      `payload has ${traj.values.length} values, expected ${expected}`
    );
  }
  const metaKeys = Object.keys(traj.metadata).sort();
  const metaBytes: Uint8Array[] = [];
  for (const key of metaKeys) {
    for (const text of [key, traj.metadata[key]]) {
      metaBytes.push(encoder.encode(text));
    }
  }
  const headerSize =
    7 + 4 + 2 + 8 * traj.shape.length + 8 + 8 + 4 +
    metaBytes.reduce((a, b) => a + 4 + b.length, 0);
  const out = new Uint8Array(headerSize + 8 * expected);
  const view = new DataView(out.buffer);
  let pos = 0;
  for (const ch of QKTRAJ_MAGIC) out[pos++] = ch.charCodeAt(0);
  view.setUint32(pos, QKTRAJ_VERSION, true); pos += 4;
  view.setUint8(pos++, KIND_CODES[traj.kind]);
  view.setUint8(pos++, traj.shape.length);
  for (const dim of traj.shape) {
    view.setBigUint64(pos, BigInt(dim), true); pos += 8;
  }
  view.setBigUint64(pos, BigInt(traj.steps), true); pos += 8;
  view.setFloat64(pos, traj.dt, true); pos += 8;
  view.setUint32(pos, metaKeys.length, true); pos += 4;
  for (const raw of metaBytes) {
    view.setUint32(pos, raw.length, true); pos += 4;
    out.set(raw, pos); pos += raw.length;
  }
  // f64 payload, byte-for-byte
  for (const v of traj.values) {
    view.setFloat64(pos, v, true); pos += 8;
  }
  return out;
}

export function decodeTrajectory(data: Uint8Array): Trajectory {
  const view = new DataView(data.buffer, data.byteOffset, data.byteLength);
  let pos = 0;
  const need = (count: number, what: string) => {
    if (pos + count > data.length) {
      throw new FormatError(`truncated file: needed ${count} bytes for ${what} at offset ${pos}`);
    }
  };
  need(7, 'magic');
  const magic = String.fromCharCode(...data.subarray(0, 7));
  pos = 7;
  if (magic !== QKTRAJ_MAGIC) throw new FormatError('bad magic at offset 0');
  need(4, 'version');
  const version = view.getUint32(pos, true); pos += 4;
  if (version !== QKTRAJ_VERSION) throw new FormatError(`unsupported version ${version}`);
  need(2, 'kind/rank');
  const kindCode = view.getUint8(pos++);
  const rank = view.getUint8(pos++);
  const kind = (Object.keys(KIND_CODES) as TrajectoryKind[]).find(
    (k) => KIND_CODES[k] === kindCode
  );
  if (kind === undefined) throw new FormatError(`unknown payload kind ${kindCode}`);
  const shape: number[] = [];
  for (let i = 0; i < rank; i++) {
    need(8, 'dims');
    shape.push(Number(view.getBigUint64(pos, true))); pos += 8;
  }
  need(16, 'steps/dt');
  const steps = Number(view.getBigUint64(pos, true)); pos += 8;
  const dt = view.getFloat64(pos, true); pos += 8;
  need(4, 'metadata count');
  const nmeta = view.getUint32(pos, true); pos += 4;
  const metadata: Record<string, string> = {};
  for (let i = 0; i < nmeta; i++) {
    const texts: string[] = [];
    for (let part = 0; part < 2; part++) {
      need(4, 'metadata length');
      const len = view.getUint32(pos, true); pos += 4;
      need(len, 'metadata text');
      texts.push(decoder.decode(data.subarray(pos, pos + len))); pos += len;
    }
    metadata[texts[0]] = texts[1];
  }
  const count = (steps + 1) * shape.reduce((a, b) => a * b, 1);
  if (data.length - pos !== 8 * count) {
    throw new FormatError(
      `payload length mismatch: expected ${8 * count} bytes, found ${data.length - pos}`
    );
  }
  const values = new Float64Array(count);
  for (let i = 0; i < count; i++) {
    values[i] = view.getFloat64(pos, true); pos += 8;
  }
  return { shape, steps, dt, metadata, values, kind };
}
