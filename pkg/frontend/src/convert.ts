/**
 * HDF5-to-QKTRAJ conversion: segment extraction, optional spatial
 * downsampling, and a manifest with deterministic 8:1:1 split tags.
 *
 * The source dataset's leading axis is time; every other axis is spatial.
 * f64 sources are copied value-losslessly; f32 sources are widened to f64
 * and flagged in the segment metadata.
 */

import * as fs from 'node:fs';
import * as path from 'node:path';
import h5wasm from 'h5wasm/node';

import { Trajectory, encodeTrajectory } from './qktraj.js';

export class ConversionError extends Error {}

export interface ConversionSpec {
  source: string;
  /** Dataset path inside the HDF5 file, e.g. "concentration_a". */
  field: string;
  outDir: string;
  /** Snapshots per segment; a segment of length L covers T = L - 1 steps. */
  segmentLength?: number;
  /** Start-to-start distance between segments; defaults to segmentLength. */
  segmentStride?: number;
  /** Maximum number of segments; default extracts as many as fit. */
  segmentCount?: number;
  /** Keep every factor-th grid point along each spatial axis. */
  downsampleFactor?: number;
  /** Average factor-sized blocks instead of strided subsampling. */
  boxFilter?: boolean;
  dt?: number;
}

export interface SegmentRecord {
  file: string;
  segment: number;
  t0: number;
  dt: number;
  field: string;
  split: 'train' | 'val' | 'test';
}

interface SourceField {
  shape: number[];
  dtype: string;
  values: Float64Array;
  widened: boolean;
}

let h5ready: Promise<unknown> | null = null;

async function ensureReady() {
  if (h5ready === null) h5ready = h5wasm.ready;
  await h5ready;
}

function listDatasets(group: any, prefix: string, out: string[]) {
  for (const key of group.keys()) {
    const item = group.get(key);
    const full = prefix === '' ? key : `${prefix}/${key}`;
    if (typeof item.keys === 'function' && item.type === 'Group') {
      listDatasets(item, full, out);
    } else {
      out.push(full);
    }
  }
}

async function readField(source: string, field: string): Promise<SourceField> {
  await ensureReady();
  if (!fs.existsSync(source)) {
    throw new ConversionError(`source file not found: ${source}`);
  }
  const file = new h5wasm.File(source, 'r');
  try {
    const dataset = file.get(field) as any;
    if (dataset === null || typeof dataset.slice !== 'function') {
      const available: string[] = [];
      listDatasets(file, '', available);
      throw new ConversionError(
        `field ${field} not found in ${source}; available: ${available.join(', ')}`
      );
    }
    const dtype = String(dataset.dtype);
    if (dtype !== '<d' && dtype !== '<f') {
      throw new ConversionError(`field ${field} has unsupported dtype ${dtype}; need f32 or f64`);
    }
    const raw = dataset.value as Float64Array | Float32Array;
    const widened = dtype === '<f';
    const values = widened ? Float64Array.from(raw) : (raw as Float64Array);
    return { shape: dataset.shape as number[], dtype, values, widened };
  } finally {
    file.close();
  }
}

function downsample(
  values: Float64Array,
  spatial: number[],
  factor: number,
  boxFilter: boolean
): { values: Float64Array; spatial: number[] } {
  for (const dim of spatial) {
    if (dim % factor !== 0) {
      throw new ConversionError(
        `downsample factor ${factor} does not divide grid dims ${spatial.join('x')}`
      );
    }
  }
  const outSpatial = spatial.map((d) => d / factor);
  const perIn = spatial.reduce((a, b) => a * b, 1);
  const perOut = outSpatial.reduce((a, b) => a * b, 1);
  const snapshots = values.length / perIn;
  const out = new Float64Array(snapshots * perOut);
  const rank = spatial.length;
  const inStrides = new Array<number>(rank);
  const outStrides = new Array<number>(rank);
  for (let axis = rank - 1, s = 1, so = 1; axis >= 0; axis--) {
    inStrides[axis] = s; s *= spatial[axis];
    outStrides[axis] = so; so *= outSpatial[axis];
  }
  const blockSize = factor ** rank;
  const idx = new Array<number>(rank).fill(0);
  for (let snap = 0; snap < snapshots; snap++) {
    const inBase = snap * perIn;
    const outBase = snap * perOut;
    idx.fill(0);
    for (let flat = 0; flat < perOut; flat++) {
      let inOffset = 0;
      for (let axis = 0; axis < rank; axis++) inOffset += idx[axis] * factor * inStrides[axis];
      let value: number;
      if (boxFilter) {
        let acc = 0;
        const block = new Array<number>(rank).fill(0);
        for (let b = 0; b < blockSize; b++) {
          let off = inOffset;
          for (let axis = 0; axis < rank; axis++) off += block[axis] * inStrides[axis];
          acc += values[inBase + off];
          for (let axis = rank - 1; axis >= 0; axis--) {
            if (++block[axis] < factor) break;
            block[axis] = 0;
          }
        }
        value = acc / blockSize;
      } else {
        value = values[inBase + inOffset];
      }
      out[outBase + flat] = value;
      for (let axis = rank - 1; axis >= 0; axis--) {
        if (++idx[axis] < outSpatial[axis]) break;
        idx[axis] = 0;
      }
    }
  }
  return { values: out, spatial: outSpatial };
}

/**
 * Deterministic 8:1:1 split by segment order: leading segments are train,
 * then val, then test. With at least three segments val and test each get
 * at least one entry.
 */
export function splitTag(index: number, total: number): 'train' | 'val' | 'test' {
  if (total < 3) return 'train';
  const nVal = Math.max(1, Math.floor(total / 10));
  const nTest = Math.max(1, Math.floor(total / 10));
  const nTrain = total - nVal - nTest;
  if (index < nTrain) return 'train';
  if (index < nTrain + nVal) return 'val';
  return 'test';
}

export async function convert(spec: ConversionSpec): Promise<SegmentRecord[]> {
  const length = spec.segmentLength ?? 61;
  if (length < 2) throw new ConversionError(`segment length must be >= 2, got ${length}`);
  const stride = spec.segmentStride ?? length;
  if (stride < 1) throw new ConversionError(`segment stride must be >= 1, got ${stride}`);
  const factor = spec.downsampleFactor ?? 1;
  if (factor < 1) throw new ConversionError(`downsample factor must be >= 1, got ${factor}`);
  const dt = spec.dt ?? 1.0;

  const source = await readField(spec.source, spec.field);
  if (source.shape.length < 2) {
    throw new ConversionError(
      `field ${spec.field} must have a time axis plus spatial axes, got shape ${source.shape.join('x')}`
    );
  }
  const snapshots = source.shape[0];
  let spatial = source.shape.slice(1);
  if (snapshots < length) {
    throw new ConversionError(
      `source holds ${snapshots} snapshots, shorter than one segment of ${length}`
    );
  }
  const maxSegments = Math.floor((snapshots - length) / stride) + 1;
  const total = Math.min(spec.segmentCount ?? maxSegments, maxSegments);

  let values = source.values;
  if (factor > 1) {
    ({ values, spatial } = downsample(values, spatial, factor, spec.boxFilter ?? false));
  }
  const perSnapshot = spatial.reduce((a, b) => a * b, 1);

  fs.mkdirSync(spec.outDir, { recursive: true });
  const base = path.basename(spec.source).replace(/\.(h5|hdf5)$/i, '');
  const fieldTag = spec.field.replace(/\//g, '_');
  const records: SegmentRecord[] = [];
  for (let seg = 0; seg < total; seg++) {
    const start = seg * stride;
    const metadata: Record<string, string> = {
      source: spec.source,
      field: spec.field,
      segment_index: String(seg),
      t0: String(start * dt),
      source_dtype: source.dtype,
    };
    if (source.widened) metadata.widened = 'f32-to-f64';
    if (factor > 1) {
      metadata.downsample_factor = String(factor);
      metadata.downsample_method = spec.boxFilter ? 'box-filter' : 'strided';
    }
    const traj: Trajectory = {
      shape: spatial,
      steps: length - 1,
      dt,
      metadata,
      values: values.subarray(start * perSnapshot, (start + length) * perSnapshot),
      kind: 'raw',
    };
    const name = `${base}__${fieldTag}__seg${String(seg).padStart(3, '0')}.qkt`;
    fs.writeFileSync(path.join(spec.outDir, name), encodeTrajectory(traj));
    records.push({
      file: name,
      segment: seg,
      t0: start * dt,
      dt,
      field: spec.field,
      split: splitTag(seg, total),
    });
  }
  return records;
}

export function manifestCsv(records: SegmentRecord[]): string {
  const lines = ['file,segment,t0,dt,field,split'];
  for (const r of records) {
    lines.push(`${r.file},${r.segment},${r.t0},${r.dt},${r.field},${r.split}`);
  }
  return lines.join('\n') + '\n';
}

export async function convertWithManifest(spec: ConversionSpec): Promise<SegmentRecord[]> {
  const records = await convert(spec);
  fs.writeFileSync(path.join(spec.outDir, 'manifest.csv'), manifestCsv(records));
  return records;
}
