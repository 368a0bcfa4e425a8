#!/usr/bin/env node
/** Command-line wrapper: qkm-convert --source data.h5 --field u --out-dir out/ */

import { parseArgs } from 'node:util';

import { ConversionError, ConversionSpec, convertWithManifest } from './convert.js';

function usage(): string {
  return [
    'usage: qkm-convert --source <file.h5> --field <dataset> --out-dir <dir>',
    '                   [--length 61] [--stride N] [--segments N]',
    '                   [--downsample N] [--box-filter] [--dt 1.0]',
  ].join('\n');
}

export async function main(argv: string[]): Promise<number> {
  let parsed;
  try {
    parsed = parseArgs({
      args: argv,
      options: {
        source: { type: 'string' },
        field: { type: 'string' },
        'out-dir': { type: 'string' },
        length: { type: 'string' },
        stride: { type: 'string' },
        segments: { type: 'string' },
        downsample: { type: 'string' },
        'box-filter': { type: 'boolean' },
        dt: { type: 'string' },
        help: { type: 'boolean' },
      },
    });
  } catch (err) {
    console.error(`error: ${(err as Error).message}\n${usage()}`);
    return 2;
  }
  const v = parsed.values;
  if (v.help) {
    console.log(usage());
    return 0;
  }
  if (!v.source || !v.field || !v['out-dir']) {
    console.error(`error: --source, --field and --out-dir are required\n${usage()}`);
    return 2;
  }
  const num = (name: string, raw: string | undefined) => {
    if (raw === undefined) return undefined;
    const value = Number(raw);
    if (!Number.isFinite(value)) throw new ConversionError(`bad --${name}: ${raw}`);
    return value;
  };
  try {
    const spec: ConversionSpec = {
      source: v.source,
      field: v.field,
      outDir: v['out-dir'],
      segmentLength: num('length', v.length),
      segmentStride: num('stride', v.stride),
      segmentCount: num('segments', v.segments),
      downsampleFactor: num('downsample', v.downsample),
      boxFilter: v['box-filter'],
      dt: num('dt', v.dt),
    };
    const records = await convertWithManifest(spec);
    console.log(`wrote ${records.length} segments + manifest.csv to ${spec.outDir}`);
    return 0;
  } catch (err) {
    if (err instanceof ConversionError) {
      console.error(`error: ${err.message}`);
      return 2;
    }
    throw err;
  }
}

const invoked = process.argv[1] ?? '';
if (invoked.endsWith('cli.js') || invoked.endsWith('qkm-convert')) {
  main(process.argv.slice(2)).then((code) => process.exit(code));
}
