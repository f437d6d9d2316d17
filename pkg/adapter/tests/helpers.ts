import { execFileSync } from 'child_process'
import { mkdtempSync, writeFileSync } from 'fs'
import { tmpdir } from 'os'
import { join } from 'path'
import { PNG } from 'pngjs'
import type { FeatureStore } from '../src/snowfeat.js'

export function tempDir(prefix: string): string {
  return mkdtempSync(join(tmpdir(), prefix))
}

/** Write a solid-color RGBA png. */
export function writePng(
  path: string,
  rgb: [number, number, number],
  width = 16,
  height = 16,
) {
  const png = new PNG({ width, height })
  for (let i = 0; i < width * height; i++) {
    png.data[i * 4] = rgb[0]
    png.data[i * 4 + 1] = rgb[1]
    png.data[i * 4 + 2] = rgb[2]
    png.data[i * 4 + 3] = 255
  }
  writeFileSync(path, PNG.sync.write(png))
}

export function runPython(script: string, args: string[] = []): string {
  return execFileSync('python3', ['-c', script, ...args], { encoding: 'utf-8' })
}

/** Digest of a store as the Python toolkit sees it: header fields + f32 payload hex. */
export function pythonReadStore(storePath: string): {
  dim: number
  sourceTag: string
  n: number
  ids: number[]
  codes: number[]
  payloadHex: string
} {
  const out = runPython(
    `
import sys
from snowsum.features import read_store
store = read_store(open(sys.argv[1], 'rb').read())
print(store.dim)
print(store.source_tag)
print(len(store))
print(','.join(map(str, store.ids.tolist())))
print(','.join(map(str, store.class_codes.tolist())))
print(store.vectors.tobytes().hex())
`,
    [storePath],
  )
  const [dim, sourceTag, n, ids, codes, payloadHex] = out.trimEnd().split('\n')
  return {
    dim: parseInt(dim, 10),
    sourceTag,
    n: parseInt(n, 10),
    ids: ids === '' ? [] : ids.split(',').map(Number),
    codes: codes === '' ? [] : codes.split(',').map(Number),
    payloadHex,
  }
}

/** The f32 payload bytes of a TS-side store, in record order. */
export function payloadHex(store: FeatureStore): string {
  const parts = store.records.map(rec => {
    const buf = Buffer.allocUnsafe(rec.vector.length * 4)
    rec.vector.forEach((v, i) => buf.writeFloatLE(v, i * 4))
    return buf
  })
  return Buffer.concat(parts).toString('hex')
}
