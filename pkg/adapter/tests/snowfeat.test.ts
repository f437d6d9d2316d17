import { readFileSync, writeFileSync } from 'fs'
import { join } from 'path'
import { describe, expect, it } from 'vitest'
import {
  DataError,
  FormatError,
  readStore,
  writeStore,
  type FeatureStore,
} from '../src/snowfeat.js'
import { payloadHex, pythonReadStore, runPython, tempDir } from './helpers.js'

function sampleStore(n = 4, dim = 3): FeatureStore {
  const records = []
  for (let i = 0; i < n; i++) {
    const vector = new Float32Array(dim)
    for (let j = 0; j < dim; j++) vector[j] = Math.fround(i * 10 + j * 0.5)
    records.push({ id: i, classCode: i % 6, vector })
  }
  return { dim, sourceTag: 'unit-test', records }
}

describe('writeStore / readStore', () => {
  it('round-trips bit-exactly', () => {
    const store = sampleStore()
    const bytes = writeStore(store)
    const back = readStore(bytes)
    expect(back.dim).toBe(store.dim)
    expect(back.sourceTag).toBe(store.sourceTag)
    expect(back.records).toHaveLength(store.records.length)
    for (let i = 0; i < store.records.length; i++) {
      expect(back.records[i].id).toBe(store.records[i].id)
      expect(back.records[i].classCode).toBe(store.records[i].classCode)
      expect([...back.records[i].vector]).toEqual([...store.records[i].vector])
    }
    expect(writeStore(back).equals(bytes)).toBe(true)
  })

  it('round-trips an empty store and a unicode tag', () => {
    const store: FeatureStore = { dim: 7, sourceTag: 'süß-🏏', records: [] }
    const back = readStore(writeStore(store))
    expect(back.sourceTag).toBe('süß-🏏')
    expect(back.records).toHaveLength(0)
  })

  it('lays out the header exactly', () => {
    const store: FeatureStore = {
      dim: 1,
      sourceTag: 'ab',
      records: [{ id: 258, classCode: 5, vector: new Float32Array([1.0]) }],
    }
    const bytes = writeStore(store)
    const expected = Buffer.concat([
      Buffer.from('SNOWFEAT', 'ascii'),
      Buffer.from([1]), // version
      Buffer.from([2, 0]), // tag length u16 LE
      Buffer.from('ab', 'ascii'),
      Buffer.from([1, 0, 0, 0]), // dim
      Buffer.from([1, 0, 0, 0]), // n records
      Buffer.from([2, 1, 0, 0]), // id 258
      Buffer.from([5]), // class code
      Buffer.from([0, 0, 0x80, 0x3f]), // f32 1.0
    ])
    expect(bytes.equals(expected)).toBe(true)
  })

  it('rejects corrupt input', () => {
    const bytes = writeStore(sampleStore())
    expect(() => readStore(Buffer.concat([Buffer.from('XXXXXXXX'), bytes.subarray(8)])))
      .toThrow(FormatError)
    const bumped = Buffer.from(bytes)
    bumped[8] = 9
    expect(() => readStore(bumped)).toThrow(/unsupported store version 9/)
    expect(() => readStore(bytes.subarray(0, bytes.length - 2))).toThrow(/truncated/)
    expect(() => readStore(Buffer.concat([bytes, Buffer.from([0])]))).toThrow(/trailing/)
  })

  it('rejects invalid stores before writing', () => {
    const good = sampleStore()
    expect(() =>
      writeStore({ ...good, records: [...good.records, { ...good.records[0] }] }),
    ).toThrow(DataError)
    expect(() =>
      writeStore({
        dim: 2,
        sourceTag: 't',
        records: [{ id: 0, classCode: 9, vector: new Float32Array(2) }],
      }),
    ).toThrow(/invalid class code/)
    expect(() =>
      writeStore({
        dim: 2,
        sourceTag: 't',
        records: [{ id: 0, classCode: 0, vector: new Float32Array([1, NaN]) }],
      }),
    ).toThrow(/non-finite/)
    expect(() =>
      writeStore({
        dim: 3,
        sourceTag: 't',
        records: [{ id: 0, classCode: 0, vector: new Float32Array(2) }],
      }),
    ).toThrow(/vector length 2, expected 3/)
  })
})

describe('cross-language compatibility', () => {
  it('stores written here load in the Python toolkit with identical payloads', () => {
    const store = sampleStore(10, 6)
    const dir = tempDir('snowfeat-')
    const path = join(dir, 'ts-written.store')
    writeFileSync(path, writeStore(store))

    const seen = pythonReadStore(path)
    expect(seen.dim).toBe(6)
    expect(seen.sourceTag).toBe('unit-test')
    expect(seen.n).toBe(10)
    expect(seen.ids).toEqual(store.records.map(r => r.id))
    expect(seen.codes).toEqual(store.records.map(r => r.classCode))
    expect(seen.payloadHex).toBe(payloadHex(store))
  })

  it('stores written by the Python toolkit load here byte-exactly', () => {
    const dir = tempDir('snowfeat-')
    const path = join(dir, 'py-written.store')
    runPython(
      `
import sys
import numpy as np
from snowsum.features import build_store, write_store
rng = np.random.default_rng(5)
records = [(i, i % 6, rng.standard_normal(7).astype(np.float32)) for i in range(10)]
store = build_store(7, "pyside", records)
open(sys.argv[1], "wb").write(write_store(store))
`,
      [path],
    )

    const bytes = readFileSync(path)
    const store = readStore(bytes)
    expect(store.dim).toBe(7)
    expect(store.sourceTag).toBe('pyside')
    expect(store.records).toHaveLength(10)
    expect(store.records.map(r => r.id)).toEqual([...Array(10).keys()])
    expect(writeStore(store).equals(bytes)).toBe(true)
  })
})
