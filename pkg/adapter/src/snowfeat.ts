/**
 * SNOWFEAT binary feature stores, little-endian:
 *
 *   8 bytes magic "SNOWFEAT", u8 version (1)
 *   u16 tag length, tag bytes (utf-8)
 *   u32 dim, u32 n_records
 *   per record: u32 id, u8 class code, dim x f32 vector
 *
 * Byte-compatible with the Python toolkit's reader and writer.
 */

export const STORE_MAGIC = 'SNOWFEAT'
export const STORE_VERSION = 1
export const VALID_CLASS_CODES = new Set([0, 1, 2, 3, 4, 5])

export interface StoreRecord {
  id: number
  classCode: number
  vector: Float32Array
}

export interface FeatureStore {
  dim: number
  sourceTag: string
  records: StoreRecord[]
}

export class FormatError extends Error {}
export class DataError extends Error {}

function validateStore(store: FeatureStore) {
  if (!Number.isInteger(store.dim) || store.dim < 1) {
    throw new DataError(`store dim must be positive, got ${store.dim}`)
  }
  const seen = new Set<number>()
  for (const rec of store.records) {
    if (rec.vector.length !== store.dim) {
      throw new DataError(
        `record ${rec.id} has vector length ${rec.vector.length}, expected ${store.dim}`,
      )
    }
    if (!VALID_CLASS_CODES.has(rec.classCode)) {
      throw new DataError(`invalid class code ${rec.classCode} on record ${rec.id}`)
    }
    if (!Number.isInteger(rec.id) || rec.id < 0 || rec.id > 0xffffffff) {
      throw new DataError(`record id ${rec.id} does not fit u32`)
    }
    if (seen.has(rec.id)) {
      throw new DataError(`duplicate record id ${rec.id}`)
    }
    seen.add(rec.id)
    for (const v of rec.vector) {
      if (!Number.isFinite(v)) {
        throw new DataError(`record ${rec.id} contains non-finite values`)
      }
    }
  }
}

export function writeStore(store: FeatureStore): Buffer {
  validateStore(store)
  const tag = Buffer.from(store.sourceTag, 'utf-8')
  if (tag.length > 0xffff) throw new DataError('source tag too long')

  const recordSize = 4 + 1 + store.dim * 4
  const out = Buffer.allocUnsafe(
    8 + 1 + 2 + tag.length + 4 + 4 + store.records.length * recordSize,
  )
  let pos = out.write(STORE_MAGIC, 0, 'ascii')
  pos = out.writeUInt8(STORE_VERSION, pos)
  pos = out.writeUInt16LE(tag.length, pos)
  pos += tag.copy(out, pos)
  pos = out.writeUInt32LE(store.dim, pos)
  pos = out.writeUInt32LE(store.records.length, pos)
  for (const rec of store.records) {
    pos = out.writeUInt32LE(rec.id, pos)
    pos = out.writeUInt8(rec.classCode, pos)
    for (const v of rec.vector) {
      pos = out.writeFloatLE(v, pos)
    }
  }
  return out
}

class Reader {
  private pos = 0

  constructor(
    private data: Buffer,
    private what: string,
  ) {}

  take(n: number): Buffer {
    if (this.pos + n > this.data.length) {
      throw new FormatError(
        `truncated ${this.what}: needed ${n} bytes at offset ${this.pos}`,
      )
    }
    const slice = this.data.subarray(this.pos, this.pos + n)
    this.pos += n
    return slice
  }

  u8(): number {
    return this.take(1).readUInt8(0)
  }

  u16(): number {
    return this.take(2).readUInt16LE(0)
  }

  u32(): number {
    return this.take(4).readUInt32LE(0)
  }

  f32Array(count: number): Float32Array {
    const raw = this.take(count * 4)
    const out = new Float32Array(count)
    for (let i = 0; i < count; i++) out[i] = raw.readFloatLE(i * 4)
    return out
  }

  expectDone() {
    if (this.pos !== this.data.length) {
      throw new FormatError(
        `trailing bytes in ${this.what}: ${this.data.length - this.pos} unread`,
      )
    }
  }
}

export function readStore(data: Buffer): FeatureStore {
  const r = new Reader(data, 'feature store')
  const magic = r.take(8).toString('ascii')
  if (magic !== STORE_MAGIC) {
    throw new FormatError(`bad magic ${JSON.stringify(magic)}, expected ${STORE_MAGIC}`)
  }
  const version = r.u8()
  if (version !== STORE_VERSION) {
    throw new FormatError(`unsupported store version ${version}`)
  }
  const sourceTag = r.take(r.u16()).toString('utf-8')
  const dim = r.u32()
  const n = r.u32()
  if (dim < 1) throw new FormatError(`invalid store dim ${dim}`)

  const records: StoreRecord[] = []
  for (let i = 0; i < n; i++) {
    const id = r.u32()
    const classCode = r.u8()
    records.push({ id, classCode, vector: r.f32Array(dim) })
  }
  r.expectDone()

  const store = { dim, sourceTag, records }
  validateStore(store)
  return store
}
