/**
 * SNOWMAN dataset manifests: a `SNOWMAN 1 <name>` header followed by one
 * tab-separated `<id>\t<path>\t<class code>` line per image.
 */

import { DataError, VALID_CLASS_CODES } from './snowfeat.js'

export const MANIFEST_MAGIC = 'SNOWMAN'
export const MANIFEST_VERSION = 1

export interface ManifestRecord {
  id: string
  path: string
  classCode: number
}

export interface Manifest {
  name: string
  records: ManifestRecord[]
}

export function parseManifest(text: string): Manifest {
  const lines = text.split(/\r\n|\n/)
  if (lines.length === 0 || lines[0] === '') {
    throw new DataError('empty manifest: missing header line')
  }
  const head = lines[0].split(' ')
  if (head.length < 3 || head[0] !== MANIFEST_MAGIC) {
    throw new DataError(`bad manifest header ${JSON.stringify(lines[0])}`)
  }
  if (head[1] !== String(MANIFEST_VERSION)) {
    throw new DataError(`unsupported manifest version ${JSON.stringify(head[1])}`)
  }
  const name = head.slice(2).join(' ')

  const records: ManifestRecord[] = []
  const seen = new Set<string>()
  let index = 0
  for (const line of lines.slice(1)) {
    if (line === '') continue
    const parts = line.split('\t')
    if (parts.length !== 3) {
      throw new DataError(`malformed record line at record ${index}: ${JSON.stringify(line)}`)
    }
    const [id, path, codeText] = parts
    if (!/^-?\d+$/.test(codeText)) {
      throw new DataError(`non-integer class code ${JSON.stringify(codeText)} at record ${index}`)
    }
    const classCode = parseInt(codeText, 10)
    if (!VALID_CLASS_CODES.has(classCode)) {
      throw new DataError(`unknown class code ${classCode} at record ${index}`)
    }
    if (!id) throw new DataError(`empty id at record ${index}`)
    if (seen.has(id)) throw new DataError(`duplicate id ${JSON.stringify(id)} at record ${index}`)
    if (!path) throw new DataError(`empty path at record ${index}`)
    seen.add(id)
    records.push({ id, path, classCode })
    index++
  }
  return { name, records }
}
