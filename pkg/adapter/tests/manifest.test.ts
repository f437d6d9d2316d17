import { describe, expect, it } from 'vitest'
import { parseManifest } from '../src/manifest.js'

const HEADER = 'SNOWMAN 1 SNOW'

describe('parseManifest', () => {
  it('parses records and keeps order', () => {
    const text = `${HEADER}\nimg1\tout/img1.jpg\t3\nimg2\twide/img2.jpg\t4\n`
    const manifest = parseManifest(text)
    expect(manifest.name).toBe('SNOW')
    expect(manifest.records).toEqual([
      { id: 'img1', path: 'out/img1.jpg', classCode: 3 },
      { id: 'img2', path: 'wide/img2.jpg', classCode: 4 },
    ])
  })

  it('accepts an empty record list and blank lines', () => {
    expect(parseManifest(`${HEADER}\n`).records).toHaveLength(0)
    expect(parseManifest(`${HEADER}\n\nimg\ta.png\t0\n\n`).records).toHaveLength(1)
  })

  it('keeps spaces in the dataset name', () => {
    expect(parseManifest('SNOWMAN 1 my data set\n').name).toBe('my data set')
  })

  it('rejects bad headers and versions', () => {
    expect(() => parseManifest('')).toThrow(/empty manifest/)
    expect(() => parseManifest('BOGUS 1 SNOW\n')).toThrow(/bad manifest header/)
    expect(() => parseManifest('SNOWMAN 2 SNOW\n')).toThrow(/unsupported manifest version/)
  })

  it('rejects malformed records', () => {
    expect(() => parseManifest(`${HEADER}\nonly-two\tfields\n`)).toThrow(
      /malformed record line at record 0/,
    )
    expect(() => parseManifest(`${HEADER}\nid\tp.png\tx\n`)).toThrow(
      /non-integer class code/,
    )
    expect(() => parseManifest(`${HEADER}\nid\tp.png\t7\n`)).toThrow(
      /unknown class code 7 at record 0/,
    )
    expect(() => parseManifest(`${HEADER}\n\tp.png\t0\n`)).toThrow(/empty id/)
    expect(() => parseManifest(`${HEADER}\nid\t\t0\n`)).toThrow(/empty path/)
    expect(() =>
      parseManifest(`${HEADER}\na\tp.png\t0\na\tq.png\t1\n`),
    ).toThrow(/duplicate id "a" at record 1/)
  })
})
