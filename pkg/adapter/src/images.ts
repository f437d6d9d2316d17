import { readFileSync } from 'fs'
import { extname } from 'path'
import { PNG } from 'pngjs'
import jpeg from 'jpeg-js'
import { DataError } from './snowfeat.js'

/** Decoded pixels, always RGBA row-major. */
export interface RawImage {
  width: number
  height: number
  data: Uint8Array
}

export function decodeImage(path: string): RawImage {
  const ext = extname(path).toLowerCase()
  const bytes = readFileSync(path)
  if (ext === '.png') {
    const png = PNG.sync.read(bytes)
    return { width: png.width, height: png.height, data: new Uint8Array(png.data) }
  }
  if (ext === '.jpg' || ext === '.jpeg') {
    const img = jpeg.decode(bytes, { useTArray: true, maxMemoryUsageInMB: 1024 })
    return { width: img.width, height: img.height, data: img.data }
  }
  throw new DataError(`unsupported image type ${JSON.stringify(ext)} for ${path}`)
}
