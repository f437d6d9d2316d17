/**
 * The dump-features pipeline: decode each listed image, apply the backend's
 * preprocessing, run the embedding model, and write one SNOWFEAT store.
 * Record ids are the 0-based position in the input list; unreadable images
 * are skipped with a warning, matching the toolkit's extractor behavior.
 */

import { readdirSync, statSync, writeFileSync } from 'fs'
import { join } from 'path'
import type { BackendSpec } from './backends.js'
import { preprocess } from './backends.js'
import { decodeImage } from './images.js'
import type { Manifest } from './manifest.js'
import type { EmbeddingModel } from './model.js'
import { loadLocalModel, verifyBackendDim } from './model.js'
import { DataError, writeStore, type StoreRecord } from './snowfeat.js'

export interface ImageJob {
  name: string
  path: string
  classCode: number
}

export interface DumpResult {
  extracted: number
  skipped: string[]
  outPath: string
}

export function jobsFromManifest(manifest: Manifest, root: string): ImageJob[] {
  if (manifest.records.length === 0) throw new DataError('manifest has no records')
  return manifest.records.map(rec => ({
    name: rec.id,
    path: join(root, rec.path),
    classCode: rec.classCode,
  }))
}

export function jobsFromDirectory(dir: string): ImageJob[] {
  let entries: string[]
  try {
    entries = readdirSync(dir)
  } catch {
    throw new DataError(`not a directory: ${dir}`)
  }
  const files = entries
    .map(name => join(dir, name))
    .filter(p => statSync(p).isFile())
    .sort()
  if (files.length === 0) throw new DataError(`no files in ${dir}`)
  return files.map(path => ({ name: path, path, classCode: 0 }))
}

export interface DumpOptions {
  backend: BackendSpec
  jobs: ImageJob[]
  out: string
  /** Directory holding model.json + weight shards; ignored when `model` is given. */
  weightsDir?: string
  /** Pre-loaded model, mainly for tests. */
  model?: EmbeddingModel
}

export async function dumpFeatures(opts: DumpOptions): Promise<DumpResult> {
  const { backend, jobs, out } = opts
  let model = opts.model
  let ownModel = false
  if (!model) {
    if (!opts.weightsDir) throw new DataError('dump-features needs --weights or an injected model')
    model = await loadLocalModel(opts.weightsDir)
    ownModel = true
  }
  try {
    await verifyBackendDim(model, backend)

    const records: StoreRecord[] = []
    const skipped: string[] = []
    for (let i = 0; i < jobs.length; i++) {
      const job = jobs[i]
      let vector: Float32Array
      try {
        const input = preprocess(decodeImage(job.path), backend)
        try {
          vector = await model.embed(input)
        } finally {
          input.dispose()
        }
      } catch (err) {
        skipped.push(`skipped ${job.name}: ${(err as Error).message}`)
        continue
      }
      records.push({ id: i, classCode: job.classCode, vector })
    }
    if (records.length === 0) throw new DataError('no readable images')

    const store = { dim: backend.dim, sourceTag: backend.tag, records }
    writeFileSync(out, writeStore(store))
    return { extracted: records.length, skipped, outPath: out }
  } finally {
    if (ownModel) model.dispose()
  }
}
