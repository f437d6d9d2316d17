/**
 * Local-filesystem model loading for plain @tensorflow/tfjs (no tfjs-node
 * native bindings): reads a converted model directory (model.json plus
 * weight shards) into memory and hands it to the runtime, then verifies the
 * embedding dimension the backend promises.
 */

import { readFileSync, writeFileSync, mkdirSync } from 'fs'
import { dirname, join } from 'path'
import * as tf from '@tensorflow/tfjs'
import { DataError } from './snowfeat.js'
import type { BackendSpec } from './backends.js'

export interface EmbeddingModel {
  embed(input: tf.Tensor4D): Promise<Float32Array>
  dispose(): void
}

interface ModelJson {
  format?: string
  modelTopology: object
  weightsManifest: { paths: string[]; weights: tf.io.WeightsManifestEntry[] }[]
}

function readArtifacts(dir: string) {
  let json: ModelJson
  try {
    json = JSON.parse(readFileSync(join(dir, 'model.json'), 'utf-8'))
  } catch (err) {
    throw new DataError(`cannot read model.json in ${dir}: ${(err as Error).message}`)
  }
  const weightSpecs: tf.io.WeightsManifestEntry[] = []
  const shards: Buffer[] = []
  for (const group of json.weightsManifest ?? []) {
    weightSpecs.push(...group.weights)
    for (const p of group.paths) {
      shards.push(readFileSync(join(dir, p)))
    }
  }
  const blob = Buffer.concat(shards)
  const weightData = blob.buffer.slice(blob.byteOffset, blob.byteOffset + blob.byteLength)
  return { json, weightSpecs, weightData }
}

export async function loadLocalModel(dir: string): Promise<EmbeddingModel> {
  const { json, weightSpecs, weightData } = readArtifacts(dir)
  const handler = tf.io.fromMemory({
    modelTopology: json.modelTopology,
    weightSpecs,
    weightData,
  })
  const model =
    json.format === 'graph-model'
      ? await tf.loadGraphModel(handler)
      : await tf.loadLayersModel(handler)
  return wrapModel(model)
}

/** Adapt an in-memory layers or graph model to the embedding interface. */
export function wrapModel(model: tf.LayersModel | tf.GraphModel): EmbeddingModel {
  return {
    async embed(input: tf.Tensor4D): Promise<Float32Array> {
      const out = tf.tidy(() => {
        const y = model.predict(input)
        const t = Array.isArray(y) ? y[0] : (y as tf.Tensor)
        return t.flatten()
      })
      try {
        return (await out.data()) as Float32Array
      } finally {
        out.dispose()
      }
    },
    dispose() {
      if ('dispose' in model) model.dispose()
    },
  }
}

/** Run a zero image through the model and check it emits spec.dim values. */
export async function verifyBackendDim(model: EmbeddingModel, spec: BackendSpec): Promise<void> {
  const probe = tf.zeros([1, spec.inputSize, spec.inputSize, 3]) as tf.Tensor4D
  try {
    const values = await model.embed(probe)
    if (values.length !== spec.dim) {
      throw new DataError(
        `backend ${spec.tag} expects ${spec.dim}-d embeddings, model produced ${values.length}`,
      )
    }
  } finally {
    probe.dispose()
  }
}

/**
 * Write a model to `${dir}/model.json` + `${dir}/weights.bin` in the layout
 * loadLocalModel reads. Stands in for tfjs-node's file:// save handler.
 */
export async function saveLocalModel(model: tf.LayersModel, dir: string): Promise<void> {
  let artifacts: tf.io.ModelArtifacts | undefined
  await model.save(
    tf.io.withSaveHandler(async a => {
      artifacts = a
      return {
        modelArtifactsInfo: { dateSaved: new Date(), modelTopologyType: 'JSON' },
      }
    }),
  )
  if (!artifacts) throw new DataError('model save produced no artifacts')
  const weightData = artifacts.weightData as ArrayBuffer
  mkdirSync(dir, { recursive: true })
  writeFileSync(
    join(dir, 'model.json'),
    JSON.stringify({
      format: artifacts.format,
      generatedBy: artifacts.generatedBy,
      modelTopology: artifacts.modelTopology,
      weightsManifest: [{ paths: ['weights.bin'], weights: artifacts.weightSpecs }],
    }),
  )
  writeFileSync(join(dir, 'weights.bin'), Buffer.from(weightData))
}

export function ensureParentDir(path: string) {
  mkdirSync(dirname(path), { recursive: true })
}
