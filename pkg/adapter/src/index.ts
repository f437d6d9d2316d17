export {
  DataError,
  FormatError,
  readStore,
  writeStore,
  STORE_MAGIC,
  STORE_VERSION,
  VALID_CLASS_CODES,
  type FeatureStore,
  type StoreRecord,
} from './snowfeat.js'
export { parseManifest, type Manifest, type ManifestRecord } from './manifest.js'
export { BACKENDS, getBackend, preprocess, type BackendSpec } from './backends.js'
export { decodeImage, type RawImage } from './images.js'
export {
  loadLocalModel,
  saveLocalModel,
  verifyBackendDim,
  wrapModel,
  type EmbeddingModel,
} from './model.js'
export {
  dumpFeatures,
  jobsFromDirectory,
  jobsFromManifest,
  type DumpOptions,
  type DumpResult,
  type ImageJob,
} from './features.js'
export { extractFrames, ffmpegArgs, type ExtractFramesOptions } from './frames.js'
