/**
 * Feature-source registry. Each backend pins the network's embedding layer
 * dimension, its square input size, and its published preprocessing
 * convention; stores it produces are tagged with the backend name.
 */

import * as tf from '@tensorflow/tfjs'
import { DataError } from './snowfeat.js'
import type { RawImage } from './images.js'

export type Preprocessing = 'inception' | 'caffe'

export interface BackendSpec {
  tag: string
  dim: number
  inputSize: number
  preprocessing: Preprocessing
}

export const BACKENDS: Record<string, BackendSpec> = {
  'inceptionv3-pool': {
    tag: 'inceptionv3-pool',
    dim: 2048,
    inputSize: 299,
    preprocessing: 'inception',
  },
  'vgg19-fc1': {
    tag: 'vgg19-fc1',
    dim: 4096,
    inputSize: 224,
    preprocessing: 'caffe',
  },
  'vgg19-fc2': {
    tag: 'vgg19-fc2',
    dim: 4096,
    inputSize: 224,
    preprocessing: 'caffe',
  },
}

export function getBackend(tag: string): BackendSpec {
  const spec = BACKENDS[tag]
  if (!spec) {
    const known = Object.keys(BACKENDS).sort().join(', ')
    throw new DataError(`unknown backend ${JSON.stringify(tag)}; available: ${known}`)
  }
  return spec
}

// ImageNet channel means in BGR order, the VGG convention.
const CAFFE_BGR_MEANS = [103.939, 116.779, 123.68]

/**
 * Decode -> [1, size, size, 3] float tensor: bilinear resize, then the
 * backend's normalization (inception maps 0..255 to -1..1; caffe flips RGB
 * to BGR and subtracts the ImageNet channel means without scaling).
 */
export function preprocess(image: RawImage, spec: BackendSpec): tf.Tensor4D {
  return tf.tidy(() => {
    const rgb = rgbFromRgba(image)
    let x = tf.tensor3d(rgb, [image.height, image.width, 3], 'float32')
    x = tf.image.resizeBilinear(x, [spec.inputSize, spec.inputSize], true)
    if (spec.preprocessing === 'inception') {
      x = x.div(127.5).sub(1)
    } else {
      x = tf.reverse(x, -1).sub(tf.tensor1d(CAFFE_BGR_MEANS))
    }
    return x.expandDims(0) as tf.Tensor4D
  })
}

function rgbFromRgba(image: RawImage): Float32Array {
  const n = image.width * image.height
  if (image.data.length !== n * 4) {
    throw new DataError(
      `image buffer length ${image.data.length} does not match ${image.width}x${image.height} RGBA`,
    )
  }
  const rgb = new Float32Array(n * 3)
  for (let i = 0; i < n; i++) {
    rgb[i * 3] = image.data[i * 4]
    rgb[i * 3 + 1] = image.data[i * 4 + 1]
    rgb[i * 3 + 2] = image.data[i * 4 + 2]
  }
  return rgb
}
