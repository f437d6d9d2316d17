#!/usr/bin/env node
/**
 * snowsum-adapter: produce SNOWFEAT stores with pre-trained deep features,
 * and split videos into sequentially numbered frames.
 *
 * Exit codes: 0 ok, 1 usage error, 2 data/format error.
 */

import { readFileSync } from 'fs'
import { dirname } from 'path'
import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { getBackend } from './backends.js'
import { dumpFeatures, jobsFromDirectory, jobsFromManifest } from './features.js'
import { extractFrames } from './frames.js'
import { parseManifest } from './manifest.js'
import { DataError, FormatError } from './snowfeat.js'

/** Bad flags or commands; yargs reports these via the fail handler. */
class UsageError extends Error {}

async function cmdDumpFeatures(argv: {
  backend: string
  manifest?: string
  images?: string
  root?: string
  weights: string
  out: string
}) {
  const backend = getBackend(argv.backend)
  let jobs
  if (argv.manifest) {
    const manifest = parseManifest(readFileSync(argv.manifest, 'utf-8'))
    jobs = jobsFromManifest(manifest, argv.root ?? dirname(argv.manifest))
  } else if (argv.images) {
    jobs = jobsFromDirectory(argv.images)
  } else {
    throw new DataError('dump-features needs --manifest or --images')
  }

  const result = await dumpFeatures({
    backend,
    jobs,
    out: argv.out,
    weightsDir: argv.weights,
  })
  console.log(`SNOWADAPT 1 backend=${backend.tag} dim=${backend.dim}`)
  console.log(
    `images=${jobs.length} extracted=${result.extracted} skipped=${result.skipped.length}`,
  )
  for (const line of result.skipped) console.log(line)
  console.log(`written ${result.outPath}`)
}

async function cmdExtractFrames(argv: { video: string; outDir: string; fps: number }) {
  const frames = await extractFrames({
    video: argv.video,
    outDir: argv.outDir,
    fps: argv.fps,
  })
  console.log(`SNOWFRAMES 1 fps=${argv.fps}`)
  console.log(`frames=${frames.length}`)
  console.log(`written ${argv.outDir}`)
}

export async function main(args: string[]): Promise<number> {
  const parser = yargs(args)
    .scriptName('snowsum-adapter')
    .command(
      'dump-features',
      'extract deep features into a SNOWFEAT store',
      y =>
        y
          .option('backend', { type: 'string', demandOption: true })
          .option('manifest', { type: 'string', describe: 'manifest with per-image class codes' })
          .option('images', { type: 'string', describe: 'directory of images (class code 0)' })
          .option('root', { type: 'string', describe: 'base directory for manifest paths' })
          .option('weights', { type: 'string', demandOption: true, describe: 'model directory' })
          .option('out', { type: 'string', demandOption: true })
          .conflicts('manifest', 'images'),
      async argv => cmdDumpFeatures(argv as Parameters<typeof cmdDumpFeatures>[0]),
    )
    .command(
      'extract-frames',
      'split a video into numbered frame images',
      y =>
        y
          .option('video', { type: 'string', demandOption: true })
          .option('out-dir', { type: 'string', demandOption: true })
          .option('fps', { type: 'number', default: 25 }),
      async argv => cmdExtractFrames(argv as Parameters<typeof cmdExtractFrames>[0]),
    )
    .demandCommand(1)
    .strict()
    .fail((msg, err) => {
      // throwing here stops yargs from running the command handler anyway
      if (err) throw err
      throw new UsageError(msg)
    })

  try {
    await parser.parseAsync()
    return 0
  } catch (err) {
    if (err instanceof UsageError) {
      console.error(`usage error: ${err.message}`)
      return 1
    }
    if (err instanceof DataError || err instanceof FormatError) {
      console.error(`error: ${err.message}`)
      return 2
    }
    if (err instanceof Error && 'code' in err && typeof (err as NodeJS.ErrnoException).code === 'string') {
      console.error(`error: ${err.message}`)
      return 2
    }
    throw err
  }
}

const invokedDirectly =
  process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop() as string)
if (invokedDirectly) {
  main(hideBin(process.argv)).then(code => {
    process.exitCode = code
  })
}
