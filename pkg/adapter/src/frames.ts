/**
 * Sequential frame extraction by shelling out to ffmpeg. Frames land in the
 * output directory as frame_000000.png, frame_000001.png, ... and the
 * returned list is checked to be contiguous from 0.
 */

import { execFile } from 'child_process'
import { mkdirSync, readdirSync, statSync } from 'fs'
import { join } from 'path'
import { promisify } from 'util'
import { DataError } from './snowfeat.js'

const execFileAsync = promisify(execFile)

export type CommandRunner = (cmd: string, args: string[]) => Promise<void>

const runWithFfmpeg: CommandRunner = async (cmd, args) => {
  await execFileAsync(cmd, args)
}

export interface ExtractFramesOptions {
  video: string
  outDir: string
  /** Sampling rate passed to ffmpeg (default 25). */
  fps?: number
  /** Injectable process runner; defaults to spawning ffmpeg. */
  runner?: CommandRunner
}

export const FRAME_PATTERN = /^frame_(\d{6})\.png$/

export function ffmpegArgs(video: string, outDir: string, fps: number): string[] {
  return [
    '-hide_banner',
    '-loglevel', 'error',
    '-i', video,
    '-vf', `fps=${fps}`,
    '-start_number', '0',
    join(outDir, 'frame_%06d.png'),
  ]
}

export async function extractFrames(opts: ExtractFramesOptions): Promise<string[]> {
  const fps = opts.fps ?? 25
  if (!(fps > 0)) throw new DataError(`fps must be positive, got ${fps}`)

  let size: number
  try {
    size = statSync(opts.video).size
  } catch {
    throw new DataError(`cannot read video file ${opts.video}`)
  }
  if (size === 0) throw new DataError(`empty video file ${opts.video}`)

  mkdirSync(opts.outDir, { recursive: true })
  const runner = opts.runner ?? runWithFfmpeg
  try {
    await runner('ffmpeg', ffmpegArgs(opts.video, opts.outDir, fps))
  } catch (err) {
    throw new DataError(`ffmpeg failed on ${opts.video}: ${(err as Error).message}`)
  }

  const frames = readdirSync(opts.outDir)
    .filter(name => FRAME_PATTERN.test(name))
    .sort()
  if (frames.length === 0) {
    throw new DataError(`ffmpeg produced no frames from ${opts.video}`)
  }
  frames.forEach((name, i) => {
    const index = parseInt(name.match(FRAME_PATTERN)![1], 10)
    if (index !== i) {
      throw new DataError(`frame numbering broken: expected index ${i}, found ${name}`)
    }
  })
  return frames.map(name => join(opts.outDir, name))
}
