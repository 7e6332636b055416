// Playback math for a generated ordering. Pure: the DOM layer asks
// which frame to show, a timer decides when to ask.

export function frameAt(indices: number[], fps: number, tMs: number, loop = true): number {
  if (indices.length === 0) throw new Error('empty sequence');
  if (fps <= 0) throw new Error('fps must be positive');
  let pos = Math.floor(Math.max(0, tMs) / 1000 * fps);
  if (loop) pos = pos % indices.length;
  else pos = Math.min(pos, indices.length - 1);
  return indices[pos];
}

export class SequencePlayer {
  private pos = 0;

  constructor(
    readonly indices: number[],
    readonly fps: number,
  ) {
    if (indices.length === 0) throw new Error('empty sequence');
    if (fps <= 0) throw new Error('fps must be positive');
  }

  get intervalMs(): number {
    return 1000 / this.fps;
  }

  current(): number {
    return this.indices[this.pos];
  }

  advance(): number {
    this.pos = (this.pos + 1) % this.indices.length;
    return this.current();
  }

  rewind(): number {
    this.pos = 0;
    return this.current();
  }

  frameAtTime(tMs: number, loop = true): number {
    return frameAt(this.indices, this.fps, tMs, loop);
  }
}

// Bar heights (percent) for the per-transition difference sparkline.
// Pure scaling; the values themselves always come from the service.
export function barHeights(values: number[]): number[] {
  if (values.length === 0) return [];
  const hi = Math.max(...values);
  if (hi <= 0) return values.map(() => 0);
  return values.map((v) => Math.round((Math.max(0, v) / hi) * 100));
}
