// DOM components: the frame gallery, the run list, and the app shell
// that wires them to the service client and the session state.

import type { DocLike, ElLike } from './dom.js';
import { el } from './dom.js';
import { SequencePlayer, barHeights } from './player.js';
import type { RunEntry, SessionState } from './state.js';
import {
  initialState,
  withError,
  withEta,
  withFrames,
  withRunAppended,
  withSelection,
  withBusy,
  withPanel,
  type PanelState,
} from './state.js';
import type {
  EvalReport,
  FrameInfo,
  FrameListing,
  GraphSummary,
  NeighborReport,
  RunRequest,
  RunResponse,
  SequenceRecord,
} from './types.js';

// What the app needs from the client; ApiClient satisfies it.
export interface ApiSurface {
  frames(): Promise<FrameListing>;
  graphSummary(): Promise<GraphSummary>;
  neighbors(index: number): Promise<NeighborReport>;
  resequence(req: RunRequest): Promise<RunResponse>;
  sequence(id: string): Promise<SequenceRecord>;
  evaluate(id: string, strategy?: 'runs' | 'lcs'): Promise<EvalReport>;
}

export type CancelFn = () => void;
export type Scheduler = (cb: () => void, intervalMs: number) => CancelFn;

export class Gallery {
  private tiles = new Map<number, ElLike>();

  constructor(
    private doc: DocLike,
    private mount: ElLike,
    private onPick: (index: number) => void,
  ) {}

  render(frames: FrameInfo[]): void {
    for (const tile of this.tiles.values()) tile.remove();
    this.tiles.clear();
    for (const f of frames) {
      const tile = el(this.doc, 'figure', 'tile');
      tile.setAttribute('data-index', String(f.index));
      const img = el(this.doc, 'img');
      img.setAttribute('src', f.thumbnail_url);
      tile.appendChild(img);
      if (f.is_lms) tile.appendChild(el(this.doc, 'span', 'badge', 'LMS'));
      if (f.tendency_deg !== null) {
        const arrow = el(this.doc, 'span', 'arrow', '➜');
        arrow.setAttribute('style', `transform: rotate(${f.tendency_deg}deg)`);
        tile.appendChild(arrow);
      }
      tile.appendChild(el(this.doc, 'figcaption', 'idx', String(f.index)));
      tile.addEventListener('click', () => this.onPick(f.index));
      this.mount.appendChild(tile);
      this.tiles.set(f.index, tile);
    }
  }

  setSelection(selected: number | null, overlay: Set<number>): void {
    for (const [index, tile] of this.tiles) {
      if (index === selected) tile.className = 'tile picked';
      else if (overlay.has(index)) tile.className = 'tile s1';
      else tile.className = 'tile';
    }
  }

  tile(index: number): ElLike | undefined {
    return this.tiles.get(index);
  }

  tileClasses(): Map<number, string> {
    const out = new Map<number, string>();
    for (const [index, tile] of this.tiles) out.set(index, tile.className);
    return out;
  }
}

export interface RunHandlers {
  replay(entry: RunEntry): void;
  reroll(): void;
  score(entry: RunEntry): void;
  play(entry: RunEntry, preview: ElLike): void;
}

interface RunRow {
  entry: RunEntry;
  root: ElLike;
  strip: ElLike;
  stripIndices: number[];
  preview: ElLike;
  scoreBox: ElLike;
}

export class RunList {
  readonly rows: RunRow[] = [];

  constructor(
    private doc: DocLike,
    private mount: ElLike,
    private thumbUrl: (index: number) => string,
    private handlers: RunHandlers,
  ) {}

  add(entry: RunEntry): RunRow {
    const root = el(this.doc, 'article', 'run');
    const head = el(this.doc, 'header', 'run-head',
      `${entry.sequenceId}  seed ${entry.seed}  ${entry.indices.length} frames`);
    head.appendChild(el(this.doc, 'span', 'stop-badge', entry.stopReason));
    root.appendChild(head);

    const strip = el(this.doc, 'div', 'strip');
    for (const i of entry.indices) {
      const img = el(this.doc, 'img');
      img.setAttribute('src', this.thumbUrl(i));
      img.setAttribute('data-index', String(i));
      strip.appendChild(img);
    }
    root.appendChild(strip);

    const preview = el(this.doc, 'img', 'preview');
    preview.setAttribute('src', this.thumbUrl(entry.indices[0]));
    root.appendChild(preview);

    const controls = el(this.doc, 'nav', 'controls');
    const playBtn = el(this.doc, 'button', '', 'play');
    playBtn.addEventListener('click', () => this.handlers.play(entry, preview));
    const replayBtn = el(this.doc, 'button', '', 'replay seed');
    replayBtn.addEventListener('click', () => this.handlers.replay(entry));
    const rerollBtn = el(this.doc, 'button', '', 're-roll');
    rerollBtn.addEventListener('click', () => this.handlers.reroll());
    const scoreBtn = el(this.doc, 'button', '', 'score');
    scoreBtn.addEventListener('click', () => this.handlers.score(entry));
    for (const b of [playBtn, replayBtn, rerollBtn, scoreBtn]) controls.appendChild(b);
    root.appendChild(controls);

    const scoreBox = el(this.doc, 'div', 'score');
    root.appendChild(scoreBox);

    this.mount.appendChild(root);
    const row: RunRow = {
      entry,
      root,
      strip,
      stripIndices: entry.indices.slice(),
      preview,
      scoreBox,
    };
    this.rows.push(row);
    return row;
  }

  attachScore(sequenceId: string, report: EvalReport): void {
    const row = this.rows.find((r) => r.entry.sequenceId === sequenceId);
    if (!row) return;
    row.scoreBox.textContent = '';
    const line =
      `M_D ${report.m_d.toFixed(4)} (source ${report.source_m_d.toFixed(4)})  ` +
      `overlap ${report.delta_o.toFixed(1)}%`;
    row.scoreBox.appendChild(el(this.doc, 'p', 'score-line', line));
    const spark = el(this.doc, 'div', 'spark');
    spark.setAttribute('data-values', report.differences.join(','));
    for (const h of barHeights(report.differences)) {
      const bar = el(this.doc, 'i');
      bar.setAttribute('style', `height: ${h}%`);
      spark.appendChild(bar);
    }
    row.scoreBox.appendChild(spark);
    const srcSpark = el(this.doc, 'div', 'spark source');
    srcSpark.setAttribute('data-values', report.source_differences.join(','));
    for (const h of barHeights(report.source_differences)) {
      const bar = el(this.doc, 'i');
      bar.setAttribute('style', `height: ${h}%`);
      srcSpark.appendChild(bar);
    }
    row.scoreBox.appendChild(srcSpark);
  }
}

export interface AppDeps {
  api: ApiSurface;
  doc: DocLike;
  mounts: { gallery: ElLike; runs: ElLike; status: ElLike; info: ElLike };
  thumbUrl?: (index: number) => string;
  schedule?: Scheduler;
  onStateChange?: (state: SessionState) => void;
}

export class App {
  state: SessionState = initialState();
  readonly gallery: Gallery;
  readonly runList: RunList;
  private stopPlayback: CancelFn | null = null;

  constructor(private deps: AppDeps) {
    const thumbUrl = deps.thumbUrl ?? ((i: number) => `/thumb/${i}`);
    this.gallery = new Gallery(deps.doc, deps.mounts.gallery, (i) => {
      void this.pick(i);
    });
    this.runList = new RunList(deps.doc, deps.mounts.runs, thumbUrl, {
      replay: (entry) => void this.replay(entry),
      reroll: () => void this.reroll(),
      score: (entry) => void this.score(entry),
      play: (entry, preview) => this.play(entry, preview),
    });
  }

  private update(state: SessionState): void {
    this.state = state;
    this.deps.mounts.status.textContent = state.error ?? (state.busy ? 'working' : '');
    this.deps.onStateChange?.(state);
  }

  private fail(err: unknown): void {
    const msg = err instanceof Error ? err.message : String(err);
    this.update(withError(withBusy(this.state, false), msg));
  }

  async load(): Promise<void> {
    this.update(withBusy(this.state, true));
    try {
      const listing = await this.deps.api.frames();
      const summary = await this.deps.api.graphSummary();
      this.update(withBusy(withEta(withFrames(this.state, listing), summary.eta), false));
      this.gallery.render(this.state.frames);
      this.deps.mounts.info.textContent =
        `${listing.n} frames @ ${listing.fps} fps, eta ${summary.eta.toFixed(4)}`;
    } catch (err) {
      this.fail(err);
    }
  }

  async pick(index: number): Promise<void> {
    if (this.state.busy || this.state.frames.length === 0) return;
    try {
      const report = await this.deps.api.neighbors(index);
      this.update(withError(withSelection(this.state, index, report), null));
      this.gallery.setSelection(this.state.selectedStart, this.state.overlay);
    } catch (err) {
      this.fail(err);
    }
  }

  setPanel(patch: Partial<PanelState>): void {
    this.update(withPanel(this.state, patch));
  }

  async run(seed?: number): Promise<RunEntry | null> {
    if (this.state.selectedStart === null) {
      this.update(withError(this.state, 'pick a start frame first'));
      return null;
    }
    const req: RunRequest = {
      start: this.state.selectedStart,
      temperature: this.state.panel.temperature,
      disable_cd: this.state.panel.disableCd,
      disable_ct: this.state.panel.disableCt,
      max_length: this.state.panel.maxLength,
    };
    if (seed !== undefined) req.seed = seed;
    try {
      const res = await this.deps.api.resequence(req);
      this.update(withError(withRunAppended(this.state, res), null));
      const entry = this.state.runs[this.state.runs.length - 1];
      this.runList.add(entry);
      return entry;
    } catch (err) {
      this.fail(err);
      return null;
    }
  }

  replay(entry: RunEntry): Promise<RunEntry | null> {
    return this.run(entry.seed);
  }

  reroll(): Promise<RunEntry | null> {
    return this.run();
  }

  async restoreRun(sequenceId: string): Promise<RunEntry | null> {
    try {
      const record = await this.deps.api.sequence(sequenceId);
      this.update(withRunAppended(this.state, {
        sequence_id: record.sequence_id,
        indices: record.indices,
        seed: record.seed,
        stop_reason: record.stop_reason,
        diagnostics: record.steps,
      }));
      const entry = this.state.runs[this.state.runs.length - 1];
      this.runList.add(entry);
      return entry;
    } catch (err) {
      this.fail(err);
      return null;
    }
  }

  async score(entry: RunEntry): Promise<void> {
    try {
      const report = await this.deps.api.evaluate(entry.sequenceId);
      this.runList.attachScore(entry.sequenceId, report);
    } catch (err) {
      this.fail(err);
    }
  }

  play(entry: RunEntry, preview: ElLike): void {
    if (this.stopPlayback) {
      this.stopPlayback();
      this.stopPlayback = null;
      return;
    }
    const schedule = this.deps.schedule;
    if (!schedule || this.state.fps <= 0) return;
    const player = new SequencePlayer(entry.indices, this.state.fps);
    const thumbUrl = this.deps.thumbUrl ?? ((i: number) => `/thumb/${i}`);
    preview.setAttribute('src', thumbUrl(player.current()));
    this.stopPlayback = schedule(() => {
      preview.setAttribute('src', thumbUrl(player.advance()));
    }, player.intervalMs);
  }
}
