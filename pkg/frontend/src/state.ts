// Session model and its pure transitions. Components render from this;
// every transition returns a new state object so tests can diff them.

import type { FrameInfo, FrameListing, NeighborReport, RunResponse } from './types.js';

export interface PanelState {
  temperature: number;
  disableCd: boolean;
  disableCt: boolean;
  maxLength: number | null;
}

export interface RunEntry {
  sequenceId: string;
  seed: number;
  indices: number[];
  stopReason: string;
}

export interface SessionState {
  frames: FrameInfo[];
  fps: number;
  eta: number | null;
  selectedStart: number | null;
  overlay: Set<number>; // S1 of the selected start
  panel: PanelState;
  runs: RunEntry[];
  busy: boolean;
  error: string | null;
}

export function initialState(): SessionState {
  return {
    frames: [],
    fps: 0,
    eta: null,
    selectedStart: null,
    overlay: new Set(),
    panel: { temperature: 1.0, disableCd: false, disableCt: false, maxLength: null },
    runs: [],
    busy: false,
    error: null,
  };
}

export function withFrames(state: SessionState, listing: FrameListing): SessionState {
  // A new gallery invalidates any selection made against the old one.
  return {
    ...state,
    frames: listing.frames,
    fps: listing.fps,
    selectedStart: null,
    overlay: new Set(),
  };
}

export function withEta(state: SessionState, eta: number): SessionState {
  return { ...state, eta };
}

export function withSelection(
  state: SessionState,
  index: number,
  report: NeighborReport,
): SessionState {
  if (index < 0 || index >= state.frames.length) return state;
  const overlay = new Set(report.neighbors.filter((e) => e.in_s1).map((e) => e.index));
  return { ...state, selectedStart: index, overlay };
}

export function withRunAppended(state: SessionState, run: RunResponse): SessionState {
  const entry: RunEntry = {
    sequenceId: run.sequence_id,
    seed: run.seed,
    indices: run.indices.slice(),
    stopReason: run.stop_reason,
  };
  return { ...state, runs: [...state.runs, entry] };
}

export function withPanel(state: SessionState, patch: Partial<PanelState>): SessionState {
  return { ...state, panel: { ...state.panel, ...patch } };
}

export function withBusy(state: SessionState, busy: boolean): SessionState {
  return { ...state, busy };
}

export function withError(state: SessionState, error: string | null): SessionState {
  return { ...state, error };
}

// Deep links: the address hash carries enough to rebuild the view from
// server state (run ids are durable on the server for the session).

export interface HashState {
  start: number | null;
  run: string | null;
}

export function parseHash(hash: string): HashState {
  const out: HashState = { start: null, run: null };
  const body = hash.replace(/^#/, '');
  for (const part of body.split('&')) {
    const [k, v] = part.split('=');
    if (k === 'start' && v !== undefined && /^\d+$/.test(v)) out.start = Number(v);
    if (k === 'run' && v) out.run = v;
  }
  return out;
}

export function formatHash(state: SessionState): string {
  const parts: string[] = [];
  if (state.selectedStart !== null) parts.push(`start=${state.selectedStart}`);
  const last = state.runs[state.runs.length - 1];
  if (last) parts.push(`run=${last.sequenceId}`);
  return parts.length ? `#${parts.join('&')}` : '';
}
