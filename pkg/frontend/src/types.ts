// JSON payloads of the resequencing service, field for field.

export interface FrameInfo {
  index: number;
  thumbnail_url: string;
  is_lms: boolean;
  tendency_deg: number | null;
}

export interface FrameListing {
  frames: FrameInfo[];
  fps: number;
  n: number;
}

export interface GraphSummary {
  n: number;
  eta: number;
  eta_divisor: string;
  histogram: { counts: number[]; bin_edges: number[] };
}

export interface NeighborEdge {
  index: number;
  weight: number;
  in_s1: boolean;
}

export interface NeighborReport {
  eta: number;
  node: number;
  neighbors: NeighborEdge[];
}

export interface RunRequest {
  start: number;
  seed?: number;
  temperature?: number;
  disable_cd?: boolean;
  disable_ct?: boolean;
  max_length?: number | null;
}

export interface StepDiag {
  step: number;
  source: number;
  chosen: number;
  s1_size: number;
  s2_size: number;
  probability: number;
  edge_weight: number;
  motion_distance: number;
  omega: number;
  cd_active: boolean;
}

export interface RunResponse {
  sequence_id: string;
  indices: number[];
  seed: number;
  stop_reason: string;
  diagnostics: StepDiag[];
}

export interface SequenceRecord {
  sequence_id: string;
  indices: number[];
  seed: number;
  stop_reason: string;
  eta: number;
  dataset: { n: number; content_hash: string };
  params: Record<string, unknown>;
  steps: StepDiag[];
}

export interface EvalReport {
  m_d: number;
  source_m_d: number;
  differences: number[];
  source_differences: number[];
  delta_o: number;
  precision: number;
  recall: number;
  overlap_length: number;
  length: number;
  stop_reason: string;
}
