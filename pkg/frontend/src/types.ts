export interface Candidate {
  id: number;
  fitness: number;
  reached: boolean;
  rotations_l: number;
  rotations_r: number;
  sensor_performance: number;
  trajectory: [number, number][];
  root_ids?: number[];
}

export interface SessionInfo {
  session_id: string;
  generation: number;
  pop_size: number;
  mode: string;
  status: string;
}

export interface Bounds {
  x_min: number;
  y_min: number;
  x_max: number;
  y_max: number;
}

export interface WorldInfo {
  bounds: Bounds;
  terrain: string;
  obstacles: { x: number; y: number; radius: number }[];
  target: { x: number; y: number; radius: number };
}

export interface HistoryEntry {
  generation: number;
  best: number;
  mean: number;
  lineage_share: Record<string, number>;
}

export interface StreamEvent {
  event: string;
  generation?: number;
  done?: number;
  total?: number;
}
