/** Payload shapes for every /api route the UI consumes.
 *
 * These mirror the server's checked-in JSON contract. The UI never does
 * metric arithmetic; it renders these fields as-is (display rounding only).
 */

export interface TaskConfig {
  input: string;
  output: string;
  kernel: string;
  sparsity: number;
  palette?: number;
}

export interface TaskMetrics {
  total_time: number;
  compute_time: number;
  memory_time: number;
  conversion_overhead: number;
  bytes_moved: number;
  weight_bytes: number;
  energy: number;
  memory_power: number;
  macs_effective: number;
}

export type MetricId = keyof TaskMetrics;

export interface ModelSummary {
  total_latency: number;
  total_energy: number;
  memory_power: number;
  total_bytes_moved: number;
  total_weight_bytes: number;
  task_count: number;
  achieved_fps: number;
}

export interface ColumnInfo {
  id: string;
  label: string;
  unit: string;
  description: string;
}

/** Baseline row; the optimized variant adds base/optimized/delta triplets. */
export interface MetricsRow {
  task: number;
  name: string;
  kind: string;
  group: string;
  config: TaskConfig;
  metrics?: TaskMetrics;
  base?: TaskMetrics;
  optimized?: TaskMetrics;
  delta?: Partial<Record<MetricId, number | null>>;
  changed?: boolean;
}

export interface MetricsPayload {
  columns: ColumnInfo[];
  rows: MetricsRow[];
  total_rows: number;
  summary: {
    base: ModelSummary;
    optimized?: ModelSummary;
    delta_latency_pct?: number;
    delta_power_pct?: number;
  };
}

export interface SummaryPayload {
  name: string;
  hash: string;
  task_count: number;
  fps_target: number | null;
  summary: ModelSummary;
}

export interface OptionRow {
  config: TaskConfig;
  metrics: TaskMetrics;
  delta_latency_pct: number;
  delta_power_pct: number;
  delta_weight_bytes_pct: number | null;
}

export interface OptionsPayload {
  task: number;
  count: number;
  options: OptionRow[];
}

export interface SelectionEntry extends TaskConfig {
  task: number;
}

export interface OptimizationSelection {
  targeted?: SelectionEntry[];
  preset?: string | null;
}

export interface SimTaskRow {
  task: number;
  base: TaskMetrics;
  optimized: TaskMetrics;
  config: TaskConfig;
  changed: boolean;
}

export interface SimulationPayload {
  tasks: SimTaskRow[];
  affected_tasks: number[];
  conflicts: { tensor: string; prior: string; winner: string; source: number }[];
  summary: {
    base: ModelSummary;
    optimized: ModelSummary;
    delta_latency_pct: number;
    delta_power_pct: number;
  };
}

export interface LayoutNode {
  task?: number;
  group?: string;
  layer: number;
  order: number;
  x: number;
  y: number;
}

export interface LayoutEdge {
  from: number | string;
  to: number | string;
  tensor: string;
}

export interface LayoutPayload {
  nodes: LayoutNode[];
  edges: LayoutEdge[];
}

export interface TimelineRow {
  task: number;
  engine: number;
  start: number;
  finish: number;
}

export interface TimelinePayload {
  engines: number;
  makespan: number;
  rows: TimelineRow[];
}

export interface ModelRecord {
  model_id: string;
  name: string;
  owner: string;
  created_at: string;
  graph_hash: string;
  link_sharing: boolean;
  url: string;
  shared_with?: string[];
  share_token?: string;
  duplicate?: boolean;
}

export interface ModelListPayload {
  models: ModelRecord[];
}

export interface Analysis {
  analysis_id: string;
  model_id: string;
  name: string;
  author: string;
  created_at: string;
  selection: OptimizationSelection;
  parent_analysis_id?: string | null;
}

export interface AnalysisListPayload {
  analyses: Analysis[];
}

export interface MatchedTask {
  base_task: number;
  target_task: number;
  changed: boolean;
  metric_deltas: Record<string, number | null>;
}

export interface DiffPayload {
  matched: MatchedTask[];
  added: number[];
  removed: number[];
  summary_base: ModelSummary;
  summary_target: ModelSummary;
}

export interface CodeLocation {
  file: string;
  line: number;
  snippet: string;
}

export interface TaskCodePayload {
  task: number;
  locations: CodeLocation[];
}

export interface SourcePayload {
  file: string;
  text: string;
  start_line: number;
  end_line: number;
  total_lines: number;
}

export interface ApiError {
  status: number;
  code: string;
  message: string;
  detail?: unknown;
}
