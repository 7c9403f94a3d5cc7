// Payload shapes served by the partitioning service. These mirror the JSON
// emitted by the Python side verbatim; the UI never reshapes them.

export type NodeKind = "Program" | "Resource";

export interface GraphNode {
  id: string;
  kind: NodeKind;
}

export interface GraphEdge {
  source: string;
  target: string;
  kind: string;
}

export interface GraphInventory {
  graph_id: string;
  nodes: GraphNode[];
  edges: GraphEdge[];
  counts: { programs: number; resources: number; edges: number };
  pruned_programs: string[];
}

export interface LossPoint {
  node_recon: number;
  edge_recon: number;
  link_recon: number;
  clustering: number;
  seed_separation: number;
  total: number;
  alphas: number[];
}

export interface TrainConfig {
  k: number;
  f0: number;
  f1: number;
  f2: number;
  pretrain_epochs: number;
  pretrain_lr: number;
  joint_epochs: number;
  joint_lr: number;
  variant: string;
  rng_seed: number;
  activation: string;
  auto_balance: boolean;
  pretrain_alphas: number[];
  joint_alphas: number[];
}

export type RunStatus = "queued" | "running" | "done" | "failed";

export interface RunBrief {
  run_id: string;
  graph_id: string;
  status: RunStatus;
  k: number;
  variant: string;
  created_at: number;
}

export interface Metrics {
  mod: number;
  smod: number;
  ifn: number;
  ned: number;
}

export interface SunburstNode {
  name: string;
  value?: number;
  children?: SunburstNode[];
}

export interface RunSnapshot extends RunBrief {
  config: TrainConfig;
  seeds: string[][];
  loss_history: LossPoint[];
  partition?: Record<string, number>;
  metrics?: Metrics;
  sunburst?: SunburstNode;
  diagnostics?: Record<string, number>;
  error?: { code: string; message: string };
}

export interface RunRequest {
  graph_id: string;
  k: number;
  variant?: string;
  seeds?: string[][];
  overrides?: Record<string, unknown>;
}

export interface ApiErrorBody {
  code: string;
  message: string;
  path: string;
}
