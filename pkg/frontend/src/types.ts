// Wire types mirroring the service's JSON documents.

export type Loc = number | "intransit";

export interface GridShorthand {
  rows: number;
  cols: number;
  slow: number[];
  obstacles: number[];
  charging: number[];
}

export interface AgentSpec {
  id: number;
  init: number;
  goal: number;
  waypoints: number[];
  init_battery: number;
}

export interface InstanceDoc {
  grid?: GridShorthand;
  vertices?: number[];
  edges?: { u: number; v: number; mode: "normal" | "slow" }[];
  obstacles?: number[];
  charging?: number[];
  max_battery: number;
  tau: number;
  objective: string[];
  agents: AgentSpec[];
}

export interface PlanStep {
  t: number;
  loc: Loc;
  battery: number;
}

export interface PlanDoc {
  agents: { id: number; steps: PlanStep[] }[];
}

export type QueryKind =
  | "QW1" | "QW2" | "QW3" | "QW4"
  | "QC1" | "QC2" | "QC3" | "QC4"
  | "QP1" | "QP2" | "QP3" | "QP4" | "QP5"
  | "QU";

export interface QueryDoc {
  kind: QueryKind;
  agent?: number;
  x?: number;
  y?: number;
  s?: number;
  n?: number;
  m?: number;
  l?: number;
}

export interface ViolationAtomDoc {
  kind: string;
  args: (number | string)[];
}

export interface ConstraintView {
  constraint: Record<string, unknown>;
  text: string;
}

export interface ExplanationDoc {
  kind: "alternative" | "counterfactual" | "infeasibility";
  query: QueryDoc;
  text: string;
  alternative_plan?: PlanDoc;
  comparison?: "shorter" | "equal" | "longer";
  violations_current?: ViolationAtomDoc[];
  violations_any?: ViolationAtomDoc[];
  suggestion?: { remove_obstacles: number[] };
  solver_calls: number;
  models: number;
  accumulated?: ConstraintView[];
  current_plan?: PlanDoc | null;
}

export interface SessionView {
  session_id: string;
  has_plan: boolean;
  plan: PlanDoc | null;
  instance: InstanceDoc;
  accumulated: ConstraintView[];
  history_length: number;
  detail?: string;
}

export interface HistoryEntry {
  query: QueryDoc;
  explanation: ExplanationDoc;
  added_constraint: boolean;
}

export interface ExampleEntry {
  name: string;
  instance: InstanceDoc;
  plan?: PlanDoc;
}
