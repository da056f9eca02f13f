// JSON shapes of the session API. Model truth lives server-side; the client
// only ever replaces its state with the most recent server response.

export interface Metrics {
  elements: number;
  arcs: number;
  object_types: number;
}

export interface PlaceNode {
  id: string;
  kind: "place";
  label: string;
  otype: string;
  initial: boolean;
  final: boolean;
}

export interface TransitionNode {
  id: string;
  kind: "transition" | "silent";
  label: string;
  refs: string[];
  members: string[];
}

export type GraphNode = PlaceNode | TransitionNode;

export interface GraphEdge {
  src: string;
  dst: string;
  variable: boolean;
}

export interface ModelPayload {
  nodes: GraphNode[];
  edges: GraphEdge[];
  metrics: Metrics;
}

// the transition-reconstructable triple, plus server-side decorations
export interface RecordRef {
  suffix: string;
  target: string;
  transitions: string[];
  label?: string;
  oid?: string;
  rules?: string[];
}

export interface SessionHandle {
  sid: string;
  created_at: string;
  threshold: number;
}

export interface SessionStateBody {
  session: SessionHandle;
  model: ModelPayload;
  available: RecordRef[];
  redoable: RecordRef[];
  history: RecordRef[];
  warnings?: string[];
}

export interface AbstractionLists {
  available: RecordRef[];
  redoable: RecordRef[];
  history: RecordRef[];
}
