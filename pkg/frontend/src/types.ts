/** Wire types of the HTTP API under /api/v1. */

export interface GraphNode {
  id: string;
  kind: string;
  message: string;
  author: string;
  timestamp: string;
  parents: string[];
  annotation_count: number;
  screenshot_url: string;
}

export interface HeadMarker {
  mode: "branch" | "detached";
  value: string;
  commit: string;
}

export interface Graph {
  nodes: GraphNode[];
  /** Child to parent, one entry per parent link. */
  edges: [string, string][];
  refs: Record<string, string>;
  head: HeadMarker;
}

export interface Annotation {
  author: string;
  text: string;
  timestamp: string;
}

export interface SnapshotDetail {
  camera: Record<string, unknown>;
  measurements: Record<string, unknown>[];
  mindmap: Mindmap;
  notes: string;
}

export interface CommitDetail extends GraphNode {
  tree: string;
  annotations: Annotation[];
  snapshot: SnapshotDetail;
}

export interface MindmapStateNode {
  kind: "state";
  node_id: string;
  commit: string;
  position: [number, number];
  text: string;
}

export interface MindmapLabelNode {
  kind: "label";
  node_id: string;
  position: [number, number];
  text: string;
}

export type MindmapNode = MindmapStateNode | MindmapLabelNode;

export interface Mindmap {
  nodes: MindmapNode[];
  /** [from, to, label] triples. */
  edges: [string, string, string][];
}

export interface ChangeEvent {
  event: string;
  commit?: string;
  [key: string]: unknown;
}
