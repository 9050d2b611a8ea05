/** Layered DAG layout for the provenance graph.
 *
 * Rows follow history depth: parents sit below their children, so the
 * newest states are at the top. Columns follow branches: a commit keeps
 * its first child's column where possible and divergent children move
 * to fresh columns, giving each branch a distinct lane.
 */

import type { Graph } from "./types.js";

export const CELL_WIDTH = 190;
export const CELL_HEIGHT = 96;
export const PADDING = 28;

export interface PlacedNode {
  id: string;
  row: number;
  col: number;
  /** Center coordinates in pixels. */
  x: number;
  y: number;
}

export interface PlacedEdge {
  from: PlacedNode;
  to: PlacedNode;
}

export interface GraphLayout {
  nodes: PlacedNode[];
  edges: PlacedEdge[];
  byId: Map<string, PlacedNode>;
  width: number;
  height: number;
}

export function layoutGraph(graph: Graph): GraphLayout {
  const ids = graph.nodes.map((n) => n.id);
  const parentsOf = new Map<string, string[]>(graph.nodes.map((n) => [n.id, n.parents]));

  // Longest path from the root fixes the row; the API serves children
  // before parents, so one reverse pass settles every node.
  const rowOf = new Map<string, number>();
  for (const id of [...ids].reverse()) {
    const parents = parentsOf.get(id) ?? [];
    let row = 0;
    for (const parent of parents) {
      row = Math.max(row, (rowOf.get(parent) ?? 0) + 1);
    }
    rowOf.set(id, row);
  }

  // First child claims the parent's column, later children start lanes.
  const colOf = new Map<string, number>();
  let nextCol = 0;
  const claimed = new Set<string>();
  for (const id of [...ids].reverse()) {
    const parents = parentsOf.get(id) ?? [];
    let col: number | undefined;
    const first = parents[0];
    if (first !== undefined && !claimed.has(first)) {
      claimed.add(first);
      col = colOf.get(first);
    }
    if (col === undefined) {
      col = nextCol;
      nextCol += 1;
    }
    colOf.set(id, col);
  }

  const maxRow = Math.max(0, ...rowOf.values());
  const maxCol = Math.max(0, ...colOf.values());
  const byId = new Map<string, PlacedNode>();
  const nodes: PlacedNode[] = ids.map((id) => {
    const row = rowOf.get(id) ?? 0;
    const col = colOf.get(id) ?? 0;
    const placed: PlacedNode = {
      id,
      row,
      col,
      x: PADDING + col * CELL_WIDTH + CELL_WIDTH / 2,
      y: PADDING + (maxRow - row) * CELL_HEIGHT + CELL_HEIGHT / 2,
    };
    byId.set(id, placed);
    return placed;
  });

  const edges: PlacedEdge[] = [];
  for (const [child, parent] of graph.edges) {
    const from = byId.get(child);
    const to = byId.get(parent);
    if (from && to) edges.push({ from, to });
  }

  return {
    nodes,
    edges,
    byId,
    width: PADDING * 2 + (maxCol + 1) * CELL_WIDTH,
    height: PADDING * 2 + (maxRow + 1) * CELL_HEIGHT,
  };
}
