/**
 * Lineage graph over model records.
 *
 * Every model carries its parents and the operation that produced it; the
 * graph derived here must agree with those records exactly — nodes are the
 * models, edges run parent -> child, and depth is the longest ancestor chain.
 */

import type { ModelSummary } from "./api";

export interface LineageNode {
  id: string;
  op: string;
  parents: string[];
  resolution: number;
  hasTokens: boolean;
  created: number;
  /** 0 for roots, 1 + max(parent depth) otherwise. */
  depth: number;
}

export interface LineageEdge {
  from: string;
  to: string;
}

export interface LineageGraph {
  nodes: Map<string, LineageNode>;
  edges: LineageEdge[];
  /** Node ids grouped by depth, each row sorted by creation time then id. */
  rows: string[][];
}

export function buildLineage(models: ModelSummary[]): LineageGraph {
  const nodes = new Map<string, LineageNode>();
  for (const m of models) {
    nodes.set(m.id, {
      id: m.id,
      op: m.lineage.op,
      parents: [...m.lineage.parents],
      resolution: m.resolution,
      hasTokens: m.has_tokens,
      created: m.created,
      depth: -1,
    });
  }

  const edges: LineageEdge[] = [];
  for (const node of nodes.values()) {
    for (const parent of node.parents) {
      // parents outside the listing (e.g. pruned) contribute no edge
      if (nodes.has(parent)) edges.push({ from: parent, to: node.id });
    }
  }

  const visiting = new Set<string>();
  const depthOf = (id: string): number => {
    const node = nodes.get(id);
    if (!node) return -1;
    if (node.depth >= 0) return node.depth;
    if (visiting.has(id)) return 0; // defensive: records can never cycle
    visiting.add(id);
    let depth = 0;
    for (const parent of node.parents) {
      if (nodes.has(parent)) depth = Math.max(depth, depthOf(parent) + 1);
    }
    visiting.delete(id);
    node.depth = depth;
    return depth;
  };
  for (const id of nodes.keys()) depthOf(id);

  let maxDepth = -1;
  for (const node of nodes.values()) maxDepth = Math.max(maxDepth, node.depth);
  const rows: string[][] = Array.from({ length: maxDepth + 1 }, () => []);
  for (const node of nodes.values()) rows[node.depth].push(node.id);
  for (const row of rows) {
    row.sort((a, b) => {
      const na = nodes.get(a)!;
      const nb = nodes.get(b)!;
      return na.created - nb.created || (a < b ? -1 : a > b ? 1 : 0);
    });
  }
  return { nodes, edges, rows };
}

export interface NodePosition {
  id: string;
  x: number;
  y: number;
}

/** Grid layout: one column per row-slot, one rank per depth. */
export function layoutLineage(
  graph: LineageGraph,
  colWidth = 150,
  rowHeight = 90,
): Map<string, NodePosition> {
  const positions = new Map<string, NodePosition>();
  const widest = Math.max(1, ...graph.rows.map((r) => r.length));
  graph.rows.forEach((row, depth) => {
    const offset = (widest - row.length) / 2;
    row.forEach((id, slot) => {
      positions.set(id, {
        id,
        x: (offset + slot + 0.5) * colWidth,
        y: (depth + 0.5) * rowHeight,
      });
    });
  });
  return positions;
}
