/** SVG rendering of the model lineage DAG. */

import type { LineageGraph } from "../lib/lineage";
import { layoutLineage } from "../lib/lineage";

const SVG_NS = "http://www.w3.org/2000/svg";
const NODE_W = 118;
const NODE_H = 46;

export function renderLineage(
  host: HTMLElement,
  graph: LineageGraph,
  onSelect: (id: string) => void,
  selectedId: string | null = null,
): void {
  host.textContent = "";
  if (graph.nodes.size === 0) {
    const empty = document.createElement("p");
    empty.className = "muted";
    empty.textContent = "No models yet — generate or upload one.";
    host.appendChild(empty);
    return;
  }
  const positions = layoutLineage(graph);
  const widest = Math.max(1, ...graph.rows.map((r) => r.length));
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("width", String(widest * 150));
  svg.setAttribute("height", String(graph.rows.length * 90));

  for (const edge of graph.edges) {
    const a = positions.get(edge.from);
    const b = positions.get(edge.to);
    if (!a || !b) continue;
    const path = document.createElementNS(SVG_NS, "path");
    const midY = (a.y + b.y) / 2;
    path.setAttribute(
      "d",
      `M ${a.x} ${a.y + NODE_H / 2} C ${a.x} ${midY}, ${b.x} ${midY}, ${b.x} ${b.y - NODE_H / 2}`,
    );
    path.setAttribute("class", "lineage-edge");
    svg.appendChild(path);
  }

  for (const node of graph.nodes.values()) {
    const pos = positions.get(node.id)!;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", `lineage-node${node.id === selectedId ? " selected" : ""}`);
    group.addEventListener("click", () => onSelect(node.id));
    const rect = document.createElementNS(SVG_NS, "rect");
    rect.setAttribute("x", String(pos.x - NODE_W / 2));
    rect.setAttribute("y", String(pos.y - NODE_H / 2));
    rect.setAttribute("width", String(NODE_W));
    rect.setAttribute("height", String(NODE_H));
    rect.setAttribute("rx", "7");
    group.appendChild(rect);
    const op = document.createElementNS(SVG_NS, "text");
    op.setAttribute("x", String(pos.x));
    op.setAttribute("y", String(pos.y - 4));
    op.setAttribute("class", "lineage-op");
    op.textContent = node.op;
    group.appendChild(op);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(pos.x));
    label.setAttribute("y", String(pos.y + 14));
    label.setAttribute("class", "lineage-id");
    label.textContent = `${node.id.slice(0, 8)} · ${node.resolution}³`;
    group.appendChild(label);
    svg.appendChild(group);
  }
  host.appendChild(svg);
}
