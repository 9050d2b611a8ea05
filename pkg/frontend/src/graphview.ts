/** Provenance graph rendering.
 *
 * Pure view: everything shown comes from one Graph payload, and every
 * control dispatches to a handler; the view never invents state.
 */

import { layoutGraph, CELL_WIDTH, CELL_HEIGHT } from "./layout.js";
import type { Graph, GraphNode } from "./types.js";

export interface GraphHandlers {
  onAnnotate?: (id: string) => void;
  onRestore?: (id: string) => void;
  onBranch?: (id: string) => void;
  onSelect?: (id: string) => void;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgEl<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>,
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [name, value] of Object.entries(attrs)) el.setAttribute(name, value);
  return el;
}

function shortMessage(node: GraphNode): string {
  const limit = 26;
  return node.message.length > limit ? node.message.slice(0, limit - 1) + "…" : node.message;
}

export function renderGraph(
  container: HTMLElement,
  graph: Graph,
  handlers: GraphHandlers = {},
  screenshotBase = "",
): void {
  const layout = layoutGraph(graph);
  container.replaceChildren();

  const svg = svgEl("svg", {
    class: "graph-svg",
    width: String(layout.width),
    height: String(layout.height),
    viewBox: `0 0 ${layout.width} ${layout.height}`,
  });

  for (const edge of layout.edges) {
    svg.appendChild(
      svgEl("line", {
        class: "graph-edge",
        x1: String(edge.from.x),
        y1: String(edge.from.y + CELL_HEIGHT * 0.28),
        x2: String(edge.to.x),
        y2: String(edge.to.y - CELL_HEIGHT * 0.28),
      }),
    );
  }

  const tipNames = new Map<string, string[]>();
  for (const [name, id] of Object.entries(graph.refs)) {
    const names = tipNames.get(id) ?? [];
    names.push(name);
    tipNames.set(id, names);
  }

  for (const node of graph.nodes) {
    const placed = layout.byId.get(node.id);
    if (!placed) continue;
    const group = svgEl("g", {
      class: "graph-node" + (node.id === graph.head.commit ? " graph-node-head" : ""),
      "data-commit": node.id,
      "data-kind": node.kind,
      transform: `translate(${placed.x}, ${placed.y})`,
    });
    group.addEventListener("click", () => handlers.onSelect?.(node.id));

    const w = CELL_WIDTH - 36;
    const h = CELL_HEIGHT - 40;
    group.appendChild(
      svgEl("rect", {
        class: "graph-node-box",
        x: String(-w / 2),
        y: String(-h / 2),
        width: String(w),
        height: String(h),
        rx: "8",
      }),
    );

    const thumb = svgEl("image", {
      class: "graph-node-thumb",
      x: String(-w / 2 + 5),
      y: String(-h / 2 + 5),
      width: "42",
      height: String(h - 10),
      preserveAspectRatio: "xMidYMid slice",
    });
    thumb.setAttribute("href", screenshotBase + node.screenshot_url);
    group.appendChild(thumb);

    const title = svgEl("text", {
      class: "graph-node-message",
      x: String(-w / 2 + 54),
      y: "-4",
    });
    title.textContent = shortMessage(node);
    group.appendChild(title);

    const kindText = svgEl("text", {
      class: "graph-node-kind",
      x: String(-w / 2 + 54),
      y: "14",
    });
    kindText.textContent = node.kind;
    group.appendChild(kindText);

    if (node.annotation_count > 0) {
      const badge = svgEl("text", {
        class: "graph-node-annotations",
        x: String(w / 2 - 10),
        y: String(-h / 2 + 16),
        "text-anchor": "end",
      });
      badge.textContent = `✎ ${node.annotation_count}`;
      group.appendChild(badge);
    }

    for (const name of tipNames.get(node.id) ?? []) {
      const ref = svgEl("text", {
        class: "graph-ref-label",
        x: String(w / 2 + 6),
        y: "4",
      });
      ref.textContent = name;
      group.appendChild(ref);
    }

    const controls: Array<[string, string, ((id: string) => void) | undefined]> = [
      ["annotate", "✎", handlers.onAnnotate],
      ["restore", "↩", handlers.onRestore],
      ["branch", "⑂", handlers.onBranch],
    ];
    controls.forEach(([action, glyph, handler], index) => {
      const button = svgEl("text", {
        class: `graph-node-control graph-control-${action}`,
        "data-action": action,
        x: String(-w / 2 + 54 + index * 22),
        y: String(h / 2 - 6),
        role: "button",
      });
      button.textContent = glyph;
      button.addEventListener("click", (event) => {
        event.stopPropagation();
        handler?.(node.id);
      });
      group.appendChild(button);
    });

    svg.appendChild(group);
  }

  container.appendChild(svg);
}

export function renderedCounts(container: HTMLElement): { nodes: number; edges: number } {
  return {
    nodes: container.querySelectorAll(".graph-node").length,
    edges: container.querySelectorAll(".graph-edge").length,
  };
}
