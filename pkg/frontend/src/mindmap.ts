/** Mind map canvas: draggable nodes, labeled edges, lossless schema.
 *
 * The view keeps the authoritative node order so serialize() emits a
 * body the server accepts byte-for-byte role-identical to what it
 * loaded, with only user edits applied.
 */

import type { Mindmap, MindmapNode } from "./types.js";

export interface MindmapOptions {
  /** Resolves a state node's commit to a thumbnail URL. */
  thumbnailUrl?: (commit: string) => string;
  onChange?: () => void;
}

interface Internal {
  node: MindmapNode;
  el: HTMLElement;
}

export class MindmapView {
  private readonly container: HTMLElement;
  private readonly options: MindmapOptions;
  private readonly canvas: HTMLElement;
  private readonly edgeLayer: SVGSVGElement;
  private entries: Internal[] = [];
  private edges: [string, string, string][] = [];
  private counter = 0;
  dirty = false;

  constructor(container: HTMLElement, options: MindmapOptions = {}) {
    this.container = container;
    this.options = options;
    this.container.classList.add("mindmap");
    this.edgeLayer = document.createElementNS("http://www.w3.org/2000/svg", "svg");
    this.edgeLayer.setAttribute("class", "mindmap-edges");
    this.canvas = document.createElement("div");
    this.canvas.className = "mindmap-canvas";
    this.container.replaceChildren(this.edgeLayer, this.canvas);
  }

  load(mindmap: Mindmap): void {
    this.entries = [];
    this.edges = mindmap.edges.map((edge) => [...edge] as [string, string, string]);
    this.canvas.replaceChildren();
    for (const node of mindmap.nodes) {
      this.entries.push(this.present(structuredClone(node)));
    }
    this.dirty = false;
    this.drawEdges();
  }

  /** Exact inverse of load for untouched content. */
  serialize(): Mindmap {
    return {
      nodes: this.entries.map((entry) => structuredClone(entry.node)),
      edges: this.edges.map((edge) => [...edge] as [string, string, string]),
    };
  }

  nodeIds(): string[] {
    return this.entries.map((entry) => entry.node.node_id);
  }

  private markDirty(): void {
    this.dirty = true;
    this.options.onChange?.();
  }

  private freshId(): string {
    const used = new Set(this.nodeIds());
    for (;;) {
      this.counter += 1;
      const candidate = `n${this.counter}`;
      if (!used.has(candidate)) return candidate;
    }
  }

  addLabel(text: string, position: [number, number] = [40, 40]): string {
    const node: MindmapNode = { kind: "label", node_id: this.freshId(), position, text };
    this.entries.push(this.present(node));
    this.markDirty();
    this.drawEdges();
    return node.node_id;
  }

  addState(commit: string, text: string, position: [number, number] = [40, 40]): string {
    const node: MindmapNode = {
      kind: "state",
      node_id: this.freshId(),
      commit,
      position,
      text,
    };
    this.entries.push(this.present(node));
    this.markDirty();
    this.drawEdges();
    return node.node_id;
  }

  connect(from: string, to: string, label = ""): void {
    const ids = new Set(this.nodeIds());
    if (!ids.has(from) || !ids.has(to)) {
      throw new Error(`unknown mind map node: ${from} -> ${to}`);
    }
    this.edges.push([from, to, label]);
    this.markDirty();
    this.drawEdges();
  }

  removeNode(id: string): void {
    const entry = this.entries.find((candidate) => candidate.node.node_id === id);
    if (!entry) return;
    entry.el.remove();
    this.entries = this.entries.filter((candidate) => candidate !== entry);
    this.edges = this.edges.filter(([from, to]) => from !== id && to !== id);
    this.markDirty();
    this.drawEdges();
  }

  setText(id: string, text: string): void {
    const entry = this.entries.find((candidate) => candidate.node.node_id === id);
    if (!entry) return;
    entry.node.text = text;
    const textEl = entry.el.querySelector(".mindmap-node-text");
    if (textEl) textEl.textContent = text;
    this.markDirty();
  }

  moveNode(id: string, position: [number, number]): void {
    const entry = this.entries.find((candidate) => candidate.node.node_id === id);
    if (!entry) return;
    entry.node.position = position;
    entry.el.style.left = `${position[0]}px`;
    entry.el.style.top = `${position[1]}px`;
    this.markDirty();
    this.drawEdges();
  }

  private present(node: MindmapNode): Internal {
    const el = document.createElement("div");
    el.className = `mindmap-node mindmap-node-${node.kind}`;
    el.dataset["nodeId"] = node.node_id;
    el.style.left = `${node.position[0]}px`;
    el.style.top = `${node.position[1]}px`;

    if (node.kind === "state") {
      const img = document.createElement("img");
      img.className = "mindmap-node-thumb";
      img.alt = "state thumbnail";
      img.src = this.options.thumbnailUrl?.(node.commit) ?? "";
      el.appendChild(img);
      el.dataset["commit"] = node.commit;
    }
    const textEl = document.createElement("span");
    textEl.className = "mindmap-node-text";
    textEl.textContent = node.text;
    el.appendChild(textEl);

    const entry: Internal = { node, el };
    el.addEventListener("mousedown", (down) => this.beginDrag(entry, down));
    this.canvas.appendChild(el);
    return entry;
  }

  private beginDrag(entry: Internal, down: MouseEvent): void {
    down.preventDefault();
    const [startX, startY] = entry.node.position;
    const origin = { x: down.clientX, y: down.clientY };
    const doc = this.container.ownerDocument;

    const onMove = (move: MouseEvent) => {
      const position: [number, number] = [
        startX + (move.clientX - origin.x),
        startY + (move.clientY - origin.y),
      ];
      this.moveNode(entry.node.node_id, position);
    };
    const onUp = () => {
      doc.removeEventListener("mousemove", onMove);
      doc.removeEventListener("mouseup", onUp);
    };
    doc.addEventListener("mousemove", onMove);
    doc.addEventListener("mouseup", onUp);
  }

  private drawEdges(): void {
    const centers = new Map(
      this.entries.map((entry) => [
        entry.node.node_id,
        { x: entry.node.position[0] + 60, y: entry.node.position[1] + 24 },
      ]),
    );
    this.edgeLayer.replaceChildren();
    for (const [from, to, label] of this.edges) {
      const a = centers.get(from);
      const b = centers.get(to);
      if (!a || !b) continue;
      const line = document.createElementNS("http://www.w3.org/2000/svg", "line");
      line.setAttribute("class", "mindmap-edge");
      line.setAttribute("x1", String(a.x));
      line.setAttribute("y1", String(a.y));
      line.setAttribute("x2", String(b.x));
      line.setAttribute("y2", String(b.y));
      this.edgeLayer.appendChild(line);
      if (label) {
        const text = document.createElementNS("http://www.w3.org/2000/svg", "text");
        text.setAttribute("class", "mindmap-edge-label");
        text.setAttribute("x", String((a.x + b.x) / 2));
        text.setAttribute("y", String((a.y + b.y) / 2 - 4));
        text.textContent = label;
        this.edgeLayer.appendChild(text);
      }
    }
  }
}
