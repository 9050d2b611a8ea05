// @vitest-environment jsdom
import { beforeEach, describe, expect, it } from "vitest";
import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import type { EventSourceLike } from "../src/events.js";
import type { Annotation, Graph, GraphNode, Mindmap } from "../src/types.js";

/** In-memory stand-in for the provenance server. */
class FakeServer {
  annotations = new Map<string, Annotation[]>();
  mindmap: Mindmap = { nodes: [], edges: [] };
  notes = "";
  clientConnected = true;
  head = { mode: "branch" as "branch" | "detached", value: "main", commit: "c3" };
  extraNodes: GraphNode[] = [];
  counts = { graph: 0, restore: 0 };

  private node(id: string, parents: string[], kind = "measurement_added"): GraphNode {
    return {
      id,
      kind,
      message: `marker ${id}`,
      author: "op",
      timestamp: "2026-01-01T00:00:00Z",
      parents,
      annotation_count: (this.annotations.get(id) ?? []).length,
      screenshot_url: `/api/v1/commits/${id}/screenshot`,
    };
  }

  graph(): Graph {
    const nodes = [
      ...this.extraNodes,
      this.node("c3", ["c2"]),
      this.node("c2", ["c1"]),
      this.node("c1", [], "session_start"),
    ];
    const edges: [string, string][] = [];
    for (const n of nodes) for (const p of n.parents) edges.push([n.id, p]);
    return { nodes, edges, refs: { main: "c3" }, head: { ...this.head } };
  }

  fetch: typeof fetch = async (input, init) => {
    const url = String(input);
    const path = url.replace(/^https?:\/\/[^/]+/, "");
    const method = init?.method ?? "GET";
    const body = typeof init?.body === "string" ? (JSON.parse(init.body) as unknown) : null;
    const json = (status: number, payload: unknown) =>
      new Response(JSON.stringify(payload), { status });

    if (method === "GET" && path === "/api/v1/graph") {
      this.counts.graph += 1;
      return json(200, this.graph());
    }
    const commitMatch = /^\/api\/v1\/commits\/([^/]+)$/.exec(path);
    if (method === "GET" && commitMatch) {
      const id = decodeURIComponent(commitMatch[1] ?? "");
      const found = this.graph().nodes.find((n) => n.id === id);
      if (!found) return json(404, { error: { code: "NOT_FOUND", message: "no such commit" } });
      return json(200, {
        ...found,
        tree: `tree-${id}`,
        annotations: this.annotations.get(id) ?? [],
        snapshot: { camera: {}, measurements: [], mindmap: this.mindmap, notes: this.notes },
      });
    }
    const annotateMatch = /^\/api\/v1\/commits\/([^/]+)\/annotations$/.exec(path);
    if (method === "POST" && annotateMatch) {
      const id = decodeURIComponent(annotateMatch[1] ?? "");
      const { author, text } = body as { author: string; text: string };
      const annotation = { author, text, timestamp: "2026-01-01T01:00:00Z" };
      this.annotations.set(id, [...(this.annotations.get(id) ?? []), annotation]);
      return json(201, annotation);
    }
    const restoreMatch = /^\/api\/v1\/restore\/([^/]+)$/.exec(path);
    if (method === "POST" && restoreMatch) {
      this.counts.restore += 1;
      if (!this.clientConnected) {
        return json(409, { error: { code: "NO_CLIENT", message: "no visualization client" } });
      }
      const id = decodeURIComponent(restoreMatch[1] ?? "");
      this.head = { mode: "detached", value: id, commit: id };
      return json(200, { commit: id });
    }
    if (path === "/api/v1/mindmap") {
      if (method === "GET") return json(200, this.mindmap);
      this.mindmap = body as Mindmap;
      return json(200, { commit: "mmcommit" });
    }
    if (path === "/api/v1/notes") {
      if (method === "GET") return json(200, { text: this.notes });
      this.notes = (body as { text: string }).text;
      return json(200, { commit: "ncommit" });
    }
    return json(404, { error: { code: "NOT_FOUND", message: path } });
  };
}

class FakeSource implements EventSourceLike {
  listeners: Array<(event: MessageEvent) => void> = [];
  addEventListener(type: string, listener: (event: MessageEvent) => void): void {
    if (type === "change") this.listeners.push(listener);
  }
  close(): void {}
  push(payload: unknown): void {
    for (const listener of this.listeners) {
      listener({ data: JSON.stringify(payload) } as MessageEvent);
    }
  }
}

async function tick(): Promise<void> {
  for (let i = 0; i < 8; i += 1) await Promise.resolve();
  await new Promise((resolve) => setTimeout(resolve, 0));
}

let server: FakeServer;
let source: FakeSource;
let root: HTMLElement;
let app: App;

beforeEach(async () => {
  document.body.replaceChildren();
  server = new FakeServer();
  source = new FakeSource();
  root = document.createElement("div");
  document.body.appendChild(root);
  app = new App(root, {
    api: new ApiClient("", server.fetch),
    eventSourceFactory: () => source,
  });
  await app.start();
});

describe("App", () => {
  it("renders exactly the nodes and edges the API reports", () => {
    expect(root.querySelectorAll(".graph-node")).toHaveLength(3);
    expect(root.querySelectorAll(".graph-edge")).toHaveLength(2);
    expect(root.querySelector(".app-status")?.textContent).toContain("on main");
  });

  it("selecting a node shows its detail", async () => {
    await app.selectCommit("c2");
    expect(root.querySelector(".detail-message")?.textContent).toBe("marker c2");
    expect(root.querySelector(".detail-id")?.textContent).toBe("c2");
    const selected = root.querySelectorAll(".graph-node-selected");
    expect(selected).toHaveLength(1);
    expect((selected[0] as HTMLElement).dataset["commit"]).toBe("c2");
  });

  it("annotating through the form round-trips to the server", async () => {
    await app.selectCommit("c2");
    const form = root.querySelector(".annotate-form") as HTMLFormElement;
    (form.querySelector("input[name=author]") as HTMLInputElement).value = "dana";
    (form.querySelector("textarea[name=text]") as HTMLTextAreaElement).value = "good exposure";
    form.dispatchEvent(new Event("submit", { bubbles: true, cancelable: true }));
    await tick();
    expect(server.annotations.get("c2")).toEqual([
      { author: "dana", text: "good exposure", timestamp: "2026-01-01T01:00:00Z" },
    ]);
    expect(root.querySelector(".annotation-item")?.textContent).toBe("dana: good exposure");
    // Graph badge reflects the server's refreshed count, no local invention.
    expect(root.querySelector(".graph-node-annotations")?.textContent).toContain("1");
  });

  it("restore updates the head marker from the server answer", async () => {
    const commit = await app.restore("c1");
    expect(commit).toBe("c1");
    expect(server.counts.restore).toBe(1);
    expect(root.querySelector(".app-status")?.textContent).toContain("restored c1");
    const head = root.querySelector(".graph-node-head") as HTMLElement;
    expect(head.dataset["commit"]).toBe("c1");
  });

  it("surfaces restore errors inline instead of swallowing them", async () => {
    server.clientConnected = false;
    const commit = await app.restore("c1");
    expect(commit).toBeNull();
    const banner = root.querySelector(".app-error") as HTMLElement;
    expect(banner.hidden).toBe(false);
    expect(banner.textContent).toContain("NO_CLIENT");
    expect(banner.textContent).toContain("no visualization client");
  });

  it("a change event re-fetches the graph", async () => {
    const before = server.counts.graph;
    server.extraNodes = [
      {
        id: "c4",
        kind: "measurement_added",
        message: "marker c4",
        author: "op",
        timestamp: "2026-01-01T02:00:00Z",
        parents: ["c3"],
        annotation_count: 0,
        screenshot_url: "/api/v1/commits/c4/screenshot",
      },
    ];
    source.push({ event: "commit", commit: "c4", kind: "measurement_added" });
    await tick();
    expect(server.counts.graph).toBeGreaterThan(before);
    expect(root.querySelectorAll(".graph-node")).toHaveLength(4);
  });

  it("saves the mind map via PUT and reloads it on remote change when clean", async () => {
    const view = app.mindmap;
    view.addLabel("todo", [15, 25]);
    await app.saveMindmap();
    expect(server.mindmap.nodes).toHaveLength(1);
    expect(server.mindmap.nodes[0]?.text).toBe("todo");
    expect(root.querySelector(".mindmap-status")?.textContent).toBe("saved");

    // Remote update arrives while the local map is clean: reload.
    server.mindmap = {
      nodes: [{ kind: "label", node_id: "r1", position: [1, 1], text: "remote" }],
      edges: [],
    };
    source.push({ event: "commit", commit: "x", kind: "mindmap_update" });
    await tick();
    expect(view.serialize().nodes[0]?.text).toBe("remote");
  });

  it("does not clobber dirty local edits on remote change", async () => {
    const view = app.mindmap;
    view.addLabel("mine", [0, 0]);
    server.mindmap = {
      nodes: [{ kind: "label", node_id: "r1", position: [1, 1], text: "theirs" }],
      edges: [],
    };
    source.push({ event: "commit", commit: "x", kind: "mindmap_update" });
    await tick();
    expect(view.serialize().nodes[0]?.text).toBe("mine");
  });

  it("saves notes and reports unchanged saves", async () => {
    const textarea = root.querySelector(".notes-input") as HTMLTextAreaElement;
    textarea.value = "strike 180";
    textarea.dispatchEvent(new Event("input"));
    await app.saveNotes();
    expect(server.notes).toBe("strike 180");
    expect(root.querySelector(".notes-status")?.textContent).toBe("saved");
  });

  it("flushes dirty edits on pagehide", async () => {
    const view = app.mindmap;
    view.addLabel("flush me", [3, 4]);
    window.dispatchEvent(new Event("pagehide"));
    await tick();
    expect(server.mindmap.nodes[0]?.text).toBe("flush me");
  });
});
