/** Application controller: one page, one API client, one event feed.
 *
 * Every mutation waits for the server's answer before anything
 * re-renders; the view is rebuilt from GET responses alone, so a page
 * reload always reproduces the same picture.
 */

import { ApiClient, ApiError } from "./api.js";
import { ChangeFeed, type EventSourceFactory } from "./events.js";
import { renderGraph } from "./graphview.js";
import { MindmapView } from "./mindmap.js";
import { NotesView } from "./notes.js";
import type { ChangeEvent, CommitDetail, Graph } from "./types.js";

export interface AppOptions {
  api: ApiClient;
  eventSourceFactory: EventSourceFactory;
}

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className: string,
  text = "",
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class App {
  readonly api: ApiClient;
  private readonly feed: ChangeFeed;
  private readonly doc: Document;
  private readonly errorBox: HTMLElement;
  private readonly statusBox: HTMLElement;
  private readonly graphPane: HTMLElement;
  private readonly detailPane: HTMLElement;
  readonly mindmap: MindmapView;
  readonly notes: NotesView;
  private readonly mindmapStatus: HTMLElement;
  private readonly notesStatus: HTMLElement;
  private graph: Graph | null = null;
  private selectedId: string | null = null;

  get currentGraph(): Graph | null {
    return this.graph;
  }

  constructor(root: HTMLElement, options: AppOptions) {
    this.api = options.api;
    this.doc = root.ownerDocument;
    this.feed = new ChangeFeed(this.api.eventsUrl(), options.eventSourceFactory);

    const doc = this.doc;
    root.classList.add("app");

    const header = el(doc, "header", "app-header");
    header.appendChild(el(doc, "h1", "app-title", "Lab Book"));
    this.statusBox = el(doc, "span", "app-status");
    header.appendChild(this.statusBox);
    const exportLink = el(doc, "a", "export-link", "export bundle");
    exportLink.setAttribute("href", this.api.exportUrl());
    header.appendChild(exportLink);
    root.appendChild(header);

    this.errorBox = el(doc, "div", "app-error");
    this.errorBox.setAttribute("role", "alert");
    this.errorBox.hidden = true;
    this.errorBox.addEventListener("click", () => {
      this.errorBox.hidden = true;
    });
    root.appendChild(this.errorBox);

    const main = el(doc, "main", "app-main");
    this.graphPane = el(doc, "section", "graph-pane");
    this.detailPane = el(doc, "section", "detail-pane");
    this.detailPane.appendChild(el(doc, "p", "detail-empty", "select a state"));

    const mindmapPane = el(doc, "section", "mindmap-pane");
    const mindmapBar = el(doc, "div", "pane-toolbar");
    mindmapBar.appendChild(el(doc, "span", "pane-title", "mind map"));
    const addLabelBtn = el(doc, "button", "mindmap-add-label", "add label");
    addLabelBtn.addEventListener("click", () => {
      this.mindmap.addLabel("label");
    });
    mindmapBar.appendChild(addLabelBtn);
    const saveMapBtn = el(doc, "button", "mindmap-save", "save map");
    saveMapBtn.addEventListener("click", () => void this.saveMindmap());
    mindmapBar.appendChild(saveMapBtn);
    this.mindmapStatus = el(doc, "span", "mindmap-status");
    mindmapBar.appendChild(this.mindmapStatus);
    mindmapPane.appendChild(mindmapBar);
    const mindmapHost = el(doc, "div", "mindmap-host");
    mindmapPane.appendChild(mindmapHost);
    this.mindmap = new MindmapView(mindmapHost, {
      thumbnailUrl: (commit) =>
        this.api.screenshotUrl({
          screenshot_url: `/api/v1/commits/${encodeURIComponent(commit)}/screenshot`,
        }),
      onChange: () => {
        this.mindmapStatus.textContent = "unsaved changes";
      },
    });

    const notesPane = el(doc, "section", "notes-pane");
    const notesBar = el(doc, "div", "pane-toolbar");
    notesBar.appendChild(el(doc, "span", "pane-title", "notes"));
    const saveNotesBtn = el(doc, "button", "notes-save", "save notes");
    saveNotesBtn.addEventListener("click", () => void this.saveNotes());
    notesBar.appendChild(saveNotesBtn);
    this.notesStatus = el(doc, "span", "notes-status");
    notesBar.appendChild(this.notesStatus);
    notesPane.appendChild(notesBar);
    const notesHost = el(doc, "div", "notes-host");
    notesPane.appendChild(notesHost);
    this.notes = new NotesView(notesHost);
    this.notes.onDirtyChange = (dirty) => {
      this.notesStatus.textContent = dirty ? "unsaved changes" : "";
    };

    main.append(this.graphPane, this.detailPane, mindmapPane, notesPane);
    root.appendChild(main);

    // Edits are flushed when the page goes away, same as the save button.
    const win = doc.defaultView;
    win?.addEventListener("pagehide", () => {
      void this.flushPendingEdits();
    });
  }

  async start(): Promise<void> {
    await this.refreshGraph();
    await this.reloadMindmap();
    await this.reloadNotes();
    this.feed.start((event) => void this.onChange(event));
  }

  stop(): void {
    this.feed.stop();
  }

  // -- error surface -----------------------------------------------------

  private showError(err: unknown): void {
    const text =
      err instanceof ApiError ? `${err.code}: ${err.message}` : String(err);
    this.errorBox.textContent = text;
    this.errorBox.hidden = false;
  }

  private async run<T>(task: () => Promise<T>): Promise<T | null> {
    try {
      const value = await task();
      this.errorBox.hidden = true;
      return value;
    } catch (err) {
      this.showError(err);
      return null;
    }
  }

  // -- graph ---------------------------------------------------------------

  async refreshGraph(): Promise<void> {
    const graph = await this.run(() => this.api.getGraph());
    if (!graph) return;
    this.graph = graph;
    renderGraph(
      this.graphPane,
      graph,
      {
        onSelect: (id) => void this.selectCommit(id),
        onAnnotate: (id) => void this.selectCommit(id, true),
        onRestore: (id) => void this.restore(id),
        onBranch: (id) => void this.branchFrom(id),
      },
      this.api.base,
    );
    if (this.selectedId) this.markSelected(this.selectedId);
    const head = graph.head;
    this.statusBox.textContent =
      head.mode === "branch"
        ? `on ${head.value} @ ${head.commit.slice(0, 10)}`
        : `detached @ ${head.commit.slice(0, 10)}`;
  }

  private markSelected(id: string): void {
    for (const node of this.graphPane.querySelectorAll(".graph-node")) {
      node.classList.toggle(
        "graph-node-selected",
        (node as HTMLElement).dataset["commit"] === id,
      );
    }
  }

  // -- commit detail -------------------------------------------------------

  async selectCommit(id: string, focusAnnotate = false): Promise<void> {
    const detail = await this.run(() => this.api.getCommit(id));
    if (!detail) return;
    this.selectedId = detail.id;
    this.markSelected(detail.id);
    this.renderDetail(detail);
    if (focusAnnotate) {
      const input = this.detailPane.querySelector<HTMLTextAreaElement>(
        ".annotate-form textarea",
      );
      input?.focus();
    }
  }

  private renderDetail(detail: CommitDetail): void {
    const doc = this.doc;
    const box = el(doc, "div", "detail-content");
    box.appendChild(el(doc, "h2", "detail-message", detail.message));
    const meta = el(doc, "p", "detail-meta");
    meta.textContent = `${detail.kind} by ${detail.author} at ${detail.timestamp}`;
    box.appendChild(meta);
    box.appendChild(el(doc, "code", "detail-id", detail.id));

    const img = doc.createElement("img");
    img.className = "detail-screenshot";
    img.alt = "state screenshot";
    img.src = this.api.screenshotUrl(detail);
    box.appendChild(img);

    const facts = el(doc, "p", "detail-facts");
    facts.textContent = `${detail.snapshot.measurements.length} measurement(s), ${detail.parents.length} parent(s)`;
    box.appendChild(facts);

    const list = el(doc, "ul", "detail-annotations");
    for (const annotation of detail.annotations) {
      const item = el(doc, "li", "annotation-item");
      item.textContent = `${annotation.author}: ${annotation.text}`;
      list.appendChild(item);
    }
    box.appendChild(list);

    const form = el(doc, "form", "annotate-form");
    const author = doc.createElement("input");
    author.name = "author";
    author.placeholder = "author";
    const text = doc.createElement("textarea");
    text.name = "text";
    text.placeholder = "annotation";
    const submit = el(doc, "button", "annotate-submit", "annotate");
    submit.setAttribute("type", "submit");
    form.append(author, text, submit);
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.annotate(detail.id, author.value, text.value);
    });
    box.appendChild(form);

    const pin = el(doc, "button", "detail-pin", "pin to mind map");
    pin.addEventListener("click", () => {
      this.mindmap.addState(detail.id, detail.message.slice(0, 30));
    });
    box.appendChild(pin);

    this.detailPane.replaceChildren(box);
  }

  // -- mutations (server ack first, then re-render) -------------------------

  async annotate(id: string, author: string, text: string): Promise<void> {
    const saved = await this.run(() => this.api.annotate(id, author, text));
    if (!saved) return;
    await this.selectCommit(id);
    await this.refreshGraph();
  }

  async restore(ref: string): Promise<string | null> {
    const result = await this.run(() => this.api.restore(ref));
    if (!result) return null;
    await this.refreshGraph();
    this.statusBox.textContent = `restored ${result.commit.slice(0, 10)}`;
    return result.commit;
  }

  /** Branching is restore plus continue: the server starts branch-<n>
   * automatically on the next interaction recorded off a non-tip state. */
  async branchFrom(ref: string): Promise<string | null> {
    const commit = await this.restore(ref);
    if (commit) {
      this.statusBox.textContent = `at ${commit.slice(0, 10)}; next interaction opens a new branch`;
    }
    return commit;
  }

  async redo(ref: string): Promise<void> {
    const result = await this.run(() => this.api.redo(ref));
    if (!result) return;
    await this.refreshGraph();
    this.statusBox.textContent = `redo applied as ${result.commit.slice(0, 10)}`;
  }

  // -- mindmap / notes -------------------------------------------------------

  async reloadMindmap(): Promise<void> {
    if (this.mindmap.dirty) return; // never clobber edits in progress
    const mindmap = await this.run(() => this.api.getMindmap());
    if (mindmap) this.mindmap.load(mindmap);
  }

  async reloadNotes(): Promise<void> {
    if (this.notes.dirty) return;
    const text = await this.run(() => this.api.getNotes());
    if (text !== null) this.notes.load(text);
  }

  async saveMindmap(): Promise<void> {
    const result = await this.run(() => this.api.putMindmap(this.mindmap.serialize()));
    if (!result) return;
    this.mindmap.dirty = false;
    this.mindmapStatus.textContent = result.commit ? "saved" : "unchanged";
  }

  async saveNotes(): Promise<void> {
    const result = await this.run(() => this.api.putNotes(this.notes.text));
    if (!result) return;
    this.notes.markSaved();
    this.notesStatus.textContent = result.commit ? "saved" : "unchanged";
  }

  async flushPendingEdits(): Promise<void> {
    if (this.mindmap.dirty) await this.saveMindmap();
    if (this.notes.dirty) await this.saveNotes();
  }

  // -- live updates ------------------------------------------------------------

  private async onChange(event: ChangeEvent): Promise<void> {
    await this.refreshGraph();
    if (event.event === "annotation" && event.commit === this.selectedId) {
      await this.selectCommit(event.commit);
    }
    if (event.event === "commit") {
      const kind = event["kind"];
      if (kind === "mindmap_update") await this.reloadMindmap();
      if (kind === "notes_update") await this.reloadNotes();
    }
  }
}
