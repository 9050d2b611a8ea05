/** Shared notes pane: a plain textarea with dirty tracking. */

export class NotesView {
  private readonly textarea: HTMLTextAreaElement;
  private baseline = "";
  onDirtyChange?: (dirty: boolean) => void;

  constructor(container: HTMLElement) {
    this.textarea = container.ownerDocument.createElement("textarea");
    this.textarea.className = "notes-input";
    this.textarea.addEventListener("input", () => {
      this.onDirtyChange?.(this.dirty);
    });
    container.replaceChildren(this.textarea);
  }

  load(text: string): void {
    this.textarea.value = text;
    this.baseline = text;
    this.onDirtyChange?.(false);
  }

  get text(): string {
    return this.textarea.value;
  }

  get dirty(): boolean {
    return this.textarea.value !== this.baseline;
  }

  markSaved(): void {
    this.baseline = this.textarea.value;
    this.onDirtyChange?.(false);
  }
}
