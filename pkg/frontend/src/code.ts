import type { ApiClient } from "./api.js";
import type { Store } from "./state.js";
import type { CodeLocation, SourcePayload } from "./types.js";

/** Code browser: the mapped locations for the selected task, and the file
 * window around the chosen one with the mapped line highlighted. */
export class CodeView {
  private locations: CodeLocation[] = [];

  constructor(
    private readonly host: HTMLElement,
    private readonly store: Store,
    private readonly api: ApiClient,
    private readonly modelId: () => string | null,
  ) {}

  async showTask(taskId: number): Promise<void> {
    const model = this.modelId();
    if (!model) return;
    const payload = await this.api.taskCode(model, taskId);
    this.locations = payload.locations;
    this.renderLocations(taskId);
    const first = this.locations[0];
    if (first) await this.openLocation(first);
  }

  private renderLocations(taskId: number): void {
    this.host.innerHTML = "";
    const title = document.createElement("h3");
    title.textContent = `Source locations for task ${taskId}`;
    this.host.appendChild(title);
    const list = document.createElement("ul");
    list.className = "code-locations";
    for (const loc of this.locations) {
      const li = document.createElement("li");
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = `${loc.file}:${loc.line}`;
      link.addEventListener("click", (ev) => {
        ev.preventDefault();
        void this.openLocation(loc);
      });
      li.appendChild(link);
      li.appendChild(document.createTextNode(`  ${loc.snippet}`));
      list.appendChild(li);
    }
    this.host.appendChild(list);
    const pane = document.createElement("pre");
    pane.className = "code-pane";
    this.host.appendChild(pane);
  }

  private async openLocation(loc: CodeLocation): Promise<void> {
    const model = this.modelId();
    if (!model) return;
    const radius = 12;
    const payload = await this.api.source(model, loc.file, {
      start: Math.max(1, loc.line - radius),
      end: loc.line + radius,
    });
    this.renderSource(payload, loc.line);
  }

  private renderSource(payload: SourcePayload, highlight: number): void {
    const pane = this.host.querySelector(".code-pane");
    if (!pane) return;
    pane.innerHTML = "";
    const lines = payload.text.split("\n");
    lines.forEach((text, i) => {
      const n = payload.start_line + i;
      if (i === lines.length - 1 && text === "") return;
      const row = document.createElement("div");
      row.className = "code-line" + (n === highlight ? " highlight" : "");
      const num = document.createElement("span");
      num.className = "line-number";
      num.textContent = String(n).padStart(4);
      row.appendChild(num);
      row.appendChild(document.createTextNode(" " + text));
      pane.appendChild(row);
    });
  }
}
