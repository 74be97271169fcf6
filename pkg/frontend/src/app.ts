/**
 * Browser bootstrap. One annotator per browser session: the name comes
 * from the ?annotator= query parameter or a login prompt, and everything
 * after that is poll /next, render, submit. All protocol state lives on
 * the server; this file only moves JSON between it and the page.
 */

import { ApiClient, ApiError } from "./api.js";
import { DraftQueue } from "./drafts.js";
import {
  renderAdjudication,
  renderDashboard,
  renderItem,
  renderProgress,
} from "./render.js";
import { LabelSubmission, LabelValues, NextPayload } from "./types.js";
import { ValidationError } from "./validation.js";

const POLL_MS = 2000;

interface AppConfig {
  sessionId: string;
  annotator: string;
  baseUrl: string;
}

function readConfig(): AppConfig | null {
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  const annotator = params.get("annotator");
  if (!sessionId || !annotator) {
    return null;
  }
  return { sessionId, annotator, baseUrl: "" };
}

function renderLogin(root: HTMLElement): void {
  root.innerHTML = `
<form class="login">
  <h2>Join a session</h2>
  <label>session id <input name="session" required></label>
  <label>annotator <input name="annotator" required></label>
  <button type="submit">Start</button>
</form>`;
  const form = root.querySelector("form")!;
  form.addEventListener("submit", (event) => {
    event.preventDefault();
    const data = new FormData(form);
    const next = new URLSearchParams({
      session: String(data.get("session") ?? ""),
      annotator: String(data.get("annotator") ?? ""),
    });
    window.location.search = next.toString();
  });
}

function readForm(fieldset: Element): Partial<LabelValues> {
  const checked = (name: string): boolean =>
    (fieldset.querySelector(`input[name="${name}"]`) as HTMLInputElement | null)?.checked === true;
  const selected = (name: string): string | null => {
    const el = fieldset.querySelector(`select[name="${name}"]`) as HTMLSelectElement | null;
    return el && el.value !== "" ? el.value : null;
  };
  return {
    semantic_equivalence: checked("semantic_equivalence"),
    applicability: checked("applicability"),
    has_explanation: checked("has_explanation"),
    feedback_type: selected("feedback_type"),
    category: selected("category"),
  };
}

class App {
  private readonly client: ApiClient;
  private readonly queue: DraftQueue;
  private timer: number | undefined;
  private lastPhase = "";

  constructor(
    private readonly root: HTMLElement,
    private readonly config: AppConfig,
  ) {
    this.client = new ApiClient(config.baseUrl);
    this.queue = new DraftQueue(this.client, config.sessionId);
  }

  start(): void {
    void this.tick();
    this.timer = window.setInterval(() => void this.tick(), POLL_MS);
  }

  private async tick(): Promise<void> {
    try {
      await this.queue.flush();
      const next = await this.client.nextItem(this.config.sessionId, this.config.annotator);
      await this.render(next);
      this.setStatus(this.queue.size > 0 ? `${this.queue.size} drafts queued offline` : "");
    } catch (error) {
      if (error instanceof ApiError) {
        this.setStatus(`server rejected request: ${error.detail}`);
      } else {
        this.setStatus("offline; drafts are kept and resent automatically");
      }
    }
  }

  private async render(next: NextPayload): Promise<void> {
    const parts = [renderProgress(next)];
    if (next.phase === "adjudication") {
      const open = await this.client.adjudications(this.config.sessionId);
      parts.push(renderAdjudication(open.items));
    } else if (next.item) {
      parts.push(renderItem(next.item));
    } else if (next.phase === "closed") {
      const agreement = await this.client.agreement(this.config.sessionId);
      parts.push(renderDashboard(agreement));
    } else {
      parts.push(`<div class="idle">nothing to label right now</div>`);
    }
    const html = parts.join("\n");
    if (html !== this.root.dataset.rendered) {
      this.root.innerHTML = html;
      this.root.dataset.rendered = html;
      this.bind(next);
    }
    this.lastPhase = next.phase;
  }

  private bind(next: NextPayload): void {
    for (const button of this.root.querySelectorAll("button.submit-label")) {
      button.addEventListener("click", () => void this.submit(button, next));
    }
    for (const box of this.root.querySelectorAll('input[name="applicability"]')) {
      box.addEventListener("change", () => {
        const fieldset = box.closest("fieldset.label-form");
        if (!fieldset) {
          return;
        }
        const applicable = (box as HTMLInputElement).checked;
        for (const sel of fieldset.querySelectorAll("select")) {
          (sel as HTMLSelectElement).disabled = !applicable;
          if (!applicable) {
            (sel as HTMLSelectElement).value = "";
          }
        }
      });
    }
  }

  private async submit(button: Element, next: NextPayload): Promise<void> {
    const fieldset = button.closest("fieldset.label-form");
    if (!fieldset) {
      return;
    }
    const alias = (button as HTMLElement).dataset.alias ?? "";
    const values = readForm(fieldset);
    const resolutionBox = fieldset.closest(".resolution") as HTMLElement | null;
    try {
      if (resolutionBox) {
        await this.client.resolve(
          this.config.sessionId,
          resolutionBox.dataset.itemId ?? "",
          values as LabelValues,
        );
      } else {
        const submission: LabelSubmission = {
          annotator: this.config.annotator,
          sample_id: next.item?.sample_id ?? "",
          alias,
          ...(values as LabelValues),
        };
        await this.queue.submit(submission);
      }
      delete this.root.dataset.rendered;
      await this.tick();
    } catch (error) {
      this.showErrors(fieldset, error);
    }
  }

  private showErrors(fieldset: Element, error: unknown): void {
    const box = fieldset.querySelector(".field-errors");
    if (!box) {
      return;
    }
    if (error instanceof ValidationError) {
      box.textContent = error.errors.map((e) => e.message).join("; ");
    } else if (error instanceof ApiError) {
      box.textContent = error.detail;
    } else {
      box.textContent = "saved offline; will retry";
    }
  }

  private setStatus(text: string): void {
    const bar = document.querySelector("#status");
    if (bar) {
      bar.textContent = text;
    }
  }
}

export function main(): void {
  const root = document.querySelector("#app") as HTMLElement | null;
  if (!root) {
    return;
  }
  const config = readConfig();
  if (!config) {
    renderLogin(root);
    return;
  }
  new App(root, config).start();
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  main();
}
