// Console wiring: session lifecycle, the timeline scrubber, click-to-ask
// query menus, side-by-side plan panes, and violation highlighting.
// All solving happens server-side; this file only moves JSON around.

import { ApiError, Client, PremiseError } from "./api.js";
import {
  atomHighlights, Highlight, makespan, positionsAt, renderGrid,
} from "./grid.js";
import { optionsForAgent, optionsForCell, QueryOption } from "./queryBuilder.js";
import { renderEntry, transcript } from "./conversation.js";
import type {
  ExplanationDoc, PlanDoc, QueryDoc, SessionView,
} from "./types.js";

export class App {
  client: Client;
  session: SessionView | null = null;
  t = 0;
  altPlan: PlanDoc | null = null;
  highlights: Highlight[] = [];
  entries: ExplanationDoc[] = [];
  busy = false;

  constructor(private root: Document, base = "") {
    this.client = new Client(base);
  }

  el<T extends HTMLElement>(id: string): T {
    const node = this.root.getElementById(id);
    if (!node) throw new Error(`missing #${id}`);
    return node as T;
  }

  async start(): Promise<void> {
    try {
      const examples = await this.client.examples();
      const picker = this.el<HTMLSelectElement>("example-picker");
      picker.innerHTML = examples
        .map((e) => `<option value="${e.name}">${e.name}</option>`)
        .join("");
      this.el<HTMLButtonElement>("load-btn").addEventListener("click", () => {
        const choice = examples.find((e) => e.name === picker.value);
        if (choice) void this.load(choice.instance, choice.plan);
      });
      this.el<HTMLInputElement>("timeline").addEventListener("input", (ev) => {
        this.t = parseInt((ev.currentTarget as HTMLInputElement).value, 10);
        this.redraw();
      });
      this.el<HTMLButtonElement>("pop-btn").addEventListener("click", () => {
        void this.pop();
      });
      this.el<HTMLButtonElement>("reset-btn").addEventListener("click", () => {
        void this.reset();
      });
      this.el<HTMLButtonElement>("export-btn").addEventListener("click", () => {
        this.exportTranscript();
      });
    } catch (err) {
      this.banner(`service unreachable: ${String(err)} - retry?`, true);
    }
  }

  banner(message: string, retry = false): void {
    const b = this.el<HTMLDivElement>("banner");
    b.textContent = message;
    b.classList.toggle("hidden", message === "");
    if (retry) {
      const btn = this.root.createElement("button");
      btn.textContent = "retry";
      btn.addEventListener("click", () => void this.start());
      b.appendChild(btn);
    }
  }

  async load(instance: SessionView["instance"], plan?: PlanDoc): Promise<void> {
    this.banner("");
    try {
      this.session = await this.client.createSession(instance, plan);
    } catch (err) {
      this.banner(String(err), true);
      return;
    }
    this.t = 0;
    this.altPlan = null;
    this.highlights = [];
    this.entries = [];
    this.redraw();
  }

  currentPlan(): PlanDoc | null {
    return this.session?.plan ?? null;
  }

  redraw(): void {
    if (!this.session) return;
    const plan = this.currentPlan();
    const span = plan ? makespan(plan) : 0;
    const slider = this.el<HTMLInputElement>("timeline");
    slider.max = String(span);
    if (this.t > span) this.t = span;
    slider.value = String(this.t);
    this.el("timeline-label").textContent = `t = ${this.t} / ${span}`;
    this.el("grid-pane").innerHTML = renderGrid(
      this.session.instance, plan, this.t, { highlights: this.highlights },
    );
    this.el("alt-pane").innerHTML = this.altPlan
      ? renderGrid(this.session.instance, this.altPlan, this.t,
                   { variant: "alt" })
      : "";
    this.wireGridClicks();
    this.renderSidebar();
  }

  wireGridClicks(): void {
    if (!this.session) return;
    const plan = this.currentPlan();
    const pane = this.el("grid-pane");
    pane.querySelectorAll<HTMLElement>(".robot").forEach((node) => {
      node.addEventListener("click", (ev) => {
        ev.stopPropagation();
        const agent = parseInt(node.dataset.agent!, 10);
        if (!plan) return;
        const pos = positionsAt(plan, this.t).find((p) => p.agent === agent);
        const opts: QueryOption[] = [];
        if (pos && pos.cell !== null && !pos.done) {
          opts.push(...optionsForCell(
            this.session!.instance, plan, agent, pos.cell, this.t,
          ));
        }
        opts.push(...optionsForAgent(this.session!.instance, plan, agent));
        this.showQueryMenu(opts);
      });
    });
    if (!this.session.has_plan) {
      this.showQueryMenu([
        { query: { kind: "QU" }, label: "why is there no solution?" },
      ]);
    }
  }

  showQueryMenu(options: QueryOption[]): void {
    const menu = this.el("query-menu");
    menu.innerHTML = options
      .map((o, i) =>
        `<button class="query-option" data-index="${i}">${o.label}</button>`)
      .join("");
    menu.querySelectorAll<HTMLButtonElement>(".query-option").forEach((btn) => {
      btn.addEventListener("click", () => {
        const opt = options[parseInt(btn.dataset.index!, 10)];
        void this.submit(opt.query);
      });
    });
  }

  async submit(query: QueryDoc): Promise<void> {
    if (!this.session || this.busy) return;  // one in-flight query only
    this.busy = true;
    this.el("query-status").textContent = "solving...";
    try {
      const expl = await this.client.query(this.session.session_id, query);
      this.entries.push(expl);
      if (expl.accumulated) this.session.accumulated = expl.accumulated;
      if (expl.current_plan !== undefined && expl.current_plan !== null) {
        this.session.plan = expl.current_plan;
        this.session.has_plan = true;
      }
      this.altPlan = expl.alternative_plan ?? null;
      this.highlights = atomHighlights([
        ...(expl.violations_current ?? []),
        ...(expl.violations_any ?? []),
      ]);
      const panel = this.el("conversation");
      panel.insertAdjacentHTML("beforeend", renderEntry(expl));
      this.el("query-status").textContent = "";
    } catch (err) {
      if (err instanceof PremiseError) {
        this.el("query-status").textContent = `not observed: ${err.message}`;
      } else if (err instanceof ApiError && err.status === 409) {
        this.el("query-status").textContent = "session busy";
      } else {
        this.banner(String(err), true);
      }
    } finally {
      this.busy = false;
      this.redraw();
    }
  }

  renderSidebar(): void {
    if (!this.session) return;
    this.el("accumulated").innerHTML = this.session.accumulated
      .map((c) => `<li>${c.text}</li>`)
      .join("");
  }

  async pop(): Promise<void> {
    if (!this.session) return;
    try {
      this.session = await this.client.pop(this.session.session_id);
      this.entries.pop();
      const panel = this.el("conversation");
      if (panel.lastElementChild) panel.lastElementChild.remove();
      this.altPlan = null;
      this.highlights = [];
      this.redraw();
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.el("query-status").textContent = "nothing to pop";
      }
    }
  }

  async reset(): Promise<void> {
    if (!this.session) return;
    this.session = await this.client.reset(this.session.session_id);
    this.entries = [];
    this.el("conversation").innerHTML = "";
    this.altPlan = null;
    this.highlights = [];
    this.redraw();
  }

  exportTranscript(): void {
    const text = transcript(this.entries);
    const area = this.el<HTMLTextAreaElement>("transcript");
    area.value = text;
    area.classList.remove("hidden");
  }
}

export function boot(doc: Document, base = ""): App {
  const app = new App(doc, base);
  void app.start();
  return app;
}
