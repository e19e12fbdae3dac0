// Pure rendering: everything here is a function of (instance, plan, t)
// plus optional highlights, returning plain data or an HTML string.
// No state, no fetch - the snapshot tests rely on that.

import type { InstanceDoc, PlanDoc, ViolationAtomDoc } from "./types.js";

export interface AgentPosition {
  agent: number;
  /** Cell id, or null while in transit. */
  cell: number | null;
  /** When in transit: the crossing's endpoints. */
  between?: [number, number];
  battery: number;
  /** Plan already finished (agent rests at its goal, rendered faded). */
  done: boolean;
}

export function makespan(plan: PlanDoc): number {
  return Math.max(...plan.agents.map((a) => a.steps[a.steps.length - 1].t));
}

/** Where every agent is at time t; finished agents stay at their goal. */
export function positionsAt(plan: PlanDoc, t: number): AgentPosition[] {
  return plan.agents.map((a) => {
    const last = a.steps[a.steps.length - 1];
    if (t > last.t) {
      return {
        agent: a.id, cell: last.loc as number, battery: last.battery,
        done: true,
      };
    }
    const step = a.steps[t];
    if (step.loc === "intransit") {
      const from = a.steps[t - 1].loc as number;
      const to = a.steps[t + 1].loc as number;
      return {
        agent: a.id, cell: null, between: [from, to],
        battery: step.battery, done: false,
      };
    }
    return { agent: a.id, cell: step.loc, battery: step.battery, done: false };
  });
}

export interface Highlight {
  cell: number;
  t?: number; // undefined: highlight at every time step
  label: string;
}

/** Violation atoms as grid highlights (cell + optional time). */
export function atomHighlights(atoms: ViolationAtomDoc[]): Highlight[] {
  const out: Highlight[] = [];
  for (const a of atoms) {
    if (a.kind === "collision") {
      const [, , t, x] = a.args as number[];
      out.push({ cell: x, t, label: `collision@${t}` });
    } else if (a.kind === "swap" || a.kind === "slow_collision1"
               || a.kind === "slow_collision2") {
      const [, , t, x, y] = a.args as number[];
      out.push({ cell: x, t, label: `${a.kind}@${t}` });
      out.push({ cell: y, t, label: `${a.kind}@${t}` });
    } else if (a.kind === "obstacle") {
      const [, t, x] = a.args as number[];
      out.push({ cell: x, t, label: `obstacle@${t}` });
    } else if (a.kind === "goal" || a.kind === "waypoint") {
      const [, x] = a.args as number[];
      out.push({ cell: x, label: a.kind });
    } else if (a.kind === "min_battery") {
      const [, t, loc] = a.args;
      if (typeof loc === "number") {
        out.push({ cell: loc, t: t as number, label: `battery@${t}` });
      }
    }
  }
  return out;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export interface RenderOptions {
  highlights?: Highlight[];
  /** Extra class on the root, e.g. "alt" for the side-by-side pane. */
  variant?: string;
}

/**
 * One grid snapshot as an HTML string. Cells carry data-cell attributes
 * so the app can wire click handlers; agents carry data-agent. Slow
 * cells, obstacles, chargers, and per-agent waypoints are marked with
 * classes; an in-transit robot is placed between its crossing endpoints.
 * Instances without a grid shorthand fall back to renderTable.
 */
export function renderGrid(
  inst: InstanceDoc, plan: PlanDoc | null, t: number,
  opts: RenderOptions = {},
): string {
  if (!inst.grid) return renderTable(inst, plan, t);
  const { rows, cols } = inst.grid;
  const slow = new Set(inst.grid.slow ?? []);
  const obstacles = new Set(inst.grid.obstacles ?? []);
  const charging = new Set(inst.grid.charging ?? []);
  const waypointOwners = new Map<number, number[]>();
  for (const a of inst.agents) {
    for (const w of a.waypoints ?? []) {
      waypointOwners.set(w, [...(waypointOwners.get(w) ?? []), a.id]);
    }
  }
  const goals = new Map(inst.agents.map((a) => [a.goal, a.id]));
  const active = new Map<number, Highlight[]>();
  for (const h of opts.highlights ?? []) {
    if (h.t === undefined || h.t === t) {
      active.set(h.cell, [...(active.get(h.cell) ?? []), h]);
    }
  }

  const cells: string[] = [];
  for (let r = 0; r < rows; r++) {
    for (let c = 0; c < cols; c++) {
      const id = r * cols + c + 1;
      const classes = ["cell"];
      if (slow.has(id)) classes.push("slow");
      if (obstacles.has(id)) classes.push("obstacle");
      if (charging.has(id)) classes.push("charging");
      if (active.has(id)) classes.push("violated");
      const marks: string[] = [];
      for (const owner of waypointOwners.get(id) ?? []) {
        marks.push(`<span class="waypoint" title="waypoint of robot ${owner}">` +
                   `★${owner}</span>`);
      }
      const goalOf = goals.get(id);
      if (goalOf !== undefined) {
        marks.push(`<span class="goal" title="goal of robot ${goalOf}">` +
                   `G${goalOf}</span>`);
      }
      const titles = (active.get(id) ?? []).map((h) => esc(h.label)).join(", ");
      cells.push(
        `<div class="${classes.join(" ")}" data-cell="${id}"` +
        (titles ? ` title="${titles}"` : "") +
        `><span class="cellid">${id}</span>${marks.join("")}</div>`,
      );
    }
  }

  const robots: string[] = [];
  if (plan) {
    for (const p of positionsAt(plan, t)) {
      const classes = ["robot", `robot-${p.agent}`];
      if (p.done) classes.push("done");
      let style: string;
      if (p.cell !== null) {
        const r = Math.floor((p.cell - 1) / cols);
        const c = (p.cell - 1) % cols;
        style = `--row:${r};--col:${c}`;
      } else {
        const [u, v] = p.between!;
        const ru = Math.floor((u - 1) / cols), cu = (u - 1) % cols;
        const rv = Math.floor((v - 1) / cols), cv = (v - 1) % cols;
        style = `--row:${(ru + rv) / 2};--col:${(cu + cv) / 2}`;
        classes.push("intransit");
      }
      robots.push(
        `<div class="${classes.join(" ")}" data-agent="${p.agent}" ` +
        `style="${style}" title="robot ${p.agent}, battery ${p.battery}">` +
        `${p.agent}<span class="battery">${p.battery}</span></div>`,
      );
    }
  }

  return `<div class="grid ${esc(opts.variant ?? "")}" ` +
    `style="--rows:${rows};--cols:${cols}" data-t="${t}">` +
    cells.join("") + robots.join("") + `</div>`;
}

/** Fallback for non-grid instances: occupancy as a table. */
export function renderTable(
  inst: InstanceDoc, plan: PlanDoc | null, t: number,
): string {
  const rows = (plan ? positionsAt(plan, t) : []).map((p) => {
    const where = p.cell !== null
      ? `cell ${p.cell}`
      : `between ${p.between![0]} and ${p.between![1]}`;
    return `<tr data-agent="${p.agent}"><td>robot ${p.agent}</td>` +
      `<td>${where}${p.done ? " (finished)" : ""}</td>` +
      `<td>${p.battery}</td></tr>`;
  });
  return `<table class="fallback" data-t="${t}">` +
    `<thead><tr><th>robot</th><th>location</th><th>battery</th></tr></thead>` +
    `<tbody>${rows.join("")}</tbody></table>`;
}
