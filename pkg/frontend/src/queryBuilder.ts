// Observation mining: which why-questions does the current plan support,
// and which of them attach to a clicked cell, robot, or time step.

import type { InstanceDoc, PlanDoc, QueryDoc } from "./types.js";

export interface WaitRun {
  agent: number;
  x: number;
  s: number;
  n: number;
}

export interface RechargeEvent {
  agent: number;
  x: number;
  s: number;
}

export interface Move {
  agent: number;
  x: number;
  y: number;
  s: number;
}

export function waitRuns(plan: PlanDoc): WaitRun[] {
  const runs: WaitRun[] = [];
  for (const a of plan.agents) {
    let t = 0;
    const L = a.steps.length - 1;
    while (t < L) {
      const here = a.steps[t].loc;
      if (here !== "intransit" && a.steps[t + 1].loc === here) {
        const s = t;
        while (t < L && a.steps[t + 1].loc === here) t++;
        runs.push({ agent: a.id, x: here as number, s, n: t - s });
      } else {
        t++;
      }
    }
  }
  return runs;
}

export function rechargeEvents(
  inst: InstanceDoc, plan: PlanDoc,
): RechargeEvent[] {
  const charging = new Set(
    inst.grid ? inst.grid.charging ?? [] : inst.charging ?? [],
  );
  const events: RechargeEvent[] = [];
  for (const a of plan.agents) {
    for (let t = 0; t + 1 < a.steps.length; t++) {
      const loc = a.steps[t].loc;
      if (loc !== "intransit" && charging.has(loc as number)
          && a.steps[t + 1].battery === instMax(inst)) {
        events.push({ agent: a.id, x: loc as number, s: t });
      }
    }
  }
  return events;
}

function instMax(inst: InstanceDoc): number {
  return inst.max_battery;
}

export function moves(plan: PlanDoc): Move[] {
  const out: Move[] = [];
  for (const a of plan.agents) {
    let t = 0;
    const L = a.steps.length - 1;
    while (t < L) {
      const here = a.steps[t].loc as number;
      const nxt = a.steps[t + 1].loc;
      if (nxt === "intransit") {
        out.push({ agent: a.id, x: here, y: a.steps[t + 2].loc as number, s: t });
        t += 2;
      } else if (nxt !== here) {
        out.push({ agent: a.id, x: here, y: nxt as number, s: t });
        t += 1;
      } else {
        t += 1;
      }
    }
  }
  return out;
}

export interface QueryOption {
  query: QueryDoc;
  label: string;
}

/** Questions a click on (agent at cell x, time t) supports. */
export function optionsForCell(
  inst: InstanceDoc, plan: PlanDoc, agent: number, x: number, t: number,
): QueryOption[] {
  const out: QueryOption[] = [];
  const run = waitRuns(plan).find(
    (r) => r.agent === agent && r.x === x && r.s <= t && t <= r.s + r.n,
  );
  if (run) {
    out.push(
      { query: { kind: "QW1", agent, x }, label: `why wait at ${x}?` },
      { query: { kind: "QW2", agent, x, s: run.s },
        label: `why wait at ${x} at t=${run.s}?` },
      { query: { kind: "QW3", agent, x, s: run.s, n: run.n },
        label: `why wait at ${x} for ${run.n} step(s)?` },
      { query: { kind: "QW4", agent, x, s: run.s, n: run.n },
        label: `why not wait fewer than ${run.n} step(s)?` },
    );
  }
  const recharge = rechargeEvents(inst, plan).find(
    (e) => e.agent === agent && e.x === x && e.s === t,
  );
  if (recharge) {
    out.push(
      { query: { kind: "QC1", agent, x }, label: `why charge at ${x}?` },
      { query: { kind: "QC2", agent, s: t }, label: `why charge at t=${t}?` },
      { query: { kind: "QC3", agent, x, s: t },
        label: `why charge at ${x} at t=${t}?` },
    );
  }
  out.push(
    { query: { kind: "QP2", agent, x }, label: `why visit ${x}?` },
    { query: { kind: "QP3", agent, x, s: t }, label: `why visit ${x} at t=${t}?` },
  );
  const departing = moves(plan).find(
    (m) => m.agent === agent && m.x === x && m.s === t,
  );
  if (departing) {
    out.push(
      { query: { kind: "QP4", agent, x, y: departing.y },
        label: `why move ${x} -> ${departing.y}?` },
      { query: { kind: "QP5", agent, x, y: departing.y, s: t },
        label: `why move ${x} -> ${departing.y} at t=${t}?` },
    );
  }
  return out;
}

/** Questions from the per-robot side panel. */
export function optionsForAgent(
  inst: InstanceDoc, plan: PlanDoc, agent: number,
): QueryOption[] {
  const entry = plan.agents.find((a) => a.id === agent);
  if (!entry) return [];
  const length = entry.steps.length - 1;
  const out: QueryOption[] = [];
  if (length >= 1) {
    out.push({
      query: { kind: "QP1", agent, l: length },
      label: `why no plan shorter than ${length}?`,
    });
  }
  const m = rechargeEvents(inst, plan).filter((e) => e.agent === agent).length;
  if (m >= 1) {
    out.push({
      query: { kind: "QC4", agent, m },
      label: `why charge ${m} time(s)?`,
    });
  }
  return out;
}
