// The explanation conversation panel: each answered query becomes one
// entry; alternative answers carry a shorter/equal/longer badge, and
// counterfactual answers list their violation atoms.

import type { ExplanationDoc, QueryDoc, ViolationAtomDoc } from "./types.js";

export function queryLabel(q: QueryDoc): string {
  const record = q as unknown as Record<string, unknown>;
  const args = ["agent", "x", "y", "s", "n", "m", "l"]
    .filter((k) => record[k] !== undefined)
    .map((k) => `${k}=${record[k]}`);
  return args.length ? `${q.kind}(${args.join(", ")})` : q.kind;
}

export function atomLabel(a: ViolationAtomDoc): string {
  return `${a.kind}(${a.args.join(",")})`;
}

function esc(s: string): string {
  return s.replace(/&/g, "&amp;").replace(/</g, "&lt;").replace(/>/g, "&gt;");
}

function atomsBlock(title: string, atoms: ViolationAtomDoc[] | undefined): string {
  if (!atoms || atoms.length === 0) return "";
  const items = atoms.map(
    (a) => `<li class="atom atom-${esc(a.kind)}">${esc(atomLabel(a))}</li>`,
  );
  return `<div class="atoms"><span class="atoms-title">${esc(title)}</span>` +
    `<ul>${items.join("")}</ul></div>`;
}

export function renderEntry(e: ExplanationDoc): string {
  const badge = e.comparison
    ? `<span class="badge badge-${e.comparison}">${e.comparison}</span>`
    : "";
  const suggestion = e.suggestion
    ? `<div class="suggestion">suggest removing obstacle(s): ` +
      `${e.suggestion.remove_obstacles.join(", ")}</div>`
    : "";
  return `<div class="entry entry-${e.kind}" data-kind="${e.kind}">` +
    `<div class="entry-query">${esc(queryLabel(e.query))}</div>` +
    `<div class="entry-text">${esc(e.text)}</div>` + badge +
    atomsBlock("with the current plan", e.violations_current) +
    atomsBlock("with any plan", e.violations_any) +
    suggestion +
    `<div class="entry-stats">${e.solver_calls} solver call(s)</div>` +
    `</div>`;
}

/** Plain-text transcript of the whole conversation, for export. */
export function transcript(entries: ExplanationDoc[]): string {
  return entries
    .map((e) => `> ${queryLabel(e.query)}\n${e.text}`)
    .join("\n\n");
}
