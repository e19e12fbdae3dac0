// End-to-end: drive the console's own code against a live service.
//
// The service is the real thing (uvicorn running the session API); the
// browser is happy-dom. The flow mirrors an engineer's session: load the
// scenario1 fixture, scrub to t=2 and check the plan table's positions,
// click the waiting robot, submit QW1, see the alternative side by side,
// then ask about the other robot's wait and see the two collision atoms
// highlighted on the grid.

import { spawn, ChildProcess } from "node:child_process";
import { mkdtempSync, readFileSync } from "node:fs";
import { tmpdir } from "node:os";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { Window } from "happy-dom";
import { afterAll, beforeAll, describe, expect, test } from "vitest";

import { App } from "../src/app.js";
import { Client } from "../src/api.js";

const here = dirname(fileURLToPath(import.meta.url));
const repoRoot = join(here, "..", "..");
const PORT = 8419 + Math.floor(Math.random() * 400);
const BASE = `http://127.0.0.1:${PORT}`;

let service: ChildProcess;

async function waitForService(): Promise<void> {
  for (let i = 0; i < 200; i++) {
    try {
      const res = await fetch(`${BASE}/api/instances/examples`);
      if (res.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((r) => setTimeout(r, 100));
  }
  throw new Error("service did not come up");
}

function makeDocument(): Document {
  const window = new Window({
    settings: {
      disableJavaScriptFileLoading: true,
      disableJavaScriptEvaluation: true,
    },
  });
  const html = readFileSync(join(here, "..", "index.html"), "utf-8");
  const body = html.slice(html.indexOf("<body>") + 6, html.indexOf("</body>"));
  window.document.body.innerHTML = body;
  return window.document as unknown as Document;
}

beforeAll(async () => {
  service = spawn(
    "python3",
    ["-m", "mapfx.cli", "serve", "--port", String(PORT),
     "--data-dir", mkdtempSync(join(tmpdir(), "mapfx-e2e-"))],
    { cwd: repoRoot, stdio: "ignore" },
  );
  await waitForService();
}, 60000);

afterAll(() => {
  service?.kill();
});

describe("console against a live service", () => {
  test("scenario1 walkthrough", async () => {
    const doc = makeDocument();
    const app = new App(doc, BASE);
    await app.start();

    // load the scenario1 fixture with its questioned plan
    const examples = await new Client(BASE).examples();
    const scenario1 = examples.find((e) => e.name === "scenario1")!;
    await app.load(scenario1.instance, scenario1.plan);
    expect(app.session).not.toBeNull();

    // scrub to t=2: the worked example's positions
    app.t = 2;
    app.redraw();
    const grid = doc.getElementById("grid-pane")!;
    const robot1 = grid.querySelector('[data-agent="1"]') as HTMLElement;
    const robot2 = grid.querySelector('[data-agent="2"]') as HTMLElement;
    expect(robot1.getAttribute("style")).toBe("--row:1;--col:1"); // cell 6
    expect(robot2.getAttribute("style")).toBe("--row:1;--col:2"); // cell 7

    // back to the wait: clicking robot 2 at t=0 offers the wait questions
    app.t = 0;
    app.redraw();
    const waiting = doc.getElementById("grid-pane")!
      .querySelector('[data-agent="2"]') as HTMLElement;
    waiting.click();
    const menu = doc.getElementById("query-menu")!;
    const labels = Array.from(
      menu.querySelectorAll(".query-option"),
    ).map((b) => b.textContent);
    expect(labels).toContain("why wait at 8?");

    // submit QW1(2,8): an alternative appears side by side
    await app.submit({ kind: "QW1", agent: 2, x: 8 });
    expect(app.entries).toHaveLength(1);
    expect(app.entries[0].kind).toBe("alternative");
    const altPane = doc.getElementById("alt-pane")!;
    expect(altPane.innerHTML).toContain("grid alt");
    expect(doc.getElementById("conversation")!.innerHTML)
      .toContain("does not have to wait at Cell 8");
    expect(doc.getElementById("accumulated")!.innerHTML)
      .toContain("agent 2 never waits at cell 8");

    // follow-up QW1(1,11): counterfactual with the two collision atoms
    await app.submit({ kind: "QW1", agent: 1, x: 11 });
    expect(app.entries).toHaveLength(2);
    const second = app.entries[1];
    expect(second.kind).toBe("counterfactual");
    const atoms = (second.violations_current ?? []).map(
      (a) => `${a.kind}(${a.args.join(",")})`,
    );
    expect(atoms).toEqual(["collision(1,2,1,7)", "collision(1,2,2,6)"]);

    // the collision cells light up at their time steps
    app.t = 1;
    app.redraw();
    let violated = doc.getElementById("grid-pane")!
      .querySelectorAll(".cell.violated");
    expect(Array.from(violated).map((c) => (c as HTMLElement).dataset.cell))
      .toContain("7");
    app.t = 2;
    app.redraw();
    violated = doc.getElementById("grid-pane")!
      .querySelectorAll(".cell.violated");
    expect(Array.from(violated).map((c) => (c as HTMLElement).dataset.cell))
      .toContain("6");

    // the SAT-only accumulation policy: one constraint after two queries
    expect(app.session!.accumulated).toHaveLength(1);

    // pop restores the single-entry conversation
    await app.pop();
    expect(app.entries).toHaveLength(1);

    // transcript export
    app.exportTranscript();
    const area = doc.getElementById("transcript") as HTMLTextAreaElement;
    expect(area.value).toContain("QW1(agent=2, x=8)");
  }, 60000);

  test("infeasible fixture offers QU and renders the suggestion", async () => {
    const doc = makeDocument();
    const app = new App(doc, BASE);
    await app.start();
    const examples = await new Client(BASE).examples();
    const scenario6 = examples.find((e) => e.name === "scenario6")!;
    await app.load(scenario6.instance);
    expect(app.session!.has_plan).toBe(false);
    // the QU option is offered for planless sessions
    const menu = doc.getElementById("query-menu")!;
    expect(menu.innerHTML).toContain("why is there no solution?");
    await app.submit({ kind: "QU" });
    expect(app.entries[0].kind).toBe("infeasibility");
    expect(doc.getElementById("conversation")!.innerHTML)
      .toContain("suggest removing obstacle(s): 2");
  }, 60000);

  test("premise-not-observed shows inline, not as a crash", async () => {
    const doc = makeDocument();
    const app = new App(doc, BASE);
    await app.start();
    const examples = await new Client(BASE).examples();
    const scenario1 = examples.find((e) => e.name === "scenario1")!;
    await app.load(scenario1.instance, scenario1.plan);
    await app.submit({ kind: "QW1", agent: 1, x: 7 });
    expect(app.entries).toHaveLength(0);
    expect(doc.getElementById("query-status")!.textContent)
      .toContain("not observed");
  }, 60000);
});
