// Typed client over the session service. The UI never solves anything
// itself; every answer comes from these endpoints.

import type {
  ExampleEntry, ExplanationDoc, HistoryEntry, InstanceDoc, PlanDoc,
  QueryDoc, SessionView,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, message: string) {
    super(message);
  }
}

export class PremiseError extends ApiError {}

async function parseError(res: Response): Promise<never> {
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // keep the status text
  }
  if (res.status === 422) throw new PremiseError(res.status, detail);
  throw new ApiError(res.status, detail);
}

export class Client {
  constructor(private base: string = "") {}

  private url(path: string): string {
    return `${this.base}${path}`;
  }

  async examples(): Promise<ExampleEntry[]> {
    const res = await fetch(this.url("/api/instances/examples"));
    if (!res.ok) await parseError(res);
    return (await res.json()).examples;
  }

  async createSession(
    instance: InstanceDoc, plan?: PlanDoc,
  ): Promise<SessionView> {
    const res = await fetch(this.url("/api/sessions"), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ instance, plan: plan ?? null }),
    });
    if (res.status === 422) return res.json(); // infeasible: QU-only session
    if (!res.ok) await parseError(res);
    return res.json();
  }

  async getSession(id: string): Promise<SessionView> {
    const res = await fetch(this.url(`/api/sessions/${id}`));
    if (!res.ok) await parseError(res);
    return res.json();
  }

  async history(id: string): Promise<HistoryEntry[]> {
    const res = await fetch(this.url(`/api/sessions/${id}/history`));
    if (!res.ok) await parseError(res);
    return (await res.json()).history;
  }

  /** Post a query; transparently polls when the service parks it as a job. */
  async query(
    id: string, query: QueryDoc, anytime?: number,
    pollMs = 250,
  ): Promise<ExplanationDoc> {
    const res = await fetch(this.url(`/api/sessions/${id}/query`), {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({ query, anytime }),
    });
    if (res.status === 202) {
      const { job } = await res.json();
      return this.pollJob(job, pollMs);
    }
    if (!res.ok) await parseError(res);
    return res.json();
  }

  private async pollJob(token: string, pollMs: number): Promise<ExplanationDoc> {
    for (;;) {
      const res = await fetch(this.url(`/api/jobs/${token}`));
      if (res.status === 202) {
        await new Promise((resolve) => setTimeout(resolve, pollMs));
        continue;
      }
      if (!res.ok) await parseError(res);
      return res.json();
    }
  }

  async pop(id: string): Promise<SessionView> {
    const res = await fetch(this.url(`/api/sessions/${id}/pop`), {
      method: "POST",
    });
    if (!res.ok) await parseError(res);
    return res.json();
  }

  async reset(id: string): Promise<SessionView> {
    const res = await fetch(this.url(`/api/sessions/${id}/reset`), {
      method: "POST",
    });
    if (!res.ok) await parseError(res);
    return res.json();
  }
}
