import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";
import { dirname, join } from "node:path";

import type { InstanceDoc, PlanDoc } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));
const dataDir = join(here, "..", "..", "src", "mapfx", "data");

export function instanceFixture(name: string): InstanceDoc {
  return JSON.parse(readFileSync(join(dataDir, `${name}.json`), "utf-8"));
}

export function planFixture(name: string): PlanDoc {
  return JSON.parse(readFileSync(join(dataDir, `${name}.json`), "utf-8"));
}
