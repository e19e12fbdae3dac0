#!/usr/bin/env python3
"""Compare the compiled search kernel against its interpreted twin.

The solver's inner loop lives in mapfx/solver/kernel.py; setup.py compiles
it with Cython and the import machinery prefers the extension.  This
script loads the pure-Python source alongside whatever variant the
package imported and times identical searches on bundled instances.

Usage: python scripts/benchmark_kernel.py [--repeat N]
"""

from __future__ import annotations

import argparse
import statistics
import time

from mapfx.fixtures import load_fixture
from mapfx.semantics import ALL_FAMILIES
from mapfx.solver import SoftConstraint, solve
from mapfx.solver import core as solver_core
from mapfx.solver import kernel as active_kernel
from mapfx.solver.constraints import CapChargeCount
from mapfx.solver.core import KERNEL_COMPILED, load_interpreted_kernel


def bench_case(kernel_module, name, inst, hard, soft, repeat):
    agent_ids = sorted(a.id for a in inst.agents)
    objective = tuple(inst.objective)
    prog, priorities = solver_core._compile_program(
        inst, agent_ids, hard, soft, objective
    )
    fronts = None
    if soft and len(priorities) == 1:
        fronts = [kernel_module.build_fronts(prog, i) for i in range(prog.n)]
    times = []
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = kernel_module.run_search(prog, fronts=fronts)
        times.append(time.perf_counter() - t0)
    status, _raw, cost, nodes, _models, _to = result
    return statistics.median(times), status, nodes


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    interpreted = load_interpreted_kernel()
    compiled = active_kernel if KERNEL_COMPILED else None
    if compiled is None:
        print("package imported the interpreted kernel (no extension built);")
        print("timings below cover the interpreted variant only\n")

    m1 = load_fixture("m1")
    scenario1 = load_fixture("scenario1")
    soft_all = [SoftConstraint(f) for f in sorted(ALL_FAMILIES)]
    cases = [
        ("scenario1 exact", scenario1, [], []),
        ("m1 exact", m1, [], []),
        ("m1 charge-cap relaxation", m1,
         [CapChargeCount(agent=2, m=2)], soft_all),
    ]

    header = f"{'case':<28} {'interpreted':>12} {'compiled':>12} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, inst, hard, soft in cases:
        ti, status_i, nodes_i = bench_case(
            interpreted, name, inst, hard, soft, args.repeat)
        if compiled is not None:
            tc, status_c, nodes_c = bench_case(
                compiled, name, inst, hard, soft, args.repeat)
            assert status_i == status_c and nodes_i == nodes_c, \
                "kernel variants disagree"
            print(f"{name:<28} {ti * 1e3:>10.1f}ms {tc * 1e3:>10.1f}ms "
                  f"{ti / tc:>7.2f}x")
        else:
            print(f"{name:<28} {ti * 1e3:>10.1f}ms {'-':>12} {'-':>8}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
