"""Depth-first branch-and-bound over the joint time-expanded state.

This module is deliberately self-contained plain Python: setup.py compiles
it with Cython into an extension module, and the identical source runs
interpreted when the extension is unavailable.  Callers detect which
variant they imported via the module file suffix.

The search state at time t is, per agent: a position (vertex id, a
crossing code while half-way across a slow edge, or 0 once the plan has
ended), a battery level, a bitmask of visited waypoints/goal, and small
monitor counters for windowed hard constraints.  Transitions advance all
active agents one joint step; costs accumulate lexicographically as

    (violation weight per soft priority...,
     objective values in instance order...,
     battery-death atoms, missed goal/waypoint atoms)

The two trailing tie-break levels sit below every reported level, so they
never change which cost vector is optimal; among cost-equal optima they
pick witnesses that keep robots alive and tasks completed, so
counterfactual answers cite interaction conflicts rather than "the robot
could just give up".
"""

from __future__ import annotations

import time

INF = 10 ** 9

INTRANSIT = "intransit"

# transition type codes
T_STOP = 0
T_WAIT = 1
T_MOVE = 2
T_CROSS = 3  # start a slow crossing
T_FINISH = 4  # forced completion of a crossing


class Timeout(Exception):
    pass


class Program:
    """Fully precompiled search input; plain data only.

    Families are either hard (``*_hard`` flag) or soft with a weight and a
    violation slot index (``w_*``, ``s_*``).  ``h`` is, per agent, either
    None (stopping is free, bound 0) or a dict mask -> {vertex: steps}
    giving the exact relaxed completion distance; ``h_order`` is the
    always-built complete-the-tasks table used purely for move ordering.
    ``deadline_step`` is the last step index an agent may occupy (min of
    tau and any plan length cap).
    """

    __slots__ = (
        "agent_ids", "n", "tau", "b", "charging", "obstacles",
        "normal_nbrs", "slow_nbrs", "cross_code", "cross_info",
        "init", "goal", "init_battery", "target_bit", "full_wpmask",
        "goal_bit", "h", "h_order", "dist_charger",
        "collision_hard", "obstacle_hard", "battery_hard",
        "goal_hard", "wp_hard",
        "w_collision", "w_obstacle", "w_battery", "w_goal", "w_waypoint",
        "s_collision", "s_obstacle", "s_battery", "s_goal", "s_waypoint",
        "n_viol_slots", "objective", "cons", "deadline_step",
    )

    def __init__(self, **kw):
        for k, v in kw.items():
            setattr(self, k, v)


class Search:
    def __init__(self, prog, deadline=None, on_improve=None, node_limit=None,
                 fronts=None):
        self.prog = prog
        self.deadline = deadline
        self.node_limit = node_limit
        self.on_improve = on_improve
        self.fronts = fronts
        self.nodes = 0
        self.models = 0
        self.timed_out = False
        self.incumbent = None  # cost tuple
        self.incumbent_raw = None  # [(locs, bats), ...] per agent
        n = prog.n
        self.pos = list(prog.init)
        self.bat = list(prog.init_battery)
        self.mask = [0] * n
        self.stay = [0] * n
        self.done_at = [-1] * n
        self.fullcnt = [0] * n
        self.prevd = [0] * n  # last move's vertex-id delta, for ordering only
        self.wcnt = [[0] * len(prog.cons[i].wait_windows) for i in range(n)]
        self.pos_at_t = tuple(prog.init)
        self.hist_pos = [tuple(prog.init)]
        self.hist_bat = [tuple(prog.init_battery)]
        self.memo = {}

    def run(self):
        prog = self.prog
        n = prog.n
        viol = [0] * prog.n_viol_slots
        for i in range(n):
            v = prog.init[i]
            self.mask[i] |= prog.target_bit[i].get(v, 0)
            cons = prog.cons[i]
            if v in cons.banned_visits or (v, 0) in cons.banned_visits_at:
                return  # a hard visit ban already holds at t=0: infeasible
            if v in prog.obstacles:
                if prog.obstacle_hard:
                    return
                viol[prog.s_obstacle] += prog.w_obstacle
        for i in range(n):
            for j in range(i + 1, n):
                if prog.init[i] == prog.init[j]:
                    if prog.collision_hard:
                        return
                    viol[prog.s_collision] += prog.w_collision
        try:
            self._expand(0, tuple(viol), 0, 0, 0, 0, 0)
        except Timeout:
            self.timed_out = True

    # -- bounding ---------------------------------------------------------

    def _h_of(self, i, t):
        """Admissible remaining-step count for active agent i at time t."""
        prog = self.prog
        cons = prog.cons[i]
        if cons.fixed is not None:
            return len(cons.fixed) - 1 - t
        htab = prog.h[i]
        if htab is None:
            return 0
        p = self.pos[i]
        m = self.mask[i] & prog.full_wpmask[i]
        if p in prog.cross_info:
            v = prog.cross_info[p][1]
            m2 = m | (prog.target_bit[i].get(v, 0) & prog.full_wpmask[i])
            base = htab[m2].get(v, INF)
            return base + 1 if base < INF else INF
        return htab[m].get(p, INF)

    def _charger_dist(self, i):
        prog = self.prog
        p = self.pos[i]
        if p in prog.cross_info:
            d = prog.dist_charger[i].get(prog.cross_info[p][1], INF)
            return d + 1 if d < INF else INF
        return prog.dist_charger[i].get(p, INF)

    def _bound(self, t, viol, max_done, g_len, g_charges, tb_batt, tb_task):
        """Lexicographic lower bound over all completions, or None if dead."""
        prog = self.prog
        ms = max_done
        extra_len = 0
        actives = []
        for i in range(prog.n):
            if self.done_at[i] >= 0:
                continue
            h = self._h_of(i, t)
            if h >= INF or t + h > prog.deadline_step[i]:
                return None
            if t + h > ms:
                ms = t + h
            extra_len += h
            if prog.battery_hard:
                q = self.bat[i]
                if q < h and q < self._charger_dist(i):
                    return None
            actives.append(i)

        if self.fronts is None or not actives:
            candidates = ((0, ms, extra_len),)
        else:
            per = []
            for i in actives:
                cons = prog.cons[i]
                key = (
                    self.pos[i], self.mask[i], self.bat[i],
                    self.fullcnt[i] if cons.charge_cap is not None else 0,
                )
                front = self.fronts[i][t].get(key)
                if front is None:
                    return None
                per.append(front)
            if len(per) == 1:
                candidates = tuple((v, max(ms, t + l), max(extra_len, l))
                                   for (v, l) in per[0])
            elif len(per) == 2:
                candidates = tuple(
                    (v1 + v2,
                     max(ms, t + l1, t + l2),
                     max(extra_len, l1 + l2))
                    for (v1, l1) in per[0] for (v2, l2) in per[1]
                )
            else:
                v_sum = sum(min(v for v, _ in f) for f in per)
                l_each = [min(l for _, l in f) for f in per]
                candidates = ((v_sum,
                               max(ms, t + max(l_each)),
                               max(extra_len, sum(l_each))),)

        best = None
        for (v_extra, ms_c, len_c) in candidates:
            if v_extra:
                head = list(viol)
                head[0] += v_extra
                head = tuple(head)
            else:
                head = viol
            obj = []
            for term in prog.objective:
                if term == "makespan":
                    obj.append(ms_c)
                elif term == "total_plan_length":
                    obj.append(g_len + len_c)
                else:
                    obj.append(g_charges)
            cand = head + tuple(obj) + (tb_batt, tb_task)
            if best is None or cand < best:
                best = cand
        return best

    # -- expansion --------------------------------------------------------

    def _expand(self, t, viol, max_done, g_len, g_charges, tb_batt, tb_task):
        self.nodes += 1
        if self.nodes % 512 == 0:
            if self.deadline is not None and time.monotonic() > self.deadline:
                raise Timeout
            if self.node_limit is not None and self.nodes > self.node_limit:
                raise Timeout
        prog = self.prog
        bound = self._bound(t, viol, max_done, g_len, g_charges, tb_batt, tb_task)
        if bound is None:
            return
        if self.incumbent is not None and bound >= self.incumbent:
            return
        key = (
            t,
            tuple(self.pos),
            tuple(self.bat),
            tuple(self.mask),
            tuple(
                self.stay[i] if prog.cons[i].wait_runs else 0
                for i in range(prog.n)
            ),
            tuple(tuple(w) for w in self.wcnt),
            tuple(
                self.fullcnt[i] if prog.cons[i].charge_cap is not None else 0
                for i in range(prog.n)
            ),
        )
        g_vec = viol + (max_done, g_len, g_charges, tb_batt, tb_task)
        seen = self.memo.get(key)
        if seen is None:
            self.memo[key] = [g_vec]
        else:
            for old in seen:
                if _dominates(old, g_vec):
                    return
            seen[:] = [old for old in seen if not _dominates(g_vec, old)]
            seen.append(g_vec)
        saved = self.pos_at_t
        self.pos_at_t = tuple(self.pos)
        self._step_agent(0, t, viol, max_done, g_len, g_charges, tb_batt, tb_task,
                         [], [], [])
        self.pos_at_t = saved

    def _step_agent(self, k, t, viol, max_done, g_len, g_charges, tb_batt, tb_task,
                    arrivals, moves, starts):
        """Pick agent k's transition given agents < k already placed.

        arrivals: (agent_index, vertex or None) occupancy at t+1 so far.
        moves:    (agent_index, from, to) normal moves taken this step.
        starts:   (agent_index, u, v) slow crossings started this step.
        """
        prog = self.prog
        if k == prog.n:
            if all(d >= 0 for d in self.done_at):
                self._record(viol, max_done, g_len, g_charges, tb_batt, tb_task)
                return
            self.hist_pos.append(tuple(self.pos))
            self.hist_bat.append(tuple(self.bat))
            self._expand(t + 1, viol, max_done, g_len, g_charges, tb_batt, tb_task)
            self.hist_pos.pop()
            self.hist_bat.pop()
            return
        if self.done_at[k] >= 0:
            self._step_agent(k + 1, t, viol, max_done, g_len, g_charges,
                             tb_batt, tb_task, arrivals, moves, starts)
            return
        for (ttype, new_pos, new_bat, recharge, d_viol, d_tb_batt,
             d_tb_task) in self._transitions(k, t):
            if d_viol is None:
                nviol = viol
            else:
                nviol = tuple(a + b for a, b in zip(viol, d_viol))
            if ttype == T_STOP:
                o_pos, o_done = self.pos[k], self.done_at[k]
                self.pos[k] = 0
                self.done_at[k] = t
                self._step_agent(k + 1, t, nviol,
                                 max_done if max_done >= t else t,
                                 g_len, g_charges,
                                 tb_batt, tb_task + d_tb_task,
                                 arrivals, moves, starts)
                self.pos[k], self.done_at[k] = o_pos, o_done
                continue
            nviol, dead = self._pair_atoms(k, t, nviol, ttype, new_pos,
                                           arrivals, moves, starts)
            if dead:
                continue
            arr = None if ttype == T_CROSS else new_pos
            arrivals.append((k, arr))
            if ttype == T_MOVE:
                moves.append((k, self.pos[k], new_pos))
            elif ttype == T_CROSS:
                u, v = prog.cross_info[new_pos]
                starts.append((k, u, v))
            cons = prog.cons[k]
            o_pos, o_bat, o_stay = self.pos[k], self.bat[k], self.stay[k]
            o_full, o_mask, o_prevd = self.fullcnt[k], self.mask[k], self.prevd[k]
            o_w = None
            if ttype == T_WAIT and cons.wait_windows:
                o_w = list(self.wcnt[k])
                for idx, (x, s, nn) in enumerate(cons.wait_windows):
                    if o_pos == x and s <= t < s + nn:
                        self.wcnt[k][idx] += 1
            self.pos[k] = new_pos
            self.bat[k] = new_bat
            if ttype == T_MOVE:
                self.prevd[k] = new_pos - o_pos
            elif ttype in (T_CROSS, T_FINISH):
                u, v = prog.cross_info[new_pos if ttype == T_CROSS else o_pos]
                self.prevd[k] = v - u
            if ttype != T_WAIT:
                self.stay[k] = t + 1
            full_arrival = 1 if new_bat == prog.b else 0
            self.fullcnt[k] += full_arrival
            if arr is not None:
                self.mask[k] = o_mask | prog.target_bit[k].get(arr, 0)
            self._step_agent(k + 1, t, nviol, max_done,
                             g_len + 1, g_charges + full_arrival,
                             tb_batt + d_tb_batt, tb_task + d_tb_task,
                             arrivals, moves, starts)
            self.pos[k], self.bat[k], self.stay[k] = o_pos, o_bat, o_stay
            self.fullcnt[k], self.mask[k] = o_full, o_mask
            self.prevd[k] = o_prevd
            if o_w is not None:
                self.wcnt[k][:] = o_w
            arrivals.pop()
            if ttype == T_MOVE:
                moves.pop()
            elif ttype == T_CROSS:
                starts.pop()

    def _pair_atoms(self, k, t, viol, ttype, new_pos, arrivals, moves, starts):
        """Collision-family atoms this transition adds against agents < k
        (plus mid-crossing conflicts against any other agent)."""
        prog = self.prog
        hard = prog.collision_hard
        count = 0
        arr = None if ttype == T_CROSS else new_pos
        if arr is not None:
            for (j, aj) in arrivals:
                if aj == arr:
                    if hard:
                        return viol, True
                    count += 1
        if ttype == T_MOVE:
            u, v = self.pos[k], new_pos
            for (j, fx, fy) in moves:
                if fx == v and fy == u:
                    if hard:
                        return viol, True
                    count += 1
        elif ttype == T_CROSS:
            u, v = prog.cross_info[new_pos]
            for (j, su, sv) in starts:
                if su == v and sv == u:
                    if hard:
                        return viol, True
                    count += 1
            # someone already half-way across the same edge, opposite way
            for j in range(prog.n):
                if j == k:
                    continue
                pj = self.pos_at_t[j]
                if pj in prog.cross_info and prog.cross_info[pj] == (v, u):
                    if hard:
                        return viol, True
                    count += 1
        if count == 0:
            return viol, False
        nv = list(viol)
        nv[prog.s_collision] += prog.w_collision * count
        return tuple(nv), False

    # -- per-agent transition generation -----------------------------------

    def _transitions(self, k, t):
        """Agent k's legal transitions at time t, best-first.

        Items: (type, new_pos, new_bat, recharged, d_viol|None,
                d_tb_batt, d_tb_task).
        """
        prog = self.prog
        cons = prog.cons[k]
        p = self.pos[k]
        q = self.bat[k]

        if p in prog.cross_info:
            # forced completion; intransit is never a charging cell
            v = prog.cross_info[p][1]
            d_tb_batt = 0
            d_viol = None
            if q == 0:
                if prog.battery_hard:
                    return []
                d_tb_batt = 1
                d_viol = self._delta(battery=1)
            av = self._arrival_atoms(k, v, t + 1)
            if av is None:
                return []
            d_viol = _add_delta(d_viol, av, self)
            nb = q - 1 if q > 0 else 0
            return [(T_FINISH, v, nb, False, d_viol, d_tb_batt, 0)]

        out = []
        # -- stopping ------------------------------------------------------
        can_stop = True
        if cons.fixed is not None:
            can_stop = t == len(cons.fixed) - 1
        if can_stop:
            wp_missing = _popcount(prog.full_wpmask[k] & ~self.mask[k])
            goal_missing = 0 if p == prog.goal[k] else 1
            if prog.goal_hard and goal_missing:
                can_stop = False
            if prog.wp_hard and wp_missing:
                can_stop = False
            if can_stop:
                d_tb_task = 0
                d_viol = None
                if not prog.wp_hard and wp_missing:
                    d_tb_task += wp_missing
                    d_viol = self._delta(waypoint=wp_missing)
                if not prog.goal_hard and goal_missing:
                    d_tb_task += 1
                    d_viol = _sum_delta(d_viol, self._delta(goal=1))
                out.append((T_STOP, 0, q, False, d_viol, 0, d_tb_task))

        # -- continuing ----------------------------------------------------
        d_tb_batt = 0
        batom = None
        if q == 0:
            if prog.battery_hard:
                return self._finish_order(out, k)
            d_tb_batt = 1
            batom = self._delta(battery=1)
        decay = q - 1 if q > 0 else 0
        deadline = prog.deadline_step[k]
        charging_here = p in prog.charging

        def battery_options():
            opts = [(decay, False)]
            if (
                charging_here
                and p not in cons.banned_charge_cells
                and t not in cons.banned_charge_times
                and (p, t) not in cons.banned_charges_at
                and (cons.charge_cap is None or self.fullcnt[k] + 1 < cons.charge_cap)
            ):
                opts.append((prog.b, True))
            return opts

        if cons.fixed is not None:
            fixed = cons.fixed
            if t + 1 < len(fixed):
                nxt = fixed[t + 1]
                if nxt == INTRANSIT:
                    dest = fixed[t + 2]
                    if t + 2 <= deadline:
                        code = prog.cross_code[(p, dest)]
                        if (p, dest) not in cons.banned_moves and \
                                (p, dest, t) not in cons.banned_moves_at and \
                                self._arrival_atoms(k, dest, t + 2) is not None:
                            for nb, rech in battery_options():
                                out.append((T_CROSS, code, nb, rech, batom,
                                            d_tb_batt, 0))
                elif nxt == p:
                    if t + 1 <= deadline and not self._wait_vetoed(k, t, p):
                        av = self._arrival_atoms(k, p, t + 1)
                        if av is not None:
                            dv = _add_delta(batom, av, self)
                            for nb, rech in battery_options():
                                out.append((T_WAIT, p, nb, rech, dv, d_tb_batt, 0))
                else:
                    if t + 1 <= deadline and \
                            (p, nxt) not in cons.banned_moves and \
                            (p, nxt, t) not in cons.banned_moves_at:
                        av = self._arrival_atoms(k, nxt, t + 1)
                        if av is not None:
                            dv = _add_delta(batom, av, self)
                            for nb, rech in battery_options():
                                out.append((T_MOVE, nxt, nb, rech, dv, d_tb_batt, 0))
            return self._finish_order(out, k)

        if t + 1 <= deadline and not self._wait_vetoed(k, t, p):
            av = self._arrival_atoms(k, p, t + 1)
            if av is not None:
                dv = _add_delta(batom, av, self)
                for nb, rech in battery_options():
                    out.append((T_WAIT, p, nb, rech, dv, d_tb_batt, 0))
        if t + 1 <= deadline:
            for u in prog.normal_nbrs.get(p, ()):
                if (p, u) in cons.banned_moves or (p, u, t) in cons.banned_moves_at:
                    continue
                av = self._arrival_atoms(k, u, t + 1)
                if av is None:
                    continue
                dv = _add_delta(batom, av, self)
                for nb, rech in battery_options():
                    out.append((T_MOVE, u, nb, rech, dv, d_tb_batt, 0))
        if t + 2 <= deadline:
            for u in prog.slow_nbrs.get(p, ()):
                if (p, u) in cons.banned_moves or (p, u, t) in cons.banned_moves_at:
                    continue
                if self._arrival_atoms(k, u, t + 2) is None:
                    continue
                code = prog.cross_code[(p, u)]
                for nb, rech in battery_options():
                    out.append((T_CROSS, code, nb, rech, batom, d_tb_batt, 0))
        return self._finish_order(out, k)

    def _finish_order(self, out, k):
        """Progress-first ordering; giving up tasks is the move of last resort.

        Cost-equal choices prefer continuing in the previous heading, so
        witnesses follow straight corridors rather than zig-zagging.
        """
        prog = self.prog
        htab = prog.h_order[k]
        prevd = self.prevd[k]
        p = self.pos[k]
        scored = []
        for tr in out:
            ttype, new_pos, _, recharge, _, _, d_tb_task = tr
            turn = 1
            if ttype == T_STOP:
                rank = 0 if d_tb_task == 0 else 4
                hval = 0
                turn = 0
            else:
                if ttype == T_MOVE and prevd and new_pos - p == prevd:
                    turn = 0
                elif ttype == T_CROSS:
                    u, v = prog.cross_info[new_pos]
                    if prevd and v - u == prevd:
                        turn = 0
                if htab is None:
                    hval = 0
                elif ttype == T_CROSS:
                    dest = prog.cross_info[new_pos][1]
                    m = self.mask[k] & prog.full_wpmask[k]
                    m |= prog.target_bit[k].get(dest, 0) & prog.full_wpmask[k]
                    d = htab[m].get(dest, INF)
                    hval = d + 1 if d < INF else INF
                else:
                    m = self.mask[k] | prog.target_bit[k].get(new_pos, 0)
                    m &= prog.full_wpmask[k]
                    hval = htab[m].get(new_pos, INF)
                rank = 1 if ttype in (T_MOVE, T_FINISH) else (
                    2 if ttype == T_CROSS else 3)
            scored.append(((hval, rank, turn, new_pos, 1 if recharge else 0), tr))
        scored.sort(key=lambda item: item[0])
        return [tr for _, tr in scored]

    # -- vetoes and atom deltas ---------------------------------------------

    def _wait_vetoed(self, k, t, p):
        cons = self.prog.cons[k]
        if p in cons.banned_wait_cells or (p, t) in cons.banned_waits_at:
            return True
        for (x, s, n) in cons.wait_runs:
            if p == x and t + 1 == s + n and self.stay[k] <= s:
                return True
        for idx, (x, s, n) in enumerate(cons.wait_windows):
            if p == x and s <= t < s + n and self.wcnt[k][idx] + 1 >= n:
                return True
        return False

    def _arrival_atoms(self, k, v, at):
        """None when arrival is hard-vetoed; else obstacle atom count (0/1)."""
        prog = self.prog
        cons = prog.cons[k]
        if v in cons.banned_visits or (v, at) in cons.banned_visits_at:
            return None
        if v in prog.obstacles:
            if prog.obstacle_hard:
                return None
            return 1
        return 0

    def _delta(self, battery=0, goal=0, waypoint=0, obstacle=0):
        prog = self.prog
        d = [0] * prog.n_viol_slots
        if battery:
            d[prog.s_battery] += prog.w_battery * battery
        if goal:
            d[prog.s_goal] += prog.w_goal * goal
        if waypoint:
            d[prog.s_waypoint] += prog.w_waypoint * waypoint
        if obstacle:
            d[prog.s_obstacle] += prog.w_obstacle * obstacle
        return tuple(d)

    def _record(self, viol, max_done, g_len, g_charges, tb_batt, tb_task):
        prog = self.prog
        obj = []
        for term in prog.objective:
            if term == "makespan":
                obj.append(max_done)
            elif term == "total_plan_length":
                obj.append(g_len)
            else:
                obj.append(g_charges)
        cost = viol + tuple(obj) + (tb_batt, tb_task)
        if self.incumbent is not None and cost >= self.incumbent:
            return
        self.incumbent = cost
        raw = []
        for i in range(prog.n):
            L = self.done_at[i]
            raw.append((
                [self.hist_pos[u][i] for u in range(L + 1)],
                [self.hist_bat[u][i] for u in range(L + 1)],
            ))
        self.incumbent_raw = raw
        self.models += 1
        if self.on_improve is not None:
            self.on_improve(raw, cost)


def _dominates(a, b):
    """a componentwise <= b."""
    for x, y in zip(a, b):
        if x > y:
            return False
    return True


def _popcount(x):
    count = 0
    while x:
        x &= x - 1
        count += 1
    return count


def _add_delta(base, obstacle_count, search):
    if not obstacle_count:
        return base
    extra = search._delta(obstacle=obstacle_count)
    return _sum_delta(base, extra)


def _sum_delta(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return tuple(x + y for x, y in zip(a, b))


def _pareto_push(front, v, l):
    for (v0, l0) in front:
        if v0 <= v and l0 <= l:
            return
    front[:] = [(v0, l0) for (v0, l0) in front if not (v <= v0 and l <= l0)]
    front.append((v, l))


def build_fronts(prog, i):
    """Backward DP: per (t, pos, mask, battery, cap-count), the Pareto
    front of (future violation weight, remaining steps) over all ways
    agent i alone can finish its plan.

    Only per-agent atom families count (obstacle, battery, goal,
    waypoint); collisions are pairwise and bounded by zero.  Wait-run and
    wait-window monitors are ignored, which only widens the option set,
    so the fronts stay admissible lower bounds.  Assumes a single
    violation priority slot.
    """
    cons = prog.cons[i]
    D = prog.deadline_step[i]
    b = prog.b
    cap = cons.charge_cap
    cnt_n = cap if cap is not None else 1
    goalbit = prog.goal_bit[i]
    fullwp = prog.full_wpmask[i]
    mask_n = (goalbit << 1)
    goal_v = prog.goal[i]
    bits = prog.target_bit[i]
    fixed = cons.fixed

    positions = sorted(prog.normal_nbrs) + sorted(prog.cross_info)

    # static continue-options per position:
    #   (next_pos, is_cross_start, obstacle_atoms_now, arrival_vertex|None,
    #    wait?, move_from, move_to)
    static_options = {}
    for p in positions:
        lst = []
        if p in prog.cross_info:
            v = prog.cross_info[p][1]
            if v not in cons.banned_visits:
                atom = 0
                if v in prog.obstacles:
                    if prog.obstacle_hard:
                        lst = None
                    else:
                        atom = 1
                if lst is not None:
                    lst.append((v, False, atom, v, False, None, None))
            static_options[p] = lst if lst is not None else []
            continue
        if p not in cons.banned_wait_cells:
            lst.append((p, False, 1 if p in prog.obstacles and not prog.obstacle_hard
                        else 0, p, True, None, None))
        for u in prog.normal_nbrs.get(p, ()):
            if (p, u) in cons.banned_moves or u in cons.banned_visits:
                continue
            if u in prog.obstacles and prog.obstacle_hard:
                continue
            atom = 1 if u in prog.obstacles else 0
            lst.append((u, False, atom, u, False, p, u))
        for u in prog.slow_nbrs.get(p, ()):
            if (p, u) in cons.banned_moves or u in cons.banned_visits:
                continue
            if u in prog.obstacles and prog.obstacle_hard:
                continue
            lst.append((prog.cross_code[(p, u)], True, 0, None, False, p, u))
        static_options[p] = lst

    # stop violation weight per (pos is vertex, mask): None = illegal
    def stop_viol(p, mask):
        if p in prog.cross_info:
            return None
        wp_missing = _popcount(fullwp & ~mask)
        goal_missing = 0 if p == goal_v else 1
        if prog.goal_hard and goal_missing:
            return None
        if prog.wp_hard and wp_missing:
            return None
        v = 0
        if not prog.wp_hard:
            v += prog.w_waypoint * wp_missing
        if not prog.goal_hard and goal_missing:
            v += prog.w_goal
        return v

    F = [dict() for _ in range(D + 1)]
    for t in range(D, -1, -1):
        cur = F[t]
        nxt = F[t + 1] if t < D else None
        for p in positions:
            is_cross = p in prog.cross_info
            fixed_next = None
            if fixed is not None:
                if t >= len(fixed):
                    continue
                want = fixed[t]
                if is_cross:
                    if want != INTRANSIT or prog.cross_info[p][1] != fixed[t + 1]:
                        continue
                elif want != p:
                    continue
                fixed_next = fixed[t + 1] if t + 1 < len(fixed) else False
            options = static_options[p]
            charging_here = (not is_cross) and p in prog.charging
            for mask in range(mask_n):
                sv = stop_viol(p, mask)
                if fixed is not None and fixed_next is not False:
                    sv = None  # fixed agents stop exactly at the end
                for batt in range(b + 1):
                    dead_cont = batt == 0 and prog.battery_hard
                    batom = prog.w_battery if batt == 0 else 0
                    decay = batt - 1 if batt > 0 else 0
                    for cnt in range(cnt_n):
                        front = []
                        if sv is not None:
                            front.append((sv, 0))
                        if nxt is not None and not dead_cont:
                            can_charge = (
                                charging_here
                                and p not in cons.banned_charge_cells
                                and t not in cons.banned_charge_times
                                and (p, t) not in cons.banned_charges_at
                                and (cap is None or cnt + 1 < cap)
                            )
                            for (np_, is_start, oatom, arr, is_wait,
                                 mf, mt) in options:
                                if fixed is not None:
                                    if fixed_next is False:
                                        continue
                                    if is_start:
                                        if fixed_next != INTRANSIT or \
                                                prog.cross_info[np_][1] != fixed[t + 2]:
                                            continue
                                    elif fixed_next != np_:
                                        continue
                                if is_wait and (p, t) in cons.banned_waits_at:
                                    continue
                                if mf is not None and \
                                        (mf, mt, t) in cons.banned_moves_at:
                                    continue
                                if is_start and t + 2 > D:
                                    continue
                                if arr is not None and \
                                        (arr, t + 1) in cons.banned_visits_at:
                                    continue
                                if is_start and \
                                        (prog.cross_info[np_][1], t + 2) in \
                                        cons.banned_visits_at:
                                    continue
                                nmask = mask
                                if arr is not None:
                                    nmask |= bits.get(arr, 0)
                                atoms = batom + oatom * prog.w_obstacle
                                nf = nxt.get((np_, nmask, decay, cnt))
                                if nf is not None:
                                    for (v0, l0) in nf:
                                        _pareto_push(front, atoms + v0, 1 + l0)
                                if can_charge and not is_cross:
                                    ncnt = cnt + 1 if cap is not None else 0
                                    nf = nxt.get((np_, nmask, b, ncnt))
                                    if nf is not None:
                                        for (v0, l0) in nf:
                                            _pareto_push(front, atoms + v0, 1 + l0)
                        if front:
                            front.sort()
                            cur[(p, mask, batt, cnt)] = tuple(front)
    return F


def run_search(prog, deadline=None, on_improve=None, node_limit=None,
               fronts=None):
    """Returns (status, raw_plan|None, cost|None, nodes, models, timed_out)."""
    s = Search(prog, deadline=deadline, on_improve=on_improve,
               node_limit=node_limit, fronts=fronts)
    s.run()
    if s.incumbent is None:
        status = "unknown" if s.timed_out else "infeasible"
        return status, None, None, s.nodes, s.models, s.timed_out
    status = "best_so_far" if s.timed_out else "optimal"
    return status, s.incumbent_raw, s.incumbent, s.nodes, s.models, s.timed_out
