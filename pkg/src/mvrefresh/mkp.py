"""Exact solvers for the 0-1 multidimensional knapsack problem.

Instances built from execution orders have the consecutive-ones property:
each variable's non-zero rows form one contiguous block. :func:`solve_mkp`
exploits this with a row-sweep dynamic program and falls back to a generic
depth-first branch and bound otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

NodeId = str
DEFAULT_MAX_EXPANSIONS = 10**7


class MkpTimeout(RuntimeWarning):
    """The solver hit its expansion cap; the best incumbent was returned."""


@dataclass(frozen=True)
class MkpInstance:
    profits: tuple[int, ...]
    weights: tuple[tuple[int, ...], ...]  # rows x variables
    capacities: tuple[int, ...]
    variables: tuple[NodeId, ...]


@dataclass(frozen=True)
class MkpResult:
    x: tuple[int, ...]
    objective: int
    timed_out: bool = False
    expansions: int = 0

    def chosen(self, inst: MkpInstance) -> frozenset[NodeId]:
        return frozenset(v for v, xi in zip(inst.variables, self.x) if xi)


class _Stop(Exception):
    pass


def solve_mkp_bnb(inst: MkpInstance, max_expansions: int = DEFAULT_MAX_EXPANSIONS) -> MkpResult:
    """Exact 0-1 MKP for arbitrary instances by depth-first branch and bound.

    Variables are branched in descending profit/weight order, "take" first.
    The bound is the smaller of two LP relaxations over the free variables:
    the surrogate constraint (all rows summed) and a row-partition relaxation
    where each variable keeps only its most loaded row. The incumbent starts
    from a greedy fill.
    """
    n = len(inst.profits)
    if n == 0:
        return MkpResult((), 0)
    profits = inst.profits
    # (row, weight) pairs per variable; zero entries never bind a row
    uses: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for r, row in enumerate(inst.weights):
        for j, wj in enumerate(row):
            if wj:
                uses[j].append((r, wj))
    row_load = [sum(row) for row in inst.weights]
    home = [max(u, key=lambda rw: (row_load[rw[0]], -rw[0])) if u else None for u in uses]
    heaviest = [max((wj for _, wj in u), default=0) for u in uses]
    total = [sum(wj for _, wj in u) for u in uses]

    order = sorted(range(n), key=lambda j: (-(profits[j] / heaviest[j] if heaviest[j] else math.inf), j))
    sur_order = sorted(range(n), key=lambda j: (-(profits[j] / total[j] if total[j] else math.inf), j))
    cap = list(inst.capacities)
    x = [0] * n
    decided = [False] * n

    def fits(j):
        return all(cap[r] >= wj for r, wj in uses[j])

    def take(j, sign):
        for r, wj in uses[j]:
            cap[r] -= sign * wj

    # greedy incumbent
    for j in order:
        if fits(j):
            x[j] = 1
            take(j, 1)
    best_x = list(x)
    best_val = sum(p for p, xi in zip(profits, x) if xi)
    cap = list(inst.capacities)
    x = [0] * n

    def bound(k):
        # row-partition relaxation
        used: dict[int, int] = {}
        part = 0.0
        for idx in range(k, n):
            j = order[idx]
            if not fits(j):
                continue
            if home[j] is None:
                part += profits[j]
                continue
            h, wh = home[j]
            room = cap[h] - used.get(h, 0)
            if room <= 0:
                continue
            if wh <= room:
                used[h] = used.get(h, 0) + wh
                part += profits[j]
            else:
                used[h] = cap[h]
                part += profits[j] * room / wh
        # surrogate relaxation
        room = sum(cap)
        sur = 0.0
        for j in sur_order:
            if decided[j] or not fits(j):
                continue
            if total[j] <= room:
                room -= total[j]
                sur += profits[j]
            else:
                sur += profits[j] * room / total[j]
                break
        return min(part, sur)

    expansions = 0

    def dfs(k, value):
        nonlocal best_val, best_x, expansions
        expansions += 1
        if expansions > max_expansions:
            raise _Stop
        if k == n:
            if value > best_val:
                best_val, best_x = value, list(x)
            return
        if value + math.floor(bound(k) + 1e-9) <= best_val:
            return
        j = order[k]
        decided[j] = True
        if fits(j):
            x[j] = 1
            take(j, 1)
            dfs(k + 1, value + profits[j])
            take(j, -1)
            x[j] = 0
        dfs(k + 1, value)
        decided[j] = False

    timed_out = False
    try:
        dfs(0, 0)
    except _Stop:
        timed_out = True
    return MkpResult(tuple(best_x), best_val, timed_out, expansions)


def interval_spans(inst: MkpInstance) -> list[tuple[int, int]] | None:
    """(first, last) non-zero row per variable, or None if some column has a gap.

    All-zero columns get the empty span (0, -1).
    """
    spans = []
    for j in range(len(inst.profits)):
        rows = [r for r, row in enumerate(inst.weights) if row[j]]
        if not rows:
            spans.append((0, -1))
        elif rows[-1] - rows[0] + 1 != len(rows):
            return None
        else:
            spans.append((rows[0], rows[-1]))
    return spans


def solve_mkp(inst: MkpInstance, max_expansions: int = DEFAULT_MAX_EXPANSIONS) -> MkpResult:
    """Exact optimum of ``inst``; deterministic for a given instance.

    ``max_expansions`` caps the work; when it is hit the result carries
    ``timed_out=True`` and the best feasible solution found so far.
    """
    spans = interval_spans(inst)
    if spans is None:
        return solve_mkp_bnb(inst, max_expansions)
    light = _light_items(inst)
    spent = 0
    while light:
        res = _solve_without(inst, light, max_expansions)
        spent += res.expansions
        if not res.timed_out:
            x = list(res.x)
            for j in light:
                x[j] = 1
            if _feasible(inst, x):
                gain = sum(inst.profits[j] for j in light)
                return MkpResult(tuple(x), res.objective + gain, False, spent)
        light = light[: len(light) // 2]
    res = _RowSweep(inst, spans).solve(max_expansions)
    return MkpResult(res.x, res.objective, res.timed_out, spent + res.expansions)


LIGHT_FRACTION = 0.01


def _light_items(inst: MkpInstance) -> list[int]:
    """Lightest variables whose combined weight stays within LIGHT_FRACTION
    of every row's capacity.

    Many tiny items (profit 1 after rounding) make the sweep enumerate their
    combinations. They are nearly always all taken, so the solver first
    proves that: solve without them, add them all back, and if that is
    feasible it is optimal, because leaving them out can only cost their
    profit.
    """
    R = len(inst.weights)
    room = [LIGHT_FRACTION * c for c in inst.capacities]
    heavy = lambda j: max((row[j] for row in inst.weights), default=0)  # noqa: E731
    out = []
    for j in sorted(range(len(inst.profits)), key=lambda j: (heavy(j), j)):
        if heavy(j) == 0:
            continue
        if any(inst.weights[r][j] > room[r] for r in range(R)):
            break
        for r in range(R):
            room[r] -= inst.weights[r][j]
        out.append(j)
    return out


def _solve_without(inst: MkpInstance, drop: list[int], max_expansions: int) -> MkpResult:
    gone = set(drop)
    keep = [j for j in range(len(inst.profits)) if j not in gone]
    sub = MkpInstance(
        tuple(inst.profits[j] for j in keep),
        tuple(tuple(row[j] for j in keep) for row in inst.weights),
        inst.capacities,
        tuple(inst.variables[j] for j in keep),
    )
    spans = interval_spans(sub)
    res = _RowSweep(sub, spans).solve(max_expansions)
    x = [0] * len(inst.profits)
    for xi, j in zip(res.x, keep):
        x[j] = xi
    return MkpResult(tuple(x), res.objective, res.timed_out, res.expansions)


def _feasible(inst: MkpInstance, x) -> bool:
    return all(
        sum(w for w, xi in zip(row, x) if xi) <= cap
        for row, cap in zip(inst.weights, inst.capacities)
    )


class _RowSweep:
    """Dynamic program over rows for consecutive-ones instances.

    Rows are visited in order and each variable is decided, one at a time,
    at its first row. A state is the set (bitmask) of chosen variables still
    active, mapped to the best profit reaching it. After every decision,
    states are pruned when

    * they break an item-dominance implication (see ``_dominance``),
    * dropping one active variable gives a state with at least the same
      profit (that state needs less capacity in every later row), or
    * a Lagrangian upper bound on the completion cannot beat the incumbent.

    Row multipliers for the bound come from a short subgradient run. The
    incumbent starts as the better of a ratio-greedy fill and a beam pass of
    the same sweep.
    """

    BEAM = 64
    SUBGRADIENT_STEPS = 100

    def __init__(self, inst: MkpInstance, spans: list[tuple[int, int]]):
        self.inst = inst
        self.n = n = len(inst.profits)
        self.R = R = len(inst.weights)
        self.p = inst.profits
        self.first = [a for a, _ in spans]
        self.last = [b for _, b in spans]
        self.free = [j for j in range(n) if self.last[j] < 0]
        self.starts: list[list[int]] = [[] for _ in range(R)]
        self.ending = [0] * R
        for j in range(n):
            if self.last[j] >= 0:
                self.starts[self.first[j]].append(j)
                self.ending[self.last[j]] |= 1 << j
        # smallest weight over the span keeps the Lagrangian bound valid
        # even if a column's weights differ between rows
        self.w = [
            min((inst.weights[r][j] for r in range(self.first[j], self.last[j] + 1)), default=0)
            for j in range(n)
        ]
        self.uniform = all(
            inst.weights[r][j] == self.w[j]
            for j in range(n)
            for r in range(self.first[j], self.last[j] + 1)
        )
        self.need, self.forbid = self._dominance()
        # settled[k]: variables no item decided from step k on depends on
        seq = [j for r in range(R) for j in self.starts[r]]
        self.settled = [0] * (len(seq) + 1)
        pending_need = 0
        self.settled[len(seq)] = ~0
        for k in range(len(seq) - 1, -1, -1):
            pending_need |= self.need[seq[k]]
            self.settled[k] = ~pending_need

    def _dominates(self, a: int, b: int) -> bool:
        if not (self.first[b] <= self.first[a] and self.last[a] <= self.last[b]):
            return False
        if self.p[a] < self.p[b]:
            return False
        rows = range(self.first[a], self.last[a] + 1)
        if any(self.inst.weights[r][a] > self.inst.weights[r][b] for r in rows):
            return False
        rank = lambda j: (self.p[j], -self.w[j], self.first[j] - self.last[j], -j)  # noqa: E731
        return rank(a) > rank(b)

    def _dominance(self) -> tuple[list[int], list[int]]:
        """Masks enforcing "b chosen implies a chosen" whenever a dominates b.

        If a fits inside b's span, weighs no more in any row and earns no
        less, swapping b for a never hurts, and the tie-break rank makes the
        swaps terminate, so some optimum obeys every such implication. Both
        items are active when the later of the two is decided, so the check
        only needs the state key. need[j]: earlier-decided items that must
        be present to take j. forbid[j]: earlier-decided items that rule out
        skipping j.
        """
        seq = [j for r in range(self.R) for j in self.starts[r]]
        need = [0] * self.n
        forbid = [0] * self.n
        for k, j in enumerate(seq):
            for i in seq[:k]:
                if self.last[i] < self.first[j]:
                    continue
                if self._dominates(i, j):
                    need[j] |= 1 << i
                elif self._dominates(j, i):
                    forbid[j] |= 1 << i
        return need, forbid

    # -- bounds -----------------------------------------------------------

    def _lagrangian(self, lam: list[float]) -> tuple[float, list[int]]:
        pre = [0.0]
        for x in lam:
            pre.append(pre[-1] + x)
        value = sum(l * c for l, c in zip(lam, self.inst.capacities))
        take = []
        for j in range(self.n):
            if self.last[j] < 0:
                continue
            reduced = self.p[j] - self.w[j] * (pre[self.last[j] + 1] - pre[self.first[j]])
            if reduced > 0:
                value += reduced
                take.append(j)
        return value, take

    def _multipliers(self, target: float) -> list[float]:
        R = self.R
        weights = self.inst.weights
        lam = [0.0] * R
        best_val, best_lam = math.inf, lam
        scale = 2.0
        for step in range(self.SUBGRADIENT_STEPS):
            val, take = self._lagrangian(lam)
            if val < best_val:
                best_val, best_lam = val, list(lam)
            grad = list(self.inst.capacities)
            for j in take:
                for r in range(self.first[j], self.last[j] + 1):
                    grad[r] -= weights[r][j]
            norm = sum(g * g for g in grad)
            if norm == 0 or val <= target:
                break
            t = scale * (val - target) / norm
            lam = [max(0.0, l - t * g) for l, g in zip(lam, grad)]
            if step % 20 == 19:
                scale /= 2
        return best_lam

    def _bound_tables(self, lam: list[float]):
        """pre: multiplier prefix sums. rest[r][k]: bound for everything from
        row r on, given the first k variables starting at row r are decided
        and with the active set's share not yet subtracted."""
        R = self.R
        pre = [0.0]
        for x in lam:
            pre.append(pre[-1] + x)
        rest: list[list[float]] = [[] for _ in range(R)]
        after = 0.0
        for r in range(R - 1, -1, -1):
            gains = [
                max(0.0, self.p[j] - self.w[j] * (pre[self.last[j] + 1] - pre[r]))
                for j in self.starts[r]
            ]
            acc = after + lam[r] * self.inst.capacities[r]
            col = [acc]
            for gain in reversed(gains):
                acc += gain
                col.append(acc)
            rest[r] = col[::-1]
            after = rest[r][0]
        return pre, rest

    # -- sweep ------------------------------------------------------------

    def _greedy(self) -> tuple[int, int]:
        cap = list(self.inst.capacities)
        weights = self.inst.weights
        order = sorted(
            (j for j in range(self.n) if self.last[j] >= 0),
            key=lambda j: (-(math.inf if self.w[j] == 0 else self.p[j] / self.w[j]), j),
        )
        mask = value = 0
        for j in order:
            rows = range(self.first[j], self.last[j] + 1)
            if all(cap[r] >= weights[r][j] for r in rows):
                for r in rows:
                    cap[r] -= weights[r][j]
                mask |= 1 << j
                value += self.p[j]
        return value, mask

    def _sweep(self, pre, rest, incumbent: int, beam: int | None, budget: int):
        """Returns (best value, chosen mask, expansions, truncated).

        State values are tuples (profit, chosen mask, row load, A, W) where
        A and W are the sums of w*pre[last+1] and w over the active set, so
        the bound's active-set share at row r is A - pre[r]*W.
        """
        weights = self.inst.weights
        caps = self.inst.capacities
        p, w, last = self.p, self.w, self.last
        states: dict[int, tuple] = {0: (0, 0, 0, 0.0, 0)}
        step = 0
        expansions = 0
        truncated = False
        for r in range(self.R):
            row = weights[r]
            cap = caps[r]
            if not self.uniform:
                states = {
                    key: (v, ch, _load(key, row), a, wsum)
                    for key, (v, ch, _, a, wsum) in states.items()
                }
            states = {key: st for key, st in states.items() if st[2] <= cap}
            for k, j in enumerate(self.starts[r]):
                bit = 1 << j
                wj, pj = row[j], p[j]
                aj = w[j] * pre[last[j] + 1]
                need, forbid = self.need[j], self.forbid[j]
                nxt = {}
                for key, (v, ch, load, a, wsum) in states.items():
                    if not key & forbid:
                        nxt[key] = (v, ch, load, a, wsum)
                    if load + wj <= cap and key & need == need:
                        nxt[key | bit] = (v + pj, ch | bit, load + wj, a + aj, wsum + w[j])
                expansions += len(nxt)
                step += 1
                if beam is None and expansions > budget:
                    beam, truncated = self.BEAM, True
                states = self._prune(nxt, rest[r][k + 1], pre[r], incumbent, beam, self.settled[step])
            # close the row: drop variables whose span ends here
            end = self.ending[r]
            closed: dict[int, tuple] = {}
            for key, (v, ch, load, a, wsum) in states.items():
                gone = key & end
                while gone:
                    low = gone & -gone
                    gone ^= low
                    j = low.bit_length() - 1
                    load -= row[j]
                    a -= w[j] * pre[last[j] + 1]
                    wsum -= w[j]
                nk = key & ~end
                old = closed.get(nk)
                if old is None or v > old[0]:
                    closed[nk] = (v, ch, load, a, wsum)
            if r + 1 < self.R:
                states = self._prune(closed, rest[r + 1][0], pre[r + 1], incumbent, beam, self.settled[step])
            else:
                states = closed
            if not states:
                return -1, 0, expansions, truncated
        value, chosen = max(((st[0], st[1]) for st in states.values()), key=lambda vc: vc[0])
        return value, chosen, expansions, truncated

    @staticmethod
    def _prune(states, rest, pre_r, incumbent, beam, settled):
        scored = []
        for key, st in states.items():
            v = st[0]
            ub = v + rest - (st[3] - pre_r * st[4])
            if ub + 1e-6 * (1 + abs(ub)) < incumbent + 1:
                continue
            # one-step dominance: a subset state with at least the profit.
            # A tie only counts if no undecided item needs the dropped
            # variable; otherwise the subset state may be cut later by an
            # item implication and neither path would reach the optimum.
            m = key
            dominated = False
            while m:
                low = m & -m
                m ^= low
                other = states.get(key ^ low)
                if other is not None and (other[0] > v or (other[0] == v and low & settled)):
                    dominated = True
                    break
            if not dominated:
                scored.append((ub, key, st))
        if beam is not None and len(scored) > beam:
            scored.sort(key=lambda t: (-t[0], t[1]))
            scored = scored[:beam]
        return {key: st for _, key, st in scored}

    def solve(self, max_expansions: int) -> MkpResult:
        free_gain = sum(self.p[j] for j in self.free)
        free_mask = sum(1 << j for j in self.free)
        inc_val, inc_mask = self._greedy()
        lam = self._multipliers(inc_val)
        pre, rest = self._bound_tables(lam)
        val, mask, _, _ = self._sweep(pre, rest, -1, self.BEAM, max_expansions)
        if val > inc_val:
            inc_val, inc_mask = val, mask
        val, mask, expansions, truncated = self._sweep(pre, rest, inc_val, None, max_expansions)
        if val > inc_val:
            inc_val, inc_mask = val, mask
        inc_mask |= free_mask
        x = tuple((inc_mask >> j) & 1 for j in range(self.n))
        return MkpResult(x, inc_val + free_gain, truncated, expansions)


def _load(key: int, row) -> int:
    load = 0
    while key:
        low = key & -key
        load += row[low.bit_length() - 1]
        key ^= low
    return load
