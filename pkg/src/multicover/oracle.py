"""Ground-truth solvers for small instances."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InfeasibleError, InputError
from .instance import (
    CoverSolution,
    MultiCoverInstance,
    PointRecord,
    RangeRecord,
    check_feasible,
    coverage_shortfalls,
    is_feasible_cover,
    residual,
)
from .lp import LpOptions, solve_lp


@dataclass(frozen=True)
class ExactResult:
    cover: CoverSolution
    optimal: bool
    nodes: int
    lower_bound: int

    @property
    def size(self):
        return len(self.cover)


def solve_greedy_baseline(instance: MultiCoverInstance) -> CoverSolution:
    """Repeatedly take the range covering the most unmet demand units (ties: lowest id)."""
    check_feasible(instance)
    need = instance.demands.astype(np.int64).copy()
    inc = instance.incidence
    avail = np.ones(len(instance.ranges), dtype=bool)
    chosen = []
    while need.sum() > 0:
        gain = ((need > 0)[:, None] & inc).sum(axis=0)
        gain[~avail] = -1
        j = int(np.argmax(gain))
        if gain[j] <= 0:
            raise InfeasibleError("greedy baseline ran out of useful ranges")
        chosen.append(instance.range_ids[j])
        need = np.maximum(need - inc[:, j], 0)
        if not instance.repetition_allowed:
            avail[j] = False
    return CoverSolution.of(chosen)


def _expand_repetition(instance: MultiCoverInstance):
    """Binary copy of a repetition instance: each range gets ``max demand`` copies."""
    k = max([int(p.demand) for p in instance.points] + [1])
    ranges, origin = [], {}
    for r in instance.ranges:
        for c in range(k):
            rid = len(ranges)
            members = tuple(sorted(instance.members[r.id]))
            ranges.append(RangeRecord(rid, members=members))
            origin[rid] = r.id
    return MultiCoverInstance(instance.points, tuple(ranges)), origin


def solve_exact(instance: MultiCoverInstance, node_budget=200_000, size_cap=60) -> ExactResult:
    """Minimum-cardinality cover by branch and bound on LP lower bounds.

    Branches on the range with the largest fractional LP weight, trying
    inclusion first.  When the node budget runs out the best cover found is
    returned with ``optimal=False``.
    """
    if instance.repetition_allowed:
        binary, origin = _expand_repetition(instance)
        res = solve_exact(binary, node_budget, size_cap)
        return ExactResult(CoverSolution.of(origin[i] for i in res.cover.chosen),
                           res.optimal, res.nodes, res.lower_bound)
    if len(instance.ranges) > size_cap:
        raise InputError(f"exact solver capped at {size_cap} ranges, got {len(instance.ranges)}")
    check_feasible(instance)
    opts = LpOptions(method="simplex")
    best = list(solve_greedy_baseline(instance).chosen)
    nodes = 0
    root_bound = None
    exhausted = False

    def bound(sub):
        if not sub.points:
            return 0, {}
        x = solve_lp(sub, opts)
        return math.ceil(x.value - 1e-6), x.x

    stack = [((), ())]
    while stack:
        if nodes >= node_budget:
            exhausted = True
            break
        taken, banned = stack.pop()
        nodes += 1
        sub = residual(instance.without_ranges(banned), taken)
        if coverage_shortfalls(sub):
            continue
        lb, x = bound(sub)
        if root_bound is None:
            root_bound = len(taken) + lb
        if len(taken) + lb >= len(best):
            continue
        frac = [(v, -i) for i, v in x.items() if 1e-9 < v < 1 - 1e-9]
        if not frac:
            cand = list(taken) + [i for i, v in x.items() if v >= 1 - 1e-9]
            if len(cand) < len(best) and is_feasible_cover(instance, cand):
                best = cand
            continue
        i = -max(frac)[1]
        stack.append((taken, banned + (i,)))
        stack.append((taken + (i,), banned))
    cover = CoverSolution.of(best)
    assert is_feasible_cover(instance, cover)
    lb = len(best) if not exhausted else (root_bound or 0)
    return ExactResult(cover, not exhausted, nodes, lb)


def exhaustive_optimum(instance: MultiCoverInstance, max_ranges=15) -> int:
    """Smallest feasible subset size by brute force; for cross-checking only."""
    if len(instance.ranges) > max_ranges:
        raise InputError("instance too large for exhaustive search")
    ids = instance.range_ids
    for k in range(len(ids) + 1):
        for combo in itertools.combinations(ids, k):
            if is_feasible_cover(instance, combo):
                return k
    raise InfeasibleError("no subset of ranges is feasible")


# -- LP by vertex enumeration -------------------------------------------------


def _solve_exact_system(M, rhs):
    """Gauss-Jordan over ``Fraction``; ``M`` square and nonsingular."""
    k = len(M)
    A = [[Fraction(v) for v in row] + [Fraction(b)] for row, b in zip(M, rhs)]
    for col in range(k):
        piv = next(r for r in range(col, k) if A[r][col] != 0)
        A[col], A[piv] = A[piv], A[col]
        pv = A[col][col]
        A[col] = [v / pv for v in A[col]]
        for r in range(k):
            if r != col and A[r][col] != 0:
                f = A[r][col]
                A[r] = [a - f * b for a, b in zip(A[r], A[col])]
    return [A[r][k] for r in range(k)]


def _bound_assignments(levels, k):
    if k == 0:
        return np.zeros((1, 0))
    return np.array(list(itertools.product(levels, repeat=k)), dtype=float)


def lp_vertex_solution(instance: MultiCoverInstance, max_size=8):
    """Exact LP optimum and an optimal vertex, by enumerating basic solutions.

    A basic solution fixes every variable outside a free set ``F`` at one of
    its bounds and makes ``|F|`` linearly independent constraints tight.
    Candidates are screened in floating point (with a generous slack) and
    the surviving optimal candidates are re-evaluated in rational arithmetic.
    """
    m = len(instance.ranges)
    rows = [(p.demand, instance.covering[p.id]) for p in instance.points if p.demand > 0]
    if m > max_size or len(rows) > max_size:
        raise InputError(f"vertex oracle limited to {max_size} ranges and constraints")
    check_feasible(instance)
    ids = instance.range_ids
    if not rows:
        return Fraction(0), {i: Fraction(0) for i in ids}
    pos = instance.range_pos
    uniq = sorted({(d, tuple(pos[r] for r in cov)) for d, cov in rows})
    A = np.zeros((len(uniq), m))
    d = np.array([u[0] for u in uniq], dtype=float)
    for j, (_, cols) in enumerate(uniq):
        A[j, list(cols)] = 1.0
    levels = (0.0,) if instance.repetition_allowed else (0.0, 1.0)
    n = len(uniq)
    screen = 1e-7
    cands = []
    for k in range(0, min(m, n) + 1):
        for F in itertools.combinations(range(m), k):
            Fc = [i for i in range(m) if i not in F]
            Z = _bound_assignments(levels, len(Fc))
            for T in itertools.combinations(range(n), k):
                if k:
                    sub = A[np.ix_(T, F)]
                    if abs(np.linalg.det(sub)) < 0.5:
                        continue
                    rhs = d[list(T)][None, :] - Z @ A[np.ix_(T, Fc)].T
                    XF = np.linalg.solve(sub, rhs.T).T
                else:
                    XF = np.zeros((len(Z), 0))
                X = np.zeros((len(Z), m))
                X[:, list(F)] = XF
                X[:, Fc] = Z
                ok = (X >= -screen).all(axis=1) & ((A @ X.T).T >= d - screen).all(axis=1)
                if not instance.repetition_allowed:
                    ok &= (X <= 1 + screen).all(axis=1)
                for z_idx in np.nonzero(ok)[0]:
                    cands.append((float(X[z_idx].sum()), F, T, tuple(Z[z_idx])))
                if k == 0:
                    break
    if not cands:
        raise InfeasibleError("LP has no basic feasible solution")
    fmin = min(c[0] for c in cands)
    best = None
    for val, F, T, z in cands:
        if val > fmin + 1e-5:
            continue
        Fc = [i for i in range(m) if i not in F]
        x = [Fraction(0)] * m
        for i, v in zip(Fc, z):
            x[i] = Fraction(int(v))
        if F:
            M = [[int(A[t, i]) for i in F] for t in T]
            rhs = [int(d[t]) - sum(int(A[t, i]) * x[i] for i in Fc) for t in T]
            for i, v in zip(F, _solve_exact_system(M, rhs)):
                x[i] = v
        if any(v < 0 for v in x) or (not instance.repetition_allowed and any(v > 1 for v in x)):
            continue
        if any(sum(x[i] for i in cols) < dem for dem, cols in uniq):
            continue
        total = sum(x)
        if best is None or total < best[0]:
            best = (total, x)
    if best is None:
        raise InfeasibleError("no exactly feasible basic solution survived screening")
    return best[0], dict(zip(ids, best[1]))


def lp_vertex_oracle(instance: MultiCoverInstance, max_size=8) -> Fraction:
    return lp_vertex_solution(instance, max_size)[0]
