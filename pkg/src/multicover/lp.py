"""The covering LP relaxation and its solvers.

    minimize    sum_i x_i
    subject to  sum_{i : p in r_i} x_i >= d(p)   for every point p
                0 <= x_i <= 1                     (x_i >= 0 with repetition)

The exact method runs a dense tableau simplex on the packing dual

    maximize    sum_p d(p) y_p - sum_i z_i
    subject to  sum_{p in r_i} y_p - z_i <= 1,   y, z >= 0

whose all-slack basis is feasible, so no phase one is needed.  The primal
``x`` is read off the reduced costs of the slack columns.  Pricing is
Dantzig's rule; a degenerate pivot switches to Bland's rule until progress
resumes, which rules out cycling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from .errors import InfeasibleError, InputError, SolverError
from .instance import MultiCoverInstance, check_feasible


@dataclass(frozen=True)
class LpOptions:
    eps_opt: float = 1e-7
    eps_feas: float = 1e-9
    method: str = "auto"  # "simplex" | "iterative" | "auto"
    max_iter: int = 200_000
    # "auto" switches to the iterative method above this many tableau entries
    auto_threshold: int = 200_000

    def __post_init__(self):
        if self.method not in ("simplex", "iterative", "auto"):
            raise InputError(f"unknown LP method {self.method!r}")
        if not (self.eps_opt > 0 and math.isfinite(self.eps_opt)):
            raise InputError("eps_opt must be a small positive real")
        if not (self.eps_feas >= 0 and math.isfinite(self.eps_feas)):
            raise InputError("eps_feas must be a small nonnegative real")


ITERATIVE_EPS_OPT = 1e-2


@dataclass(frozen=True)
class FractionalSolution:
    """LP weights per range id.  Values may be floats or ``Fraction``s."""

    x: Mapping[int, float]
    value: float
    tolerance: float = 0.0
    method: str = ""

    @classmethod
    def from_weights(cls, x, tolerance=0.0, method=""):
        x = dict(sorted(x.items()))
        return cls(x, lp_value_of(x), tolerance, method)

    def restrict(self, range_ids):
        keep = set(range_ids)
        return FractionalSolution.from_weights(
            {i: v for i, v in self.x.items() if i in keep}, self.tolerance, self.method)

    def scaled(self, factor):
        return FractionalSolution.from_weights(
            {i: v * factor for i, v in self.x.items()}, self.tolerance, self.method)

    def get(self, range_id, default=0):
        return self.x.get(range_id, default)


def lp_value_of(x: Mapping[int, float]):
    vals = list(x.values())
    if vals and all(isinstance(v, (float, np.floating)) for v in vals):
        return math.fsum(vals)
    return sum(vals, 0)


def lp_value(sol: FractionalSolution):
    return lp_value_of(sol.x)


@dataclass(frozen=True)
class LpProblem:
    """Sparse row form: ``rows[j]`` lists column indices with coefficient 1."""

    range_ids: tuple[int, ...]
    point_ids: tuple[int, ...]
    rows: tuple[tuple[int, ...], ...]
    rhs: np.ndarray
    upper: np.ndarray
    objective: np.ndarray = field(repr=False)

    @property
    def n_vars(self):
        return len(self.range_ids)

    @property
    def n_constraints(self):
        return len(self.rows)

    def dense(self) -> np.ndarray:
        M = np.zeros((len(self.rows), len(self.range_ids)))
        for j, cols in enumerate(self.rows):
            M[j, list(cols)] = 1.0
        return M

    def triplets(self):
        for j, cols in enumerate(self.rows):
            for i in cols:
                yield j, i, 1.0

    def dump(self, path):
        """Row-major ``row col value`` triplets, after a header of rhs and bounds."""
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(f"# covering LP: minimize sum x  s.t. Ax >= rhs, 0 <= x <= upper\n")
            fh.write(f"# rows {self.n_constraints} cols {self.n_vars}\n")
            fh.write("# cols " + " ".join(str(i) for i in self.range_ids) + "\n")
            fh.write("# upper " + " ".join("inf" if math.isinf(u) else "%g" % u for u in self.upper) + "\n")
            for j, pid in enumerate(self.point_ids):
                fh.write(f"# rhs {j} point {pid} {int(self.rhs[j])}\n")
            for j, i, v in self.triplets():
                fh.write(f"{j} {i} {v:g}\n")


def build_lp(instance: MultiCoverInstance) -> LpProblem:
    """One constraint per point with positive demand, one variable per range."""
    pos = instance.range_pos
    rows, rhs, pids = [], [], []
    for p in instance.points:
        if p.demand <= 0:
            continue
        rows.append(tuple(pos[r] for r in instance.covering[p.id]))
        rhs.append(float(p.demand))
        pids.append(p.id)
    m = len(instance.ranges)
    upper = np.full(m, np.inf if instance.repetition_allowed else 1.0)
    return LpProblem(instance.range_ids, tuple(pids), tuple(rows),
                     np.array(rhs, dtype=float), upper, np.ones(m))


def solve_lp(instance: MultiCoverInstance, opts: LpOptions | None = None) -> FractionalSolution:
    """Optimal (or, for the iterative method, near-optimal) fractional solution."""
    opts = opts or LpOptions()
    check_feasible(instance)
    lp = build_lp(instance)
    if lp.n_constraints == 0:
        return FractionalSolution.from_weights({i: 0.0 for i in lp.range_ids}, opts.eps_feas, "trivial")
    method = opts.method
    if method == "auto":
        width = lp.n_constraints + lp.n_vars * (1 if instance.repetition_allowed else 2)
        method = "simplex" if lp.n_vars * width <= opts.auto_threshold else "iterative"
    if method == "simplex":
        x = _dual_simplex_tableau(lp, opts)
    else:
        x = _interior_point(lp, opts)
    x = _polish(lp, x, opts)
    return FractionalSolution.from_weights(dict(zip(lp.range_ids, x.tolist())), opts.eps_feas, method)


def _dual_simplex_tableau(lp: LpProblem, opts: LpOptions, exact=False) -> np.ndarray:
    """Primal weights from the dual tableau.

    With ``exact`` the tableau holds ``Fraction``s, every tolerance is zero
    and Bland's rule is used throughout.
    """
    A = lp.dense()  # points x ranges
    n, m = A.shape
    bounded = bool(np.isfinite(lp.upper).all())
    nz = m if bounded else 0
    ncols = n + nz + m
    T = np.zeros((m + 1, ncols + 1))
    T[:m, :n] = A.T
    if bounded:
        T[:m, n:n + m] = -np.eye(m)
    T[:m, n + nz:n + nz + m] = np.eye(m)
    T[:m, -1] = 1.0
    T[m, :n] = -lp.rhs
    if bounded:
        T[m, n:n + m] = 1.0
    if exact:
        T = np.vectorize(lambda v: Fraction(int(v)), otypes=[object])(T)
    basis = np.arange(n + nz, n + nz + m)
    tol = 0 if exact else 1e-11
    bland = exact
    log = []
    for it in range(opts.max_iter):
        red = T[m, :-1]
        if bland:
            cand = np.nonzero(red < -tol)[0]
            if not len(cand):
                break
            e = int(cand[0])
        else:
            e = int(np.argmin(red))
            if red[e] >= -tol:
                break
        col = T[:m, e]
        pos = np.nonzero(col > tol)[0]
        if not len(pos):
            raise InfeasibleError("dual LP unbounded: some point cannot reach its demand")
        ratios = [T[k, -1] / col[k] for k in pos]
        best = min(ratios)
        slack = 0 if exact else 1e-12 * max(1.0, best)
        ties = [k for k, q in zip(pos, ratios) if q <= best + slack]
        r = int(min(ties, key=lambda k: basis[k]))
        bland = exact or best <= tol + (0 if exact else 1e-12)
        T[r] = T[r] / T[r, e]
        f = T[:, e].copy()
        f[r] = 0
        T -= np.outer(f, T[r])
        basis[r] = e
        if it % 500 == 0:
            log.append((it, float(T[m, -1])))
    else:
        raise SolverError(f"simplex did not converge in {opts.max_iter} iterations", log)
    x = T[m, n + nz:n + nz + m].copy()
    if not exact and not np.all(np.isfinite(x)):
        raise SolverError("simplex produced non-finite values", log)
    return x


def solve_lp_exact(instance: MultiCoverInstance) -> FractionalSolution:
    """Optimal LP solution in exact rational arithmetic (small instances only)."""
    check_feasible(instance)
    lp = build_lp(instance)
    if lp.n_constraints == 0:
        return FractionalSolution.from_weights({i: Fraction(0) for i in lp.range_ids}, 0, "exact")
    x = _dual_simplex_tableau(lp, LpOptions(method="simplex"), exact=True)
    return FractionalSolution.from_weights(dict(zip(lp.range_ids, x.tolist())), 0, "exact")


def _interior_point(lp: LpProblem, opts: LpOptions) -> np.ndarray:
    from scipy.optimize import linprog
    from scipy.sparse import csr_matrix

    data, ri, ci = [], [], []
    for j, i, v in lp.triplets():
        ri.append(j)
        ci.append(i)
        data.append(-v)
    A_ub = csr_matrix((data, (ri, ci)), shape=(lp.n_constraints, lp.n_vars))
    bounds = [(0.0, None if math.isinf(u) else u) for u in lp.upper]
    res = linprog(np.ones(lp.n_vars), A_ub=A_ub, b_ub=-lp.rhs, bounds=bounds, method="highs-ipm")
    if res.status == 2:
        raise InfeasibleError("LP infeasible")
    if res.status != 0 or res.x is None:
        raise SolverError(f"interior point method failed: {res.message}", [res.message])
    return np.asarray(res.x, dtype=float)


def _polish(lp: LpProblem, x: np.ndarray, opts: LpOptions) -> np.ndarray:
    """Clip to the bounds and push any residual violation onto ranges with headroom."""
    x = np.clip(x, 0.0, lp.upper)
    x[x < 1e-13] = 0.0
    if np.isfinite(lp.upper).all():
        x[x > 1.0 - 1e-13] = 1.0
    for j, cols in enumerate(lp.rows):
        cols = list(cols)
        short = lp.rhs[j] - math.fsum(x[cols])
        if short <= 0:
            continue
        for i in cols:
            room = lp.upper[i] - x[i]
            step = min(room, short)
            if step > 0:
                x[i] += step
                short -= step
            if short <= 0:
                break
        if short > opts.eps_feas:
            raise SolverError(f"constraint for point {lp.point_ids[j]} violated by {short:g}")
    return x


def blend_uniform(instance: MultiCoverInstance, x: FractionalSolution, lam) -> FractionalSolution:
    """``(1 - lam) * x + lam * u`` with ``u`` the smallest feasible uniform weighting.

    The result is feasible but not optimal; it spreads weight over every
    range, which is what exercises the light-range stages of the pipelines.
    """
    if not 0 <= lam <= 1:
        raise InputError("blend factor must lie in [0, 1]")
    s = 0.0
    for p in instance.points:
        if p.demand > 0:
            s = max(s, p.demand / len(instance.covering[p.id]))
    w = {i: (1 - lam) * float(x.get(i, 0.0)) + lam * s for i in instance.range_ids}
    return FractionalSolution.from_weights(w, x.tolerance, f"{x.method}+blend{lam:g}")


def check_fractional(instance: MultiCoverInstance, sol: FractionalSolution, tol=None) -> dict[int, float]:
    """Points whose fractional coverage falls short by more than ``tol``."""
    tol = sol.tolerance if tol is None else tol
    bad = {}
    for p in instance.points:
        got = sum((sol.x.get(r, 0) for r in instance.covering[p.id]), 0)
        if got < p.demand - tol:
            bad[p.id] = p.demand - got
    for i, v in sol.x.items():
        if v < 0 or (not instance.repetition_allowed and v > 1):
            bad[("range", i)] = v
    return bad
