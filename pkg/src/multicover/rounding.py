"""Randomized-rounding primitives shared by the pipelines."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InfeasibleError, InputError
from .instance import CoverSolution, MultiCoverInstance, residual, total_demand
from .lp import FractionalSolution
from .rng import stream


@dataclass(frozen=True)
class SamplingParameters:
    c: float = 4.0
    K: float = 1.0
    V: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.c >= 4:
            raise InputError(f"sampling multiplier c must be >= 4, got {self.c}")
        if not self.K >= 1:
            raise InputError(f"K must be >= 1, got {self.K}")
        if not self.V >= 0:
            raise InputError(f"V must be >= 0, got {self.V}")

    @staticmethod
    def min_c(K):
        """Smallest multiplier for which the residual-demand bound applies."""
        return 4.0 + 4.0 * math.log(K)


@dataclass
class RoundingTrace:
    heavy: tuple[int, ...] = ()
    sample: tuple[int, ...] = ()
    completion: tuple[int, ...] = ()
    residual_before: int = 0
    residual_after: int = 0
    seed: int = 0
    attempts: int = 1
    extra: dict = field(default_factory=dict)

    def cover(self) -> CoverSolution:
        return CoverSolution.of(self.heavy + self.sample + self.completion)

    def to_dict(self):
        return {
            "heavy": list(self.heavy),
            "sample": list(self.sample),
            "completion": list(self.completion),
            "residual_before": self.residual_before,
            "residual_after": self.residual_after,
            "seed": self.seed,
            "attempts": self.attempts,
            **self.extra,
        }


def extract_heavy(x: FractionalSolution, beta):
    """Split off the ranges with weight at least ``beta``.

    Returns the sorted heavy ids and the solution restricted to the rest.
    """
    if not 0 < beta < 1:
        raise InputError(f"beta must lie in (0, 1), got {beta}")
    heavy = tuple(i for i, v in x.x.items() if v >= beta)
    hs = set(heavy)
    light = FractionalSolution.from_weights(
        {i: v for i, v in x.x.items() if i not in hs}, x.tolerance, x.method)
    return heavy, light


def cx_uniforms(x: FractionalSolution, seed, trial=0) -> np.ndarray:
    """One uniform per range of ``x`` (ascending id), keyed by ``(seed, trial)``."""
    return stream(seed, "cx", trial).random(len(x.x))


def cx_sample(instance, x: FractionalSolution, c, seed, trial=0) -> tuple[int, ...]:
    """Include each range independently with probability ``min(1, c * x_i)``.

    Ranges with ``c * x_i >= 1`` are always included.  The uniforms depend
    only on ``(seed, trial)`` and the range order, so samples for different
    ``c`` are coupled: a larger ``c`` never drops a range.
    """
    if c < 0:
        raise InputError("c must be nonnegative")
    ids = list(x.x.keys())
    if instance is not None:
        unknown = [i for i in ids if i not in instance.range_pos]
        if unknown:
            raise InputError(f"unknown range id {unknown[0]}")
    u = cx_uniforms(x, seed, trial)
    p = np.minimum(1.0, c * np.array([float(v) for v in x.x.values()], dtype=float))
    return tuple(i for i, take in zip(ids, u < p) if take)


def tail_bound(c, d):
    """Upper bound ``exp(-c d / 4)`` on the chance a demand-``d`` point is left short."""
    if c < 4:
        raise InputError(f"the tail bound needs c >= 4, got {c}")
    if d < 1:
        raise InputError(f"demand must be >= 1, got {d}")
    return math.exp(-c * d / 4.0)


def greedy_complete(R: MultiCoverInstance) -> CoverSolution:
    """Cover a residual instance with at most ``total_demand(R)`` ranges.

    Points are scanned by ascending id; each one is credited with the ranges
    already picked and topped up with covering ranges in ascending id order.
    """
    picked: list[int] = []
    count: Counter = Counter()
    for p in R.points:
        cov = R.covering[p.id]
        need = p.demand - sum(count[r] for r in cov)
        if need <= 0:
            continue
        fresh = [r for r in cov if not count[r]]
        if R.repetition_allowed and cov:
            fresh += [cov[0]] * max(0, need - len(fresh))
        if len(fresh) < need:
            raise InfeasibleError(
                f"point {p.id} needs {need} more ranges but only {len(fresh)} remain",
                witness=p.id, shortfall=need - len(fresh))
        for r in fresh[:need]:
            picked.append(r)
            count[r] += 1
    return CoverSolution.of(picked)


def residual_demand_after(instance: MultiCoverInstance, chosen) -> int:
    return total_demand(residual(instance, CoverSolution.of(chosen)))


def expected_residual_check(sampler: Callable, params: SamplingParameters, trials: int):
    """Monte Carlo estimate of the expected total residual demand of a cx-sample.

    ``sampler(trial)`` returns ``(instance, x)`` drawn from the distribution
    under study; ranges with ``x_i >= 1/c`` are taken outright before
    sampling.  Requires ``c >= 4 + 4 ln K``.
    """
    if params.c < SamplingParameters.min_c(params.K):
        raise InputError(f"c = {params.c} is below 4 + 4 ln K = {SamplingParameters.min_c(params.K):.3f}")
    values = []
    for t in range(trials):
        instance, x = sampler(t)
        if not x.x:
            values.append(total_demand(instance))
            continue
        heavy, light = extract_heavy(x, min(1.0 / params.c, 1 - 1e-12))
        sample = cx_sample(instance, light, params.c, params.seed, trial=t)
        values.append(residual_demand_after(instance, heavy + sample))
    arr = np.array(values, dtype=float)
    n = max(len(arr), 1)
    std = float(arr.std(ddof=1)) if len(arr) > 1 else 0.0
    return {
        "trials": len(arr),
        "mean": float(arr.mean()) if len(arr) else 0.0,
        "std": std,
        "stderr": std / math.sqrt(n),
        "V": params.V,
        "c": params.c,
        "K": params.K,
    }
