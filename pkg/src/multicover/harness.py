"""Method dispatch, result records and benchmark grids."""

from __future__ import annotations

import json
import statistics
import time
from dataclasses import asdict, dataclass, field

from .cluster import solve_multicover_geometric, solve_multicover_union
from .cutting import UnionComplexityProfile
from .errors import InputError, MultiCoverError
from .generators import GeneratorSpec, generate
from .instance import CoverSolution, MultiCoverInstance, is_feasible_cover
from .lp import LpOptions, blend_uniform, solve_lp
from .oracle import solve_exact, solve_greedy_baseline
from .vc_transform import solve_multicover_vc, solve_with_repetition

METHODS = ("vc", "vc-rep", "geometric", "union", "greedy", "exact")

_PARAM_TYPES = {
    "delta_star": int,
    "alpha": float,
    "c": float,
    "C_u": float,
    "kappa": float,
    "blend": float,
    "profile": str,
    "lp_method": str,
    "node_budget": int,
    "max_attempts": int,
    "with_opt": int,
}


def parse_params(text: str | None) -> dict:
    """``"k=v,k2=v2"`` into a typed dict; unknown keys are an input error."""
    out = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise InputError(f"parameter {item!r} is not of the form key=value")
        key, val = (s.strip() for s in item.split("=", 1))
        if key not in _PARAM_TYPES:
            raise InputError(f"unknown parameter {key!r}; known: {sorted(_PARAM_TYPES)}")
        try:
            out[key] = _PARAM_TYPES[key](val)
        except ValueError as exc:
            raise InputError(f"bad value for {key}: {val!r}") from exc
    return out


def parse_profile(name: str) -> UnionComplexityProfile:
    if name == "halfplanes":
        return UnionComplexityProfile.halfplanes()
    if name.startswith("power"):
        try:
            return UnionComplexityProfile.power(float(name[5:]))
        except ValueError:
            pass
    raise InputError(f"unknown union-complexity profile {name!r} (use halfplanes or powerK)")


@dataclass
class ResultRecord:
    digest: str
    method: str
    seed: int
    f: float
    size: int
    opt: int | None = None
    ratio_f: float | None = None
    ratio_opt: float | None = None
    wall_time: float = 0.0
    feasible: bool = True
    optimal: bool | None = None
    params: dict = field(default_factory=dict)
    trace: dict = field(default_factory=dict)
    error: str | None = None

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, default=_jsonable)


def _jsonable(v):
    if hasattr(v, "item"):
        return v.item()
    if hasattr(v, "numerator"):
        return float(v)
    raise TypeError(f"not serializable: {type(v)}")


def solution_dict(instance: MultiCoverInstance, cover: CoverSolution, method, seed, optimal=None):
    out = {"instance": instance.digest(), "method": method, "seed": int(seed), "chosen": list(cover.chosen)}
    if optimal is not None:
        out["optimal"] = bool(optimal)
    return out


def dumps_solution(sol: dict) -> str:
    return json.dumps(sol, sort_keys=True, indent=1) + "\n"


def incompatibility(instance: MultiCoverInstance, method: str) -> str | None:
    """Why ``method`` cannot run on ``instance``, or None."""
    if method not in METHODS:
        return f"unknown method {method!r}; choose from {', '.join(METHODS)}"
    if method in ("geometric", "union") and instance.ranges and not instance.is_geometric:
        return f"method {method} needs a halfplane instance"
    if method == "vc-rep" and not instance.repetition_allowed:
        return "method vc-rep needs repetition_allowed"
    if method in ("vc", "geometric", "union") and instance.repetition_allowed:
        return f"method {method} does not support repetition; use vc-rep"
    return None


def run_method(instance: MultiCoverInstance, method: str, seed=0, params: dict | None = None):
    """Solve, re-verify and describe.  Returns ``(cover, record)``."""
    params = dict(params or {})
    why = incompatibility(instance, method)
    if why:
        raise InputError(why)
    lp_opts = LpOptions(method=params.get("lp_method", "auto"))
    start = time.perf_counter()
    x = solve_lp(instance, lp_opts)
    f = float(x.value)
    xr = blend_uniform(instance, x, params["blend"]) if params.get("blend") else x
    opt = optimal = None
    trace = {}
    if method == "vc":
        cover, tr = solve_multicover_vc(instance, params.get("delta_star", 3), params.get("alpha", 3.0),
                                        seed, params.get("max_attempts", 64), lp_opts, x=xr)
        trace = tr.to_dict()
    elif method == "vc-rep":
        cover, tr = solve_with_repetition(instance, params.get("delta_star", 3), seed, params.get("kappa", 1.0),
                                          params.get("max_attempts", 64), lp_opts, x=xr)
        trace = tr.to_dict()
    elif method == "geometric":
        cover, rep = solve_multicover_geometric(instance, params.get("c", 12.0), seed, lp_opts, x=xr)
        trace = rep.to_dict()
    elif method == "union":
        profile = parse_profile(params.get("profile", "halfplanes"))
        cover, rep = solve_multicover_union(instance, profile, seed, params.get("C_u", 12.0), lp_opts, x=xr)
        trace = rep.to_dict()
    elif method == "greedy":
        cover = solve_greedy_baseline(instance)
    else:
        res = solve_exact(instance, params.get("node_budget", 200_000))
        cover, optimal = res.cover, res.optimal
        trace = {"nodes": res.nodes, "lower_bound": res.lower_bound}
        if optimal:
            opt = res.size
    if params.get("with_opt") and opt is None:
        res = solve_exact(instance, params.get("node_budget", 200_000))
        if res.optimal:
            opt = res.size
    wall = time.perf_counter() - start
    feasible = bool(is_feasible_cover(instance, cover))
    trace.pop("timings", None)
    rec = ResultRecord(
        digest=instance.digest(), method=method, seed=int(seed), f=f, size=len(cover), opt=opt,
        ratio_f=len(cover) / f if f > 0 else None,
        ratio_opt=len(cover) / opt if opt else None,
        wall_time=wall, feasible=feasible, optimal=optimal, params=params, trace=trace)
    return cover, rec


@dataclass
class BenchSuite:
    generators: list[GeneratorSpec]
    methods: list[str]
    seeds: list[int]
    params: dict = field(default_factory=dict)  # method -> params dict

    @classmethod
    def from_dict(cls, data):
        unknown = set(data) - {"generators", "methods", "seeds", "params"}
        if unknown:
            raise InputError(f"unknown suite fields: {sorted(unknown)}")
        gens = [GeneratorSpec.from_dict(g) for g in data.get("generators", [])]
        methods = list(data.get("methods", []))
        for m in methods:
            if m not in METHODS:
                raise InputError(f"unknown method {m!r}")
        return cls(gens, methods, [int(s) for s in data.get("seeds", [0])], dict(data.get("params", {})))


def bench(suite: BenchSuite, sink=None):
    """Run every (generator, seed, method) cell; failures are recorded, not raised.

    Returns ``(records, covers)``; ``covers`` maps ``(generator index, seed,
    method)`` to the cover (``None`` on failure).
    """
    records, covers = [], {}
    for gi, spec in enumerate(suite.generators):
        for seed in suite.seeds:
            inst = generate(GeneratorSpec.from_dict({**spec.to_dict(), "seed": seed}))
            for method in suite.methods:
                if incompatibility(inst, method):
                    continue
                params = dict(suite.params.get(method, {}))
                if method in ("vc", "vc-rep"):
                    params.setdefault("delta_star", spec.delta_star)
                try:
                    cover, rec = run_method(inst, method, seed, params)
                except MultiCoverError as exc:
                    cover = None
                    rec = ResultRecord(inst.digest(), method, seed, float("nan"), -1, params=params,
                                       feasible=False, error=f"{type(exc).__name__}: {exc}")
                rec.trace["generator"] = spec.kind
                covers[(gi, seed, method)] = cover
                records.append(rec)
                if sink is not None:
                    sink.write(rec.to_json() + "\n")
    return records, covers


def aggregate(records) -> list[dict]:
    """Per (generator, method): counts, median/mean size, median ratio to f, mean time."""
    groups = {}
    for r in records:
        groups.setdefault((r.trace.get("generator", "?"), r.method), []).append(r)
    out = []
    for (gen, method), rs in sorted(groups.items()):
        ok = [r for r in rs if r.error is None]
        sizes = [r.size for r in ok]
        ratios = [r.ratio_f for r in ok if r.ratio_f is not None]
        out.append({
            "generator": gen,
            "method": method,
            "runs": len(rs),
            "failures": len(rs) - len(ok),
            "median_size": statistics.median(sizes) if sizes else None,
            "mean_size": statistics.fmean(sizes) if sizes else None,
            "median_ratio_f": statistics.median(ratios) if ratios else None,
            "mean_time": statistics.fmean([r.wall_time for r in ok]) if ok else None,
        })
    return out
