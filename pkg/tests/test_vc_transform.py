import math
from fractions import Fraction

import numpy as np
import pytest

from helpers import explicit, random_explicit
from multicover.errors import InputError, InternalCheckError, RetryBudgetExceeded
from multicover.generators import GeneratorSpec, generate
from multicover.instance import is_feasible_cover, residual
from multicover.lp import FractionalSolution, blend_uniform, solve_lp, solve_lp_exact
from multicover.oracle import solve_exact
from multicover.rounding import extract_heavy, greedy_complete
from multicover.vc_transform import (
    HEAVY,
    build_transformed_system,
    repetition_draws,
    solve_multicover_vc,
    solve_with_repetition,
    split_inequalities,
)


def five_range_example():
    # one point with demand 1 in ranges 1..5 (range 0 misses it)
    inst = explicit([1], [[], [0], [0], [0], [0], [0]])
    x = FractionalSolution.from_weights({0: 0.0, **{i: 0.2 for i in range(1, 6)}})
    return inst, x


def prefix_oracle(weights):
    """Groups as lists of positions, by direct prefix-sum simulation."""
    groups, cur, acc = [], [], 0
    for k, w in enumerate(weights):
        cur.append(k)
        acc += w
        if acc >= Fraction(1, 2):
            groups.append(cur)
            cur, acc = [], 0
    return groups


def test_split_five_range_example():
    inst, x = five_range_example()
    groups = split_inequalities(inst, x)[0]
    assert len(groups) == 1
    g = groups[0]
    assert g.members == (1, 2, 3) and g.interval == (1, 3)
    assert g.weight == pytest.approx(0.6)


def test_split_no_weight_no_groups():
    inst = explicit([0], [[0]])
    assert split_inequalities(inst, FractionalSolution.from_weights({0: 0.0}))[0] == []


def test_split_rejects_heavy():
    inst = explicit([1], [[0]])
    with pytest.raises(InputError):
        split_inequalities(inst, FractionalSolution.from_weights({0: 0.25}))


def test_split_random_matches_prefix_oracle():
    rng = np.random.default_rng(3)
    for _ in range(200):
        m = int(rng.integers(1, 25))
        inst = random_explicit(rng, 4, m, 3, density=0.7)
        x = {i: Fraction(int(rng.integers(0, 25)), 100) for i in inst.range_ids}
        groups = split_inequalities(inst, FractionalSolution.from_weights(x))
        for p in inst.point_ids:
            cov = inst.covering[p]
            want = prefix_oracle([x[r] for r in cov])
            got = groups[p]
            assert [list(g.members) for g in got] == [[cov[k] for k in grp] for grp in want]
            for g in got:
                assert Fraction(1, 2) <= g.weight < Fraction(3, 4)
            if sum(x[r] for r in cov) >= inst.demand[p]:
                assert len(got) >= inst.demand[p]


def test_transformed_system_empty():
    inst = explicit([0], [[0], [0]])
    x = FractionalSolution.from_weights({0: 0.1, 1: 0.1})
    T = build_transformed_system(inst, x, {0: []})
    assert T.elements == ()
    assert all(not T.instance.members[r] for r in T.instance.range_ids)


def test_transformed_system_five_range_example():
    inst, x = five_range_example()
    T = build_transformed_system(inst, x, split_inequalities(inst, x))
    assert T.elements == ((0, 1, 3),)
    assert [0 in T.instance.members[r] for r in range(6)] == [False, True, True, True, False, False]
    assert T.witness.x[1] == pytest.approx(0.4)


def test_transformed_membership_uses_definition_not_intervals():
    # point 0 is in ranges 0, 2, 4; range 1 and 3 lie inside its interval but miss it
    inst = explicit([1, 0], [[0], [1], [0, 1], [1], [0]])
    x = FractionalSolution.from_weights({0: 0.2, 1: 0.2, 2: 0.2, 3: 0.2, 4: 0.2})
    T = build_transformed_system(inst, x, split_inequalities(inst, x))
    assert T.elements[0][0] == 0 and T.elements[0][1:] == (0, 4)
    assert 0 not in T.instance.members[1] and 0 not in T.instance.members[3]


def test_transformed_random_witness_and_lift():
    rng = np.random.default_rng(4)
    checked = 0
    for _ in range(150):
        inst = random_explicit(rng, 6, 16, 2, density=0.7, d_min=1)
        x = blend_uniform(inst, solve_lp(inst), 1.0)
        heavy, light = extract_heavy(x, HEAVY)
        R = residual(inst, heavy)
        light = light.restrict(R.range_ids)
        groups = split_inequalities(R, light)
        T = build_transformed_system(R, light, groups)
        for k, (p, a, b) in enumerate(T.elements):
            cov = [r for r in R.covering[p] if a <= r <= b]
            assert set(cov) == set(T.instance.covering[k])
            assert sum(light.x[r] for r in cov) >= 0.5 - 1e-9
        for r in T.order:
            assert len(T.instance.members[r]) <= len(R.members[r])
        if T.elements:
            cover = greedy_complete(T.instance)
            assert is_feasible_cover(R, cover)
            checked += 1
    assert checked > 50


def test_witness_failure_is_internal_error():
    inst, x = five_range_example()
    groups = split_inequalities(inst, x)
    thin = FractionalSolution.from_weights({0: 0.0, **{i: 0.1 for i in range(1, 6)}})
    with pytest.raises(InternalCheckError):
        build_transformed_system(inst, thin, groups)


def test_vc_zero_demand():
    cover, trace = solve_multicover_vc(explicit([0, 0], [[0], [1]]))
    assert cover.chosen == () and trace.attempts == 0


def test_vc_forced_solution_via_heavy():
    inst = explicit([2, 1], [[0, 1], [0, 1], [1], []])
    cover, trace = solve_multicover_vc(inst, seed=1)
    assert cover.chosen == (0, 1)
    assert trace.heavy == (0, 1) and trace.sample == ()


def test_vc_random_feasible_and_compared_to_exact():
    for seed in range(25):
        inst = generate(GeneratorSpec("abstract-random", n=15, m=12, d_max=3, seed=seed))
        cover, trace = solve_multicover_vc(inst, seed=seed)
        assert is_feasible_cover(inst, cover)
        opt = solve_exact(inst)
        assert opt.optimal and len(cover) >= opt.size


def test_vc_sampling_path_exercised():
    sampled = 0
    for seed in range(20):
        inst = generate(GeneratorSpec("abstract-random", n=20, m=30, d_max=2, density=0.6, seed=seed))
        x = blend_uniform(inst, solve_lp(inst), 1.0)
        cover, trace = solve_multicover_vc(inst, seed=seed, x=x)
        assert is_feasible_cover(inst, cover)
        assert not cover.has_duplicates()
        sampled += bool(trace.sample)
        assert trace.extra["groups"] or trace.heavy
    assert sampled >= 10


def test_vc_deterministic():
    inst = generate(GeneratorSpec("abstract-random", n=20, m=30, d_max=2, density=0.6, seed=3))
    x = blend_uniform(inst, solve_lp(inst), 1.0)
    a = solve_multicover_vc(inst, seed=8, x=x)[0]
    b = solve_multicover_vc(inst, seed=8, x=x)[0]
    assert a == b


def test_vc_retry_budget():
    inst = generate(GeneratorSpec("abstract-random", n=20, m=30, d_max=2, density=0.6, seed=3))
    x = blend_uniform(inst, solve_lp(inst), 1.0)
    with pytest.raises(RetryBudgetExceeded) as exc:
        solve_multicover_vc(inst, seed=0, alpha=1e-6, max_attempts=3, x=x)
    assert exc.value.trace.attempts == 3


def test_vc_rejects_bad_input():
    with pytest.raises(InputError):
        solve_multicover_vc(explicit([1], [[0]]), delta_star=0)
    with pytest.raises(InputError):
        solve_multicover_vc(explicit([1], [[0]], repetition=True))


def test_repetition_single_range():
    inst = explicit([3], [[0]], repetition=True)
    cover, trace = solve_with_repetition(inst, seed=2)
    assert cover.chosen == (0, 0, 0)


def test_repetition_zero_demand_and_requires_flag():
    assert solve_with_repetition(explicit([0], [[0]], repetition=True))[0].chosen == ()
    with pytest.raises(InputError):
        solve_with_repetition(explicit([1], [[0]]))


def test_repetition_feasible_and_bounded():
    for seed in range(20):
        inst = generate(GeneratorSpec("abstract-random", n=20, m=12, d_max=4, density=0.4,
                                      repetition_allowed=True, seed=seed))
        cover, trace = solve_with_repetition(inst, seed=seed)
        assert is_feasible_cover(inst, cover)
        f = trace.extra["f"]
        assert len(cover) <= math.ceil(3 * f * math.log(f + 2))


def test_repetition_draw_frequencies():
    x = FractionalSolution.from_weights({0: 0.5, 1: 1.5, 2: 2.0})
    draws = repetition_draws(x, 40_000, seed=1)
    n = len(draws)
    for i, w in x.x.items():
        p = w / 4.0
        freq = draws.count(i) / n
        assert abs(freq - p) <= 3 * math.sqrt(p * (1 - p) / n)


def test_repetition_untrimmed_size():
    inst = explicit([2, 1], [[0, 1], [0]], repetition=True)
    cover, trace = solve_with_repetition(inst, seed=0, trim=False)
    assert len(cover) == trace.extra["draws"]


def test_vc_accepts_exact_rational_lp():
    inst = explicit([1] * 4, [[0, 1], [1, 2], [2, 3], [3, 0], [0, 2], [1, 3]])
    x = solve_lp_exact(inst)
    cover, trace = solve_multicover_vc(inst, seed=0, x=x)
    assert is_feasible_cover(inst, cover)
    assert all(isinstance(g[3], float) for g in trace.extra["groups"])
