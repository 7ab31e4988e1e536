import math
from fractions import Fraction

import numpy as np
import pytest

from helpers import brute_incidence, explicit, random_explicit
from multicover.errors import InfeasibleError, InputError
from multicover.lp import (
    FractionalSolution,
    LpOptions,
    blend_uniform,
    build_lp,
    check_fractional,
    lp_value,
    solve_lp,
    solve_lp_exact,
)
from multicover.oracle import lp_vertex_oracle


def test_build_lp_single_constraint():
    lp = build_lp(explicit([2], [[0], [0]]))
    assert lp.n_constraints == 1 and lp.n_vars == 2
    assert lp.rhs.tolist() == [2.0]
    assert lp.upper.tolist() == [1.0, 1.0]


def test_build_lp_zero_demands():
    inst = explicit([0, 0], [[0], [1]])
    assert build_lp(inst).n_constraints == 0
    x = solve_lp(inst)
    assert x.value == 0 and all(v == 0 for v in x.x.values())


def test_build_lp_matrix_matches_incidence():
    rng = np.random.default_rng(3)
    for _ in range(20):
        inst = random_explicit(rng, 9, 7, 3, d_min=1)
        M = build_lp(inst).dense()
        inc = brute_incidence(inst)[inst.demands > 0].astype(float)
        assert np.array_equal(M, inc)
        assert np.array_equal(M.sum(axis=0), inc.sum(axis=0))


def test_build_lp_repetition_unbounded():
    assert np.isinf(build_lp(explicit([1], [[0]], repetition=True)).upper).all()


@pytest.mark.parametrize("method", ["simplex", "iterative"])
def test_forced_solution(method):
    x = solve_lp(explicit([2], [[0], [0]]), LpOptions(method=method))
    assert x.value == pytest.approx(2.0, abs=1e-6)
    assert [x.x[0], x.x[1]] == pytest.approx([1.0, 1.0], abs=1e-6)


@pytest.mark.parametrize("method", ["simplex", "iterative"])
def test_tight_single_constraint(method):
    x = solve_lp(explicit([1], [[0], [0], [0]]), LpOptions(method=method))
    assert x.value == pytest.approx(1.0, abs=1e-6)
    assert not check_fractional(explicit([1], [[0], [0], [0]]), x, 1e-9)


def test_matches_vertex_oracle_tiny():
    rng = np.random.default_rng(11)
    for k in range(60):
        inst = random_explicit(rng, 5, int(rng.integers(1, 7)), 3, density=0.6, repetition=k % 3 == 0)
        want = float(lp_vertex_oracle(inst))
        assert solve_lp(inst, LpOptions(method="simplex")).value == pytest.approx(want, abs=1e-6)


def test_exact_rational_solution():
    rng = np.random.default_rng(5)
    for _ in range(20):
        inst = random_explicit(rng, 6, 6, 3, density=0.6)
        x = solve_lp_exact(inst)
        assert all(isinstance(v, Fraction) for v in x.x.values())
        assert isinstance(x.value, Fraction)
        assert x.value == lp_vertex_oracle(inst)
        assert not check_fractional(inst, x, 0)


def test_iterative_close_to_simplex():
    rng = np.random.default_rng(8)
    for _ in range(10):
        inst = random_explicit(rng, 30, 20, 4, d_min=1)
        a = solve_lp(inst, LpOptions(method="simplex"))
        b = solve_lp(inst, LpOptions(method="iterative"))
        assert b.value == pytest.approx(a.value, rel=1e-5, abs=1e-6)
        assert not check_fractional(inst, b)


def test_auto_switches_on_size():
    small = explicit([1], [[0], [0]])
    assert solve_lp(small).method == "simplex"
    assert solve_lp(small, LpOptions(auto_threshold=1)).method == "iterative"


def test_infeasible_instance():
    with pytest.raises(InfeasibleError):
        solve_lp(explicit([3], [[0], [0]]))


def test_bad_options():
    with pytest.raises(InputError):
        LpOptions(method="magic")
    with pytest.raises(InputError):
        LpOptions(eps_opt=0)


def test_lp_value():
    assert lp_value(FractionalSolution.from_weights({})) == 0
    assert lp_value(FractionalSolution.from_weights({0: 0.5, 1: 0.5})) == 1.0
    rng = np.random.default_rng(2)
    w = {i: float(v) for i, v in enumerate(rng.random(50))}
    assert lp_value(FractionalSolution.from_weights(w)) == pytest.approx(math.fsum(w.values()), abs=0)


def test_blend_uniform_stays_feasible():
    rng = np.random.default_rng(4)
    for _ in range(10):
        inst = random_explicit(rng, 15, 10, 3, d_min=1)
        x = solve_lp(inst)
        for lam in (0.0, 0.3, 1.0):
            y = blend_uniform(inst, x, lam)
            assert not check_fractional(inst, y, 1e-9)
        u = blend_uniform(inst, x, 1.0)
        assert len(set(u.x.values())) == 1
    with pytest.raises(InputError):
        blend_uniform(inst, x, 1.5)


def test_dump_lp(tmp_path):
    inst = explicit([2, 1], [[0], [0, 1]])
    path = tmp_path / "lp.txt"
    build_lp(inst).dump(path)
    body = [ln.split() for ln in path.read_text().splitlines() if not ln.startswith("#")]
    assert sorted((int(a), int(b)) for a, b, _ in body) == [(0, 0), (0, 1), (1, 1)]
