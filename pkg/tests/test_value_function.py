import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vfcoord.harness import GeneratorConfig, brute_force_vf, enumerate_commitments, generate_system
from vfcoord.milp_core import solve_mip
from vfcoord.model import area_domain, area_milp
from vfcoord.value_function import (DomainError, UcSolutionSet, VfConfig, construct_vf, evaluate_vf,
                                    evaluate_vf_exact, penalized_entry_lp, separation_problem, sweep_vf_1d,
                                    uniform_edges)

OFF, ON = np.zeros(1), np.ones(1)


def _set(milp, xs, lo=(0.0,), hi=(50.0,)):
    s = UcSolutionSet("A", list(milp.param_keys), np.array(lo), np.array(hi))
    for x in xs:
        s.add(milp, x)
    return s


def test_set_bookkeeping(one_unit, tmp_path):
    _, milp = one_unit
    s = _set(milp, [OFF, ON])
    assert not s.add(milp, ON) and len(s) == 2
    s.check(milp)
    assert s.entries[1].alpha == pytest.approx(milp.c_I @ ON)
    assert np.allclose(s.entries[1].beta, milp.zbar - milp.A_I @ ON)
    s.save(tmp_path / "vf.json")
    back = UcSolutionSet.load(tmp_path / "vf.json")
    assert back.keys == s.keys and [e.alpha for e in back.entries] == [e.alpha for e in s.entries]
    pub = s.public_view()
    assert all(e.x is None for e in pub.entries) and "x" not in pub.to_dict()["entries"][0]
    assert len(s.truncated(1)) == 1 and len(s) == 2


def test_evaluate_examples(one_unit):
    _, milp = one_unit
    both = _set(milp, [OFF, ON])
    ev = evaluate_vf(both, milp, [20.0])
    assert ev.value == pytest.approx(45.0) and ev.index == 1
    assert evaluate_vf(both, milp, [0.0]).value == pytest.approx(0.0)
    assert not evaluate_vf(_set(milp, [ON]), milp, [0.0]).feasible
    with pytest.raises(DomainError):
        evaluate_vf(both, milp, [60.0])
    assert evaluate_vf_exact(milp, [20.0]) == pytest.approx(45.0)
    assert evaluate_vf_exact(milp, [0.0]) == pytest.approx(0.0)
    assert evaluate_vf_exact(milp, [60.0]) == np.inf


def test_construct_on_one_unit(one_unit):
    _, milp = one_unit
    s = construct_vf(milp, [0.0], [50.0], VfConfig())
    assert s.contains(OFF) and s.contains(ON) and len(s) <= 3
    assert s.log["terminated_by"] == "gap"
    assert s.log["delta"][-1] <= s.log["epsilon"]
    assert all(b <= a + 1e-9 for a, b in zip(s.log["delta"], s.log["delta"][1:]))
    s.check(milp)


def test_cap_k1_returns_seed(one_unit):
    _, milp = one_unit
    s = construct_vf(milp, [0.0], [50.0], VfConfig(K=1))
    assert len(s) == 1 and s.log["terminated_by"] == "cap"


def test_separation_finds_missing_commitment(one_unit):
    _, milp = one_unit
    cfg = VfConfig()
    res = separation_problem(_set(milp, [OFF]), milp, cfg)
    assert res.delta > 0 and np.array_equal(res.x_new, ON)
    assert separation_problem(_set(milp, [OFF, ON]), milp, cfg).delta >= -1e-9


@pytest.fixture(scope="module")
def small_area():
    system = generate_system(GeneratorConfig(seed=3, areas=2, units=3, buses=2, periods=1))
    milp = area_milp(system, "A")
    keys, lo, hi = area_domain(system, "A")
    return milp, lo, hi


def test_partition_refinement_orders_relaxation_values(small_area):
    milp, lo, hi = small_area
    grid = np.linspace(lo[0], hi[0], 201)
    bf = brute_force_vf(milp, grid)
    first = bf.supporting[0]
    s = UcSolutionSet("A", list(milp.param_keys), lo, hi)
    s.add(milp, first)
    cfg = VfConfig()
    big_m = 10.0 * max(np.abs(milp.c_C).max() + np.abs(milp.c_I).max(), 1.0)
    true_gap = max(penalized_entry_lp(milp, s.entries[0], [z], big_m)[0] - v
                   for z, v in zip(grid, bf.values) if np.isfinite(v))
    d1 = separation_problem(s, milp, cfg, partitions=1).delta
    d8 = separation_problem(s, milp, cfg, partitions=8).delta
    tol = 1e-6 * (1 + abs(true_gap))
    assert true_gap <= d8 + tol and d8 <= d1 + tol


def test_upper_bound_and_monotone_improvement(small_area):
    milp, lo, hi = small_area
    grid = np.linspace(lo[0], hi[0], 41)
    exact = np.array([evaluate_vf_exact(milp, [z]) for z in grid])
    s = UcSolutionSet("A", list(milp.param_keys), lo, hi)
    prev = np.full(len(grid), np.inf)
    for x in enumerate_commitments(milp, lo, hi):
        s.add(milp, x)
        cur = np.array([evaluate_vf(s, milp, [z]).value for z in grid])
        assert np.all(cur <= prev + 1e-9)
        fin = np.isfinite(exact)
        assert np.all(cur[fin] >= exact[fin] - 1e-7 * (1 + np.abs(exact[fin])))
        prev = cur
    fin = np.isfinite(exact)
    assert np.allclose(prev[fin], exact[fin], rtol=1e-9, atol=1e-7)
    assert np.array_equal(np.isfinite(prev), fin)


def test_construct_matches_brute_force_and_log_is_monotone(small_area):
    milp, lo, hi = small_area
    s = construct_vf(milp, lo, hi, VfConfig())
    s.check(milp)
    grid = np.linspace(lo[0], hi[0], 101)
    bf = brute_force_vf(milp, grid)
    ev = np.array([evaluate_vf(s, milp, [z]).value for z in grid])
    fin = np.isfinite(bf.values)
    assert np.array_equal(fin, np.isfinite(ev))
    assert np.max(np.abs(ev[fin] - bf.values[fin])) <= 1e-6
    assert {"z0", "epsilon", "big_m", "history", "terminated_by"} <= set(s.log)


def test_sweep_one_unit(one_unit, tmp_path):
    _, milp = one_unit
    s = _set(milp, [OFF, ON])
    sw = sweep_vf_1d(s, milp, 0)
    assert sw.value[0] == pytest.approx(0.0)
    mask = (sw.z > 1e-9) & (sw.z < 10.0 - 1e-9)
    assert np.all(np.isinf(sw.value[mask]))
    on = sw.z >= 10.0
    assert np.allclose(sw.value[on], 5.0 + 2.0 * sw.z[on])
    # lower semi-continuity at the jump: the value at 10 is the right limit
    assert evaluate_vf(s, milp, [10.0]).value == pytest.approx(25.0)
    assert any(a <= 10.0 <= b and b - a <= 1e-4 for a, b in sw.changes)
    sw.write_csv(tmp_path / "sweep.csv")
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "z,value,entry" and any(",inf,-1" in ln for ln in lines)


def test_uniform_edges():
    assert np.allclose(uniform_edges(0.0, 8.0, 4), [0, 2, 4, 6, 8])


def _integer_vf(A, c, b, bits=3):
    """Pure integer program ``min c.x, A x = b, x in {0..7}^n`` through binary expansion."""
    n = A.shape[1]
    w = 2.0 ** np.arange(bits)
    Ab = np.kron(A, w)
    cb = np.kron(c, w)
    res = solve_mip(cb, Ab, b, np.column_stack([np.zeros(n * bits), np.ones(n * bits)]), np.ones(n * bits, bool))
    return res.objective if res.optimal else np.inf


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_value_function_subadditive(seed):
    rng = np.random.default_rng(seed)
    A = rng.integers(1, 4, size=(1, 3)).astype(float)
    c = rng.uniform(1, 5, 3)
    for z1, z2 in itertools.product(range(0, 4), repeat=2):
        lhs = _integer_vf(A, c, np.array([z1 + z2], float))
        rhs = _integer_vf(A, c, np.array([z1], float)) + _integer_vf(A, c, np.array([z2], float))
        assert lhs <= rhs + 1e-9
