import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from conftest import corpus_instance, one_unit_system
from vfcoord.coordinator import (CoordinationInfeasible, PrivacyError, relative_gap, solve_centralized,
                                 solve_coordinated, solve_islanded, verify_against_centralized, write_schedule_csv)
from vfcoord.harness import complete_sets, enumerate_commitments
from vfcoord.milp_core import SolverConfig
from vfcoord.model import area_domain, area_milp
from vfcoord.value_function import UcSolutionSet

HIGHS = SolverConfig(lp_backend="highs", max_binaries=5000, max_rows=100000)


def _sets_and_milps(system):
    return complete_sets(system), {a.id: area_milp(system, a.id) for a in system.areas}


def test_two_copies_of_one_unit():
    system = one_unit_system(demands=(20.0, 20.0))
    sets, milps = _sets_and_milps(system)
    res = solve_coordinated(sets, milps, system)
    # the importer switches its unit off: 5 + 2 * 40 beats two units at 45 each
    assert res.joint_cost == pytest.approx(85.0)
    assert abs(res.schedule["T", 1]) == pytest.approx(20.0)
    assert solve_centralized(system).objective == pytest.approx(85.0)
    assert res.consensus_residual <= 1e-8
    assert res.joint_cost == pytest.approx(sum(res.costs.values()), abs=1e-6)
    assert res.meta["cross_check"] <= 1e-6


def test_single_area_coalition_equals_islanded():
    system, _ = corpus_instance(1)
    sets, milps = _sets_and_milps(system)
    islanded = solve_islanded(system)
    for a in system.areas:
        res = solve_coordinated(sets, milps, system, areas=[a.id])
        assert res.joint_cost == pytest.approx(islanded[a.id], rel=1e-9)
        assert all(f == 0.0 for f in res.schedule.values())


def _combination_lp(system, sets, milps, choice):
    """Joint dispatch LP for one fixed entry per area, built directly on scipy's HiGHS."""
    flows = [(tl, t) for tl in system.tielines for t in range(system.periods)]
    cols = len(flows) + sum(milps[a].n for a in choice)
    A_rows, b_rows, c = [], [], np.zeros(cols)
    off = len(flows)
    for a, i in choice.items():
        milp, e = milps[a], sets[a].entries[i]
        S = milp.param_matrix()
        block = np.zeros((milp.r, cols))
        block[:, off:off + milp.n] = milp.A_C
        for k, (tie, period) in enumerate(milp.param_keys):
            j = next(q for q, (tl, t) in enumerate(flows) if tl.id == tie and t + 1 == period)
            block[:, j] -= S[:, k] * flows[j][0].export_sign(a)
        A_rows.append(block)
        b_rows.append(e.beta)
        c[off:off + milp.n] = milp.c_C
        off += milp.n
    bounds = [(tl.z_min[t], tl.z_max[t]) for tl, t in flows] + [(0, None)] * (cols - len(flows))
    res = linprog(c, A_eq=np.vstack(A_rows), b_eq=np.concatenate(b_rows), bounds=bounds, method="highs")
    if res.status != 0:
        return np.inf
    return res.fun + sum(sets[a].entries[i].alpha for a, i in choice.items())


def test_min_max_form_equals_coordinator_milp():
    system, _ = corpus_instance(3)
    sets, milps = _sets_and_milps(system)
    res = solve_coordinated(sets, milps, system)
    ids = [a.id for a in system.areas]
    best = min(_combination_lp(system, sets, milps, dict(zip(ids, combo)))
               for combo in itertools.product(*[range(len(sets[a])) for a in ids]))
    assert res.joint_cost == pytest.approx(best, rel=1e-9)


def test_privacy_modes():
    system = one_unit_system(demands=(20.0, 20.0))
    sets, milps = _sets_and_milps(system)
    with pytest.raises(PrivacyError):
        solve_coordinated(sets, milps, system, strict=True)
    public = {a: s.public_view() for a, s in sets.items()}
    res = solve_coordinated(public, milps, system, strict=True, check=False)
    assert res.joint_cost == pytest.approx(85.0)


def test_infeasible_coordination_names_the_tie():
    system = one_unit_system(demands=(0.0, 80.0), box=(-20.0, 20.0))
    sets, milps = _sets_and_milps(system)
    for a in ("A", "B"):
        keys, lo, hi = area_domain(system, a)
        sets[a] = UcSolutionSet(a, keys, lo, hi)
        for x in (np.zeros(1), np.ones(1)):
            sets[a].add(milps[a], x)
    with pytest.raises(CoordinationInfeasible) as err:
        solve_coordinated(sets, milps, system)
    assert "tie T" in str(err.value) and "upper bound" in str(err.value)


def test_truncation_gaps_and_verification(tmp_path):
    system, expected = corpus_instance(2)
    sets, milps = _sets_and_milps(system)
    cen = solve_centralized(system)
    assert cen.objective == pytest.approx(expected["centralized"], rel=1e-9)
    full = solve_coordinated(sets, milps, system)
    check = verify_against_centralized(full, system, centralized=cen)
    assert abs(check["gap"]) <= 1e-6 and check["flag"] is None
    one = solve_coordinated({a: s.truncated(1) for a, s in sets.items()}, milps, system, check=False)
    assert verify_against_centralized(one, system, centralized=cen)["gap"] >= -1e-9
    write_schedule_csv(full, tmp_path / "schedule.csv")
    head = (tmp_path / "schedule.csv").read_text().splitlines()[0]
    assert head == "tie," + ",".join(f"t{p}" for p in range(1, system.periods + 1))
    assert set(full.to_dict()) >= {"selection", "costs", "joint_cost", "schedule", "consensus_residual"}


def test_relative_gap():
    assert relative_gap(110.0, 100.0) == pytest.approx(0.1)
    assert relative_gap(0.5, 0.0) == pytest.approx(0.5)
    assert relative_gap(np.inf, 10.0) == np.inf


@pytest.mark.slow
def test_bundled_complete_sets_equal_centralized(bundled, bundled_milps):
    sets = {}
    for a in bundled.areas:
        keys, lo, hi = area_domain(bundled, a.id)
        s = UcSolutionSet(a.id, keys, lo, hi)
        for x in enumerate_commitments(bundled_milps[a.id], lo, hi):
            s.add(bundled_milps[a.id], x)
        sets[a.id] = s
    cen = solve_centralized(bundled, HIGHS)
    res = solve_coordinated(sets, bundled_milps, bundled, config=HIGHS)
    assert res.joint_cost == pytest.approx(cen.objective, rel=1e-6)
    assert sum(solve_islanded(bundled, HIGHS).values()) >= res.joint_cost - 1e-6
