import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import one_unit_system
from vfcoord.coordinator import solve_centralized, solve_coordinated
from vfcoord.game import (CoalitionWorthTable, GameError, allocate, characteristic_values, core_check,
                          lmp_payments, mask_of, members, payments, shapley, shapley_permutation_oracle)
from vfcoord.harness import complete_sets
from vfcoord.model import area_milp


def _game(system):
    sets = complete_sets(system)
    milps = {a.id: area_milp(system, a.id) for a in system.areas}
    return sets, milps, characteristic_values(sets, milps, system)


def test_masks():
    players = ["a", "b", "c"]
    assert mask_of(["a", "c"], players) == 0b101
    assert members(0b110, players) == ["b", "c"]
    with pytest.raises(GameError):
        mask_of(["z"], players)
    with pytest.raises(GameError):
        CoalitionWorthTable(["a", "a"])


def test_table_round_trip_and_errors():
    t = CoalitionWorthTable(["x", "y"], {1: -1.0, 2: -2.0})
    assert t.missing() == [3]
    with pytest.raises(GameError):
        shapley(t)
    t.worths[3] = -2.5
    back = CoalitionWorthTable.from_dict(json.loads(json.dumps(t.to_dict())), scale=1.0)
    assert back.worths == t.worths
    assert CoalitionWorthTable.from_dict(t.to_dict(), scale=1e3).v(3) == pytest.approx(-2500.0)
    t.worths[3] = -np.inf
    with pytest.raises(GameError):
        shapley(t)


def test_superadditivity_detection():
    t = CoalitionWorthTable(["x", "y"], {1: -1.0, 2: -1.0, 3: -3.0})
    assert t.superadditivity_violations() == [(1, 2)]
    t.worths[3] = -1.5
    assert t.superadditivity_violations() == []


def _supermodular(rng, n):
    w = np.triu(rng.uniform(0, 5, (n, n)), 1)
    a = rng.normal(0, 10, n)
    worths = {}
    for m in range(1, 1 << n):
        idx = [i for i in range(n) if m >> i & 1]
        worths[m] = float(a[idx].sum() + w[np.ix_(idx, idx)].sum())
    return CoalitionWorthTable(list(range(n)), worths)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), n=st.integers(2, 6))
def test_shapley_in_core_of_convex_games(seed, n):
    t = _supermodular(np.random.default_rng(seed), n)
    phi = shapley(t)
    assert core_check(t, phi) == []
    assert np.allclose(phi, shapley_permutation_oracle(t), atol=1e-9)


def test_core_check_reports_blocking_coalition():
    t = CoalitionWorthTable(["x", "y"], {1: 0.0, 2: 0.0, 3: 10.0})
    assert core_check(t, [10.0, 0.0]) == []
    assert core_check(t, [11.0, -1.0]) == [["y"]]


def test_payments_balance_with_grand_coalition_costs():
    phi = np.array([-30.0, -50.0])
    costs = np.array([60.0, 20.0])
    psi = payments(phi, costs)
    assert psi.sum() == pytest.approx(0.0)
    with pytest.raises(GameError):
        payments(phi, costs[:1])


def test_one_unit_pair_game(tmp_path):
    system = one_unit_system(demands=(20.0, 20.0))
    sets, milps, table = _game(system)
    assert table.v(0b01) == pytest.approx(-45.0) and table.v(0b10) == pytest.approx(-45.0)
    assert table.v(0b11) == pytest.approx(-85.0)
    grand = solve_coordinated(sets, milps, system)
    rep = allocate(table, [grand.costs[p] for p in table.players])
    assert np.allclose(rep.payoff, [-42.5, -42.5])
    assert rep.payment.sum() == pytest.approx(0.0, abs=1e-9)
    assert rep.core_violations == [] and rep.superadditivity_violations == []
    rep.save(tmp_path / "a.json")
    data = json.loads((tmp_path / "a.json").read_text())
    assert data["core"]["stable"] and len(data["areas"]) == 2


def test_infeasible_coalition_is_flagged():
    system = one_unit_system(demands=(0.0, 80.0))
    _, _, table = _game(system)
    assert table.v(0b10) == -np.inf and 0b10 in table.flags
    assert np.isfinite(table.v(0b11))
    with pytest.raises(GameError):
        shapley(table)


def test_lmp_zero_when_no_exchange():
    system = one_unit_system(demands=(20.0, 20.0), box=(0.0, 0.0))
    res = lmp_payments(system, solve_centralized(system))
    assert all(v == 0.0 for v in res.payments.values())


def test_lmp_importer_pays_marginal_price():
    system = one_unit_system(demands=(20.0, 20.0), periods=2)
    cen = solve_centralized(system)
    res = lmp_payments(system, cen)
    flow = cen.schedule["T", 1]
    importer = "B" if flow > 0 else "A"
    exporter = "A" if importer == "B" else "B"
    assert res.payments[importer] == pytest.approx(2.0 * abs(flow) * 2)
    assert res.payments[exporter] == pytest.approx(-res.payments[importer])
    assert "importer" in res.convention
