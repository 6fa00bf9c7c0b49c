import copy

import numpy as np
import pytest

from conftest import one_unit_system
from vfcoord.milp_core import Status, solve_lp, solve_lp_fixed_binaries, solve_milp
from vfcoord.model import (ModelError, area_domain, area_milp, build_centralized_milp, bundled_path, load_system,
                           save_system, system_from_dict, system_to_dict, validate_instance)


def _errors(system):
    return [d for d in validate_instance(system) if d.level == "error"]


def test_bundled_instance_is_clean(bundled):
    assert validate_instance(bundled) == []
    assert [a.id for a in bundled.areas] == ["1", "2"] and bundled.periods == 3


def test_validation_catches_structural_errors(bundled):
    data = system_to_dict(bundled)
    bad = copy.deepcopy(data)
    bad["tielines"][0]["z_min"] = [60.0] * 3
    assert any("z_min > z_max" in d.message for d in _errors(system_from_dict(bad)))
    bad = copy.deepcopy(data)
    bad["tielines"][0]["to"]["bus"] = "nowhere"
    assert any("dangling" in d.message for d in _errors(system_from_dict(bad)))
    bad = copy.deepcopy(data)
    bad["areas"][0]["units"][0]["p_min"] = 500.0
    assert any("p_min" in d.message for d in _errors(system_from_dict(bad)))
    bad = copy.deepcopy(data)
    bad["areas"][0]["lines"] = bad["areas"][0]["lines"][:1]
    assert any("not connected" in d.message for d in _errors(system_from_dict(bad)))


def test_capacity_warning():
    system = one_unit_system(demands=(80.0, 0.0), box=(-10.0, 10.0))
    diags = validate_instance(system)
    assert any(d.level == "warning" and "exceeds capacity" in d.message and "area A" in d.entity for d in diags)


def test_build_rejects_errors(bundled):
    data = system_to_dict(bundled)
    data["areas"][0]["units"][0]["bus"] = "ghost"
    with pytest.raises(ModelError):
        area_milp(system_from_dict(data), "1")


def test_round_trip_gives_identical_milp(bundled, tmp_path):
    save_system(bundled, tmp_path / "s.json")
    again = load_system(tmp_path / "s.json")
    for aid in ("1", "2"):
        m1, m2 = area_milp(bundled, aid), area_milp(again, aid)
        for f in ("c_I", "c_C", "A_I", "A_C", "base_rhs"):
            assert np.array_equal(getattr(m1, f), getattr(m2, f))
        assert m1.params == m2.params


def test_parameterized_rows_only_touch_their_entry(bundled_milps):
    milp = bundled_milps["1"]
    base = milp.rhs(np.zeros(len(milp.params)))
    for k, p in enumerate(milp.params):
        z = np.zeros(len(milp.params))
        z[k] = 7.5
        diff = milp.rhs(z) - base
        assert diff[p.row] == pytest.approx(7.5 * p.sign)
        assert np.count_nonzero(diff) == 1
    assert np.array_equal(milp.zbar, base)
    assert np.array_equal(milp.rhs(np.ones(len(milp.params))) - base, milp.param_matrix() @ np.ones(len(milp.params)))


def test_export_sign_convention(bundled):
    tl = bundled.tielines[0]
    assert tl.export_sign(tl.from_end.area) == 1.0 and tl.export_sign(tl.to_end.area) == -1.0
    lo, hi = tl.export_bounds(tl.to_end.area, 0)
    assert (lo, hi) == (-tl.z_max[0], -tl.z_min[0])
    keys, lo, hi = area_domain(bundled, "1")
    assert keys == [(tl.id, 1), (tl.id, 2), (tl.id, 3)]


@pytest.mark.parametrize("demand,export", [(15.0, 0.0), (0.0, 30.0), (25.0, 12.0), (5.0, 0.0)])
def test_fixed_commitment_matches_hand_written_dispatch(demand, export):
    system = one_unit_system(demands=(demand, 0.0), box=(0.0, 50.0))
    milp = area_milp(system, "A")
    sol = solve_lp_fixed_binaries(milp, np.ones(milp.m), milp.rhs([export]))
    # hand-written: min 2 p s.t. p = demand + export, 10 <= p <= 50, plus no-load 5
    hand = solve_lp([[1.0]], [demand + export], [2.0], bounds=[[10.0, 50.0]])
    assert sol.status is hand.status
    if hand.optimal:
        assert sol.objective == pytest.approx(hand.objective + 5.0)


def test_ramp_and_min_up_rows():
    def system(**unit):
        u = {"id": "g", "bus": "b", "p_min": 10, "p_max": 100, "ramp_up": 100, "ramp_down": 100,
             "no_load_cost": 1, "marginal_cost": 1, **unit}
        return system_from_dict({"periods": 3, "areas": [{"id": "A", "buses": [{"id": "b", "demand": [10, 60, 0]}],
                                                         "units": [u]}], "tielines": []})

    assert solve_milp(area_milp(system(ramp_up=20), "A"), area_milp(system(ramp_up=20), "A").rhs()).status \
        is Status.INFEASIBLE
    ok = area_milp(system(ramp_up=50), "A")
    assert solve_milp(ok, ok.rhs()).optimal
    # min_up 3 keeps the unit on in period 3, where p_min exceeds the zero demand
    md = area_milp(system(min_up=3), "A")
    assert solve_milp(md, md.rhs()).status is Status.INFEASIBLE


def test_centralized_model_has_one_flow_per_tie_period(bundled):
    model = build_centralized_milp(bundled)
    assert set(model.export_columns) == {("T1", t) for t in range(3)}
    assert model.milp.m == sum(area_milp(bundled, a.id).m for a in bundled.areas)


def test_bundled_path_exists():
    assert bundled_path().exists()
