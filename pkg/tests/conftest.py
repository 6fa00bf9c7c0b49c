import json
from pathlib import Path

import numpy as np
import pytest

from vfcoord.model import area_milp, bundled_path, load_system

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
_RESULTS = []


def corpus_seeds():
    return sorted(int(p.name) for p in CORPUS.iterdir() if (p / "system.json").exists())


def corpus_instance(seed):
    d = CORPUS / str(seed)
    with open(d / "expected.json") as fh:
        return load_system(d / "system.json"), json.load(fh)


def record(label, ok, detail=""):
    """One pass/fail line per acceptance criterion, echoed at the end of the run."""
    line = f"{label}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
    print(line)
    _RESULTS.append(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def bundled():
    return load_system(bundled_path())


@pytest.fixture(scope="session")
def bundled_milps(bundled):
    return {a.id: area_milp(bundled, a.id) for a in bundled.areas}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def one_unit_system(demands=(0.0, 0.0), box=(-50.0, 50.0), periods=1):
    """Two single-bus areas, each with one 10-50 MW unit (no-load 5 $, 2 $/MWh), joined by one tie."""
    from vfcoord.model import system_from_dict

    def area(aid, demand):
        return {"id": aid, "buses": [{"id": "b", "demand": demand}],
                "units": [{"id": "g", "bus": "b", "p_min": 10, "p_max": 50, "ramp_up": 100, "ramp_down": 100,
                           "no_load_cost": 5, "marginal_cost": 2}]}

    return system_from_dict({
        "periods": periods,
        "areas": [area("A", demands[0]), area("B", demands[1])],
        "tielines": [{"id": "T", "from": {"area": "A", "bus": "b"}, "to": {"area": "B", "bus": "b"},
                      "z_min": box[0], "z_max": box[1]}],
    })


@pytest.fixture
def one_unit():
    """Area A of the one-unit pair with demand 0 and export box [0, 50]."""
    system = one_unit_system(box=(0.0, 50.0))
    return system, area_milp(system, "A")
