"""Independent oracles and random instance generation.

The oracles avoid branch-and-bound entirely: they enumerate every status
vector (startups implied at their minimum), solve the fixed-commitment LP
with HiGHS and keep the best.
"""

import itertools
import json
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .milp_core import StandardMilp, Status
from .milp_core.bnb import _highs_lp
from .model import (AreaSystem, Bus, Endpoint, Line, MultiAreaSystem, TieLine, Unit, area_milp, save_system,
                    validate_instance)
from .parallel import pmap

MAX_ENUM = 15
INFEASIBLE = float("inf")


class EnumerationCapError(ValueError):
    pass


def status_vectors(milp: StandardMilp):
    """All binary vectors reachable by enumerating statuses with implied startups."""
    k = len(milp.commitment) if milp.commitment else milp.m
    if k > MAX_ENUM:
        raise EnumerationCapError(f"{k} status binaries exceed the enumeration cap of {MAX_ENUM}")
    for bits in itertools.product((0.0, 1.0), repeat=k):
        if milp.commitment:
            yield milp.implied_binaries(np.array(bits))
        else:
            yield np.array(bits)


def fixed_lp_value(milp: StandardMilp, x, rhs) -> float:
    bounds = np.column_stack([np.zeros(milp.n), np.full(milp.n, np.inf)])
    sol = _highs_lp(milp.A_C, np.asarray(rhs, dtype=float) - milp.A_I @ x, milp.c_C, bounds)
    if sol.status is Status.OPTIMAL:
        return sol.objective + float(milp.c_I @ x)
    if sol.status is Status.INFEASIBLE:
        return INFEASIBLE
    raise RuntimeError(f"oracle LP ended with {sol.status.value}")


def enumerate_milp(milp: StandardMilp, rhs):
    """``(objective, x)`` minimizing the fixed-commitment LP over all status vectors."""
    best, arg = INFEASIBLE, None
    for x in status_vectors(milp):
        v = fixed_lp_value(milp, x, rhs)
        if v < best:
            best, arg = v, x
    return best, arg


@dataclass
class BruteForceVf:
    grid: np.ndarray  # (points, params)
    values: np.ndarray  # inf where infeasible
    argmin: np.ndarray  # index into ``supporting`` or -1
    supporting: list  # binary vectors achieving the minimum somewhere on the grid


def _as_grid(milp, grid):
    g = np.asarray(grid, dtype=float)
    if g.ndim == 1:
        g = g[:, None] if len(milp.params) == 1 else g[None, :]
    if g.shape[1] != len(milp.params):
        raise ValueError(f"grid points need {len(milp.params)} components")
    return g


def brute_force_vf(milp: StandardMilp, grid) -> BruteForceVf:
    """Exact value function on ``grid`` by enumeration, plus its supporting commitments."""
    g = _as_grid(milp, grid)
    # vectors infeasible for every export in the grid's bounding box are skipped
    vectors = enumerate_commitments(milp, g.min(axis=0), g.max(axis=0))
    rhs = [milp.rhs(z) for z in g]
    table = np.array(pmap(lambda x: [fixed_lp_value(milp, x, r) for r in rhs], vectors))
    values = table.min(axis=0)
    supporting, index, arg = [], {}, np.full(len(g), -1)
    for p in range(len(g)):
        if not np.isfinite(values[p]):
            continue
        j = int(np.argmin(table[:, p]))
        if j not in index:
            index[j] = len(supporting)
            supporting.append(vectors[j])
        arg[p] = index[j]
    return BruteForceVf(g, values, arg, supporting)


def enumerate_commitments(milp: StandardMilp, lo, hi) -> list:
    """Every enumerated binary vector that is feasible for some export in the box.

    This superset of all optimal commitments is a complete supporting set.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    S = milp.param_matrix()
    A = np.hstack([milp.A_C, -S])
    c = np.zeros(A.shape[1])
    bounds = np.vstack([np.column_stack([np.zeros(milp.n), np.full(milp.n, np.inf)]), np.column_stack([lo, hi])])

    def feasible(x):
        return _highs_lp(A, milp.zbar - milp.A_I @ x, c, bounds).status is Status.OPTIMAL

    vectors = list(status_vectors(milp))
    return [x for x, ok in zip(vectors, pmap(feasible, vectors)) if ok]


def textbook_simplex(A, b, c, max_iter=10000):
    """Dense two-phase tableau simplex with Bland's rule for ``min c.x, A x = b, x >= 0``.

    Returns ``(status, x, objective)`` with status "optimal", "infeasible" or
    "unbounded". Written independently of the package LP engine.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    neg = b < 0
    A[neg] *= -1
    b[neg] *= -1
    # phase 1 tableau over [x, artificials | rhs]
    T = np.hstack([A, np.eye(m), b[:, None]])
    basis = list(range(n, n + m))

    def pivot(r, j):
        T[r] /= T[r, j]
        for i in range(m):
            if i != r and T[i, j] != 0.0:
                T[i] -= T[i, j] * T[r]
        basis[r] = j

    def run(cost, allowed):
        for _ in range(max_iter):
            cb = cost[basis]
            red = cost[:-1] - cb @ T[:, :-1]
            enter = next((j for j in allowed if red[j] < -1e-9), None)
            if enter is None:
                return "optimal"
            col = T[:, enter]
            ratios = [(T[i, -1] / col[i], basis[i], i) for i in range(m) if col[i] > 1e-9]
            if not ratios:
                return "unbounded"
            pivot(min(ratios)[2], enter)
        raise RuntimeError("textbook simplex hit its iteration limit")

    phase1 = np.concatenate([np.zeros(n), np.ones(m), [0.0]])
    run(phase1, range(n + m))
    if T[:, -1] @ phase1[basis] > 1e-7 * (1.0 + np.abs(b).max(initial=0.0)):
        return "infeasible", None, INFEASIBLE
    # drive zero-level artificials out of the basis where possible
    for r in range(m):
        if basis[r] >= n:
            j = next((j for j in range(n) if abs(T[r, j]) > 1e-9), None)
            if j is not None:
                pivot(r, j)
    keep = [r for r in range(m) if basis[r] < n]
    T = T[keep]
    basis = [basis[r] for r in keep]
    m = len(keep)
    T = np.hstack([T[:, :n], T[:, -1:]])
    status = run(np.concatenate([c, [0.0]]), range(n))
    if status != "optimal":
        return status, None, -np.inf
    x = np.zeros(n)
    x[basis] = T[:, -1]
    return "optimal", x, float(c @ x)


# ------------------------------------------------------------ generation

@dataclass
class GeneratorConfig:
    seed: int = 1
    areas: int = 2
    units: int = 2
    buses: int = 2
    periods: int = 2
    tielines: int = 1
    load_factor: float = 0.6
    marginal_cost: tuple = (10.0, 40.0)
    no_load_cost: tuple = (20.0, 120.0)
    startup_cost: tuple = (0.0, 200.0)
    tie_fraction: tuple = (0.2, 0.6)
    max_tries: int = 50

    def __post_init__(self):
        if self.areas < 1 or self.units < 1 or self.buses < 1 or self.periods < 1:
            raise ValueError("areas, units, buses and periods must be positive")
        if self.areas == 1 and self.tielines:
            self.tielines = 0
        if not 0.0 <= self.load_factor <= 1.0:
            raise ValueError("load_factor must lie in [0, 1]")


def _uniform(rng, bounds):
    lo, hi = bounds
    return float(np.round(rng.uniform(lo, hi), 2))


def _draw_area(rng, cfg, aid):
    buses = [f"{aid}{b + 1}" for b in range(cfg.buses)]
    units = []
    for g in range(cfg.units):
        p_max = float(np.round(rng.uniform(30, 100)))
        p_min = float(np.round(p_max * rng.uniform(0.2, 0.5)))
        ramp = float(np.round(rng.uniform(0.5, 1.0) * p_max))
        units.append(Unit(f"{aid}g{g + 1}", buses[int(rng.integers(cfg.buses))], p_min, p_max,
                          max(ramp, p_min), max(ramp, p_min), int(rng.integers(1, 3)), int(rng.integers(1, 3)),
                          _uniform(rng, cfg.startup_cost), _uniform(rng, cfg.no_load_cost),
                          _uniform(rng, cfg.marginal_cost), bool(rng.integers(2)), 0))
    cap = sum(u.p_max for u in units)
    profile = rng.uniform(0.6, 1.0, cfg.periods)
    weights = rng.dirichlet(np.ones(cfg.buses))
    peak = cfg.load_factor * cap
    bus_objs = [Bus(b, [float(np.round(peak * profile[t] * weights[k], 2)) for t in range(cfg.periods)])
                for k, b in enumerate(buses)]
    lines = []
    for k in range(1, cfg.buses):
        j = int(rng.integers(k))
        lines.append(Line(f"{aid}l{k}", buses[j], buses[k], float(np.round(rng.uniform(5, 20), 2)),
                          float(np.round(rng.uniform(0.6, 1.5) * cap))))
    return AreaSystem(aid, bus_objs, units, lines, buses[0]), cap


def generate_system(cfg: GeneratorConfig) -> MultiAreaSystem:
    """Random multi-area system, deterministic in ``cfg.seed`` and islanded-feasible.

    Draws come from a PCG64 generator seeded with ``cfg.seed``; a draw whose
    islanded problem is infeasible is discarded and the stream continues.
    """
    from .coordinator import solve_islanded

    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    for _ in range(cfg.max_tries):
        drawn = [_draw_area(rng, cfg, chr(ord("A") + k)) for k in range(cfg.areas)]
        areas = [a for a, _ in drawn]
        ties = []
        for k in range(cfg.tielines):
            i = k % cfg.areas
            j = (i + 1 + int(rng.integers(cfg.areas - 1))) % cfg.areas if k >= cfg.areas - 1 else i + 1
            if i == j:
                continue
            a, b = areas[i], areas[j]
            fa, fb = a.buses[int(rng.integers(len(a.buses)))].id, b.buses[int(rng.integers(len(b.buses)))].id
            cap = float(np.round(rng.uniform(*cfg.tie_fraction) * min(drawn[i][1], drawn[j][1])))
            ties.append(TieLine(f"T{k + 1}", Endpoint(a.id, fa), Endpoint(b.id, fb),
                                [-cap] * cfg.periods, [cap] * cfg.periods))
        for a in areas:
            a.boundary_buses = sorted({t.endpoint(a.id).bus for t in ties if a.id in (t.from_end.area,
                                                                                      t.to_end.area)})
        system = MultiAreaSystem(cfg.periods, areas, ties)
        if any(d.level == "error" for d in validate_instance(system)):
            continue
        if all(np.isfinite(v) for v in solve_islanded(system).values()):
            return system
    raise RuntimeError(f"no islanded-feasible draw within {cfg.max_tries} tries for seed {cfg.seed}")


def complete_sets(system: MultiAreaSystem) -> dict:
    """Per-area sets holding every commitment feasible somewhere in the export box.

    The first entry is the optimal commitment at zero export, so truncating
    to one entry still schedules the islanded solution.
    """
    from .milp_core import solve_milp
    from .model import area_domain
    from .value_function import UcSolutionSet

    sets = {}
    for a in system.areas:
        milp = area_milp(system, a.id)
        keys, lo, hi = area_domain(system, a.id)
        s = UcSolutionSet(a.id, keys, lo, hi)
        first = solve_milp(milp, milp.rhs(np.clip(np.zeros(len(keys)), lo, hi)))
        if first.x is not None:
            s.add(milp, first.x)
        for x in enumerate_commitments(milp, lo, hi):
            s.add(milp, x)
        sets[a.id] = s
    return sets


def expected_results(system: MultiAreaSystem) -> dict:
    """Centralized, islanded and complete-set coordinated costs for regression files."""
    from .coordinator import solve_centralized, solve_coordinated, solve_islanded

    milps = {a.id: area_milp(system, a.id) for a in system.areas}
    cen = solve_centralized(system)
    coord = solve_coordinated(complete_sets(system), milps, system)
    return {"centralized": cen.objective, "islanded": solve_islanded(system),
            "coordinated_complete": coord.joint_cost}


def write_corpus(root, seeds, cfg: GeneratorConfig, expected: bool = False) -> list[Path]:
    """``root/<seed>/system.json`` for each seed, plus the generator settings used."""
    out = []
    for seed in seeds:
        c = GeneratorConfig(**{**asdict(cfg), "seed": int(seed)})
        d = Path(root) / str(seed)
        d.mkdir(parents=True, exist_ok=True)
        system = generate_system(c)
        save_system(system, d / "system.json")
        with open(d / "generator.json", "w") as fh:
            json.dump(asdict(c), fh, indent=1)
        if expected:
            with open(d / "expected.json", "w") as fh:
                json.dump(expected_results(system), fh, indent=1)
        out.append(d / "system.json")
    return out


def single_area_milp(system: MultiAreaSystem, area_id: str | None = None) -> StandardMilp:
    return area_milp(system, area_id or system.areas[0].id)


# ------------------------------------------------------------ 1-D curve oracles

def _line_lp(milp, x, component, base):
    """Pieces for the LP ``min c_C y`` along one export with the others at ``base``."""
    S = milp.param_matrix()
    fixed = milp.zbar - milp.A_I @ x + S @ np.where(np.arange(len(base)) == component, 0.0, base)
    return S[:, component], fixed


def entry_range(milp: StandardMilp, x, component: int, lo: float, hi: float, base) -> tuple[float, float] | None:
    """Smallest and largest export in ``[lo, hi]`` where commitment ``x`` is feasible (None if never)."""
    col, fixed = _line_lp(milp, np.asarray(x, dtype=float), component, np.asarray(base, dtype=float))
    A = np.hstack([milp.A_C, -col[:, None]])
    bounds = np.vstack([np.column_stack([np.zeros(milp.n), np.full(milp.n, np.inf)]), [[lo, hi]]])
    out = []
    for sgn in (1.0, -1.0):
        c = np.zeros(milp.n + 1)
        c[-1] = sgn
        sol = _highs_lp(A, fixed, c, bounds)
        if sol.status is not Status.OPTIMAL:
            return None
        out.append(float(sol.x[-1]))
    return out[0], out[1]


def curve_breakpoints(milp: StandardMilp, x, component: int, lo: float, hi: float, base, tol=1e-7) -> list[float]:
    """Breakpoints of the convex LP value of ``x`` along one export, by tangent-line intersection.

    Works on the feasible range of ``x`` only. Slopes come from HiGHS duals.
    """
    x = np.asarray(x, dtype=float)
    rng = entry_range(milp, x, component, lo, hi, base)
    if rng is None or rng[1] - rng[0] <= tol:
        return []
    col, fixed = _line_lp(milp, x, component, np.asarray(base, dtype=float))
    bounds = np.column_stack([np.zeros(milp.n), np.full(milp.n, np.inf)])
    cache = {}

    def f(t):
        if t not in cache:
            sol = _highs_lp(milp.A_C, fixed + col * t, milp.c_C, bounds)
            cache[t] = (sol.objective, float(col @ sol.duals))
        return cache[t]

    def split(a, b, depth):
        (fa, ga), (fb, gb) = f(a), f(b)
        if depth > 60 or abs(ga - gb) <= tol * (1 + abs(ga)) or b - a <= tol:
            return []
        t = (fb - fa + ga * a - gb * b) / (ga - gb)
        # tangents meeting at an end: the curve is linear up to that end, which is the kink
        if t <= a + tol:
            return [a]
        if t >= b - tol:
            return [b]
        if f(t)[0] <= fa + ga * (t - a) + tol * (1 + abs(fa)):
            return [t]
        return split(a, t, depth + 1) + split(t, b, depth + 1)

    out = []
    for t in sorted(split(rng[0], rng[1], 0)):
        if rng[0] + tol < t < rng[1] - tol and (not out or t - out[-1] > tol):
            out.append(t)
    return out
