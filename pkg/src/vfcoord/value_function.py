"""Value functions of an area's SCUC over its tie-line exports.

A value function is described by a set of commitment vectors. Each vector
``x`` contributes the LP value function ``alpha + min{c_C.y : A_C y = beta + S z,
y >= 0}`` with ``alpha = c_I.x`` and ``beta = zbar - A_I x``; the approximation
is the pointwise minimum over the set. :func:`construct_vf` grows the set by
repeatedly solving a separation MILP that looks for the export vector where
the approximation exceeds the true optimum the most.
"""

import json
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .milp_core import (EQ, GE, LE, DEFAULT_CONFIG, MilpBuilder, SolverConfig, StandardMilp, Status,
                        solve_lp, solve_milp, solve_mip)

log = logging.getLogger(__name__)

INFEASIBLE = float("inf")


class DomainError(ValueError):
    pass


class ConstructionError(RuntimeError):
    pass


@dataclass
class UcEntry:
    x: np.ndarray | None
    alpha: float
    beta: np.ndarray


@dataclass
class UcSolutionSet:
    area: str
    keys: list[tuple[str, int]]
    lo: np.ndarray
    hi: np.ndarray
    entries: list[UcEntry] = field(default_factory=list)
    log: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def contains(self, x) -> bool:
        x = np.asarray(x)
        return any(e.x is not None and np.array_equal(e.x, x) for e in self.entries)

    def add(self, milp: StandardMilp, x) -> bool:
        """Append ``x`` with its privacy encoding; returns False for duplicates."""
        x = np.round(np.asarray(x, dtype=float))
        if self.contains(x):
            return False
        self.entries.append(UcEntry(x, float(milp.c_I @ x), milp.zbar - milp.A_I @ x))
        return True

    def truncated(self, k: int) -> "UcSolutionSet":
        return replace(self, entries=list(self.entries[:k]), log=dict(self.log))

    def public_view(self) -> "UcSolutionSet":
        """Copy carrying only ``(alpha, beta)``, no commitment vectors."""
        return replace(self, entries=[UcEntry(None, e.alpha, e.beta.copy()) for e in self.entries])

    def check(self, milp: StandardMilp, tol=1e-9) -> None:
        seen = set()
        for i, e in enumerate(self.entries):
            if e.x is None:
                continue
            key = tuple(e.x.astype(int))
            if key in seen:
                raise ValueError(f"duplicate commitment vector at entry {i}")
            seen.add(key)
            if abs(e.alpha - milp.c_I @ e.x) > tol or np.max(np.abs(e.beta - (milp.zbar - milp.A_I @ e.x)),
                                                           initial=0.0) > tol:
                raise ValueError(f"entry {i}: alpha/beta do not match its commitment vector")

    def to_dict(self) -> dict:
        return {
            "area": self.area,
            "domain": {"keys": [[t, p] for t, p in self.keys], "lo": self.lo.tolist(), "hi": self.hi.tolist()},
            "entries": [{**({"x": e.x.astype(int).tolist()} if e.x is not None else {}),
                         "alpha": e.alpha, "beta": e.beta.tolist()} for e in self.entries],
            "log": self.log,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "UcSolutionSet":
        dom = d["domain"]
        entries = [UcEntry(np.array(e["x"], dtype=float) if "x" in e else None, float(e["alpha"]),
                           np.array(e["beta"], dtype=float)) for e in d["entries"]]
        return cls(d["area"], [(str(t), int(p)) for t, p in dom["keys"]], np.array(dom["lo"], dtype=float),
                   np.array(dom["hi"], dtype=float), entries, d.get("log", {}))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "UcSolutionSet":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class VfEvaluation:
    value: float
    index: int = -1
    dual: np.ndarray | None = None

    @property
    def feasible(self) -> bool:
        return np.isfinite(self.value)


def entry_lp(milp: StandardMilp, entry: UcEntry, z, config: SolverConfig = DEFAULT_CONFIG):
    """Fixed-commitment LP of one entry at exports ``z``; objective includes alpha."""
    rhs = entry.beta + milp.param_matrix() @ np.asarray(z, dtype=float)
    sol = solve_lp(milp.A_C, rhs, milp.c_C, None, config)
    if sol.optimal:
        sol.objective += entry.alpha
    return sol


def _check_domain(s: UcSolutionSet, z, tol=1e-9):
    z = np.asarray(z, dtype=float).ravel()
    if z.size != s.lo.size:
        raise DomainError(f"expected {s.lo.size} export values, got {z.size}")
    if np.any(z < s.lo - tol) or np.any(z > s.hi + tol):
        raise DomainError(f"z={z.tolist()} outside the domain box")
    return z


def evaluate_vf(s: UcSolutionSet, milp: StandardMilp, z, config: SolverConfig = DEFAULT_CONFIG) -> VfEvaluation:
    """Minimum over the set's fixed-commitment LPs at ``z`` (an upper bound on V(z))."""
    z = _check_domain(s, z)
    best = VfEvaluation(INFEASIBLE)
    for i, e in enumerate(s.entries):
        sol = entry_lp(milp, e, z, config)
        if sol.optimal and sol.objective < best.value - 1e-12:
            best = VfEvaluation(sol.objective, i, sol.duals)
    return best


def evaluate_vf_exact(milp: StandardMilp, z, config: SolverConfig = DEFAULT_CONFIG) -> float:
    sol = solve_milp(milp, milp.rhs(z), config)
    if sol.status is Status.INFEASIBLE:
        return INFEASIBLE
    if not sol.optimal:
        raise RuntimeError(f"exact value-function solve ended with status {sol.status.value}")
    return sol.objective


# ---------------------------------------------------------------- Algorithm

@dataclass
class VfConfig:
    """Settings of the value-function construction.

    ``big_m`` of ``None`` selects ``10 * (max|c_C| + max|c_I|)``; ``epsilon``
    of ``None`` selects ``1e-6 * (1 + |V(z0)|)``.
    """

    K: int = 50
    epsilon: float | None = None
    big_m: float | None = None
    partitions: int = 4
    max_partitions: int = 16
    max_refinements: int = 200
    seeds: list = field(default_factory=list)
    verify_points: int = 0
    solver: SolverConfig = DEFAULT_CONFIG
    separation_solver: SolverConfig = field(
        default_factory=lambda: SolverConfig(lp_backend="highs", mip_backend="highs", max_binaries=5000,
                                     max_rows=200000))


def default_big_m(milp: StandardMilp) -> float:
    cmax = np.max(np.abs(milp.c_C), initial=0.0) + np.max(np.abs(milp.c_I), initial=0.0)
    return 10.0 * max(cmax, 1.0)


@dataclass
class SeparationResult:
    z: np.ndarray
    delta: float
    x_new: np.ndarray | None
    status: Status
    nodes: int
    segments: int


def _dual_bounds(milp: StandardMilp, big_m: float):
    """Bounds on each dual implied by single-entry columns, plus the remaining columns."""
    lo = np.full(milp.r, -big_m)
    hi = np.full(milp.r, big_m)
    rows = []
    for j in range(milp.n):
        col = milp.A_C[:, j]
        nz = np.flatnonzero(col)
        if nz.size == 0:
            continue
        if nz.size == 1:
            i = nz[0]
            lim = milp.c_C[j] / col[i]
            if col[i] > 0:
                hi[i] = min(hi[i], lim)
            else:
                lo[i] = max(lo[i], lim)
        else:
            rows.append(j)
    return lo, hi, rows


def penalized_entry_lp(milp: StandardMilp, entry: UcEntry, z, big_m: float,
                       config: SolverConfig = DEFAULT_CONFIG):
    """Entry LP with every row softened by slacks priced at ``big_m``.

    This is the per-entry term of the approximation the separation works
    with; its duals range over the dual region intersected with the big-M box.
    """
    rhs = entry.beta + milp.param_matrix() @ np.asarray(z, dtype=float)
    eye = np.eye(milp.r)
    A = np.hstack([milp.A_C, eye, -eye])
    c = np.concatenate([milp.c_C, np.full(2 * milp.r, big_m)])
    sol = solve_lp(A, rhs, c, None, config)
    if not sol.optimal:
        raise ConstructionError("penalized entry LP failed")
    return sol.objective + entry.alpha, sol.duals


def uniform_edges(lo: float, hi: float, parts: int) -> np.ndarray:
    return np.linspace(lo, hi, parts + 1)


def separation_problem(s: UcSolutionSet, milp: StandardMilp, config: VfConfig,
                       partitions: int | None = None, edges: dict | None = None,
                       segment_bounds: dict | None = None) -> SeparationResult:
    """Piecewise-McCormick MILP for the largest gap between the set and the true V.

    Maximizes ``theta - (c_I.x + c_C.y)`` over exports ``z`` in the domain,
    ``(x, y)`` feasible at ``z`` and one dual point per entry inside the big-M
    box, with ``theta`` below every entry's dual bound. Each product of a
    varying export and a dual is replaced by McCormick envelopes on the
    segments given by ``edges[k]`` (``partitions`` uniform segments by
    default). ``segment_bounds[(entry, k, p)] = (L, U)`` narrows the dual of
    export ``k``'s row on segment ``p``. The result is a relaxation value: it
    never falls below the true maximum gap of the big-M approximation.
    """
    if not s.entries:
        raise ValueError("separation needs at least one entry")
    P = partitions or config.partitions
    big_m = config.big_m if config.big_m is not None else default_big_m(milp)
    segment_bounds = segment_bounds or {}
    b = MilpBuilder()
    nz = len(milp.params)
    varying = [k for k in range(nz) if s.hi[k] - s.lo[k] > 1e-12]
    if edges is None:
        edges = {}
    edges = {k: np.asarray(edges[k]) if k in edges else uniform_edges(s.lo[k], s.hi[k], P) for k in varying}
    zv = [b.add_var(f"z{k}", lo=s.lo[k], hi=s.hi[k]) for k in range(nz)]
    xv = [b.add_var(f"x{j}", cost=milp.c_I[j], binary=True) for j in range(milp.m)]
    yv = [b.add_var(f"y{j}", cost=milp.c_C[j]) for j in range(milp.n)]
    theta = b.add_var("theta", lo=-np.inf, cost=-1.0)
    S = milp.param_matrix()
    for i in range(milp.r):
        coeffs = {xv[j]: milp.A_I[i, j] for j in np.flatnonzero(milp.A_I[i])}
        coeffs.update({yv[j]: milp.A_C[i, j] for j in np.flatnonzero(milp.A_C[i])})
        for k in np.flatnonzero(S[i]):
            coeffs[zv[k]] = -S[i, k]
        b.add_row(coeffs, EQ, milp.base_rhs[i])

    # segment selectors shared by all entries
    lam, zz = {}, {}
    for k in varying:
        e_k = edges[k]
        nseg = len(e_k) - 1
        lam[k] = [b.add_var(f"lam{k}_{p}", binary=True) for p in range(nseg)]
        zz[k] = [b.add_var(f"zz{k}_{p}", lo=min(0.0, e_k[p]), hi=max(0.0, e_k[p + 1])) for p in range(nseg)]
        b.add_row({v: 1.0 for v in lam[k]}, EQ, 1.0)
        link = {v: 1.0 for v in zz[k]}
        link[zv[k]] = -1.0
        b.add_row(link, EQ, 0.0)
        for p in range(nseg):
            b.add_row({zz[k][p]: 1.0, lam[k][p]: -e_k[p]}, GE, 0.0)
            b.add_row({zz[k][p]: 1.0, lam[k][p]: -e_k[p + 1]}, LE, 0.0)

    nlo, nhi, dual_cols = _dual_bounds(milp, big_m)
    if np.any(nlo > nhi + 1e-12):
        raise ConstructionError("dual region is empty inside the big-M box")
    param_row = {milp.params[k].row: k for k in range(nz)}
    for ei, e in enumerate(s.entries):
        nu = [b.add_var(f"nu{ei}_{r}", lo=nlo[r], hi=nhi[r]) for r in range(milp.r)]
        for j in dual_cols:
            col = milp.A_C[:, j]
            b.add_row({nu[r]: col[r] for r in np.flatnonzero(col)}, LE, milp.c_C[j])
        # theta <= alpha + beta.nu + sum_k sign_k z_k nu_row(k)
        cap = {theta: 1.0}
        for r in range(milp.r):
            if e.beta[r] != 0.0:
                cap[nu[r]] = cap.get(nu[r], 0.0) - e.beta[r]
        for r, k in param_row.items():
            sign = milp.params[k].sign
            if k not in varying:
                cap[nu[r]] = cap.get(nu[r], 0.0) - sign * s.lo[k]
                continue
            e_k = edges[k]
            split = []
            for p in range(len(e_k) - 1):
                a_, b_ = e_k[p], e_k[p + 1]
                L, U = segment_bounds.get((ei, k, p), (nlo[r], nhi[r]))
                L, U = max(L, nlo[r]), min(U, nhi[r])
                lp = lam[k][p]
                nn = b.add_var(f"nn{ei}_{k}_{p}", lo=min(0.0, L), hi=max(0.0, U))
                w = b.add_var(f"w{ei}_{k}_{p}", lo=-np.inf)
                split.append(nn)
                b.add_row({nn: 1.0, lp: -L}, GE, 0.0)
                b.add_row({nn: 1.0, lp: -U}, LE, 0.0)
                z_p = zz[k][p]
                b.add_row({w: 1.0, nn: -a_, z_p: -L, lp: a_ * L}, GE, 0.0)
                b.add_row({w: 1.0, nn: -b_, z_p: -U, lp: b_ * U}, GE, 0.0)
                b.add_row({w: 1.0, nn: -a_, z_p: -U, lp: a_ * U}, LE, 0.0)
                b.add_row({w: 1.0, nn: -b_, z_p: -L, lp: b_ * L}, LE, 0.0)
                cap[w] = cap.get(w, 0.0) - sign
            link = {v: 1.0 for v in split}
            link[nu[r]] = -1.0
            b.add_row(link, EQ, 0.0)
        b.add_row(cap, LE, e.alpha)

    c, A, rhs, bounds, binary, _ = b.general_form()
    res = solve_mip(c, A, rhs, bounds, binary, config.separation_solver)
    if res.values is None:
        if res.status is Status.INFEASIBLE:
            raise ConstructionError("separation MILP infeasible; the domain holds no feasible export")
        raise ConstructionError(f"separation MILP ended with status {res.status.value} and no solution")
    vals = res.values
    z = np.clip(np.array([vals[v] for v in zv]), s.lo, s.hi)
    x_new = np.round(np.array([vals[v] for v in xv]))
    nseg = max((len(edges[k]) - 1 for k in varying), default=0)
    return SeparationResult(z, -res.objective, x_new, res.status, res.nodes, nseg)


def find_initial_export(milp: StandardMilp, lo, hi, config: SolverConfig = DEFAULT_CONFIG):
    """Export vector in the box with a feasible commitment, minimizing total slack."""
    b = MilpBuilder()
    zv = [b.add_var(f"z{k}", lo=lo[k], hi=hi[k]) for k in range(len(milp.params))]
    xv = [b.add_var(f"x{j}", binary=True) for j in range(milp.m)]
    yv = [b.add_var(f"y{j}") for j in range(milp.n)]
    S = milp.param_matrix()
    for i in range(milp.r):
        coeffs = {xv[j]: milp.A_I[i, j] for j in np.flatnonzero(milp.A_I[i])}
        coeffs.update({yv[j]: milp.A_C[i, j] for j in np.flatnonzero(milp.A_C[i])})
        for k in np.flatnonzero(S[i]):
            coeffs[zv[k]] = -S[i, k]
        sp = b.add_var(f"sp{i}", cost=1.0)
        sm = b.add_var(f"sm{i}", cost=1.0)
        coeffs[sp] = 1.0
        coeffs[sm] = -1.0
        b.add_row(coeffs, EQ, milp.base_rhs[i])
    c, A, rhs, bounds, binary, _ = b.general_form()
    res = solve_mip(c, A, rhs, bounds, binary, config)
    scale = 1.0 + np.max(np.abs(milp.base_rhs), initial=0.0)
    if res.values is None or res.objective > 1e-7 * scale:
        raise ConstructionError("no export vector in the domain admits a feasible commitment")
    return np.clip(np.array([res.values[v] for v in zv]), lo, hi)


def _gap_at(s, milp, z, config):
    approx = evaluate_vf(s, milp, z, config.solver).value
    exact = solve_milp(milp, milp.rhs(z), config.solver)
    if exact.status is Status.INFEASIBLE:
        return 0.0, None, INFEASIBLE
    if not exact.optimal:
        raise ConstructionError(f"exact solve at z={z.tolist()} ended with {exact.status.value}")
    gap = approx - exact.objective if np.isfinite(approx) else INFEASIBLE
    return gap, exact.x, exact.objective


class _SegmentOracle:
    """Penalized per-entry LP values and subgradients along the single varying export."""

    def __init__(self, s, milp, k, big_m, config):
        self.s, self.milp, self.k, self.big_m, self.cfg = s, milp, k, big_m, config
        self.row = milp.params[k].row
        self.base = s.lo.copy()
        self.cache = {}

    def at(self, ei, t):
        key = (ei, float(t))
        if key not in self.cache:
            z = self.base.copy()
            z[self.k] = t
            val, duals = penalized_entry_lp(self.milp, self.s.entries[ei], z, self.big_m, self.cfg)
            self.cache[key] = (val, float(duals[self.row]))
        return self.cache[key]

    def bounds(self, edges):
        out = {}
        for ei in range(len(self.s.entries)):
            for p in range(len(edges) - 1):
                ga, gb = self.at(ei, edges[p])[1], self.at(ei, edges[p + 1])[1]
                out[ei, self.k, p] = (min(ga, gb), max(ga, gb))
        return out

    def knees(self, ei, a, b, depth=0):
        """Breakpoints of the (convex) penalized entry curve inside ``(a, b)``.

        Also returns the tangent intersections visited on the way; as segment
        edges these only refine the relaxation.
        """
        sign = self.milp.params[self.k].sign
        fa, ga = self.at(ei, a)
        fb, gb = self.at(ei, b)
        sa, sb = sign * ga, sign * gb
        if depth > 40 or abs(sa - sb) <= 1e-9 * (1 + abs(sa) + abs(sb)) or b - a <= 1e-9:
            return []
        zc = (fb - fa + sa * a - sb * b) / (sa - sb)
        if not (a < zc < b):
            return []
        fc, _ = self.at(ei, zc)
        line = fa + sa * (zc - a)
        if fc <= line + 1e-9 * (1 + abs(line)):
            return [zc]
        return self.knees(ei, a, zc, depth + 1) + [zc] + self.knees(ei, zc, b, depth + 1)


def construct_vf(milp: StandardMilp, lo, hi, config: VfConfig | None = None, area: str = "") -> UcSolutionSet:
    """Grow a commitment set until the separation value drops below epsilon or K entries.

    Each round solves the separation MILP at the current segmentation. A
    positive value with a true gap at the maximizer adds the exact optimal
    commitment there. A positive value without a true gap means the
    envelopes are too loose at the maximizer: with one varying export the
    maximizer and the entries' breakpoints in its segment become new
    segment edges, otherwise the uniform partition count doubles.
    """
    config = config or VfConfig()
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    if lo.size != len(milp.params) or np.any(lo > hi):
        raise ConstructionError("domain box is empty or has the wrong dimension")
    s = UcSolutionSet(area, milp.param_keys, lo, hi)
    z0 = find_initial_export(milp, lo, hi, config.solver)
    first = solve_milp(milp, milp.rhs(z0), config.solver)
    if not first.optimal:
        raise ConstructionError(f"initial MILP at z0 ended with {first.status.value}")
    s.add(milp, first.x)
    for seed in config.seeds:
        if len(s) >= config.K:
            break
        s.add(milp, seed)
    eps = config.epsilon if config.epsilon is not None else 1e-6 * (1.0 + abs(first.objective))
    big_m = config.big_m if config.big_m is not None else default_big_m(milp)
    varying = [k for k in range(lo.size) if hi[k] - lo[k] > 1e-12]
    history = []
    terminated = "cap"
    P = config.partitions
    edges = {k: uniform_edges(lo[k], hi[k], P) for k in varying}
    oracle = _SegmentOracle(s, milp, varying[0], big_m, config.solver) if len(varying) == 1 else None
    refinements = 0
    if not varying:
        terminated = "degenerate"
    while varying and len(s) < config.K:
        bounds = oracle.bounds(edges[varying[0]]) if oracle else None
        sep = separation_problem(s, milp, config, edges=edges, segment_bounds=bounds)
        gap, x_exact, _ = _gap_at(s, milp, sep.z, config)
        history.append({"size": len(s), "delta": sep.delta, "z": sep.z.tolist(), "true_gap": gap,
                        "segments": sep.segments, "status": sep.status.value, "nodes": sep.nodes})
        log.debug("size %d: separation %.6g at z=%s (true gap %.6g)", len(s), sep.delta, sep.z, gap)
        if sep.delta <= eps:
            terminated = "gap"
            break
        if gap > eps and x_exact is not None and s.add(milp, x_exact):
            continue
        refinements += 1
        if refinements > config.max_refinements or not _refine(edges, varying, sep.z, oracle, config):
            terminated = "relaxation"
            break
    s.log = {
        "z0": z0.tolist(),
        "epsilon": eps,
        "big_m": big_m,
        "K": config.K,
        "iterations": len(history),
        "delta": [h["delta"] for h in history],
        "history": history,
        "terminated_by": terminated,
    }
    if config.verify_points:
        s.log["verification_residual"] = verification_residual(s, milp, config.verify_points, config.solver)
    return s


def _refine(edges, varying, z, oracle, config) -> bool:
    if oracle is None:
        k0 = varying[0]
        parts = len(edges[k0]) - 1
        if parts * 2 > config.max_partitions:
            return False
        for k in varying:
            lo, hi = edges[k][0], edges[k][-1]
            edges[k] = uniform_edges(lo, hi, parts * 2)
        return True
    k = varying[0]
    e = edges[k]
    t = float(z[k])
    p = int(np.clip(np.searchsorted(e, t, side="right") - 1, 0, len(e) - 2))
    new = {t}
    for ei in range(len(oracle.s.entries)):
        new.update(oracle.knees(ei, float(e[p]), float(e[p + 1])))
    width = 1e-9 * (e[-1] - e[0])
    added = [v for v in new if np.min(np.abs(e - v)) > width]
    if not added:
        return False
    edges[k] = np.array(sorted(set(e.tolist()) | set(added)))
    return True


# -------------------------------------------------------------------- sweep

@dataclass
class Sweep:
    """Values of a set along one export component, sorted by the component value."""

    component: int
    key: tuple
    z: np.ndarray
    value: np.ndarray  # inf where every entry is infeasible
    entry: np.ndarray  # achieving entry, -1 where infeasible
    price: np.ndarray  # dual of the swept export's row (nan where infeasible)
    changes: list = field(default_factory=list)  # (a, b) brackets of entry or price changes

    def rows(self):
        return list(zip(self.z.tolist(), self.value.tolist(), self.entry.tolist()))

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("z,value,entry\n")
            for z, v, e in self.rows():
                fh.write(f"{z!r},{'inf' if not np.isfinite(v) else repr(v)},{e}\n")


def sweep_vf_1d(s: UcSolutionSet, milp: StandardMilp, component: int, grid_points: int = 101,
                refine: bool = True, base_z=None, width: float = 1e-4,
                config: SolverConfig = DEFAULT_CONFIG) -> Sweep:
    """Evaluate the set along one export component with the others held at ``base_z``.

    ``base_z`` defaults to zero clipped into the box. Between neighbouring
    grid points whose achieving entry or marginal price differ, bisection
    narrows the change down to ``width`` (MW).
    """
    if base_z is None:
        base = np.clip(np.zeros_like(s.lo), s.lo, s.hi)
    else:
        base = _check_domain(s, base_z).copy()
    lo, hi = s.lo[component], s.hi[component]
    row = milp.params[component].row
    cache = {}

    def point(t):
        if t not in cache:
            z = base.copy()
            z[component] = t
            ev = evaluate_vf(s, milp, z, config)
            price = round(float(ev.dual[row]), 6) if ev.dual is not None else None
            cache[t] = (ev.value, ev.index, price)
        return cache[t]

    changes = []
    if hi - lo <= 1e-12:
        point(float(lo))
    else:
        grid = np.linspace(lo, hi, grid_points)
        for t in grid:
            point(float(t))
        if refine:
            for a, b in zip(grid[:-1], grid[1:]):
                _bisect(point, float(a), float(b), width, changes)
    ts = sorted(cache)
    vals = np.array([cache[t][0] for t in ts])
    prices = np.array([np.nan if cache[t][2] is None else cache[t][2] for t in ts])
    return Sweep(component, s.keys[component], np.array(ts), vals, np.array([cache[t][1] for t in ts]),
                 prices, changes)


def _bisect(point, a, b, width, changes):
    pa, pb = point(a), point(b)
    if pa[1] == pb[1] and pa[2] == pb[2]:
        return
    if b - a <= width:
        changes.append((a, b))
        return
    mid = 0.5 * (a + b)
    _bisect(point, a, mid, width, changes)
    _bisect(point, mid, b, width, changes)


def entry_curves(s: UcSolutionSet, milp: StandardMilp, component: int, z_values, base_z=None,
                 config: SolverConfig = DEFAULT_CONFIG) -> np.ndarray:
    """``(entries, points)`` array of each entry's LP value along one component (inf if infeasible)."""
    base = np.clip(np.zeros_like(s.lo), s.lo, s.hi) if base_z is None else np.asarray(base_z, dtype=float)
    out = np.full((len(s.entries), len(z_values)), INFEASIBLE)
    for j, t in enumerate(z_values):
        z = base.copy()
        z[component] = t
        for i, e in enumerate(s.entries):
            sol = entry_lp(milp, e, z, config)
            if sol.optimal:
                out[i, j] = sol.objective
    return out
