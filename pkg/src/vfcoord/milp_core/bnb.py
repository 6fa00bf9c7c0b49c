"""Best-first branch-and-bound over binary variables."""

import heapq
import itertools
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig
from .simplex import LpSolution, Status, solve_lp


@dataclass
class MipResult:
    status: Status
    values: np.ndarray | None = None
    objective: float = float("inf")
    best_bound: float = -float("inf")
    nodes: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def _highs_lp(A, b, c, bounds) -> LpSolution:
    from scipy.optimize import linprog

    res = linprog(c, A_eq=A, b_eq=b, bounds=[(lo if np.isfinite(lo) else None,
                                              hi if np.isfinite(hi) else None)
                                             for lo, hi in bounds], method="highs")
    if res.status == 2:
        return LpSolution(Status.INFEASIBLE)
    if res.status == 3:
        return LpSolution(Status.UNBOUNDED)
    if res.status != 0:
        return LpSolution(Status.INCOMPLETE, meta={"message": res.message})
    duals = np.asarray(res.eqlin.marginals) if A.shape[0] else np.zeros(0)
    if res.x is None:
        return LpSolution(Status.INCOMPLETE, meta={"message": res.message})
    return LpSolution(Status.OPTIMAL, x=np.asarray(res.x), duals=duals, objective=float(res.fun),
                      reduced_costs=c - A.T @ duals)


def lp_relaxation(A, b, c, bounds, config: SolverConfig, sparse_A=None) -> LpSolution:
    if config.lp_backend == "highs":
        return _highs_lp(A if sparse_A is None else sparse_A, b, c, bounds)
    return solve_lp(A, b, c, bounds, config)


def _highs_mip(c, A, b, bounds, binary, config) -> MipResult:
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import csr_matrix

    res = milp(c, integrality=binary.astype(int), bounds=Bounds(bounds[:, 0], bounds[:, 1]),
               constraints=LinearConstraint(csr_matrix(A), b, b),
               options={"mip_rel_gap": config.rel_gap, "node_limit": config.node_limit,
                        "presolve": False})
    if res.status == 2:
        return MipResult(Status.INFEASIBLE)
    if res.status == 3:
        return MipResult(Status.UNBOUNDED)
    values = None if res.x is None else np.asarray(res.x)
    if values is not None:
        values[binary] = np.round(values[binary])
    bound = getattr(res, "mip_dual_bound", None)
    nodes = int(getattr(res, "mip_node_count", 0) or 0)
    if res.status == 0:
        return MipResult(Status.OPTIMAL, values, float(res.fun), float(res.fun if bound is None else bound), nodes)
    return MipResult(Status.INCOMPLETE, values, float(res.fun) if values is not None else np.inf,
                     -np.inf if bound is None else float(bound), nodes, {"message": res.message})


def solve_mip(c, A, b, bounds, binary, config: SolverConfig = DEFAULT_CONFIG) -> MipResult:
    """Minimize ``c.x`` over ``A x = b``, box bounds, ``x[binary]`` in {0, 1}.

    Nodes are explored best-bound first (deeper nodes first among equal
    bounds). Branching picks the fractional binary closest to 0.5, lowest
    index on ties. With ``config.rel_gap == 0`` the search only stops when
    every open node is dominated by the incumbent.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    bounds = np.array(bounds, dtype=float)
    binary = np.asarray(binary, dtype=bool)
    bin_idx = np.flatnonzero(binary)
    if bin_idx.size > config.max_binaries:
        raise ValueError(f"{bin_idx.size} binaries exceeds the exact-mode cap of {config.max_binaries}")
    bounds[bin_idx, 0] = np.maximum(bounds[bin_idx, 0], 0.0)
    bounds[bin_idx, 1] = np.minimum(bounds[bin_idx, 1], 1.0)
    if config.mip_backend == "highs":
        return _highs_mip(c, A, b, bounds, binary, config)

    sparse_A = None
    if config.lp_backend == "highs":
        from scipy.sparse import csr_matrix

        sparse_A = csr_matrix(A)

    def relax(bnds):
        return lp_relaxation(A, b, c, bnds, config, sparse_A)

    counter = itertools.count()
    incumbent = None
    inc_obj = np.inf
    nodes = 0
    root = relax(bounds)
    nodes += 1
    if root.status is Status.INFEASIBLE:
        return MipResult(Status.INFEASIBLE, nodes=nodes)
    if root.status is Status.UNBOUNDED:
        return MipResult(Status.UNBOUNDED, nodes=nodes)
    heap = [(root.objective, 0, next(counter), bounds, root)]

    def prune_level(obj):
        if not np.isfinite(obj):
            return np.inf
        return obj - config.rel_gap * abs(obj) - 1e-9 * (1.0 + abs(obj))

    while heap:
        bound, negdepth, _, nb, sol = heapq.heappop(heap)
        if bound >= prune_level(inc_obj):
            continue
        xb = sol.x[bin_idx]
        frac = np.abs(xb - np.round(xb))
        if np.all(frac <= config.int_tol):
            fixed = nb.copy()
            fixed[bin_idx, 0] = fixed[bin_idx, 1] = np.round(xb)
            clean = relax(fixed)
            nodes += 1
            if clean.optimal and clean.objective < inc_obj:
                incumbent, inc_obj = clean.x, clean.objective
            continue
        if nodes >= config.node_limit:
            heapq.heappush(heap, (bound, negdepth, next(counter), nb, sol))
            break
        dist = np.abs(xb - 0.5)
        k = bin_idx[int(np.argmin(dist))]
        for val in (0.0, 1.0):
            child = nb.copy()
            child[k, 0] = child[k, 1] = val
            csol = relax(child)
            nodes += 1
            if csol.status is Status.OPTIMAL and csol.objective < prune_level(inc_obj):
                heapq.heappush(heap, (csol.objective, negdepth - 1, next(counter), child, csol))

    open_bound = min((h[0] for h in heap if h[0] < prune_level(inc_obj)), default=np.inf)
    if heap and np.isfinite(open_bound):
        best_bound = min(open_bound, inc_obj)
        return MipResult(Status.INCOMPLETE, values=incumbent, objective=inc_obj,
                         best_bound=best_bound, nodes=nodes)
    if incumbent is None:
        return MipResult(Status.INFEASIBLE, nodes=nodes)
    return MipResult(Status.OPTIMAL, values=incumbent, objective=inc_obj, best_bound=inc_obj, nodes=nodes)
