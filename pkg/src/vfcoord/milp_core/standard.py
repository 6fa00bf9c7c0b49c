"""Standard-form MILP container and the two solves the rest of the package needs."""

from dataclasses import dataclass, field

import numpy as np

from .bnb import solve_mip
from .config import DEFAULT_CONFIG, SolverConfig
from .simplex import LpSolution, Status, solve_lp


@dataclass(frozen=True)
class ParamEntry:
    """One right-hand-side entry driven by a tie-line injection."""

    row: int
    tie: str
    period: int
    sign: float = 1.0


@dataclass
class StandardMilp:
    """``min c_I.x + c_C.y  s.t.  A_I x + A_C y = rhs(z),  x binary, y >= 0``.

    ``rhs(z) = base_rhs`` plus ``sign * z_k`` on each parameterized row.
    """

    c_I: np.ndarray
    c_C: np.ndarray
    A_I: np.ndarray
    A_C: np.ndarray
    base_rhs: np.ndarray
    params: list[ParamEntry] = field(default_factory=list)
    binary_names: list[str] = field(default_factory=list)
    continuous_names: list[str] = field(default_factory=list)
    row_names: list[str] = field(default_factory=list)
    # (status column, startup column or -1, previous status column or -1, initial_on)
    commitment: list[tuple[int, int, int, bool]] = field(default_factory=list)

    @property
    def m(self) -> int:
        return self.A_I.shape[1]

    @property
    def n(self) -> int:
        return self.A_C.shape[1]

    @property
    def r(self) -> int:
        return self.A_I.shape[0]

    @property
    def param_keys(self) -> list[tuple[str, int]]:
        return [(p.tie, p.period) for p in self.params]

    def rhs(self, z=None) -> np.ndarray:
        out = self.base_rhs.astype(float).copy()
        if z is None:
            return out
        z = np.asarray(z, dtype=float).ravel()
        if z.size != len(self.params):
            raise ValueError(f"expected {len(self.params)} parameter values, got {z.size}")
        for p, val in zip(self.params, z):
            out[p.row] += p.sign * val
        return out

    @property
    def zbar(self) -> np.ndarray:
        """Fixed part of the right-hand side, i.e. ``rhs`` with every export at zero."""
        return self.base_rhs.astype(float).copy()

    def param_matrix(self) -> np.ndarray:
        """``S`` with ``rhs(z) = zbar + S z``."""
        S = np.zeros((self.r, len(self.params)))
        for k, p in enumerate(self.params):
            S[p.row, k] = p.sign
        return S

    def implied_binaries(self, status: np.ndarray) -> np.ndarray:
        """Full binary vector from a status vector, startups set to their minimum."""
        x = np.zeros(self.m)
        status_cols = [s for s, _, _, _ in self.commitment]
        x[status_cols] = status
        for s_col, su_col, prev_col, init_on in self.commitment:
            if su_col < 0:
                continue
            prev = x[prev_col] if prev_col >= 0 else float(init_on)
            x[su_col] = max(0.0, x[s_col] - prev)
        return x


@dataclass
class MilpSolution:
    status: Status
    x: np.ndarray | None = None
    y: np.ndarray | None = None
    objective: float = float("inf")
    best_bound: float = -float("inf")
    nodes: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def solve_milp(milp: StandardMilp, rhs, config: SolverConfig = DEFAULT_CONFIG) -> MilpSolution:
    rhs = np.asarray(rhs, dtype=float)
    if rhs.size != milp.r:
        raise ValueError(f"rhs length {rhs.size} != {milp.r} rows")
    A = np.hstack([milp.A_I, milp.A_C])
    c = np.concatenate([milp.c_I, milp.c_C])
    bounds = np.zeros((milp.m + milp.n, 2))
    bounds[:milp.m, 1] = 1.0
    bounds[milp.m:, 1] = np.inf
    binary = np.zeros(milp.m + milp.n, dtype=bool)
    binary[:milp.m] = True
    res = solve_mip(c, A, rhs, bounds, binary, config)
    if res.values is None:
        return MilpSolution(res.status, nodes=res.nodes, best_bound=res.best_bound)
    x = np.round(res.values[:milp.m])
    return MilpSolution(res.status, x=x, y=res.values[milp.m:], objective=res.objective,
                        best_bound=res.best_bound, nodes=res.nodes)


def solve_lp_fixed_binaries(milp: StandardMilp, x, rhs, config: SolverConfig = DEFAULT_CONFIG) -> LpSolution:
    """LP over the continuous block with ``A_I x`` moved to the right-hand side.

    The objective includes ``c_I.x``; the duals are a point of the dual
    region ``{nu : A_C.T nu <= c_C}`` at optimality.
    """
    x = np.asarray(x, dtype=float)
    if x.size != milp.m:
        raise ValueError(f"binary vector length {x.size} != {milp.m}")
    rhs = np.asarray(rhs, dtype=float) - milp.A_I @ x
    sol = solve_lp(milp.A_C, rhs, milp.c_C, None, config)
    if sol.optimal:
        sol.objective += float(milp.c_I @ x)
    return sol
