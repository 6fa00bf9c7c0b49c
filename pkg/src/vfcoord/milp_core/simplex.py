"""Bounded-variable primal simplex with dual extraction.

Solves ``min c.x  s.t.  A x = b,  lo <= x <= hi`` with a dense revised
simplex. Duals are returned in the original row space so they can be used
directly as value-function subgradients and as nodal prices.
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .config import DEFAULT_CONFIG, SolverConfig


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    INCOMPLETE = "Incomplete"


class NumericalFailure(RuntimeError):
    """Raised when the basis becomes numerically unusable."""


class ProblemTooLarge(ValueError):
    pass


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    objective: float = float("nan")
    reduced_costs: np.ndarray | None = None
    basis: np.ndarray | None = None
    iterations: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


_PRICE_TOL = 1e-9
_RATIO_TOL = 1e-9
_REFACTOR_EVERY = 64
_HARRIS_TOL = 1e-9


class _Simplex:
    # Works on the shifted problem: 0 <= x <= ub, A x = b, basis given.

    def __init__(self, A, b, ub, config: SolverConfig):
        self.A = A
        self.b = b
        self.ub = ub
        self.m, self.n = A.shape
        self.cfg = config
        self.iterations = 0
        self.tiny_pivots = 0

    def _refactor(self):
        B = self.A[:, self.basis]
        try:
            self.Binv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:
            raise NumericalFailure("singular basis matrix") from exc
        if not np.all(np.isfinite(self.Binv)):
            raise NumericalFailure("non-finite basis inverse")
        self._recompute_xb()

    def _recompute_xb(self):
        nonbasic = self.x.copy()
        nonbasic[self.basis] = 0.0
        self.x[self.basis] = self.Binv @ (self.b - self.A @ nonbasic)

    def run(self, cost, basis, x):
        """Iterate to optimality for ``cost``. Returns 'optimal' or 'unbounded'."""
        self.basis = basis
        self.x = x
        self.is_basic = np.zeros(self.n, dtype=bool)
        self.is_basic[basis] = True
        self._refactor()
        degenerate = 0
        bland = False
        since_refactor = 0
        while True:
            if self.iterations >= self.cfg.max_iter:
                raise NumericalFailure("simplex iteration limit reached")
            nu = cost[self.basis] @ self.Binv
            d = cost - nu @ self.A
            at_upper = (~self.is_basic) & np.isfinite(self.ub) & (self.x >= self.ub - 1e-12) & (self.ub > 0)
            can_inc = (~self.is_basic) & ~at_upper & (self.ub > 0) & (d < -_PRICE_TOL)
            can_dec = at_upper & (d > _PRICE_TOL)
            cand = np.flatnonzero(can_inc | can_dec)
            if cand.size == 0:
                self.nu = nu
                self.d = d
                return "optimal"
            if bland:
                j = int(cand[0])
            else:
                j = int(cand[np.argmax(np.abs(d[cand]))])
            direction = 1.0 if can_inc[j] else -1.0
            alpha = self.Binv @ self.A[:, j]
            step = direction * alpha
            xb = self.x[self.basis]
            ubb = self.ub[self.basis]

            t_best = self.ub[j] if np.isfinite(self.ub[j]) else np.inf
            leave = -1
            leave_to_upper = False
            pos = step > _RATIO_TOL
            neg = (step < -_RATIO_TOL) & np.isfinite(ubb)
            room = np.full(self.m, np.inf)
            room[pos] = np.maximum(xb[pos], 0.0)
            room[neg] = np.maximum(ubb[neg] - xb[neg], 0.0)
            mag = np.abs(step)
            if np.any(pos | neg):
                # Harris: relax each bound by a small tolerance, then take the
                # largest pivot among rows whose exact ratio fits in that step
                t_relaxed = np.min((room[pos | neg] + _HARRIS_TOL) / mag[pos | neg])
                exact = np.full(self.m, np.inf)
                exact[pos | neg] = room[pos | neg] / mag[pos | neg]
                if t_relaxed < t_best or exact.min() < t_best:
                    ok = np.flatnonzero(exact <= t_relaxed)
                    if ok.size == 0:
                        ok = np.array([int(np.argmin(exact))])
                    if bland:
                        tmin = exact[ok].min()
                        ties = ok[exact[ok] <= tmin + 1e-12]
                        r = int(ties[np.argmin(self.basis[ties])])
                    else:
                        r = int(ok[np.argmax(mag[ok])])
                    if exact[r] < t_best:
                        t_best = exact[r]
                        leave = r
                        leave_to_upper = bool(neg[r])
            if not np.isfinite(t_best):
                return "unbounded"

            self.iterations += 1
            if t_best <= 1e-12:
                degenerate += 1
                if degenerate > 3 * self.m:
                    bland = True
            else:
                degenerate = 0

            # move along the edge
            self.x[self.basis] = xb - t_best * step
            self.x[j] += direction * t_best
            if leave < 0:
                # bound flip of the entering variable
                self.x[j] = self.ub[j] if direction > 0 else 0.0
                continue

            piv = alpha[leave]
            if abs(piv) < 1e-7:
                self.tiny_pivots += 1
                if abs(piv) < self.cfg.pivot_tol or self.tiny_pivots > 50:
                    raise NumericalFailure(f"pivot magnitude {abs(piv):.3e} too small")
            out = self.basis[leave]
            self.x[out] = self.ub[out] if leave_to_upper else 0.0
            self.basis[leave] = j
            self.is_basic[out] = False
            self.is_basic[j] = True

            since_refactor += 1
            if since_refactor >= _REFACTOR_EVERY:
                since_refactor = 0
                self._refactor()
            else:
                row = self.Binv[leave] / piv
                self.Binv -= np.outer(alpha, row)
                self.Binv[leave] = row


def _prepare_bounds(n, bounds):
    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    if bounds is not None:
        bounds = np.asarray(bounds, dtype=float)
        if bounds.shape != (n, 2):
            raise ValueError(f"bounds must have shape ({n}, 2)")
        lo = np.where(np.isnan(bounds[:, 0]), -np.inf, bounds[:, 0])
        hi = np.where(np.isnan(bounds[:, 1]), np.inf, bounds[:, 1])
    return lo, hi


def solve_lp(A, b, c, bounds=None, config: SolverConfig = DEFAULT_CONFIG) -> LpSolution:
    """Minimize ``c.x`` subject to ``A x = b`` and box bounds.

    ``bounds`` is an ``(n, 2)`` array of ``(lo, hi)``; ``None`` means
    ``x >= 0``. Infinite (or NaN) entries mean unbounded on that side.
    The returned duals ``nu`` satisfy ``c - A.T nu = reduced_costs``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    c = np.asarray(c, dtype=float).ravel()
    m, n = A.shape
    if b.size != m or c.size != n:
        raise ValueError("dimension mismatch between A, b and c")
    if m > config.max_rows:
        raise ProblemTooLarge(f"{m} rows exceeds the configured cap of {config.max_rows}")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b)) and np.all(np.isfinite(c))):
        raise ValueError("LP data must be finite")
    lo, hi = _prepare_bounds(n, bounds)
    if np.any(lo > hi + config.feas_tol):
        return LpSolution(Status.INFEASIBLE, meta={"reason": "crossed bounds"})

    # presolve: fixed variables go to the rhs, empty rows are checked
    fixed = np.isfinite(lo) & np.isfinite(hi) & (hi - lo <= 1e-12)
    x_fixed = np.where(fixed, lo, 0.0)
    rhs = b - A[:, fixed] @ lo[fixed] if fixed.any() else b.copy()
    keep = np.flatnonzero(~fixed)
    Ak = A[:, keep]
    row_nz = np.any(Ak != 0.0, axis=1)
    scale = 1.0 + (np.max(np.abs(b)) if m else 0.0)
    if np.any(np.abs(rhs[~row_nz]) > config.feas_tol * scale):
        return LpSolution(Status.INFEASIBLE, meta={"reason": "empty row with nonzero rhs"})
    rows = np.flatnonzero(row_nz)
    Ak = Ak[rows]
    rk = rhs[rows]
    ck = c[keep]
    lok, hik = lo[keep], hi[keep]

    # map every kept column to columns with finite zero lower bound
    cols, signs, offsets, ubs = [], [], [], []
    origin = []
    for jj, j in enumerate(keep):
        if np.isfinite(lok[jj]):
            cols.append(Ak[:, jj]); signs.append(1.0); offsets.append(lok[jj]); ubs.append(hik[jj] - lok[jj])
            origin.append(jj)
        elif np.isfinite(hik[jj]):
            cols.append(-Ak[:, jj]); signs.append(-1.0); offsets.append(hik[jj]); ubs.append(np.inf)
            origin.append(jj)
        else:
            cols.append(Ak[:, jj]); signs.append(1.0); offsets.append(0.0); ubs.append(np.inf)
            origin.append(jj)
            cols.append(-Ak[:, jj]); signs.append(-1.0); offsets.append(0.0); ubs.append(np.inf)
            origin.append(jj)
    mk = rows.size
    nk = len(cols)
    W = np.column_stack(cols) if nk else np.zeros((mk, 0))
    signs = np.asarray(signs)
    offsets = np.asarray(offsets)
    ubs = np.asarray(ubs, dtype=float)
    origin = np.asarray(origin, dtype=int)
    wc = signs * ck[origin] if nk else np.zeros(0)
    # x_orig = offset + sign * w  (for split columns the two parts share offset 0)
    base_off = np.zeros(len(keep))
    for k_, jj in enumerate(origin):
        if np.isfinite(lok[jj]) or np.isfinite(hik[jj]):
            base_off[jj] = offsets[k_]
    wb = rk - (Ak @ base_off if len(keep) else 0.0)

    duals = np.zeros(m)
    if mk == 0:
        # only bound constraints remain
        w = np.zeros(nk)
        neg = wc < 0
        if np.any(neg & ~np.isfinite(ubs)):
            return LpSolution(Status.UNBOUNDED)
        w[neg] = ubs[neg]
        return _finish(A, b, c, n, keep, origin, signs, base_off, w, x_fixed, fixed, duals, 0, None)

    # phase 1 with artificial columns
    art_sign = np.where(wb >= 0, 1.0, -1.0)
    Wfull = np.hstack([W, np.diag(art_sign)])
    ub_full = np.concatenate([ubs, np.full(mk, np.inf)])
    engine = _Simplex(Wfull, wb, ub_full, config)
    basis = np.arange(nk, nk + mk)
    x = np.zeros(nk + mk)
    cost1 = np.concatenate([np.zeros(nk), np.ones(mk)])
    engine.run(cost1, basis, x)
    infeas = float(engine.x[nk:].sum())
    if infeas > 1e-7 * (1.0 + np.max(np.abs(wb))):
        return LpSolution(Status.INFEASIBLE, iterations=engine.iterations,
                          meta={"phase1_residual": infeas})

    # phase 2: artificials fixed at zero
    engine.ub = np.concatenate([ubs, np.zeros(mk)])
    x = engine.x.copy()
    x[nk:] = np.where(engine.is_basic[nk:], x[nk:], 0.0)
    cost2 = np.concatenate([wc, np.zeros(mk)])
    outcome = engine.run(cost2, engine.basis.copy(), x)
    if outcome == "unbounded":
        return LpSolution(Status.UNBOUNDED, iterations=engine.iterations)
    duals[rows] = engine.nu
    w = engine.x[:nk]
    return _finish(A, b, c, n, keep, origin, signs, base_off, w, x_fixed, fixed, duals,
                   engine.iterations, engine.basis.copy())


def _finish(A, b, c, n, keep, origin, signs, base_off, w, x_fixed, fixed, duals, iters, basis):
    x = x_fixed.copy()
    xk = base_off.copy()
    np.add.at(xk, origin, signs * w)
    x[keep] = xk
    x[fixed] = x_fixed[fixed]
    reduced = c - A.T @ duals
    return LpSolution(Status.OPTIMAL, x=x, duals=duals, objective=float(c @ x),
                      reduced_costs=reduced, basis=basis, iterations=iters)


def format_basis(sol: LpSolution) -> str:
    """Plain-text dump of a solution's basis, one ``row<TAB>column<TAB>value`` line per row."""
    if sol.basis is None or sol.x is None:
        return f"# status {sol.status.value}\n"
    lines = [f"# status {sol.status.value} objective {sol.objective:.12g} iterations {sol.iterations}"]
    for r, j in enumerate(sol.basis):
        lines.append(f"{r}\t{int(j)}\t{sol.duals[r] if r < len(sol.duals) else float('nan'):.12g}")
    return "\n".join(lines) + "\n"
