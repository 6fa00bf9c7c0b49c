"""Incremental construction of linear models with named variables."""

from dataclasses import dataclass

import numpy as np

LE, GE, EQ = "<=", ">=", "=="


@dataclass
class _Var:
    name: str
    lo: float
    hi: float
    cost: float
    binary: bool


class MilpBuilder:
    """Collects variables and linear rows, then emits equality-form arrays.

    Rows are stored sparsely as ``{var_index: coefficient}``. Inequality rows
    receive a nonnegative slack column when emitted.
    """

    def __init__(self):
        self.vars: list[_Var] = []
        self.rows: list[tuple[dict, str, float, str]] = []

    def add_var(self, name, lo=0.0, hi=np.inf, cost=0.0, binary=False) -> int:
        if binary:
            lo, hi = max(lo, 0.0), min(hi, 1.0)
        self.vars.append(_Var(name, float(lo), float(hi), float(cost), binary))
        return len(self.vars) - 1

    def add_row(self, coeffs: dict, sense: str, rhs: float, name: str = "") -> int:
        if sense not in (LE, GE, EQ):
            raise ValueError(f"unknown sense {sense!r}")
        clean = {}
        for j, a in coeffs.items():
            if a != 0.0:
                clean[j] = clean.get(j, 0.0) + float(a)
        self.rows.append((clean, sense, float(rhs), name))
        return len(self.rows) - 1

    @property
    def n_vars(self):
        return len(self.vars)

    def general_form(self):
        """Arrays for :func:`solve_mip`: ``A x = b`` with bounds and binary mask.

        Returns ``(c, A, b, bounds, binary, n_struct)``; columns past
        ``n_struct`` are slacks.
        """
        n = len(self.vars)
        n_slack = sum(1 for r in self.rows if r[1] != EQ)
        A = np.zeros((len(self.rows), n + n_slack))
        b = np.zeros(len(self.rows))
        k = n
        for i, (coeffs, sense, rhs, _) in enumerate(self.rows):
            for j, a in coeffs.items():
                A[i, j] = a
            if sense == LE:
                A[i, k] = 1.0
                k += 1
            elif sense == GE:
                A[i, k] = -1.0
                k += 1
            b[i] = rhs
        c = np.zeros(n + n_slack)
        c[:n] = [v.cost for v in self.vars]
        bounds = np.zeros((n + n_slack, 2))
        bounds[:, 1] = np.inf
        bounds[:n, 0] = [v.lo for v in self.vars]
        bounds[:n, 1] = [v.hi for v in self.vars]
        binary = np.zeros(n + n_slack, dtype=bool)
        binary[:n] = [v.binary for v in self.vars]
        return c, A, b, bounds, binary, n
