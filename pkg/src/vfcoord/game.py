"""Savings game between areas: coalition worths, Shapley payoffs, payments.

Coalitions are bitmasks over the player list (bit ``i`` is ``players[i]``).
Worths are negative costs, so a coalition that trades internally at lower
cost has a larger worth.
"""

import itertools
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .coordinator import CentralizedResult, CoordinationInfeasible, solve_coordinated
from .milp_core import DEFAULT_CONFIG, SolverConfig, solve_lp_fixed_binaries
from .model import MultiAreaSystem
from .parallel import pmap

log = logging.getLogger(__name__)

MAX_PLAYERS = 12
LMP_CONVENTION = ("importer pays its boundary-bus LMP (dual of the boundary bus balance row at fixed "
                  "optimal commitment) times the scheduled flow, per tie-line and period")


class GameError(ValueError):
    pass


def members(mask: int, players) -> list:
    return [p for i, p in enumerate(players) if mask >> i & 1]


def mask_of(coalition, players) -> int:
    idx = {p: i for i, p in enumerate(players)}
    m = 0
    for p in coalition:
        if p not in idx:
            raise GameError(f"unknown player {p!r}")
        m |= 1 << idx[p]
    return m


@dataclass
class CoalitionWorthTable:
    players: list
    worths: dict = field(default_factory=dict)  # mask -> $
    flags: dict = field(default_factory=dict)  # mask -> reason for -inf

    def __post_init__(self):
        if len(set(self.players)) != len(self.players):
            raise GameError("duplicate player ids")
        if 0 in self.worths and self.worths[0] != 0.0:
            raise GameError("the empty coalition must be worth 0")
        self.worths[0] = 0.0

    @property
    def size(self) -> int:
        return len(self.players)

    @property
    def grand(self) -> int:
        return (1 << self.size) - 1

    def v(self, mask: int) -> float:
        try:
            return self.worths[mask]
        except KeyError:
            raise GameError(f"coalition {members(mask, self.players)} has no worth") from None

    def missing(self) -> list[int]:
        return [m for m in range(1, self.grand + 1) if m not in self.worths]

    def superadditivity_violations(self, tol: float = 1e-6) -> list[tuple[int, int]]:
        """Disjoint pairs ``(C, D)`` with ``v(C | D) < v(C) + v(D) - tol``; infinite worths skipped."""
        out = []
        for c in range(1, self.grand + 1):
            rest = self.grand & ~c
            d = rest
            while d:
                if c < d:
                    vals = (self.worths.get(c), self.worths.get(d), self.worths.get(c | d))
                    if None not in vals and all(np.isfinite(vals)) and vals[2] < vals[0] + vals[1] - tol:
                        out.append((c, d))
                d = (d - 1) & rest
        return out

    def to_dict(self) -> dict:
        return {"players": list(self.players),
                "worths": [{"coalition": members(m, self.players), "worth": w}
                           for m, w in sorted(self.worths.items()) if m],
                "flags": [{"coalition": members(m, self.players), "reason": r} for m, r in sorted(self.flags.items())]}

    @classmethod
    def from_dict(cls, d: dict, scale: float = 1.0) -> "CoalitionWorthTable":
        players = [str(p) for p in d["players"]]
        worths = {}
        for item in d["worths"]:
            m = mask_of([str(p) for p in item["coalition"]], players)
            worths[m] = float(item["worth"]) * scale
        return cls(players, worths)


def characteristic_values(sets: dict, milps: dict, system: MultiAreaSystem,
                          config: SolverConfig = DEFAULT_CONFIG) -> CoalitionWorthTable:
    """Worth of every coalition: minus its coordinated cost with trade confined to the coalition."""
    players = [a.id for a in system.areas]
    if len(players) > MAX_PLAYERS:
        raise GameError(f"{len(players)} areas need 2^{len(players)} coordinator solves; "
                        f"the limit is {MAX_PLAYERS} areas")
    masks = list(range(1, 1 << len(players)))

    def worth(mask):
        try:
            res = solve_coordinated(sets, milps, system, areas=members(mask, players), config=config, check=False)
            return -res.joint_cost, None
        except CoordinationInfeasible as exc:
            return -math.inf, str(exc)

    table = CoalitionWorthTable(players)
    for mask, (w, flag) in zip(masks, pmap(worth, masks)):
        table.worths[mask] = w
        if flag:
            table.flags[mask] = flag
    return table


def _weights(n):
    return [math.factorial(k) * math.factorial(n - k - 1) / math.factorial(n) for k in range(n)]


def _require_complete(table):
    miss = table.missing()
    if miss:
        raise GameError(f"worth table misses coalitions {[members(m, table.players) for m in miss]}")
    bad = [m for m in range(1, table.grand + 1) if not np.isfinite(table.worths[m])]
    if bad:
        raise GameError(f"coalitions {[members(m, table.players) for m in bad]} are infeasible; "
                        "the Shapley value is undefined")


def shapley(table: CoalitionWorthTable) -> np.ndarray:
    """Weighted average of marginal contributions over all coalitions not containing the player."""
    _require_complete(table)
    n = table.size
    w = _weights(n)
    phi = np.zeros(n)
    for a in range(n):
        bit = 1 << a
        for c in range(table.grand + 1):
            if c & bit:
                continue
            phi[a] += w[bin(c).count("1")] * (table.worths[c | bit] - table.worths[c])
    total = table.worths[table.grand]
    if abs(phi.sum() - total) > 1e-6 * max(1.0, abs(total)):
        raise ArithmeticError("Shapley payoffs are not efficient")
    return phi


def shapley_permutation_oracle(table: CoalitionWorthTable) -> np.ndarray:
    """Average marginal contribution over every arrival order (independent check, n <= 8)."""
    _require_complete(table)
    n = table.size
    if n > 8:
        raise GameError("the permutation oracle is limited to 8 players")
    worth = np.array([table.worths[m] for m in range(table.grand + 1)])
    orders = np.array(list(itertools.permutations(range(n))), dtype=np.int64)
    bits = np.left_shift(1, orders)
    after = np.cumsum(bits, axis=1)  # disjoint bits: the running sum is the running union
    gain = worth[after] - worth[after - bits]
    phi = np.zeros(n)
    np.add.at(phi, orders.ravel(), gain.ravel())
    return phi / len(orders)


def payments(phi, costs) -> np.ndarray:
    """``psi_a = -cost_a - phi_a``: what area ``a`` pays so its net equals its payoff."""
    phi = np.asarray(phi, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if phi.shape != costs.shape:
        raise GameError("payoff and cost vectors differ in length")
    return -costs - phi


def core_check(table: CoalitionWorthTable, phi, tol: float = 1e-6) -> list[list]:
    """Coalitions that would get more on their own than ``phi`` gives them."""
    phi = np.asarray(phi, dtype=float)
    out = []
    for c in range(1, table.grand + 1):
        v = table.worths.get(c)
        if v is None or not np.isfinite(v):
            continue
        share = sum(phi[i] for i in range(table.size) if c >> i & 1)
        if share < v - tol:
            out.append(members(c, table.players))
    return out


@dataclass
class LmpPayments:
    payments: dict  # area -> $ paid (negative: received)
    prices: dict  # (area, bus, period) -> $/MWh
    warnings: list
    convention: str = LMP_CONVENTION


def lmp_payments(system: MultiAreaSystem, centralized: CentralizedResult,
                 config: SolverConfig = DEFAULT_CONFIG) -> LmpPayments:
    """Interchange settlement at boundary-bus LMPs of the centralized optimum."""
    model, sol = centralized.model, centralized.solution
    if sol is None or sol.x is None:
        raise GameError("the centralized optimum is required")
    milp = model.milp
    rhs = milp.rhs()
    lp = solve_lp_fixed_binaries(milp, sol.x, rhs, config)
    if not lp.optimal:
        raise GameError("fixed-commitment LP of the centralized optimum failed")
    prices, warnings = {}, []
    pay = {a.id: 0.0 for a in system.areas}
    for tl in system.tielines:
        for t in range(system.periods):
            for end in (tl.from_end, tl.to_end):
                row = model.balance_rows[end.area, end.bus, t]
                prices[end.area, end.bus, t + 1] = float(lp.duals[row])
                if not _dual_unique(milp, sol.x, rhs, row, lp.objective, lp.duals[row], config):
                    warnings.append(f"LMP at {end.area}:{end.bus} period {t + 1} is not unique "
                                    "(degenerate fixed-commitment LP)")
            flow = centralized.schedule[tl.id, t + 1]
            if abs(flow) <= 1e-12:
                continue
            exporter, importer = (tl.from_end, tl.to_end) if flow > 0 else (tl.to_end, tl.from_end)
            amount = prices[importer.area, importer.bus, t + 1] * abs(flow)
            pay[importer.area] += amount
            pay[exporter.area] -= amount
    return LmpPayments(pay, prices, sorted(set(warnings)))


def _dual_unique(milp, x, rhs, row, obj, dual, config, rel=1e-4) -> bool:
    """Compare one-sided rhs derivatives of the fixed-commitment LP on ``row``."""
    h = rel * (1.0 + abs(rhs[row]))
    slopes = []
    for s in (1.0, -1.0):
        r = rhs.copy()
        r[row] += s * h
        sol = solve_lp_fixed_binaries(milp, x, r, config)
        if not sol.optimal:
            return False
        slopes.append(s * (sol.objective - obj) / h)
    tol = 1e-6 * (1.0 + abs(dual))
    return abs(slopes[0] - slopes[1]) <= tol


@dataclass
class AllocationReport:
    players: list
    payoff: np.ndarray
    cost: np.ndarray
    payment: np.ndarray
    core_violations: list
    table: CoalitionWorthTable
    lmp: LmpPayments | None = None
    superadditivity_violations: list = field(default_factory=list)

    def to_dict(self) -> dict:
        out = {
            "areas": [{"area": a, "payoff": float(p), "cost": float(c), "payment": float(s)}
                      for a, p, c, s in zip(self.players, self.payoff, self.cost, self.payment)],
            "payment_sum": float(self.payment.sum()),
            "core": {"stable": not self.core_violations, "violations": self.core_violations},
            "superadditive": not self.superadditivity_violations,
            "worths": self.table.to_dict(),
        }
        if self.lmp is not None:
            out["lmp"] = {"convention": self.lmp.convention,
                          "payments": self.lmp.payments,
                          "prices": [{"area": a, "bus": b, "period": t, "lmp": v}
                                     for (a, b, t), v in sorted(self.lmp.prices.items())],
                          "warnings": self.lmp.warnings}
        return out

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)


def allocate(table: CoalitionWorthTable, costs, lmp: LmpPayments | None = None) -> AllocationReport:
    """Shapley payoffs, payments against realized ``costs`` (ordered like the players) and stability."""
    phi = shapley(table)
    costs = np.asarray(costs, dtype=float)
    psi = payments(phi, costs)
    return AllocationReport(list(table.players), phi, costs, psi, core_check(table, phi), table, lmp,
                            [(members(c, table.players), members(d, table.players))
                             for c, d in table.superadditivity_violations()])
