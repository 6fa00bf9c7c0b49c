"""Multi-area power system data model and its compilation to standard-form MILPs.

Sign convention: the tie-line parameter ``z`` of an area is the power the
area *exports* through that tie in a period (MW). A tie-line carries flow
``f`` from its ``from`` endpoint to its ``to`` endpoint, so the ``from`` area
exports ``f`` and the ``to`` area exports ``-f``; consensus reads
``z_from + z_to = 0``. Bus balance rows are ``generation - net line outflow
- export = demand``, so an export enters the right-hand side with sign +1.
"""

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .milp_core import EQ, GE, LE, MilpBuilder, ParamEntry, StandardMilp


class ModelError(ValueError):
    """Structural problem that prevents building a model."""


@dataclass
class Unit:
    id: str
    bus: str
    p_min: float
    p_max: float
    ramp_up: float
    ramp_down: float
    min_up: int = 1
    min_down: int = 1
    startup_cost: float = 0.0
    no_load_cost: float = 0.0
    marginal_cost: float = 0.0
    initial_on: bool = False
    initial_hours_in_state: int = 0

    @property
    def needs_startup_column(self) -> bool:
        # startups only matter if they cost money or enter a constraint
        return (self.startup_cost != 0.0 or self.min_up > 1 or self.min_down > 1
                or self.ramp_up < self.p_min or self.ramp_down < self.p_min)


@dataclass
class Bus:
    id: str
    demand: list[float]


@dataclass
class Line:
    id: str
    from_bus: str
    to_bus: str
    susceptance: float
    rating: float


@dataclass
class AreaSystem:
    id: str
    buses: list[Bus]
    units: list[Unit]
    lines: list[Line] = field(default_factory=list)
    reference_bus: str | None = None
    boundary_buses: list[str] = field(default_factory=list)
    reserve: list[float] | None = None

    @property
    def ref(self) -> str:
        return self.reference_bus if self.reference_bus is not None else self.buses[0].id

    def bus_ids(self) -> list[str]:
        return [b.id for b in self.buses]


@dataclass
class Endpoint:
    area: str
    bus: str


@dataclass
class TieLine:
    id: str
    from_end: Endpoint
    to_end: Endpoint
    z_min: list[float]
    z_max: list[float]

    def export_sign(self, area_id: str) -> float:
        if area_id == self.from_end.area:
            return 1.0
        if area_id == self.to_end.area:
            return -1.0
        raise KeyError(area_id)

    def endpoint(self, area_id: str) -> Endpoint:
        return self.from_end if self.export_sign(area_id) > 0 else self.to_end

    def export_bounds(self, area_id: str, t: int) -> tuple[float, float]:
        """Bounds on the area's export through this tie in period ``t`` (0-based)."""
        if self.export_sign(area_id) > 0:
            return self.z_min[t], self.z_max[t]
        return -self.z_max[t], -self.z_min[t]


@dataclass
class MultiAreaSystem:
    periods: int
    areas: list[AreaSystem]
    tielines: list[TieLine] = field(default_factory=list)

    def area(self, area_id: str) -> AreaSystem:
        for a in self.areas:
            if a.id == area_id:
                return a
        raise KeyError(area_id)

    def ties_of(self, area_id: str) -> list[TieLine]:
        return [t for t in self.tielines if area_id in (t.from_end.area, t.to_end.area)]


# --------------------------------------------------------------------- I/O

def _per_period(value, periods, name):
    if isinstance(value, (int, float)):
        return [float(value)] * periods
    value = [float(v) for v in value]
    if len(value) != periods:
        raise ModelError(f"{name}: expected {periods} values, got {len(value)}")
    return value


def system_from_dict(data: dict) -> MultiAreaSystem:
    T = int(data["periods"])
    areas = []
    for a in data["areas"]:
        buses = [Bus(str(b["id"]), _per_period(b.get("demand", 0.0), T, f"bus {b['id']} demand"))
                 for b in a["buses"]]
        units = []
        for u in a["units"]:
            kw = dict(u)
            kw["id"] = str(kw["id"])
            kw["bus"] = str(kw["bus"])
            kw["initial_on"] = bool(kw.get("initial_on", False))
            units.append(Unit(**kw))
        lines = [Line(str(ln["id"]), str(ln["from"]), str(ln["to"]), float(ln["susceptance"]),
                      float(ln["rating"])) for ln in a.get("lines", [])]
        reserve = a.get("reserve")
        areas.append(AreaSystem(
            id=str(a["id"]), buses=buses, units=units, lines=lines,
            reference_bus=str(a["reference_bus"]) if a.get("reference_bus") is not None else None,
            boundary_buses=[str(x) for x in a.get("boundary_buses", [])],
            reserve=_per_period(reserve, T, "reserve") if reserve is not None else None,
        ))
    ties = []
    for t in data.get("tielines", []):
        ties.append(TieLine(
            id=str(t["id"]),
            from_end=Endpoint(str(t["from"]["area"]), str(t["from"]["bus"])),
            to_end=Endpoint(str(t["to"]["area"]), str(t["to"]["bus"])),
            z_min=_per_period(t["z_min"], T, f"tie {t['id']} z_min"),
            z_max=_per_period(t["z_max"], T, f"tie {t['id']} z_max"),
        ))
    return MultiAreaSystem(T, areas, ties)


def system_to_dict(system: MultiAreaSystem) -> dict:
    areas = []
    for a in system.areas:
        d = {
            "id": a.id,
            "reference_bus": a.reference_bus,
            "buses": [{"id": b.id, "demand": list(b.demand)} for b in a.buses],
            "lines": [{"id": ln.id, "from": ln.from_bus, "to": ln.to_bus,
                       "susceptance": ln.susceptance, "rating": ln.rating} for ln in a.lines],
            "units": [asdict(u) for u in a.units],
        }
        if a.boundary_buses:
            d["boundary_buses"] = list(a.boundary_buses)
        if a.reserve is not None:
            d["reserve"] = list(a.reserve)
        areas.append(d)
    ties = [{"id": t.id, "from": asdict(t.from_end), "to": asdict(t.to_end),
             "z_min": list(t.z_min), "z_max": list(t.z_max)} for t in system.tielines]
    return {"periods": system.periods, "areas": areas, "tielines": ties}


def load_system(path) -> MultiAreaSystem:
    with open(path) as fh:
        return system_from_dict(json.load(fh))


def save_system(system: MultiAreaSystem, path) -> None:
    Path(path).write_text(json.dumps(system_to_dict(system), indent=2) + "\n")


def bundled_path(name: str = "two_area.json") -> Path:
    return Path(__file__).parent / "data" / name


# -------------------------------------------------------------- validation

@dataclass
class Diagnostic:
    level: str  # "error" or "warning"
    entity: str
    message: str

    def __str__(self):
        return f"{self.level}: {self.entity}: {self.message}"


def validate_instance(system: MultiAreaSystem) -> list[Diagnostic]:
    out: list[Diagnostic] = []
    T = system.periods
    if T < 1:
        out.append(Diagnostic("error", "system", "periods must be >= 1"))
        return out
    ids = [a.id for a in system.areas]
    if len(set(ids)) != len(ids):
        out.append(Diagnostic("error", "system", "duplicate area ids"))
    for a in system.areas:
        buses = set(a.bus_ids())
        if not buses:
            out.append(Diagnostic("error", f"area {a.id}", "no buses"))
            continue
        if a.ref not in buses:
            out.append(Diagnostic("error", f"area {a.id}", f"reference bus {a.ref} does not exist"))
        for b in a.buses:
            if any((not np.isfinite(d)) or d < 0 for d in b.demand):
                out.append(Diagnostic("error", f"bus {a.id}/{b.id}", "demand must be finite and >= 0"))
        for u in a.units:
            ent = f"unit {a.id}/{u.id}"
            if u.bus not in buses:
                out.append(Diagnostic("error", ent, f"unknown bus {u.bus}"))
            if not (0 <= u.p_min <= u.p_max):
                out.append(Diagnostic("error", ent, "requires 0 <= p_min <= p_max"))
            if u.ramp_up <= 0 or u.ramp_down <= 0:
                out.append(Diagnostic("error", ent, "ramp limits must be > 0"))
            if u.min_up < 1 or u.min_down < 1:
                out.append(Diagnostic("error", ent, "min_up and min_down must be >= 1"))
            if u.min_up > T or u.min_down > T:
                out.append(Diagnostic("warning", ent, "minimum up/down time exceeds horizon; clipped"))
        for ln in a.lines:
            ent = f"line {a.id}/{ln.id}"
            if ln.from_bus not in buses or ln.to_bus not in buses:
                out.append(Diagnostic("error", ent, "endpoint bus does not exist"))
            if ln.from_bus == ln.to_bus:
                out.append(Diagnostic("error", ent, "self loop"))
            if ln.susceptance == 0:
                out.append(Diagnostic("error", ent, "zero susceptance"))
            if ln.rating < 0:
                out.append(Diagnostic("error", ent, "negative rating"))
        if not _connected(a):
            out.append(Diagnostic("error", f"area {a.id}", "internal network is not connected"))
        if a.reserve is not None and len(a.reserve) != T:
            out.append(Diagnostic("error", f"area {a.id}", "reserve length differs from periods"))

    area_ids = set(ids)
    for tl in system.tielines:
        ent = f"tieline {tl.id}"
        for end in (tl.from_end, tl.to_end):
            if end.area not in area_ids:
                out.append(Diagnostic("error", ent, f"dangling endpoint: unknown area {end.area}"))
            elif end.bus not in system.area(end.area).bus_ids():
                out.append(Diagnostic("error", ent, f"dangling endpoint: unknown bus {end.area}/{end.bus}"))
            elif system.area(end.area).boundary_buses and end.bus not in system.area(end.area).boundary_buses:
                out.append(Diagnostic("error", ent, f"bus {end.area}/{end.bus} is not a declared boundary bus"))
        if tl.from_end.area == tl.to_end.area:
            out.append(Diagnostic("error", ent, "both endpoints in the same area"))
        if any(lo > hi for lo, hi in zip(tl.z_min, tl.z_max)):
            out.append(Diagnostic("error", ent, "z_min > z_max"))

    # capacity check per area and period, counting the best-case import
    for a in system.areas:
        cap = sum(u.p_max for u in a.units)
        for t in range(T):
            demand = sum(b.demand[t] for b in a.buses) + (a.reserve[t] if a.reserve else 0.0)
            imp = 0.0
            for tl in system.ties_of(a.id):
                try:
                    lo, _ = tl.export_bounds(a.id, t)
                    imp += max(0.0, -lo)
                except (KeyError, IndexError):
                    pass
            if demand > cap + imp + 1e-9:
                out.append(Diagnostic("warning", f"area {a.id}",
                                      f"period {t + 1}: demand {demand:g} MW exceeds capacity "
                                      f"{cap:g} MW plus import bound {imp:g} MW (infeasible)"))
    return out


def _connected(area: AreaSystem) -> bool:
    buses = area.bus_ids()
    if len(buses) <= 1:
        return True
    adj = {b: set() for b in buses}
    for ln in area.lines:
        if ln.from_bus in adj and ln.to_bus in adj:
            adj[ln.from_bus].add(ln.to_bus)
            adj[ln.to_bus].add(ln.from_bus)
    seen = {buses[0]}
    stack = [buses[0]]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(buses)


def _raise_on_errors(diags):
    errors = [d for d in diags if d.level == "error"]
    if errors:
        raise ModelError("; ".join(str(d) for d in errors))


# ------------------------------------------------------------- compilation

class _AreaBlock:
    """Adds one area's unit-commitment constraints to a builder."""

    def __init__(self, builder: MilpBuilder, area: AreaSystem, T: int, prefix: str = ""):
        self.b = builder
        self.area = area
        self.T = T
        self.prefix = prefix
        self.u, self.s, self.p = {}, {}, {}
        self.commitment = []
        self.balance_rows = {}

    def name(self, s):
        return f"{self.prefix}{s}"

    def add_binaries(self):
        for g in self.area.units:
            for t in range(self.T):
                self.u[g.id, t] = self.b.add_var(self.name(f"u[{g.id},{t + 1}]"), cost=g.no_load_cost, binary=True)
                if g.needs_startup_column:
                    self.s[g.id, t] = self.b.add_var(self.name(f"s[{g.id},{t + 1}]"), cost=g.startup_cost,
                                                     binary=True)

    def add_continuous(self):
        T = self.T
        for g in self.area.units:
            for t in range(T):
                self.p[g.id, t] = self.b.add_var(self.name(f"p[{g.id},{t + 1}]"), cost=g.marginal_cost)
        self.theta = {}
        for bus in self.area.buses:
            if bus.id == self.area.ref or not self.area.lines:
                continue
            for t in range(T):
                self.theta[bus.id, t] = self.b.add_var(self.name(f"theta[{bus.id},{t + 1}]"), lo=-np.inf)

    def add_unit_rows(self):
        b, T = self.b, self.T
        for g in self.area.units:
            for t in range(T):
                self.commitment.append((g.id, t))
            self._startup_rows(g)
            self._forced_initial(g)
            self._min_up_down(g)
            for t in range(T):
                u, p = self.u[g.id, t], self.p[g.id, t]
                b.add_row({p: 1.0, u: -g.p_max}, LE, 0.0, self.name(f"pmax[{g.id},{t + 1}]"))
                b.add_row({p: 1.0, u: -g.p_min}, GE, 0.0, self.name(f"pmin[{g.id},{t + 1}]"))
            self._ramping(g)

    def _startup_rows(self, g):
        if not g.needs_startup_column:
            return
        for t in range(self.T):
            coeffs = {self.s[g.id, t]: 1.0, self.u[g.id, t]: -1.0}
            rhs = 0.0
            if t > 0:
                coeffs[self.u[g.id, t - 1]] = 1.0
            else:
                rhs = -float(g.initial_on)
            self.b.add_row(coeffs, GE, rhs, self.name(f"startup[{g.id},{t + 1}]"))

    def _forced_initial(self, g):
        # initial_hours_in_state == 0 means the state has been held long enough
        h = g.initial_hours_in_state
        if h <= 0:
            return
        if g.initial_on:
            keep = min(self.T, max(0, g.min_up - h))
            val = 1.0
        else:
            keep = min(self.T, max(0, g.min_down - h))
            val = 0.0
        for t in range(keep):
            self.b.add_row({self.u[g.id, t]: 1.0}, EQ, val, self.name(f"init[{g.id},{t + 1}]"))

    def _min_up_down(self, g):
        if not g.needs_startup_column:
            return
        T = self.T
        if g.min_up > 1:
            for t in range(T):
                window = range(max(0, t - g.min_up + 1), t + 1)
                if len(window) < 2:
                    continue
                coeffs = {self.s[g.id, k]: 1.0 for k in window}
                coeffs[self.u[g.id, t]] = coeffs.get(self.u[g.id, t], 0.0) - 1.0
                self.b.add_row(coeffs, LE, 0.0, self.name(f"minup[{g.id},{t + 1}]"))
        if g.min_down > 1:
            for t in range(T):
                window = range(max(0, t - g.min_down + 1), t + 1)
                coeffs = {self.s[g.id, k]: 1.0 for k in window}
                past = t - g.min_down
                if past >= 0:
                    coeffs[self.u[g.id, past]] = 1.0
                    rhs = 1.0
                elif g.initial_hours_in_state <= 0 or -past <= g.initial_hours_in_state:
                    rhs = 1.0 - float(g.initial_on)
                else:
                    continue
                self.b.add_row(coeffs, LE, rhs, self.name(f"mindown[{g.id},{t + 1}]"))

    def _ramping(self, g):
        su_extra = max(g.ramp_up, g.p_min) - g.ramp_up
        sd_extra = max(g.ramp_down, g.p_min) - g.ramp_down
        for t in range(1, self.T):
            p_now, p_prev = self.p[g.id, t], self.p[g.id, t - 1]
            up = {p_now: 1.0, p_prev: -1.0}
            if su_extra > 0:
                up[self.s[g.id, t]] = -su_extra
            self.b.add_row(up, LE, g.ramp_up, self.name(f"rampup[{g.id},{t + 1}]"))
            down = {p_prev: 1.0, p_now: -1.0}
            if sd_extra > 0:
                # shutdown indicator s_t - u_t + u_{t-1}
                down[self.s[g.id, t]] = -sd_extra
                down[self.u[g.id, t]] = down.get(self.u[g.id, t], 0.0) + sd_extra
                down[self.u[g.id, t - 1]] = down.get(self.u[g.id, t - 1], 0.0) - sd_extra
            self.b.add_row(down, LE, g.ramp_down, self.name(f"rampdown[{g.id},{t + 1}]"))

    def add_network_rows(self, export_at):
        """Balance, line-limit and reserve rows.

        ``export_at(bus_id, t)`` returns a list of ``(tie_id, var_index_or_None)``
        for exports at that bus; ``None`` marks a right-hand-side parameter.
        Returns the parameter entries created.
        """
        b, T, area = self.b, self.T, self.area
        params = []
        for t in range(T):
            for bus in area.buses:
                coeffs = {}
                for g in area.units:
                    if g.bus == bus.id:
                        coeffs[self.p[g.id, t]] = 1.0
                for ln in area.lines:
                    if bus.id not in (ln.from_bus, ln.to_bus):
                        continue
                    # outflow b*(theta_from - theta_to) leaves the from bus
                    sgn = -1.0 if bus.id == ln.from_bus else 1.0
                    for end, s in ((ln.from_bus, 1.0), (ln.to_bus, -1.0)):
                        if (end, t) in self.theta:
                            j = self.theta[end, t]
                            coeffs[j] = coeffs.get(j, 0.0) + sgn * s * ln.susceptance
                param_ties = []
                for tie_id, var in export_at(bus.id, t):
                    if var is None:
                        param_ties.append(tie_id)
                    else:
                        coeffs[var] = coeffs.get(var, 0.0) - 1.0
                row = b.add_row(coeffs, EQ, bus.demand[t], self.name(f"balance[{bus.id},{t + 1}]"))
                self.balance_rows[bus.id, t] = row
                for tie_id in param_ties:
                    params.append(ParamEntry(row, tie_id, t + 1, 1.0))
            for ln in area.lines:
                coeffs = {}
                for end, s in ((ln.from_bus, 1.0), (ln.to_bus, -1.0)):
                    if (end, t) in self.theta:
                        coeffs[self.theta[end, t]] = s * ln.susceptance
                if not coeffs:
                    continue
                b.add_row(coeffs, LE, ln.rating, self.name(f"flowmax[{ln.id},{t + 1}]"))
                b.add_row(coeffs, GE, -ln.rating, self.name(f"flowmin[{ln.id},{t + 1}]"))
            if area.reserve is not None and area.reserve[t] > 0:
                coeffs = {}
                for g in area.units:
                    coeffs[self.u[g.id, t]] = g.p_max
                    coeffs[self.p[g.id, t]] = -1.0
                b.add_row(coeffs, GE, area.reserve[t], self.name(f"reserve[{t + 1}]"))
        return params

    def commitment_triples(self):
        triples = []
        for g in self.area.units:
            for t in range(self.T):
                triples.append((self.u[g.id, t], self.s.get((g.id, t), -1),
                                self.u[g.id, t - 1] if t > 0 else -1, g.initial_on))
        return triples


def builder_to_standard(builder: MilpBuilder, params=(), commitment=()) -> StandardMilp:
    """Equality form with binaries first and nonnegative continuous columns.

    Inequalities get slack columns; continuous variables that are free are
    split into positive and negative parts; finite nonzero bounds on
    continuous variables become extra rows.
    """
    vars_ = builder.vars
    bin_idx = [j for j, v in enumerate(vars_) if v.binary]
    bin_pos = {j: k for k, j in enumerate(bin_idx)}
    extra_rows = []
    cont_cols = []  # (name, cost, [(var, sign)])
    col_of = {}
    for j, v in enumerate(vars_):
        if v.binary:
            continue
        if v.lo == 0.0:
            col_of[j] = [(len(cont_cols), 1.0)]
            cont_cols.append((v.name, v.cost))
        else:
            col_of[j] = [(len(cont_cols), 1.0), (len(cont_cols) + 1, -1.0)]
            cont_cols.append((v.name + "+", v.cost))
            cont_cols.append((v.name + "-", -v.cost))
            if np.isfinite(v.lo):
                extra_rows.append(({j: 1.0}, GE, v.lo, f"lb[{v.name}]"))
        if np.isfinite(v.hi):
            extra_rows.append(({j: 1.0}, LE, v.hi, f"ub[{v.name}]"))
    rows = list(builder.rows) + extra_rows
    n_slack = sum(1 for r in rows if r[1] != EQ)
    r = len(rows)
    A_I = np.zeros((r, len(bin_idx)))
    A_C = np.zeros((r, len(cont_cols) + n_slack))
    rhs = np.zeros(r)
    names = []
    k = len(cont_cols)
    cont_names = [c[0] for c in cont_cols]
    for i, (coeffs, sense, val, name) in enumerate(rows):
        for j, a in coeffs.items():
            if j in bin_pos:
                A_I[i, bin_pos[j]] += a
            else:
                for col, s in col_of[j]:
                    A_C[i, col] += s * a
        if sense != EQ:
            A_C[i, k] = 1.0 if sense == LE else -1.0
            cont_names.append(f"slack[{name or i}]")
            k += 1
        rhs[i] = val
        names.append(name)
    c_I = np.array([vars_[j].cost for j in bin_idx])
    c_C = np.concatenate([np.array([c[1] for c in cont_cols]), np.zeros(n_slack)])
    commit = [(bin_pos[u], bin_pos.get(s, -1) if s >= 0 else -1, bin_pos[p] if p >= 0 else -1, init)
              for u, s, p, init in commitment]
    return StandardMilp(c_I=c_I, c_C=c_C, A_I=A_I, A_C=A_C, base_rhs=rhs, params=list(params),
                        binary_names=[vars_[j].name for j in bin_idx], continuous_names=cont_names,
                        row_names=names, commitment=commit)


def build_area_milp(area: AreaSystem, tielines, periods: int) -> StandardMilp:
    """Standard-form SCUC of one area with tie-line exports as rhs parameters.

    Parameters are ordered by tie-line (input order) then period.
    """
    system = MultiAreaSystem(periods, [area], [])
    diags = [d for d in validate_instance(system) if d.level == "error"]
    for tl in tielines:
        end = tl.endpoint(area.id)
        if end.bus not in area.bus_ids():
            diags.append(Diagnostic("error", f"tieline {tl.id}", f"unknown boundary bus {end.bus}"))
    _raise_on_errors(diags)
    builder = MilpBuilder()
    block = _AreaBlock(builder, area, periods)
    block.add_binaries()
    block.add_continuous()
    block.add_unit_rows()

    def export_at(bus_id, t):
        return [(tl.id, None) for tl in tielines if tl.endpoint(area.id).bus == bus_id]

    params = block.add_network_rows(export_at)
    order = {tl.id: k for k, tl in enumerate(tielines)}
    params.sort(key=lambda p: (order[p.tie], p.period))
    milp = builder_to_standard(builder, params, block.commitment_triples())
    return milp


def area_milp(system: MultiAreaSystem, area_id: str) -> StandardMilp:
    return build_area_milp(system.area(area_id), system.ties_of(area_id), system.periods)


def area_domain(system: MultiAreaSystem, area_id: str):
    """``(keys, lo, hi)`` of the export box, ordered like the area MILP parameters."""
    keys, lo, hi = [], [], []
    for tl in system.ties_of(area_id):
        for t in range(system.periods):
            a, b = tl.export_bounds(area_id, t)
            keys.append((tl.id, t + 1))
            lo.append(a)
            hi.append(b)
    return keys, np.array(lo, dtype=float), np.array(hi, dtype=float)


@dataclass
class CentralizedModel:
    milp: StandardMilp
    # (area, tie, period) -> index into the builder variables of the export
    export_vars: dict
    # (area, bus, period) -> row index of the bus balance
    balance_rows: dict
    consensus_rows: list[int]
    # (tie, period) -> (continuous columns of the from-area export split)
    export_columns: dict


def build_centralized_milp(system: MultiAreaSystem) -> CentralizedModel:
    """Joint MILP of all areas with explicit per-area exports and consensus rows."""
    if not system.areas:
        raise ModelError("at least one area is required")
    _raise_on_errors(validate_instance(system))
    builder = MilpBuilder()
    blocks = []
    for a in system.areas:
        blk = _AreaBlock(builder, a, system.periods, prefix=f"{a.id}:")
        blk.add_binaries()
        blocks.append(blk)
    for blk in blocks:
        blk.add_continuous()
    export_vars = {}
    for tl in system.tielines:
        for t in range(system.periods):
            for end in (tl.from_end, tl.to_end):
                export_vars[end.area, tl.id, t] = builder.add_var(f"z[{end.area},{tl.id},{t + 1}]",
                                                                  lo=-np.inf)
    commitment = []
    balance = {}
    for blk in blocks:
        blk.add_unit_rows()
        aid = blk.area.id

        def export_at(bus_id, t, aid=aid):
            return [(tl.id, export_vars[aid, tl.id, t]) for tl in system.ties_of(aid)
                    if tl.endpoint(aid).bus == bus_id]

        blk.add_network_rows(export_at)
        commitment.extend(blk.commitment_triples())
        for (bus, t), row in blk.balance_rows.items():
            balance[aid, bus, t] = row
    consensus = []
    for tl in system.tielines:
        for t in range(system.periods):
            zf = export_vars[tl.from_end.area, tl.id, t]
            zt = export_vars[tl.to_end.area, tl.id, t]
            consensus.append(builder.add_row({zf: 1.0, zt: 1.0}, EQ, 0.0, f"consensus[{tl.id},{t + 1}]"))
            for end in (tl.from_end, tl.to_end):
                lo, hi = tl.export_bounds(end.area, t)
                j = export_vars[end.area, tl.id, t]
                builder.add_row({j: 1.0}, GE, lo, f"zmin[{end.area},{tl.id},{t + 1}]")
                builder.add_row({j: 1.0}, LE, hi, f"zmax[{end.area},{tl.id},{t + 1}]")
    milp = builder_to_standard(builder, (), commitment)
    export_columns = {}
    for tl in system.tielines:
        for t in range(system.periods):
            name = f"z[{tl.from_end.area},{tl.id},{t + 1}]"
            export_columns[tl.id, t] = (milp.continuous_names.index(name + "+"),
                                        milp.continuous_names.index(name + "-"))
    return CentralizedModel(milp, export_vars, balance, consensus, export_columns)
