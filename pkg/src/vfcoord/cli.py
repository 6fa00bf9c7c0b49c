"""Command-line front end: ``vfcoord validate|solve|vf|allocate|corpus``."""

import csv
import json
import logging
import sys
import time
from dataclasses import asdict, dataclass, fields
from pathlib import Path

import click
import numpy as np

from . import plotting
from .coordinator import (CoordinationInfeasible, relative_gap, solve_centralized, solve_coordinated,
                          solve_islanded, write_schedule_csv)
from .game import (MAX_PLAYERS, CoalitionWorthTable, GameError, allocate, characteristic_values, lmp_payments)
from .harness import GeneratorConfig, enumerate_commitments, write_corpus
from .milp_core import SolverConfig
from .model import ModelError, area_domain, area_milp, load_system, validate_instance
from .value_function import (UcSolutionSet, VfConfig, construct_vf, entry_curves, sweep_vf_1d)

log = logging.getLogger("vfcoord")


@dataclass
class RunConfig:
    """Resolved settings of one command; echoed into every report."""

    input: str | None = None
    command: str = ""
    out: str = "out"
    format: str = "json"
    # solver
    feas_tol: float = 1e-8
    int_tol: float = 1e-6
    node_limit: int = 20000
    lp_backend: str = "simplex"
    # value-function construction
    method: str = "algorithm"
    K: int = 50
    epsilon: float | None = None
    big_m: float | None = None
    partitions: int = 4
    max_partitions: int = 16
    seeds_file: str | None = None

    @classmethod
    def from_mapping(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise click.UsageError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    def solver(self) -> SolverConfig:
        return SolverConfig(feas_tol=self.feas_tol, int_tol=self.int_tol, node_limit=self.node_limit,
                            lp_backend=self.lp_backend, max_binaries=5000, max_rows=100000)

    def vf(self) -> VfConfig:
        seeds = []
        if self.seeds_file:
            with open(self.seeds_file) as fh:
                seeds = [np.array(x, dtype=float) for x in json.load(fh)]
        return VfConfig(K=self.K, epsilon=self.epsilon, big_m=self.big_m, partitions=self.partitions,
                        max_partitions=self.max_partitions, seeds=seeds, solver=self.solver())


def _resolve(ctx, command, **overrides) -> RunConfig:
    base = dict(ctx.obj.get("file_config", {}))
    base.update({k: v for k, v in overrides.items() if v is not None})
    base["command"] = command
    cfg = RunConfig.from_mapping(base)
    if cfg.format not in ("json", "csv"):
        raise click.UsageError("format must be json or csv")
    Path(cfg.out).mkdir(parents=True, exist_ok=True)
    return cfg


def _load(path):
    try:
        return load_system(path)
    except (OSError, json.JSONDecodeError) as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(2)
    except (ModelError, KeyError, TypeError, ValueError) as exc:
        click.echo(f"error: malformed instance {path}: {exc}", err=True)
        sys.exit(1)


def k(value) -> str:
    """Money in k$ with two decimals."""
    return "inf" if not np.isfinite(value) else f"{value / 1e3:.2f}"


def _write_json(path, data):
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    raise TypeError(type(o).__name__)


def _vf_path(vf_dir, area):
    return Path(vf_dir) / f"vf_{area}.json"


def _load_sets(system, vf_dir):
    sets = {}
    for a in system.areas:
        p = _vf_path(vf_dir, a.id)
        if not p.exists():
            raise click.ClickException(f"no value-function file {p}; run `vfcoord vf build <instance> "
                                       f"--out {vf_dir}` first (or pass --build-vf)")
        sets[a.id] = UcSolutionSet.load(p)
    return sets


def _build_sets(system, cfg: RunConfig, areas=None, only=None):
    sets = {}
    for a in system.areas:
        if areas and a.id not in areas:
            continue
        milp = area_milp(system, a.id)
        keys, lo, hi = area_domain(system, a.id)
        if only is not None:
            if only not in keys:
                raise click.ClickException(f"area {a.id} has no export {only[0]}:{only[1]}")
            j = keys.index(only)
            fixed = np.clip(0.0, lo, hi)
            lo, hi = np.where(np.arange(len(keys)) == j, lo, fixed), np.where(np.arange(len(keys)) == j, hi, fixed)
        t0 = time.perf_counter()
        if cfg.method == "enumerate":
            s = UcSolutionSet(a.id, keys, lo, hi)
            for x in enumerate_commitments(milp, lo, hi):
                s.add(milp, x)
            s.log = {"method": "enumerate", "entries": len(s)}
        elif cfg.method == "algorithm":
            s = construct_vf(milp, lo, hi, cfg.vf(), a.id)
        else:
            raise click.UsageError("method must be algorithm or enumerate")
        s.log["runtime"] = time.perf_counter() - t0
        sets[a.id] = s
    return sets


@click.group()
@click.option("--config", "config_file", type=click.Path(dir_okay=False), help="JSON file with RunConfig keys.")
@click.option("--log-level", default="WARNING", show_default=True)
@click.pass_context
def main(ctx, config_file, log_level):
    """Multi-area unit commitment coordinated through value functions."""
    logging.basicConfig(level=log_level.upper(), format="%(levelname)s %(name)s: %(message)s")
    ctx.ensure_object(dict)
    if config_file:
        try:
            with open(config_file) as fh:
                ctx.obj["file_config"] = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: cannot read config {config_file}: {exc}", err=True)
            sys.exit(2)
        RunConfig.from_mapping(ctx.obj["file_config"])


@main.command()
@click.argument("path")
def validate(path):
    """Check an instance file; exit 0 when no errors are found."""
    system = _load(path)
    diags = validate_instance(system)
    for d in diags:
        click.echo(str(d))
    errors = [d for d in diags if d.level == "error"]
    click.echo(f"{len(errors)} error(s), {len(diags) - len(errors)} warning(s)")
    sys.exit(1 if errors else 0)


_solver_options = [
    click.option("--out", default=None, help="Output directory."),
    click.option("--format", "fmt", default=None, help="Report format: json or csv."),
    click.option("--lp-backend", default=None, help="simplex (built-in) or highs."),
    click.option("--node-limit", type=int, default=None),
]

_vf_options = [
    click.option("--method", default=None, help="algorithm (separation loop) or enumerate (all commitments)."),
    click.option("--K", "K", type=int, default=None, help="Cap on entries per area."),
    click.option("--epsilon", type=float, default=None),
    click.option("--big-m", type=float, default=None),
    click.option("--partitions", type=int, default=None),
    click.option("--max-partitions", type=int, default=None,
                 help="Cap on uniform segments when refining several varying exports."),
    click.option("--seeds-file", default=None, help="JSON list of commitment vectors to start from."),
]


def _apply(options):
    def deco(f):
        for opt in reversed(options):
            f = opt(f)
        return f
    return deco


def _mode_row(mode, costs, runtime, extra=None):
    row = {"mode": mode, "costs": costs, "joint_cost": float(sum(costs.values())), "runtime": runtime}
    row.update(extra or {})
    return row


@main.command()
@click.argument("path")
@click.option("--mode", type=click.Choice(["centralized", "islanded", "coordinated", "all"]), default="all",
              show_default=True)
@click.option("--vf-dir", default=None, help="Directory holding vf_<area>.json (defaults to --out).")
@click.option("--build-vf", is_flag=True, help="Build the value functions first.")
@click.option("--gap-curve", is_flag=True, help="Also report the gap for every truncation of the sets.")
@_apply(_solver_options + _vf_options)
@click.pass_context
def solve(ctx, path, mode, vf_dir, build_vf, gap_curve, out, fmt, lp_backend, node_limit, method, K, epsilon,
          big_m, partitions, max_partitions, seeds_file):
    """Schedule the system centralized, islanded and/or coordinated."""
    cfg = _resolve(ctx, "solve", input=path, out=out, format=fmt, lp_backend=lp_backend, node_limit=node_limit,
                   method=method, K=K, epsilon=epsilon, big_m=big_m, partitions=partitions,
                   max_partitions=max_partitions, seeds_file=seeds_file)
    system = _load(path)
    solver = cfg.solver()
    vf_dir = vf_dir or cfg.out
    rows, report = [], {"config": asdict(cfg)}
    centralized = None
    if mode in ("centralized", "all") or gap_curve:
        t0 = time.perf_counter()
        centralized = solve_centralized(system, solver)
        if not np.isfinite(centralized.objective):
            raise click.ClickException(f"centralized problem ended with status {centralized.status.value}")
        row = _mode_row("centralized", centralized.costs, time.perf_counter() - t0,
                        {"status": centralized.status.value})
        rows.append(row)
    if mode in ("islanded", "all"):
        t0 = time.perf_counter()
        rows.append(_mode_row("islanded", solve_islanded(system, solver), time.perf_counter() - t0))
    if mode in ("coordinated", "all"):
        if build_vf:
            Path(vf_dir).mkdir(parents=True, exist_ok=True)
            for a, s in _build_sets(system, cfg).items():
                s.save(_vf_path(vf_dir, a))
        sets = _load_sets(system, vf_dir)
        milps = {a.id: area_milp(system, a.id) for a in system.areas}
        t0 = time.perf_counter()
        try:
            res = solve_coordinated(sets, milps, system, config=solver)
        except CoordinationInfeasible as exc:
            raise click.ClickException(str(exc))
        rows.append(_mode_row("coordinated", res.costs, time.perf_counter() - t0,
                              {"selection": res.selection, "consensus_residual": res.consensus_residual,
                               "cross_check": res.meta.get("cross_check")}))
        write_schedule_csv(res, Path(cfg.out) / "schedule.csv")
        report["schedule"] = res.to_dict()["schedule"]
        if gap_curve:
            report["gap_curve"] = _gap_curve(system, sets, milps, centralized, solver, cfg.out)
    if centralized is not None:
        ref = centralized.objective
        for row in rows:
            row["gap"] = relative_gap(row["joint_cost"], ref)
    report["modes"] = rows
    _emit_solve(rows, report, cfg, system)


def _gap_curve(system, sets, milps, centralized, solver, out):
    largest = max(len(s) for s in sets.values())
    sizes, gaps = [], []
    for n in range(1, largest + 1):
        trunc = {a: s.truncated(n) for a, s in sets.items()}
        try:
            val = solve_coordinated(trunc, milps, system, config=solver, check=False).joint_cost
        except CoordinationInfeasible:
            val = float("inf")
        sizes.append(n)
        gaps.append(relative_gap(val, centralized.objective))
    with open(Path(out) / "gap_curve.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["entries", "gap"])
        for n, g in zip(sizes, gaps):
            w.writerow([n, "inf" if not np.isfinite(g) else repr(g)])
    plotting.plot_gap_curve(sizes, gaps, Path(out) / "gap_curve.png", "gap against entries kept per area")
    return [{"entries": n, "gap": g} for n, g in zip(sizes, gaps)]


def _emit_solve(rows, report, cfg, system):
    areas = [a.id for a in system.areas]
    header = ["mode"] + [f"area {a} (k$)" for a in areas] + ["joint (k$)", "gap (%)", "runtime (s)"]
    table = []
    for r in rows:
        gap = r.get("gap")
        table.append([r["mode"]] + [k(r["costs"][a]) for a in areas] + [k(r["joint_cost"]),
                     "" if gap is None else ("inf" if not np.isfinite(gap) else f"{100 * gap:.2f}"),
                     f"{r['runtime']:.2f}"])
    out = Path(cfg.out)
    if cfg.format == "csv":
        with open(out / "report.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(table)
    else:
        for r in rows:
            r["costs_k$"] = {a: round(v / 1e3, 2) for a, v in r["costs"].items()}
            r["joint_cost_k$"] = round(r["joint_cost"] / 1e3, 2)
        _write_json(out / "report.json", report)
    plotting.plot_costs([r for r in rows if np.isfinite(r["joint_cost"])], out / "costs.png")
    click.echo(json.dumps({"config": report["config"]}))
    click.echo("\t".join(header))
    for t in table:
        click.echo("\t".join(t))


@main.group()
def vf():
    """Build or sweep value functions."""


@vf.command("build")
@click.argument("path")
@click.option("--area", "areas", multiple=True, help="Restrict to these areas (repeatable).")
@click.option("--only", default=None, help="TIE:PERIOD - vary only this export, others held at 0.")
@_apply(_solver_options[:1] + _solver_options[2:] + _vf_options)
@click.pass_context
def vf_build(ctx, path, areas, only, out, lp_backend, node_limit, method, K, epsilon, big_m, partitions,
             max_partitions, seeds_file):
    """Construct commitment sets and write vf_<area>.json files."""
    cfg = _resolve(ctx, "vf build", input=path, out=out, lp_backend=lp_backend, node_limit=node_limit,
                   method=method, K=K, epsilon=epsilon, big_m=big_m, partitions=partitions,
                   max_partitions=max_partitions, seeds_file=seeds_file)
    system = _load(path)
    key = None
    if only:
        tie, _, period = only.partition(":")
        key = (tie, int(period))
    sets = _build_sets(system, cfg, set(areas), key)
    for a, s in sets.items():
        s.log["config"] = asdict(cfg)
        p = _vf_path(cfg.out, a)
        s.save(p)
        click.echo(f"area {a}: {len(s)} entries ({s.log.get('terminated_by', cfg.method)}) -> {p}")


@vf.command("sweep")
@click.argument("path")
@click.option("--vf-dir", required=True)
@click.option("--area", required=True)
@click.option("--tie", required=True)
@click.option("--period", type=int, required=True)
@click.option("--points", type=int, default=101, show_default=True)
@click.option("--out", default=None)
@click.pass_context
def vf_sweep(ctx, path, vf_dir, area, tie, period, points, out):
    """Evaluate a built set along one export; writes CSV and a figure."""
    cfg = _resolve(ctx, "vf sweep", input=path, out=out)
    system = _load(path)
    p = _vf_path(vf_dir, area)
    if not p.exists():
        raise click.ClickException(f"no value-function file {p}; run `vfcoord vf build` first")
    s = UcSolutionSet.load(p)
    milp = area_milp(system, area)
    if (tie, period) not in s.keys:
        raise click.ClickException(f"area {area} has no export {tie}:{period}")
    comp = s.keys.index((tie, period))
    sw = sweep_vf_1d(s, milp, comp, points, config=cfg.solver())
    stem = Path(cfg.out) / f"sweep_{area}_{tie}_{period}"
    sw.write_csv(stem.with_suffix(".csv"))
    if s.hi[comp] > s.lo[comp]:
        grid = np.linspace(s.lo[comp], s.hi[comp], points)
        curves = entry_curves(s, milp, comp, grid, config=cfg.solver())
        plotting.plot_sweep(sw, stem.with_suffix(".png"), curves, grid, f"area {area}")
    _write_json(stem.with_suffix(".json"), {"config": asdict(cfg), "changes": sw.changes})
    click.echo(f"{len(sw.z)} rows, {len(sw.changes)} located changes -> {stem.with_suffix('.csv')}")


@main.command("allocate")
@click.argument("path", required=False)
@click.option("--vf-dir", default=None)
@click.option("--worths-file", default=None, help="JSON worth table (and costs) instead of solving coalitions.")
@click.option("--no-lmp", is_flag=True, help="Skip the LMP settlement comparison.")
@_apply(_solver_options[:3])
@click.pass_context
def allocate_cmd(ctx, path, vf_dir, worths_file, no_lmp, out, fmt, lp_backend):
    """Shapley payoffs, payments and stability checks of the savings game."""
    cfg = _resolve(ctx, "allocate", input=path, out=out, format=fmt, lp_backend=lp_backend)
    solver = cfg.solver()
    lmp = None
    if worths_file:
        try:
            with open(worths_file) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            click.echo(f"error: cannot read {worths_file}: {exc}", err=True)
            sys.exit(2)
        scale = 1e3 if data.get("unit", "$") == "k$" else 1.0
        table = CoalitionWorthTable.from_dict(data, scale)
        costs = [float(data["costs"][p]) * scale for p in table.players]
    else:
        if path is None:
            raise click.UsageError("an instance path is required unless --worths-file is given")
        system = _load(path)
        if len(system.areas) > MAX_PLAYERS:
            raise click.ClickException(f"{len(system.areas)} areas would need 2^{len(system.areas)} coalition "
                                       f"solves; allocation is limited to {MAX_PLAYERS} areas")
        sets = _load_sets(system, vf_dir or cfg.out)
        milps = {a.id: area_milp(system, a.id) for a in system.areas}
        table = characteristic_values(sets, milps, system, solver)
        grand = solve_coordinated(sets, milps, system, config=solver)
        costs = [grand.costs[p] for p in table.players]
        if not no_lmp:
            lmp = lmp_payments(system, solve_centralized(system, solver), solver)
    try:
        rep = allocate(table, costs, lmp)
    except GameError as exc:
        raise click.ClickException(str(exc))
    _emit_allocation(rep, cfg)


def _emit_allocation(rep, cfg):
    out = Path(cfg.out)
    header = ["area", "payoff (k$)", "cost (k$)", "payment (k$)"] + (["LMP payment (k$)"] if rep.lmp else [])
    table = []
    for i, a in enumerate(rep.players):
        row = [a, k(rep.payoff[i]), k(rep.cost[i]), k(rep.payment[i])]
        if rep.lmp:
            row.append(k(rep.lmp.payments[a]))
        table.append(row)
    if cfg.format == "csv":
        with open(out / "allocation.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(table)
    else:
        data = rep.to_dict()
        data["config"] = asdict(cfg)
        for row in data["areas"]:
            for f in ("payoff", "cost", "payment"):
                row[f + "_k$"] = round(row[f] / 1e3, 2)
        _write_json(out / "allocation.json", data)
    plotting.plot_payments(rep, out / "payments.png")
    click.echo(json.dumps({"config": asdict(cfg)}))
    click.echo("\t".join(header))
    for t in table:
        click.echo("\t".join(t))
    click.echo(f"sum of payments: {k(rep.payment.sum())} k$; core violations: {rep.core_violations or 'none'}")
    if rep.lmp:
        click.echo(f"LMP settlement convention: {rep.lmp.convention}")
        for w in rep.lmp.warnings:
            click.echo(f"warning: {w}")


@main.group()
def corpus():
    """Random instance corpora."""


def _parse_seeds(text):
    seeds = []
    for part in text.split(","):
        a, _, b = part.partition("-")
        seeds.extend(range(int(a), int(b) + 1) if b else [int(a)])
    return seeds


@corpus.command("generate")
@click.option("--out", required=True)
@click.option("--seeds", default="1-20", show_default=True, help="e.g. 1-20 or 3,5,8")
@click.option("--areas", type=int, default=2, show_default=True)
@click.option("--units", type=int, default=2, show_default=True)
@click.option("--buses", type=int, default=2, show_default=True)
@click.option("--periods", type=int, default=2, show_default=True)
@click.option("--tielines", type=int, default=1, show_default=True)
@click.option("--load-factor", type=float, default=0.6, show_default=True)
@click.option("--with-expected", is_flag=True, help="Also write expected.json with reference costs.")
def corpus_generate(out, seeds, areas, units, buses, periods, tielines, load_factor, with_expected):
    """Write <out>/<seed>/system.json for every seed."""
    cfg = GeneratorConfig(areas=areas, units=units, buses=buses, periods=periods, tielines=tielines,
                          load_factor=load_factor)
    paths = write_corpus(out, _parse_seeds(seeds), cfg, with_expected)
    click.echo(f"{len(paths)} instances under {out}")


if __name__ == "__main__":
    main()
