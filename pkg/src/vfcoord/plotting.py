"""Report figures written to files (Agg backend, no display needed)."""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_sweep(sweep, path, curves=None, curve_z=None, title=""):
    """Value function along one export, with the per-entry curves underneath when given."""
    fig, ax = plt.subplots(figsize=(7, 4.2))
    if curves is not None:
        for i, row in enumerate(curves):
            ok = np.isfinite(row)
            if ok.any():
                ax.plot(np.asarray(curve_z)[ok], row[ok] / 1e3, lw=0.8, alpha=0.6, ls="--", label=f"entry {i}", zorder=3)
    ok = np.isfinite(sweep.value)
    ax.plot(sweep.z[ok], sweep.value[ok] / 1e3, color="k", lw=2.2, label="value function", zorder=2)
    for a, b in sweep.changes:
        ax.axvline(0.5 * (a + b), color="0.7", lw=0.5)
    ax.set_xlabel(f"export on {sweep.key[0]}, period {sweep.key[1]} (MW)")
    ax.set_ylabel("cost (k$)")
    ax.set_title(title)
    if curves is not None and len(curves) <= 12:
        ax.legend(fontsize=7)
    return _save(fig, path)


def plot_gap_curve(sizes, gaps, path, title=""):
    """Relative optimality gap against the number of entries kept per area."""
    fig, ax = plt.subplots(figsize=(6, 4))
    g = np.asarray(gaps, dtype=float)
    ok = np.isfinite(g)
    ax.plot(np.asarray(sizes)[ok], 100 * g[ok], marker="o")
    ax.set_xlabel("entries per area")
    ax.set_ylabel("gap (%)")
    ax.set_title(title)
    return _save(fig, path)


def plot_payments(report, path):
    """Payoff, cost and payment per area, plus the LMP settlement when present."""
    areas = report.players
    x = np.arange(len(areas))
    series = [("payoff", report.payoff), ("cost", report.cost), ("payment", report.payment)]
    if report.lmp is not None:
        series.append(("LMP payment", np.array([report.lmp.payments[a] for a in areas])))
    w = 0.8 / len(series)
    fig, ax = plt.subplots(figsize=(7, 4))
    for k, (name, vals) in enumerate(series):
        ax.bar(x + (k - (len(series) - 1) / 2) * w, np.asarray(vals) / 1e3, w, label=name)
    ax.axhline(0, color="k", lw=0.6)
    ax.set_xticks(x, [f"area {a}" for a in areas])
    ax.set_ylabel("k$")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_costs(rows, path):
    """Joint cost by scheduling mode."""
    fig, ax = plt.subplots(figsize=(6, 4))
    names = [r["mode"] for r in rows]
    vals = [r["joint_cost"] / 1e3 for r in rows]
    ax.bar(names, vals, color=["C0", "C1", "C2"][:len(rows)])
    ax.set_ylabel("joint cost (k$)")
    if vals:
        lo = min(vals)
        ax.set_ylim(lo - 0.05 * abs(lo) - 1e-9, max(vals) + 0.05 * abs(lo) + 1e-9)
    return _save(fig, path)
