from dataclasses import dataclass


@dataclass(frozen=True)
class SolverConfig:
    """Tolerances and limits shared by the LP and branch-and-bound engines."""

    feas_tol: float = 1e-8
    int_tol: float = 1e-6
    rel_gap: float = 0.0
    pivot_tol: float = 1e-10
    max_rows: int = 5000
    max_binaries: int = 200
    node_limit: int = 20000
    max_iter: int = 50000
    # LP backend used inside branch-and-bound: "simplex" (built-in) or "highs"
    lp_backend: str = "simplex"
    # "bnb" (built-in branch-and-bound) or "highs" (scipy's HiGHS branch-and-cut)
    mip_backend: str = "bnb"


DEFAULT_CONFIG = SolverConfig()
