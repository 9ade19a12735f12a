"""Backends for the lowered standard form: clarabel, cvxopt, scipy-HiGHS.

The contract is solve_lowered(lowered, backend, **options) -> Solution with
status in {optimal, near_optimal, infeasible, failed}; a backend failure is
reported in the status, never as a silent number.  Default tolerances are
1e-8 feasibility / 1e-8 gap.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .lowering import LoweredProgram
from .model import Solution
from . import sparse_ops as so

__all__ = ["solve_lowered", "BACKENDS"]

DEFAULT_FEAS_TOL = 1e-8
DEFAULT_GAP_TOL = 1e-8


def solve_lowered(lowered: LoweredProgram, backend: str = "auto",
                  **options) -> Solution:
    if backend == "auto":
        return _solve_auto(lowered, **options)
    try:
        fn = BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown backend {backend!r}; have "
                         f"{sorted(BACKENDS) + ['auto']}")
    try:
        return fn(lowered, **options)
    except Exception as exc:  # surface, never silently return a number
        return Solution(status="failed", value=None, x=None,
                        solver_stats={"error": f"{type(exc).__name__}: {exc}"})


_AUTO_CHAIN = (
    ("clarabel", {}),
    ("clarabel", {"equilibrate": False}),
    ("cvxopt", {}),
)


def _solve_auto(lowered: LoweredProgram, **options) -> Solution:
    """Try the PSD-capable backends in order; first optimal answer wins.

    Pure LPs go straight to HiGHS.  A near-optimal answer is kept as a
    fallback while more accurate attempts are made.
    """
    if not lowered.psd_blocks:
        sol = solve_lowered(lowered, "scipy-highs", **options)
        if sol.status == "optimal":
            return sol
    best = None
    for name, extra in _AUTO_CHAIN:
        sol = solve_lowered(lowered, name, **{**options, **extra})
        sol.solver_stats["backend"] = name
        if sol.status == "optimal":
            return sol
        if sol.status == "near_optimal" and best is None:
            best = sol
        if sol.status == "infeasible":
            return sol
    return best if best is not None else sol


# ---------------------------------------------------------------------------
# clarabel
# ---------------------------------------------------------------------------

_SQRT2 = np.sqrt(2.0)


def _tri_entries(M: sp.coo_matrix):
    """(tri_index, scaled_value) of the upper triangle, column-major packing."""
    C = M.tocoo()
    mask = C.row <= C.col
    r, c, v = C.row[mask], C.col[mask], C.data[mask].real
    idx = c * (c + 1) // 2 + r
    scale = np.where(r == c, 1.0, _SQRT2)
    return idx, v * scale


def _tri_vector_from_coo(M: sp.coo_matrix, side: int) -> np.ndarray:
    out = np.zeros(side * (side + 1) // 2)
    idx, vals = _tri_entries(M)
    np.add.at(out, idx, vals)
    return out


def _solve_clarabel(lowered: LoweredProgram, feas_tol=DEFAULT_FEAS_TOL,
                    gap_tol=DEFAULT_GAP_TOL, max_iter=200,
                    verbose=False, equilibrate=True) -> Solution:
    import clarabel

    n = lowered.nvars
    cones = []
    A_parts = []
    b_parts = []

    if lowered.A_eq is not None and lowered.A_eq.shape[0]:
        cones.append(clarabel.ZeroConeT(lowered.A_eq.shape[0]))
        A_parts.append(lowered.A_eq)
        b_parts.append(lowered.b_eq)
    if lowered.G_ineq is not None and lowered.G_ineq.shape[0]:
        cones.append(clarabel.NonnegativeConeT(lowered.G_ineq.shape[0]))
        A_parts.append(lowered.G_ineq)
        b_parts.append(lowered.h_ineq)
    for block in lowered.psd_blocks:
        m = block.side
        tri = m * (m + 1) // 2
        cones.append(clarabel.PSDTriangleConeT(m))
        rows, cols, vals = [], [], []
        for k, C in block.coeffs.items():
            idx, v = _tri_entries(C)
            rows.append(idx)
            cols.append(np.full(len(idx), k))
            vals.append(-v)
        if rows:
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
            vals = np.concatenate(vals)
        A_parts.append(sp.csr_matrix((vals, (rows, cols)), shape=(tri, n)))
        b_parts.append(_tri_vector_from_coo(block.F0, m))

    A = sp.vstack(A_parts).tocsc() if A_parts else sp.csc_matrix((0, n))
    b = np.concatenate(b_parts) if b_parts else np.zeros(0)
    q = -lowered.c  # clarabel minimizes
    P = sp.csc_matrix((n, n))

    settings = clarabel.DefaultSettings()
    settings.verbose = bool(verbose)
    settings.tol_feas = feas_tol
    settings.tol_gap_abs = gap_tol
    settings.tol_gap_rel = gap_tol
    settings.max_iter = int(max_iter)
    settings.equilibrate_enable = bool(equilibrate)
    solver = clarabel.DefaultSolver(P, q, A.tocsc(), b, cones, settings)
    res = solver.solve()

    status_name = str(res.status)
    mapping = {
        "Solved": "optimal",
        "AlmostSolved": "near_optimal",
        "PrimalInfeasible": "infeasible",
        "AlmostPrimalInfeasible": "infeasible",
        "DualInfeasible": "failed",
        "AlmostDualInfeasible": "failed",
    }
    status = mapping.get(status_name, "failed")
    x = np.asarray(res.x) if status in ("optimal", "near_optimal") else None
    value = float(lowered.c @ x) if x is not None else None
    stats = {
        "iterations": res.iterations,
        "seconds": res.solve_time,
        "r_prim": res.r_prim,
        "r_dual": res.r_dual,
        "gap": abs(res.obj_val - res.obj_val_dual),
        "raw_status": status_name,
    }
    return Solution(status=status, value=value, x=x, solver_stats=stats)


# ---------------------------------------------------------------------------
# cvxopt
# ---------------------------------------------------------------------------


def _solve_cvxopt(lowered: LoweredProgram, feas_tol=DEFAULT_FEAS_TOL,
                  gap_tol=DEFAULT_GAP_TOL, max_iter=200,
                  verbose=False, **_ignored) -> Solution:
    from cvxopt import matrix, solvers, spmatrix

    n = lowered.nvars
    G_parts, h_parts, s_sides = [], [], []
    nl = 0
    if lowered.G_ineq is not None and lowered.G_ineq.shape[0]:
        G_parts.append(lowered.G_ineq)
        h_parts.append(lowered.h_ineq)
        nl = lowered.G_ineq.shape[0]
    for block in lowered.psd_blocks:
        m = block.side
        rows, cols, vals = [], [], []
        for k, C in block.coeffs.items():
            Cc = C.tocoo()
            rows.append(Cc.row.astype(np.int64) * m + Cc.col)
            cols.append(np.full(Cc.nnz, k))
            vals.append(-Cc.data.real)
        if rows:
            rows = np.concatenate(rows)
            cols = np.concatenate(cols)
            vals = np.concatenate(vals)
        G_parts.append(sp.csr_matrix((vals, (rows, cols)), shape=(m * m, n)))
        h_parts.append(block.F0.toarray().real.reshape(-1, order="F"))
        s_sides.append(m)
        # full vectorization: symmetric matrices agree in both orders
    G = sp.vstack(G_parts).tocoo() if G_parts else sp.coo_matrix((0, n))
    h = np.concatenate(h_parts) if h_parts else np.zeros(0)

    Gm = spmatrix(G.data.tolist(), G.row.tolist(), G.col.tolist(),
                  (G.shape[0], n))
    hm = matrix(h)
    cm = matrix(-lowered.c)
    kwargs = {}
    if lowered.A_eq is not None and lowered.A_eq.shape[0]:
        Ae = lowered.A_eq.tocoo()
        kwargs["A"] = spmatrix(Ae.data.tolist(), Ae.row.tolist(),
                               Ae.col.tolist(), Ae.shape)
        kwargs["b"] = matrix(lowered.b_eq)

    opts = {"show_progress": bool(verbose), "abstol": gap_tol,
            "reltol": gap_tol, "feastol": feas_tol, "maxiters": int(max_iter)}
    sol = solvers.conelp(cm, Gm, hm, dims={"l": nl, "q": [], "s": s_sides},
                         options=opts, **kwargs)
    raw = sol["status"]
    if raw == "optimal":
        status = "optimal"
    elif raw == "unknown" and sol["x"] is not None and \
            sol.get("gap") is not None and sol["gap"] < 1e-5:
        status = "near_optimal"
    elif raw in ("primal infeasible", "dual infeasible"):
        status = "infeasible"
    else:
        status = "failed"
    x = np.asarray(sol["x"]).reshape(-1) if sol["x"] is not None and \
        status in ("optimal", "near_optimal") else None
    value = float(lowered.c @ x) if x is not None else None
    stats = {"iterations": sol.get("iterations"), "gap": sol.get("gap"),
             "r_prim": sol.get("primal infeasibility"),
             "r_dual": sol.get("dual infeasibility"), "raw_status": raw}
    return Solution(status=status, value=value, x=x, solver_stats=stats)


# ---------------------------------------------------------------------------
# scipy-HiGHS, LP path only
# ---------------------------------------------------------------------------


def _solve_scipy_highs(lowered: LoweredProgram, **_options) -> Solution:
    from scipy.optimize import linprog

    if lowered.psd_blocks:
        raise ValueError("scipy-highs backend handles LPs only (no PSD blocks)")
    res = linprog(
        c=-lowered.c,
        A_ub=lowered.G_ineq, b_ub=lowered.h_ineq if lowered.G_ineq is not None else None,
        A_eq=lowered.A_eq, b_eq=lowered.b_eq if lowered.A_eq is not None else None,
        bounds=(None, None),
        method="highs",
    )
    if res.status == 0:
        x = np.asarray(res.x)
        return Solution(status="optimal", value=float(lowered.c @ x), x=x,
                        solver_stats={"iterations": int(getattr(res, "nit", 0)),
                                      "raw_status": res.message})
    status = "infeasible" if res.status == 2 else "failed"
    return Solution(status=status, value=None, x=None,
                    solver_stats={"raw_status": res.message})


BACKENDS = {
    "clarabel": _solve_clarabel,
    "cvxopt": _solve_cvxopt,
    "scipy-highs": _solve_scipy_highs,
}
