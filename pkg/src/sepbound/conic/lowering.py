"""Lowering from the model layer to a backend-neutral standard form.

Standard form (maximization):

    max  c^T x
    s.t. A_eq x = b_eq
         G_ineq x <= h_ineq          (scalar rows)
         F0_j + sum_i x_i F_i_j  PSD  for each block j

PSD blocks are real symmetric; complex Hermitian constraints are
real-embedded here.  Each model PSD constraint is first split into
independent blocks along the connectivity of its joint sparsity pattern,
which realizes group-symmetry reductions automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import sparse_ops as so

__all__ = ["PsdBlock", "LoweredProgram", "lower_program"]


@dataclass
class PsdBlock:
    side: int
    F0: sp.coo_matrix                      # real symmetric, side x side
    coeffs: dict[int, sp.coo_matrix]       # var index -> real symmetric


@dataclass
class LoweredProgram:
    nvars: int
    c: np.ndarray
    A_eq: sp.csr_matrix | None
    b_eq: np.ndarray
    G_ineq: sp.csr_matrix | None
    h_ineq: np.ndarray
    psd_blocks: list[PsdBlock] = field(default_factory=list)
    sense: str = "max"


def _component_ids(n: int, patterns) -> tuple[int, np.ndarray]:
    rows = np.concatenate([p[0] for p in patterns]) if patterns else np.zeros(0, int)
    cols = np.concatenate([p[1] for p in patterns]) if patterns else np.zeros(0, int)
    adj = sp.coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                        shape=(n, n))
    from scipy.sparse.csgraph import connected_components

    n_comp, ids = connected_components(adj, directed=False)
    return n_comp, ids


def _split_psd(expr) -> list[PsdBlock]:
    """Split one PSD constraint along the connectivity of its sparsity."""
    n = expr.side
    patterns = [(expr.const.row, expr.const.col)]
    patterns += [(C.row, C.col) for C in expr.coeffs.values()]
    n_comp, ids = _component_ids(n, patterns)
    if n_comp == 1:
        return [PsdBlock(n, expr.const, dict(expr.coeffs))]

    # local index of every node within its component
    order = np.argsort(ids, kind="stable")
    comp_sizes = np.bincount(ids, minlength=n_comp)
    local = np.empty(n, dtype=np.int64)
    start = 0
    for c in range(n_comp):
        members = order[start:start + comp_sizes[c]]
        local[members] = np.arange(comp_sizes[c])
        start += comp_sizes[c]

    def scatter(C):
        """Split one sparse matrix into per-component pieces in one pass."""
        C = C.tocoo()
        cids = ids[C.row]
        out = {}
        for c in np.unique(cids):
            mask = cids == c
            m = int(comp_sizes[c])
            out[int(c)] = sp.coo_matrix(
                (C.data[mask], (local[C.row[mask]], local[C.col[mask]])),
                shape=(m, m))
        return out

    const_parts = scatter(expr.const)
    coeff_parts: dict[int, dict[int, sp.coo_matrix]] = {}
    for k, C in expr.coeffs.items():
        for c, piece in scatter(C).items():
            coeff_parts.setdefault(c, {})[k] = piece

    blocks = []
    for c in range(n_comp):
        m = int(comp_sizes[c])
        F0 = const_parts.get(c, sp.coo_matrix((m, m), dtype=np.complex128))
        coeffs = coeff_parts.get(c, {})
        if m == 1 and not coeffs and F0.nnz == 0:
            continue  # all-zero 1x1 cell
        blocks.append(PsdBlock(m, F0, coeffs))
    return blocks


def _realify_block(block: PsdBlock) -> PsdBlock:
    mats = [block.F0] + list(block.coeffs.values())
    if all(so.is_real_sparse(M) for M in mats):
        real = lambda M: sp.coo_matrix(
            (M.tocoo().data.real, (M.tocoo().row, M.tocoo().col)), shape=M.shape)
        return PsdBlock(block.side, real(block.F0),
                        {k: real(C) for k, C in block.coeffs.items()})
    return PsdBlock(2 * block.side, so.real_embed_sparse(block.F0),
                    {k: so.real_embed_sparse(C) for k, C in block.coeffs.items()})


def lower_program(prog) -> LoweredProgram:
    n = prog.nvars

    c = np.zeros(n)
    for k, v in prog.objective.coeffs.items():
        c[k] += v.real
    obj_sign = 1.0 if prog.sense == "max" else -1.0
    c *= obj_sign

    # equalities
    eq_rows, eq_cols, eq_vals, b_eq = [], [], [], []
    for r, e in enumerate(prog.eq_constraints):
        for k, v in e.coeffs.items():
            eq_rows.append(r)
            eq_cols.append(k)
            eq_vals.append(float(v.real))
        b_eq.append(-float(e.const.real))
    A_eq = sp.csr_matrix((eq_vals, (eq_rows, eq_cols)),
                         shape=(len(b_eq), n)) if b_eq else None

    # scalar inequalities expr >= 0  ->  -expr <= const
    g_rows, g_cols, g_vals, h = [], [], [], []
    r = 0
    for e in prog.ineq_constraints:
        for k, v in e.coeffs.items():
            g_rows.append(r)
            g_cols.append(k)
            g_vals.append(-float(v.real))
        h.append(float(e.const.real))
        r += 1
    for k in prog.nonneg_indices:
        g_rows.append(r)
        g_cols.append(k)
        g_vals.append(-1.0)
        h.append(0.0)
        r += 1
    G_ineq = sp.csr_matrix((g_vals, (g_rows, g_cols)), shape=(r, n)) if r else None

    # PSD blocks: split then realify; 1x1 blocks fold into scalar rows
    psd_blocks: list[PsdBlock] = []
    extra_g = []
    for expr in prog.psd_constraints:
        for block in _split_psd(expr):
            if block.side == 1:
                const = float(block.F0.toarray()[0, 0].real)
                coeffs = {k: float(C.toarray()[0, 0].real)
                          for k, C in block.coeffs.items()}
                extra_g.append((coeffs, const))
            else:
                psd_blocks.append(_realify_block(block))
    if extra_g:
        base = G_ineq.shape[0] if G_ineq is not None else 0
        rows, cols, vals = [], [], []
        hh = list(h)
        for i, (coeffs, const) in enumerate(extra_g):
            for k, v in coeffs.items():
                rows.append(base + i)
                cols.append(k)
                vals.append(-v)
            hh.append(const)
        G_new = sp.csr_matrix((vals, (rows, cols)), shape=(base + len(extra_g), n))
        if G_ineq is not None:
            G_new = (G_new + sp.vstack(
                [G_ineq, sp.csr_matrix((len(extra_g), n))]).tocsr())
        G_ineq, h = G_new, hh

    return LoweredProgram(n, c, A_eq, np.asarray(b_eq), G_ineq, np.asarray(h),
                          psd_blocks, prog.sense)
