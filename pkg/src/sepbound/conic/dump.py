"""Text interchange format for lowered conic programs.

The format is line-based and bit-exact (fixed variable order, cone order,
and coefficient ordering); see docs/program-format.md for the grammar.
Floats are printed with repr-roundtrip precision ("%.17g").
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .lowering import LoweredProgram, PsdBlock

__all__ = ["dump_program", "load_program"]

_F = "%.17g"


def _emit_sparse(lines, M: sp.coo_matrix):
    M = M.tocoo()
    order = np.lexsort((M.col, M.row))
    lines.append(str(M.nnz))
    for i in order:
        lines.append(f"{M.row[i]} {M.col[i]} {_F % M.data[i].real}")


def dump_program(lowered: LoweredProgram) -> str:
    lines = [f"SEPBOUND-CONIC 1", f"SENSE {lowered.sense}",
             f"VARS {lowered.nvars}"]
    c = lowered.c
    nz = np.nonzero(c)[0]
    lines.append(f"OBJ {len(nz)}")
    for k in nz:
        lines.append(f"{k} {_F % c[k]}")

    A = lowered.A_eq if lowered.A_eq is not None else sp.csr_matrix((0, lowered.nvars))
    lines.append(f"EQ {A.shape[0]}")
    _emit_sparse(lines, A.tocoo())
    for v in lowered.b_eq:
        lines.append(_F % v)

    G = lowered.G_ineq if lowered.G_ineq is not None else sp.csr_matrix((0, lowered.nvars))
    lines.append(f"LEQ {G.shape[0]}")
    _emit_sparse(lines, G.tocoo())
    for v in lowered.h_ineq:
        lines.append(_F % v)

    lines.append(f"PSD {len(lowered.psd_blocks)}")
    for block in lowered.psd_blocks:
        lines.append(f"BLOCK {block.side} {len(block.coeffs)}")
        _emit_sparse(lines, block.F0)
        for k in sorted(block.coeffs):
            lines.append(f"COEFF {k}")
            _emit_sparse(lines, block.coeffs[k])
    return "\n".join(lines) + "\n"


def load_program(text: str) -> LoweredProgram:
    it = iter(text.splitlines())
    nxt = lambda: next(it)

    magic = nxt()
    if not magic.startswith("SEPBOUND-CONIC"):
        raise ValueError("not a sepbound conic dump")
    sense = nxt().split()[1]
    nvars = int(nxt().split()[1])

    c = np.zeros(nvars)
    n_obj = int(nxt().split()[1])
    for _ in range(n_obj):
        k, v = nxt().split()
        c[int(k)] = float(v)

    def read_sparse(rows_count):
        nnz = int(nxt())
        r, cc, vv = [], [], []
        for _ in range(nnz):
            a, b, v = nxt().split()
            r.append(int(a))
            cc.append(int(b))
            vv.append(float(v))
        return sp.csr_matrix((vv, (r, cc)), shape=(rows_count, nvars))

    m_eq = int(nxt().split()[1])
    A_eq = read_sparse(m_eq)
    b_eq = np.array([float(nxt()) for _ in range(m_eq)])

    m_leq = int(nxt().split()[1])
    G = read_sparse(m_leq)
    h = np.array([float(nxt()) for _ in range(m_leq)])

    n_blocks = int(nxt().split()[1])
    blocks = []
    for _ in range(n_blocks):
        _, side, ncoef = nxt().split()
        side, ncoef = int(side), int(ncoef)

        def read_block_matrix():
            nnz = int(nxt())
            r, cc, vv = [], [], []
            for _ in range(nnz):
                a, b, v = nxt().split()
                r.append(int(a))
                cc.append(int(b))
                vv.append(float(v))
            return sp.coo_matrix((vv, (r, cc)), shape=(side, side))

        F0 = read_block_matrix()
        coeffs = {}
        for _ in range(ncoef):
            k = int(nxt().split()[1])
            coeffs[k] = read_block_matrix()
        blocks.append(PsdBlock(side, F0, coeffs))

    return LoweredProgram(nvars, c, A_eq if m_eq else None, b_eq,
                          G if m_leq else None, h, blocks, sense)
