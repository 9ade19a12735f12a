"""Solver-agnostic conic programs over Hermitian PSD blocks and scalars.

Variables are scalarized into one real vector x.  A Hermitian variable of
side s occupies s^2 slots through the fixed basis of
sparse_ops.hermitian_basis_element; matrix-valued affine expressions track
one sparse coefficient per scalar.  Hermitian data stays complex all the way
to the backend boundary, where each PSD constraint is real-embedded (or kept
real when its coefficients already are).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from ..subspaces import Subspace
from . import sparse_ops as so

__all__ = ["MatExpr", "ScalarExpr", "ConicProgram", "Solution",
           "hermitian_real_embedding"]


def hermitian_real_embedding(H: np.ndarray) -> np.ndarray:
    """H >= 0 iff [[Re H, -Im H], [Im H, Re H]] >= 0; applied at the backend."""
    H = np.asarray(H, dtype=np.complex128)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


class ScalarExpr:
    """Affine real/complex scalar: const + sum_i coeff_i x_i."""

    __slots__ = ("const", "coeffs")

    def __init__(self, const=0.0, coeffs=None):
        self.const = complex(const)
        self.coeffs: dict[int, complex] = dict(coeffs or {})

    def __add__(self, other):
        if not isinstance(other, ScalarExpr):
            return ScalarExpr(self.const + other, self.coeffs)
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, 0.0) + v
        return ScalarExpr(self.const + other.const, out)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr(-self.const, {k: -v for k, v in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-other if isinstance(other, ScalarExpr)
                       else ScalarExpr(-other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        s = complex(scalar)
        return ScalarExpr(self.const * s, {k: v * s for k, v in self.coeffs.items()})

    __rmul__ = __mul__

    def real_part(self):
        return ScalarExpr(self.const.real,
                          {k: v.real for k, v in self.coeffs.items()})

    def imag_part(self):
        return ScalarExpr(self.const.imag,
                          {k: v.imag for k, v in self.coeffs.items()})

    def value(self, x: np.ndarray) -> complex:
        return self.const + sum(v * x[k] for k, v in self.coeffs.items())


class MatExpr:
    """Affine matrix expression C0 + sum_i x_i C_i on a labeled product space."""

    __slots__ = ("side", "dims", "labels", "const", "coeffs")

    def __init__(self, side, dims, labels, const=None, coeffs=None):
        self.side = int(side)
        self.dims = tuple(int(d) for d in dims)
        self.labels = tuple(labels)
        if int(np.prod(self.dims)) != self.side:
            raise ValueError("dims do not multiply to the matrix side")
        self.const = so.as_coo(const) if const is not None else \
            sp.coo_matrix((self.side, self.side), dtype=np.complex128)
        self.coeffs: dict[int, sp.coo_matrix] = dict(coeffs or {})

    # -- algebra -------------------------------------------------------

    def _check(self, other: "MatExpr"):
        if self.side != other.side or self.dims != other.dims \
                or self.labels != other.labels:
            raise ValueError("mismatched spaces in matrix expression")

    def __add__(self, other: "MatExpr") -> "MatExpr":
        self._check(other)
        coeffs = dict(self.coeffs)
        for k, C in other.coeffs.items():
            coeffs[k] = (coeffs[k] + C).tocoo() if k in coeffs else C
        return MatExpr(self.side, self.dims, self.labels,
                       (self.const + other.const).tocoo(), coeffs)

    def __sub__(self, other: "MatExpr") -> "MatExpr":
        return self + (other * (-1.0))

    def __mul__(self, scalar) -> "MatExpr":
        s = complex(scalar)
        return MatExpr(self.side, self.dims, self.labels, self.const * s,
                       {k: C * s for k, C in self.coeffs.items()})

    __rmul__ = __mul__

    def scaled_by_scalar_expr(self, w: ScalarExpr, M: np.ndarray) -> "MatExpr":
        """Add w * M where w is an affine scalar and M a constant matrix."""
        Msp = so.as_coo(sp.coo_matrix(M))
        coeffs = {k: Msp * v for k, v in w.coeffs.items()}
        return MatExpr(self.side, self.dims, self.labels, Msp * w.const, coeffs) + self

    def dagger(self) -> "MatExpr":
        return self._map(lambda C: C.conj().T.tocoo())

    def _map(self, f) -> "MatExpr":
        return MatExpr(self.side, self.dims, self.labels, f(self.const),
                       {k: f(C) for k, C in self.coeffs.items()})

    # -- labeled operations ---------------------------------------------

    def pt(self, subset) -> "MatExpr":
        axes = [self.labels.index(l) for l in subset]
        return self._map(lambda C: so.pt_sparse(C, self.dims, axes))

    def ptr(self, keep) -> "MatExpr":
        keep_set = set(keep)
        keep_axes = [i for i, l in enumerate(self.labels) if l in keep_set]
        new_labels = tuple(l for l in self.labels if l in keep_set)
        new_dims = tuple(self.dims[i] for i in keep_axes)
        side = int(np.prod(new_dims)) if new_dims else 1
        out = MatExpr(side, new_dims or (1,), new_labels or ("_scalar",))
        out.const = so.ptr_sparse(self.const, self.dims, keep_axes)
        out.coeffs = {k: so.ptr_sparse(C, self.dims, keep_axes)
                      for k, C in self.coeffs.items()}
        return out

    def permute(self, new_order) -> "MatExpr":
        perm = [self.labels.index(l) for l in new_order]
        new_dims = tuple(self.dims[p] for p in perm)
        out = MatExpr(self.side, new_dims, tuple(new_order))
        out.const = so.permute_sparse(self.const, self.dims, perm)
        out.coeffs = {k: so.permute_sparse(C, self.dims, perm)
                      for k, C in self.coeffs.items()}
        return out

    def sandwich(self, W: np.ndarray, dims, labels) -> "MatExpr":
        """W @ expr @ W^dag with a dense rectangular map W."""
        W = np.asarray(W, dtype=np.complex128)
        Wd = W.conj().T
        side = W.shape[0]

        def f(C):
            return so.from_dense(W @ (C.tocsr() @ Wd))

        out = MatExpr(side, dims, labels)
        out.const = f(self.const)
        out.coeffs = {k: f(C) for k, C in self.coeffs.items()}
        return out

    def lmul(self, M: np.ndarray) -> "MatExpr":
        """M @ expr with a square constant matrix (labels preserved)."""
        Msp = sp.csr_matrix(M)
        return self._map(lambda C: (Msp @ C.tocsc()).tocoo())

    def rmul(self, M: np.ndarray) -> "MatExpr":
        """expr @ M with a square constant matrix (labels preserved)."""
        Msp = sp.csc_matrix(M)
        return self._map(lambda C: (C.tocsr() @ Msp).tocoo())

    def trace(self) -> ScalarExpr:
        diag_sum = lambda C: complex(C.diagonal().sum())
        return ScalarExpr(diag_sum(self.const),
                          {k: diag_sum(C) for k, C in self.coeffs.items()})

    def trace_against(self, M) -> ScalarExpr:
        """tr(M @ expr) as an affine scalar."""
        Msp = sp.csr_matrix(M)
        val = lambda C: complex((Msp @ C.tocsc()).diagonal().sum())
        return ScalarExpr(val(self.const), {k: val(C) for k, C in self.coeffs.items()})

    def entry(self, i: int, j: int) -> ScalarExpr:
        pick = lambda C: complex(C.tocsr()[i, j])
        return ScalarExpr(pick(self.const), {k: pick(C) for k, C in self.coeffs.items()})

    def value(self, x: np.ndarray) -> np.ndarray:
        out = self.const.toarray().astype(np.complex128)
        for k, C in self.coeffs.items():
            out += x[k] * C.toarray()
        return out

    @staticmethod
    def constant(M, dims, labels) -> "MatExpr":
        M = sp.coo_matrix(M)
        return MatExpr(M.shape[0], dims, labels, M)

    @staticmethod
    def zero(dims, labels) -> "MatExpr":
        side = int(np.prod(dims))
        return MatExpr(side, dims, labels)


@dataclass
class Solution:
    """Backend result; `value` is the objective in the program's max sense."""

    status: str                 # optimal | near_optimal | infeasible | failed
    value: float | None
    x: np.ndarray | None
    solver_stats: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "near_optimal")


@dataclass
class _PsdVarInfo:
    name: str
    side: int               # side of the PSD parameter block
    ambient: int             # side of the expression it expands into
    offset: int


class ConicProgram:
    """A conic model: Hermitian PSD blocks, nonnegative and free scalars,
    affine equalities/inequalities, PSD constraints, linear objective."""

    def __init__(self, name: str = "program"):
        self.name = name
        self.nvars = 0
        self.var_names: dict[str, tuple[int, int]] = {}  # name -> (offset, count)
        self.psd_vars: list[_PsdVarInfo] = []
        self.nonneg_indices: list[int] = []
        self.psd_constraints: list[MatExpr] = []
        self.eq_constraints: list[ScalarExpr] = []      # expr == 0 (real)
        self.ineq_constraints: list[ScalarExpr] = []    # expr >= 0 (real)
        self.objective: ScalarExpr | None = None
        self.sense = "max"

    # -- variables -------------------------------------------------------

    def _alloc(self, name: str, count: int) -> int:
        if name in self.var_names:
            raise ValueError(f"duplicate variable name {name!r}")
        off = self.nvars
        self.var_names[name] = (off, count)
        self.nvars += count
        return off

    def add_hermitian_var(self, name: str, dims, labels, psd: bool = True) -> MatExpr:
        side = int(np.prod(dims))
        off = self._alloc(name, side * side)
        coeffs = {off + k: so.hermitian_basis_element(side, k)
                  for k in range(side * side)}
        expr = MatExpr(side, dims, labels, None, coeffs)
        if psd:
            self.add_psd_constraint(expr)
            self.psd_vars.append(_PsdVarInfo(name, side, side, off))
        return expr

    def add_psd_in_subspace(self, name: str, P: Subspace) -> MatExpr:
        """S = B X B^dag with X PSD of side dim(P); zero subspace pins S = 0."""
        if P.dim == 0:
            return MatExpr.zero(P.dims, P.labels)
        side = P.dim
        off = self._alloc(name, side * side)
        coeffs = {off + k: so.hermitian_basis_element(side, k)
                  for k in range(side * side)}
        X = MatExpr(side, (side,), ("_param",), None, coeffs)
        self.add_psd_constraint(X)
        S = X.sandwich(P.basis, P.dims, P.labels)
        self.psd_vars.append(_PsdVarInfo(name, side, S.side, off))
        return S

    def add_nonneg_var(self, name: str, count: int = 1):
        off = self._alloc(name, count)
        self.nonneg_indices.extend(range(off, off + count))
        exprs = [ScalarExpr(0.0, {off + i: 1.0}) for i in range(count)]
        return exprs[0] if count == 1 else exprs

    def add_free_var(self, name: str) -> ScalarExpr:
        off = self._alloc(name, 1)
        return ScalarExpr(0.0, {off: 1.0})

    # -- constraints -------------------------------------------------------

    def add_psd_constraint(self, expr: MatExpr):
        self.psd_constraints.append(expr)

    def add_ppt_constraint(self, expr: MatExpr, cut_subsets):
        """One extra PSD cone per listed label subset (its partial transpose)."""
        for subset in cut_subsets:
            self.add_psd_constraint(expr.pt(subset))

    def add_eq_scalar(self, expr: ScalarExpr):
        for part in (expr.real_part(), expr.imag_part()):
            if part.coeffs or abs(part.const) > 0:
                if not part.coeffs:
                    if abs(part.const) > 1e-12:
                        raise ValueError("infeasible constant equality")
                    continue
                self.eq_constraints.append(part)

    def add_eq_matrix(self, lhs: MatExpr, rhs: MatExpr | None = None,
                      hermitian: bool = True):
        """Constrain lhs == rhs entrywise; with hermitian=True only the upper
        triangle is emitted (valid for Hermitian-valued expressions)."""
        diff = lhs if rhs is None else lhs - rhs
        cells: dict[tuple[int, int], ScalarExpr] = {}

        def visit(C, mul_key=None):
            C = C.tocoo()
            for r, c, v in zip(C.row, C.col, C.data):
                if hermitian and r > c:
                    continue
                key = (int(r), int(c))
                e = cells.get(key)
                if e is None:
                    e = cells[key] = ScalarExpr()
                if mul_key is None:
                    e.const += v
                else:
                    e.coeffs[mul_key] = e.coeffs.get(mul_key, 0.0) + v

        visit(diff.const)
        for k, C in diff.coeffs.items():
            visit(C, mul_key=k)
        for (r, c), e in cells.items():
            self.add_eq_scalar(e)

    def add_ineq(self, expr: ScalarExpr):
        """expr >= 0 (expression must be real affine)."""
        im = expr.imag_part()
        if any(abs(v) > 1e-12 for v in im.coeffs.values()) or abs(im.const) > 1e-12:
            raise ValueError("inequality on a non-real expression")
        self.ineq_constraints.append(expr.real_part())

    def set_objective(self, expr: ScalarExpr, sense: str = "max"):
        if sense not in ("max", "min"):
            raise ValueError(sense)
        self.objective = expr.real_part()
        self.sense = sense

    # -- introspection -----------------------------------------------------

    def psd_var_info(self, name: str):
        for info in self.psd_vars:
            if info.name == name:
                return info
        raise KeyError(name)

    def variable_value(self, name: str, sol: Solution) -> np.ndarray:
        off, count = self.var_names[name]
        return np.asarray(sol.x[off:off + count])

    def cone_summary(self) -> dict:
        """Cone sides after lowering, for shape tests and size reporting."""
        lowered = self.lower()
        return {
            "n_scalars": self.nvars,
            "n_eq": lowered.A_eq.shape[0] if lowered.A_eq is not None else 0,
            "n_nonneg": len(lowered.h_ineq),
            "psd_sides": sorted(b.side for b in lowered.psd_blocks),
        }

    # -- lowering ----------------------------------------------------------

    def lower(self) -> "LoweredProgram":
        from .lowering import lower_program

        return lower_program(self)

    def solve(self, backend: str = "auto", **options) -> Solution:
        from .backends import solve_lowered

        if self.objective is None:
            raise ValueError("objective not set")
        t0 = time.perf_counter()
        lowered = self.lower()
        sol = solve_lowered(lowered, backend=backend, **options)
        if sol.value is not None and self.sense == "min":
            sol.value = -sol.value
        sol.solver_stats["seconds"] = time.perf_counter() - t0
        sol.solver_stats.setdefault("backend", backend)
        return sol
