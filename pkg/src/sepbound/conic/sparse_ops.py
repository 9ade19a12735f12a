"""Index-level operations on sparse square matrices over labeled products.

All functions take and return scipy.sparse matrices (any format, COO used
internally) together with explicit subsystem dimension tuples; nothing here
knows about the model layer.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

__all__ = [
    "as_coo",
    "from_dense",
    "pt_sparse",
    "ptr_sparse",
    "permute_sparse",
    "real_embed_sparse",
    "is_real_sparse",
    "hermitian_basis_element",
    "tri_pack",
]


def as_coo(M) -> sp.coo_matrix:
    return M.tocoo() if sp.issparse(M) else sp.coo_matrix(M)


def from_dense(arr: np.ndarray, prune: float = 0.0) -> sp.coo_matrix:
    A = np.asarray(arr, dtype=np.complex128)
    if prune > 0:
        A = np.where(np.abs(A) > prune, A, 0.0)
    return sp.coo_matrix(A)


def _digits(flat: np.ndarray, dims) -> list[np.ndarray]:
    out = []
    rem = flat.astype(np.int64, copy=True)
    for stride in _strides(dims):
        out.append(rem // stride)
        rem = rem % stride
    return out


def _strides(dims):
    s = []
    acc = 1
    for d in reversed(dims):
        s.append(acc)
        acc *= d
    return list(reversed(s))


def _ravel(digits, dims) -> np.ndarray:
    flat = np.zeros_like(digits[0])
    for dig, stride in zip(digits, _strides(dims)):
        flat = flat + dig * stride
    return flat


def pt_sparse(M, dims, axes) -> sp.coo_matrix:
    """Partial transpose on the given axis positions."""
    C = as_coo(M)
    rows = _digits(C.row, dims)
    cols = _digits(C.col, dims)
    for a in axes:
        rows[a], cols[a] = cols[a], rows[a]
    n = int(np.prod(dims))
    return sp.coo_matrix((C.data, (_ravel(rows, dims), _ravel(cols, dims))),
                         shape=(n, n))


def ptr_sparse(M, dims, keep_axes) -> sp.coo_matrix:
    """Partial trace keeping the listed axis positions (in their order)."""
    C = as_coo(M)
    rows = _digits(C.row, dims)
    cols = _digits(C.col, dims)
    traced = [a for a in range(len(dims)) if a not in keep_axes]
    mask = np.ones(len(C.data), dtype=bool)
    for a in traced:
        mask &= rows[a] == cols[a]
    kept_dims = [dims[a] for a in keep_axes]
    n = int(np.prod(kept_dims)) if kept_dims else 1
    r = _ravel([rows[a][mask] for a in keep_axes], kept_dims) if kept_dims \
        else np.zeros(int(mask.sum()), dtype=np.int64)
    c = _ravel([cols[a][mask] for a in keep_axes], kept_dims) if kept_dims \
        else np.zeros(int(mask.sum()), dtype=np.int64)
    out = sp.coo_matrix((C.data[mask], (r, c)), shape=(n, n))
    out.sum_duplicates()
    return out


def permute_sparse(M, dims, perm) -> sp.coo_matrix:
    """Reorder subsystems; perm[k] is the old axis landing at new position k."""
    C = as_coo(M)
    rows = _digits(C.row, dims)
    cols = _digits(C.col, dims)
    new_dims = [dims[p] for p in perm]
    r = _ravel([rows[p] for p in perm], new_dims)
    c = _ravel([cols[p] for p in perm], new_dims)
    n = int(np.prod(dims))
    return sp.coo_matrix((C.data, (r, c)), shape=(n, n))


def is_real_sparse(M, tol: float = 1e-14) -> bool:
    C = as_coo(M)
    return bool(np.all(np.abs(C.data.imag) <= tol)) if C.nnz else True


def real_embed_sparse(M) -> sp.coo_matrix:
    """Hermitian H -> [[Re H, -Im H], [Im H, Re H]], PSD iff H is."""
    C = as_coo(M)
    n = C.shape[0]
    re, im = C.data.real, C.data.imag
    rows = np.concatenate([C.row, C.row + n, C.row, C.row + n])
    cols = np.concatenate([C.col, C.col + n, C.col + n, C.col])
    vals = np.concatenate([re, re, -im, im])
    out = sp.coo_matrix((vals, (rows, cols)), shape=(2 * n, 2 * n))
    out.sum_duplicates()
    out.eliminate_zeros()
    return out


def hermitian_basis_element(side: int, k: int) -> sp.coo_matrix:
    """k-th element of the real Hermitian basis used to scalarize variables.

    Ordering: the `side` diagonal units E_ii first, then for each i<j (row
    major) the pair E_ij + E_ji followed by i(E_ij - E_ji).
    """
    if k < side:
        return sp.coo_matrix(([1.0 + 0j], ([k], [k])), shape=(side, side))
    k -= side
    pair, part = divmod(k, 2)
    i, j = _pair_index(side, pair)
    if part == 0:
        data = [1.0 + 0j, 1.0 + 0j]
    else:
        data = [1j, -1j]
    return sp.coo_matrix((data, ([i, j], [j, i])), shape=(side, side))


def _pair_index(side: int, pair: int):
    count = 0
    for i in range(side):
        for j in range(i + 1, side):
            if count == pair:
                return i, j
            count += 1
    raise IndexError(pair)


def tri_pack(M: np.ndarray, scale_offdiag: float) -> np.ndarray:
    """Upper triangle, column-major, off-diagonal entries scaled."""
    n = M.shape[0]
    out = []
    for j in range(n):
        for i in range(j + 1):
            v = M[i, j]
            out.append(v if i == j else scale_offdiag * v)
    return np.asarray(out)
