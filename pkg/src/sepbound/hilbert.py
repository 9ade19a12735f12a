"""Dense complex linear algebra over labeled tensor-product spaces.

Every object is a vector or a square matrix tagged with an ordered list of
subsystem dimensions and labels.  All functions are pure: they return new
Tensors and never mutate their inputs.  The Kronecker layout is row-major
(C order), i.e. the basis vector |i_1 ... i_n> sits at the flat index
i_1 * (d_2 ... d_n) + ... + i_n, consistent with numpy.kron.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Tensor",
    "Bipartition",
    "default_rank_tol",
    "tensor_product",
    "max_entangled",
    "partial_trace",
    "partial_transpose",
    "permute_systems",
    "schmidt_values",
    "schmidt_rank",
    "operator_schmidt_rank",
    "sym_projector",
    "antisym_projector",
    "sym_basis",
    "op_to_vec",
    "vec_to_op",
    "orthonormal_basis",
    "null_space",
    "haar_unitary",
    "haar_ket",
]


def default_rank_tol(singular_values: np.ndarray, max_dim: int) -> float:
    """Rank tolerance max_dim * eps * sigma_max, the usual SVD cutoff."""
    smax = float(singular_values[0]) if len(singular_values) else 0.0
    return max_dim * np.finfo(np.float64).eps * max(smax, 1.0)


@dataclass(frozen=True)
class Tensor:
    """A complex vector (ket) or square matrix on a labeled product space."""

    data: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.complex128)
        object.__setattr__(self, "data", data)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must have equal length")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels: {self.labels}")
        if any(d < 1 for d in self.dims):
            raise ValueError(f"subsystem dimensions must be positive: {self.dims}")
        n = int(np.prod(self.dims))
        if data.ndim == 1:
            if data.shape[0] != n:
                raise ValueError(f"vector length {data.shape[0]} != prod(dims) {n}")
        elif data.ndim == 2:
            if data.shape != (n, n):
                raise ValueError(f"matrix shape {data.shape} != ({n}, {n})")
        else:
            raise ValueError("data must be a vector or a square matrix")

    # -- constructors -------------------------------------------------

    @staticmethod
    def ket(data, dims, labels) -> "Tensor":
        return Tensor(np.asarray(data).reshape(-1), dims, labels)

    @staticmethod
    def op(data, dims, labels) -> "Tensor":
        return Tensor(data, dims, labels)

    # -- simple queries ------------------------------------------------

    @property
    def is_matrix(self) -> bool:
        return self.data.ndim == 2

    @property
    def size(self) -> int:
        return int(np.prod(self.dims))

    def dim_of(self, label: str) -> int:
        return self.dims[self.labels.index(label)]

    def axes_of(self, labels) -> list[int]:
        return [self.labels.index(l) for l in labels]

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def trace(self) -> complex:
        if not self.is_matrix:
            raise ValueError("trace requires a matrix Tensor")
        return complex(np.trace(self.data))

    def is_hermitian(self, tol: float = 1e-10) -> bool:
        if not self.is_matrix:
            return False
        return bool(np.max(np.abs(self.data - self.data.conj().T)) <= tol)

    def dagger(self) -> "Tensor":
        if not self.is_matrix:
            raise ValueError("dagger requires a matrix Tensor")
        return Tensor(self.data.conj().T, self.dims, self.labels)

    def outer(self) -> "Tensor":
        """|v><v| for a ket."""
        if self.is_matrix:
            raise ValueError("outer requires a ket Tensor")
        return Tensor(np.outer(self.data, self.data.conj()), self.dims, self.labels)

    def __add__(self, other: "Tensor") -> "Tensor":
        if self.dims != other.dims or self.labels != other.labels:
            raise ValueError("mismatched spaces")
        return Tensor(self.data + other.data, self.dims, self.labels)

    def __sub__(self, other: "Tensor") -> "Tensor":
        if self.dims != other.dims or self.labels != other.labels:
            raise ValueError("mismatched spaces")
        return Tensor(self.data - other.data, self.dims, self.labels)

    def __mul__(self, scalar) -> "Tensor":
        return Tensor(self.data * scalar, self.dims, self.labels)

    __rmul__ = __mul__


@dataclass(frozen=True)
class Bipartition:
    """A two-block partition of subsystem labels, e.g. (A, R_A) vs (R_B, B)."""

    left: tuple[str, ...]
    right: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "left", tuple(self.left))
        object.__setattr__(self, "right", tuple(self.right))
        if set(self.left) & set(self.right):
            raise ValueError("left and right blocks overlap")

    def validate(self, t: Tensor):
        if set(self.left) | set(self.right) != set(t.labels):
            raise ValueError(
                f"bipartition {self.left}|{self.right} does not cover {t.labels}"
            )


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------


def tensor_product(xs: list[Tensor]) -> Tensor:
    """Kronecker product in label order; labels must stay unique."""
    if not xs:
        raise ValueError("empty tensor product")
    data = xs[0].data
    dims: tuple[int, ...] = xs[0].dims
    labels: tuple[str, ...] = xs[0].labels
    for t in xs[1:]:
        if set(labels) & set(t.labels):
            raise ValueError(f"duplicate label in product: {set(labels) & set(t.labels)}")
        if (data.ndim == 2) != t.is_matrix:
            raise ValueError("cannot mix kets and matrices in one product")
        data = np.kron(data, t.data)
        dims = dims + t.dims
        labels = labels + t.labels
    return Tensor(data, dims, labels)


def max_entangled(d: int, labels=("1", "2"), normalized: bool = False) -> Tensor:
    """Sum_i |ii>, divided by sqrt(d) when normalized."""
    if d < 1:
        raise ValueError("d must be >= 1")
    v = np.zeros(d * d, dtype=np.complex128)
    v[:: d + 1] = 1.0
    if normalized:
        v /= math.sqrt(d)
    return Tensor(v, (d, d), labels)


def identity(dims, labels) -> Tensor:
    n = int(np.prod(dims))
    return Tensor(np.eye(n, dtype=np.complex128), dims, labels)


# ---------------------------------------------------------------------------
# index plumbing
# ---------------------------------------------------------------------------


def _as_multi(M: Tensor):
    n = len(M.dims)
    if M.is_matrix:
        return M.data.reshape(M.dims + M.dims), n
    return M.data.reshape(M.dims), n


def partial_trace(M: Tensor, keep) -> Tensor:
    """Trace out every subsystem not listed in `keep` (label order preserved)."""
    keep = list(keep)
    unknown = set(keep) - set(M.labels)
    if unknown:
        raise ValueError(f"unknown labels {unknown}")
    if not M.is_matrix:
        raise ValueError("partial_trace requires a matrix Tensor")
    arr, n = _as_multi(M)
    keep_axes = [i for i, l in enumerate(M.labels) if l in set(keep)]
    traced = [i for i in range(n) if i not in keep_axes]
    for offset, ax in enumerate(traced):
        a = ax - offset
        arr = np.trace(arr, axis1=a, axis2=a + arr.ndim // 2)
    new_labels = tuple(l for l in M.labels if l in set(keep))
    new_dims = tuple(M.dims[M.labels.index(l)] for l in new_labels)
    m = int(np.prod(new_dims)) if new_dims else 1
    return Tensor(arr.reshape(m, m), new_dims or (1,), new_labels or ("_scalar",))


def partial_transpose(M: Tensor, subset) -> Tensor:
    """Transpose on the listed subsystems, identity elsewhere."""
    subset = set(subset)
    unknown = subset - set(M.labels)
    if unknown:
        raise ValueError(f"unknown labels {unknown}")
    if not M.is_matrix:
        raise ValueError("partial_transpose requires a matrix Tensor")
    arr, n = _as_multi(M)
    perm = list(range(2 * n))
    for i, l in enumerate(M.labels):
        if l in subset:
            perm[i], perm[i + n] = perm[i + n], perm[i]
    arr = arr.transpose(perm)
    return Tensor(arr.reshape(M.size, M.size), M.dims, M.labels)


def permute_systems(t: Tensor, new_order) -> Tensor:
    """Reorder subsystems to `new_order` (a permutation of t.labels)."""
    new_order = tuple(new_order)
    if sorted(new_order) != sorted(t.labels):
        raise ValueError(f"{new_order} is not a permutation of {t.labels}")
    axes = [t.labels.index(l) for l in new_order]
    arr, n = _as_multi(t)
    if t.is_matrix:
        arr = arr.transpose(axes + [a + n for a in axes])
        data = arr.reshape(t.size, t.size)
    else:
        data = arr.transpose(axes).reshape(-1)
    new_dims = tuple(t.dims[a] for a in axes)
    return Tensor(data, new_dims, new_order)


def permutation_matrix(dims, labels, new_order) -> np.ndarray:
    """Unitary P with P |psi>_labels = permute_systems(psi, new_order)."""
    n = int(np.prod(dims))
    P = np.zeros((n, n))
    axes = [list(labels).index(l) for l in new_order]
    src = np.arange(n).reshape(dims).transpose(axes).reshape(-1)
    P[np.arange(n), src] = 1.0
    return P


# ---------------------------------------------------------------------------
# spectra across cuts
# ---------------------------------------------------------------------------


def _cut_matrix(ket: Tensor, cut: Bipartition) -> np.ndarray:
    cut.validate(ket)
    t = permute_systems(ket, cut.left + cut.right)
    dl = int(np.prod([t.dim_of(l) for l in cut.left]))
    return t.data.reshape(dl, -1)


def schmidt_values(ket: Tensor, cut: Bipartition, tol: float | None = None) -> np.ndarray:
    """Descending singular values of the ket reshaped across the cut."""
    if ket.is_matrix:
        raise ValueError("schmidt_values requires a ket")
    return np.linalg.svd(_cut_matrix(ket, cut), compute_uv=False)


def schmidt_rank(ket: Tensor, cut: Bipartition, tol: float | None = None) -> int:
    sv = schmidt_values(ket, cut)
    if tol is None:
        tol = default_rank_tol(sv, ket.size)
    return int(np.sum(sv > tol))


def operator_schmidt_rank(M: Tensor, cut: Bipartition, tol: float | None = None) -> int:
    """Rank of the realignment of M across the cut."""
    cut.validate(M)
    if not M.is_matrix:
        raise ValueError("operator_schmidt_rank requires a matrix")
    t = permute_systems(M, cut.left + cut.right)
    dl = int(np.prod([t.dim_of(l) for l in cut.left]))
    dr = t.size // dl
    # M_{(i l),(j m)} -> R_{(i j),(l m)}
    arr = t.data.reshape(dl, dr, dl, dr).transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)
    sv = np.linalg.svd(arr, compute_uv=False)
    if tol is None:
        tol = default_rank_tol(sv, max(arr.shape))
    return int(np.sum(sv > tol))


# ---------------------------------------------------------------------------
# symmetric / antisymmetric structure
# ---------------------------------------------------------------------------


def _swap(d: int) -> np.ndarray:
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            P[i * d + j, j * d + i] = 1.0
    return P


def sym_projector(local_dim: int, labels=("1", "2")) -> Tensor:
    """Projector onto the symmetric subspace of two local_dim systems."""
    P = _swap(local_dim)
    return Tensor((np.eye(local_dim**2) + P) / 2.0, (local_dim, local_dim), labels)


def antisym_projector(local_dim: int, labels=("1", "2")) -> Tensor:
    P = _swap(local_dim)
    return Tensor((np.eye(local_dim**2) - P) / 2.0, (local_dim, local_dim), labels)


def sym_basis(local_dim: int) -> np.ndarray:
    """Orthonormal columns spanning the symmetric subspace of C^d x C^d."""
    d = local_dim
    cols = []
    for i in range(d):
        for j in range(i, d):
            v = np.zeros(d * d, dtype=np.complex128)
            if i == j:
                v[i * d + i] = 1.0
            else:
                v[i * d + j] = v[j * d + i] = 1.0 / math.sqrt(2.0)
            cols.append(v)
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# operator <-> vector
# ---------------------------------------------------------------------------


def op_to_vec(A: np.ndarray, labels=("1", "2")) -> Tensor:
    """|A> = (I x A) sum_i |i>|i>, i.e. |A> = sum_i |i> (A|i>).

    The first tensor factor carries the column index of A, matching the
    (I x A) convention; |sigma_Y> = (0, i, -i, 0).
    """
    A = np.asarray(A, dtype=np.complex128)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("op_to_vec requires a square matrix")
    d = A.shape[0]
    return Tensor(A.T.reshape(-1), (d, d), labels)


def vec_to_op(v: Tensor) -> np.ndarray:
    """Inverse of op_to_vec on a two-system ket with equal dims."""
    if v.is_matrix or len(v.dims) != 2 or v.dims[0] != v.dims[1]:
        raise ValueError("vec_to_op requires a ket on d x d")
    d = v.dims[0]
    return v.data.reshape(d, d).T.copy()


# ---------------------------------------------------------------------------
# numerical subspaces
# ---------------------------------------------------------------------------


def orthonormal_basis(vectors: list[np.ndarray], tol: float | None = None):
    """Orthonormal basis (columns) of the numeric span of the given vectors.

    Returns (basis, used_tol); an empty list yields a (n, 0) basis.
    """
    if not vectors:
        return np.zeros((0, 0), dtype=np.complex128), 0.0
    A = np.column_stack([np.asarray(v).reshape(-1) for v in vectors])
    U, s, _ = np.linalg.svd(A, full_matrices=False)
    if tol is None:
        tol = default_rank_tol(s, max(A.shape))
    r = int(np.sum(s > tol))
    return np.ascontiguousarray(U[:, :r]), tol


def null_space(constraint_matrix: np.ndarray, tol: float | None = None):
    """Orthonormal basis (columns) of {x : A x = 0}, numerically.

    Returns (basis, used_tol); dim = #cols(A) - rank(A).
    """
    A = np.asarray(constraint_matrix, dtype=np.complex128)
    if A.size == 0 or A.shape[0] == 0:
        n = A.shape[1] if A.ndim == 2 else 0
        return np.eye(n, dtype=np.complex128), 0.0
    _, s, Vh = np.linalg.svd(A, full_matrices=True)
    if tol is None:
        tol = default_rank_tol(s, max(A.shape))
    r = int(np.sum(s > tol))
    return np.ascontiguousarray(Vh[r:].conj().T), tol


# ---------------------------------------------------------------------------
# random sampling
# ---------------------------------------------------------------------------


def haar_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed d x d unitary via QR of a Ginibre matrix."""
    Z = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def haar_ket(d: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(d) + 1j * rng.standard_normal(d)
    return v / np.linalg.norm(v)
