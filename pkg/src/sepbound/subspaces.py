"""Range-constraint subspaces and their minimum finite linear extensions.

The central objects are the canonical subspace V_d and its intersection
Q_d with the dual condition, both living on four d-dimensional systems
in the fixed order (A, RA, RB, B):

    V_d = { |Xi> : <I_d|_{RA RB} |Xi>  in  span{|I_d>_{AB}} }
    Q_d = V_d  cap  { |Xi> : <I_d|_{AB} |Xi>  in  span{|I_d>_{RA RB}} }

Task variants are images of Q_d under local invertible/isometric maps
(TwistData).  The module also implements the two-qubit reducibility
procedure and the symmetric-subspace extension used by distillation.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from . import matfile
from .hilbert import (
    Tensor,
    max_entangled,
    null_space,
    orthonormal_basis,
    permutation_matrix,
    sym_basis,
)

__all__ = [
    "Subspace",
    "TwistData",
    "adjugate",
    "canonical_subspace",
    "canonical_mfle",
    "canonical_mfle_twirl_operator",
    "TWIRL_ORDER",
    "ext_twisted_mfle",
    "ext_twisted_canonical",
    "range_constraint_subspace",
    "null_subspace",
    "two_qubit_mfle",
    "distillation_mfle",
    "PROP4_PAIR_ORDER",
    "sample_product_vector",
    "sample_symmetric_product_vector",
    "symmetric_span_check",
]

GLOBAL_ORDER = ("A", "RA", "RB", "B")

# The symmetric-subspace copy of (A, RA) lands on (B, RB) in that order;
# the ambient order is restored to GLOBAL_ORDER afterwards.
PROP4_PAIR_ORDER = ("A", "RA", "B", "RB")

# The Haar-twirl closed form lives on grouped pairs (RA, RB), (A, B).
TWIRL_ORDER = ("RA", "RB", "A", "B")


@dataclass(frozen=True)
class Subspace:
    """A linear subspace given by orthonormal basis columns of the ambient space."""

    basis: np.ndarray
    dims: tuple[int, ...]
    labels: tuple[str, ...]
    tol: float = 1e-12

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.complex128)
        if basis.ndim != 2:
            raise ValueError("basis must be a 2-d array of columns")
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(self.labels))
        n = int(np.prod(self.dims))
        if basis.shape[0] != n:
            raise ValueError(f"ambient size {basis.shape[0]} != prod(dims) {n}")
        k = basis.shape[1]
        if k:
            gram = basis.conj().T @ basis
            err = np.max(np.abs(gram - np.eye(k)))
            if err > max(self.tol, 1e-8):
                raise ValueError(f"basis columns not orthonormal (err={err:.2e})")

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def ambient_dim(self) -> int:
        return int(np.prod(self.dims))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T

    def residual(self, vec: np.ndarray) -> float:
        """Distance of vec from the subspace, relative to ||vec||."""
        v = np.asarray(vec).reshape(-1)
        nrm = np.linalg.norm(v)
        if nrm == 0:
            return 0.0
        return float(np.linalg.norm(v - self.basis @ (self.basis.conj().T @ v)) / nrm)

    def contains(self, vec: np.ndarray, tol: float = 1e-10) -> bool:
        return self.residual(vec) <= tol

    def projector_distance(self, other: "Subspace") -> float:
        return float(np.max(np.abs(self.projector() - other.projector())))

    def apply(self, M: np.ndarray) -> "Subspace":
        """Image under an injective linear map, re-orthonormalized."""
        mapped = np.asarray(M, dtype=np.complex128) @ self.basis
        B, tol = orthonormal_basis(list(mapped.T), tol=None)
        if B.shape[1] != self.dim:
            raise ValueError("map is singular on this subspace")
        n = M.shape[0]
        return Subspace(B, _sized_dims(self, n), self.labels, max(tol, self.tol))

    def intersect(self, other: "Subspace") -> "Subspace":
        if self.ambient_dim != other.ambient_dim:
            raise ValueError("ambient mismatch")
        n = self.ambient_dim
        A = np.vstack([np.eye(n) - self.projector(), np.eye(n) - other.projector()])
        B, tol = null_space(A)
        return Subspace(B, self.dims, self.labels, max(tol, self.tol, other.tol))

    def save(self, path) -> None:
        matfile.save_matrix(path, self.basis)

    @staticmethod
    def load(path, dims, labels, tol: float = 1e-12) -> "Subspace":
        return Subspace(matfile.load_matrix(path), dims, labels, tol)

    @staticmethod
    def full(dims, labels) -> "Subspace":
        n = int(np.prod(dims))
        return Subspace(np.eye(n, dtype=np.complex128), dims, labels)

    @staticmethod
    def zero(dims, labels) -> "Subspace":
        n = int(np.prod(dims))
        return Subspace(np.zeros((n, 0), dtype=np.complex128), dims, labels)


def _sized_dims(s: Subspace, n: int) -> tuple[int, ...]:
    if n == s.ambient_dim:
        return s.dims
    # a local map changed some subsystem dimension; callers supply dims later
    return (n,)


@dataclass(frozen=True)
class TwistData:
    """Local data (L1, L2, V_A, V_B) describing a task's twisted subspace.

    L1 twists the resource side (acts on RB), L2 the target side (acts on B);
    V_A and V_B embed the d-dimensional target factors into the local spaces.
    """

    d: int
    L1: np.ndarray
    L2: np.ndarray
    VA: np.ndarray
    VB: np.ndarray
    max_cond: float = 1e12

    def __post_init__(self):
        d = self.d
        for name in ("L1", "L2"):
            M = np.asarray(getattr(self, name), dtype=np.complex128)
            object.__setattr__(self, name, M)
            if M.shape != (d, d):
                raise ValueError(f"{name} must be {d}x{d}")
            if np.linalg.cond(M) > self.max_cond:
                raise ValueError(f"{name} is numerically singular")
        for name in ("VA", "VB"):
            V = np.asarray(getattr(self, name), dtype=np.complex128)
            object.__setattr__(self, name, V)
            if V.shape[1] != d:
                raise ValueError(f"{name} must have {d} columns")
            err = np.max(np.abs(V.conj().T @ V - np.eye(d)))
            if err > 1e-10:
                raise ValueError(f"{name} is not an isometry (err={err:.2e})")

    @staticmethod
    def plain(d: int, L1=None, L2=None) -> "TwistData":
        eye = np.eye(d)
        return TwistData(d, eye if L1 is None else L1, eye if L2 is None else L2,
                         eye, eye)

    @property
    def dims(self) -> tuple[int, int, int, int]:
        return (self.VA.shape[0], self.d, self.d, self.VB.shape[0])

    def local_map(self) -> np.ndarray:
        """The map (V_A x I x (L1^dag)^{-1} x V_B L2) in the global order."""
        inv = np.linalg.inv(self.L1.conj().T)
        return np.kron(np.kron(self.VA, np.eye(self.d)),
                       np.kron(inv, self.VB @ self.L2))


def adjugate(A: np.ndarray) -> np.ndarray:
    """Adjugate by cofactor expansion; polynomial in the entries, no division."""
    A = np.asarray(A)
    d = A.shape[0]
    if d == 1:
        return np.ones((1, 1), dtype=A.dtype)
    adj = np.empty_like(A)
    idx = list(range(d))
    for i in range(d):
        rows = idx[:i] + idx[i + 1:]
        for j in range(d):
            cols = idx[:j] + idx[j + 1:]
            minor = A[np.ix_(rows, cols)]
            adj[j, i] = (-1) ** (i + j) * np.linalg.det(minor)
    return adj


# ---------------------------------------------------------------------------
# canonical subspace family
# ---------------------------------------------------------------------------


def _contraction_rows(d: int, pair: str) -> np.ndarray:
    """Matrix of the map |Xi> -> <I_d|_pair |Xi> on (A, RA, RB, B).

    pair is "R" (contract RA,RB; output on A,B) or "T" (contract A,B;
    output on RA,RB).
    """
    total = d**4
    out = np.zeros((d * d, total), dtype=np.complex128)
    for a in range(d):
        for b in range(d):
            for i in range(d):
                if pair == "R":
                    col = ((a * d + i) * d + i) * d + b
                    out[a * d + b, col] += 1.0
                else:
                    col = ((i * d + a) * d + b) * d + i
                    out[a * d + b, col] += 1.0
    return out


def _line_complement(d: int) -> np.ndarray:
    """Projector onto the orthocomplement of span{|I_d>} in C^{d^2}."""
    v = max_entangled(d).data
    return np.eye(d * d) - np.outer(v, v.conj()) / d


def canonical_subspace(d: int) -> Subspace:
    """V_d = {|Xi> : <I_d|_{RA RB}|Xi> in span{|I_d>_{AB}}}; dim d^4-(d^2-1)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    M = _line_complement(d) @ _contraction_rows(d, "R")
    B, tol = null_space(M)
    return Subspace(B, (d, d, d, d), GLOBAL_ORDER, tol)


def canonical_mfle(d: int) -> Subspace:
    """Q_d = V_d cap V'_d; dim d^4 - 2(d^2-1)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    MR = _line_complement(d) @ _contraction_rows(d, "R")
    MT = _line_complement(d) @ _contraction_rows(d, "T")
    B, tol = null_space(np.vstack([MR, MT]))
    return Subspace(B, (d, d, d, d), GLOBAL_ORDER, tol)


def canonical_mfle_twirl_operator(d: int) -> Tensor:
    """Closed form phi+ x phi+ + (I-phi+) x (I-phi+)/(d^2-1) on TWIRL_ORDER.

    Its range equals Q_d after permuting (RA, RB, A, B) back to the global
    order; the first pair factor acts on (RA, RB), the second on (A, B).
    """
    phi = max_entangled(d, normalized=True).outer().data
    comp = np.eye(d * d) - phi
    T = np.kron(phi, phi) + np.kron(comp, comp) / (d * d - 1)
    return Tensor(T, (d, d, d, d), TWIRL_ORDER)


def ext_twisted_mfle(tw: TwistData) -> Subspace:
    """Image of Q_d under (V_A x I x (L1^dag)^{-1} x V_B L2), re-orthonormalized."""
    q = canonical_mfle(tw.d)
    mapped = tw.local_map() @ q.basis
    B, tol = orthonormal_basis(list(mapped.T))
    if B.shape[1] != q.dim:
        raise ValueError("twist map collapsed the subspace")
    return Subspace(B, tw.dims, GLOBAL_ORDER, max(tol, q.tol))


def ext_twisted_canonical(tw: TwistData) -> Subspace:
    """Image of V_d under the same local map (the task subspace W-hat)."""
    v = canonical_subspace(tw.d)
    mapped = tw.local_map() @ v.basis
    B, tol = orthonormal_basis(list(mapped.T))
    if B.shape[1] != v.dim:
        raise ValueError("twist map collapsed the subspace")
    return Subspace(B, tw.dims, GLOBAL_ORDER, max(tol, v.tol))


# ---------------------------------------------------------------------------
# generic range-constraint subspaces
# ---------------------------------------------------------------------------


def _eta_contractions(tau: Tensor, dims, labels, conjugate: bool, tol: float):
    """Contraction matrices <eta_y| x I for eta_y an eigenbasis of tau (bar)."""
    rho = tau.data.conj() if conjugate else tau.data
    if rho.ndim == 1:
        rho = np.outer(rho, rho.conj())
    evals, evecs = np.linalg.eigh(rho)
    cut = max(tol, np.max(np.abs(evals)) * 1e-12)
    etas = [evecs[:, i] for i in range(len(evals)) if evals[i] > cut]

    r_labels = [l for l in labels if l in tau.labels]
    rest = [l for l in labels if l not in tau.labels]
    d_rest = int(np.prod([dims[list(labels).index(l)] for l in rest]))
    perm = permutation_matrix(dims, labels, tuple(r_labels) + tuple(rest))
    mats = []
    for eta in etas:
        K = np.kron(eta.conj()[None, :], np.eye(d_rest)) @ perm
        mats.append(K)
    return mats, rest, d_rest


def range_constraint_subspace(tau: Tensor, E_range: Subspace, dims, labels,
                              conjugate: bool = True) -> Subspace:
    """W = {|Xi> : <eta|Xi> in range(E) for all eta in range(tau-bar)}.

    tau may be a ket or a PSD matrix on a subset of the labels; E_range lives
    on the remaining labels.  With conjugate=False the eigenbasis of tau
    itself is used (the convention for measurement-type tasks).
    """
    mats, rest, d_rest = _eta_contractions(tau, dims, labels, conjugate, 0.0)
    if not mats or E_range.dim == d_rest:
        return Subspace.full(dims, labels)
    P_perp = np.eye(d_rest) - E_range.projector()
    rows = np.vstack([P_perp @ K for K in mats])
    B, tol = null_space(rows)
    return Subspace(B, dims, labels, tol)


def null_subspace(tau: Tensor, dims, labels, conjugate: bool = True) -> Subspace:
    """W-degree = {|Xi> : <eta|Xi> = 0 for all eta in range(tau-bar)}."""
    mats, _, _ = _eta_contractions(tau, dims, labels, conjugate, 0.0)
    if not mats:
        return Subspace.full(dims, labels)
    B, tol = null_space(np.vstack(mats))
    return Subspace(B, dims, labels, tol)


# ---------------------------------------------------------------------------
# two-qubit MFLE (reducibility of the determinant quadric)
# ---------------------------------------------------------------------------


def two_qubit_mfle(V: Subspace, rank_tol_factor: float = 1e-9) -> list[Subspace]:
    """MFLE components of Segre cap V for V inside C^2 x C^2.

    Restricting the determinant x1*x4 - x2*x3 to V = {V t} gives a quadratic
    f(t) = t^T G t.  Over C, f splits into linear factors iff rank(G) <= 2;
    the factors' kernels map to the MFLE components.
    """
    if V.ambient_dim != 4:
        raise ValueError("two_qubit_mfle requires ambient C^2 x C^2")
    if V.dim == 0:
        raise ValueError("zero subspace has no product vectors")
    rows = V.basis  # 4 x k
    v1, v2, v3, v4 = (rows[i, :] for i in range(4))
    G = 0.5 * (np.outer(v1, v4) + np.outer(v4, v1)
               - np.outer(v2, v3) - np.outer(v3, v2))
    sv = np.linalg.svd(G, compute_uv=False)
    cut = rank_tol_factor * max(sv[0] if len(sv) else 0.0, 1.0)
    rank = int(np.sum(sv > cut))

    if rank == 0 or rank >= 3:
        # f == 0 (everything is product) or irreducible quadric: span(E) = V
        return [V]

    # restrict to the 2-dim (or 1-dim) column space: G = W M W^T
    U, _, _ = np.linalg.svd(G)
    W = U[:, :max(rank, 1)]
    M = W.conj().T @ G @ W.conj()
    covectors = _factor_binary_quadratic(M, W)
    out = []
    for ell in covectors:
        K, tol = null_space(ell[None, :])
        mapped = V.basis @ K
        B, tol2 = orthonormal_basis(list(mapped.T))
        out.append(Subspace(B, V.dims, V.labels, max(tol, tol2, V.tol)))
    # drop duplicate subspace when the two factors coincide
    if len(out) == 2 and out[0].dim == out[1].dim \
            and out[0].projector_distance(out[1]) < 1e-8:
        out = out[:1]
    return out


def _factor_binary_quadratic(M: np.ndarray, W: np.ndarray) -> list[np.ndarray]:
    """Split s^T M s (dim <= 2) into linear covectors on the original t-space."""
    if M.shape == (1, 1):
        ell = W[:, 0].conj() * np.sqrt(M[0, 0] + 0j)
        return [ell]
    a, b, c = M[0, 0], M[0, 1], M[1, 1]
    w1, w2 = W[:, 0].conj(), W[:, 1].conj()
    if abs(a) < 1e-14 and abs(c) < 1e-14:
        return [w1, w2]  # f = 2b s1 s2
    if abs(a) < 1e-14:
        # f = s2 (2b s1 + c s2)
        return [w2, 2 * b * w1 + c * w2]
    disc = np.sqrt(b * b - a * c + 0j)
    r1, r2 = (-b + disc) / a, (-b - disc) / a
    # f = a (s1 - r1 s2)(s1 - r2 s2)
    return [w1 - r1 * w2, w1 - r2 * w2]


# ---------------------------------------------------------------------------
# distillation MFLE (Prop.-4 style symmetric subspace)
# ---------------------------------------------------------------------------


def distillation_mfle(L: np.ndarray, d: int) -> Subspace:
    """(I x I x L.sigma_Y x I) Sym^2(C^2 x C^d) on (A, RA, RB, B).

    The second symmetric copy of (A, RA) is identified with (B, RB) in that
    order (PROP4_PAIR_ORDER) before permuting back to the global order; the
    target twist L acts on B.  dim = (2d)(2d+1)/2.
    """
    L = np.asarray(L, dtype=np.complex128)
    if L.shape != (2, 2) or np.linalg.cond(L) > 1e12:
        raise ValueError("L must be an invertible 2x2 matrix")
    m = 2 * d
    basis = sym_basis(m)  # columns in (A, RA, B, RB) with pair factors of size 2d
    sigma_y = np.array([[0, -1j], [1j, 0]])
    twist = np.kron(np.kron(np.eye(2 * d), L @ sigma_y), np.eye(d))
    dims_pair = (2, d, 2, d)
    perm = permutation_matrix(dims_pair, PROP4_PAIR_ORDER, GLOBAL_ORDER)
    mapped = perm @ (twist @ basis)
    B, tol = orthonormal_basis(list(mapped.T))
    if B.shape[1] != basis.shape[1]:
        raise ValueError("twist collapsed the symmetric subspace")
    return Subspace(B, (2, d, d, 2), GLOBAL_ORDER, tol)


# ---------------------------------------------------------------------------
# product-vector samplers
# ---------------------------------------------------------------------------


def _lift_pair(A: np.ndarray, B: np.ndarray, d: int) -> np.ndarray:
    """|A>_{A,RA} x |B>_{RB,B} as a flat vector on (A, RA, RB, B)."""
    ketA = A.reshape(-1)            # component A[a,i] at flat (a,i)
    ketB = B.T.reshape(-1)          # component B[b,j] at flat (j,b)
    return np.kron(ketA, ketB)


def sample_product_vector(tw: TwistData, rng) -> Tensor:
    """A random member of E = Segre cap (W \\ W-degree) for a twisted task.

    Draws [A] with iid standard complex Gaussian entries, sets [B]^T =
    adj([A]), lifts to |A>|B>, applies the local twist, and normalizes.
    The result is product across (A,RA):(RB,B) and lies in W-hat almost
    surely outside W-degree.
    """
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    d = tw.d
    A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    B = adjugate(A).T
    vec = tw.local_map() @ _lift_pair(A, B, d)
    nrm = np.linalg.norm(vec)
    if nrm < 1e-12:
        raise ValueError("degenerate sample")
    return Tensor(vec / nrm, tw.dims, GLOBAL_ORDER)


def sample_symmetric_product_vector(L: np.ndarray, d: int, rng) -> Tensor:
    """A random member of the distillation family: twisted |v> x |v|."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    m = 2 * d
    v = rng.standard_normal(m) + 1j * rng.standard_normal(m)
    vec = np.kron(v, v)  # on (A, RA, B, RB)
    sigma_y = np.array([[0, -1j], [1j, 0]])
    twist = np.kron(np.kron(np.eye(2 * d), np.asarray(L) @ sigma_y), np.eye(d))
    perm = permutation_matrix((2, d, 2, d), PROP4_PAIR_ORDER, GLOBAL_ORDER)
    out = perm @ (twist @ vec)
    return Tensor(out / np.linalg.norm(out), (2, d, d, 2), GLOBAL_ORDER)


def symmetric_span_check(local_dim: int, n_samples: int, seed: int = 0,
                         tol: float = 1e-8) -> bool:
    """True when n random |phi> x |phi| span all of Sym^2(C^local_dim)."""
    rng = np.random.default_rng(seed)
    vecs = []
    for _ in range(n_samples):
        v = rng.standard_normal(local_dim) + 1j * rng.standard_normal(local_dim)
        vecs.append(np.kron(v, v))
    B, _ = orthonormal_basis(vecs)
    S = sym_basis(local_dim)
    P_span = B @ B.conj().T
    P_sym = S @ S.conj().T
    return bool(np.max(np.abs(P_span - P_sym)) <= tol)
