"""Explicit separable Kraus protocols with closed-form success probabilities.

These serve as constructive lower bounds and as regression anchors for the
SDP/LP bounds: the mixture protocol distills psi_theta from the three-state
qutrit mixture at p = min{1, 1/(2 sin 2 theta)}, and the antisymmetric
Werner protocol produces a singlet at p = 1/(d-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "KrausProtocol",
    "mixture_distill_protocol",
    "werner_distill_protocol",
    "verify_protocol",
    "mixture_resource_state",
    "antisym_werner_state",
]


@dataclass(frozen=True)
class KrausProtocol:
    """Kraus operators mapping R_A x R_B into A x B, each a product E_A x E_B."""

    kraus_ops: tuple[np.ndarray, ...]
    in_dims: tuple[int, int]        # (dim R_A, dim R_B)
    out_dims: tuple[int, int]       # (dim A, dim B)
    claimed_probability: float

    def __post_init__(self):
        din = self.in_dims[0] * self.in_dims[1]
        dout = self.out_dims[0] * self.out_dims[1]
        for E in self.kraus_ops:
            if E.shape != (dout, din):
                raise ValueError(f"Kraus shape {E.shape} != ({dout}, {din})")
        total = self.completeness_sum()
        lam = np.linalg.eigvalsh(total)
        if lam.max() > 1 + 1e-10:
            raise ValueError("sum E^dag E exceeds the identity")

    def completeness_sum(self) -> np.ndarray:
        din = self.in_dims[0] * self.in_dims[1]
        total = np.zeros((din, din), dtype=np.complex128)
        for E in self.kraus_ops:
            total += E.conj().T @ E
        return total

    def defect(self) -> np.ndarray:
        """I - sum E^dag E, the failure-branch completion operator."""
        din = self.in_dims[0] * self.in_dims[1]
        return np.eye(din) - self.completeness_sum()

    def apply(self, rho: np.ndarray) -> np.ndarray:
        out = None
        for E in self.kraus_ops:
            term = E @ rho @ E.conj().T
            out = term if out is None else out + term
        return out

    def product_factor_residual(self) -> float:
        """Largest deviation of any Kraus operator from A x B product form."""
        worst = 0.0
        dA, dB = self.out_dims
        rA, rB = self.in_dims
        for E in self.kraus_ops:
            # realign ((a,b),(i,j)) -> ((a,i),(b,j)) and check rank 1
            R = E.reshape(dA, dB, rA, rB).transpose(0, 2, 1, 3).reshape(dA * rA, dB * rB)
            sv = np.linalg.svd(R, compute_uv=False)
            if len(sv) > 1:
                worst = max(worst, float(sv[1] / max(sv[0], 1e-300)))
        return worst


def _bra(i: int, d: int) -> np.ndarray:
    v = np.zeros((1, d))
    v[0, i] = 1.0
    return v


def _ketbra(out_i: int, in_j: int, dout: int, din: int) -> np.ndarray:
    M = np.zeros((dout, din))
    M[out_i, in_j] = 1.0
    return M


def mixture_resource_state(phases=(math.pi, math.pi, math.pi),
                           weights=(1 / 3, 1 / 3, 1 / 3)) -> np.ndarray:
    """tau = sum_i q_i |tau_i><tau_i| on C^3 x C^3 for the three-state mixture."""
    kets = mixture_resource_kets(phases)
    return sum(q * np.outer(k, k.conj()) for q, k in zip(weights, kets))


def mixture_resource_kets(phases=(math.pi, math.pi, math.pi)) -> list[np.ndarray]:
    pairs = [(0, 1), (0, 2), (1, 2)]
    kets = []
    for (i, j), th in zip(pairs, phases):
        v = np.zeros(9, dtype=np.complex128)
        v[i * 3 + j] = 1 / math.sqrt(2)
        v[j * 3 + i] = np.exp(1j * th) / math.sqrt(2)
        kets.append(v)
    return kets


def antisym_werner_state(d: int) -> np.ndarray:
    """Normalized projector onto the antisymmetric subspace of C^d x C^d."""
    P = np.zeros((d * d, d * d))
    for i in range(d):
        for j in range(d):
            P[i * d + j, j * d + i] = 1.0
    proj = (np.eye(d * d) - P) / 2.0
    return proj * (2.0 / (d * (d - 1)))


def mixture_distill_protocol(theta: float,
                             phases=(math.pi, math.pi, math.pi)) -> KrausProtocol:
    """Six-operator protocol distilling psi_theta from the qutrit mixture.

    p = min{1, 1/(2 sin 2 theta)}; works for all resource phases theta_i.
    """
    if not 0 < theta <= math.pi / 4:
        raise ValueError("theta must lie in (0, pi/4]")
    p = min(1.0, 1.0 / (2.0 * math.sin(2.0 * theta)))
    sc, ss = math.sqrt(math.cos(theta)), math.sqrt(math.sin(theta))
    sp = math.sqrt(p)
    ops = []
    pairs = [(0, 1), (0, 2), (1, 2)]
    for (i, j), th in zip(pairs, phases):
        ph = np.exp(-1j * th)
        EA1 = sc * _ketbra(0, i, 2, 3) + ss * _ketbra(1, j, 2, 3)
        EB1 = sc * _ketbra(0, j, 2, 3) + ph * ss * _ketbra(1, i, 2, 3)
        EA2 = sc * _ketbra(0, j, 2, 3) + ss * _ketbra(1, i, 2, 3)
        EB2 = ph * sc * _ketbra(0, i, 2, 3) + ss * _ketbra(1, j, 2, 3)
        ops.append(sp * np.kron(EA1, EB1))
        ops.append(sp * np.kron(EA2, EB2))
    return KrausProtocol(tuple(ops), (3, 3), (2, 2), p)


def werner_distill_protocol(d: int) -> KrausProtocol:
    """C(d,2) operators distilling a singlet from the antisymmetric Werner
    state at p = 1/(d-1)."""
    if d < 2:
        raise ValueError("d must be >= 2")
    p = 1.0 / (d - 1)
    sp = math.sqrt(p)
    ops = []
    for i in range(d):
        for j in range(i + 1, d):
            EA = _ketbra(0, i, 2, d) + _ketbra(1, j, 2, d)
            ops.append(sp * np.kron(EA, EA))
    return KrausProtocol(tuple(ops), (d, d), (2, 2), p)


@dataclass(frozen=True)
class ProtocolReport:
    p_measured: float
    proportionality_residual: float
    defect_offdiag: float
    defect_min_diag: float

    @property
    def defect_certified_separable(self) -> bool:
        """The defect is separable when diagonal in the product basis with
        nonnegative entries (a classical mixture of product projectors)."""
        return self.defect_offdiag <= 1e-10 and self.defect_min_diag >= -1e-10


def verify_protocol(proto: KrausProtocol, tau: np.ndarray,
                    target: np.ndarray, rel_tol: float = 1e-10):
    """Apply the channel to tau and check proportionality to the target state.

    Returns (p_measured, ProtocolReport); raises when the channel output is
    not proportional to the target within rel_tol.
    """
    out = proto.apply(np.asarray(tau, dtype=np.complex128))
    target = np.asarray(target, dtype=np.complex128)
    tnorm = np.linalg.norm(target)
    if tnorm == 0:
        raise ValueError("zero target")
    scale = np.trace(out).real / max(np.trace(target).real, 1e-300)
    residual = np.linalg.norm(out - scale * target) / max(np.linalg.norm(out), 1e-300)
    if np.linalg.norm(out) > 1e-14 and residual > rel_tol:
        raise ValueError(f"channel output not proportional to target "
                         f"(residual {residual:.2e})")
    defect = proto.defect()
    off = defect - np.diag(np.diag(defect))
    report = ProtocolReport(
        p_measured=float(scale),
        proportionality_residual=float(residual),
        defect_offdiag=float(np.max(np.abs(off))),
        defect_min_diag=float(np.min(np.diag(defect).real)),
    )
    return report.p_measured, report
