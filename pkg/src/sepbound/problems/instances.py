"""Task catalog: the concrete non-local operations studied here.

Each constructor packages the target data, the resource state, and the
Table-1 factorization (V_A, V_B, L_1, L_2) used by the twisted-subspace
builders.  Resource states on (RA, RB) are kets for all tasks except
distillation, which carries a fixed mixed state.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..hilbert import Bipartition, Tensor, max_entangled, schmidt_rank
from ..subspaces import TwistData

__all__ = [
    "TaskKind",
    "RelaxationLevel",
    "TaskInstance",
    "controlled_phase_task",
    "sjm_task",
    "sjm_verification_task",
    "schmidt_verification_task",
    "mixture_distillation_task",
    "sjm_local_operators",
    "instance_to_json",
    "instance_from_json",
]


class TaskKind(str, Enum):
    UNITARY = "unitary"
    POVM = "povm"
    VERIFICATION = "verification"
    DISTILLATION = "distillation"


class RelaxationLevel(str, Enum):
    PPT = "PPT"
    PPT_MFLE = "PPT_MFLE"
    DPS2 = "DPS2"
    PPTSTAR_MFLE = "PPTSTAR_MFLE"


@dataclass(frozen=True)
class TaskInstance:
    kind: TaskKind
    name: str
    d: int                                   # Schmidt rank of the resource
    resource: np.ndarray                     # ket, or density matrix (mixed)
    resource_is_pure: bool
    twists: tuple[TwistData, ...]            # one per measurement outcome
    target_norms: tuple[float, ...]          # ||E_m||^2 per outcome
    param_name: str = "theta"
    param_value: float = float("nan")
    # unitary extras: local dimensions (dA1, dA2, dB1, dB2)
    unitary_dims: tuple[int, int, int, int] | None = None
    # distillation extras
    distill_L: np.ndarray | None = None
    resource_kets: tuple[np.ndarray, ...] | None = None
    phases: tuple[float, ...] | None = None

    def check_schmidt_assumptions(self):
        """MFLE relaxations assume Schmidt(resource) matches the target rank d."""
        if self.resource_is_pure:
            ket = Tensor.ket(self.resource, (self.resource.size // self.d_r,
                                             self.d_r), ("RA", "RB"))
            r = schmidt_rank(ket, Bipartition(("RA",), ("RB",)), tol=1e-9)
            if r != self.d:
                raise ValueError(
                    f"resource Schmidt rank {r} != required {self.d}")

    @property
    def d_r(self) -> int:
        n = self.resource.shape[0] if self.resource.ndim == 2 else self.resource.size
        return int(round(math.isqrt(n)))

    @property
    def n_outcomes(self) -> int:
        return len(self.twists)


def _resource_ket(theta: float, d: int = 2) -> tuple[np.ndarray, np.ndarray]:
    """|tau_theta> = cos t |00> + sin t |11> and its twist L."""
    if d != 2:
        raise ValueError("angle-parametrized resources are two-dimensional")
    L = np.diag([math.cos(theta), math.sin(theta)])
    ket = np.kron(np.eye(2), L) @ max_entangled(2).data
    return ket, L


def controlled_phase_task(theta: float, phi: float = math.pi / 4,
                          name: str = "ctrl_t") -> TaskInstance:
    """Controlled-phase gate (controlled-T by default) assisted by tau_theta.

    Any two-qubit controlled unitary is locally equivalent to this family.
    """
    ket, L1 = _resource_ket(theta)
    L2 = np.array([[1.0, 1.0], [1.0, np.exp(1j * phi)]])
    V = np.zeros((4, 2))
    V[0, 0] = V[3, 1] = 1.0
    tw = TwistData(2, L1, L2, V, V)
    norm = float(np.trace(L2.conj().T @ L2).real)  # ||U||^2 = d_A d_B
    return TaskInstance(TaskKind.UNITARY, name, 2, ket, True, (tw,), (norm,),
                        param_value=theta, unitary_dims=(2, 2, 2, 2))


_SJM_P1 = (math.sqrt(3) + 1) / (2 * math.sqrt(2))
_SJM_P2 = (math.sqrt(3) - 1) / (2 * math.sqrt(2))


def sjm_local_operators() -> list[np.ndarray]:
    """The four L_m with |M_m> = (I x L_m) |I_2>, a symmetric joint POVM."""
    zeta = np.exp(1j * math.pi / 3)
    s3 = math.sqrt(3)
    L1 = np.diag([_SJM_P1, -_SJM_P2])
    L2 = np.array([[_SJM_P2, 1], [1, _SJM_P1]]) / s3
    L3 = np.array([[_SJM_P2, zeta**2], [-zeta, _SJM_P1]]) / s3
    L4 = np.array([[_SJM_P2, -zeta], [zeta**2, _SJM_P1]]) / s3
    return [L1, L2, L3, L4]


def sjm_task(theta: float, name: str = "sjm") -> TaskInstance:
    """The symmetric joint measurement implemented with tau_theta."""
    ket, L = _resource_ket(theta)
    twists = tuple(TwistData(2, L, Lm, np.eye(2), np.eye(2))
                   for Lm in sjm_local_operators())
    norms = tuple(float(np.trace(Lm.conj().T @ Lm).real)
                  for Lm in sjm_local_operators())
    return TaskInstance(TaskKind.POVM, name, 2, ket, True, twists, norms,
                        param_value=theta)


def sjm_verification_task(theta: float, name: str = "verify_sjm") -> TaskInstance:
    """Verify the first SJM element phi = p1|00> - p2|11> using tau_theta."""
    ket, L = _resource_ket(theta)
    L1 = np.diag([_SJM_P1, -_SJM_P2])
    tw = TwistData(2, L, L1, np.eye(2), np.eye(2))
    return TaskInstance(TaskKind.VERIFICATION, name, 2, ket, True, (tw,), (1.0,),
                        param_value=theta)


def schmidt_verification_task(p: list[float], q: list[float],
                              name: str = "verify_blocked") -> TaskInstance:
    """Verification of phi = sum_i sqrt(p_i)|ii> assisted by sum_i sqrt(q_i)|ii>."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if len(p) != len(q):
        raise ValueError("p and q must have the same length")
    if np.any(p <= 0) or np.any(q <= 0):
        raise ValueError("Schmidt coefficient lists must be positive")
    p = p / p.sum()
    q = q / q.sum()
    d = len(p)
    L = np.diag(np.sqrt(q))
    L1 = np.diag(np.sqrt(p))
    ket = np.kron(np.eye(d), L) @ max_entangled(d).data
    tw = TwistData(d, L, L1, np.eye(d), np.eye(d))
    return TaskInstance(TaskKind.VERIFICATION, name, d, ket, True, (tw,), (1.0,),
                        param_name="t", param_value=float("nan"))


def mixture_distillation_task(theta: float, phases=(math.pi,) * 3,
                              weights=(1 / 3,) * 3,
                              name: str = "distill3") -> TaskInstance:
    """Distill psi_theta from the three-state qutrit mixture."""
    from ..protocols import mixture_resource_kets

    if not 0 < theta <= math.pi / 4:
        raise ValueError("theta must lie in (0, pi/4]")
    kets = mixture_resource_kets(phases)
    tau = sum(w * np.outer(k, k.conj()) for w, k in zip(weights, kets))
    L = np.diag([math.cos(theta), math.sin(theta)])
    return TaskInstance(TaskKind.DISTILLATION, name, 2, tau, False, (), (1.0,),
                        param_value=theta, distill_L=L,
                        resource_kets=tuple(kets), phases=tuple(phases))


# ---------------------------------------------------------------------------
# serialization (human-readable JSON; complex entries as [re, im])
# ---------------------------------------------------------------------------


def _mat_to_json(M: np.ndarray):
    M = np.asarray(M, dtype=np.complex128)
    if M.ndim == 1:
        return [[float(v.real), float(v.imag)] for v in M]
    return [[[float(v.real), float(v.imag)] for v in row] for row in M]


def _mat_from_json(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 2:  # vector
        return arr[:, 0] + 1j * arr[:, 1]
    return arr[..., 0] + 1j * arr[..., 1]


def instance_to_json(inst: TaskInstance) -> str:
    doc = {
        "kind": inst.kind.value,
        "name": inst.name,
        "d": inst.d,
        "param_name": inst.param_name,
        "param_value": inst.param_value,
        "resource_is_pure": inst.resource_is_pure,
        "resource": _mat_to_json(inst.resource),
        "twists": [
            {"d": tw.d, "L1": _mat_to_json(tw.L1), "L2": _mat_to_json(tw.L2),
             "VA": _mat_to_json(tw.VA), "VB": _mat_to_json(tw.VB)}
            for tw in inst.twists
        ],
        "target_norms": list(inst.target_norms),
    }
    if inst.distill_L is not None:
        doc["distill_L"] = _mat_to_json(inst.distill_L)
    if inst.resource_kets is not None:
        doc["resource_kets"] = [_mat_to_json(k) for k in inst.resource_kets]
    return json.dumps(doc, indent=2)


def instance_from_json(text: str) -> TaskInstance:
    doc = json.loads(text)
    twists = tuple(
        TwistData(t["d"], _mat_from_json(t["L1"]), _mat_from_json(t["L2"]),
                  _mat_from_json(t["VA"]), _mat_from_json(t["VB"]))
        for t in doc["twists"]
    )
    return TaskInstance(
        kind=TaskKind(doc["kind"]),
        name=doc["name"],
        d=doc["d"],
        resource=_mat_from_json(doc["resource"]),
        resource_is_pure=doc["resource_is_pure"],
        twists=twists,
        target_norms=tuple(doc["target_norms"]),
        param_name=doc["param_name"],
        param_value=doc["param_value"],
        distill_L=_mat_from_json(doc["distill_L"]) if "distill_L" in doc else None,
        resource_kets=tuple(_mat_from_json(k) for k in doc["resource_kets"])
        if "resource_kets" in doc else None,
    )
