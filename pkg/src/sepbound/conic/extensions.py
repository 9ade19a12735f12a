"""Symmetric-extension (DPS level 2) machinery for conic programs."""

from __future__ import annotations

import numpy as np

from ..hilbert import permutation_matrix, sym_basis
from ..subspaces import Subspace
from .model import ConicProgram, MatExpr

__all__ = ["add_symmetric_extension", "symmetric_extension_subspace"]


def _primed(labels):
    return tuple(l + "'" for l in labels)


def symmetric_extension_subspace(dims, labels, extended_labels,
                                 range_within: Subspace | None = None) -> Subspace:
    """Sym^2(A-hat) x B-hat inside A-hat x A-hat' x B-hat.

    The extension ambient carries the labels of the original space followed
    by primed copies of `extended_labels`, with the primed block inserted
    right after the original one.  When range_within (a subspace of the
    original space) is given, the basis is additionally intersected with its
    lift on the (A-hat, B-hat) legs and on the (A-hat', B-hat) legs; this is
    exact for symmetric PSD extensions and shrinks the parameter block.
    """
    labels = tuple(labels)
    dims = tuple(dims)
    ext = tuple(extended_labels)
    rest = tuple(l for l in labels if l not in ext)
    if tuple(l for l in labels if l in ext) != ext:
        raise ValueError("extended_labels must appear in label order")
    dA = int(np.prod([dims[labels.index(l)] for l in ext]))
    dB = int(np.prod([dims[labels.index(l)] for l in rest]))

    ext_labels = ext + _primed(ext) + rest
    ext_dims = tuple(dims[labels.index(l)] for l in ext) * 2 \
        + tuple(dims[labels.index(l)] for l in rest)

    # grouped order (A-hat, A-hat', B-hat) matches ext_labels when the
    # original labels begin with the extended block; otherwise permute.
    grouped = ext + _primed(ext) + rest
    B_sym = np.kron(sym_basis(dA), np.eye(dB))
    if grouped != ext_labels:
        raise AssertionError("internal label ordering")
    base = Subspace(B_sym, ext_dims, ext_labels)
    if range_within is None:
        return base

    # lift range_within on the (A-hat, B-hat) legs: P x I on (A, B, A')
    P = range_within.projector().reshape(dA, dB, dA, dB)
    n = dA * dA * dB
    lift1 = np.einsum("aibj,xy->axibyj", P, np.eye(dA)).reshape(n, n)
    lift2 = np.einsum("aibj,xy->xaiybj", P, np.eye(dA)).reshape(n, n)
    eye = np.eye(n)
    stack = np.vstack([eye - base.projector(), eye - lift1, eye - lift2])
    from ..hilbert import null_space

    Bb, tol = null_space(stack)
    return Subspace(Bb, ext_dims, ext_labels, tol)


def add_symmetric_extension(prog: ConicProgram, S: MatExpr | None,
                            extended_labels, name: str = "S_ext",
                            range_within: Subspace | None = None,
                            dims=None, labels=None) -> MatExpr:
    """Create S_ext with range in Sym^2(A-hat) x B-hat, PPT across all cuts
    of {A-hat, A-hat', B-hat}, and the link ptr_{A-hat'}(S_ext) = S.

    With S=None only the extension variable and its PPT cones are created
    (the caller then uses ptr of the returned handle as its operator);
    dims/labels of the unextended space must be supplied in that case.
    """
    if S is not None:
        dims, labels = S.dims, S.labels
    sub = symmetric_extension_subspace(dims, labels, extended_labels,
                                       range_within)
    S_ext = prog.add_psd_in_subspace(name, sub)
    ext = tuple(extended_labels)
    primed = _primed(ext)
    # On sym-supported operators the primed-copy transpose has the same
    # spectrum as the unprimed one, so cuts {A-hat} and {B-hat} suffice.
    prog.add_ppt_constraint(S_ext, [ext,
                                    tuple(l for l in labels if l not in ext)])
    if S is not None:
        traced = S_ext.ptr([l for l in S_ext.labels if l not in primed])
        reordered = traced.permute(S.labels)
        prog.add_eq_matrix(reordered, S)
    return S_ext
