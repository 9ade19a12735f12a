import numpy as np
import pytest

from sepbound.hilbert import (
    Bipartition,
    Tensor,
    antisym_projector,
    haar_ket,
    haar_unitary,
    identity,
    max_entangled,
    null_space,
    op_to_vec,
    operator_schmidt_rank,
    orthonormal_basis,
    partial_trace,
    partial_transpose,
    permutation_matrix,
    permute_systems,
    schmidt_rank,
    schmidt_values,
    sym_basis,
    sym_projector,
    tensor_product,
    vec_to_op,
)

RNG = np.random.default_rng(7)


def ket(vals, dims, labels):
    return Tensor.ket(np.array(vals, dtype=complex), dims, labels)


class TestTensorProduct:
    def test_basis_case(self):
        v0 = ket([1, 0], (2,), ("A",))
        w0 = ket([1, 0], (2,), ("B",))
        out = tensor_product([v0, w0])
        assert out.dims == (2, 2)
        np.testing.assert_allclose(out.data, [1, 0, 0, 0])

    def test_identity_case(self):
        i2 = identity((2,), ("A",))
        i3 = identity((3,), ("B",))
        out = tensor_product([i2, i3])
        np.testing.assert_allclose(out.data, np.eye(6))

    def test_normalization(self):
        phi = max_entangled(2, ("A", "B"), normalized=True)
        phi2 = max_entangled(2, ("C", "D"), normalized=True)
        out = tensor_product([phi, phi2])
        assert out.norm() == pytest.approx(1.0)

    def test_duplicate_label_rejected(self):
        phi = max_entangled(2, ("A", "B"))
        with pytest.raises(ValueError):
            tensor_product([phi, max_entangled(2, ("B", "C"))])


class TestMaxEntangled:
    def test_unnormalized_d2(self):
        np.testing.assert_allclose(max_entangled(2).data, [1, 0, 0, 1])

    def test_normalized_norm(self):
        assert max_entangled(2, normalized=True).norm() == pytest.approx(1.0)

    def test_self_overlap_d3(self):
        v = max_entangled(3).data
        assert np.vdot(v, v).real == pytest.approx(3.0)

    def test_zero_dim_rejected(self):
        with pytest.raises(ValueError):
            max_entangled(0)


class TestPartialTrace:
    def test_maximally_mixed_marginal(self):
        phi = max_entangled(2, ("A", "B"), normalized=True)
        red = partial_trace(phi.outer(), keep=["A"])
        np.testing.assert_allclose(red.data, np.eye(2) / 2, atol=1e-14)

    def test_keep_all_is_identity_map(self):
        M = Tensor(RNG.standard_normal((4, 4)), (2, 2), ("A", "B"))
        out = partial_trace(M, keep=["A", "B"])
        np.testing.assert_allclose(out.data, M.data)

    def test_trace_preserved(self):
        M = Tensor(RNG.standard_normal((6, 6)) + 1j * RNG.standard_normal((6, 6)),
                   (2, 3), ("A", "B"))
        out = partial_trace(M, keep=["B"])
        assert out.trace() == pytest.approx(M.trace())

    def test_unknown_label_rejected(self):
        M = identity((2, 2), ("A", "B"))
        with pytest.raises(ValueError):
            partial_trace(M, keep=["Z"])

    def test_canonical_product_vector_contracts_to_mes_line(self):
        # Oracle: dense contraction + rank check.  For [A][B]^T = det(A) I the
        # product vector |A>|B> on (A,RA,RB,B) contracted against tau = |I><I|
        # on (RA,RB) lands in span{|I_d><I_d|} on (A,B).
        d = 3
        A = RNG.standard_normal((d, d)) + 1j * RNG.standard_normal((d, d))
        B = np.linalg.inv(A).T * np.linalg.det(A)  # adjugate transpose
        # |A> = sum_i A|i>_A |i>_RA has component A[a, i] at flat (a, i)
        ketA = Tensor.ket(A.reshape(-1), (d, d), ("A", "RA"))
        # |B> = sum_j |j>_RB B|j>_B has component B[b, j] at flat (j, b)
        ketB = Tensor.ket(B.T.reshape(-1), (d, d), ("RB", "B"))
        pi = tensor_product([ketA, ketB])
        pi = permute_systems(pi, ("A", "RA", "RB", "B"))
        tau = max_entangled(2 * 0 + d, ("RA", "RB"))
        S = pi.outer()
        M = tensor_product([tau.outer(), identity((d, d), ("A", "B"))])
        M = permute_systems(M, ("A", "RA", "RB", "B"))
        prod = Tensor(S.data @ M.data, S.dims, S.labels)
        red = partial_trace(prod, keep=["A", "B"])
        mes = max_entangled(d, ("A", "B"))
        # rank 1 and aligned with |I_d><I_d|
        sv = np.linalg.svd(red.data, compute_uv=False)
        assert sv[1] / sv[0] < 1e-12
        overlap = np.vdot(mes.data, red.data @ mes.data).real
        assert overlap == pytest.approx(np.trace(red.data).real * d, rel=1e-10)


class TestPartialTranspose:
    def test_antisym_projector_pt_closed_form(self):
        # (Pi_wedge)^{T_1} = I/2 - (d/2) phi+_d, checked at d=3
        d = 3
        pt = partial_transpose(antisym_projector(d, ("1", "2")), {"1"})
        phi = max_entangled(d, ("1", "2"), normalized=True).outer()
        expected = np.eye(d * d) / 2 - (d / 2) * phi.data
        np.testing.assert_allclose(pt.data, expected, atol=1e-12)

    def test_involution(self):
        M = Tensor(RNG.standard_normal((8, 8)) + 1j * RNG.standard_normal((8, 8)),
                   (2, 2, 2), ("A", "B", "C"))
        out = partial_transpose(partial_transpose(M, {"B"}), {"B"})
        np.testing.assert_allclose(out.data, M.data)

    def test_product_state_stays_psd(self):
        a = haar_ket(2, RNG)
        b = haar_ket(3, RNG)
        rho = tensor_product([Tensor.ket(a, (2,), ("A",)).outer(),
                              Tensor.ket(b, (3,), ("B",)).outer()])
        pt = partial_transpose(rho, {"A"})
        evals = np.linalg.eigvalsh(pt.data)
        assert evals.min() >= -1e-12

    def test_full_set_equals_transpose(self):
        M = Tensor(RNG.standard_normal((6, 6)) + 1j * RNG.standard_normal((6, 6)),
                   (2, 3), ("A", "B"))
        out = partial_transpose(M, {"A", "B"})
        np.testing.assert_allclose(out.data, M.data.T)


class TestPermuteSystems:
    def test_swap_basis_ket(self):
        v = ket([0, 1, 0, 0], (2, 2), ("A", "B"))  # |01>
        out = permute_systems(v, ("B", "A"))
        np.testing.assert_allclose(out.data, [0, 0, 1, 0])  # |10>

    def test_inverse_roundtrip(self):
        t = Tensor(RNG.standard_normal(24), (2, 3, 4), ("A", "B", "C"))
        out = permute_systems(permute_systems(t, ("C", "A", "B")), ("A", "B", "C"))
        np.testing.assert_allclose(out.data, t.data)

    def test_swap_operator_invariant(self):
        swap = 2 * sym_projector(2, ("A", "B")).data - np.eye(4)
        t = Tensor(swap, (2, 2), ("A", "B"))
        out = permute_systems(t, ("B", "A"))
        np.testing.assert_allclose(out.data, swap)

    def test_permutation_matrix_agrees(self):
        t = Tensor(RNG.standard_normal(12) + 1j * RNG.standard_normal(12),
                   (2, 3, 2), ("A", "B", "C"))
        P = permutation_matrix(t.dims, t.labels, ("C", "A", "B"))
        direct = permute_systems(t, ("C", "A", "B"))
        np.testing.assert_allclose(P @ t.data, direct.data)


class TestSchmidt:
    def test_bell_state(self):
        phi = max_entangled(2, ("A", "B"), normalized=True)
        cut = Bipartition(("A",), ("B",))
        sv = schmidt_values(phi, cut)
        np.testing.assert_allclose(sv, [1 / np.sqrt(2)] * 2)
        assert schmidt_rank(phi, cut) == 2

    def test_constructed_angles(self):
        th = np.pi / 6
        v = ket([np.cos(th), 0, 0, np.sin(th)], (2, 2), ("A", "B"))
        sv = schmidt_values(v, Bipartition(("A",), ("B",)))
        np.testing.assert_allclose(sv, [np.cos(th), np.sin(th)], atol=1e-14)

    def test_rank_phi3(self):
        phi = max_entangled(3, ("A", "B"))
        assert schmidt_rank(phi, Bipartition(("A",), ("B",))) == 3

    def test_squared_values_sum_to_norm(self):
        v = Tensor(RNG.standard_normal(12) + 1j * RNG.standard_normal(12),
                   (4, 3), ("A", "B"))
        sv = schmidt_values(v, Bipartition(("A",), ("B",)))
        assert np.sum(sv**2) == pytest.approx(v.norm() ** 2)


class TestOperatorSchmidtRank:
    def test_swap_is_four(self):
        # Oracle: SVD of the realigned 4x4 matrix.
        swap = 2 * sym_projector(2, ("A", "B")).data - np.eye(4)
        t = Tensor(swap, (2, 2), ("A", "B"))
        assert operator_schmidt_rank(t, Bipartition(("A",), ("B",))) == 4

    def test_identity_is_one(self):
        t = identity((2, 2), ("A", "B"))
        assert operator_schmidt_rank(t, Bipartition(("A",), ("B",))) == 1

    def test_cnot_is_two(self):
        cnot = np.eye(4)[[0, 1, 3, 2]]
        t = Tensor(cnot, (2, 2), ("A", "B"))
        assert operator_schmidt_rank(t, Bipartition(("A",), ("B",))) == 2


class TestSymAntisym:
    def test_traces_d2(self):
        assert sym_projector(2).trace().real == pytest.approx(3.0)
        assert antisym_projector(2).trace().real == pytest.approx(1.0)

    def test_trace_antisym_d3(self):
        assert antisym_projector(3).trace().real == pytest.approx(3.0)

    def test_antisym_kills_mes(self):
        d = 3
        phi = max_entangled(d, normalized=True)
        out = antisym_projector(d).data @ phi.data
        assert np.linalg.norm(out) < 1e-14

    def test_resolution_of_identity(self):
        for d in (2, 3, 4):
            total = sym_projector(d).data + antisym_projector(d).data
            np.testing.assert_allclose(total, np.eye(d * d), atol=1e-14)

    def test_commutes_with_uxu(self):
        rng = np.random.default_rng(11)
        for d in (2, 3):
            P = sym_projector(d).data
            Q = antisym_projector(d).data
            for _ in range(100):
                U = haar_unitary(d, rng)
                UU = np.kron(U, U)
                assert np.max(np.abs(P @ UU - UU @ P)) <= 1e-10
                assert np.max(np.abs(Q @ UU - UU @ Q)) <= 1e-10

    def test_sym_basis_spans_projector(self):
        for d in (2, 3):
            B = sym_basis(d)
            np.testing.assert_allclose(B @ B.conj().T, sym_projector(d).data,
                                       atol=1e-12)


class TestOpToVec:
    def test_identity_gives_mes(self):
        v = op_to_vec(np.eye(2))
        np.testing.assert_allclose(v.data, max_entangled(2).data)

    def test_sigma_y(self):
        sy = np.array([[0, -1j], [1j, 0]])
        np.testing.assert_allclose(op_to_vec(sy).data, [0, 1j, -1j, 0])

    def test_norm_is_hs_norm(self):
        A = RNG.standard_normal((3, 3)) + 1j * RNG.standard_normal((3, 3))
        assert op_to_vec(A).norm() ** 2 == pytest.approx(np.trace(A.conj().T @ A).real)

    def test_round_trip(self):
        A = RNG.standard_normal((4, 4)) + 1j * RNG.standard_normal((4, 4))
        np.testing.assert_allclose(vec_to_op(op_to_vec(A)), A)

    def test_non_square_rejected(self):
        with pytest.raises(ValueError):
            op_to_vec(np.ones((2, 3)))


class TestNumericalSubspaces:
    def test_orthonormal_basis_fixed_point(self):
        vecs = [RNG.standard_normal(6) + 1j * RNG.standard_normal(6) for _ in range(3)]
        vecs.append(vecs[0] + vecs[1])  # dependent
        B1, _ = orthonormal_basis(vecs)
        assert B1.shape[1] == 3
        B2, _ = orthonormal_basis(list(B1.T))
        P1, P2 = B1 @ B1.conj().T, B2 @ B2.conj().T
        assert np.max(np.abs(P1 - P2)) <= 1e-10

    def test_orthonormal_basis_residuals(self):
        vecs = [RNG.standard_normal(5) for _ in range(4)]
        B, tol = orthonormal_basis(vecs)
        P = B @ B.conj().T
        for v in vecs:
            assert np.linalg.norm(P @ v - v) <= 100 * tol * np.linalg.norm(v)

    def test_empty_list_zero_subspace(self):
        B, _ = orthonormal_basis([])
        assert B.shape[1] == 0

    def test_null_space(self):
        A = RNG.standard_normal((3, 7)) + 1j * RNG.standard_normal((3, 7))
        N, tol = null_space(A)
        assert N.shape == (7, 4)
        assert np.max(np.abs(A @ N)) <= 100 * tol


class TestInvariants:
    def test_ptr_factorizes_over_products(self):
        X = Tensor(RNG.standard_normal((3, 3)) + 1j * RNG.standard_normal((3, 3)),
                   (3,), ("A",))
        Y = Tensor(RNG.standard_normal((2, 2)) + 1j * RNG.standard_normal((2, 2)),
                   (2,), ("B",))
        out = partial_trace(tensor_product([X, Y]), keep=["A"])
        np.testing.assert_allclose(out.data, X.data * np.trace(Y.data))

    def test_pt_commutes_with_ptr_disjoint(self):
        M = Tensor(RNG.standard_normal((12, 12)) + 1j * RNG.standard_normal((12, 12)),
                   (2, 3, 2), ("A", "B", "C"))
        ab = partial_transpose(partial_trace(M, keep=["A", "B"]), {"A"})
        ba = partial_trace(partial_transpose(M, {"A"}), keep=["A", "B"])
        np.testing.assert_allclose(ab.data, ba.data)

    def test_kron_layout_roundtrip(self):
        # row-major layout: |i>|j> lands at flat index i*dB + j
        v = tensor_product([ket([0, 1, 0], (3,), ("A",)), ket([0, 1], (2,), ("B",))])
        idx = np.argmax(np.abs(v.data))
        assert idx == 1 * 2 + 1
        arr = v.data.reshape(3, 2)
        assert arr[1, 1] == pytest.approx(1.0)
