import numpy as np
import pytest

from sepbound.hilbert import (
    Tensor,
    max_entangled,
    null_space,
    permute_systems,
    schmidt_rank,
    Bipartition,
)
from sepbound.subspaces import (
    GLOBAL_ORDER,
    Subspace,
    TwistData,
    adjugate,
    canonical_mfle,
    canonical_mfle_twirl_operator,
    canonical_subspace,
    distillation_mfle,
    ext_twisted_canonical,
    ext_twisted_mfle,
    null_subspace,
    range_constraint_subspace,
    sample_product_vector,
    sample_symmetric_product_vector,
    symmetric_span_check,
    two_qubit_mfle,
)


def line(vec, dims, labels):
    v = np.asarray(vec, dtype=complex).reshape(-1)
    return Subspace((v / np.linalg.norm(v)).reshape(-1, 1), dims, labels)


def controlled_phase_twist(theta, phi):
    L1 = np.diag([np.cos(theta), np.sin(theta)])
    L2 = np.array([[1, 1], [1, np.exp(1j * phi)]])
    VA = np.zeros((4, 2))
    VA[0, 0] = VA[3, 1] = 1.0
    return TwistData(2, L1, L2, VA, VA)


class TestAdjugate:
    def test_matches_det_times_inverse(self):
        rng = np.random.default_rng(0)
        for d in (2, 3, 4):
            A = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
            np.testing.assert_allclose(
                adjugate(A), np.linalg.det(A) * np.linalg.inv(A), rtol=1e-9
            )

    def test_singular_matrix_ok(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0]])
        np.testing.assert_allclose(adjugate(A), [[4.0, -2.0], [-2.0, 1.0]])


class TestCanonicalSubspace:
    def test_dim_d2(self):
        assert canonical_subspace(2).dim == 13

    def test_dim_formula(self):
        for d in (2, 3, 4):
            assert canonical_subspace(d).dim == d**4 - (d**2 - 1)

    def test_mes_times_mes_is_member(self):
        for d in (2, 3):
            v = np.kron(max_entangled(d).data, max_entangled(d).data)
            t = Tensor(v, (d, d, d, d), ("A", "B", "RA", "RB"))
            t = permute_systems(t, GLOBAL_ORDER)
            assert canonical_subspace(d).residual(t.data) < 1e-12


class TestCanonicalMfle:
    def test_dim_d2(self):
        assert canonical_mfle(2).dim == 10

    def test_dim_formula(self):
        for d in (2, 3, 4):
            assert canonical_mfle(d).dim == d**4 - 2 * (d**2 - 1)

    def test_adjugate_samples_are_members(self):
        rng = np.random.default_rng(5)
        for d in (2, 3):
            q = canonical_mfle(d)
            tw = TwistData.plain(d)
            for _ in range(10):
                v = sample_product_vector(tw, rng)
                assert q.residual(v.data) <= 1e-10

    def test_contained_in_canonical_subspace(self):
        for d in (2, 3):
            P_q = canonical_mfle(d).projector()
            P_v = canonical_subspace(d).projector()
            assert np.max(np.abs(P_v @ P_q @ P_v - P_q)) <= 1e-10


class TestTwirlIdentity:
    @pytest.mark.parametrize("d", [2, 3, 4])
    def test_range_matches_mfle_projector(self, d):
        T = canonical_mfle_twirl_operator(d)
        T_glob = permute_systems(T, GLOBAL_ORDER)
        evals, evecs = np.linalg.eigh(T_glob.data)
        keep = evals > 1e-10
        P_range = evecs[:, keep] @ evecs[:, keep].conj().T
        dist = np.linalg.norm(P_range - canonical_mfle(d).projector())
        assert dist <= 1e-9


class TestExtTwistedMfle:
    def test_trivial_twist_reduces_to_canonical(self):
        for d in (2, 3):
            out = ext_twisted_mfle(TwistData.plain(d))
            assert out.projector_distance(canonical_mfle(d)) <= 1e-10

    def test_controlled_phase_dims(self):
        tw = controlled_phase_twist(np.pi / 4 - 0.1, np.pi / 4)
        P = ext_twisted_mfle(tw)
        assert P.ambient_dim == 64
        assert P.dim == 10

    def test_tau_times_choi_membership_iff_maximally_entangled(self):
        # Thm-2 numeric corroboration: |tau-bar>|U> in P iff theta = pi/4.
        phi = np.pi / 4
        VA = np.zeros((4, 2))
        VA[0, 0] = VA[3, 1] = 1.0
        L2 = np.array([[1, 1], [1, np.exp(1j * phi)]])
        for theta, inside in ((np.pi / 4, True), (np.pi / 4 - 0.1, False)):
            L1 = np.diag([np.cos(theta), np.sin(theta)])
            tw = TwistData(2, L1, L2, VA, VA)
            P = ext_twisted_mfle(tw)
            taubar = (np.kron(np.eye(2), L1) @ max_entangled(2).data).reshape(2, 2)
            U = (np.kron(VA, VA @ L2) @ max_entangled(2).data).reshape(4, 4)
            vec = np.einsum("ab,ij->aijb", U, taubar).reshape(-1)
            res = P.residual(vec)
            assert (res <= 1e-10) == inside

    def test_singular_twist_rejected(self):
        with pytest.raises(ValueError):
            TwistData.plain(2, L1=np.array([[1.0, 0.0], [0.0, 0.0]]))


class TestRangeConstraintSubspace:
    def test_reproduces_twisted_canonical(self):
        # tau pure |I_d>-twisted, E the corresponding line: both constructions
        # must give the same projector.
        theta = 0.6
        L1 = np.diag([np.cos(theta), np.sin(theta)])
        L2 = np.array([[0.8, 0.3], [-0.1, 1.1 + 0.2j]])
        tw = TwistData(2, L1, L2, np.eye(2), np.eye(2))
        W_direct = ext_twisted_canonical(tw)

        taubar = np.kron(np.eye(2), L1) @ max_entangled(2).data
        tau = Tensor(np.conj(taubar), (2, 2), ("RA", "RB"))
        E = line(np.kron(np.eye(2), L2) @ max_entangled(2).data, (2, 2), ("A", "B"))
        W = range_constraint_subspace(tau, E, (2, 2, 2, 2), GLOBAL_ORDER)
        assert W.projector_distance(W_direct) <= 1e-10

    def test_zero_tau_gives_full_space(self):
        tau = Tensor(np.zeros((4, 4)), (2, 2), ("RA", "RB"))
        E = line([1, 0, 0, 0], (2, 2), ("A", "B"))
        W = range_constraint_subspace(tau, E, (2, 2, 2, 2), GLOBAL_ORDER)
        assert W.dim == 16

    def test_full_E_gives_full_space(self):
        tau = Tensor(np.eye(4) / 4, (2, 2), ("RA", "RB"))
        E = Subspace.full((2, 2), ("A", "B"))
        W = range_constraint_subspace(tau, E, (2, 2, 2, 2), GLOBAL_ORDER)
        assert W.dim == 16


class TestNullSubspace:
    def test_canonical_d2_dim(self):
        tau = Tensor(max_entangled(2).data, (2, 2), ("RA", "RB"))
        W0 = null_subspace(tau, (2, 2, 2, 2), GLOBAL_ORDER)
        assert W0.dim == 16 - 4

    def test_full_rank_tau_trivial_kernel_on_factor(self):
        tau = Tensor(np.eye(4) / 4, (2, 2), ("RA", "RB"))
        W0 = null_subspace(tau, (2, 2, 2, 2), GLOBAL_ORDER)
        assert W0.dim == 0

    def test_contained_in_range_constraint(self):
        rng = np.random.default_rng(2)
        v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        tau = Tensor(v / np.linalg.norm(v), (2, 2), ("RA", "RB"))
        E = line([1, 0, 0, 1], (2, 2), ("A", "B"))
        W = range_constraint_subspace(tau, E, (2, 2, 2, 2), GLOBAL_ORDER)
        W0 = null_subspace(tau, (2, 2, 2, 2), GLOBAL_ORDER)
        PW, P0 = W.projector(), W0.projector()
        assert np.max(np.abs(PW @ P0 - P0)) <= 1e-10


class TestTwoQubitMfle:
    def test_reducible_axis_plane(self):
        B, _ = null_space(np.array([[0.0, 0.0, 0.0, 1.0]]))
        V = Subspace(B, (2, 2), ("A", "B"))
        comps = two_qubit_mfle(V)
        assert len(comps) == 2
        e0, e1 = np.eye(2)
        c2_ket0 = Subspace(
            np.column_stack([np.kron(e0, e0), np.kron(e1, e0)]), (2, 2), ("A", "B")
        )
        ket0_c2 = Subspace(
            np.column_stack([np.kron(e0, e0), np.kron(e0, e1)]), (2, 2), ("A", "B")
        )
        dists = {
            min(c.projector_distance(c2_ket0), c.projector_distance(ket0_c2))
            for c in comps
        }
        assert max(dists) <= 1e-9
        assert comps[0].projector_distance(comps[1]) > 0.5

    def test_irreducible_plane(self):
        B, _ = null_space(np.array([[1.0, 0.0, 0.0, -10.0]]))
        V = Subspace(B, (2, 2), ("A", "B"))
        comps = two_qubit_mfle(V)
        assert len(comps) == 1
        assert comps[0].projector_distance(V) <= 1e-9

    def test_koashi_v1_two_lines(self):
        p = np.array([1, 1]) / np.sqrt(2)
        m = np.array([1, -1]) / np.sqrt(2)
        V1 = Subspace(
            np.column_stack([np.kron(p, m), np.kron(m, p)]), (2, 2), ("A", "B")
        )
        comps = two_qubit_mfle(V1)
        assert sorted(c.dim for c in comps) == [1, 1]
        lines = [line(np.kron(p, m), (2, 2), ("A", "B")),
                 line(np.kron(m, p), (2, 2), ("A", "B"))]
        for target in lines:
            assert min(c.projector_distance(target) for c in comps) <= 1e-9

    def test_reducible_components_are_all_product(self):
        # in the reducible case every vector of each component is product
        B, _ = null_space(np.array([[0.0, 0.0, 0.0, 1.0]]))
        V = Subspace(B, (2, 2), ("A", "B"))
        rng = np.random.default_rng(8)
        comps = two_qubit_mfle(V)
        assert len(comps) == 2
        for comp in comps:
            for _ in range(50):
                coeff = rng.standard_normal(comp.dim) + 1j * rng.standard_normal(comp.dim)
                v = Tensor(comp.basis @ coeff, (2, 2), ("A", "B"))
                assert schmidt_rank(v, Bipartition(("A",), ("B",)), tol=1e-8) == 1

    def test_union_covers_sampled_product_members(self):
        # sample product vectors inside V = n-perp and check union coverage
        rng = np.random.default_rng(12)
        for _ in range(5):
            n = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            B, _ = null_space(n[None, :])
            V = Subspace(B, (2, 2), ("A", "B"))
            comps = two_qubit_mfle(V)
            N = n.reshape(2, 2)
            for _ in range(40):
                a = rng.standard_normal(2) + 1j * rng.standard_normal(2)
                c = a @ N  # n^T (a x b) = c . b
                b = np.array([-c[1], c[0]])
                if np.linalg.norm(b) < 1e-8:
                    continue
                v = np.kron(a, b)
                assert V.residual(v) <= 1e-10
                assert min(comp.residual(v) for comp in comps) <= 1e-8

    def test_zero_subspace_rejected(self):
        with pytest.raises(ValueError):
            two_qubit_mfle(Subspace.zero((2, 2), ("A", "B")))


class TestDistillationMfle:
    def _mixture_W(self, theta, d=3):
        psi = np.array([np.cos(theta), 0, 0, np.sin(theta)], dtype=complex)
        taus = []
        for (i, j) in [(0, 1), (0, 2), (1, 2)]:
            t = np.zeros(d * d, dtype=complex)
            t[i * d + j] = 1 / np.sqrt(2)
            t[j * d + i] = -1 / np.sqrt(2)
            taus.append(t)
        tau = sum(np.outer(t, t.conj()) for t in taus) / 3
        tauT = Tensor(tau, (d, d), ("RA", "RB"))
        E = line(psi, (2, 2), ("A", "B"))
        return range_constraint_subspace(tauT, E, (2, d, d, 2), GLOBAL_ORDER)

    def test_dimension_pair_exposed(self):
        # Prop.-4 subspace has dim (2d)(2d+1)/2 = 21 at d=3 while the ambient
        # range constraint W has dim 27; both numbers are exposed because the
        # source text quotes a third figure (10) without a construction.
        theta = np.pi / 4
        L = np.diag([np.cos(theta), np.sin(theta)])
        P = distillation_mfle(L, 3)
        W = self._mixture_W(theta)
        assert P.dim == 21
        assert W.dim == 27

    def test_contained_in_W(self):
        theta = 0.5
        L = np.diag([np.cos(theta), np.sin(theta)])
        P = distillation_mfle(L, 3)
        W = self._mixture_W(theta)
        PW, PP = W.projector(), P.projector()
        assert np.max(np.abs(PW @ PP - PP)) <= 1e-10

    def test_membership_of_twisted_symmetric_vector(self):
        theta = 0.4
        L = np.diag([np.cos(theta), np.sin(theta)])
        P = distillation_mfle(L, 3)
        rng = np.random.default_rng(4)
        for _ in range(10):
            s = sample_symmetric_product_vector(L, 3, rng)
            assert P.residual(s.data) <= 1e-8

    def test_sampled_vectors_in_W(self):
        theta = 0.7
        L = np.diag([np.cos(theta), np.sin(theta)])
        W = self._mixture_W(theta)
        rng = np.random.default_rng(9)
        for _ in range(10):
            s = sample_symmetric_product_vector(L, 3, rng)
            assert W.residual(s.data) <= 1e-8

    def test_singular_L_rejected(self):
        with pytest.raises(ValueError):
            distillation_mfle(np.array([[1.0, 0.0], [0.0, 0.0]]), 3)


class TestSamplers:
    def test_membership_residual(self):
        tw = controlled_phase_twist(0.6, np.pi / 4)
        P = ext_twisted_mfle(tw)
        rng = np.random.default_rng(0)
        for _ in range(10):
            v = sample_product_vector(tw, rng)
            assert P.residual(v.data) <= 1e-10

    def test_product_across_cut(self):
        tw = controlled_phase_twist(0.5, np.pi / 4)
        v = sample_product_vector(tw, np.random.default_rng(1))
        cut = Bipartition(("A", "RA"), ("RB", "B"))
        assert schmidt_rank(v, cut, tol=1e-8) == 1

    def test_overlap_with_tau_nonzero(self):
        tw = controlled_phase_twist(0.5, np.pi / 4)
        v = sample_product_vector(tw, np.random.default_rng(2))
        taubar = np.kron(np.eye(2), tw.L1) @ max_entangled(2).data
        t = Tensor(np.conj(taubar), (2, 2), ("RA", "RB"))
        # contract tau against the RA, RB legs
        arr = v.data.reshape(4, 2, 2, 4)
        contracted = np.einsum("ij,aijb->ab", t.data.conj().reshape(2, 2), arr)
        assert np.linalg.norm(contracted) > 1e-6

    def test_seed_determinism(self):
        tw = controlled_phase_twist(0.5, np.pi / 4)
        v1 = sample_product_vector(tw, 123)
        v2 = sample_product_vector(tw, 123)
        np.testing.assert_array_equal(v1.data, v2.data)

    def test_span_of_samples_reaches_mfle_dim(self):
        # MFLE-minimality witness: 200 samples stay inside P and span all of it.
        tw = controlled_phase_twist(0.55, np.pi / 4)
        P = ext_twisted_mfle(tw)
        rng = np.random.default_rng(6)
        samples = [sample_product_vector(tw, rng).data for _ in range(200)]
        assert max(P.residual(s) for s in samples) <= 1e-8
        from sepbound.hilbert import orthonormal_basis

        B, _ = orthonormal_basis(samples)
        assert B.shape[1] == P.dim


class TestSymmetricSpanCheck:
    def test_d2_enough_samples(self):
        assert symmetric_span_check(2, 10)

    def test_d3_rank_deficit(self):
        assert not symmetric_span_check(3, 2)

    def test_d4_thirty_samples(self):
        assert symmetric_span_check(4, 30)


class TestSubspaceIO:
    def test_save_load_roundtrip(self, tmp_path):
        q = canonical_mfle(2)
        path = tmp_path / "q2.mat"
        q.save(path)
        back = Subspace.load(path, q.dims, q.labels)
        assert back.projector_distance(q) == 0.0
