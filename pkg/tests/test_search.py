import math

import numpy as np
import pytest

from wvap.errors import InvalidConfig, OddParityW
from wvap.pps import PrePostSelection, potent_operator_apply, postselect
from wvap.qstate import (
    Projector,
    Reflection,
    apply_operator,
    fidelity,
    identity,
    inner_product,
    is_hermitian,
    is_unitary,
    make_basis_state,
    tensor_product,
    uniform_state,
)
from wvap.search import (
    MC_CHUNK,
    SearchConfig,
    _mc_chunk,
    analytic_predictions,
    build_postselection,
    build_preselection,
    build_U,
    build_V,
    dense_U_projector_form,
    dense_V_hadamard_form,
    grover_closed_form,
    projector_pair,
    run_grover,
    run_wvap,
    run_wvap_montecarlo,
)

from conftest import brute_force_wvap


class TestConfig:
    def test_defaults(self):
        cfg = SearchConfig(n=3, y=5)
        assert cfg.w == 0 and cfg.seed == 42 and cfg.trials == 0 and cfg.N_db == 8
        assert SearchConfig(n=14, y=0).joint_bytes == 2**32

    @pytest.mark.parametrize("kwargs", [dict(n=0, y=0), dict(n=15, y=0), dict(n=2, y=7),
                                        dict(n=2, y=-1), dict(n=2, y=0, w=4),
                                        dict(n=2, y=0, trials=-1), dict(n=2, y=0, seed=2**64)])
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidConfig):
            SearchConfig(**kwargs)

    def test_odd_w(self):
        with pytest.raises(OddParityW):
            SearchConfig(n=3, y=5, w=1)


class TestStates:
    def test_preselection_examples(self):
        r2 = 1 / math.sqrt(2)
        np.testing.assert_allclose(build_preselection(1, 0).amps, [-r2, r2], atol=1e-15)
        np.testing.assert_allclose(build_preselection(2, 0).amps, [-0.5, 0.5, 0.5, 0.5], atol=1e-15)

    @pytest.mark.parametrize("n", [1, 4, 9, 14])
    def test_preselection_normalized(self, n):
        assert abs(build_preselection(n, 0).norm() - 1) <= 1e-12

    def test_postselection(self):
        r2 = 1 / math.sqrt(2)
        np.testing.assert_allclose(build_postselection(1).amps, [r2, -r2], atol=1e-15)
        for n in range(1, 11):
            psi_f = build_postselection(n)
            N = 2**n
            assert abs(inner_product(psi_f, uniform_state(n))) <= 1e-12
            for w in {0, 3 % N, N - 1}:
                expected = (-1) ** bin(w).count("1") / math.sqrt(N)
                assert abs(inner_product(psi_f, make_basis_state(n, w)) - expected) <= 1e-12


class TestOperators:
    def test_V_n1_is_minus_identity(self):
        np.testing.assert_allclose(build_V(1, 0).to_dense(), -np.eye(2), atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_V_forms_and_properties(self, n):
        for w in range(2**n):
            if bin(w).count("1") % 2:
                continue
            V = build_V(n, w)
            v = V.to_dense()
            np.testing.assert_allclose(v, dense_V_hadamard_form(n, w), atol=1e-12)
            assert is_unitary(V) and is_hermitian(V)
            np.testing.assert_allclose(v @ v, np.eye(2**n), atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 5, 10, 14])
    def test_V_maps_preselection_to_minus(self, n):
        out = apply_operator(build_V(n, 0), build_preselection(n, 0))
        np.testing.assert_allclose(out.amps, build_postselection(n).amps, atol=1e-12)

    def test_odd_w_rejected(self):
        with pytest.raises(OddParityW):
            build_V(3, 1)

    def test_odd_w_operator_is_still_hermitian(self):
        # Z^{(x)n} and I_w are both diagonal, so the parity rule is a
        # convention (it fixes the sign of the weak value), not a Hermiticity gate.
        n, w = 3, 1
        v = np.diag([(-1) ** bin(x).count("1") for x in range(8)]) @ Reflection(n, w).to_dense()
        np.testing.assert_allclose(v, v.conj().T, atol=0)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_projector_identities(self, n):
        p1, p2 = projector_pair(build_V(n, 0))
        eye = np.eye(2**n)
        np.testing.assert_allclose(p1 @ p1, p1, atol=1e-12)
        np.testing.assert_allclose(p2 @ p2, p2, atol=1e-12)
        np.testing.assert_allclose(p1 @ p2, 0, atol=1e-12)
        np.testing.assert_allclose(p1 + p2, eye, atol=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
    def test_U_two_forms_agree(self, n):
        for y in {0, 1, 2**n - 1}:
            for w in {0, 2**n - 1 if n % 2 == 0 else 0}:
                np.testing.assert_allclose(build_U(n, y, w).to_dense(),
                                           dense_U_projector_form(n, y, w), atol=1e-12, rtol=0)

    def test_U_branches(self):
        n, y = 3, 6
        U = build_U(n, y, 0)
        psi_i = build_preselection(n, 0)
        off = tensor_product(make_basis_state(n, 2), psi_i)
        np.testing.assert_array_equal(U.apply(off).amps, off.amps)
        on = U.apply(tensor_product(make_basis_state(n, y), psi_i))
        expected = tensor_product(make_basis_state(n, y), apply_operator(U.target, psi_i))
        np.testing.assert_allclose(on.amps, expected.amps, atol=1e-15)
        assert U.oracle.query_count == 2


class TestRunWvap:
    def test_n1(self):
        r = run_wvap(SearchConfig(n=1, y=1))
        assert abs(r.p_sim - 0.5) <= 1e-12
        prob, p = brute_force_wvap(1, 1, 0)
        assert abs(p - 0.5) <= 1e-12 and abs(r.postsel_prob - prob) <= 1e-12

    def test_n2(self):
        r = run_wvap(SearchConfig(n=2, y=3))
        assert abs(r.p_sim - 0.5714285714285714) <= 1e-12
        assert abs(r.overlap_sq - 0.25) <= 1e-12
        assert abs(abs(r.weak_value) ** 2 - 4) <= 1e-12
        assert abs(r.weak_value + 2) <= 1e-12
        assert r.oracle_queries == 1

    def test_n10(self):
        r = run_wvap(SearchConfig(n=10, y=123))
        assert abs(r.p_sim - 1048576 / 1052668) <= 1e-12
        assert abs(r.end_to_end_prob - 1 / 1024) <= 1e-12

    @pytest.mark.parametrize("n,y,w", [(2, 0, 0), (3, 5, 3), (3, 0, 0), (4, 9, 9), (4, 15, 6), (5, 17, 0)])
    def test_against_brute_force(self, n, y, w):
        r = run_wvap(SearchConfig(n=n, y=y, w=w))
        prob, p = brute_force_wvap(n, y, w)
        assert abs(r.postsel_prob - prob) <= 1e-12
        assert abs(r.p_sim - p) <= 1e-12

    def test_w_equal_y(self):
        r = run_wvap(SearchConfig(n=4, y=5, w=5))
        assert abs(r.p_sim - analytic_predictions(4).p) <= 1e-12

    @pytest.mark.parametrize("n", [3, 6])
    def test_streamed_equals_materialized(self, n):
        cfg = SearchConfig(n=n, y=2**n - 2, w=3)
        reference = run_wvap(cfg)
        streamed = run_wvap(cfg, block_amps=2**n)  # one register-A row per block
        np.testing.assert_allclose(streamed.conditional_state.amps,
                                   reference.conditional_state.amps, atol=1e-15)
        # public-function pipeline on the full joint vector
        U = build_U(n, cfg.y, cfg.w)
        joint = U.apply(tensor_product(uniform_state(n), build_preselection(n, cfg.w)))
        out = postselect(joint, build_postselection(n))
        np.testing.assert_allclose(out.conditional_state.amps,
                                   reference.conditional_state.amps, atol=1e-12)
        assert abs(out.success_probability - reference.postsel_prob) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_potent_operator_equivalence(self, n):
        y, w = 2**n - 1, 0
        r = run_wvap(SearchConfig(n=n, y=y, w=w))
        V = build_V(n, w)
        sel = PrePostSelection(build_preselection(n, w), build_postselection(n))
        blocks = [(Projector(n, y, complement=True), identity(n)), (Projector(n, y), V)]
        out = potent_operator_apply(blocks, sel, uniform_state(n))
        assert fidelity(out.conditional_state, r.conditional_state) >= 1 - 1e-12
        np.testing.assert_allclose(out.conditional_state.amps, r.conditional_state.amps, atol=1e-12)
        assert abs(out.success_probability - r.postsel_prob) <= 1e-12


class TestMonteCarlo:
    def test_zero_trials(self):
        assert run_wvap_montecarlo(SearchConfig(n=2, y=1)) == (0, 0)

    def test_n2_binomial(self):
        trials = 100_000
        cfg = SearchConfig(n=2, y=3, seed=7, trials=trials)
        r = run_wvap(cfg)
        q = 28 / 64
        assert abs(r.postsel_prob - q) <= 1e-12
        sigma = math.sqrt(q * (1 - q) / trials)
        assert abs(r.mc_postsel_successes / trials - q) <= 3 * sigma
        p = 4 / 7
        s = r.mc_postsel_successes
        assert abs(r.mc_target_hits / s - p) <= 3 * math.sqrt(p * (1 - p) / s)

    def test_deterministic(self):
        cfg = SearchConfig(n=3, y=1, seed=99, trials=20_000)
        assert run_wvap_montecarlo(cfg) == run_wvap_montecarlo(cfg)
        other = SearchConfig(n=3, y=1, seed=100, trials=20_000)
        assert run_wvap_montecarlo(cfg) != run_wvap_montecarlo(other)

    def test_chunk_order_independent(self):
        cfg = SearchConfig(n=3, y=1, seed=5, trials=3 * MC_CHUNK + 17)
        r = run_wvap(SearchConfig(n=3, y=1))
        cdf = np.cumsum(r.conditional_state.probabilities())
        sizes = [MC_CHUNK, MC_CHUNK, MC_CHUNK, 17]
        parts = [_mc_chunk(cfg.seed, j, sizes[j], r.postsel_prob, cdf / cdf[-1], cfg.y)
                 for j in reversed(range(4))]
        assert tuple(map(sum, zip(*parts))) == run_wvap_montecarlo(cfg)


class TestGrover:
    def test_n2_exact(self):
        g = run_grover(2, 1)
        assert g.iterations == 1 and g.oracle_queries == 1
        assert abs(g.success_probability - 1.0) <= 1e-12

    def test_n4(self):
        g = run_grover(4, 11)
        assert g.iterations == 3
        closed = math.sin(7 * math.asin(0.25)) ** 2
        assert abs(g.success_probability - closed) <= 1e-9
        assert abs(g.success_probability - 0.9613189697265625) <= 1e-9

    def test_zero_iterations(self):
        assert abs(run_grover(3, 4, iterations=0).success_probability - 1 / 8) <= 1e-15

    @pytest.mark.parametrize("n", range(1, 11))
    def test_closed_form_all_k(self, n):
        for k in range(0, 6):
            g = run_grover(n, 2**n // 3, iterations=k)
            assert abs(g.success_probability - grover_closed_form(n, k)) <= 1e-12
            assert g.oracle_queries == k


class TestAnalytic:
    def test_n1(self):
        a = analytic_predictions(1)
        assert (a.p, a.overlap_sq, a.weak_value_mod_sq) == (0.5, 1.0, 1.0)

    def test_n2(self):
        a = analytic_predictions(2)
        assert abs(a.p - 4 / 7) <= 1e-15 and a.overlap_sq == 0.25 and a.weak_value_mod_sq == 4

    def test_large_N(self):
        for n in range(8, 21):
            N = 2**n
            a = analytic_predictions(n)
            # (1 - p) N = 4 N (N - 1) / (N^2 + 4(N - 1)) = 4 - O(1/N)
            assert 3.5 <= (1 - a.p) * N <= 4.0
            assert abs((1 - a.p) * N - 4) <= 20 / N + N * 1e-15
            assert abs(a.postsel_prob * a.p - a.end_to_end) <= 1e-15
