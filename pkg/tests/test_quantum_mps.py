import numpy as np
import pytest

from solitonlab.errors import TruncationBudgetError
from solitonlab.model import bloch_from_density_phase, make_params
from solitonlab.quantum.config import EvolutionConfig
from solitonlab.quantum.dense import dense_from_bloch, dense_entropy_profile
from solitonlab.quantum.mps import MPS, entropy_profile, mps_from_bloch, tebd_evolve


def random_bloch(L, seed=0):
    rng = np.random.default_rng(seed)
    return bloch_from_density_phase(
        rng.uniform(0.05, 0.95, L), rng.uniform(-np.pi, np.pi, L)
    )


class TestFromBloch:
    def test_product_state_structure(self):
        b = random_bloch(8)
        m = mps_from_bloch(b)
        assert m.bond_dimensions == [1] * 7
        np.testing.assert_allclose(m.bond_entropies(), 0.0)
        assert m.norm_exact() == pytest.approx(1.0, abs=1e-14)

    def test_local_expectations_match_analytics(self):
        from solitonlab.quantum.gates import SP, SZ

        b = random_bloch(10, seed=4)
        m = mps_from_bloch(b)
        _, _, sz = b.spin_expectations()
        np.testing.assert_allclose(m.expect_site(SZ).real, sz, atol=1e-12)
        np.testing.assert_allclose(m.expect_site(SP), b.splus, atol=1e-12)

    def test_measure_record(self):
        params = make_params(8, 1.0, 0.9)
        b = random_bloch(8, seed=1)
        m = mps_from_bloch(b)
        rec = m.measure(params)
        np.testing.assert_allclose(rec.rho, b.rho, atol=1e-12)
        np.testing.assert_allclose(rec.rho_s, b.rho_s, atol=1e-12)
        np.testing.assert_allclose(rec.corr_nn, 0.0, atol=1e-12)
        assert rec.norm == pytest.approx(1.0, abs=1e-12)

    def test_all_up_is_stationary_eigenstate(self):
        params = make_params(8, 1.0, 0.9)
        b = bloch_from_density_phase(np.zeros(8), np.zeros(8))
        m = mps_from_bloch(b)
        traj = tebd_evolve(m, params, EvolutionConfig(duration=2.0, dt=0.05))
        np.testing.assert_allclose(traj.final().rho, 0.0, atol=1e-13)
        np.testing.assert_allclose(traj.final().entropy, 0.0, atol=1e-13)


class TestEntropyProfile:
    def test_product_state_zero(self):
        m = mps_from_bloch(random_bloch(6))
        np.testing.assert_allclose(entropy_profile(m), 0.0)

    def test_singlet_pairs_dense(self):
        # singlet(0,1) x singlet(2,3): cuts inside a pair see ln 2,
        # the cut between pairs sees a product
        s = np.zeros((2, 2))
        s[0, 1], s[1, 0] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        psi = np.einsum("ab,cd->abcd", s, s).reshape(-1)
        prof = dense_entropy_profile(psi)
        np.testing.assert_allclose(prof, [np.log(2), 0.0, np.log(2)], atol=1e-12)

    def test_crossed_singlets_reach_the_bound(self):
        # singlet(0,2) x singlet(1,3): center cut severs both pairs -> 2 ln 2
        from solitonlab.analysis import max_entropy_bound

        s = np.zeros((2, 2))
        s[0, 1], s[1, 0] = 1 / np.sqrt(2), -1 / np.sqrt(2)
        psi = np.einsum("ac,bd->abcd", s, s).reshape(-1)
        prof = dense_entropy_profile(psi)
        assert prof[1] == pytest.approx(max_entropy_bound(4, 2), abs=1e-12)


class TestGateApplication:
    def test_identity_gate_keeps_state(self):
        m = mps_from_bloch(random_bloch(6, seed=2))
        gate = np.eye(4, dtype=complex).reshape(2, 2, 2, 2)
        rec0 = m.measure(make_params(6, 1.0, 0.5))
        w, capped = m.apply_gate(2, gate, chi_max=16, trunc_tol=1e-10)
        assert w < 1e-28 and not capped
        rec1 = m.measure(make_params(6, 1.0, 0.5))
        np.testing.assert_allclose(rec1.rho, rec0.rho, atol=1e-13)

    def test_norm_preserved_through_truncation(self):
        params = make_params(10, 1.0, 0.9)
        m = mps_from_bloch(random_bloch(10, seed=3))
        cfg = EvolutionConfig(duration=1.0, dt=0.05, chi_max=8, trunc_tol=1e-2,
                              w_budget=1.0)
        traj = tebd_evolve(m, params, cfg)
        assert traj.final().norm == pytest.approx(1.0, abs=1e-10)

    def test_schmidt_spectrum_normalized_descending(self):
        params = make_params(8, 1.0, 0.9)
        m = mps_from_bloch(random_bloch(8, seed=5))
        tebd_evolve(m, params, EvolutionConfig(duration=1.0, dt=0.05))
        for b in range(7):
            p = m.schmidt_spectrum(b)
            assert abs(p.sum() - 1.0) < 1e-10
            assert np.all(np.diff(p) <= 1e-15)
            assert np.all(p >= 0)


class TestAborts:
    def test_cap_with_excess_truncation_aborts(self):
        params = make_params(10, 1.0, 0.9)
        m = mps_from_bloch(random_bloch(10, seed=6))
        cfg = EvolutionConfig(duration=5.0, dt=0.05, chi_max=2, trunc_tol=1e-10,
                              w_budget=1.0)
        with pytest.raises(TruncationBudgetError):
            tebd_evolve(m, params, cfg)

    def test_budget_overrun_aborts(self):
        params = make_params(10, 1.0, 0.9)
        m = mps_from_bloch(random_bloch(10, seed=6))
        cfg = EvolutionConfig(duration=5.0, dt=0.05, chi_max=4, trunc_tol=1e-1,
                              w_budget=1e-12)
        with pytest.raises(TruncationBudgetError):
            tebd_evolve(m, params, cfg)

    def test_off_grid_state_time_rejected(self):
        params = make_params(8, 1.0, 0.9)
        m = mps_from_bloch(random_bloch(8))
        m.t = 0.037
        with pytest.raises(ValueError):
            tebd_evolve(m, params, EvolutionConfig(duration=1.0, dt=0.05))


class TestEvolveSampling:
    def test_sampling_grid(self):
        params = make_params(8, 1.0, 0.9)
        m = mps_from_bloch(random_bloch(8, seed=7))
        cfg = EvolutionConfig(duration=1.0, dt=0.05, measure_every=0.25)
        traj = tebd_evolve(m, params, cfg)
        np.testing.assert_allclose(traj.times, [0, 0.25, 0.5, 0.75, 1.0], atol=1e-12)

    def test_stop_time_halts_at_sample(self):
        params = make_params(8, 1.0, 0.9)
        m = mps_from_bloch(random_bloch(8, seed=7))
        cfg = EvolutionConfig(duration=1.0, dt=0.05, measure_every=0.25)
        traj = tebd_evolve(m, params, cfg, stop_time=0.5)
        assert traj.final().t == pytest.approx(0.5)

    def test_merged_sweeps_match_plain_second_order(self):
        # sparse sampling merges half-sweeps; dense sampling does not.
        # both realize the same Trotter product
        params = make_params(10, 1.0, 0.95)
        b = random_bloch(10, seed=8)
        m1 = mps_from_bloch(b)
        t1 = tebd_evolve(m1, params, EvolutionConfig(duration=1.0, dt=0.05,
                                                     measure_every=0.05))
        m2 = mps_from_bloch(b)
        t2 = tebd_evolve(m2, params, EvolutionConfig(duration=1.0, dt=0.05,
                                                     measure_every=1.0))
        np.testing.assert_allclose(
            t1.final().rho, t2.final().rho, atol=1e-12
        )
