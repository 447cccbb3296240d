import numpy as np
import pytest

from solitonlab import meanfield
from solitonlab.continuum import SolitonSpec, sample_on_lattice, soliton_width
from solitonlab.errors import IntegratorError
from solitonlab.model import make_params


def uniform_state(L=20, rho0=0.25, vj=0.95):
    params = make_params(L, 1.0, vj)
    rho = np.full(L, rho0)
    return meanfield.from_density_phase(params, rho, np.zeros(L), rho0)


def soliton_state(L=40, rho0=0.25, vj=0.95, branch="bright", vbar=0.0):
    params = make_params(L, 1.0, vj)
    spec = SolitonSpec(rho0=rho0, coupling_ratio=vj, vbar=vbar, branch=branch)
    rho, phi = sample_on_lattice(params, spec)
    return meanfield.from_density_phase(params, rho, phi, rho0), spec


class TestRhs:
    def test_uniform_is_bulk_fixed_point(self):
        st = uniform_state()
        dd, dp = meanfield.eom_rhs(st)
        np.testing.assert_allclose(dd, 0.0, atol=1e-16)
        np.testing.assert_allclose(dp[1:-1], 0.0, atol=1e-15)
        # open ends keep a one-sided residual
        assert abs(dp[0]) > 1e-3

    def test_uniform_bulk_stays_put(self):
        st = uniform_state(L=24)
        rho0 = st.rho.copy()
        for _ in range(100):
            st = meanfield.step_rk4(st, 0.01)
        np.testing.assert_allclose(st.rho[6:-6], rho0[6:-6], atol=1e-9)

    def test_full_site_is_regular(self):
        # stationary bright soliton touches rho = 1 at the center site
        st, _ = soliton_state(L=41)
        assert st.rho.max() == 1.0
        dd, dp = meanfield.eom_rhs(st)
        assert np.all(np.isfinite(dd)) and np.all(np.isfinite(dp))
        for _ in range(20):
            st = meanfield.step_rk4(st, 0.01)
        assert np.all(np.isfinite(st.delta))


class TestStep:
    def test_zero_step_is_identity(self):
        st = uniform_state()
        out = meanfield.step_rk4(st, 0.0)
        np.testing.assert_array_equal(out.delta, st.delta)
        np.testing.assert_array_equal(out.phi, st.phi)

    def test_fourth_order_self_convergence(self):
        # halving dt gains ~16x against a much finer reference trajectory
        def final_delta(dt):
            st, _ = soliton_state(L=20)
            for _ in range(int(round(1.0 / dt))):
                st = meanfield.step_rk4(st, dt)
            return st.delta

        ref = final_delta(0.001)
        err_coarse = np.max(np.abs(final_delta(0.01) - ref))
        err_fine = np.max(np.abs(final_delta(0.005) - ref))
        assert err_coarse / err_fine == pytest.approx(16.0, rel=0.3)

    def test_step_rejection(self):
        # phase-gradient shock on a nearly full site overshoots |delta| = 1
        params = make_params(6, 1.0, 0.5)
        rho = np.array([0.5, 0.5, 1.0 - 1e-13, 0.5, 0.5, 0.5])
        phi = np.array([0.0, np.pi / 2, 0.0, np.pi / 2, 0.0, np.pi / 2])
        st = meanfield.from_density_phase(params, rho, phi, 0.5)
        with pytest.raises(IntegratorError):
            for _ in range(200):
                st = meanfield.step_rk4(st, 0.05)


class TestEvolve:
    def test_zero_duration(self):
        st = uniform_state()
        traj = meanfield.evolve(st, 0.0)
        assert len(traj) == 1
        assert traj[0].t == 0.0

    def test_step_constraints(self):
        st = uniform_state()
        with pytest.raises(ValueError):
            meanfield.evolve(st, 1.0, dt=0.06)
        with pytest.raises(ValueError):
            meanfield.evolve(st, 1.0, dt=0.03)  # not a divisor of duration

    def test_conservation_short_run(self):
        st, _ = soliton_state()
        traj = meanfield.evolve(st, 5.0, dt=0.01, sample_every=1.0)
        audit = traj.conservation_audit()
        assert audit["total_sz_drift"] < 1e-12
        assert audit["energy_drift"] < 1e-10

    def test_stationary_soliton_center_drift(self):
        # broad stationary soliton is an approximate fixed point: the
        # center-site density moves by less than 5% of the amplitude
        st, spec = soliton_state(L=40, vj=0.95)
        assert soliton_width(spec) > 3
        center = 19
        rho_init = st.rho[center]
        traj = meanfield.evolve(st, 20.0, dt=0.01, sample_every=5.0)
        drift = abs(traj.final().rho[center] - rho_init)
        amplitude = rho_init - 0.25
        assert drift < 0.05 * amplitude

    def test_particle_hole_symmetry_flow(self):
        stb, _ = soliton_state(L=24, rho0=0.25, branch="bright")
        std, _ = soliton_state(L=24, rho0=0.75, branch="dark")
        np.testing.assert_allclose(stb.rho, 1.0 - std.rho, atol=1e-14)
        tb = meanfield.evolve(stb, 2.0, dt=0.01, sample_every=0.5)
        td = meanfield.evolve(std, 2.0, dt=0.01, sample_every=0.5)
        for rb, rd in zip(tb, td):
            np.testing.assert_allclose(rb.rho, 1.0 - rd.rho, atol=1e-10)

    def test_record_fields(self):
        st = uniform_state(L=8)
        rec = meanfield.evolve(st, 0.0)[0]
        assert rec.entropy.shape == (7,)
        np.testing.assert_array_equal(rec.entropy, 0.0)
        np.testing.assert_array_equal(rec.corr_nn, 0.0)
        assert rec.norm == 1.0
        assert rec.total_sz == pytest.approx(0.5 * np.sum(st.delta))


class TestEnergy:
    def test_matches_quantum_expectation_on_product_state(self):
        # coherent-state energy equals <H> of the same product state
        from solitonlab.model import bloch_from_density_phase
        from solitonlab.quantum.dense import dense_from_bloch, hamiltonian_sparse
        from solitonlab.quantum.mps import mps_from_bloch

        params = make_params(10, 1.0, 0.7)
        rng = np.random.default_rng(5)
        rho = rng.uniform(0.1, 0.9, 10)
        phi = rng.uniform(-np.pi, np.pi, 10)
        st = meanfield.from_density_phase(params, rho, phi, 0.5)
        b = bloch_from_density_phase(rho, phi)
        psi = dense_from_bloch(b).psi
        H = hamiltonian_sparse(params)
        e_quantum = float(np.vdot(psi, H @ psi).real)
        assert meanfield.energy(st) == pytest.approx(e_quantum, abs=1e-12)
        rec = mps_from_bloch(b).measure(params)
        assert rec.energy == pytest.approx(e_quantum, abs=1e-12)
