import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density
from ddgate.dynamics import (
    LindbladSpec,
    NoiseSpec,
    PropagationSpec,
    compare_runs,
    dt_halving_check,
    evolve_ensemble,
    evolve_lindblad,
    evolve_unitary,
    floquet_propagator,
    propagator,
    stroboscopic_expectations,
    time_grid,
)
from ddgate.errors import DomainError, InternalConsistencyError
from ddgate.physics import rwa_hamiltonian
from ddgate.quantum import (
    PAULI_X,
    PAULI_Z,
    SIGMA_PLUS,
    HilbertLayout,
    OperatorSet,
    QuantumState,
    fock_vector,
    ladder_operators,
    product_state,
    thermal_fock_state,
)


def z_obs(x):
    rho = np.outer(x, x.conj()) if x.ndim == 1 else x
    return float(np.real(np.trace(PAULI_Z @ rho)))


class TestSpec:
    def test_rejects_bad_dt(self):
        with pytest.raises(DomainError):
            PropagationSpec(0, 1, 0)

    def test_rejects_reversed_window(self):
        with pytest.raises(DomainError):
            PropagationSpec(1, 0, 0.1)

    def test_rejects_out_of_window_records(self):
        with pytest.raises(DomainError):
            PropagationSpec(0, 1, 0.1, (0.5, 1.5))

    def test_rejects_unknown_method(self):
        with pytest.raises(DomainError):
            PropagationSpec(0, 1, 0.1, method="euler")

    def test_default_record_is_end(self):
        assert PropagationSpec(0, 2, 0.1).record_times == (2.0,)

    def test_halved(self):
        s = PropagationSpec(0, 1, 0.1, (0.5, 1.0)).halved()
        assert s.dt == 0.05 and s.record_times == (0.5, 1.0)

    def test_uniform_and_grid(self):
        s = PropagationSpec.uniform(1.0, 0.01, 4)
        assert np.allclose(s.record_times, [0.25, 0.5, 0.75, 1.0])
        assert np.allclose(time_grid(1.0, 0.25), [0.25, 0.5, 0.75, 1.0])

    def test_negative_heating(self):
        with pytest.raises(DomainError):
            LindbladSpec(-1.0)

    def test_noise_validation(self):
        with pytest.raises(DomainError):
            NoiseSpec(sigma_omega1_rel=-0.1)
        with pytest.raises(DomainError):
            NoiseSpec(n_realizations=0)


class TestUnitary:
    def test_zero_hamiltonian_is_identity(self):
        psi = QuantumState((2,), np.array([0.6, 0.8j]))
        tr = evolve_unitary(lambda t: np.zeros((2, 2)), psi, PropagationSpec(0, 1, 0.1))
        assert np.allclose(tr.states[-1].data, psi.data, atol=1e-15)

    @pytest.mark.parametrize("method", ["piecewise-exponential", "rk4"])
    def test_pi_pulse(self, method):
        omega = 2 * np.pi * 1e5
        H = lambda t: 0.5 * omega * PAULI_X
        spec = PropagationSpec(0, np.pi / omega, 1e-8, method=method)
        tr = evolve_unitary(H, QuantumState((2,), np.array([1, 0])), spec, {"z": z_obs})
        assert tr.observables["z"][-1] == pytest.approx(-1.0, abs=1e-8)

    def test_jaynes_cummings_exchange(self):
        f = 6
        lay = HilbertLayout(1, f)
        ops = OperatorSet.for_layout(lay)
        g = 0.5 * 0.0329 * 2 * np.pi * 98.08e3
        sp = ops.sp[0]
        H0 = g * (sp @ ops.b + sp.conj().T @ ops.bdag)
        H = lambda t: H0
        psi = product_state(np.array([0, 1]), fock_vector(0, f))
        times = np.linspace(0, 2 * np.pi / g, 41)[1:]
        p1 = lambda x: float(np.sum(np.abs(x.reshape(2, f)[1]) ** 2))
        tr = evolve_unitary(H, psi, PropagationSpec(0, times[-1], 1e-7, tuple(times)), {"p1": p1})
        assert np.max(np.abs(tr.observables["p1"] - np.cos(g * times) ** 2)) < 1e-6

    def test_dimension_mismatch(self):
        with pytest.raises(InternalConsistencyError):
            evolve_unitary(lambda t: np.zeros((3, 3)), QuantumState((2,), np.array([1, 0])), PropagationSpec(0, 1, 0.1))

    def test_non_hermitian_rejected(self):
        H = lambda t: np.array([[0, 1], [0, 0]], dtype=complex)
        with pytest.raises(InternalConsistencyError):
            evolve_unitary(H, QuantumState((2,), np.array([1, 0])), PropagationSpec(0, 1, 0.1))

    def test_fourth_order_convergence(self):
        H = lambda t: np.cos(3 * t) * PAULI_X + 0.7 * t * PAULI_Z
        psi = QuantumState((2,), np.array([1, 0]))
        end = lambda dt: evolve_unitary(H, psi, PropagationSpec(0, 2, dt)).states[-1].data
        ref = end(1e-4)
        e1 = np.linalg.norm(end(0.1) - ref)
        e2 = np.linalg.norm(end(0.05) - ref)
        assert 12 < e1 / e2 < 20

    @given(st.integers(0, 10_000))
    @settings(max_examples=15)
    def test_norm_and_spectrum_preserved(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        b = rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6))
        H = lambda t: (a + a.conj().T) + np.sin(5 * t) * (b + b.conj().T)
        rho = random_density(rng, 6, 3)
        tr = evolve_unitary(H, QuantumState((6,), rho), PropagationSpec(0, 1, 0.01))
        out = tr.states[-1].data
        assert abs(np.trace(out) - 1) < 1e-12
        assert np.allclose(np.linalg.eigvalsh(out), np.linalg.eigvalsh(rho), atol=1e-11)


@pytest.mark.filterwarnings("ignore::ddgate.errors.TruncationWarning")
class TestLindblad:
    def _setup(self, f=10):
        lay = HilbertLayout(1, f)
        ops = OperatorSet.for_layout(lay)
        nu = 2 * np.pi * 98.08e3
        return lay, ops, (lambda t: nu * ops.number)

    def test_heating_rate(self):
        lay, ops, H = self._setup()
        rho0 = product_state(np.array([1, 0]), thermal_fock_state(0.0, 10)).to_density()
        n_obs = lambda x: float(np.real(np.trace(ops.number @ x)))
        tr = evolve_lindblad(H, rho0, PropagationSpec(0, 1e-3, 1e-5), LindbladSpec(190.0), lay, {"n": n_obs})
        assert tr.observables["n"][-1] == pytest.approx(0.19, rel=0.02)

    def test_zero_rate_matches_unitary(self):
        lay = HilbertLayout(1, 4)
        ops = OperatorSet.for_layout(lay)
        H0 = 1e5 * ops.z[0] @ (ops.b + ops.bdag) + 2e5 * ops.x[0]
        H = lambda t: H0
        rho0 = product_state(np.array([1, 1]) / np.sqrt(2), fock_vector(0, 4)).to_density()
        spec = PropagationSpec(0, 1e-5, 1e-7)
        a = evolve_lindblad(H, rho0, spec, LindbladSpec(0.0), lay).states[-1].data
        b = evolve_unitary(H, rho0, spec).states[-1].data
        assert np.allclose(a, b, atol=1e-14)

    def test_trace_and_positivity(self):
        lay, ops, H = self._setup(6)
        rho0 = product_state(np.array([1, 1]) / np.sqrt(2), fock_vector(1, 6)).to_density()
        tr = evolve_lindblad(H, rho0, PropagationSpec(0, 1e-3, 1e-5, (5e-4, 1e-3)), LindbladSpec(300.0), lay)
        for s in tr.states:
            assert abs(np.trace(s.data) - 1) < 1e-12
        assert tr.min_eigenvalue > -1e-10

    def test_coupled_coherence_decays(self):
        f = 12
        lay = HilbertLayout(1, f)
        ops = OperatorSet.for_layout(lay)
        g = 2 * np.pi * 2e3
        H0 = g * ops.z[0] @ ops.number
        H = lambda t: H0
        rho0 = product_state(np.array([1, 1]) / np.sqrt(2), fock_vector(0, f)).to_density()

        def coh(x):
            q = x.reshape(2, f, 2, f).trace(axis1=1, axis2=3)
            return float(2 * abs(q[0, 1]))

        spec = PropagationSpec(0, 1e-3, 1e-6)
        clean = evolve_lindblad(H, rho0, spec, LindbladSpec(0.0), lay, {"c": coh}).observables["c"][-1]
        hot = evolve_lindblad(H, rho0, spec, LindbladSpec(500.0), lay, {"c": coh}).observables["c"][-1]
        assert clean == pytest.approx(1.0, abs=1e-12)
        assert hot < 0.9


class TestEnsemble:
    omega = 2 * np.pi * 50e3

    def _factory(self, d):
        w = self.omega * (1 + d.omega1_rel)
        h = 0.5 * w * PAULI_X
        return lambda t: h

    def test_zero_noise_matches_single_run(self):
        psi = QuantumState((2,), np.array([1, 0]))
        spec = PropagationSpec.uniform(40e-6, 1e-7, 8)
        ens = evolve_ensemble(self._factory, psi, spec, NoiseSpec(n_realizations=3), {"z": z_obs})
        one = evolve_unitary(self._factory(ens.draws[0]), psi, spec, {"z": z_obs})
        assert np.allclose(ens.mean["z"], one.observables["z"], atol=1e-15)

    def test_gaussian_amplitude_dephasing(self):
        sigma = 0.02
        psi = QuantumState((2,), np.array([1, 0]))
        k = np.arange(1, 11)
        times = k * 2 * np.pi / self.omega
        spec = PropagationSpec(0, times[-1], times[0] / 4, tuple(times))
        noise = NoiseSpec(sigma_omega1_rel=sigma, n_realizations=2000, seed=7)
        ens = evolve_ensemble(self._factory, psi, spec, noise, {"z": z_obs})
        expected = np.exp(-((sigma * self.omega * times) ** 2) / 2)
        assert np.allclose(ens.mean["z"], expected, rtol=0.1)

    def test_seeded_reproducible(self):
        psi = QuantumState((2,), np.array([1, 0]))
        spec = PropagationSpec.uniform(20e-6, 1e-7, 4)
        noise = NoiseSpec(sigma_omega1_rel=0.05, n_realizations=5, seed=11)
        a = evolve_ensemble(self._factory, psi, spec, noise, {"z": z_obs})
        b = evolve_ensemble(self._factory, psi, spec, noise, {"z": z_obs}, workers=3)
        assert np.array_equal(a.per_realization["z"], b.per_realization["z"])
        c = evolve_ensemble(self._factory, psi, spec, NoiseSpec(0.05, 0, 5, 12), {"z": z_obs})
        assert not np.array_equal(a.per_realization["z"], c.per_realization["z"])

    def test_draws_independent_of_count(self):
        a = NoiseSpec(0.1, 1.0, 3, seed=5).draws()
        b = NoiseSpec(0.1, 1.0, 6, seed=5).draws()
        assert [d.omega1_rel for d in a] != [] and len(b) == 6


class TestFloquet:
    def test_matches_direct_propagation(self, trap, planned_drive):
        lay = HilbertLayout(2, 4)
        H = rwa_hamiltonian(trap, planned_drive, lay)
        assert H.period is not None
        u = floquet_propagator(H, H.period, steps=200)
        psi = product_state(np.array([1, 0]), np.array([1, 0]), fock_vector(0, 4))
        rho0 = psi.density_matrix
        z1 = OperatorSet.for_layout(lay).z[0]
        stro = stroboscopic_expectations(u, rho0, z1, 5)
        times = H.period * np.arange(1, 6)
        spec = PropagationSpec(0, times[-1], H.period / 200, tuple(times))
        obs = {"z": lambda x: float(np.real(np.vdot(x, z1 @ x)))}
        direct = evolve_unitary(H, psi, spec, obs).observables["z"]
        assert stro[0] == pytest.approx(float(np.real(np.trace(z1 @ rho0))))
        assert np.allclose(stro[1:], direct, atol=1e-10)

    def test_propagator_unitary(self):
        H = lambda t: np.cos(t) * PAULI_X
        u = propagator(H, 0, 3, 0.01)
        assert np.allclose(u @ u.conj().T, np.eye(2), atol=1e-13)


class TestConvergence:
    def test_compare_runs(self):
        rep = compare_runs({"a": np.array([1.0, 2.0])}, {"a": np.array([1.0, 2.0 + 5e-7])}, 1e-7, 1e-6)
        assert rep.passed and rep.max_delta == pytest.approx(5e-7)
        assert rep.as_dict()["dt_halved"] == pytest.approx(5e-8)
        rep = compare_runs({"a": np.array([1.0])}, {"a": np.array([1.1])}, 1e-7, 1e-6)
        assert not rep.passed

    def test_halving_on_smooth_problem(self):
        H = lambda t: np.cos(3 * t) * PAULI_X
        psi = QuantumState((2,), np.array([1, 0]))

        def run(dt):
            return evolve_unitary(H, psi, PropagationSpec.uniform(2.0, dt, 4), {"z": z_obs}).observables

        rep, fine = dt_halving_check(run, 0.01, tol=1e-6)
        assert rep.passed and "z" in fine


def test_ladder_matches_embedding():
    lay = HilbertLayout(2, 5)
    b, _ = ladder_operators(5)
    assert np.allclose(OperatorSet.for_layout(lay).b, np.kron(np.eye(4), b))
    assert np.allclose(OperatorSet.for_layout(HilbertLayout(1, 3)).sp[0], np.kron(SIGMA_PLUS, np.eye(3)))
