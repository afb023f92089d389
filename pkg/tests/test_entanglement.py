import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_density, random_unitary
from ddgate.dynamics import PropagationSpec, evolve_unitary
from ddgate.entanglement import (
    BELL_VECTORS,
    BellTarget,
    bell_fidelity_optimized,
    coherent_residuals,
    local_rotation,
    matching_bell_target,
    negativity,
    partial_transpose,
    phase_space_trajectory,
    purity,
    zyz_rotation,
)
from ddgate.errors import DomainError, SingularityError
from ddgate.physics import delta_qss, gate_plan, rwa_hamiltonian
from ddgate.quantum import PAULI_X, HilbertLayout, QuantumState, fock_vector, partial_trace, product_state

PHI = np.outer(BELL_VECTORS["Phi_plus"], BELL_VECTORS["Phi_plus"].conj())


def werner(p):
    return p * PHI + (1 - p) * np.eye(4) / 4


def random_local(rng):
    return np.kron(random_unitary(rng, 2), random_unitary(rng, 2))


class TestPurityNegativity:
    def test_pure_product(self):
        rho = np.zeros((4, 4))
        rho[0, 0] = 1
        assert purity(rho) == pytest.approx(1.0)
        assert negativity(rho) == pytest.approx(0.0, abs=1e-15)

    def test_maximally_mixed(self):
        assert purity(np.eye(4) / 4) == pytest.approx(0.25)
        assert negativity(np.eye(4) / 4) == 0.0

    def test_bell_states(self):
        for v in BELL_VECTORS.values():
            assert negativity(v) == pytest.approx(0.5, abs=1e-14)

    @pytest.mark.parametrize("p,expected", [(0.5, 0.125), (1 / 3, 0.0), (0.2, 0.0), (0.9, 0.425)])
    def test_werner(self, p, expected):
        assert negativity(werner(p)) == pytest.approx(expected, abs=1e-14)

    def test_accepts_state_object(self):
        assert negativity(QuantumState((2, 2), BELL_VECTORS["Psi_minus"])) == pytest.approx(0.5)

    def test_partial_transpose_shape_error(self):
        with pytest.raises(DomainError):
            partial_transpose(np.eye(8) / 8)

    @given(st.integers(0, 10_000))
    def test_either_qubit_same_negativity(self, seed):
        rho = random_density(np.random.default_rng(seed), 4, 2)
        assert negativity(rho, 0) == pytest.approx(negativity(rho, 1), abs=1e-12)

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(3)
        rho = random_density(rng, 4, 2)
        n0 = negativity(rho)
        for _ in range(100):
            u = random_local(rng)
            assert abs(negativity(u @ rho @ u.conj().T) - n0) < 1e-10

    @given(st.integers(0, 10_000))
    def test_purity_global_invariance(self, seed):
        rng = np.random.default_rng(seed)
        rho = random_density(rng, 4)
        u = random_unitary(rng, 4)
        assert purity(u @ rho @ u.conj().T) == pytest.approx(purity(rho), abs=1e-12)

    @given(st.integers(0, 10_000))
    def test_negativity_bounds(self, seed):
        n = negativity(random_density(np.random.default_rng(seed), 4, 1))
        assert -1e-14 <= n <= 0.5 + 1e-12


class TestFidelity:
    def test_bell_target_validation(self):
        with pytest.raises(DomainError):
            BellTarget("GHZ")

    def test_matching_target(self):
        assert matching_bell_target(PHI).which == "Phi_plus"
        assert matching_bell_target(BELL_VECTORS["Psi_minus"]).which == "Psi_plus"

    def test_perfect_state(self):
        res = bell_fidelity_optimized(PHI)
        assert res.fidelity == pytest.approx(1.0, abs=1e-12)
        assert res.bare_overlap == pytest.approx(1.0)

    def test_flipped_state_recovered(self):
        flip = np.kron(np.eye(2), PAULI_X)
        res = bell_fidelity_optimized(flip @ PHI @ flip)
        assert res.bare_overlap == pytest.approx(0.0, abs=1e-14)
        assert res.fidelity == pytest.approx(1.0, abs=1e-8)

    def test_werner_not_exceeded(self):
        res = bell_fidelity_optimized(werner(0.9))
        assert res.fidelity == pytest.approx(0.925, abs=1e-6)
        assert res.fidelity <= 0.925 + 1e-6

    def test_deterministic(self):
        rho = random_density(np.random.default_rng(1), 4)
        assert bell_fidelity_optimized(rho, seed=4) == bell_fidelity_optimized(rho, seed=4)

    def test_angles_reproduce_value(self):
        rng = np.random.default_rng(2)
        u = random_local(rng)
        rho = u @ werner(0.8) @ u.conj().T
        res = bell_fidelity_optimized(rho)
        v = local_rotation(res.angles) @ BELL_VECTORS["Phi_plus"]
        assert np.real(v.conj() @ rho @ v) == pytest.approx(res.fidelity, abs=1e-10)
        assert res.fidelity == pytest.approx(0.85, abs=1e-6)

    @given(st.integers(0, 10_000))
    @settings(max_examples=8)
    def test_at_least_bare_overlap(self, seed):
        rho = random_density(np.random.default_rng(seed), 4)
        res = bell_fidelity_optimized(rho)
        assert res.fidelity >= res.bare_overlap - 1e-12

    def test_zyz_unitary(self):
        u = zyz_rotation(0.3, 1.1, -2.0)
        assert np.allclose(u @ u.conj().T, np.eye(2))


class TestResiduals:
    def test_zero_time(self, trap, planned_drive):
        plan = gate_plan(trap, planned_drive)
        r = coherent_residuals(trap, planned_drive, plan, 0.0)
        assert r.alpha_00 == 0 and r.alpha_11 == 0 and r.if_estimate == 0

    def test_closed_loop_without_stark_shift(self, trap, planned_drive):
        plan = gate_plan(trap, planned_drive)
        end = phase_space_trajectory(trap, planned_drive, plan, [plan.t_gate], include_stark=False)
        assert abs(end["00"][0]) < 1e-12 and abs(end["11"][0]) < 1e-12

    def test_infidelity_estimate(self, trap, planned_drive):
        plan = gate_plan(trap, planned_drive)
        r = coherent_residuals(trap, planned_drive, plan, plan.t_gate)
        assert r.if_estimate == pytest.approx(0.002, abs=0.001)
        assert r.if_simplified == pytest.approx(r.if_estimate, rel=0.01)

    def test_resonant_denominator(self, trap, planned_drive):
        plan = gate_plan(trap, planned_drive)
        dq = delta_qss(trap, planned_drive)
        bad = type(plan)(2 * dq, plan.t_gate, 1, 0, plan.eta, plan.nu)
        with pytest.raises(SingularityError):
            coherent_residuals(trap, planned_drive, bad, plan.t_gate)

    def test_loop_radius(self, trap, planned_drive):
        plan = gate_plan(trap, planned_drive)
        t = np.linspace(0, plan.t_gate, 401)
        curves = phase_space_trajectory(trap, planned_drive, plan, t, include_stark=False)
        mag = np.abs(curves["00"])
        assert np.argmax(mag) == 200
        assert mag.max() / 2 == pytest.approx(0.5, abs=1e-12)
        assert abs(curves["00"][-1]) < 1e-12
        assert not np.any(curves["01"]) and not np.any(curves["10"])


def test_residual_estimate_matches_simulation(trap, planned_drive):
    """Ground-state unitary simulation; the better of the planned time and a 1 us neighbourhood."""
    plan = gate_plan(trap, planned_drive)
    lay = HilbertLayout(2, 16)
    H = rwa_hamiltonian(trap, planned_drive, lay)
    plus = np.array([1, 1]) / np.sqrt(2)
    psi = product_state(plus, plus, fock_vector(0, 16))
    rec = plan.t_gate + np.array([-1e-6, 0.0, 1e-6])
    tr = evolve_unitary(H, psi, PropagationSpec(0, rec[-1], 1e-7, tuple(rec)), layout=lay)
    sim = min(
        1 - bell_fidelity_optimized(partial_trace(s, [0, 1]).data).fidelity for s in tr.states
    )
    est = coherent_residuals(trap, planned_drive, plan, plan.t_gate).if_estimate
    assert 0.5 <= sim / est <= 2.0, f"simulated IF {sim:.4%}, estimate {est:.4%}"
