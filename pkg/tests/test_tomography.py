import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_density
from ddgate.entanglement import BELL_VECTORS, negativity
from ddgate.errors import DomainError, InversionError
from ddgate.tomography import (
    PAULI_LABELS,
    DetectionMatrix,
    ReconstructedState,
    correct_detection,
    exact_expectations,
    measurement_probabilities,
    negativity_with_error,
    read_counts_csv,
    read_detection_matrix_csv,
    reconstruct_density_matrix,
    reconstruct_exact,
    reconstruct_from_counts,
    settings_table,
    simulate_shots,
    write_counts_csv,
    write_detection_matrix_csv,
)

PHI = np.outer(BELL_VECTORS["Phi_plus"], BELL_VECTORS["Phi_plus"].conj())
KET00 = np.diag([1.0, 0, 0, 0]).astype(complex)


def swap_confusion(p=0.05):
    m = np.eye(4)
    m[1, 1] = m[2, 2] = 1 - p
    m[2, 1] = m[1, 2] = p
    return DetectionMatrix(m)


class TestSettings:
    def test_nine_rows(self):
        rows = settings_table()
        assert [s.index for s in rows] == list(range(1, 10))
        assert rows[0].phi1 is None and rows[0].phi2 is None
        assert rows[1].phi1 == pytest.approx(3 * np.pi / 2) and rows[1].phi2 is None
        assert rows[2].phi1 == pytest.approx(np.pi) and rows[2].phi2 is None
        assert rows[3].phi1 is None and rows[3].phi2 == pytest.approx(3 * np.pi / 2)
        assert rows[4].phi1 is None and rows[4].phi2 == pytest.approx(np.pi)

    def test_first_setting_observables(self):
        assert set(settings_table()[0].observables()) == {"ZI", "IZ", "ZZ"}

    def test_sixth_setting_measures_xx(self):
        assert "XX" in settings_table()[5].observables()

    def test_full_coverage(self):
        covered = set()
        for s in settings_table():
            covered |= set(s.observables())
        assert covered == set(PAULI_LABELS)
        assert len(covered) + 1 == 16

    @pytest.mark.parametrize("s", settings_table(), ids=lambda s: f"k{s.index}")
    def test_rotation_maps_observables(self, s):
        rng = np.random.default_rng(s.index)
        rho = random_density(rng, 4)
        ex = exact_expectations(rho)
        p = measurement_probabilities(rho, s)
        for label, (signs, sgn) in s.observables().items():
            assert sgn * signs @ p == pytest.approx(ex[label], abs=1e-12)


class TestShots:
    def test_ground_state_counts(self):
        c = simulate_shots(KET00, settings_table()[0], 500, DetectionMatrix.identity(), seed=1)
        assert c.tolist() == [500, 0, 0, 0]

    def test_bell_probabilities(self):
        p = measurement_probabilities(PHI, settings_table()[0], DetectionMatrix.identity())
        assert np.allclose(p, [0.5, 0, 0, 0.5], atol=1e-15)

    def test_confusion_forward(self):
        rho = np.diag([0, 1.0, 0, 0]).astype(complex)
        p = measurement_probabilities(rho, settings_table()[0], swap_confusion())
        assert np.allclose(p, [0, 0.95, 0.05, 0], atol=1e-15)

    def test_seeded(self):
        s = settings_table()[5]
        a = simulate_shots(PHI, s, 200, seed=3)
        assert np.array_equal(a, simulate_shots(PHI, s, 200, seed=3))
        assert a.sum() == 200

    def test_rejects_zero_shots(self):
        with pytest.raises(DomainError):
            simulate_shots(PHI, settings_table()[0], 0)


class TestDetection:
    def test_validation(self):
        with pytest.raises(DomainError):
            DetectionMatrix(np.full((4, 4), 0.3))
        with pytest.raises(DomainError):
            DetectionMatrix(np.eye(3))
        with pytest.raises(DomainError):
            DetectionMatrix(np.eye(4), -np.ones((4, 4)))

    def test_nearest_neighbor_default(self):
        d = DetectionMatrix.nearest_neighbor()
        assert np.allclose(d.m.sum(axis=0), 1)
        assert d.m[0, 0] == pytest.approx(0.96) and d.m[3, 0] == 0

    def test_identity_correction(self):
        pt = np.array([0.4, 0.1, 0.2, 0.3])
        st_ = np.array([0.01, 0.02, 0.03, 0.04])
        cp = correct_detection(pt, st_, DetectionMatrix.identity())
        assert np.allclose(cp.p, pt) and np.allclose(cp.sigma, st_)
        assert not cp.nonphysical.any()

    def test_round_trip(self):
        det = swap_confusion()
        p = np.array([0.1, 0.6, 0.25, 0.05])
        assert np.max(np.abs(correct_detection(det.m @ p, np.zeros(4), det).p - p)) < 1e-12

    @given(st.integers(0, 10_000), st.floats(0.0, 0.2))
    def test_round_trip_property(self, seed, leak):
        det = DetectionMatrix.nearest_neighbor(leak)
        p = np.random.default_rng(seed).dirichlet(np.ones(4))
        assert np.allclose(correct_detection(det.m @ p, np.zeros(4), det).p, p, atol=1e-12)

    def test_singular(self):
        with pytest.raises(InversionError) as exc:
            correct_detection(np.full(4, 0.25), np.zeros(4), DetectionMatrix(np.full((4, 4), 0.25)))
        assert exc.value.condition_number > 1e12

    def test_nonphysical_flagged(self):
        det = swap_confusion(0.2)
        cp = correct_detection([0.5, 0.0, 0.5, 0.0], np.zeros(4), det)
        assert cp.nonphysical[1]

    def test_error_propagation_against_sampling(self):
        det = DetectionMatrix.nearest_neighbor(0.05)
        pt = np.array([0.45, 0.05, 0.1, 0.4])
        st_ = np.array([0.03, 0.01, 0.02, 0.03])
        cp = correct_detection(pt, st_, det)
        rng = np.random.default_rng(0)
        draws = pt + rng.standard_normal((100_000, 4)) * st_
        mc = (draws @ np.linalg.inv(det.m).T).std(axis=0)
        assert np.allclose(cp.sigma, mc, rtol=0.03)

    def test_matrix_error_term(self):
        det = DetectionMatrix(np.eye(4), np.full((4, 4), 0.01))
        cp = correct_detection([1.0, 0, 0, 0], np.zeros(4), det)
        assert cp.sigma[0] == pytest.approx(0.01)


class TestReconstruction:
    def test_all_zero(self):
        rec = reconstruct_density_matrix(np.zeros(15))
        assert np.allclose(rec.rho, np.eye(4) / 4)

    def test_bell_from_three_correlators(self):
        lam = {k: 0.0 for k in PAULI_LABELS}
        lam.update(ZZ=1.0, XX=1.0, YY=-1.0)
        assert np.allclose(reconstruct_density_matrix(lam).rho, PHI, atol=1e-15)

    def test_out_of_range(self):
        lam = np.zeros(15)
        lam[3] = 1.2
        with pytest.raises(DomainError):
            reconstruct_density_matrix(lam)

    def test_missing_label(self):
        with pytest.raises(DomainError):
            reconstruct_density_matrix({"XX": 1.0})

    def test_direct_round_trip(self):
        rho = random_density(np.random.default_rng(5), 4)
        rec = reconstruct_density_matrix(exact_expectations(rho))
        assert np.max(np.abs(rec.rho - rho)) < 1e-12

    def test_pipeline_round_trip(self):
        rng = np.random.default_rng(11)
        for _ in range(100):
            rho = random_density(rng, 4)
            assert np.max(np.abs(reconstruct_exact(rho).rho - rho)) < 1e-10

    def test_pipeline_with_detector(self):
        rho = random_density(np.random.default_rng(12), 4)
        rec = reconstruct_exact(rho, DetectionMatrix.nearest_neighbor(0.03))
        assert np.max(np.abs(rec.rho - rho)) < 1e-10

    @given(st.integers(0, 10_000))
    def test_hermitian_unit_trace_from_noisy_counts(self, seed):
        rng = np.random.default_rng(seed)
        counts = {k: rng.integers(0, 50, 4) + 1 for k in range(1, 10)}
        rec, _ = reconstruct_from_counts(counts)
        assert np.allclose(rec.rho, rec.rho.conj().T, atol=1e-12)
        assert abs(np.trace(rec.rho) - 1) < 1e-12

    def test_error_propagation_shape(self):
        sig = np.full(15, 0.02)
        rec = reconstruct_density_matrix(np.zeros(15), sig)
        assert rec.sigma_re.shape == (4, 4)
        assert np.all(rec.sigma_re >= 0) and rec.sigma_im[0, 0] == 0

    def test_finite_shot_fidelity_spread(self):
        det = DetectionMatrix.identity()
        fids = []
        for seed in range(20):
            ss = np.random.SeedSequence(seed).spawn(9)
            counts = {s.index: simulate_shots(PHI, s, 200, det, ss[s.index - 1]) for s in settings_table()}
            rec, _ = reconstruct_from_counts(counts, det)
            v = BELL_VECTORS["Phi_plus"]
            fids.append(np.real(v.conj() @ rec.rho @ v))
        assert np.std(fids, ddof=1) < 0.03
        assert abs(np.mean(fids) - 1) < 0.03


class TestNegativityError:
    def test_zero_errors(self):
        rec = ReconstructedState(PHI, np.zeros((4, 4)), np.zeros((4, 4)))
        est = negativity_with_error(rec, 500)
        assert est.std == 0 and est.value == pytest.approx(0.5)

    def test_boundary_bias(self):
        rec = ReconstructedState(PHI, np.full((4, 4), 0.01), np.full((4, 4), 0.01))
        est = negativity_with_error(rec, 4000, seed=2)
        assert est.value == pytest.approx(0.5)
        assert est.mean < 0.5
        assert est.samples.max() <= 0.5 and est.interval[1] <= 0.5

    def test_reproducible(self):
        rec = ReconstructedState(PHI, np.full((4, 4), 0.02), np.full((4, 4), 0.02))
        a = negativity_with_error(rec, 1000, seed=9)
        b = negativity_with_error(rec, 1000, seed=9)
        assert np.array_equal(a.histogram, b.histogram)

    def test_untruncated_can_exceed(self):
        rec = ReconstructedState(PHI, np.full((4, 4), 0.05), np.full((4, 4), 0.05))
        est = negativity_with_error(rec, 2000, seed=1, truncate_samples=False, clamp_interval=False)
        assert est.samples.max() > 0.5

    def test_minimum_samples(self):
        with pytest.raises(DomainError):
            negativity_with_error(ReconstructedState(PHI, np.zeros((4, 4)), np.zeros((4, 4))), 10)

    def test_identity_gate_is_separable(self):
        plus = np.full(4, 0.5, dtype=complex)
        rec = reconstruct_exact(np.outer(plus, plus))
        assert negativity(rec.rho) == pytest.approx(0.0, abs=1e-12)

    def test_shot_noise_std(self):
        det = DetectionMatrix.identity()
        ss = np.random.SeedSequence(4).spawn(9)
        counts = {s.index: simulate_shots(PHI, s, 200, det, ss[s.index - 1]) for s in settings_table()}
        rec, _ = reconstruct_from_counts(counts, det)
        est = negativity_with_error(rec, 5000, seed=4)
        assert 0 < est.std <= 0.03


class TestCsv:
    def test_detection_matrix(self, tmp_path):
        det = DetectionMatrix.nearest_neighbor(0.02, 0.001)
        path = tmp_path / "det.csv"
        write_detection_matrix_csv(path, det)
        back = read_detection_matrix_csv(path)
        assert np.array_equal(back.m, det.m) and np.array_equal(back.sigma, det.sigma)

    def test_counts(self, tmp_path):
        counts = {k: np.array([k, 2 * k, 3, 4]) for k in range(1, 10)}
        path = tmp_path / "counts.csv"
        write_counts_csv(path, counts, comment="synthetic")
        assert path.read_text().startswith("# synthetic")
        back = read_counts_csv(path)
        assert all(np.array_equal(back[k], counts[k]) for k in counts)

    def test_bad_detection_csv(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(DomainError):
            read_detection_matrix_csv(path)
