"""Nine-setting two-qubit tomography with detection-error correction.

Qubit readout is in the computational basis with outcome order
(00, 01, 10, 11); sigma_z = diag(1, -1) so |0> gives +1.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from .entanglement import negativity
from .errors import DomainError, InversionError
from .quantum import IDENTITY2, PAULI_X, PAULI_Y, PAULI_Z

PAULIS = {"I": IDENTITY2, "X": PAULI_X, "Y": PAULI_Y, "Z": PAULI_Z}
PAULI_LABELS: tuple[str, ...] = tuple(a + b for a, b in product("IXYZ", repeat=2))[1:]
OUTCOMES = ("00", "01", "10", "11")
# sign of each outcome under Z x I, I x Z, Z x Z
_ZI = np.array([1, 1, -1, -1])
_IZ = np.array([1, -1, 1, -1])
_ZZ = _ZI * _IZ


def pauli_product(label: str) -> np.ndarray:
    return np.kron(PAULIS[label[0]], PAULIS[label[1]])


def analysis_rotation(phi: float | None) -> np.ndarray:
    """R(pi/2, phi) = exp(-i pi/4 (cos phi X + sin phi Y)); identity for None."""
    if phi is None:
        return IDENTITY2.copy()
    n = np.cos(phi) * PAULI_X + np.sin(phi) * PAULI_Y
    return np.cos(np.pi / 4) * IDENTITY2 - 1j * np.sin(np.pi / 4) * n


def _measured_axis(phi: float | None) -> tuple[str, int]:
    """Pauli P and sign s with R^dag Z R = s P."""
    r = analysis_rotation(phi)
    z = r.conj().T @ PAULI_Z @ r
    for name in "XYZ":
        for s in (1, -1):
            if np.allclose(z, s * PAULIS[name], atol=1e-12):
                return name, s
    raise AssertionError("analysis rotation does not map Z onto a Pauli axis")


@dataclass(frozen=True)
class MeasurementSetting:
    index: int
    phi1: float | None
    phi2: float | None

    @property
    def unitary(self) -> np.ndarray:
        return np.kron(analysis_rotation(self.phi1), analysis_rotation(self.phi2))

    def observables(self) -> dict[str, tuple[np.ndarray, int]]:
        """Map Pauli-product label -> (outcome sign vector, overall sign)."""
        a1, s1 = _measured_axis(self.phi1)
        a2, s2 = _measured_axis(self.phi2)
        return {
            a1 + "I": (_ZI, s1),
            "I" + a2: (_IZ, s2),
            a1 + a2: (_ZZ, s1 * s2),
        }


_R3 = 3 * np.pi / 2
_R1 = np.pi
_TABLE = (
    (None, None),
    (_R3, None),
    (_R1, None),
    (None, _R3),
    (None, _R1),
    (_R3, _R3),
    (_R3, _R1),
    (_R1, _R3),
    (_R1, _R1),
)


def settings_table() -> list[MeasurementSetting]:
    return [MeasurementSetting(k + 1, p1, p2) for k, (p1, p2) in enumerate(_TABLE)]


@dataclass(frozen=True)
class DetectionMatrix:
    """m[i, j] = probability of assigning outcome i when state j was prepared."""

    m: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        if m.shape != (4, 4):
            raise DomainError("detection matrix must be 4x4")
        if np.any(m < -1e-12) or np.any(m > 1 + 1e-12):
            raise DomainError("detection probabilities must lie in [0, 1]")
        if not np.allclose(m.sum(axis=0), 1.0, atol=1e-9):
            raise DomainError("detection matrix columns must sum to 1")
        s = np.zeros((4, 4)) if self.sigma is None else np.asarray(self.sigma, dtype=float)
        if s.shape != (4, 4) or np.any(s < 0):
            raise DomainError("sigma must be a nonnegative 4x4 matrix")
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "sigma", s)

    @classmethod
    def identity(cls) -> DetectionMatrix:
        return cls(np.eye(4))

    @classmethod
    def nearest_neighbor(cls, p: float = 0.02, sigma: float = 0.0) -> DetectionMatrix:
        """Each outcome leaks probability p to each single-bit-flip neighbour."""
        m = np.zeros((4, 4))
        for j in range(4):
            for i in range(4):
                d = bin(i ^ j).count("1")
                m[i, j] = 1 - 2 * p if d == 0 else (p if d == 1 else 0.0)
        return cls(m, np.full((4, 4), sigma))

    @property
    def condition_number(self) -> float:
        return float(np.linalg.cond(self.m))


def measurement_probabilities(rho: np.ndarray, setting: MeasurementSetting, detector: DetectionMatrix | None = None) -> np.ndarray:
    """Exact assignment probabilities P~ = M P for one setting."""
    u = setting.unitary
    p = np.clip(np.real(np.diag(u @ rho @ u.conj().T)), 0.0, None)
    p = p / p.sum()
    return p if detector is None else detector.m @ p


def simulate_shots(
    rho: np.ndarray,
    setting: MeasurementSetting,
    shots: int,
    detector: DetectionMatrix | None = None,
    seed: int | np.random.SeedSequence | None = 0,
) -> np.ndarray:
    """Multinomial outcome counts in the order (00, 01, 10, 11)."""
    if shots < 1:
        raise DomainError("shots must be >= 1")
    p = measurement_probabilities(rho, setting, detector)
    rng = np.random.default_rng(seed)
    return rng.multinomial(shots, p / p.sum())


@dataclass(frozen=True)
class CorrectedProbabilities:
    p: np.ndarray
    sigma: np.ndarray
    sigma_minv: np.ndarray
    nonphysical: np.ndarray
    condition_number: float


def inverse_with_errors(detector: DetectionMatrix) -> tuple[np.ndarray, np.ndarray]:
    """M^-1 and its entrywise standard error, sigma^2 = sum_ij (Minv_ai s_ij Minv_jb)^2."""
    cond = detector.condition_number
    if not np.isfinite(cond) or cond > 1e12:
        raise InversionError(f"detection matrix is singular (condition number {cond:.3g})", cond)
    minv = np.linalg.inv(detector.m)
    var = np.einsum("ai,ij,jb->ab", minv**2, detector.sigma**2, minv**2)
    return minv, np.sqrt(var)


def correct_detection(p_tilde, sigma_p_tilde, detector: DetectionMatrix) -> CorrectedProbabilities:
    p_tilde = np.asarray(p_tilde, dtype=float)
    s_tilde = np.asarray(sigma_p_tilde, dtype=float)
    minv, s_minv = inverse_with_errors(detector)
    p = minv @ p_tilde
    var = (minv**2) @ (s_tilde**2) + (s_minv**2) @ (p_tilde**2)
    flags = (p < 0) | (p > 1)
    return CorrectedProbabilities(p, np.sqrt(var), s_minv, flags, detector.condition_number)


@dataclass(frozen=True)
class ReconstructedState:
    rho: np.ndarray
    sigma_re: np.ndarray
    sigma_im: np.ndarray
    lambdas: dict = field(default_factory=dict)

    @property
    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho).min())


def reconstruct_density_matrix(lambdas, sigmas=None) -> ReconstructedState:
    """Linear inversion rho = (1/4)(1 + sum_k lambda_k P_k).

    ``lambdas`` is a mapping from labels such as "XZ" to expectation values
    or a length-15 sequence in :data:`PAULI_LABELS` order.
    """
    lam = _as_label_dict(lambdas)
    sig = _as_label_dict(sigmas) if sigmas is not None else {k: 0.0 for k in PAULI_LABELS}
    rho = np.eye(4, dtype=complex) / 4
    var_re = np.zeros((4, 4))
    var_im = np.zeros((4, 4))
    for label in PAULI_LABELS:
        v = lam[label]
        if not -1 - 1e-12 <= v <= 1 + 1e-12:
            raise DomainError(f"expectation {label} = {v} outside [-1, 1]")
        p = pauli_product(label) / 4
        rho = rho + v * p
        var_re += (p.real * sig[label]) ** 2
        var_im += (p.imag * sig[label]) ** 2
    rho = 0.5 * (rho + rho.conj().T)
    return ReconstructedState(rho, np.sqrt(var_re), np.sqrt(var_im), dict(lam))


def _as_label_dict(values) -> dict[str, float]:
    if isinstance(values, dict):
        missing = set(PAULI_LABELS) - set(values)
        if missing:
            raise DomainError(f"missing expectations: {sorted(missing)}")
        return {k: float(values[k]) for k in PAULI_LABELS}
    arr = np.asarray(values, dtype=float)
    if arr.shape != (15,):
        raise DomainError("expected 15 expectation values")
    return dict(zip(PAULI_LABELS, arr.tolist()))


def exact_expectations(rho: np.ndarray) -> dict[str, float]:
    return {k: float(np.real(np.trace(pauli_product(k) @ rho))) for k in PAULI_LABELS}


def expectations_from_probabilities(
    probs: dict[int, np.ndarray], sigmas: dict[int, np.ndarray] | None = None
) -> tuple[dict[str, float], dict[str, float]]:
    """Combine per-setting outcome probabilities into the 15 expectations.

    Expectations measured by several settings (single-qubit terms) are
    averaged; their errors combine accordingly.
    """
    acc: dict[str, list[tuple[float, float]]] = {k: [] for k in PAULI_LABELS}
    for s in settings_table():
        if s.index not in probs:
            continue
        p = np.asarray(probs[s.index], dtype=float)
        sp = np.zeros(4) if sigmas is None else np.asarray(sigmas[s.index], dtype=float)
        for label, (signs, sgn) in s.observables().items():
            val = sgn * float(signs @ p)
            err = float(np.sqrt(np.sum(sp**2)))
            acc[label].append((val, err))
    lam, sig = {}, {}
    for label, vals in acc.items():
        if not vals:
            raise DomainError(f"no setting provides {label}")
        v = np.array(vals)
        lam[label] = float(np.clip(v[:, 0].mean(), -1.0, 1.0))
        sig[label] = float(np.sqrt(np.sum(v[:, 1] ** 2)) / len(v))
    return lam, sig


def reconstruct_from_counts(
    counts: dict[int, np.ndarray], detector: DetectionMatrix | None = None
) -> tuple[ReconstructedState, dict[int, CorrectedProbabilities]]:
    """Counts per setting -> detection-corrected probabilities -> state."""
    detector = detector or DetectionMatrix.identity()
    probs, sigs, corrected = {}, {}, {}
    for k, c in counts.items():
        c = np.asarray(c, dtype=float)
        n = c.sum()
        pt = c / n
        st = np.sqrt(pt * (1 - pt) / n)
        cp = correct_detection(pt, st, detector)
        corrected[k] = cp
        probs[k], sigs[k] = cp.p, cp.sigma
    lam, sig = expectations_from_probabilities(probs, sigs)
    return reconstruct_density_matrix(lam, sig), corrected


def reconstruct_exact(rho: np.ndarray, detector: DetectionMatrix | None = None) -> ReconstructedState:
    """Infinite-statistics pipeline: exact P~ for every setting, corrected, inverted."""
    detector = detector or DetectionMatrix.identity()
    probs = {}
    for s in settings_table():
        pt = measurement_probabilities(rho, s, detector)
        probs[s.index] = correct_detection(pt, np.zeros(4), detector).p
    lam, sig = expectations_from_probabilities(probs)
    return reconstruct_density_matrix(lam, sig)


@dataclass(frozen=True)
class NegativityEstimate:
    value: float
    std: float
    mean: float
    samples: np.ndarray
    histogram: np.ndarray
    bin_edges: np.ndarray
    interval: tuple[float, float]


def sample_density_matrices(rec: ReconstructedState, n_samples: int, seed=0) -> np.ndarray:
    """Gaussian perturbations of the upper triangle, mirrored to stay Hermitian.

    The trace is left as sampled and no positivity projection is applied.
    """
    rng = np.random.default_rng(seed)
    iu = np.triu_indices(4)
    re = rng.standard_normal((n_samples, iu[0].size)) * rec.sigma_re[iu] + rec.rho.real[iu]
    im = rng.standard_normal((n_samples, iu[0].size)) * rec.sigma_im[iu] + rec.rho.imag[iu]
    out = np.zeros((n_samples, 4, 4), dtype=complex)
    out[:, iu[0], iu[1]] = re + 1j * im
    diag = np.arange(4)
    out[:, diag, diag] = out[:, diag, diag].real
    strict_upper = np.triu(np.ones((4, 4)), 1)
    return out + np.conj(np.transpose(out * strict_upper, (0, 2, 1)))


def negativity_with_error(
    rec: ReconstructedState,
    n_samples: int = 10000,
    seed=0,
    truncate_samples: bool = True,
    clamp_interval: bool = True,
    bins: int = 50,
) -> NegativityEstimate:
    """Monte-Carlo negativity uncertainty from entrywise Gaussian errors."""
    if n_samples < 100:
        raise DomainError("n_samples must be >= 100")
    mats = sample_density_matrices(rec, n_samples, seed)
    vals = np.array([negativity(m) for m in mats])
    if truncate_samples:
        vals = np.clip(vals, 0.0, 0.5)
    point = negativity(rec.rho)
    std = float(vals.std(ddof=1))
    lo, hi = point - std, point + std
    if clamp_interval:
        lo, hi = float(np.clip(lo, 0.0, 0.5)), float(np.clip(hi, 0.0, 0.5))
    hist, edges = np.histogram(vals, bins=bins, range=(0.0, 0.5) if truncate_samples else None)
    return NegativityEstimate(point, std, float(vals.mean()), vals, hist, edges, (lo, hi))


def write_detection_matrix_csv(path: str | Path, det: DetectionMatrix) -> None:
    cols = [f"m_{i}" for i in range(4)] + [f"sigma_{i}" for i in range(4)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write("# rows: assigned outcome 00,01,10,11; m_j: prepared state j\n")
        w = csv.writer(fh)
        w.writerow(cols)
        for i in range(4):
            w.writerow([repr(float(x)) for x in det.m[i]] + [repr(float(x)) for x in det.sigma[i]])


def _data_lines(text: str) -> list[list[str]]:
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    return list(csv.reader(io.StringIO("\n".join(lines))))


def read_detection_matrix_csv(path: str | Path) -> DetectionMatrix:
    rows = _data_lines(Path(path).read_text(encoding="utf-8"))
    header, body = rows[0], rows[1:]
    if len(body) != 4 or len(header) != 8:
        raise DomainError("detection CSV needs a header and 4 rows of 8 columns")
    data = np.array([[float(x) for x in r] for r in body])
    return DetectionMatrix(data[:, :4], data[:, 4:])


def write_counts_csv(path: str | Path, counts: dict[int, np.ndarray], comment: str | None = None) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        w = csv.writer(fh)
        w.writerow(["setting", "n00", "n01", "n10", "n11"])
        for k in sorted(counts):
            w.writerow([k] + [int(x) for x in counts[k]])


def read_counts_csv(path: str | Path) -> dict[int, np.ndarray]:
    rows = _data_lines(Path(path).read_text(encoding="utf-8"))
    return {int(r[0]): np.array([int(x) for x in r[1:5]]) for r in rows[1:]}
