"""Time evolution: unitary, Lindblad heating, noise ensembles, Floquet."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.linalg import expm

from .errors import DomainError, InternalConsistencyError, StepSizeError
from .quantum import (
    HERMITIAN_TOL,
    HilbertLayout,
    QuantumState,
    TruncationWarning,
    ladder_operators,
    top_fock_population,
)

Hamiltonian = Callable[[float], np.ndarray]
Observable = Callable[[np.ndarray], float]

TRUNCATION_GUARD = 1e-6
GL_OFFSET = math.sqrt(3) / 6


@dataclass(frozen=True)
class PropagationSpec:
    """Integration window, step and output times (seconds).

    ``method`` is "piecewise-exponential" (commutator-free Magnus stepper of
    ``order`` 2 or 4, each step exponentiated by eigendecomposition) or "rk4".
    """

    t_start: float
    t_end: float
    dt: float
    record_times: tuple[float, ...] = ()
    method: str = "piecewise-exponential"
    order: int = 4
    convergence_tol: float = 1e-6

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be > 0")
        if not self.t_end > self.t_start:
            raise DomainError("t_end must exceed t_start")
        if self.method not in ("piecewise-exponential", "rk4"):
            raise DomainError(f"unknown method {self.method!r}")
        if self.order not in (2, 4):
            raise DomainError("order must be 2 or 4")
        rec = tuple(float(t) for t in (self.record_times or (self.t_end,)))
        span = self.t_end - self.t_start
        if min(rec) < self.t_start - 1e-12 * span or max(rec) > self.t_end + 1e-12 * span:
            raise DomainError("record_times must lie within [t_start, t_end]")
        object.__setattr__(self, "record_times", tuple(sorted(rec)))

    @classmethod
    def uniform(cls, t_end: float, dt: float, n_records: int, t_start: float = 0.0, **kw) -> PropagationSpec:
        times = np.linspace(t_start, t_end, n_records + 1)[1:]
        return cls(t_start, t_end, dt, tuple(times), **kw)

    def halved(self) -> PropagationSpec:
        return PropagationSpec(
            self.t_start, self.t_end, self.dt / 2, self.record_times, self.method, self.order, self.convergence_tol
        )


@dataclass(frozen=True)
class LindbladSpec:
    """Equal-rate b and b^dag jump channels on the phonon mode (phonons/s)."""

    heating_rate: float = 0.0

    def __post_init__(self):
        if self.heating_rate < 0:
            raise DomainError("heating_rate must be >= 0")


@dataclass(frozen=True)
class NoiseSpec:
    """Quasi-static Gaussian noise, one draw per realization."""

    sigma_omega1_rel: float = 0.0
    sigma_omega0: float = 0.0
    n_realizations: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.sigma_omega1_rel < 0 or self.sigma_omega0 < 0:
            raise DomainError("noise standard deviations must be >= 0")
        if self.n_realizations < 1:
            raise DomainError("n_realizations must be >= 1")

    def draws(self) -> list[NoiseDraw]:
        """Per-realization samples from independent child streams of the seed."""
        children = np.random.SeedSequence(self.seed).spawn(self.n_realizations)
        out = []
        for i, ss in enumerate(children):
            rng = np.random.default_rng(ss)
            a, b = rng.standard_normal(2)
            out.append(NoiseDraw(i, a * self.sigma_omega1_rel, b * self.sigma_omega0))
        return out


@dataclass(frozen=True)
class NoiseDraw:
    index: int
    omega1_rel: float
    omega0: float


@dataclass
class Trajectory:
    times: np.ndarray
    states: list[QuantumState] | None
    observables: dict[str, np.ndarray]
    max_top_population: float = 0.0
    min_eigenvalue: float = 0.0


def _segments(spec: PropagationSpec) -> list[tuple[float, float, int]]:
    segs, t0 = [], spec.t_start
    for tr in spec.record_times:
        length = tr - t0
        n = max(int(math.ceil(length / spec.dt - 1e-9)), 0)
        segs.append((t0, tr, n))
        t0 = tr
    return segs


def _check_hermitian(h: np.ndarray, t: float) -> None:
    scale = max(1.0, float(np.max(np.abs(h))))
    if np.max(np.abs(h - h.conj().T)) > HERMITIAN_TOL * scale:
        raise InternalConsistencyError(f"non-Hermitian Hamiltonian sample at t = {t:.6g}")


def magnus_generator(H: Hamiltonian, t: float, dt: float, order: int = 4) -> np.ndarray:
    """Hermitian exponent K with U(t + dt, t) ~ exp(-i K)."""
    if order == 2:
        return H(t + 0.5 * dt) * dt
    h1 = H(t + (0.5 - GL_OFFSET) * dt)
    h2 = H(t + (0.5 + GL_OFFSET) * dt)
    return 0.5 * dt * (h1 + h2) - 1j * (math.sqrt(3) / 12) * dt * dt * (h2 @ h1 - h1 @ h2)


def step_unitary(H: Hamiltonian, t: float, dt: float, order: int = 4) -> np.ndarray:
    k = magnus_generator(H, t, dt, order)
    w, v = np.linalg.eigh(0.5 * (k + k.conj().T))
    return (v * np.exp(-1j * w)) @ v.conj().T


def propagator(H: Hamiltonian, t0: float, t1: float, dt: float, order: int = 4) -> np.ndarray:
    """Full propagator U(t1, t0) from equal piecewise-exponential steps."""
    n = max(int(math.ceil((t1 - t0) / dt - 1e-9)), 1)
    h = (t1 - t0) / n
    dim = H(t0).shape[0]
    u = np.eye(dim, dtype=complex)
    for i in range(n):
        u = step_unitary(H, t0 + i * h, h, order) @ u
    return u


def _rk4_step(H: Hamiltonian, t: float, dt: float, x: np.ndarray) -> np.ndarray:
    if x.ndim == 1:
        f = lambda s, y: -1j * (H(s) @ y)
    else:
        def f(s, y):
            h = H(s)
            return -1j * (h @ y - y @ h)
    k1 = f(t, x)
    k2 = f(t + dt / 2, x + dt / 2 * k1)
    k3 = f(t + dt / 2, x + dt / 2 * k2)
    k4 = f(t + dt, x + dt * k3)
    return x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def _apply(u: np.ndarray, x: np.ndarray) -> np.ndarray:
    return u @ x if x.ndim == 1 else u @ x @ u.conj().T


def _guard(x: np.ndarray, layout: HilbertLayout | None) -> float:
    if layout is None:
        return 0.0
    rho = np.outer(x, x.conj()) if x.ndim == 1 else x
    return top_fock_population(rho, layout)


def _record(
    x: np.ndarray,
    dims: tuple[int, ...],
    observables: Mapping[str, Observable],
    store: dict[str, list],
    states: list | None,
) -> None:
    for name, fn in observables.items():
        store[name].append(fn(x))
    if states is not None:
        states.append(QuantumState(dims, x.copy(), validate=False))


def _warn_truncation(top: float) -> None:
    if top > TRUNCATION_GUARD:
        warnings.warn(
            f"top-two Fock population reached {top:.2e} (> {TRUNCATION_GUARD:g}); increase fock_dim",
            TruncationWarning,
            stacklevel=3,
        )


def evolve_unitary(
    H: Hamiltonian,
    state0: QuantumState,
    spec: PropagationSpec,
    observables: Mapping[str, Observable] | None = None,
    layout: HilbertLayout | None = None,
    keep_states: bool = True,
) -> Trajectory:
    """Propagate a pure state or density matrix under H(t).

    Observables receive the raw vector or matrix at each record time.
    Passing ``layout`` enables the Fock-truncation guard.
    """
    observables = dict(observables or {})
    x = np.array(state0.data, dtype=complex)
    if H(spec.t_start).shape != (x.shape[0],) * 2:
        raise InternalConsistencyError("state and Hamiltonian dimensions differ")
    store = {k: [] for k in observables}
    states = [] if keep_states else None
    top = _guard(x, layout)
    for a, b, n in _segments(spec):
        if n:
            h = (b - a) / n
            _check_hermitian(H(a + 0.5 * h), a)
            for i in range(n):
                t = a + i * h
                if spec.method == "rk4":
                    x = _rk4_step(H, t, h, x)
                else:
                    x = _apply(step_unitary(H, t, h, spec.order), x)
        top = max(top, _guard(x, layout))
        _record(x, state0.dims, observables, store, states)
    _warn_truncation(top)
    return Trajectory(
        np.array(spec.record_times), states, {k: np.array(v) for k, v in store.items()}, top
    )


def phonon_dissipator(fock_dim: int, heating_rate: float) -> np.ndarray:
    """Row-major superoperator of gamma (D[b] + D[b^dag]) on the phonon factor."""
    b, bd = ladder_operators(fock_dim)
    eye = np.eye(fock_dim)
    out = np.zeros((fock_dim**2,) * 2, dtype=complex)
    for c in (b, bd):
        cdc = c.conj().T @ c
        out += np.kron(c, c.conj()) - 0.5 * np.kron(cdc, eye) - 0.5 * np.kron(eye, cdc.T)
    return heating_rate * out


def _apply_phonon_superop(rho: np.ndarray, layout: HilbertLayout, sup: np.ndarray) -> np.ndarray:
    q, f = layout.qubit_dim, layout.fock_dim
    r = rho.reshape(q, f, q, f).transpose(0, 2, 1, 3).reshape(q * q, f * f)
    r = r @ sup.T
    return r.reshape(q, q, f, f).transpose(0, 2, 1, 3).reshape(q * f, q * f)


def evolve_lindblad(
    H: Hamiltonian,
    rho0: QuantumState,
    spec: PropagationSpec,
    lindblad: LindbladSpec,
    layout: HilbertLayout,
    observables: Mapping[str, Observable] | None = None,
    keep_states: bool = True,
    positivity_tol: float = -1e-7,
) -> Trajectory:
    """Heating master equation by symmetric (Strang) splitting.

    Each step applies half a step of the exact phonon-dissipator exponential,
    a full coherent step, and another dissipative half step.
    """
    if rho0.is_pure:
        rho0 = rho0.to_density()
    if lindblad.heating_rate == 0:
        traj = evolve_unitary(H, rho0, spec, observables, layout, keep_states)
        return traj
    observables = dict(observables or {})
    sup = phonon_dissipator(layout.fock_dim, lindblad.heating_rate)
    x = np.array(rho0.data, dtype=complex)
    store = {k: [] for k in observables}
    states = [] if keep_states else None
    top, min_eig = _guard(x, layout), 0.0
    cache: dict[float, np.ndarray] = {}
    for a, b, n in _segments(spec):
        if n:
            h = (b - a) / n
            half = cache.get(h)
            if half is None:
                half = cache.setdefault(h, expm(sup * (h / 2)))
            _check_hermitian(H(a + 0.5 * h), a)
            for i in range(n):
                t = a + i * h
                x = _apply_phonon_superop(x, layout, half)
                if spec.method == "rk4":
                    x = _rk4_step(H, t, h, x)
                else:
                    x = _apply(step_unitary(H, t, h, spec.order), x)
                x = _apply_phonon_superop(x, layout, half)
        lam = float(np.linalg.eigvalsh(0.5 * (x + x.conj().T)).min())
        min_eig = min(min_eig, lam)
        if lam < positivity_tol:
            raise StepSizeError(f"density matrix eigenvalue {lam:.2e} at t = {b:.6g}; refine dt")
        top = max(top, _guard(x, layout))
        _record(x, rho0.dims, observables, store, states)
    _warn_truncation(top)
    return Trajectory(
        np.array(spec.record_times), states, {k: np.array(v) for k, v in store.items()}, top, min_eig
    )


@dataclass
class EnsembleResult:
    times: np.ndarray
    mean: dict[str, np.ndarray]
    per_realization: dict[str, np.ndarray]
    draws: list[NoiseDraw] = field(default_factory=list)
    max_top_population: float = 0.0


def evolve_ensemble(
    factory: Callable[[NoiseDraw], Hamiltonian],
    state0: QuantumState,
    spec: PropagationSpec,
    noise: NoiseSpec,
    observables: Mapping[str, Observable],
    layout: HilbertLayout | None = None,
    workers: int = 1,
) -> EnsembleResult:
    """Average observables over quasi-static noise realizations.

    Results are assembled in realization order, so the output does not
    depend on ``workers``.
    """
    draws = noise.draws()

    def one(d: NoiseDraw) -> Trajectory:
        return evolve_unitary(factory(d), state0, spec, observables, layout, keep_states=False)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            trajs = list(pool.map(one, draws))
    else:
        trajs = [one(d) for d in draws]
    per = {k: np.array([tr.observables[k] for tr in trajs]) for k in observables}
    return EnsembleResult(
        np.array(spec.record_times),
        {k: v.mean(axis=0) for k, v in per.items()},
        per,
        draws,
        max(tr.max_top_population for tr in trajs),
    )


def floquet_propagator(H: Hamiltonian, period: float, steps: int = 100, order: int = 4, t0: float = 0.0) -> np.ndarray:
    """One-period propagator U(t0 + T, t0)."""
    return propagator(H, t0, t0 + period, period / steps, order)


def stroboscopic_expectations(
    u_period: np.ndarray, rho0: np.ndarray, observable: np.ndarray, n_periods: int
) -> np.ndarray:
    """tr(O U^m rho0 U^m^dag) for m = 0..n_periods via the Floquet spectrum."""
    w, v = np.linalg.eig(u_period)
    vi = np.linalg.inv(v)
    r = vi @ rho0 @ vi.conj().T
    o = v.conj().T @ observable @ v
    ph = w[None, :] ** np.arange(n_periods + 1)[:, None]
    return np.einsum("mi,ij,mj,ji->m", ph, r, ph.conj(), o).real


@dataclass(frozen=True)
class ConvergenceReport:
    dt: float
    max_delta: float
    tol: float
    passed: bool
    per_observable: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "dt": self.dt,
            "dt_halved": self.dt / 2,
            "max_delta": self.max_delta,
            "tol": self.tol,
            "passed": self.passed,
            "per_observable": self.per_observable,
        }


def compare_runs(coarse: Mapping[str, np.ndarray], fine: Mapping[str, np.ndarray], dt: float, tol: float) -> ConvergenceReport:
    per = {k: float(np.max(np.abs(np.asarray(coarse[k]) - np.asarray(fine[k])))) for k in coarse}
    worst = max(per.values()) if per else 0.0
    return ConvergenceReport(dt, worst, tol, worst < tol, per)


def dt_halving_check(
    run: Callable[[float], Mapping[str, np.ndarray]], dt: float, tol: float = 1e-6
) -> tuple[ConvergenceReport, Mapping[str, np.ndarray]]:
    """Run at dt and dt/2; return the report and the fine-step results."""
    coarse = run(dt)
    fine = run(dt / 2)
    return compare_runs(coarse, fine, dt, tol), fine


def time_grid(t_end: float, step: float, t_start: float = 0.0) -> np.ndarray:
    n = int(round((t_end - t_start) / step))
    return t_start + step * np.arange(1, n + 1)


def sample_hamiltonian_hermiticity(H: Hamiltonian, times: Sequence[float]) -> float:
    return max(float(np.max(np.abs(H(t) - H(t).conj().T))) for t in times)
