"""Dense operator algebra on the qubit (x qubit) x Fock composite space.

Factor ordering is fixed: qubit 1, qubit 2 (if present), phonon.
Qubit basis index 0 is the lower hyperfine level, so the Pauli matrices
below use sigma_z = diag(1, -1) in that computational order.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidDimensionError, LayoutError, TruncationWarning

HERMITIAN_TOL = 1e-12
STATE_TOL = 1e-10
POSITIVITY_TOL = -1e-8
TRUNCATION_TAIL_TOL = 1e-4

IDENTITY2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
# |1><0|: raises the energy (lower hyperfine level is index 0)
SIGMA_PLUS = np.array([[0, 0], [1, 0]], dtype=complex)
SIGMA_MINUS = SIGMA_PLUS.T.copy()


@dataclass(frozen=True)
class HilbertLayout:
    n_qubits: int
    fock_dim: int

    def __post_init__(self):
        if self.n_qubits not in (1, 2):
            raise LayoutError(f"n_qubits must be 1 or 2, got {self.n_qubits}")
        if self.fock_dim < 2:
            raise InvalidDimensionError(f"fock_dim must be >= 2, got {self.fock_dim}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (2,) * self.n_qubits + (self.fock_dim,)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits * self.fock_dim

    @property
    def qubit_dim(self) -> int:
        return 2**self.n_qubits

    @property
    def phonon_index(self) -> int:
        return self.n_qubits


def _check_square(matrix: np.ndarray, dim: int) -> None:
    if matrix.shape != (dim, dim):
        raise LayoutError(f"matrix shape {matrix.shape} does not match dimension {dim}")


def hermiticity_error(matrix: np.ndarray) -> float:
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


@dataclass(frozen=True, eq=False)
class QuantumOperator:
    """Square complex matrix tied to a layout (hbar = 1, angular units)."""

    layout: HilbertLayout
    matrix: np.ndarray
    hermitian: bool = False

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        _check_square(m, self.layout.dim)
        if self.hermitian and hermiticity_error(m) > HERMITIAN_TOL * max(1.0, np.max(np.abs(m))):
            raise DomainError("operator flagged Hermitian is not Hermitian within tolerance")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __matmul__(self, other: QuantumOperator) -> QuantumOperator:
        return QuantumOperator(self.layout, self.matrix @ other.matrix)

    def __add__(self, other: QuantumOperator) -> QuantumOperator:
        return QuantumOperator(self.layout, self.matrix + other.matrix)

    def __sub__(self, other: QuantumOperator) -> QuantumOperator:
        return QuantumOperator(self.layout, self.matrix - other.matrix)

    def __mul__(self, scalar: complex) -> QuantumOperator:
        return QuantumOperator(self.layout, self.matrix * scalar)

    __rmul__ = __mul__

    def dag(self) -> QuantumOperator:
        return QuantumOperator(self.layout, self.matrix.conj().T, self.hermitian)

    def expect(self, state: QuantumState) -> complex:
        if state.is_pure:
            v = state.data
            return complex(v.conj() @ self.matrix @ v)
        return complex(np.trace(self.matrix @ state.data))


@dataclass(frozen=True, eq=False)
class QuantumState:
    """Pure state vector (1-D data) or density matrix (2-D data).

    ``dims`` lists the factor dimensions, which lets reduced states (for
    example the phonon factor alone or the two-qubit block) share the class.
    """

    dims: tuple[int, ...]
    data: np.ndarray
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        d = np.array(self.data, dtype=complex)
        dim = int(np.prod(self.dims))
        object.__setattr__(self, "dims", tuple(int(x) for x in self.dims))
        if d.ndim == 1:
            if d.shape != (dim,):
                raise LayoutError(f"state vector length {d.shape[0]} != {dim}")
            if self.validate and abs(np.linalg.norm(d) - 1.0) > STATE_TOL:
                raise DomainError("pure state is not normalized")
        elif d.ndim == 2:
            _check_square(d, dim)
            if self.validate:
                if abs(np.trace(d) - 1.0) > STATE_TOL:
                    raise DomainError("density matrix trace differs from 1")
                if hermiticity_error(d) > STATE_TOL:
                    raise DomainError("density matrix is not Hermitian")
                if np.linalg.eigvalsh(0.5 * (d + d.conj().T)).min() < POSITIVITY_TOL:
                    raise DomainError("density matrix has negative eigenvalues")
        else:
            raise LayoutError("state data must be a vector or a square matrix")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def from_layout(cls, layout: HilbertLayout, data: np.ndarray, validate: bool = True) -> QuantumState:
        return cls(layout.dims, data, validate)

    @property
    def is_pure(self) -> bool:
        return self.data.ndim == 1

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @cached_property
    def density_matrix(self) -> np.ndarray:
        if self.is_pure:
            return np.outer(self.data, self.data.conj())
        return self.data

    def to_density(self) -> QuantumState:
        return QuantumState(self.dims, self.density_matrix, validate=False)


def tensor(*factors: np.ndarray) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for f in factors:
        out = np.kron(out, f)
    return out


def ladder_operators(fock_dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Truncated lowering and raising matrices, lower[n-1, n] = sqrt(n)."""
    if fock_dim < 2:
        raise InvalidDimensionError(f"fock_dim must be >= 2, got {fock_dim}")
    lower = np.diag(np.sqrt(np.arange(1, fock_dim, dtype=float)), 1).astype(complex)
    return lower, lower.conj().T.copy()


def embed(op: np.ndarray, factor_index: int, layout: HilbertLayout) -> QuantumOperator:
    """Place a single-factor operator into the full layout, identity elsewhere."""
    dims = layout.dims
    if not 0 <= factor_index < len(dims):
        raise LayoutError(f"factor index {factor_index} out of range for {len(dims)} factors")
    op = np.asarray(op, dtype=complex)
    if op.shape != (dims[factor_index],) * 2:
        raise LayoutError(f"operator shape {op.shape} does not match factor dimension {dims[factor_index]}")
    factors = [np.eye(d, dtype=complex) for d in dims]
    factors[factor_index] = op
    return QuantumOperator(layout, tensor(*factors))


@dataclass(frozen=True)
class OperatorSet:
    """Frequently used embedded operators for one layout, as raw arrays."""

    layout: HilbertLayout
    b: np.ndarray
    bdag: np.ndarray
    number: np.ndarray
    x: tuple[np.ndarray, ...]
    y: tuple[np.ndarray, ...]
    z: tuple[np.ndarray, ...]
    sp: tuple[np.ndarray, ...]
    identity: np.ndarray

    @classmethod
    def for_layout(cls, layout: HilbertLayout) -> OperatorSet:
        lower, raise_ = ladder_operators(layout.fock_dim)
        ph = layout.phonon_index
        b = embed(lower, ph, layout).matrix
        bdag = embed(raise_, ph, layout).matrix
        q = range(layout.n_qubits)
        return cls(
            layout=layout,
            b=b,
            bdag=bdag,
            number=bdag @ b,
            x=tuple(embed(PAULI_X, j, layout).matrix for j in q),
            y=tuple(embed(PAULI_Y, j, layout).matrix for j in q),
            z=tuple(embed(PAULI_Z, j, layout).matrix for j in q),
            sp=tuple(embed(SIGMA_PLUS, j, layout).matrix for j in q),
            identity=np.eye(layout.dim, dtype=complex),
        )


def thermal_populations(n_bar: float, fock_dim: int, warn: bool = True) -> np.ndarray:
    if n_bar < 0:
        raise DomainError(f"n_bar must be >= 0, got {n_bar}")
    if fock_dim < 2:
        raise InvalidDimensionError(f"fock_dim must be >= 2, got {fock_dim}")
    if n_bar == 0:
        p = np.zeros(fock_dim)
        p[0] = 1.0
        return p
    q = n_bar / (1.0 + n_bar)
    p = (1.0 - q) * q ** np.arange(fock_dim)
    if warn and p[-1] > TRUNCATION_TAIL_TOL:
        warnings.warn(
            f"thermal tail p[{fock_dim - 1}] = {p[-1]:.2e} exceeds {TRUNCATION_TAIL_TOL:g}",
            TruncationWarning,
            stacklevel=2,
        )
    return p / p.sum()


def thermal_fock_state(n_bar: float, fock_dim: int) -> QuantumState:
    """Truncated, renormalized thermal state of the phonon mode."""
    return QuantumState((fock_dim,), np.diag(thermal_populations(n_bar, fock_dim)).astype(complex))


def fock_vector(n: int, fock_dim: int) -> np.ndarray:
    v = np.zeros(fock_dim, dtype=complex)
    v[n] = 1.0
    return v


def product_state(*parts: QuantumState | np.ndarray) -> QuantumState:
    """Tensor product; returns a pure state only if every part is pure."""
    arrays, dims = [], []
    for p in parts:
        if isinstance(p, QuantumState):
            arrays.append(p.data)
            dims.extend(p.dims)
        else:
            a = np.asarray(p, dtype=complex)
            arrays.append(a)
            dims.append(a.shape[0])
    if all(a.ndim == 1 for a in arrays):
        out = arrays[0]
        for a in arrays[1:]:
            out = np.kron(out, a)
        return QuantumState(tuple(dims), out)
    mats = [np.outer(a, a.conj()) if a.ndim == 1 else a for a in arrays]
    return QuantumState(tuple(dims), tensor(*mats))


def partial_trace(state: QuantumState, keep: Sequence[int]) -> QuantumState:
    """Reduced density matrix on the factors listed in ``keep`` (in order)."""
    keep = sorted(set(int(k) for k in keep))
    n = len(state.dims)
    if not keep:
        raise DomainError("keep set must be nonempty")
    if keep[0] < 0 or keep[-1] >= n:
        raise LayoutError(f"keep indices {keep} out of range for {n} factors")
    dims = state.dims
    traced = [i for i in range(n) if i not in keep]
    kd = int(np.prod([dims[i] for i in keep]))
    if state.is_pure:
        psi = state.data.reshape(dims).transpose(keep + traced).reshape(kd, -1)
        rho = psi @ psi.conj().T
    else:
        r = state.data.reshape(dims + dims)
        letters = "abcdefghij"
        row = [letters[i] for i in range(n)]
        col = [letters[i].upper() for i in range(n)]
        for i in traced:
            col[i] = row[i]
        out = "".join(row[i] for i in keep) + "".join(col[i] for i in keep)
        rho = np.einsum("".join(row) + "".join(col) + "->" + out, r).reshape(kd, kd)
    return QuantumState(tuple(dims[i] for i in keep), rho, validate=False)


def qubit_block(rho: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    """Trace out the phonon from a full-layout density matrix (fast path)."""
    q, f = layout.qubit_dim, layout.fock_dim
    return np.einsum("ajbj->ab", rho.reshape(q, f, q, f))


def phonon_block(rho: np.ndarray, layout: HilbertLayout) -> np.ndarray:
    q, f = layout.qubit_dim, layout.fock_dim
    return np.einsum("jajb->ab", rho.reshape(q, f, q, f))


def top_fock_population(rho: np.ndarray, layout: HilbertLayout, levels: int = 2) -> float:
    p = np.real(np.diag(phonon_block(rho, layout)))
    return float(p[-levels:].sum())


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    w = np.linalg.eigvalsh(0.5 * ((a - b) + (a - b).conj().T))
    return 0.5 * float(np.abs(w).sum())
