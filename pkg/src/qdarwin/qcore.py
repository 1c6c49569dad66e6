"""Dense quantum-state primitives: tensor-factor layouts, pure/mixed states,
partial traces, Hermitian eigendecomposition, unitary time evolution,
entropies and state distances.

Everything operates on dense complex numpy arrays.  The largest Hilbert
space used by the rest of the package is 2^9 = 512, so dense storage and
full eigendecompositions are the right tool; no sparsity machinery.

All values are immutable after construction (arrays are marked read-only)
and therefore safe to share across concurrent workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TOLERANCES",
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "IDENTITY_2",
    "SubsystemLayout",
    "StateVector",
    "DensityMatrix",
    "HermitianEig",
    "tensor",
    "partial_trace",
    "reduced_density",
    "herm_eig",
    "propagator",
    "entropy",
    "entropy_of_eigenvalues",
    "fidelity_pure",
    "trace_distance",
    "uhlmann_fidelity",
]

# Central tolerance table.  Every numerical guard in the package refers to
# one of these named entries; nothing hardcodes its own epsilon.
TOLERANCES = {
    "norm": 1e-10,           # state normalization
    "hermitian": 1e-10,      # max elementwise |M - M^dag| for density matrices
    "hermitian_input": 1e-8,  # accepted asymmetry before eigendecomposition
    "trace": 1e-10,          # |tr(rho) - 1|
    "eig_floor": -1e-10,     # smallest admissible density-matrix eigenvalue
    "unitarity": 1e-10,      # |U^dag U - I|
    "reconstruction": 1e-9,  # eigendecomposition reconstruction error
    "prob_floor": 1e-12,     # measurement outcomes below this are degenerate
    "rank_floor": 1e-14,     # spectral weight kept in low-rank factorizations
    "entropy_floor": 1e-6,   # bits of system entropy needed for the
                             # redundancy / pointer machinery to be defined
}

IDENTITY_2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)

IDENTITY_2.setflags(write=False)
PAULI_X.setflags(write=False)
PAULI_Y.setflags(write=False)
PAULI_Z.setflags(write=False)


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered tensor factorization: which factor is which subsystem.

    ``dims`` and ``labels`` run in kron order, so ``labels[0]`` is the
    slowest-varying index of any state built over this layout.
    """

    dims: tuple[int, ...]
    labels: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "labels", tuple(str(s) for s in self.labels))
        if len(self.dims) != len(self.labels):
            raise ValueError("dims and labels must have the same length")
        if len(self.dims) == 0:
            raise ValueError("layout needs at least one factor")
        if any(d < 1 for d in self.dims):
            raise ValueError("factor dimensions must be positive")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"duplicate labels in layout: {self.labels}")

    @classmethod
    def system_env(cls, n_env: int) -> "SubsystemLayout":
        """Qubit system 'S' followed by environment qubits 'E1'..'En'."""
        labels = ("S",) + tuple(f"E{i}" for i in range(1, n_env + 1))
        return cls(dims=(2,) * (n_env + 1), labels=labels)

    @classmethod
    def single_qubit(cls, label: str = "S") -> "SubsystemLayout":
        return cls(dims=(2,), labels=(label,))

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims))

    @property
    def n_factors(self) -> int:
        return len(self.dims)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown subsystem label {label!r}") from None

    def indices(self, labels: Iterable[str]) -> list[int]:
        return [self.index(s) for s in labels]

    def restrict(self, keep: Iterable[str]) -> "SubsystemLayout":
        """Sub-layout over ``keep``, preserving the original factor order."""
        keep_set = set(keep)
        unknown = keep_set - set(self.labels)
        if unknown:
            raise KeyError(f"unknown subsystem labels {sorted(unknown)}")
        pairs = [(d, s) for d, s in zip(self.dims, self.labels) if s in keep_set]
        if not pairs:
            raise ValueError("cannot restrict a layout to zero factors")
        return SubsystemLayout(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        return SubsystemLayout(self.dims + other.dims, self.labels + other.labels)

    def environment_labels(self) -> tuple[str, ...]:
        """All labels except the first (system) factor."""
        return self.labels[1:]


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state over a tensor-factor layout."""

    amplitudes: np.ndarray
    layout: SubsystemLayout

    def __post_init__(self):
        amp = _readonly(np.asarray(self.amplitudes, dtype=complex).ravel())
        object.__setattr__(self, "amplitudes", amp)
        if amp.size != self.layout.dim:
            raise ValueError(
                f"amplitude length {amp.size} does not match layout dimension {self.layout.dim}"
            )
        norm = float(np.sum(np.abs(amp) ** 2))
        if abs(norm - 1.0) > TOLERANCES["norm"]:
            raise ValueError(f"state not normalized: sum |a|^2 = {norm!r}")

    @classmethod
    def from_unnormalized(cls, amplitudes, layout: SubsystemLayout) -> "StateVector":
        amp = np.asarray(amplitudes, dtype=complex).ravel()
        nrm = np.linalg.norm(amp)
        if nrm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(amp / nrm, layout)

    @classmethod
    def basis(cls, index: int, layout: SubsystemLayout) -> "StateVector":
        amp = np.zeros(layout.dim, dtype=complex)
        amp[index] = 1.0
        return cls(amp, layout)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def density_matrix(self) -> "DensityMatrix":
        rho = np.outer(self.amplitudes, self.amplitudes.conj())
        return DensityMatrix(rho, self.layout, _trusted=True)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite density operator.

    Hermiticity and trace are always checked at construction.  The
    eigenvalue floor is checked too unless the matrix was produced by an
    operation that preserves positivity exactly (partial traces, pure-state
    projectors, convex mixtures), which passes ``_trusted=True``.
    """

    matrix: np.ndarray
    layout: SubsystemLayout
    _trusted: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        m = _readonly(np.asarray(self.matrix, dtype=complex))
        object.__setattr__(self, "matrix", m)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density matrix must be square, got shape {m.shape}")
        if m.shape[0] != self.layout.dim:
            raise ValueError(
                f"matrix dimension {m.shape[0]} does not match layout dimension {self.layout.dim}"
            )
        herm_err = float(np.max(np.abs(m - m.conj().T)))
        if herm_err > TOLERANCES["hermitian"]:
            raise ValueError(f"matrix not Hermitian: max |rho - rho^dag| = {herm_err:g}")
        tr_err = abs(complex(np.trace(m)) - 1.0)
        if tr_err > TOLERANCES["trace"]:
            raise ValueError(f"trace differs from 1 by {tr_err:g}")
        if not self._trusted:
            lam_min = float(np.linalg.eigvalsh(m)[0])
            if lam_min < TOLERANCES["eig_floor"]:
                raise ValueError(f"matrix has negative eigenvalue {lam_min:g}")

    @classmethod
    def from_pure(cls, state: StateVector) -> "DensityMatrix":
        return state.density_matrix()

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))


@dataclass(frozen=True, eq=False)
class HermitianEig:
    """Spectral decomposition H = V diag(w) V^dag with ascending eigenvalues."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def __post_init__(self):
        w = np.array(self.eigenvalues, dtype=float, copy=True)
        v = _readonly(self.eigenvectors)
        w.setflags(write=False)
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


# ---------------------------------------------------------------------------
# composition and reduction
# ---------------------------------------------------------------------------

def tensor(a, b):
    """Kronecker product of two states of the same kind.

    Layouts are concatenated; the factors of ``a`` come first.  Labels must
    stay unique, so combine states carrying distinct subsystem labels.
    """
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(np.kron(a.amplitudes, b.amplitudes), a.layout.concat(b.layout))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix(
            np.kron(a.matrix, b.matrix), a.layout.concat(b.layout), _trusted=True
        )
    raise TypeError(
        f"tensor requires two StateVector or two DensityMatrix arguments, "
        f"got {type(a).__name__} and {type(b).__name__}"
    )


def _ptrace_matrix(mat: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Partial trace of a square matrix over the factors not in ``keep``."""
    n = len(dims)
    keep = sorted(keep)
    t = mat.reshape(tuple(dims) + tuple(dims))
    row = list(range(n))
    col = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    reduced = np.einsum(t, row + col, out)
    d = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(d, d)


def _ptrace_pure(amp: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state without forming the full rho."""
    n = len(dims)
    keep = sorted(keep)
    t = amp.reshape(tuple(dims))
    idx = list(range(n))
    idx_conj = [i + n if i in keep else i for i in range(n)]
    out = [i for i in keep] + [i + n for i in keep]
    reduced = np.einsum(t, idx, t.conj(), idx_conj, out)
    d = int(np.prod([dims[i] for i in keep]))
    return reduced.reshape(d, d)


def partial_trace(rho: DensityMatrix, keep: Iterable[str]) -> DensityMatrix:
    """Trace out every factor whose label is not in ``keep``.

    The kept factors stay in their original relative order.  Trace and
    Hermiticity are preserved by construction.
    """
    keep = list(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    sub = rho.layout.restrict(keep)
    idx = rho.layout.indices(sub.labels)
    reduced = _ptrace_matrix(rho.matrix, rho.layout.dims, idx)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityMatrix(reduced, sub, _trusted=True)


def reduced_density(state: StateVector, keep: Iterable[str]) -> DensityMatrix:
    """Reduced density matrix of a pure state over the kept labels."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep set must be nonempty")
    sub = state.layout.restrict(keep)
    idx = state.layout.indices(sub.labels)
    reduced = _ptrace_pure(state.amplitudes, state.layout.dims, idx)
    reduced = 0.5 * (reduced + reduced.conj().T)
    return DensityMatrix(reduced, sub, _trusted=True)


# ---------------------------------------------------------------------------
# spectral decomposition and time evolution
# ---------------------------------------------------------------------------

def herm_eig(h: np.ndarray) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues ascending.

    The input may carry numerical asymmetry up to the ``hermitian_input``
    tolerance; it is symmetrized before decomposing.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    asym = float(np.max(np.abs(h - h.conj().T)))
    if asym > TOLERANCES["hermitian_input"]:
        raise ValueError(f"matrix not Hermitian: max |H - H^dag| = {asym:g}")
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    return HermitianEig(w, v)


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """Unitary exp(-i H t) via the spectral decomposition of H (hbar = 1)."""
    if not math.isfinite(t):
        raise ValueError(f"time must be finite, got {t!r}")
    eig = herm_eig(h)
    v = eig.eigenvectors
    return (v * np.exp(-1j * eig.eigenvalues * t)) @ v.conj().T


# ---------------------------------------------------------------------------
# entropies and distances
# ---------------------------------------------------------------------------

def entropy_of_eigenvalues(eigenvalues: np.ndarray) -> float:
    """Shannon entropy in bits of a spectrum, with clamping and 0 log 0 = 0."""
    lam = np.clip(np.asarray(eigenvalues, dtype=float), 0.0, 1.0)
    lam = lam[lam > 0.0]
    if lam.size == 0:
        return 0.0
    return float(-np.sum(lam * np.log2(lam)))


def _entropy_matrix(mat: np.ndarray) -> float:
    return entropy_of_eigenvalues(np.linalg.eigvalsh(mat))


def entropy(rho: DensityMatrix) -> float:
    """Von Neumann entropy in bits."""
    return _entropy_matrix(rho.matrix)


def fidelity_pure(psi: StateVector, phi: StateVector) -> float:
    """|<psi|phi>|^2, invariant under global phases."""
    if psi.dim != phi.dim:
        raise ValueError(f"dimension mismatch: {psi.dim} vs {phi.dim}")
    return float(np.abs(np.vdot(psi.amplitudes, phi.amplitudes)) ** 2)


def trace_distance(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Half the trace norm of rho - sigma."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    diff = rho.matrix - sigma.matrix
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(diff))))


def uhlmann_fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, clipped into [0, 1]."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    w, v = np.linalg.eigh(rho.matrix)
    sqrt_rho = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sqrt_rho @ sigma.matrix @ sqrt_rho
    lam = np.clip(np.linalg.eigvalsh(inner), 0.0, None)
    # spectral noise below the rank floor would be amplified by the sqrt
    lam[lam < TOLERANCES["rank_floor"]] = 0.0
    val = float(np.sum(np.sqrt(lam)) ** 2)
    return min(max(val, 0.0), 1.0)
