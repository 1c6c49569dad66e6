"""Spin-star dephasing model with a tunable non-commuting system drive.

A single qubit S couples to n environment qubits through
``gamma * sigma_z^S x sigma_x^Ei`` while driven by
``omega * (p sigma_x + (1-p) sigma_z)`` on S alone.  The weight p
interpolates between a fully commuting system/interaction pair (p = 0)
and a maximally non-commuting one (p = 1); the commutator norm is exactly
linear in p.  Environment free evolution is absorbed into the interaction
picture and does not appear.

Units: hbar = 1, so omega and gamma carry inverse time.  Time grids are
most naturally expressed through the dimensionless product gamma * t.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .qcore import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Z,
    StateVector,
    SubsystemLayout,
    herm_eig,
)

__all__ = [
    "ModelParams",
    "InitialScenario",
    "Trajectory",
    "build_hamiltonian",
    "system_hamiltonian",
    "interaction_hamiltonian",
    "commutator_norm",
    "initial_state",
    "evolve_trajectory",
    "default_time_grid",
]

DEFAULT_GAMMA_T_MAX = 2.0 * np.pi
DEFAULT_TIME_POINTS = 400


@dataclass(frozen=True)
class ModelParams:
    """Full parametrization of the dynamics: (omega, gamma, p, n)."""

    omega: float
    gamma: float
    p: float
    n: int

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError(f"omega must be positive, got {self.omega}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")
        if self.n < 1:
            raise ValueError(f"need at least one environment qubit, got n={self.n}")

    @property
    def ratio(self) -> float:
        """Drive-to-coupling ratio omega / gamma."""
        return self.omega / self.gamma


@dataclass(frozen=True)
class InitialScenario:
    """System-qubit preparation; the environment always starts in |0...0>.

    Three families are supported:

    * ``amplitude(x0)``: sqrt(x0)|0> + i sqrt(1-x0)|1>
    * ``phase(phi)``:    (|0> + phi |1>)/sqrt(2) with |phi| = 1
    * ``circle_left()``: the sigma_y eigenstate (|0> + i|1>)/sqrt(2),
      which equals both amplitude(0.5) and phase(i)
    """

    kind: str
    x0: float | None = None
    phase_factor: complex | None = None

    _KINDS = ("amplitude", "phase", "circle_left")

    def __post_init__(self):
        if self.kind not in self._KINDS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.kind == "amplitude":
            if self.x0 is None or not 0.0 <= self.x0 <= 1.0:
                raise ValueError(f"amplitude scenario needs x0 in [0, 1], got {self.x0}")
        elif self.kind == "phase":
            if self.phase_factor is None:
                raise ValueError("phase scenario needs a unit-modulus factor")
            if abs(abs(complex(self.phase_factor)) - 1.0) > 1e-12:
                raise ValueError(
                    f"phase factor must have unit modulus, got |phi| = {abs(self.phase_factor)}"
                )
            object.__setattr__(self, "phase_factor", complex(self.phase_factor))

    @classmethod
    def amplitude(cls, x0: float) -> "InitialScenario":
        return cls(kind="amplitude", x0=float(x0))

    @classmethod
    def phase(cls, phi: complex) -> "InitialScenario":
        return cls(kind="phase", phase_factor=complex(phi))

    @classmethod
    def circle_left(cls) -> "InitialScenario":
        return cls(kind="circle_left")

    def system_qubit(self) -> np.ndarray:
        if self.kind == "amplitude":
            return np.array(
                [np.sqrt(self.x0), 1j * np.sqrt(1.0 - self.x0)], dtype=complex
            )
        if self.kind == "phase":
            return np.array([1.0, self.phase_factor], dtype=complex) / np.sqrt(2.0)
        return np.array([1.0, 1.0j], dtype=complex) / np.sqrt(2.0)

    def describe(self) -> str:
        if self.kind == "amplitude":
            return f"amplitude(x0={self.x0:g})"
        if self.kind == "phase":
            angle = cmath.phase(self.phase_factor)
            return f"phase(angle={angle:g})"
        return "circle_left"


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Pure joint states |Psi(t_k)> on a strictly increasing time grid."""

    times: np.ndarray
    states: tuple[StateVector, ...]
    params: ModelParams
    scenario: InitialScenario

    def __post_init__(self):
        t = np.array(self.times, dtype=float, copy=True)
        t.setflags(write=False)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "states", tuple(self.states))
        if t.ndim != 1 or t.size == 0:
            raise ValueError("times must be a nonempty 1-d grid")
        if t.size != len(self.states):
            raise ValueError("one state per time point required")
        if t.size > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size

    @property
    def layout(self) -> SubsystemLayout:
        return self.states[0].layout


def _kron_chain(ops) -> np.ndarray:
    return reduce(np.kron, ops)


def system_hamiltonian(params: ModelParams) -> np.ndarray:
    """The driven-qubit term omega (p sigma_x + (1-p) sigma_z), on S alone."""
    return params.omega * (params.p * PAULI_X + (1.0 - params.p) * PAULI_Z)


def interaction_hamiltonian(params: ModelParams) -> np.ndarray:
    """Sum of gamma sigma_z^S x sigma_x^Ei over the full Hilbert space."""
    n = params.n
    h = np.zeros((2 ** (n + 1), 2 ** (n + 1)), dtype=complex)
    for i in range(n):
        ops = [PAULI_Z] + [IDENTITY_2] * n
        ops[1 + i] = PAULI_X
        h += params.gamma * _kron_chain(ops)
    return h


def build_hamiltonian(params: ModelParams) -> np.ndarray:
    """Total Hamiltonian over (S, E1..En); Hermitian by construction."""
    h_s = _kron_chain([system_hamiltonian(params)] + [IDENTITY_2] * params.n)
    return h_s + interaction_hamiltonian(params)


def commutator_norm(params: ModelParams) -> float:
    """Frobenius norm of [H_S x I, H_I]; exactly linear in p."""
    h_s = _kron_chain([system_hamiltonian(params)] + [IDENTITY_2] * params.n)
    h_i = interaction_hamiltonian(params)
    comm = h_s @ h_i - h_i @ h_s
    return float(np.linalg.norm(comm))


def initial_state(scenario: InitialScenario, n: int) -> StateVector:
    """(system qubit per scenario) x |0>^n.

    ``n = 0`` yields the bare system qubit, which is occasionally useful
    for inspecting the scenario preparation itself.
    """
    if n < 0:
        raise ValueError("environment size cannot be negative")
    qubit = scenario.system_qubit()
    if n == 0:
        return StateVector(qubit, SubsystemLayout.single_qubit("S"))
    env = np.zeros(2 ** n, dtype=complex)
    env[0] = 1.0
    return StateVector(np.kron(qubit, env), SubsystemLayout.system_env(n))


def default_time_grid(
    params: ModelParams,
    gamma_t_max: float = DEFAULT_GAMMA_T_MAX,
    points: int = DEFAULT_TIME_POINTS,
) -> np.ndarray:
    """Uniform grid with gamma * t running from 0 to ``gamma_t_max``."""
    if points < 1:
        raise ValueError("time grid needs at least one point")
    return np.linspace(0.0, gamma_t_max / params.gamma, points)


def evolve_trajectory(
    params: ModelParams, scenario: InitialScenario, times: np.ndarray
) -> Trajectory:
    """Evolve the initial state through exp(-i H t) on the given grid.

    H is time independent, so a single eigendecomposition serves every
    time point.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d grid")
    psi0 = initial_state(scenario, params.n)
    eig = herm_eig(build_hamiltonian(params))
    v = eig.eigenvectors
    coeffs = v.conj().T @ psi0.amplitudes
    # phases[k, j] = exp(-i w_j t_k); one matmul recovers all states
    phases = np.exp(-1j * np.outer(times, eig.eigenvalues))
    amps = (phases * coeffs) @ v.T
    states = tuple(
        StateVector(amps[k] / np.linalg.norm(amps[k]), psi0.layout)
        for k in range(times.size)
    )
    return Trajectory(times=times, states=states, params=params, scenario=scenario)
