"""Spectrum-broadcast-structure analysis and pointer-state extraction.

A joint state is objective in the broadcast sense when it is close to
sum_i p_i |psi_i><psi_i| (x)_j R_i^j with orthogonal system states and
mutually distinguishable fraction states R_i^j.  The system basis of that
form is the pointer basis selected by the dynamics: the basis a system
measurement must use to maximize the information any environment fraction
holds.

Extraction note: for a globally pure joint state, chi(S : whole
environment) is the same for every system basis (all conditional
environment states are pure), so maximizing over the full environment
cannot single out a basis.  The extraction therefore maximizes chi over
the largest proper fraction, all environment qubits but the last; the
traced-out qubit supplies the mixedness that makes the argmax meaningful,
and in redundant regimes the answer is insensitive to the fraction choice.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Optional, Sequence

import numpy as np

from .qcore import (
    TOLERANCES,
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    entropy,
    fidelity_pure,
    partial_trace,
    reduced_density,
    trace_distance,
    uhlmann_fidelity,
)
from .infotheory import chi_fraction
from .redundancy import contiguous_blocks

__all__ = [
    "SBSReport",
    "PointerBasisUndefinedError",
    "extract_pointer_basis",
    "pointer_basis_with_meta",
    "sbs_decompose",
    "pointer_fidelity",
]


class PointerBasisUndefinedError(RuntimeError):
    """System entropy too low for any pointer basis to be meaningful."""


@dataclass(frozen=True, eq=False)
class SBSReport:
    """Broadcast-structure diagnostics for one joint state and basis.

    ``conditional_env[i][j]`` is the state of fraction j conditioned on
    pointer branch i; ``distinguishability[j]`` is the Uhlmann fidelity
    between the two branches on fraction j (0 for a perfect broadcast
    record, 1 for none).  ``reconstruction_error`` is the trace distance
    between the input and the assembled broadcast state.
    """

    pointer_basis: tuple[StateVector, StateVector]
    branch_probs: tuple[float, float]
    conditional_env: tuple[tuple[Optional[DensityMatrix], ...], ...]
    distinguishability: np.ndarray
    decoherence_residual: float
    reconstruction_error: float
    fraction_labels: tuple[tuple[str, ...], ...]
    rank_deficient: bool

    def __post_init__(self):
        d = np.array(self.distinguishability, dtype=float, copy=True)
        d.setflags(write=False)
        object.__setattr__(self, "distinguishability", d)


def _system_label(joint) -> str:
    return joint.layout.labels[0]


def _system_state(joint) -> DensityMatrix:
    if isinstance(joint, StateVector):
        return reduced_density(joint, [_system_label(joint)])
    return partial_trace(joint, [_system_label(joint)])


def _phase_normalized(vec: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the leading component is real positive."""
    lead = vec[0] if abs(vec[0]) > 1e-12 else vec[1]
    return vec * np.conj(lead) / abs(lead)


def default_pointer_fraction(layout: SubsystemLayout) -> tuple[str, ...]:
    """All environment qubits except the last; the whole environment if n = 1."""
    env = layout.environment_labels()
    if len(env) == 1:
        return env
    return env[:-1]


def pointer_basis_with_meta(joint, fraction_labels: Optional[Sequence[str]] = None):
    """Pointer basis plus the argmax measurement and chi value behind it.

    Returns (phi0, phi1, basis, chi_value).  ``phi0`` is the basis state
    with fidelity >= 1/2 to |0>; exact ties keep the +1 projector state.
    """
    rho_s = _system_state(joint)
    s_sys = entropy(rho_s)
    if s_sys < TOLERANCES["entropy_floor"]:
        raise PointerBasisUndefinedError(
            f"system entropy {s_sys:.2e} bits is below the "
            f"{TOLERANCES['entropy_floor']:.0e} floor; no pointer basis is selected"
        )
    if fraction_labels is None:
        fraction_labels = default_pointer_fraction(joint.layout)
    value, basis = chi_fraction(joint, fraction_labels)
    plus, minus = basis.state_vectors()
    if abs(plus[0]) ** 2 >= 0.5:
        first, second = plus, minus
    else:
        first, second = minus, plus
    layout = SubsystemLayout.single_qubit(_system_label(joint))
    phi0 = StateVector(_phase_normalized(first), layout)
    phi1 = StateVector(_phase_normalized(second), layout)
    return phi0, phi1, basis, value


def extract_pointer_basis(
    joint, fraction_labels: Optional[Sequence[str]] = None
) -> tuple[StateVector, StateVector]:
    """The orthonormal system basis whose records proliferate best.

    Maximizes chi(S : fraction) over system measurements and returns the
    projector eigenstates, labeled so fidelity(|phi0>, |0>) >= 1/2.
    """
    phi0, phi1, _, _ = pointer_basis_with_meta(joint, fraction_labels)
    return phi0, phi1


def _branch_environment_vector(joint: StateVector, branch: np.ndarray) -> np.ndarray:
    amp = joint.amplitudes.reshape(2, -1)
    return branch.conj() @ amp  # (d_env,)


def sbs_decompose(joint, basis, fraction_size: int) -> SBSReport:
    """Cast a joint state into broadcast form over contiguous fractions.

    ``basis`` is the pair of orthonormal system states defining the
    branches.  Branch probabilities come from the reduced system state;
    fraction states are the branch-conditioned reduced environment states.
    The assembled sum_i p_i |psi_i><psi_i| (x)_j R_i^j is compared with the
    input through the trace distance.
    """
    phi0, phi1 = basis
    overlap = abs(np.vdot(phi0.amplitudes, phi1.amplitudes))
    if overlap > 1e-8:
        raise ValueError(f"pointer basis not orthogonal: |<phi0|phi1>| = {overlap:g}")
    layout = joint.layout
    env = list(layout.environment_labels())
    if not 1 <= fraction_size <= len(env):
        raise ValueError(f"fraction_size must lie in [1, {len(env)}]")
    blocks = tuple(contiguous_blocks(env, fraction_size))
    env_layout = layout.restrict(env)

    rho_s = _system_state(joint)
    probs = []
    residual = abs(
        np.vdot(phi0.amplitudes, rho_s.matrix @ phi1.amplitudes)
    )

    conditional: list[tuple[Optional[DensityMatrix], ...]] = []
    rank_deficient = False
    for vec in (phi0.amplitudes, phi1.amplitudes):
        if isinstance(joint, StateVector):
            branch_env = _branch_environment_vector(joint, vec)
            p = float(np.real(np.vdot(branch_env, branch_env)))
        else:
            proj = np.kron(np.outer(vec, vec.conj()), np.eye(layout.dim // 2))
            sandwich = proj @ joint.matrix @ proj
            p = float(np.real(np.trace(sandwich)))
        probs.append(p)
        if p <= TOLERANCES["prob_floor"]:
            rank_deficient = True
            conditional.append(tuple(None for _ in blocks))
            continue
        if isinstance(joint, StateVector):
            env_state = StateVector.from_unnormalized(branch_env, env_layout)
            conditional.append(tuple(reduced_density(env_state, b) for b in blocks))
        else:
            cond_full = DensityMatrix(
                0.5 * (sandwich + sandwich.conj().T) / p, layout, _trusted=True
            )
            conditional.append(tuple(partial_trace(cond_full, b) for b in blocks))

    distinguishability = np.array(
        [
            uhlmann_fidelity(conditional[0][j], conditional[1][j])
            if conditional[0][j] is not None and conditional[1][j] is not None
            else np.nan
            for j in range(len(blocks))
        ]
    )

    assembled = np.zeros((layout.dim, layout.dim), dtype=complex)
    for i, vec in enumerate((phi0.amplitudes, phi1.amplitudes)):
        if probs[i] <= TOLERANCES["prob_floor"]:
            continue
        branch_env_ops = [conditional[i][j].matrix for j in range(len(blocks))]
        env_op = reduce(np.kron, branch_env_ops)
        assembled += probs[i] * np.kron(np.outer(vec, vec.conj()), env_op)

    rho_in = joint.density_matrix() if isinstance(joint, StateVector) else joint
    total = sum(probs)
    sigma = DensityMatrix(
        0.5 * (assembled + assembled.conj().T) / total, layout, _trusted=True
    )
    error = trace_distance(rho_in, sigma)

    return SBSReport(
        pointer_basis=(phi0, phi1),
        branch_probs=(probs[0], probs[1]),
        conditional_env=tuple(conditional),
        distinguishability=distinguishability,
        decoherence_residual=float(residual),
        reconstruction_error=float(error),
        fraction_labels=blocks,
        rank_deficient=rank_deficient,
    )


def pointer_fidelity(joint, fraction_labels: Optional[Sequence[str]] = None) -> float:
    """Fidelity between the pointer state nearest |0> and |0> itself.

    Equals 1 in the commuting limit (the computational basis is selected)
    and stays in [1/2, 1] by the labeling convention.
    """
    phi0, _ = extract_pointer_basis(joint, fraction_labels)
    basis0 = StateVector([1.0, 0.0], phi0.layout)
    return fidelity_pure(phi0, basis0)
