"""Independent closed-form and brute-force oracles.

These deliberately avoid the production code paths: the commuting-limit
formulas come from the analytic branch structure of the dephasing
interaction, and the measurement-basis grid search evaluates conditional
entropies through Bloch decomposition and closed-form 2x2 eigenvalues
instead of the package's low-rank Gram machinery.  The self-test command
and the test suite compare the production results against these.
"""

from __future__ import annotations

import numpy as np

from .qcore import PAULI_X, PAULI_Y, PAULI_Z

__all__ = [
    "binary_entropy",
    "dephasing_branch_qubit",
    "dephasing_off_diagonal",
    "dephasing_chi_z",
    "grid_search_chi",
    "random_density_matrix",
    "random_pure_amplitudes",
]


def binary_entropy(x: float) -> float:
    out = 0.0
    for q in (x, 1.0 - x):
        if q > 0.0:
            out -= q * np.log2(q)
    return out


# ---------------------------------------------------------------------------
# commuting-limit (p = 0) closed forms, system prepared in (|0> + i|1>)/sqrt(2)
# ---------------------------------------------------------------------------

def dephasing_branch_qubit(gamma: float, t: float, branch: int) -> np.ndarray:
    """Environment qubit state conditioned on the system branch.

    Branch 0 evolves under +gamma sigma_x, branch 1 under -gamma sigma_x,
    starting from |0>; their overlap is cos(2 gamma t).
    """
    sign = -1.0 if branch == 0 else 1.0
    return np.array([np.cos(gamma * t), sign * 1j * np.sin(gamma * t)])


def dephasing_off_diagonal(gamma: float, t: float, n: int) -> float:
    """|<0| rho_S(t) |1>| for the equal-weight initial superposition."""
    return 0.5 * abs(np.cos(2.0 * gamma * t)) ** n


def dephasing_chi_z(gamma: float, t: float) -> float:
    """chi(S:E1) measured in the z basis: the branch records are pure with
    overlap cos(2 gamma t), so the value is the mixture entropy."""
    c = abs(np.cos(2.0 * gamma * t))
    return binary_entropy(0.5 * (1.0 + c))


# ---------------------------------------------------------------------------
# dense grid search for chi on two-qubit states
# ---------------------------------------------------------------------------

def _chi_landscape(rho4: np.ndarray, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
    """chi on the outer product of angle grids, shape (len(thetas), len(phis)).

    Conditioned states are formed from the Bloch decomposition
    M_+- = (rho_F +- n . T)/2 and their entropies from closed-form 2x2
    eigenvalues; independent of the package evaluation path.
    """
    r = rho4.reshape(2, 2, 2, 2)
    rho_f = np.einsum("sfsg->fg", r)
    t_ops = np.stack(
        [np.einsum("su,ufsg->fg", sigma, r) for sigma in (PAULI_X, PAULI_Y, PAULI_Z)]
    )

    tt, pp = np.meshgrid(thetas, phis, indexing="ij")
    dirs = np.stack(
        [np.sin(tt) * np.cos(pp), np.sin(tt) * np.sin(pp), np.cos(tt)], axis=-1
    )
    n_dot_t = np.einsum("ijk,kfg->ijfg", dirs, t_ops)

    def eig2(m):
        a = np.real(m[..., 0, 0])
        d = np.real(m[..., 1, 1])
        b = m[..., 0, 1]
        half = 0.5 * (a + d)
        disc = np.sqrt(0.25 * (a - d) ** 2 + np.abs(b) ** 2)
        return np.clip(half + disc, 0.0, None), np.clip(half - disc, 0.0, None)

    def xlog2(x):
        return np.where(x > 0, x * np.log2(np.where(x > 0, x, 1.0)), 0.0)

    lf1, lf2 = eig2(rho_f)
    s_f = float(-(xlog2(lf1) + xlog2(lf2)))

    avg_cond = np.zeros_like(tt)
    for sign in (1.0, -1.0):
        m = 0.5 * (rho_f + sign * n_dot_t)
        l1, l2 = eig2(m)
        p = l1 + l2
        avg_cond += -xlog2(l1) - xlog2(l2) + xlog2(p)
    return s_f - avg_cond


def grid_search_chi(
    rho4: np.ndarray,
    n_theta: int = 200,
    n_phi: int = 400,
    refine_rounds: int = 8,
) -> tuple[float, float, float]:
    """Maximize chi over a dense (theta, phi) grid, then zoom locally.

    Each refinement round re-grids a shrinking neighborhood of the best
    point, so the final angles are resolved far below the requested grid
    spacing.  Returns (chi, theta, phi).
    """
    thetas = np.linspace(0.0, np.pi, n_theta)
    phis = np.linspace(0.0, 2.0 * np.pi, n_phi, endpoint=False)
    values = _chi_landscape(rho4, thetas, phis)
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    best = (float(values[i, j]), float(thetas[i]), float(phis[j]))

    span_t = thetas[1] - thetas[0]
    span_p = phis[1] - phis[0]
    for _ in range(refine_rounds):
        _, t0, p0 = best
        local_t = np.linspace(t0 - span_t, t0 + span_t, 9)
        local_p = np.linspace(p0 - span_p, p0 + span_p, 9)
        values = _chi_landscape(rho4, local_t, local_p)
        i, j = np.unravel_index(int(np.argmax(values)), values.shape)
        if float(values[i, j]) > best[0]:
            best = (float(values[i, j]), float(local_t[i]), float(local_p[j]))
        span_t /= 4.0
        span_p /= 4.0
    return best


# ---------------------------------------------------------------------------
# random-state helpers for probe suites
# ---------------------------------------------------------------------------

def random_density_matrix(rng: np.random.Generator, dim: int) -> np.ndarray:
    """Full-rank random density matrix (Ginibre construction)."""
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.real(np.trace(rho))


def random_pure_amplitudes(rng: np.random.Generator, dim: int) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)
