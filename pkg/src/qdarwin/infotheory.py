"""Information quantifiers between the system qubit and environment fractions.

The central quantity is the Holevo bound chi(S:F): the entropy of the
average conditioned fraction state minus the average conditional entropy,
maximized over projective measurements on the system qubit.  Because the
outcome-averaged fraction state always equals rho_F regardless of the
measurement, the maximization reduces to minimizing the average
conditional entropy over the Bloch sphere.

The optimizer is deterministic: a fixed 24 x 48 (theta, phi) grid seeds a
Nelder-Mead simplex built from the best three grid points, which runs
until its diameter drops below 1e-7 rad or 500 evaluations elapse.

Also provided: the two-sided accessible mutual information for single
qubit fractions (classical MI of the joint outcome distribution,
maximized over measurements on both sides) and the quantum mutual
information as the diagnostic upper bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .qcore import (
    IDENTITY_2,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    TOLERANCES,
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    entropy,
    entropy_of_eigenvalues,
    partial_trace,
)

__all__ = [
    "MeasurementBasis",
    "HolevoResult",
    "condition_on_system",
    "holevo_chi",
    "chi_fraction",
    "accessible_mi_two_sided",
    "quantum_mi",
]

_PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])

# Optimizer configuration (fixed; results must not depend on call order).
COARSE_THETA_POINTS = 24
COARSE_PHI_POINTS = 48
SIMPLEX_DIAMETER_TOL = 1e-7
MAX_REFINE_EVALS = 500


@dataclass(frozen=True)
class MeasurementBasis:
    """Projective qubit measurement along the Bloch direction (theta, phi)."""

    theta: float
    phi: float

    def __post_init__(self):
        if not 0.0 <= self.theta <= np.pi:
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")
        if not 0.0 <= self.phi < 2.0 * np.pi:
            raise ValueError(f"phi must lie in [0, 2 pi), got {self.phi}")

    @classmethod
    def from_angles(cls, theta: float, phi: float) -> "MeasurementBasis":
        """Canonicalize arbitrary angles onto theta in [0, pi], phi in [0, 2 pi)."""
        n = _bloch_vector(theta, phi)
        th = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
        if np.sin(th) < 1e-12:
            ph = 0.0
        else:
            ph = float(np.arctan2(n[1], n[0]) % (2.0 * np.pi))
            if ph >= 2.0 * np.pi:  # guard the exact-wrap corner
                ph = 0.0
        return cls(th, ph)

    @property
    def bloch_vector(self) -> np.ndarray:
        return _bloch_vector(self.theta, self.phi)

    def state_vectors(self) -> tuple[np.ndarray, np.ndarray]:
        """Eigenstates of n.sigma for outcomes +1 and -1."""
        plus, minus = _basis_amplitudes(np.array([self.theta]), np.array([self.phi]))
        return plus[0], minus[0]

    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        plus, minus = self.state_vectors()
        return np.outer(plus, plus.conj()), np.outer(minus, minus.conj())


@dataclass(frozen=True, eq=False)
class HolevoResult:
    """Maximized Holevo quantity with the argmax measurement and conditionals."""

    value: float
    argmax_basis: MeasurementBasis
    outcome_probs: tuple[float, float]
    conditional_states: tuple[Optional[DensityMatrix], Optional[DensityMatrix]]


def _bloch_vector(theta, phi) -> np.ndarray:
    st = np.sin(theta)
    return np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def _basis_amplitudes(thetas: np.ndarray, phis: np.ndarray):
    """Batched +/- eigenstate amplitudes, shape (B, 2)."""
    c = np.cos(thetas / 2.0)
    s = np.sin(thetas / 2.0)
    e = np.exp(1j * phis)
    plus = np.stack([c.astype(complex), e * s], axis=-1)
    minus = np.stack([s.astype(complex), -e * c], axis=-1)
    return plus, minus


def _check_system_first(layout: SubsystemLayout):
    if layout.dims[0] != 2:
        raise ValueError("the first factor must be the system qubit (dimension 2)")
    if layout.n_factors < 2:
        raise ValueError("need at least one fraction factor beyond the system")


# ---------------------------------------------------------------------------
# conditioning on a system measurement (reference path)
# ---------------------------------------------------------------------------

def condition_on_system(rho_sf: DensityMatrix, basis: MeasurementBasis):
    """Outcome probabilities and conditioned fraction states.

    Implements the projector sandwich literally:
    p_a = tr[(Pi_a x I) rho] and rho_{F|a} = Tr_S[(Pi_a x I) rho (Pi_a x I)] / p_a.
    Outcomes with p_a at or below the probability floor are degenerate and
    reported with a ``None`` conditional state.
    """
    _check_system_first(rho_sf.layout)
    d_f = rho_sf.layout.dim // 2
    fraction_labels = rho_sf.layout.labels[1:]
    eye_f = np.eye(d_f, dtype=complex)
    probs = []
    conditionals = []
    for proj in basis.projectors():
        big = np.kron(proj, eye_f)
        sandwich = big @ rho_sf.matrix @ big
        p = float(np.real(np.trace(sandwich)))
        probs.append(p)
        if p <= TOLERANCES["prob_floor"]:
            conditionals.append(None)
            continue
        normalized = DensityMatrix(
            0.5 * (sandwich + sandwich.conj().T) / p, rho_sf.layout, _trusted=True
        )
        conditionals.append(partial_trace(normalized, fraction_labels))
    return tuple(probs), tuple(conditionals)


# ---------------------------------------------------------------------------
# fast chi evaluator
# ---------------------------------------------------------------------------

class _ChiProblem:
    """chi(theta, phi) evaluation machinery for one fixed joint state.

    Works from any factorization rho_SF = B B^dag with B of shape
    (2 * d_F, R): conditioning on a rank-1 system projector turns B into a
    d_F x R block whose R x R Gram matrix carries the nonzero spectrum of
    the unnormalized conditional state.  Keeping R small (the rank of
    rho_SF) makes grid sweeps over large fractions cheap.
    """

    def __init__(self, bw: np.ndarray, d_f: int):
        self.d_f = d_f
        self.bw = bw  # (2, d_f, R) weighted vectors
        self.rho_f = np.einsum("sfm,sgm->fg", bw, bw.conj())
        self.s_f = entropy_of_eigenvalues(np.linalg.eigvalsh(self.rho_f))
        self._coarse = None

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_density_matrix(cls, mat: np.ndarray, d_f: int) -> "_ChiProblem":
        w, v = np.linalg.eigh(mat)
        keep = w > TOLERANCES["rank_floor"]
        if not np.any(keep):
            keep = w > 0.5 * float(np.max(w))
        bw = (v[:, keep] * np.sqrt(w[keep])).reshape(2, d_f, -1)
        return cls(bw, d_f)

    @classmethod
    def from_joint(cls, joint, fraction_labels: Sequence[str]) -> "_ChiProblem":
        """Build the evaluator for chi(S : fraction) from a joint state.

        ``joint`` is a StateVector or DensityMatrix over (S, E1..En); the
        fraction is any nonempty subset of the environment factors.
        """
        fraction_labels = list(fraction_labels)
        layout = joint.layout
        _check_system_first(layout)
        if not fraction_labels:
            raise ValueError("fraction must contain at least one factor")
        fraction_idx = layout.indices(fraction_labels)
        if 0 in fraction_idx:
            raise ValueError("the fraction cannot contain the system factor")
        d_f = int(np.prod([layout.dims[i] for i in fraction_idx]))
        if isinstance(joint, StateVector):
            rest_idx = [
                i for i in range(layout.n_factors) if i != 0 and i not in fraction_idx
            ]
            d_rest = int(np.prod([layout.dims[i] for i in rest_idx])) if rest_idx else 1
            tensor_axes = [0] + sorted(fraction_idx) + rest_idx
            arr = (
                joint.amplitudes.reshape(layout.dims)
                .transpose(tensor_axes)
                .reshape(2 * d_f, d_rest)
            )
            u, s, _ = np.linalg.svd(arr, full_matrices=False)
            keep = (s * s) > TOLERANCES["rank_floor"]
            if not np.any(keep):
                keep = s >= float(np.max(s))
            bw = (u[:, keep] * s[keep]).reshape(2, d_f, -1)
            return cls(bw, d_f)
        if isinstance(joint, DensityMatrix):
            keep_labels = [layout.labels[0]] + [
                s for s in layout.labels[1:] if s in set(fraction_labels)
            ]
            if len(keep_labels) == layout.n_factors:
                mat = joint.matrix
            else:
                mat = partial_trace(joint, keep_labels).matrix
            return cls.from_density_matrix(mat, d_f)
        raise TypeError(f"unsupported joint state type {type(joint).__name__}")

    # -- evaluation ---------------------------------------------------------

    def chi_batch(self, thetas: np.ndarray, phis: np.ndarray) -> np.ndarray:
        """chi at each (theta, phi) pair; vectorized over the batch."""
        plus, minus = _basis_amplitudes(thetas, phis)
        a = np.stack([plus, minus], axis=1)  # (B, outcome, component)
        proj = np.einsum("bos,sfm->bofm", a.conj(), self.bw)
        gram = np.einsum("bofm,bofk->bomk", proj.conj(), proj)
        lam = np.clip(np.linalg.eigvalsh(gram), 0.0, None)  # (B, 2, R)
        p = np.sum(lam, axis=-1)  # (B, 2)
        xlogx = np.where(lam > 0.0, lam * np.log2(np.where(lam > 0.0, lam, 1.0)), 0.0)
        plogp = p * np.log2(np.where(p > 0.0, p, 1.0))
        kept = p > TOLERANCES["prob_floor"]  # degenerate outcomes weigh zero
        avg_cond = np.sum(np.where(kept, -np.sum(xlogx, axis=-1) + plogp, 0.0), axis=-1)
        return self.s_f - avg_cond

    def chi_single(self, theta: float, phi: float) -> float:
        """Scalar chi without batch machinery; hot path for the simplex."""
        c = np.cos(theta / 2.0)
        s = np.sin(theta / 2.0)
        e = np.exp(1j * phi)
        avg_cond = 0.0
        for a0, a1 in ((c, e * s), (s, -e * c)):
            u = np.conj(a0) * self.bw[0] + np.conj(a1) * self.bw[1]  # (d_f, R)
            gram = u.conj().T @ u
            lam = np.clip(np.linalg.eigvalsh(gram), 0.0, None)
            p = float(np.sum(lam))
            if p <= TOLERANCES["prob_floor"]:
                continue
            pos = lam[lam > 0.0]
            avg_cond += float(-np.sum(pos * np.log2(pos)) + p * np.log2(p))
        return self.s_f - avg_cond

    def coarse_grid(self):
        """Fixed coarse sweep; returns (values, thetas, phis) flattened."""
        if self._coarse is None:
            th = np.linspace(0.0, np.pi, COARSE_THETA_POINTS)
            ph = np.linspace(0.0, 2.0 * np.pi, COARSE_PHI_POINTS, endpoint=False)
            tt, pp = np.meshgrid(th, ph, indexing="ij")
            tt, pp = tt.ravel(), pp.ravel()
            self._coarse = (self.chi_batch(tt, pp), tt, pp)
        return self._coarse

    def coarse_max(self) -> float:
        return float(np.max(self.coarse_grid()[0]))

    def chi_upper_bound(self) -> float:
        """Cheap certified upper bound: chi <= min(S(F), S(S) + S(F) - S(SF)).

        Both entropies come from small matrices (the reduced system state
        and the R x R Gram of the factorization), so this costs far less
        than an optimization and lets callers prune hopeless candidates.
        """
        rho_s = np.einsum("sfm,tfm->st", self.bw, self.bw.conj())
        s_s = entropy_of_eigenvalues(np.linalg.eigvalsh(rho_s))
        flat = self.bw.reshape(2 * self.d_f, -1)
        s_sf = entropy_of_eigenvalues(np.linalg.eigvalsh(flat.conj().T @ flat))
        return min(self.s_f, s_s + self.s_f - s_sf)

    def probe_max(self) -> float:
        """chi at the three Pauli bases; a certified lower bound on chi.

        Used to decide threshold passes without sweeping the full grid:
        any evaluated basis already bounds the maximized chi from below.
        """
        half = 0.5 * np.pi
        return float(
            np.max(
                self.chi_batch(
                    np.array([0.0, half, half]), np.array([0.0, 0.0, half])
                )
            )
        )

    def solve(self) -> tuple[float, float, float]:
        """Maximize chi; returns (value, theta, phi) before canonicalization."""
        values, tt, pp = self.coarse_grid()
        # best three seeds; ties resolved toward the lowest (theta, phi)
        order = np.lexsort((pp, tt, -values))
        seeds = [(tt[i], pp[i]) for i in order[:3]]
        simplex = _nondegenerate_simplex(
            seeds,
            (np.pi / (COARSE_THETA_POINTS - 1) / 2.0, 2.0 * np.pi / COARSE_PHI_POINTS / 2.0),
        )
        best_x, best_f = _nelder_mead(
            lambda x: -self.chi_single(x[0], x[1]),
            simplex,
            diameter_tol=SIMPLEX_DIAMETER_TOL,
            max_evals=MAX_REFINE_EVALS,
        )
        grid_best = float(values[order[0]])
        if -best_f >= grid_best:
            return -best_f, float(best_x[0]), float(best_x[1])
        return grid_best, float(tt[order[0]]), float(pp[order[0]])


def _nondegenerate_simplex(points, steps):
    """Ensure the seed triangle has nonzero area; nudge deterministically."""
    pts = [np.array(p, dtype=float) for p in points]
    while len(pts) < 3:
        pts.append(pts[0] + np.array(steps))
    a, b, c = pts[:3]
    area = abs((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    if area < 1e-12:
        c = a + np.array([steps[0], 0.0])
        b = a + np.array([0.0, steps[1]])
        area = steps[0] * steps[1]
    return [a, b, c]


def _nelder_mead(f, simplex, diameter_tol: float, max_evals: int):
    """Deterministic Nelder-Mead minimization on a fixed starting simplex.

    Standard coefficients (reflect 1, expand 2, contract 0.5, shrink 0.5);
    stops when the simplex diameter falls below ``diameter_tol`` or the
    evaluation budget is exhausted.  Returns the best vertex and value.
    """
    xs = [np.array(p, dtype=float) for p in simplex]
    fs = [f(x) for x in xs]
    evals = len(xs)
    n = len(xs[0])
    while evals < max_evals:
        order = sorted(range(len(xs)), key=lambda i: (fs[i], i))
        xs = [xs[i] for i in order]
        fs = [fs[i] for i in order]
        diam = max(
            np.linalg.norm(xs[i] - xs[j])
            for i in range(len(xs))
            for j in range(i + 1, len(xs))
        )
        if diam < diameter_tol:
            break
        centroid = np.mean(xs[:-1], axis=0)
        xr = centroid + (centroid - xs[-1])
        fr = f(xr)
        evals += 1
        if fr < fs[0]:
            xe = centroid + 2.0 * (centroid - xs[-1])
            fe = f(xe)
            evals += 1
            if fe < fr:
                xs[-1], fs[-1] = xe, fe
            else:
                xs[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            xs[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = centroid + 0.5 * (xr - centroid)
            else:
                xc = centroid + 0.5 * (xs[-1] - centroid)
            fc = f(xc)
            evals += 1
            if fc < min(fr, fs[-1]):
                xs[-1], fs[-1] = xc, fc
            else:
                for i in range(1, n + 1):
                    xs[i] = xs[0] + 0.5 * (xs[i] - xs[0])
                    fs[i] = f(xs[i])
                    evals += 1
    best = min(range(len(xs)), key=lambda i: (fs[i], i))
    return xs[best], fs[best]


# ---------------------------------------------------------------------------
# public quantifiers
# ---------------------------------------------------------------------------

def chi_fraction(joint, fraction_labels: Sequence[str]) -> tuple[float, MeasurementBasis]:
    """Maximized chi(S : fraction) for a joint pure or mixed state.

    Fast entry point used by the redundancy and pointer-state machinery;
    equivalent to ``holevo_chi`` on the reduced (S, fraction) state but
    without materializing large intermediate density matrices.
    """
    problem = _ChiProblem.from_joint(joint, fraction_labels)
    value, theta, phi = problem.solve()
    return max(0.0, value), MeasurementBasis.from_angles(theta, phi)


def holevo_chi(rho_sf: DensityMatrix) -> HolevoResult:
    """Holevo chi(S:F) maximized over projective system measurements.

    The returned probabilities and conditional states are recomputed at the
    argmax via the reference conditioning path, so the reported value is
    exactly S(rho_F) - sum_a p_a S(rho_{F|a}) for the reported pieces.
    """
    _check_system_first(rho_sf.layout)
    d_f = rho_sf.layout.dim // 2
    problem = _ChiProblem.from_density_matrix(rho_sf.matrix, d_f)
    _, theta, phi = problem.solve()
    basis = MeasurementBasis.from_angles(theta, phi)
    probs, conditionals = condition_on_system(rho_sf, basis)
    rho_f = partial_trace(rho_sf, rho_sf.layout.labels[1:])
    avg_cond = sum(
        p * entropy(c) for p, c in zip(probs, conditionals) if c is not None
    )
    value = max(0.0, entropy(rho_f) - avg_cond)
    return HolevoResult(
        value=value,
        argmax_basis=basis,
        outcome_probs=(probs[0], probs[1]),
        conditional_states=conditionals,
    )


def _pauli_expectations(rho4: np.ndarray):
    v_s = np.array(
        [np.real(np.trace(rho4 @ np.kron(s, IDENTITY_2))) for s in _PAULIS]
    )
    v_f = np.array(
        [np.real(np.trace(rho4 @ np.kron(IDENTITY_2, s))) for s in _PAULIS]
    )
    corr = np.array(
        [
            [np.real(np.trace(rho4 @ np.kron(a, b))) for b in _PAULIS]
            for a in _PAULIS
        ]
    )
    return v_s, v_f, corr


def _classical_mi_table(p: np.ndarray) -> float:
    """Mutual information in bits of a 2 x 2 outcome table."""
    p = np.clip(p, 0.0, None)
    total = p.sum()
    if total <= 0:
        return 0.0
    p = p / total
    pa = p.sum(axis=1)
    pb = p.sum(axis=0)
    mi = 0.0
    for i in range(2):
        for j in range(2):
            if p[i, j] > 0 and pa[i] > 0 and pb[j] > 0:
                mi += p[i, j] * np.log2(p[i, j] / (pa[i] * pb[j]))
    return float(mi)


def accessible_mi_two_sided(rho_sf: DensityMatrix) -> float:
    """Accessible mutual information for a single-qubit fraction.

    Classical mutual information of P(a, b) = tr[(Pi_a x Pi_b) rho],
    maximized over projective measurement directions on both qubits.
    Larger fractions are rejected; use ``holevo_chi`` there.
    """
    _check_system_first(rho_sf.layout)
    if rho_sf.layout.dim != 4:
        raise ValueError("two-sided accessible MI is defined for single-qubit fractions")
    v_s, v_f, corr = _pauli_expectations(rho_sf.matrix)

    th = np.linspace(0.0, np.pi, 12)
    ph = np.linspace(0.0, 2.0 * np.pi, 24, endpoint=False)
    tt, pp = np.meshgrid(th, ph, indexing="ij")
    angles = np.stack([tt.ravel(), pp.ravel()], axis=1)
    dirs = np.stack(
        [
            np.sin(angles[:, 0]) * np.cos(angles[:, 1]),
            np.sin(angles[:, 0]) * np.sin(angles[:, 1]),
            np.cos(angles[:, 0]),
        ],
        axis=1,
    )
    s_proj = dirs @ v_s
    f_proj = dirs @ v_f
    k_proj = dirs @ corr @ dirs.T

    def mi_from_scalars(sv, fv, kv):
        mi = np.zeros_like(kv)
        pa = {1: (1 + sv) / 2, -1: (1 - sv) / 2}
        pb = {1: (1 + fv) / 2, -1: (1 - fv) / 2}
        for a in (1, -1):
            for b in (1, -1):
                pj = np.clip((1 + a * sv + b * fv + a * b * kv) / 4.0, 0.0, None)
                den = np.clip(pa[a] * pb[b], 1e-300, None)
                term = np.where(pj > 0, pj * np.log2(np.clip(pj, 1e-300, None) / den), 0.0)
                mi = mi + term
        return mi

    table = mi_from_scalars(s_proj[:, None], f_proj[None, :], k_proj)
    flat = np.argmax(table)
    i, j = np.unravel_index(flat, table.shape)

    def objective(x):
        ns = _bloch_vector(x[0], x[1])
        nf = _bloch_vector(x[2], x[3])
        p = np.zeros((2, 2))
        for ia, a in enumerate((1, -1)):
            for ib, b in enumerate((1, -1)):
                p[ia, ib] = (1 + a * (ns @ v_s) + b * (nf @ v_f) + a * b * (ns @ corr @ nf)) / 4.0
        return -_classical_mi_table(p)

    x0 = np.array([angles[i, 0], angles[i, 1], angles[j, 0], angles[j, 1]])
    step_t = np.pi / 22.0
    step_p = np.pi / 24.0
    simplex = [x0]
    for k, d in enumerate((step_t, step_p, step_t, step_p)):
        e = np.zeros(4)
        e[k] = d
        simplex.append(x0 + e)
    best_x, best_f = _nelder_mead(
        objective, simplex, diameter_tol=SIMPLEX_DIAMETER_TOL, max_evals=2 * MAX_REFINE_EVALS
    )
    return max(0.0, float(table[i, j]), -best_f)


def quantum_mi(rho_sf: DensityMatrix) -> float:
    """Quantum mutual information S(S) + S(F) - S(SF) in bits."""
    _check_system_first(rho_sf.layout)
    labels = rho_sf.layout.labels
    s_s = entropy(partial_trace(rho_sf, [labels[0]]))
    s_f = entropy(partial_trace(rho_sf, labels[1:]))
    s_sf = entropy(rho_sf)
    return s_s + s_f - s_sf
