import numpy as np
import pytest

from qdarwin.infotheory import (
    MeasurementBasis,
    _ChiProblem,
    accessible_mi_two_sided,
    chi_fraction,
    condition_on_system,
    holevo_chi,
    quantum_mi,
)
from qdarwin.oracles import binary_entropy, grid_search_chi
from qdarwin.qcore import (
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    entropy,
    partial_trace,
    reduced_density,
)
from conftest import model_snapshot, random_dm

QUARTER = np.pi / 4  # gamma * t at which the dephasing branches are orthogonal
EIGHTH = np.pi / 8

# chi(S:E1) for p=0, n=8 at gamma t = pi/8, frozen from the dense grid-search
# oracle; the z-basis closed form h2((1 + 1/sqrt 2)/2) gives the same number
CHI_AT_EIGHTH = 0.6008760366928574


def qubit_pair():
    return SubsystemLayout(dims=(2, 2), labels=("S", "E1"))


def bell_state():
    return StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2), qubit_pair())


def product_rho(rng=None):
    a = np.diag([0.6, 0.4]).astype(complex)
    b = np.diag([0.3, 0.7]).astype(complex)
    return DensityMatrix(
        np.kron(a, b), qubit_pair()
    )


# ---------------------------------------------------------------------------
# measurement bases and conditioning
# ---------------------------------------------------------------------------

def test_basis_projectors_complete_and_idempotent(rng):
    for _ in range(20):
        basis = MeasurementBasis.from_angles(
            rng.uniform(-1, 4) * np.pi, rng.uniform(-1, 3) * np.pi
        )
        p_plus, p_minus = basis.projectors()
        np.testing.assert_allclose(p_plus + p_minus, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(p_plus @ p_plus, p_plus, atol=1e-12)
        np.testing.assert_allclose(p_minus @ p_minus, p_minus, atol=1e-12)
        assert 0.0 <= basis.theta <= np.pi
        assert 0.0 <= basis.phi < 2 * np.pi


def test_basis_validation():
    with pytest.raises(ValueError):
        MeasurementBasis(theta=-0.1, phi=0.0)
    with pytest.raises(ValueError):
        MeasurementBasis(theta=0.5, phi=7.0)


def test_condition_on_system_pure_system():
    sigma = np.diag([0.3, 0.7]).astype(complex)
    rho = DensityMatrix(np.kron(np.diag([1.0, 0.0]), sigma), qubit_pair())
    probs, conds = condition_on_system(rho, MeasurementBasis(0.0, 0.0))
    assert probs[0] == pytest.approx(1.0, abs=1e-12)
    assert probs[1] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(conds[0].matrix, sigma, atol=1e-12)
    assert conds[1] is None  # degenerate outcome


def test_condition_on_system_bell():
    probs, conds = condition_on_system(
        bell_state().density_matrix(), MeasurementBasis(0.0, 0.0)
    )
    assert probs[0] == pytest.approx(0.5, abs=1e-12)
    assert probs[1] == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(conds[0].matrix, np.diag([1.0, 0.0]), atol=1e-12)
    np.testing.assert_allclose(conds[1].matrix, np.diag([0.0, 1.0]), atol=1e-12)


def test_mixture_of_conditionals_reconstructs_fraction(rng):
    rho = random_dm(rng, qubit_pair())
    rho_f = partial_trace(rho, ["E1"]).matrix
    for _ in range(20):
        basis = MeasurementBasis.from_angles(
            rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        )
        probs, conds = condition_on_system(rho, basis)
        mixture = sum(p * c.matrix for p, c in zip(probs, conds) if c is not None)
        assert np.max(np.abs(mixture - rho_f)) < 1e-10


# ---------------------------------------------------------------------------
# Holevo chi
# ---------------------------------------------------------------------------

def test_chi_vanishes_on_product_states(rng):
    rho = product_rho()
    problem = _ChiProblem.from_density_matrix(rho.matrix, 2)
    thetas = rng.uniform(0, np.pi, size=40)
    phis = rng.uniform(0, 2 * np.pi, size=40)
    assert np.max(np.abs(problem.chi_batch(thetas, phis))) < 1e-8
    assert holevo_chi(rho).value < 1e-8


def test_chi_orthogonal_branches_is_one_bit():
    state = model_snapshot(p=0.0, gamma_t=QUARTER, n=8)
    res = holevo_chi(reduced_density(state, ["S", "E1"]))
    assert res.value == pytest.approx(1.0, abs=1e-6)
    theta = res.argmax_basis.theta
    assert min(theta, np.pi - theta) < 1e-4  # z basis up to antipode


def test_chi_partial_overlap_matches_grid_oracle():
    state = model_snapshot(p=0.0, gamma_t=EIGHTH, n=8)
    rho = reduced_density(state, ["S", "E1"])
    res = holevo_chi(rho)
    assert res.value == pytest.approx(CHI_AT_EIGHTH, abs=1e-9)
    dense, _, _ = grid_search_chi(rho.matrix)
    assert res.value == pytest.approx(dense, abs=1e-5)
    # the z-basis closed form: branch records are pure with overlap 1/sqrt 2
    assert res.value == pytest.approx(binary_entropy((1 + 2 ** -0.5) / 2), abs=1e-9)


def test_holevo_result_invariants(rng):
    for _ in range(10):
        rho = random_dm(rng, qubit_pair())
        res = holevo_chi(rho)
        assert res.outcome_probs[0] + res.outcome_probs[1] == pytest.approx(1.0, abs=1e-10)
        s_s = entropy(partial_trace(rho, ["S"]))
        s_f = entropy(partial_trace(rho, ["E1"]))
        assert res.value <= s_s + 1e-6
        assert res.value <= s_f + 1e-6
        mixture = sum(
            p * c.matrix
            for p, c in zip(res.outcome_probs, res.conditional_states)
            if c is not None
        )
        assert np.max(np.abs(mixture - partial_trace(rho, ["E1"]).matrix)) < 1e-9


def test_optimizer_matches_dense_grid(rng):
    for _ in range(10):
        rho = random_dm(rng, qubit_pair())
        fast = holevo_chi(rho).value
        dense, _, _ = grid_search_chi(rho.matrix)
        assert abs(fast - dense) < 1e-5


def test_chi_fraction_agrees_with_density_path(rng):
    state = model_snapshot(p=0.7, gamma_t=0.35 * np.pi, n=3)
    fast, basis = chi_fraction(state, ["E2"])
    slow = holevo_chi(reduced_density(state, ["S", "E2"]))
    assert fast == pytest.approx(slow.value, abs=1e-9)
    for block in (["E1"], ["E1", "E3"], ["E1", "E2", "E3"]):
        problem_value = chi_fraction(state, block)[0]
        dm_value = holevo_chi(reduced_density(state, ["S"] + block)).value
        assert problem_value == pytest.approx(dm_value, abs=1e-9)


def test_chi_batch_matches_scalar(rng):
    state = model_snapshot(p=0.4, gamma_t=0.3 * np.pi, n=3)
    problem = _ChiProblem.from_joint(state, ["E1", "E2"])
    thetas = rng.uniform(0, np.pi, size=12)
    phis = rng.uniform(0, 2 * np.pi, size=12)
    batch = problem.chi_batch(thetas, phis)
    singles = np.array([problem.chi_single(t, p) for t, p in zip(thetas, phis)])
    np.testing.assert_allclose(batch, singles, atol=1e-12)


def test_chi_upper_bound_is_a_bound(rng):
    for p, gt in [(0.0, 0.2 * np.pi), (0.5, 0.3 * np.pi), (1.0, 0.45 * np.pi)]:
        state = model_snapshot(p=p, gamma_t=gt, n=3)
        problem = _ChiProblem.from_joint(state, ["E1"])
        assert problem.solve()[0] <= problem.chi_upper_bound() + 1e-9


def test_chi_requires_system_first():
    layout = SubsystemLayout(dims=(4, 2), labels=("big", "S"))
    rho = DensityMatrix(np.eye(8, dtype=complex) / 8, layout)
    with pytest.raises(ValueError):
        holevo_chi(rho)


# ---------------------------------------------------------------------------
# two-sided accessible MI and quantum MI
# ---------------------------------------------------------------------------

def test_accessible_mi_product_and_bell():
    assert accessible_mi_two_sided(product_rho()) < 1e-8
    assert accessible_mi_two_sided(bell_state().density_matrix()) == pytest.approx(
        1.0, abs=1e-6
    )


def test_accessible_mi_orthogonal_branches_saturates_chi():
    state = model_snapshot(p=0.0, gamma_t=QUARTER, n=8)
    rho = reduced_density(state, ["S", "E1"])
    acc = accessible_mi_two_sided(rho)
    assert acc == pytest.approx(1.0, abs=1e-6)


def test_accessible_mi_partial_overlap_helstrom_value():
    # two pure records with overlap c = 1/sqrt 2: optimal discrimination has
    # error (1 - sqrt(1 - c^2))/2, so I_acc = 1 - h2((1 + 1/sqrt 2)/2)
    state = model_snapshot(p=0.0, gamma_t=EIGHTH, n=8)
    rho = reduced_density(state, ["S", "E1"])
    want = 1.0 - binary_entropy((1 + 2 ** -0.5) / 2)
    assert accessible_mi_two_sided(rho) == pytest.approx(want, abs=1e-6)


def test_accessible_mi_rejects_large_fractions():
    state = model_snapshot(p=0.0, gamma_t=QUARTER, n=3)
    rho = reduced_density(state, ["S", "E1", "E2"])
    with pytest.raises(ValueError):
        accessible_mi_two_sided(rho)


def test_quantum_mi_examples(rng):
    assert quantum_mi(product_rho()) == pytest.approx(0.0, abs=1e-10)
    assert quantum_mi(bell_state().density_matrix()) == pytest.approx(2.0, abs=1e-10)
    rho = random_dm(rng, qubit_pair())
    lam_all = np.linalg.eigvalsh(rho.matrix)
    lam_s = np.linalg.eigvalsh(partial_trace(rho, ["S"]).matrix)
    lam_f = np.linalg.eigvalsh(partial_trace(rho, ["E1"]).matrix)

    def h(lams):
        lams = lams[lams > 1e-15]
        return float(-np.sum(lams * np.log2(lams)))

    assert quantum_mi(rho) == pytest.approx(h(lam_s) + h(lam_f) - h(lam_all), abs=1e-10)


def test_information_hierarchy_sampled(rng):
    states = [random_dm(rng, qubit_pair()) for _ in range(8)]
    states += [
        reduced_density(model_snapshot(p=p, gamma_t=gt, n=3), ["S", "E1"])
        for p, gt in [(0.0, 0.2 * np.pi), (0.5, 0.3 * np.pi), (1.0, 0.4 * np.pi)]
    ]
    for rho in states:
        acc = accessible_mi_two_sided(rho)
        chi = holevo_chi(rho).value
        qmi = quantum_mi(rho)
        assert acc <= chi + 1e-6
        assert chi <= qmi + 1e-6
