import numpy as np
import pytest

from qdarwin.model import InitialScenario, ModelParams, evolve_trajectory
from qdarwin.oracles import random_density_matrix
from qdarwin.qcore import DensityMatrix, SubsystemLayout


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def two_qubit_layout():
    return SubsystemLayout(dims=(2, 2), labels=("S", "E1"))


def random_dm(rng, layout):
    return DensityMatrix(random_density_matrix(rng, layout.dim), layout)


def model_snapshot(p, gamma_t, n=3, omega=0.1, gamma=0.1, scenario=None):
    """Joint pure state of the spin-star model at one time."""
    params = ModelParams(omega=omega, gamma=gamma, p=p, n=n)
    scenario = scenario or InitialScenario.circle_left()
    t = gamma_t / gamma
    traj = evolve_trajectory(params, scenario, np.array([0.0, t]) if t > 0 else np.array([0.0]))
    return traj.states[-1]
