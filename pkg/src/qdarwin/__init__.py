"""qdarwin: an exact numerical laboratory for quantum objectivity.

Simulates a qubit dephasing into a star of environment qubits while a
tunable system drive breaks the commutativity between the system and
interaction Hamiltonians, and quantifies how (and in which basis) the
system's state becomes redundantly recorded in the environment:
Holevo/accessible information, redundancy under thresholds, pointer-basis
extraction from broadcast structure, and figure-style parameter sweeps.
"""

from ._version import VERSION as __version__
from .qcore import (
    DensityMatrix,
    HermitianEig,
    StateVector,
    SubsystemLayout,
    entropy,
    fidelity_pure,
    herm_eig,
    partial_trace,
    propagator,
    reduced_density,
    tensor,
    trace_distance,
    uhlmann_fidelity,
)
from .model import (
    InitialScenario,
    ModelParams,
    Trajectory,
    build_hamiltonian,
    commutator_norm,
    default_time_grid,
    evolve_trajectory,
    initial_state,
)
from .infotheory import (
    HolevoResult,
    MeasurementBasis,
    accessible_mi_two_sided,
    chi_fraction,
    condition_on_system,
    holevo_chi,
    quantum_mi,
)
from .redundancy import (
    RedundancyConfig,
    RedundancyPeak,
    RedundancyResult,
    max_redundancy_time,
    redundancy,
    redundancy_brute_oracle,
)
from .sbs import (
    SBSReport,
    extract_pointer_basis,
    pointer_fidelity,
    sbs_decompose,
)
from .experiments import (
    SweepSpec,
    builtin_figures,
    emit_plot,
    emit_table,
    run_sweep,
)

__all__ = [
    "__version__",
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
    "fidelity_pure",
    "trace_distance",
    "uhlmann_fidelity",
    "ModelParams",
    "InitialScenario",
    "Trajectory",
    "build_hamiltonian",
    "commutator_norm",
    "initial_state",
    "evolve_trajectory",
    "default_time_grid",
    "MeasurementBasis",
    "HolevoResult",
    "condition_on_system",
    "holevo_chi",
    "chi_fraction",
    "accessible_mi_two_sided",
    "quantum_mi",
    "RedundancyConfig",
    "RedundancyResult",
    "RedundancyPeak",
    "redundancy",
    "redundancy_brute_oracle",
    "max_redundancy_time",
    "SBSReport",
    "extract_pointer_basis",
    "sbs_decompose",
    "pointer_fidelity",
    "SweepSpec",
    "builtin_figures",
    "run_sweep",
    "emit_table",
    "emit_plot",
]
