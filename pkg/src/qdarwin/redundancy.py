"""Redundancy of system information across environment fractions.

Red(rho_SE) is the largest number of fractions the environment can be
partitioned into such that every fraction still clears an
information-vs-system-entropy threshold.  The default partition shape is
contiguous equal blocks (leftover qubits appended to the last block),
validated against an exhaustive set-partition oracle for small n.

Thresholds: the literal reading keeps fractions with I >= (1-delta) S(rho_S);
the strict reading demands I >= delta S(rho_S).  With the delta = 0.9 used
throughout, literal is a 10%-of-entropy bar and strict a 90% one.  Both are
implemented; every result records which was used.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .qcore import (
    TOLERANCES,
    DensityMatrix,
    StateVector,
    entropy,
    partial_trace,
    reduced_density,
)
from .infotheory import _ChiProblem, accessible_mi_two_sided, chi_fraction
from .model import Trajectory

__all__ = [
    "RedundancyConfig",
    "RedundancyResult",
    "RedundancyPeak",
    "UndefinedRedundancyError",
    "redundancy",
    "redundancy_brute_oracle",
    "max_redundancy_time",
]

THRESHOLD_MODES = ("literal", "strict")
QUANTIFIERS = ("holevo", "two-sided")

# chi values closer than this are treated as tied when breaking time ties
CHI_TIE_TOL = 1e-12


class UndefinedRedundancyError(RuntimeError):
    """Raised when no time in a trajectory carries enough system entropy."""


@dataclass(frozen=True)
class RedundancyConfig:
    delta: float
    threshold_mode: str = "literal"
    quantifier: str = "holevo"
    min_entropy: float = TOLERANCES["entropy_floor"]

    def __post_init__(self):
        if not 0.0 < self.delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {self.delta}")
        if self.threshold_mode not in THRESHOLD_MODES:
            raise ValueError(f"threshold_mode must be one of {THRESHOLD_MODES}")
        if self.quantifier not in QUANTIFIERS:
            raise ValueError(f"quantifier must be one of {QUANTIFIERS}")
        if self.min_entropy <= 0:
            raise ValueError("min_entropy must be positive")

    def threshold(self, system_entropy: float) -> float:
        if self.threshold_mode == "literal":
            return (1.0 - self.delta) * system_entropy
        return self.delta * system_entropy


@dataclass(frozen=True, eq=False)
class RedundancyResult:
    r: int
    fraction_size: int
    per_fraction_info: np.ndarray
    system_entropy: float
    defined: bool

    def __post_init__(self):
        info = np.array(self.per_fraction_info, dtype=float, copy=True)
        info.setflags(write=False)
        object.__setattr__(self, "per_fraction_info", info)


@dataclass(frozen=True, eq=False)
class RedundancyPeak:
    """Time of maximum redundancy along a trajectory, with the tied-time
    tie-break resolved by the single-qubit information content."""

    time: float
    index: int
    result: RedundancyResult
    chi_e1: float


# ---------------------------------------------------------------------------
# partitions
# ---------------------------------------------------------------------------

def contiguous_blocks(labels: Sequence[str], size: int) -> list[tuple[str, ...]]:
    """Split labels into floor(n/size) contiguous blocks; leftovers join the last."""
    n = len(labels)
    r = n // size
    blocks = [tuple(labels[i * size:(i + 1) * size]) for i in range(r)]
    leftover = labels[r * size:]
    if leftover:
        blocks[-1] = blocks[-1] + tuple(leftover)
    return blocks


def _set_partitions(items: Sequence[str]) -> Iterator[list[tuple[str, ...]]]:
    """All set partitions, deterministically ordered."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for partition in _set_partitions(rest):
        for i in range(len(partition)):
            yield partition[:i] + [(first,) + partition[i]] + partition[i + 1:]
        yield [(first,)] + partition


# ---------------------------------------------------------------------------
# per-fraction information with certified-lower-bound shortcuts
# ---------------------------------------------------------------------------

def _system_entropy(joint) -> float:
    label = joint.layout.labels[0]
    if isinstance(joint, StateVector):
        return entropy(reduced_density(joint, [label]))
    return entropy(partial_trace(joint, [label]))


def _fraction_value(joint, labels: Sequence[str], config: RedundancyConfig) -> float:
    """Full-precision information value for one fraction."""
    if config.quantifier == "two-sided" and len(labels) == 1:
        rho_sf = _reduced_sf(joint, labels)
        return accessible_mi_two_sided(rho_sf)
    return chi_fraction(joint, labels)[0]


def _reduced_sf(joint, fraction_labels: Sequence[str]) -> DensityMatrix:
    keep = [joint.layout.labels[0]] + list(fraction_labels)
    if isinstance(joint, StateVector):
        return reduced_density(joint, keep)
    return partial_trace(joint, keep)


def _fraction_passes(joint, labels, config: RedundancyConfig, threshold: float):
    """(passes, value_or_None).  The value is only resolved when a full
    optimization ran; certified lower bounds settle passes early."""
    if config.quantifier == "two-sided" and len(labels) == 1:
        value = _fraction_value(joint, labels, config)
        return value >= threshold, value
    problem = _ChiProblem.from_joint(joint, labels)
    if problem.s_f < threshold:  # chi <= S(rho_F): certified fail
        return False, None
    if problem.probe_max() >= threshold:
        return True, None
    if problem.coarse_max() >= threshold:
        return True, None
    value = max(0.0, problem.solve()[0])
    return value >= threshold, value


# ---------------------------------------------------------------------------
# redundancy proper
# ---------------------------------------------------------------------------

def _undefined_result(system_entropy: float) -> RedundancyResult:
    return RedundancyResult(
        r=0,
        fraction_size=0,
        per_fraction_info=np.array([]),
        system_entropy=system_entropy,
        defined=False,
    )


def _winning_k(joint, config: RedundancyConfig, symmetric_env: bool):
    """Smallest block size whose partition fully clears the threshold.

    Returns (k, blocks) or (None, None).  With ``symmetric_env`` the state
    is assumed invariant under environment-qubit permutations, so equal
    size blocks share one evaluation.
    """
    env = list(joint.layout.environment_labels())
    n = len(env)
    s_sys = _system_entropy(joint)
    threshold = config.threshold(s_sys)
    for k in range(1, n + 1):
        blocks = contiguous_blocks(env, k)
        all_pass = True
        seen_sizes: set[int] = set()
        for block in blocks:
            if symmetric_env:
                if len(block) in seen_sizes:
                    continue
                seen_sizes.add(len(block))
            passed, _ = _fraction_passes(joint, block, config, threshold)
            if not passed:
                all_pass = False
                break
        if all_pass:
            return k, blocks
    return None, None


def redundancy(
    rho_se, config: RedundancyConfig, *, symmetric_env: bool = False
) -> RedundancyResult:
    """Red(rho_SE) over contiguous equal-block partitions.

    ``rho_se`` may be a DensityMatrix or a pure StateVector over
    (S, E1..En).  Block sizes k = 1..n are scanned in ascending order; the
    first fully passing partition realizes the largest fraction count
    r = floor(n/k).  Undefined (r = 0, defined = False) when the system
    entropy sits below ``config.min_entropy``.
    """
    s_sys = _system_entropy(rho_se)
    if s_sys < config.min_entropy:
        return _undefined_result(s_sys)
    k, blocks = _winning_k(rho_se, config, symmetric_env)
    if k is None:
        return RedundancyResult(
            r=0,
            fraction_size=0,
            per_fraction_info=np.array([]),
            system_entropy=s_sys,
            defined=True,
        )
    info = []
    cache: dict[int, float] = {}
    for block in blocks:
        if symmetric_env and len(block) in cache:
            info.append(cache[len(block)])
            continue
        value = _fraction_value(rho_se, block, config)
        cache[len(block)] = value
        info.append(value)
    return RedundancyResult(
        r=len(blocks),
        fraction_size=k,
        per_fraction_info=np.array(info),
        system_entropy=s_sys,
        defined=True,
    )


def redundancy_brute_oracle(rho_se, config: RedundancyConfig) -> RedundancyResult:
    """Exhaustive search over all set partitions of the environment.

    Exponentially expensive; limited to n <= 6.  Used to validate the
    contiguous-block restriction on permutation-symmetric states.
    """
    env = list(rho_se.layout.environment_labels())
    if len(env) > 6:
        raise ValueError(f"brute-force oracle limited to n <= 6, got n = {len(env)}")
    s_sys = _system_entropy(rho_se)
    if s_sys < config.min_entropy:
        return _undefined_result(s_sys)
    threshold = config.threshold(s_sys)
    values: dict[frozenset, float] = {}

    def block_value(block: tuple[str, ...]) -> float:
        key = frozenset(block)
        if key not in values:
            values[key] = _fraction_value(rho_se, sorted(block, key=env.index), config)
        return values[key]

    best: list[tuple[str, ...]] | None = None
    for partition in _set_partitions(env):
        if best is not None and len(partition) <= len(best):
            continue
        if all(block_value(b) >= threshold for b in partition):
            best = partition
    if best is None:
        return RedundancyResult(
            r=0,
            fraction_size=0,
            per_fraction_info=np.array([]),
            system_entropy=s_sys,
            defined=True,
        )
    info = np.array([block_value(b) for b in best])
    return RedundancyResult(
        r=len(best),
        fraction_size=min(len(b) for b in best),
        per_fraction_info=info,
        system_entropy=s_sys,
        defined=True,
    )


# ---------------------------------------------------------------------------
# time selection
# ---------------------------------------------------------------------------

def _entropy_window(entropies: np.ndarray, min_entropy: float) -> tuple[int, int]:
    """First stretch of grid indices where the system entropy is live.

    Runs from the first index at or above ``min_entropy`` to just before
    the first later index where the entropy returns below it.
    """
    alive = entropies >= min_entropy
    if not np.any(alive):
        raise UndefinedRedundancyError(
            "system entropy never reaches min_entropy on this trajectory"
        )
    start = int(np.argmax(alive))
    after = np.nonzero(~alive[start:])[0]
    stop = start + int(after[0]) if after.size else entropies.size
    return start, stop


def _select_peak(
    r_values: Sequence[int],
    chi_resolver: Callable[[Sequence[int]], dict[int, float]],
) -> int:
    """Earliest index achieving the maximum r; chi breaks exact ties.

    ``chi_resolver`` maps a list of tied indices to chi values (or to
    certified upper bounds strictly below the winning chi, which is enough
    to lose a tie).  Among tied indices the one with maximal chi wins; chi
    ties within CHI_TIE_TOL resolve to the earliest index.
    """
    r_arr = np.asarray(r_values)
    rmax = int(np.max(r_arr))
    tied = [int(i) for i in np.nonzero(r_arr == rmax)[0]]
    if len(tied) == 1:
        return tied[0]
    chis = chi_resolver(tied)
    best = max(chis.values())
    return next(i for i in tied if chis[i] >= best - CHI_TIE_TOL)


class _TieBreaker:
    """Full-precision chi(S:E1) at selected times, with exact pruning.

    chi never exceeds the fraction entropy or the quantum mutual
    information, so times whose cheap upper bound sits safely below the
    best chi found so far skip the optimizer entirely; the stored bound
    still loses the tie correctly.
    """

    PRUNE_MARGIN = 1e-9

    def __init__(self, states: Sequence[StateVector], first_env_label: str):
        self.states = states
        self.label = first_env_label
        self.cache: dict[int, float] = {}

    def exact(self, index: int) -> float:
        if index not in self.cache:
            problem = _ChiProblem.from_joint(self.states[index], [self.label])
            self.cache[index] = max(0.0, problem.solve()[0])
        return self.cache[index]

    def resolve(self, indices: Sequence[int]) -> dict[int, float]:
        problems = {i: _ChiProblem.from_joint(self.states[i], [self.label]) for i in indices}
        bounds = {i: problems[i].chi_upper_bound() for i in indices}
        order = sorted(indices, key=lambda i: (-bounds[i], i))
        best = -np.inf
        out: dict[int, float] = {}
        for i in order:
            if bounds[i] < best - self.PRUNE_MARGIN:
                out[i] = bounds[i] - self.PRUNE_MARGIN  # cannot win the tie
                continue
            value = max(0.0, problems[i].solve()[0])
            self.cache[i] = value
            out[i] = value
            best = max(best, value)
        return out


def max_redundancy_time(
    trajectory: Trajectory, config: RedundancyConfig, *, symmetric_env: bool = False
) -> RedundancyPeak:
    """Earliest time achieving the maximum redundancy in the first live
    entropy window; exact redundancy ties resolve toward maximal chi(S:E1),
    then toward the earliest grid point."""
    states = trajectory.states
    entropies = np.array([_system_entropy(s) for s in states])
    start, stop = _entropy_window(entropies, config.min_entropy)

    r_values = []
    for i in range(start, stop):
        k, blocks = _winning_k(states[i], config, symmetric_env)
        r_values.append(0 if k is None else len(blocks))

    env1 = trajectory.layout.environment_labels()[0]
    breaker = _TieBreaker(states, env1)

    def resolver(local_indices):
        chis = breaker.resolve([start + i for i in local_indices])
        return {i: chis[start + i] for i in local_indices}

    peak = start + _select_peak(r_values, resolver)

    result = redundancy(states[peak], config, symmetric_env=symmetric_env)
    return RedundancyPeak(
        time=float(trajectory.times[peak]),
        index=peak,
        result=result,
        chi_e1=breaker.exact(peak),
    )
