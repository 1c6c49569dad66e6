"""Command-line entry point.

Three commands:

* ``qdarwin figure <fig1..fig5> --out DIR`` reproduces a built-in figure,
  writing ``<tag>.csv`` and ``<tag>.svg`` into the output directory.
* ``qdarwin sweep <config.yaml> --out DIR`` runs a user-defined sweep from
  a YAML config (schema below and in the README).
* ``qdarwin selftest`` runs the closed-form oracle suite, the brute-force
  redundancy check, the optimizer-vs-grid comparison and the module
  invariants, printing one pass/fail line per check.

Exit codes: 0 success, 1 computation or self-test failure, 2 usage or
configuration error.  Progress goes to stderr; nothing is written outside
the requested output directory.
"""

from __future__ import annotations

import argparse
import cmath
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np
import yaml

from ._version import VERSION
from . import oracles
from .experiments import (
    FIGURE_TAGS,
    SweepPanel,
    SweepSpec,
    TimeGridSpec,
    builtin_figures,
    emit_plot,
    emit_table,
    run_sweep,
)
from .infotheory import (
    MeasurementBasis,
    accessible_mi_two_sided,
    condition_on_system,
    holevo_chi,
    quantum_mi,
)
from .model import (
    InitialScenario,
    ModelParams,
    build_hamiltonian,
    default_time_grid,
    evolve_trajectory,
)
from .qcore import (
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    entropy,
    partial_trace,
    propagator,
    reduced_density,
    trace_distance,
    uhlmann_fidelity,
)
from .redundancy import RedundancyConfig, redundancy, redundancy_brute_oracle

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class ConfigError(ValueError):
    """Sweep configuration rejected; message carries the field path."""


@dataclasses.dataclass(frozen=True)
class RunConfig:
    """A fully validated execution request: the sweep, where its outputs go,
    how many workers to use, and the seed for random-probe suites."""

    spec: SweepSpec
    out_dir: Path
    stem: str
    workers: int | None = None
    seed: int = 20240


def _execute(config: RunConfig) -> int:
    try:
        records = run_sweep(
            config.spec, workers=config.workers, progress=_progress(sys.stderr)
        )
        table = emit_table(records, config.out_dir / f"{config.stem}.csv")
        plot = emit_plot(records, config.spec.figure, config.out_dir / f"{config.stem}.svg")
    except Exception as exc:
        print(f"error: sweep computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    print(f"wrote {table} and {plot}", file=sys.stderr)
    return EXIT_OK


def _progress(stream):
    state = {"t0": time.time()}

    def report(done, total):
        elapsed = time.time() - state["t0"]
        print(f"[{done}/{total}] sweep points done ({elapsed:.1f}s)", file=stream)

    return report


def _apply_overrides(spec: SweepSpec, args) -> SweepSpec:
    red = spec.redundancy
    if getattr(args, "threshold_mode", None):
        red = dataclasses.replace(red, threshold_mode=args.threshold_mode)
    if getattr(args, "quantifier", None):
        red = dataclasses.replace(red, quantifier=args.quantifier)
    if red is not spec.redundancy:
        spec = dataclasses.replace(spec, redundancy=red)
    return spec


def cmd_figure(args) -> int:
    if args.tag not in FIGURE_TAGS:
        print(
            f"error: unknown figure tag {args.tag!r}; choose from {', '.join(FIGURE_TAGS)}",
            file=sys.stderr,
        )
        return EXIT_USAGE
    spec = _apply_overrides(builtin_figures()[args.tag], args)
    return _execute(
        RunConfig(spec=spec, out_dir=Path(args.out), stem=args.tag, workers=args.workers)
    )


# ---------------------------------------------------------------------------
# sweep configs
# ---------------------------------------------------------------------------

def _cfg_get(cfg: dict, path: str, required=True, default=None):
    node = cfg
    walked = []
    for part in path.split("."):
        walked.append(part)
        if not isinstance(node, dict) or part not in node:
            if required:
                raise ConfigError(f"{'.'.join(walked)}: missing required field")
            return default
        node = node[part]
    return node


def _as_list(value) -> list:
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _check_range(path: str, values, lo, hi):
    for i, v in enumerate(values):
        if not isinstance(v, (int, float)):
            raise ConfigError(f"{path}[{i}]: expected a number, got {v!r}")
        if not lo <= float(v) <= hi:
            raise ConfigError(f"{path}[{i}]: {v} out of range [{lo}, {hi}]")


def spec_from_config(cfg: dict) -> SweepSpec:
    """Validate a parsed YAML mapping and build the sweep spec.

    Raises ConfigError with a dotted field path on any violation.
    """
    if not isinstance(cfg, dict):
        raise ConfigError("top level: expected a mapping of sections")
    kind = _cfg_get(cfg, "kind")
    gamma = float(_cfg_get(cfg, "model.gamma", required=False, default=0.1))
    if gamma <= 0:
        raise ConfigError("model.gamma: must be positive")
    n = _cfg_get(cfg, "model.n", required=False, default=8)
    if not isinstance(n, int) or n < 1:
        raise ConfigError("model.n: must be a positive integer")
    p_values = _as_list(_cfg_get(cfg, "model.p", required=False, default=[0.0]))
    _check_range("model.p", p_values, 0.0, 1.0)
    omega_values = _as_list(_cfg_get(cfg, "model.omega", required=False, default=[gamma]))
    for i, w in enumerate(omega_values):
        if not isinstance(w, (int, float)) or w <= 0:
            raise ConfigError(f"model.omega[{i}]: must be a positive number")

    sc_kind = _cfg_get(cfg, "scenario.kind", required=False, default="circle_left")
    if sc_kind == "circle_left":
        scenarios = (InitialScenario.circle_left(),)
    elif sc_kind == "amplitude":
        x0s = _as_list(_cfg_get(cfg, "scenario.x0"))
        _check_range("scenario.x0", x0s, 0.0, 1.0)
        scenarios = tuple(InitialScenario.amplitude(float(x)) for x in x0s)
    elif sc_kind == "phase":
        angles = _as_list(_cfg_get(cfg, "scenario.phase_angle"))
        for i, a in enumerate(angles):
            if not isinstance(a, (int, float)):
                raise ConfigError(f"scenario.phase_angle[{i}]: expected a number")
        scenarios = tuple(
            InitialScenario.phase(cmath.exp(1j * float(a))) for a in angles
        )
    else:
        raise ConfigError(
            f"scenario.kind: unknown kind {sc_kind!r} "
            "(choose circle_left, amplitude or phase)"
        )

    gt_max = _cfg_get(cfg, "time.gamma_t_max", required=False, default=float(np.pi))
    points = _cfg_get(cfg, "time.points", required=False, default=200)
    if not isinstance(points, int) or points < 2:
        raise ConfigError("time.points: must be an integer >= 2")
    if not isinstance(gt_max, (int, float)) or gt_max <= 0:
        raise ConfigError("time.gamma_t_max: must be a positive number")

    delta = _cfg_get(cfg, "redundancy.delta", required=False, default=0.9)
    if not isinstance(delta, (int, float)) or not 0.0 < float(delta) < 1.0:
        raise ConfigError(f"redundancy.delta: delta out of range (0, 1), got {delta}")
    mode = _cfg_get(cfg, "redundancy.threshold_mode", required=False, default="literal")
    quant = _cfg_get(cfg, "redundancy.quantifier", required=False, default="holevo")
    min_entropy = _cfg_get(cfg, "redundancy.min_entropy", required=False, default=1e-6)
    try:
        red = RedundancyConfig(
            delta=float(delta),
            threshold_mode=mode,
            quantifier=quant,
            min_entropy=float(min_entropy),
        )
    except ValueError as exc:
        raise ConfigError(f"redundancy: {exc}") from exc

    default_quants = {
        "time_curves": ["chi_E1", "entropy_S"],
        "max_redundancy": ["redundancy", "chi_E1", "entropy_S"],
        "pointer": ["pointer_fidelity", "redundancy", "chi_E1"],
    }
    quantities = tuple(
        _cfg_get(cfg, "quantities", required=False, default=default_quants.get(kind, []))
    )
    figure = _cfg_get(cfg, "figure", required=False, default="custom")
    try:
        return SweepSpec(
            figure=str(figure),
            kind=kind,
            gamma=gamma,
            n=n,
            p_values=tuple(float(p) for p in p_values),
            time=TimeGridSpec(gamma_t_max=float(gt_max), points=points),
            redundancy=red,
            quantities=quantities,
            panels=(
                SweepPanel(
                    label="",
                    scenarios=scenarios,
                    omega_values=tuple(float(w) for w in omega_values),
                ),
            ),
            grid_id=f"custom-{kind}",
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def cmd_sweep(args) -> int:
    path = Path(args.config)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        print(f"error: cannot read config as UTF-8 text: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        cfg = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f" at line {mark.line + 1}, column {mark.column + 1}" if mark else ""
        print(f"error: config parse error{where}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        spec = _apply_overrides(spec_from_config(cfg), args)
    except ConfigError as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return _execute(
        RunConfig(
            spec=spec,
            out_dir=Path(args.out),
            stem=path.stem or "sweep",
            workers=args.workers,
        )
    )


# ---------------------------------------------------------------------------
# self test
# ---------------------------------------------------------------------------

def _check_dephasing_closed_form():
    worst = 0.0
    for n in (1, 4, 8):
        params = ModelParams(omega=0.1, gamma=0.1, p=0.0, n=n)
        traj = evolve_trajectory(
            params, InitialScenario.circle_left(), default_time_grid(params, np.pi / 2, 51)
        )
        for t, state in zip(traj.times, traj.states):
            off = abs(reduced_density(state, ["S"]).matrix[0, 1])
            worst = max(worst, abs(off - oracles.dephasing_off_diagonal(0.1, t, n)))
    return worst <= 1e-9, f"max off-diagonal deviation {worst:.2e} (tol 1e-9)"


def _check_quarter_period_chi():
    params = ModelParams(omega=0.1, gamma=0.1, p=0.0, n=8)
    t_star = np.pi / (4.0 * params.gamma)
    traj = evolve_trajectory(
        params, InitialScenario.circle_left(), np.array([0.0, t_star])
    )
    res = holevo_chi(reduced_density(traj.states[1], ["S", "E1"]))
    err = abs(res.value - 1.0)
    return err <= 1e-6, f"|chi - 1| = {err:.2e} at the quarter period (tol 1e-6)"


def _check_redundancy_brute(seed: int):
    cfgs = [
        RedundancyConfig(delta=0.9, threshold_mode="strict"),
        RedundancyConfig(delta=0.9, threshold_mode="literal"),
    ]
    mismatches = []
    for n in (3, 4):
        params = ModelParams(omega=0.1, gamma=0.1, p=0.5, n=n)
        traj = evolve_trajectory(
            params,
            InitialScenario.circle_left(),
            np.array([0.15, 0.3, 0.45]) * np.pi / params.gamma,
        )
        for cfg in cfgs:
            for state in traj.states:
                a = redundancy(state, cfg)
                b = redundancy_brute_oracle(state, cfg)
                if (a.r, a.defined) != (b.r, b.defined):
                    mismatches.append((n, cfg.threshold_mode, a.r, b.r))
    return not mismatches, f"{len(mismatches)} mismatches vs set-partition oracle"


def _check_optimizer_vs_grid(seed: int):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout(dims=(2, 2), labels=("S", "E1"))
    worst = 0.0
    for _ in range(12):
        rho = DensityMatrix(oracles.random_density_matrix(rng, 4), layout)
        fast = holevo_chi(rho).value
        dense, _, _ = oracles.grid_search_chi(rho.matrix)
        worst = max(worst, abs(fast - dense))
    return worst <= 1e-5, f"max |optimizer - dense grid| = {worst:.2e} (tol 1e-5)"


def _check_invariants(seed: int):
    rng = np.random.default_rng(seed + 1)
    problems = []

    params = ModelParams(omega=0.13, gamma=0.21, p=0.7, n=3)
    h = build_hamiltonian(params)
    layout = SubsystemLayout.system_env(3)
    psi = StateVector(oracles.random_pure_amplitudes(rng, 16), layout)
    u = propagator(h, 0.37)
    evolved = u @ psi.amplitudes
    if abs(np.linalg.norm(evolved) - 1.0) > 1e-10:
        problems.append("evolution norm")
    rho = DensityMatrix(oracles.random_density_matrix(rng, 16), layout)
    rho_t = DensityMatrix(u @ rho.matrix @ u.conj().T, layout, _trusted=True)
    if abs(rho_t.purity() - rho.purity()) > 1e-10:
        problems.append("evolution purity")
    if abs(entropy(rho_t) - entropy(rho)) > 1e-9:
        problems.append("entropy unitary invariance")

    sigma = DensityMatrix(oracles.random_density_matrix(rng, 16), layout)
    lam = 0.3
    mix = DensityMatrix(
        lam * rho.matrix + (1 - lam) * sigma.matrix, layout, _trusted=True
    )
    lhs = partial_trace(mix, ["S", "E1"]).matrix
    rhs = lam * partial_trace(rho, ["S", "E1"]).matrix + (1 - lam) * partial_trace(
        sigma, ["S", "E1"]
    ).matrix
    if np.max(np.abs(lhs - rhs)) > 1e-12:
        problems.append("partial-trace mixture linearity")

    q_layout = SubsystemLayout(dims=(2, 2), labels=("S", "E1"))
    for _ in range(6):
        a = DensityMatrix(oracles.random_density_matrix(rng, 4), q_layout)
        b = DensityMatrix(oracles.random_density_matrix(rng, 4), q_layout)
        f1, f2 = uhlmann_fidelity(a, b), uhlmann_fidelity(b, a)
        if abs(f1 - f2) > 1e-10:
            problems.append("uhlmann symmetry")
        if trace_distance(a, b) > np.sqrt(1.0 - f1) + 1e-9:
            problems.append("fuchs-van-de-graaf")
        chi = holevo_chi(a).value
        acc = accessible_mi_two_sided(a)
        qmi = quantum_mi(a)
        if not (acc <= chi + 1e-6 and chi <= qmi + 1e-6):
            problems.append("information hierarchy")
        basis = MeasurementBasis.from_angles(
            rng.uniform(0, np.pi), rng.uniform(0, 2 * np.pi)
        )
        probs, conds = condition_on_system(a, basis)
        mixture = sum(
            p * c.matrix for p, c in zip(probs, conds) if c is not None
        )
        rho_f = partial_trace(a, ["E1"]).matrix
        if np.max(np.abs(mixture - rho_f)) > 1e-10:
            problems.append("mixture reconstruction")
    return not problems, ("violations: " + ", ".join(sorted(set(problems)))) if problems else "all invariants hold"


def cmd_selftest(args) -> int:
    seed = args.seed
    checks = [
        ("dephasing-closed-form", lambda: _check_dephasing_closed_form()),
        ("chi-at-quarter-period", lambda: _check_quarter_period_chi()),
        ("redundancy-brute-equivalence", lambda: _check_redundancy_brute(seed)),
        ("optimizer-vs-dense-grid", lambda: _check_optimizer_vs_grid(seed)),
        ("module-invariants", lambda: _check_invariants(seed)),
    ]
    failures = 0
    print(f"self test (seed {seed}, version {VERSION})")
    for name, fn in checks:
        ok, detail = fn()
        status = "PASS" if ok else "FAIL"
        if not ok:
            failures += 1
        print(f"[{status}] {name}: {detail}")
    print(f"{len(checks) - failures}/{len(checks)} checks passed")
    return EXIT_OK if failures == 0 else EXIT_FAILURE


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdarwin",
        description="Objectivity and pointer-state laboratory for the "
        "spin-star dephasing model with a non-commuting drive.",
    )
    parser.add_argument("--version", action="version", version=f"qdarwin {VERSION}")
    sub = parser.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="out", help="output directory (default: ./out)")
    common.add_argument(
        "--workers", type=int, default=None, help="worker processes (default: all cores)"
    )
    common.add_argument(
        "--threshold-mode",
        choices=("literal", "strict"),
        default=None,
        help="override the redundancy threshold direction",
    )
    common.add_argument(
        "--quantifier",
        choices=("holevo", "two-sided"),
        default=None,
        help="override the information quantifier",
    )

    p_fig = sub.add_parser("figure", parents=[common], help="reproduce a built-in figure")
    p_fig.add_argument("tag", help="one of " + ", ".join(FIGURE_TAGS))
    p_fig.set_defaults(func=cmd_figure)

    p_sweep = sub.add_parser("sweep", parents=[common], help="run a sweep from a YAML config")
    p_sweep.add_argument("config", help="path to the YAML sweep configuration")
    p_sweep.set_defaults(func=cmd_sweep)

    p_self = sub.add_parser("selftest", help="run the oracle and invariant self test")
    p_self.add_argument("--seed", type=int, default=20240, help="random-probe seed")
    p_self.set_defaults(func=cmd_selftest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(file=sys.stderr)
        return EXIT_USAGE
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
