"""Command-line harness for simulation, asymptotics, sweeps, and self-checks.

Four subcommands:

* ``simulate`` evolves a walk and writes the final distribution plus a
  moment time series (CSV pair or a single JSON document),
* ``moments`` evaluates the asymptotic moment coefficients for a model,
* ``sweep`` maps a spreading objective over a chart grid, optionally
  refining the best grid point,
* ``verify`` runs the internal consistency suite that cross-checks the
  three computational paths and the baselines against each other.

All file output is deterministic: fixed seeds, no timestamps, floats
printed with 17 significant digits so values round-trip exactly.  Wall
time is reported on stderr only.  Exit codes: 0 success, 1 bad usage or
invalid input, 2 verification failure, 3 quadrature non-convergence.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import optimize
from .coined import (
    D1,
    D2,
    CoinedState,
    grover_moment_coefficients,
    grover_step,
    grover_walk,
    hadamard_moment_coefficients,
    hadamard_step,
    hadamard_walk,
)
from .lattice import (
    InitialCondition,
    LatticeState,
    Tessellation1D,
    Tessellation2D,
    build_reflection,
    evolve,
    probability_distribution,
)
from .momentum import evolve_momentum
from .moments import (
    MomentReport,
    QuadratureError,
    closed_form_variance_1d,
    even_moment_coefficient_1d,
    first_moment_coefficients_2d,
    moment_report,
    msd_coefficient_2d,
    odd_moment_coefficient_1d,
    second_moment_coefficients_2d,
    variance_coefficient_1d,
)

__all__ = ["RunConfig", "ResultRecord", "main"]

_MODELS = ("coinless1d", "coinless2d", "hadamard", "grover2d")


def _fmt(x: float) -> str:
    return f"{x:.17g}"


_PI_PATTERN = re.compile(
    r"^(?P<sign>[+-]?)(?P<mult>\d+(?:\.\d*)?)?\s*\*?\s*pi(?:\s*/\s*(?P<div>\d+(?:\.\d*)?))?$"
)


def parse_angle(text: str) -> float:
    """Parse an angle: plain float or a pi literal like 'pi/3' or '2pi/3'."""
    cleaned = text.strip().lower().replace(" ", "")
    match = _PI_PATTERN.match(cleaned)
    if match:
        value = np.pi
        if match.group("mult"):
            value *= float(match.group("mult"))
        if match.group("div"):
            value /= float(match.group("div"))
        return -value if match.group("sign") == "-" else value
    try:
        return float(cleaned)
    except ValueError:
        raise ValueError(f"cannot parse angle {text!r}") from None


def parse_state(text: str, n: int) -> np.ndarray:
    """Parse n comma-separated complex amplitudes and normalize them.

    The 2-norm must already be within 1e-6 of 1; it is then snapped to 1
    exactly so downstream normalization checks are clean.
    """
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise ValueError(f"expected {n} comma-separated amplitudes, got {len(parts)}")
    try:
        values = np.array([complex(p.replace("i", "j")) for p in parts])
    except ValueError:
        raise ValueError(f"cannot parse amplitudes {text!r}") from None
    nrm = np.linalg.norm(values)
    if abs(nrm - 1.0) > 1e-6:
        raise ValueError(f"amplitudes have norm {nrm:.6f}, expected 1")
    return values / nrm


@dataclass
class RunConfig:
    """Everything one subcommand invocation needs, parsed and validated."""

    command: str
    model: str | None = None
    steps: tuple[int, ...] = ()
    alpha: float = 0.0
    phi: float = 0.0
    beta: float = np.pi / 2
    phi2: float = 0.0
    state: np.ndarray | None = None
    threshold: float = 1e-12
    fmt: str = "csv"
    output: str | None = None
    manifold: str = "coinless1d-variance"
    resolution: int = 65
    refine: bool = False
    seed: int = 0
    checks: tuple[str, ...] = ()


@dataclass
class ResultRecord:
    """What a simulation run produced, before serialization."""

    config: RunConfig
    reports: list[MomentReport] = field(default_factory=list)
    columns: tuple[str, ...] = ()
    rows: list[tuple] = field(default_factory=list)
    wall_time: float = 0.0


# ---------------------------------------------------------------------------
# simulate


def _distribution_rows(state, threshold: float):
    if isinstance(state, LatticeState):
        coords, probs = probability_distribution(state, threshold=threshold)
        if state.ndim == 1:
            return ("x", "probability"), [
                (int(x), float(p)) for x, p in zip(coords, probs)
            ]
        return ("x", "y", "probability"), [
            (int(x), int(y), float(p)) for (x, y), p in zip(coords, probs)
        ]
    p = state.probabilities()
    if state.ndim == 1:
        keep = np.flatnonzero(p >= threshold)
        xs = state.coordinates(0)[keep]
        return ("x", "probability"), [
            (int(x), float(v)) for x, v in zip(xs, p[keep])
        ]
    ix, iy = np.nonzero(p >= threshold)
    xs, ys = state.coordinates(0)[ix], state.coordinates(1)[iy]
    return ("x", "y", "probability"), [
        (int(x), int(y), float(v)) for x, y, v in zip(xs, ys, p[ix, iy])
    ]


def _coined_report(state: CoinedState, t: int) -> MomentReport:
    mx = state.moment(1, 0)
    mx2 = state.moment(2, 0)
    var_x = mx2 - mx * mx
    if state.ndim == 1:
        return MomentReport(t, mx, mx2, var_x, var_x, "empirical")
    my = state.moment(1, 1)
    my2 = state.moment(2, 1)
    var_y = my2 - my * my
    return MomentReport(t, mx, mx2, var_x, var_x + var_y, "empirical",
                        mean_y=my, mean_y2=my2, var_y=var_y)


def cmd_simulate(config: RunConfig) -> ResultRecord:
    """Run the configured walk, collecting moments at every requested step."""
    started = time.perf_counter()
    wanted = set(config.steps)
    total = max(config.steps)
    reports: list[MomentReport] = []

    if config.model in ("coinless1d", "coinless2d"):
        if config.model == "coinless1d":
            tess = Tessellation1D(config.alpha, config.phi, config.beta,
                                  config.phi2)
            amplitudes = {(i,): v for i, v in enumerate(config.state)}
        else:
            tess = Tessellation2D()
            cell = config.state
            amplitudes = {
                (0, 0): cell[0], (0, 1): cell[1],
                (1, 0): cell[2], (1, 1): cell[3],
            }
        init = InitialCondition({k: v for k, v in amplitudes.items() if v != 0})
        extent = (4 * total + 8,) * init.ndim
        origin = tuple(n // 2 for n in extent)
        state = init.embed(extent, origin)
        r0 = build_reflection(tess, 0)
        r1 = build_reflection(tess, 1)
        if 0 in wanted:
            reports.append(moment_report(state, 0))
        amps = state.amps
        for t in range(1, total + 1):
            amps = r1.apply(r0.apply(amps))
            if t in wanted:
                reports.append(
                    moment_report(LatticeState(amps, origin), t)
                )
        final: LatticeState | CoinedState = LatticeState(amps, origin)
    elif config.model == "hadamard":
        extent = 2 * total + 8
        origin = extent // 2
        amps = np.zeros((2, extent), dtype=complex)
        amps[0, origin] = np.cos(config.alpha / 2.0)
        amps[1, origin] = np.sin(config.alpha / 2.0) * np.exp(1j * config.phi)
        state = CoinedState(amps, (origin,))
        if 0 in wanted:
            reports.append(_coined_report(state, 0))
        for t in range(1, total + 1):
            state = hadamard_step(state)
            if t in wanted:
                reports.append(_coined_report(state, t))
        final = state
    else:
        extent = 2 * total + 8
        origin = extent // 2
        amps = np.zeros((4, extent, extent), dtype=complex)
        amps[:, origin, origin] = config.state
        state = CoinedState(amps, (origin, origin))
        if 0 in wanted:
            reports.append(_coined_report(state, 0))
        for t in range(1, total + 1):
            state = grover_step(state)
            if t in wanted:
                reports.append(_coined_report(state, t))
        final = state

    columns, rows = _distribution_rows(final, config.threshold)
    return ResultRecord(config, reports, columns, rows,
                        time.perf_counter() - started)


def _moment_columns(reports: list[MomentReport]) -> tuple[str, ...]:
    if reports and reports[0].mean_y is not None:
        return ("t", "mean_x", "mean_x2", "mean_y", "mean_y2",
                "var_x", "var_y", "sigma2_total")
    return ("t", "mean_x", "mean_x2", "var_x", "sigma2_total")


def _moment_row(report: MomentReport) -> tuple:
    if report.mean_y is not None:
        return (report.t, report.mean_x, report.mean_x2, report.mean_y,
                report.mean_y2, report.var_x, report.var_y,
                report.sigma2_total)
    return (report.t, report.mean_x, report.mean_x2, report.var_x,
            report.sigma2_total)


def _write_csv(path: str, columns: tuple[str, ...], rows: list[tuple]) -> None:
    with open(path, "w", encoding="ascii") as handle:
        handle.write(",".join(columns) + "\n")
        for row in rows:
            handle.write(
                ",".join(
                    str(v) if isinstance(v, int) else _fmt(v) for v in row
                )
                + "\n"
            )


def _simulate_json(record: ResultRecord) -> dict:
    config = record.config
    params: dict = {"model": config.model, "steps": list(config.steps),
                    "threshold": config.threshold}
    if config.model in ("coinless1d", "hadamard"):
        params["alpha"] = config.alpha
        params["phi"] = config.phi
    if config.model == "coinless1d":
        params["beta"] = config.beta
        params["phi2"] = config.phi2
    if config.state is not None:
        params["initial"] = [[v.real, v.imag] for v in config.state]
    return {
        "config": params,
        "moments": [r.as_dict() for r in record.reports],
        "distribution": {
            "columns": list(record.columns),
            "rows": [list(r) for r in record.rows],
        },
    }


def _emit_simulate(record: ResultRecord) -> None:
    config = record.config
    prefix = config.output or "walk"
    if config.fmt == "json":
        path = prefix if prefix.endswith(".json") else prefix + ".json"
        with open(path, "w", encoding="ascii") as handle:
            json.dump(_simulate_json(record), handle, indent=1)
            handle.write("\n")
        written = [path]
    else:
        dist_path = prefix + "_distribution.csv"
        mom_path = prefix + "_moments.csv"
        _write_csv(dist_path, record.columns, record.rows)
        _write_csv(mom_path, _moment_columns(record.reports),
                   [_moment_row(r) for r in record.reports])
        written = [dist_path, mom_path]
    print(
        f"wrote {', '.join(written)} in {record.wall_time:.2f}s",
        file=sys.stderr,
    )


# ---------------------------------------------------------------------------
# moments


def cmd_moments(config: RunConfig) -> dict:
    """Asymptotic moment coefficients of the configured model."""
    if config.model == "coinless1d":
        tess = Tessellation1D(config.alpha, config.phi, config.beta,
                              config.phi2)
        first = odd_moment_coefficient_1d(tess)
        second = even_moment_coefficient_1d(tess)
        variance = variance_coefficient_1d(tess)
        value, branch = closed_form_variance_1d(
            config.alpha, config.beta, reference=variance
        )
        return {
            "model": config.model,
            "alpha": config.alpha, "phi1": config.phi,
            "beta": config.beta, "phi2": config.phi2,
            "first": first, "second": second, "variance": variance,
            "method": "quadrature",
            "closed_form": {"variance": value, "branch": branch,
                            "method": "closed-form"},
        }
    if config.model == "coinless2d":
        x1, y1 = first_moment_coefficients_2d(config.state)
        x2, y2 = second_moment_coefficients_2d(config.state)
        msd = msd_coefficient_2d(config.state)
        return {
            "model": config.model,
            "initial": [[v.real, v.imag] for v in config.state],
            "mean_x": x1, "mean_y": y1, "mean_x2": x2, "mean_y2": y2,
            "msd": msd,
            "sigma2_total": msd - x1 * x1 - y1 * y1,
            "method": "closed-form",
        }
    if config.model == "hadamard":
        first, second = hadamard_moment_coefficients(config.alpha, config.phi)
        return {
            "model": config.model,
            "alpha": config.alpha, "phi": config.phi,
            "first": first, "second": second,
            "variance": second - first * first,
            "method": "closed-form",
        }
    x1, y1, x2, y2 = grover_moment_coefficients(*config.state)
    return {
        "model": config.model,
        "coin": [[v.real, v.imag] for v in config.state],
        "mean_x": x1, "mean_y": y1, "mean_x2": x2, "mean_y2": y2,
        "sigma2_total": x2 + y2 - x1 * x1 - y1 * y1,
        "method": "closed-form",
    }


# ---------------------------------------------------------------------------
# sweep


def cmd_sweep(config: RunConfig) -> dict:
    """Grid sweep of a spreading objective, optional local refinement."""
    manifold = optimize.make_manifold(config.manifold)
    started = time.perf_counter()
    sweep = optimize.sweep_objective(manifold, config.resolution)
    summary = {
        "manifold": manifold.name,
        "resolution": config.resolution,
        "max_value": sweep.max_value,
        "argmax": [float(v) for v in sweep.argmax],
        "plateau_size": sweep.plateau_size,
        "method": "quadrature" if manifold.name == "coinless1d-variance"
        else "closed-form",
    }
    if manifold.ceiling is not None:
        summary["ceiling"] = manifold.ceiling
    if config.refine:
        best = optimize.refine_local(manifold, sweep.argmax, seed=config.seed)
        refined = {
            "params": [float(v) for v in best.params],
            "value": best.value,
            "evaluations": best.evaluations,
            "converged": best.converged,
        }
        if np.iscomplexobj(best.point):
            refined["point"] = [[v.real, v.imag] for v in best.point]
        else:
            refined["point"] = [float(v) for v in best.point]
        if manifold.locus is not None:
            report = optimize.verify_optimum_locus(best)
            refined["locus"] = report.locus
            refined["locus_distance"] = report.distance
            refined["on_locus"] = report.on_locus
        summary["refined"] = refined
    if config.output:
        names = manifold.param_names or tuple(
            f"param{i}" for i in range(manifold.nparams)
        )
        rows = []
        grids = np.meshgrid(*sweep.axes, indexing="ij")
        flat = [g.ravel() for g in grids]
        for i, value in enumerate(sweep.values.ravel()):
            rows.append(tuple(float(g[i]) for g in flat) + (float(value),))
        _write_csv(config.output, names + ("value",), rows)
    summary_json = json.dumps(summary, indent=1)
    print(summary_json)
    print(f"sweep finished in {time.perf_counter() - started:.2f}s",
          file=sys.stderr)
    return summary


# ---------------------------------------------------------------------------
# verify

# Each check returns (passed, details).  ``scale`` loosens the empirical
# tolerances as 1/t: rel(t) = 2.5 / t, i.e. 1.25% at the default t=200.


def _rel(t: int) -> float:
    return 2.5 / t


def _agree(measured: float, expected: float, tol: float) -> bool:
    return abs(measured - expected) <= tol


def _check_reflection_properties(t: int, rng: np.random.Generator):
    tess = Tessellation1D(*rng.uniform(0.0, np.pi, size=4))
    worst = 0.0
    for which in (0, 1):
        for periodic in (True, False):
            mat = build_reflection(tess, which, periodic=periodic).matrix((12,))
            eye = np.eye(12)
            worst = max(worst,
                        np.abs(mat @ mat.conj().T - eye).max(),
                        np.abs(mat @ mat - eye).max())
    mat2 = build_reflection(Tessellation2D(), 1).matrix((8, 8))
    eye = np.eye(64)
    worst = max(worst, np.abs(mat2 @ mat2.conj().T - eye).max(),
                np.abs(mat2 @ mat2 - eye).max())
    # locality: a 6-step walk must stay within 13 sites of the start
    state = evolve(InitialCondition.site(0), tess, 6)
    coords, probs = probability_distribution(state, threshold=0.0)
    outside = probs[np.abs(coords) > 13].sum()
    passed = worst <= 1e-12 and outside <= 1e-28
    return passed, {"operator_residual": worst, "escaped_probability": outside}


def _check_ballistic_1d(t: int, rng: np.random.Generator):
    tess = Tessellation1D(np.pi / 2, 0.0, np.pi / 2, 0.0)
    report = moment_report(evolve(InitialCondition.site(0), tess, t), t)
    drift = report.mean_x / t
    passed = _agree(drift, 2.0, 1e-12) and report.var_x / t ** 2 <= 1e-12
    return passed, {"drift": drift, "variance_rate": report.var_x / t ** 2}


def _check_variance_paths_1d(t: int, rng: np.random.Generator):
    alpha, beta = 1.1, 0.6
    tess = Tessellation1D(alpha, 0.2, beta, -0.7)
    quad = variance_coefficient_1d(tess)
    closed, branch = closed_form_variance_1d(alpha, beta, reference=quad)
    report = moment_report(evolve(InitialCondition.site(0), tess, t), t)
    empirical = report.var_x / t ** 2
    tol = _rel(t) * max(quad, 0.05)
    passed = _agree(empirical, quad, tol) and _agree(closed, quad, 1e-6)
    return passed, {"quadrature": quad, "closed_form": closed,
                    "branch": branch, "empirical": empirical,
                    "tolerance": tol}


def _check_phase_independence(t: int, rng: np.random.Generator):
    plain = Tessellation1D(1.1, 0.0, 0.6, 0.0)
    phased = Tessellation1D(1.1, 0.9, 0.6, -0.3)
    quad_gap = abs(variance_coefficient_1d(plain)
                   - variance_coefficient_1d(phased))
    p_plain = evolve(InitialCondition.site(0), plain, t).probabilities()
    p_phased = evolve(InitialCondition.site(0), phased, t).probabilities()
    site_gap = float(np.abs(p_plain - p_phased).max())
    passed = quad_gap <= 1e-7 and site_gap <= 1e-12
    return passed, {"quadrature_gap": quad_gap, "distribution_gap": site_gap}


def _check_crosspath_1d(t: int, rng: np.random.Generator):
    tess = Tessellation1D(*rng.uniform(0.0, np.pi, size=4))
    amps = rng.normal(size=2) + 1j * rng.normal(size=2)
    amps /= np.linalg.norm(amps)
    init = InitialCondition.pair(*amps)
    steps = min(t, 20)
    direct = evolve(init, tess, steps, extent=(64,), periodic=True)
    spectral = evolve_momentum(init, tess, steps, (64,))
    gap = float(np.abs(direct.amps - spectral.amps).max())
    return gap <= 1e-10, {"amplitude_gap": gap, "steps": steps}


def _check_crosspath_2d(t: int, rng: np.random.Generator):
    cell = rng.normal(size=4) + 1j * rng.normal(size=4)
    cell /= np.linalg.norm(cell)
    init = InitialCondition.cell(cell)
    steps = min(t, 8)
    direct = evolve(init, Tessellation2D(), steps, extent=(32, 32),
                    periodic=True)
    spectral = evolve_momentum(init, Tessellation2D(), steps, (32, 32))
    gap = float(np.abs(direct.amps - spectral.amps).max())
    return gap <= 1e-10, {"amplitude_gap": gap, "steps": steps}


def _check_moments_2d(t: int, rng: np.random.Generator):
    cell = rng.normal(size=4) + 1j * rng.normal(size=4)
    cell /= np.linalg.norm(cell)
    x1, y1 = first_moment_coefficients_2d(cell)
    x2, y2 = second_moment_coefficients_2d(cell)
    report = moment_report(evolve(InitialCondition.cell(cell),
                                  Tessellation2D(), t), t)
    measured = {
        "mean_x": report.mean_x / t, "mean_y": report.mean_y / t,
        "mean_x2": report.mean_x2 / t ** 2, "mean_y2": report.mean_y2 / t ** 2,
    }
    expected = {"mean_x": x1, "mean_y": y1, "mean_x2": x2, "mean_y2": y2}
    passed = all(
        _agree(measured[key], expected[key],
               _rel(t) * max(abs(expected[key]), 0.5))
        for key in measured
    )
    return passed, {"measured": measured, "expected": expected}


def _check_msd_uniform_2d(t: int, rng: np.random.Generator):
    cell = np.full(4, 0.5)
    closed = msd_coefficient_2d(cell)
    report = moment_report(evolve(InitialCondition.cell(cell),
                                  Tessellation2D(), t), t)
    empirical = (report.mean_x2 + report.mean_y2) / t ** 2
    passed = (_agree(closed, 8.0 * D2, 1e-12)
              and _agree(empirical, 8.0 * D2, _rel(t) * 8.0 * D2))
    return passed, {"closed_form": closed, "empirical": empirical,
                    "target": 8.0 * D2}


def _check_hadamard_baseline(t: int, rng: np.random.Generator):
    details = {}
    passed = True
    for alpha, phi in ((0.9, 0.5), (np.pi / 2, np.pi / 2)):
        state = hadamard_walk(alpha, phi, t)
        m2 = state.moment(2) / t ** 2
        passed = passed and _agree(m2, D1, _rel(t) * D1 * 2)
        details[f"second_moment({alpha:.3f},{phi:.3f})"] = m2
    state = hadamard_walk(0.0, 0.0, t)
    drift = state.moment(1) / t
    first, second = hadamard_moment_coefficients(0.0, 0.0)
    passed = passed and _agree(drift, D1, _rel(t) * D1 * 2)
    passed = passed and _agree(first, D1, 1e-12) and _agree(second, D1, 1e-12)
    details["drift(0,0)"] = drift
    details["second_moment_target"] = D1
    return passed, details


def _check_grover_baseline(t: int, rng: np.random.Generator):
    steps = min(t, 150)
    details = {}
    best = grover_walk(np.array([0.5, -0.5, -0.5, 0.5]), steps)
    report = _coined_report(best, steps)
    sigma2 = report.sigma2_total / steps ** 2
    passed = _agree(sigma2, D2, _rel(steps) * D2)
    details["sigma2_best"] = sigma2
    uniform = grover_walk(np.full(4, 0.5), steps)
    report = _coined_report(uniform, steps)
    sigma2_u = report.sigma2_total / steps ** 2
    target = 10.0 / (3.0 * np.pi) - 1.0
    passed = passed and _agree(sigma2_u, target, _rel(steps) * max(target, 0.05))
    details["sigma2_uniform"] = sigma2_u
    x_mover = grover_walk(np.array([0.0, 1.0, 0.0, 0.0]), steps)
    report = _coined_report(x_mover, steps)
    x1, y1, _, _ = grover_moment_coefficients(0.0, 1.0, 0.0, 0.0)
    tol = _rel(steps) * 0.5
    passed = passed and _agree(report.mean_x / steps, x1, tol)
    passed = passed and _agree(report.mean_y / steps, y1, tol)
    details["drift_x"] = report.mean_x / steps
    details["drift_x_expected"] = x1
    return passed, details


def _check_optimizer_recovery(t: int, rng: np.random.Generator):
    manifold = optimize.make_manifold("grover2d-sigma")
    sweep = optimize.sweep_objective(manifold, 17)
    best = optimize.refine_local(manifold, sweep.argmax, seed=1)
    locus = optimize.verify_optimum_locus(best)
    passed = abs(best.value - D2) <= 1e-6 and locus.on_locus
    details = {"grover_value": best.value, "grover_locus_distance":
               locus.distance}
    had = optimize.refine_local(optimize.make_manifold("hadamard-sigma"),
                                np.array([1.2, 2.8]), seed=1)
    passed = passed and abs(had.value - D1) <= 1e-9
    details["hadamard_value"] = had.value
    return passed, details


_CHECKS = (
    ("reflection-properties", _check_reflection_properties),
    ("ballistic-1d", _check_ballistic_1d),
    ("variance-paths-1d", _check_variance_paths_1d),
    ("phase-independence", _check_phase_independence),
    ("crosspath-1d", _check_crosspath_1d),
    ("crosspath-2d", _check_crosspath_2d),
    ("moments-2d", _check_moments_2d),
    ("msd-uniform-2d", _check_msd_uniform_2d),
    ("hadamard-baseline", _check_hadamard_baseline),
    ("grover-baseline", _check_grover_baseline),
    ("optimizer-recovery", _check_optimizer_recovery),
)


def cmd_verify(config: RunConfig) -> dict:
    """Run the internal consistency checks and summarize as JSON."""
    t = max(config.steps) if config.steps else 200
    wanted = set(config.checks) if config.checks else None
    known = {name for name, _ in _CHECKS}
    if wanted and not wanted <= known:
        raise ValueError(f"unknown checks: {sorted(wanted - known)}")
    results = []
    started = time.perf_counter()
    for index, (name, func) in enumerate(_CHECKS):
        if wanted is not None and name not in wanted:
            continue
        rng = np.random.default_rng([config.seed, index])
        passed, details = func(t, rng)
        results.append({"name": name, "passed": bool(passed),
                        "details": _round_floats(details)})
    report = {
        "t": t,
        "seed": config.seed,
        "passed": all(r["passed"] for r in results),
        "checks": results,
    }
    print(json.dumps(report, indent=1))
    print(f"verify finished in {time.perf_counter() - started:.2f}s",
          file=sys.stderr)
    return report


def _round_floats(obj):
    if isinstance(obj, dict):
        return {k: _round_floats(v) for k, v in obj.items()}
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    return obj


# ---------------------------------------------------------------------------
# argument plumbing


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; keep 2 for verification failures
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(f"error: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="stagwalk",
                     description="Staggered quantum walk toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_model_args(p, models):
        p.add_argument("--model", choices=models, required=True)
        p.add_argument("--alpha", default="pi/2",
                       help="first patch angle, or the Bloch polar angle of "
                            "the coin start state (pi literals ok)")
        p.add_argument("--phi", default="0",
                       help="first patch phase / coin start phase")
        p.add_argument("--beta", default="pi/2", help="second patch angle")
        p.add_argument("--phi2", default="0", help="second patch phase")
        p.add_argument("--initial", default=None,
                       help="comma-separated complex amplitudes: start sites "
                            "(coinless1d), origin cell (coinless2d), or coin "
                            "state (grover2d)")

    sim = sub.add_parser("simulate", help="evolve a walk, write results")
    add_model_args(sim, _MODELS)
    sim.add_argument("--steps", required=True,
                     help="step count, or comma-separated counts for a series")
    sim.add_argument("--threshold", type=float, default=1e-12,
                     help="drop sites below this probability")
    sim.add_argument("--format", choices=("csv", "json"), default="csv")
    sim.add_argument("--output", default="walk",
                     help="file prefix (csv) or file name (json)")

    mom = sub.add_parser("moments", help="asymptotic moment coefficients")
    add_model_args(mom, _MODELS)
    mom.add_argument("--output", default=None, help="write JSON here instead "
                                                    "of stdout")

    swp = sub.add_parser("sweep", help="map a spreading objective on a grid")
    swp.add_argument("--manifold", choices=optimize.MANIFOLDS,
                     default="coinless1d-variance")
    swp.add_argument("--resolution", type=int, default=65)
    swp.add_argument("--refine", action="store_true",
                     help="polish the best grid point afterwards")
    swp.add_argument("--seed", type=int, default=0)
    swp.add_argument("--output", default=None, help="write the grid as CSV")

    ver = sub.add_parser("verify", help="run the internal consistency suite")
    ver.add_argument("--t", type=int, default=200,
                     help="time horizon; tolerances loosen as 1/t")
    ver.add_argument("--seed", type=int, default=0)
    ver.add_argument("--check", action="append", default=None,
                     metavar="NAME", help="run only this check (repeatable)")
    ver.add_argument("--list", action="store_true", dest="list_checks",
                     help="list check names and exit")
    return parser


def _config_from_args(args) -> RunConfig:
    config = RunConfig(command=args.command)
    if args.command in ("simulate", "moments"):
        config.model = args.model
        config.alpha = parse_angle(args.alpha)
        config.phi = parse_angle(args.phi)
        config.beta = parse_angle(args.beta)
        config.phi2 = parse_angle(args.phi2)
        if config.model == "coinless1d":
            text = args.initial or "1"
            values = [complex(p.replace("i", "j"))
                      for p in text.split(",")]
            if len(values) > 2:
                raise ValueError("coinless1d start takes 1 or 2 amplitudes")
            state = np.array(values, dtype=complex)
            nrm = np.linalg.norm(state)
            if abs(nrm - 1.0) > 1e-6:
                raise ValueError(f"start state norm {nrm:.6f}, expected 1")
            config.state = state / nrm
        elif config.model in ("coinless2d", "grover2d"):
            config.state = parse_state(args.initial or "0.5,0.5,0.5,0.5", 4)
    if args.command == "simulate":
        steps = tuple(sorted({int(s) for s in args.steps.split(",")}))
        if not steps or steps[0] < 0 or steps[-1] == 0:
            raise ValueError("steps must include a positive count")
        config.steps = steps
        config.threshold = args.threshold
        config.fmt = args.format
        config.output = args.output
    elif args.command == "moments":
        config.output = args.output
    elif args.command == "sweep":
        config.manifold = args.manifold
        config.resolution = args.resolution
        config.refine = args.refine
        config.seed = args.seed
        config.output = args.output
    elif args.command == "verify":
        config.steps = (args.t,)
        config.seed = args.seed
        config.checks = tuple(args.check) if args.check else ()
    return config


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "verify" and args.list_checks:
            for name, _ in _CHECKS:
                print(name)
            return 0
        config = _config_from_args(args)
    except SystemExit as exc:
        if exc.code in (0, None):
            return 0
        print(exc.code, file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1

    try:
        if config.command == "simulate":
            record = cmd_simulate(config)
            _emit_simulate(record)
            return 0
        if config.command == "moments":
            report = cmd_moments(config)
            text = json.dumps(_round_floats(report), indent=1)
            if config.output:
                with open(config.output, "w", encoding="ascii") as handle:
                    handle.write(text + "\n")
            else:
                print(text)
            return 0
        if config.command == "sweep":
            cmd_sweep(config)
            return 0
        report = cmd_verify(config)
        return 0 if report["passed"] else 2
    except QuadratureError as exc:
        print(f"quadrature failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
