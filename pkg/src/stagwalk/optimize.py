"""Search for walk parameters that maximize the spreading rate.

Every searchable family is wrapped as a ``ManifoldParameterization``: a box
of real chart parameters, a map from chart to model point (patch angles, or
a normalized cell / coin state), and a scalar objective built from the
asymptotic moment formulas.  States are charted over hypersphere angles so
normalization is automatic and the search stays unconstrained inside a box;
global phase is quotiented out when reporting.

The intended workflow is coarse-to-fine: ``sweep_objective`` maps the chart
on a uniform grid (the grid maximum undershoots a smooth interior optimum
by O(resolution^-2), so sweeps locate basins, not optima), and
``refine_local`` polishes with a bounded simplex search.  Known optimal
loci are registered so results can be checked with ``verify_optimum_locus``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.optimize

from . import moments
from .coined import D1, D2, hadamard_moment_coefficients
from .lattice import Tessellation1D
from .moments import QuadratureSettings

__all__ = [
    "ManifoldParameterization",
    "SweepResult",
    "SpreadOptimum",
    "LocusReport",
    "MANIFOLDS",
    "make_manifold",
    "sweep_objective",
    "refine_local",
    "verify_optimum_locus",
]

# argmax plateau width used by sweeps: grid values this close to the grid
# maximum count as co-maximal
_PLATEAU = 1e-9


@dataclass(frozen=True)
class ManifoldParameterization:
    """A search space: chart bounds, point map, and objective.

    ``point(params)`` maps chart parameters to the model's own
    parameterization (angle pairs or normalized state vectors, canonical up
    to global phase).  ``grid_objective``, when present, evaluates a full
    meshgrid of chart axes in one batched call.
    """

    name: str
    bounds: tuple[tuple[float, float], ...]
    point: Callable[[np.ndarray], np.ndarray]
    objective: Callable[[np.ndarray], float]
    grid_objective: Callable[[Sequence[np.ndarray]], np.ndarray] | None = None
    locus: str | None = None
    ceiling: float | None = None
    param_names: tuple[str, ...] = ()

    @property
    def nparams(self) -> int:
        return len(self.bounds)


@dataclass(frozen=True)
class SweepResult:
    """Uniform-grid map of an objective over a chart."""

    manifold: str
    axes: tuple[np.ndarray, ...]
    values: np.ndarray
    max_value: float
    argmax: np.ndarray
    argmax_set: np.ndarray

    @property
    def plateau_size(self) -> int:
        return self.argmax_set.shape[0]


@dataclass(frozen=True)
class SpreadOptimum:
    """Result of a local refinement."""

    manifold: str
    params: np.ndarray
    point: np.ndarray
    value: float
    evaluations: int
    converged: bool


@dataclass(frozen=True)
class LocusReport:
    """Distance of a located optimum from a registered optimal locus."""

    locus: str
    distance: float
    on_locus: bool
    nearest: np.ndarray


# ---------------------------------------------------------------------------
# charts


def _sphere_point(angles: np.ndarray) -> np.ndarray:
    """Hyperspherical chart: d angles -> unit vector in R^(d+1)."""
    angles = np.asarray(angles, dtype=float)
    d = angles.shape[-1]
    out = np.empty(angles.shape[:-1] + (d + 1,))
    running = np.ones(angles.shape[:-1])
    for i in range(d):
        out[..., i] = running * np.cos(angles[..., i])
        running = running * np.sin(angles[..., i])
    out[..., d] = running
    return out


def _pairs_to_cells(points: np.ndarray) -> np.ndarray:
    """Real 8-vectors -> complex 4-vectors, consecutive (re, im) pairs."""
    return points[..., 0::2] + 1j * points[..., 1::2]


def canonical_cell(cell: np.ndarray) -> np.ndarray:
    """Quotient out the global phase: first significant entry real >= 0."""
    cell = np.asarray(cell, dtype=complex)
    mags = np.abs(cell)
    lead = int(np.argmax(mags > 1e-12 * max(mags.max(), 1e-300)))
    phase = cell[lead] / max(mags[lead], 1e-300)
    return cell * np.conj(phase)


def _sphere_bounds(d: int) -> tuple[tuple[float, float], ...]:
    # last angle sweeps the full circle, the others half
    return tuple([(0.0, np.pi)] * (d - 1) + [(0.0, 2.0 * np.pi)])


# batched closed forms over cell arrays of shape (..., 4)


def _msd_batch(cells: np.ndarray) -> np.ndarray:
    a, b, c, d = (cells[..., i] for i in range(4))
    g1 = 2.0 * (a * np.conj(c)).real + 2.0 * (b * np.conj(d)).real
    g2 = 2.0 * (a * np.conj(b)).real + 2.0 * (c * np.conj(d)).real
    g3 = 2.0 * (b * np.conj(c)).real + 2.0 * (a * np.conj(d)).real
    k12 = 2.0 - 3.0 / np.pi - 7.0 / (3.0 * np.pi)
    k3 = 10.0 / (3.0 * np.pi) - 1.0
    return 4.0 * D2 + 2.0 * k12 * (g1 + g2) + 4.0 * k3 * g3


def _grover_sigma2_batch(cells: np.ndarray) -> np.ndarray:
    a, b, c, d = (cells[..., i] for i in range(4))
    pi = np.pi
    x1 = 0.5 * D2 * (
        np.abs(b) ** 2 - np.abs(c) ** 2 - ((a + d) * np.conj(b - c)).real
    )
    y1 = 0.5 * D2 * (
        np.abs(a) ** 2 - np.abs(d) ** 2 - ((a - d) * np.conj(b + c)).real
    )
    x2 = (
        (1.0 + np.abs(b) ** 2 + np.abs(c) ** 2) / (6.0 * pi)
        + np.abs(a + d) ** 2 / (12.0 * pi)
        + (0.5 - 19.0 / (12.0 * pi)) * np.abs(b - c) ** 2
        - (0.5 - 4.0 / (3.0 * pi)) * ((a + d) * np.conj(b + c)).real
    )
    y2 = (
        (1.0 + np.abs(a) ** 2 + np.abs(d) ** 2) / (6.0 * pi)
        + np.abs(b + c) ** 2 / (12.0 * pi)
        + (0.5 - 19.0 / (12.0 * pi)) * np.abs(a - d) ** 2
        - (0.5 - 4.0 / (3.0 * pi)) * ((b + c) * np.conj(a + d)).real
    )
    return x2 + y2 - x1 ** 2 - y1 ** 2


def _hadamard_sigma2(alpha: float, phi: float) -> float:
    first, second = hadamard_moment_coefficients(alpha, phi)
    return second - first * first


# ---------------------------------------------------------------------------
# the registry


def _variance_manifold(settings: QuadratureSettings) -> ManifoldParameterization:
    def objective(params):
        # refinement wanders arbitrarily close to alpha = beta, where the
        # quadrature integrand has a notch no fixed node budget resolves;
        # the sweep below stays on quadrature (coarse grids never get that
        # close) so the two stay mutually checking
        return float(moments.variance_surface_1d(params[0], params[1]))

    def grid_objective(axes):
        return moments.variance_coefficient_grid(axes[0], axes[1], settings)

    return ManifoldParameterization(
        name="coinless1d-variance",
        bounds=((0.0, np.pi), (0.0, np.pi)),
        point=lambda p: np.asarray(p, dtype=float),
        objective=objective,
        grid_objective=grid_objective,
        locus="coinless1d-variance",
        ceiling=1.0,
        param_names=("alpha", "beta"),
    )


def _cell_manifold(name: str, batch: Callable, complex_chart: bool,
                   locus: str | None, ceiling: float) -> ManifoldParameterization:
    d = 7 if complex_chart else 3

    def point(params):
        coords = _sphere_point(np.asarray(params, dtype=float))
        cell = _pairs_to_cells(coords) if complex_chart else coords.astype(complex)
        return canonical_cell(cell)

    def objective(params):
        coords = _sphere_point(np.asarray(params, dtype=float))
        cell = _pairs_to_cells(coords) if complex_chart else coords.astype(complex)
        return float(batch(cell))

    def grid_objective(axes):
        mesh = np.meshgrid(*axes, indexing="ij")
        angles = np.stack(mesh, axis=-1)
        coords = _sphere_point(angles)
        cells = _pairs_to_cells(coords) if complex_chart else coords.astype(complex)
        return batch(cells)

    return ManifoldParameterization(
        name=name,
        bounds=_sphere_bounds(d),
        point=point,
        objective=objective,
        grid_objective=grid_objective,
        locus=locus,
        ceiling=ceiling,
        param_names=tuple(f"theta{i + 1}" for i in range(d)),
    )


def _hadamard_manifold() -> ManifoldParameterization:
    def grid_objective(axes):
        a, p = np.meshgrid(axes[0], axes[1], indexing="ij")
        drift = D1 * (1.0 + np.sin(a) * np.cos(p))
        return D1 - drift ** 2

    return ManifoldParameterization(
        name="hadamard-sigma",
        bounds=((0.0, np.pi), (0.0, 2.0 * np.pi)),
        point=lambda p: np.asarray(p, dtype=float),
        objective=lambda p: _hadamard_sigma2(p[0], p[1]),
        grid_objective=grid_objective,
        locus="hadamard-sigma",
        ceiling=D1,
        param_names=("alpha", "phi"),
    )


def make_manifold(name: str,
                  settings: QuadratureSettings | None = None,
                  ) -> ManifoldParameterization:
    """Build a registered search manifold by name.

    Names: "coinless1d-variance" (patch angles, quadrature objective),
    "coinless2d-msd" / "coinless2d-msd-complex" (origin cell on the real or
    complex unit sphere, mean-square-displacement objective),
    "grover2d-sigma" / "grover2d-sigma-complex" (coin state, total-variance
    objective), "hadamard-sigma" (initial coin angles, variance objective).
    """
    if name == "coinless1d-variance":
        # quadrature noise must sit below the refiner's fatol
        return _variance_manifold(
            settings or QuadratureSettings(rel_tol=1e-10, abs_tol=1e-13)
        )
    if name == "coinless2d-msd":
        return _cell_manifold(name, _msd_batch, False, "coinless2d-msd", 8.0 * D2)
    if name == "coinless2d-msd-complex":
        return _cell_manifold(name, _msd_batch, True, None, 8.0 * D2)
    if name == "grover2d-sigma":
        return _cell_manifold(name, _grover_sigma2_batch, False,
                              "grover2d-sigma", D2)
    if name == "grover2d-sigma-complex":
        return _cell_manifold(name, _grover_sigma2_batch, True,
                              "grover2d-sigma", D2)
    if name == "hadamard-sigma":
        return _hadamard_manifold()
    raise ValueError(f"unknown manifold {name!r}")


MANIFOLDS = (
    "coinless1d-variance",
    "coinless2d-msd",
    "coinless2d-msd-complex",
    "grover2d-sigma",
    "grover2d-sigma-complex",
    "hadamard-sigma",
)


# ---------------------------------------------------------------------------
# sweep and refine


def sweep_objective(manifold: ManifoldParameterization, resolution: int,
                    ) -> SweepResult:
    """Evaluate the objective on a uniform chart grid, endpoints included.

    ``resolution`` is the number of points per chart axis.  The result
    records the grid maximum and the argmax plateau (every grid point within
    1e-9 of the maximum); a smooth interior optimum off the grid makes the
    grid maximum low by O(resolution^-2).
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    if resolution ** manifold.nparams > 2 ** 24:
        raise ValueError("grid too large; lower the resolution")
    axes = tuple(
        np.linspace(lo, hi, resolution) for lo, hi in manifold.bounds
    )
    if manifold.grid_objective is not None:
        values = np.asarray(manifold.grid_objective(axes), dtype=float)
    else:
        values = np.empty(tuple(len(ax) for ax in axes))
        for idx in np.ndindex(values.shape):
            values[idx] = manifold.objective(
                np.array([ax[i] for ax, i in zip(axes, idx)])
            )
    max_value = float(values.max())
    plateau = np.argwhere(values >= max_value - _PLATEAU)
    params = np.column_stack(
        [axes[dim][plateau[:, dim]] for dim in range(len(axes))]
    )
    best = np.unravel_index(int(values.argmax()), values.shape)
    argmax = np.array([axes[dim][i] for dim, i in enumerate(best)])
    return SweepResult(manifold.name, axes, values, max_value, argmax, params)


def refine_local(manifold: ManifoldParameterization, start,
                 *, restarts: int = 8, seed: int = 0, xatol: float = 1e-8,
                 fatol: float = 1e-9, maxfev: int = 10 ** 4) -> SpreadOptimum:
    """Polish a candidate optimum with a bounded Nelder-Mead search.

    Runs the simplex search from ``start`` and from ``restarts - 1`` jittered
    copies (5% of each bound range, seeded), keeping the best result.  The
    returned value is the maximum found; ``converged`` reports whether at
    least one restart terminated on its tolerances rather than the budget.
    """
    lo = np.array([b[0] for b in manifold.bounds])
    hi = np.array([b[1] for b in manifold.bounds])
    start = np.clip(np.asarray(start, dtype=float), lo, hi)
    if start.shape != (manifold.nparams,):
        raise ValueError("start has the wrong number of chart parameters")
    rng = np.random.default_rng(seed)
    starts = [start]
    while len(starts) < restarts:
        jitter = rng.normal(0.0, 0.05, size=start.size) * (hi - lo)
        starts.append(np.clip(start + jitter, lo, hi))
    best = None
    evaluations = 0
    converged = False
    for x0 in starts:
        res = scipy.optimize.minimize(
            lambda p: -manifold.objective(p),
            x0,
            method="Nelder-Mead",
            bounds=manifold.bounds,
            options={"xatol": xatol, "fatol": fatol, "maxfev": maxfev},
        )
        evaluations += int(res.nfev)
        converged = converged or bool(res.success)
        if best is None or -res.fun > -best.fun:
            best = res
    return SpreadOptimum(
        manifold=manifold.name,
        params=np.asarray(best.x, dtype=float),
        point=manifold.point(best.x),
        value=float(-best.fun),
        evaluations=evaluations,
        converged=converged,
    )


# ---------------------------------------------------------------------------
# known optimal loci


def _segment_distance(x: float, y: float, y_fixed: float,
                      x_lo: float, x_hi: float) -> tuple[float, np.ndarray]:
    xn = min(max(x, x_lo), x_hi)
    return float(np.hypot(x - xn, y - y_fixed)), np.array([xn, y_fixed])


def _angle_locus_distance(point: np.ndarray) -> tuple[float, np.ndarray]:
    # union of four segments: one angle at pi/3 or 2pi/3, the other within
    # [pi/3, 2pi/3]
    third, two_thirds = np.pi / 3.0, 2.0 * np.pi / 3.0
    alpha, beta = float(point[0]), float(point[1])
    candidates = []
    for fixed in (third, two_thirds):
        d, near = _segment_distance(alpha, beta, fixed, third, two_thirds)
        candidates.append((d, near))
        d, near = _segment_distance(beta, alpha, fixed, third, two_thirds)
        candidates.append((d, near[::-1]))
    return min(candidates, key=lambda item: item[0])


def _phase_invariant_distance(cell: np.ndarray, target: np.ndarray,
                              ) -> tuple[float, np.ndarray]:
    cell = np.asarray(cell, dtype=complex)
    overlap = np.vdot(target, cell)
    dist = np.sqrt(max(0.0, 2.0 - 2.0 * abs(overlap)))
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(dist), target * phase


_CELL_TARGETS = {
    "coinless2d-msd": np.full(4, 0.5, dtype=complex),
    "grover2d-sigma": np.array([0.5, -0.5, -0.5, 0.5], dtype=complex),
}


def verify_optimum_locus(optimum, locus: str | None = None,
                         *, tolerance: float = 1e-4) -> LocusReport:
    """Check that a located optimum sits on the known optimal locus.

    ``optimum`` is a ``SpreadOptimum`` (its manifold's registered locus is
    used unless ``locus`` overrides it) or a bare model point with ``locus``
    given explicitly.  Distances are Euclidean in the model space, with
    global phase quotiented out for state-vector loci.
    """
    if isinstance(optimum, SpreadOptimum):
        name = locus or optimum.manifold
        point = optimum.point
    else:
        if locus is None:
            raise ValueError("a bare point needs an explicit locus name")
        name = locus
        point = np.asarray(optimum)
    if name == "coinless1d-variance":
        dist, nearest = _angle_locus_distance(np.asarray(point, dtype=float))
    elif name in _CELL_TARGETS:
        dist, nearest = _phase_invariant_distance(point, _CELL_TARGETS[name])
    elif name == "hadamard-sigma":
        target = np.array([np.pi / 2.0, np.pi])
        dist = float(np.linalg.norm(np.asarray(point, dtype=float) - target))
        nearest = target
    else:
        raise ValueError(f"no optimal locus registered under {name!r}")
    return LocusReport(name, dist, dist <= tolerance, nearest)
