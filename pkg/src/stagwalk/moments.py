"""Position moments: empirical, momentum-integral, and closed-form.

The long-time moments of the 1D walk are integrals of powers of the group
velocity over the reduced Brillouin zone.  They are computed here with a
midpoint rule under node doubling: the integrand is analytic (the apparent
band-edge poles of the velocity cancel against the vanishing numerator), so
convergence is spectral and a common node count can serve a whole parameter
grid.  The 2D moments have closed forms in the initial cell amplitudes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import LatticeState, Tessellation1D

__all__ = [
    "QuadratureError",
    "QuadratureSettings",
    "MomentReport",
    "empirical_moment",
    "moment_report",
    "odd_moment_coefficient_1d",
    "even_moment_coefficient_1d",
    "variance_coefficient_1d",
    "variance_coefficient_grid",
    "variance_surface_1d",
    "variance_branches_1d",
    "closed_form_variance_1d",
    "first_moment_coefficients_2d",
    "second_moment_coefficients_2d",
    "msd_coefficient_2d",
]


class QuadratureError(RuntimeError):
    """Momentum integral failed to converge within the node budget."""


@dataclass(frozen=True)
class QuadratureSettings:
    """Convergence policy for the momentum integrals.

    Node counts double from ``initial_nodes`` until successive values agree
    within ``max(rel_tol * |value|, abs_tol)``; exceeding ``max_nodes``
    raises ``QuadratureError``.  Nodes that land on a band edge (to within
    ``edge_eps`` in ``sin^2(theta)``) are re-evaluated ``edge_offset`` away,
    where the integrand limit is already reached.
    """

    initial_nodes: int = 256
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_nodes: int = 2 ** 18
    edge_eps: float = 1e-18
    edge_offset: float = 1e-6


_DEFAULT_SETTINGS = QuadratureSettings()


def _amplitude_terms(alpha, beta, phase, k):
    """Im of the diagonal entry and sin^2(theta), batched over momenta.

    ``sin^2(theta) = (Im A)^2 + |B|^2`` exactly, with ``|B|^2`` expanded in
    the same ``2k + phase`` argument; this form has no cancellation at the
    band edges, unlike ``1 - (Re A)^2``.
    """
    ca, sa = np.cos(alpha), np.sin(alpha)
    cb, sb = np.cos(beta), np.sin(beta)
    arg = 2.0 * k + phase
    im = sa * sb * np.sin(arg)
    b_sq = (sa * cb) ** 2 + (ca * sb) ** 2 \
        + 2.0 * sa * cb * ca * sb * np.cos(arg)
    return im, im * im + b_sq


def _velocity_power_nodes(tess: Tessellation1D, k: np.ndarray, n: int,
                          settings: QuadratureSettings) -> np.ndarray:
    """(d theta / d k) ** (2n) at the given momenta, band edges regularized."""
    phase = tess.phi1 + tess.phi2
    im, den = _amplitude_terms(tess.alpha, tess.beta, phase, k)
    bad = den < settings.edge_eps
    if np.any(bad):
        im2, den2 = _amplitude_terms(
            tess.alpha, tess.beta, phase, k[bad] + settings.edge_offset
        )
        g2 = np.where(
            den2 < settings.edge_eps,
            0.0,
            (2.0 * im2) ** (2 * n) / np.where(den2 < settings.edge_eps, 1.0, den2) ** n,
        )
        out = (2.0 * im) ** (2 * n) / np.where(bad, 1.0, den) ** n
        out[bad] = g2
        return out
    return (2.0 * im) ** (2 * n) / den ** n


def _converge_midpoint(eval_nodes, settings: QuadratureSettings) -> float:
    """Drive node doubling of a midpoint rule until the value settles.

    ``eval_nodes(k)`` must return integrand values; the returned number is
    the mean over the zone times 1/2 (i.e. the integral over [-pi, pi)
    divided by 4 pi).
    """
    nodes = settings.initial_nodes
    previous = None
    while nodes <= settings.max_nodes:
        h = 2.0 * np.pi / nodes
        k = -np.pi + (np.arange(nodes) + 0.5) * h
        value = float(eval_nodes(k).sum()) / (2.0 * nodes)
        if previous is not None and abs(value - previous) <= max(
            settings.rel_tol * abs(value), settings.abs_tol
        ):
            return value
        previous = value
        nodes *= 2
    raise QuadratureError(
        f"momentum integral not converged at {settings.max_nodes} nodes"
    )


def odd_moment_coefficient_1d(tess: Tessellation1D, order: int = 1,
                              settings: QuadratureSettings | None = None) -> float:
    """Leading coefficient of an odd position moment, <x^order> / t^order.

    ``order`` must be odd.  The coefficient is the zone average of
    ``(d theta/d k)^(order+1)`` divided by two; it depends only on the two
    patch angles, not on the phases (which merely translate the integrand).
    """
    if order < 1 or order % 2 == 0:
        raise ValueError("order must be a positive odd integer")
    settings = settings or _DEFAULT_SETTINGS
    if np.sin(tess.alpha) * np.sin(tess.beta) == 0.0:
        # the diagonal entry is k-independent and real: flat bands
        return 0.0
    n = (order + 1) // 2
    return _converge_midpoint(
        lambda k: _velocity_power_nodes(tess, k, n, settings), settings
    )


def even_moment_coefficient_1d(tess: Tessellation1D, order: int = 2,
                               settings: QuadratureSettings | None = None) -> float:
    """Leading coefficient of an even position moment, <x^order> / t^order.

    Exactly twice the odd coefficient one order below, because the two bands
    contribute with equal weight to even powers.
    """
    if order < 2 or order % 2:
        raise ValueError("order must be a positive even integer")
    return 2.0 * odd_moment_coefficient_1d(tess, order - 1, settings)


def variance_coefficient_1d(tess: Tessellation1D,
                            settings: QuadratureSettings | None = None) -> float:
    """Asymptotic variance growth rate, sigma^2 / t^2, from quadrature."""
    c = odd_moment_coefficient_1d(tess, 1, settings)
    return c * (2.0 - c)


def variance_coefficient_grid(alphas: Sequence[float], betas: Sequence[float],
                              settings: QuadratureSettings | None = None,
                              ) -> np.ndarray:
    """Variance coefficient on an (alpha, beta) grid at a common node count.

    All grid entries are converged together and share the final node count,
    which keeps the residual quadrature error a smooth function of the
    parameters (the argmax plateau of a sweep is then sharp to ~1e-12
    instead of being scattered by per-entry node choices).
    """
    settings = settings or _DEFAULT_SETTINGS
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    sa = np.sin(alphas)[:, None]
    ca = np.cos(alphas)[:, None]
    sb = np.sin(betas)[None, :]
    cb = np.cos(betas)[None, :]
    prod_s = sa * sb
    sq_sum = (sa * cb) ** 2 + (ca * sb) ** 2
    cross = 2.0 * sa * cb * ca * sb

    def grid_value(nodes: int) -> np.ndarray:
        h = 2.0 * np.pi / nodes
        total = np.zeros((alphas.size, betas.size))
        # stream the node axis so the (grid x nodes) array stays small
        for start in range(0, nodes, 8192):
            k = -np.pi + (np.arange(start, min(start + 8192, nodes)) + 0.5) * h
            cos2k = np.cos(2.0 * k)
            sin2k = np.sin(2.0 * k)
            im = prod_s[..., None] * sin2k
            # sin^2(theta) = (Im A)^2 + |B|^2, cancellation-free
            den = im * im + sq_sum[..., None] + cross[..., None] * cos2k
            bad = den < settings.edge_eps
            g = np.where(bad, 0.0, (4.0 * im * im) / np.where(bad, 1.0, den))
            if np.any(bad):
                # a shifted node is equivalent for the analytic integrand
                ia, ib, ik = np.nonzero(bad)
                k2 = k[ik] + settings.edge_offset
                im2 = prod_s[ia, ib] * np.sin(2.0 * k2)
                den2 = im2 * im2 + sq_sum[ia, ib] + cross[ia, ib] * np.cos(2.0 * k2)
                ok = den2 >= settings.edge_eps
                g[ia[ok], ib[ok], ik[ok]] = (
                    4.0 * im2[ok] ** 2 / den2[ok]
                )
            total += g.sum(axis=-1)
        return total / (2.0 * nodes)

    nodes = settings.initial_nodes
    previous = None
    while nodes <= settings.max_nodes:
        value = grid_value(nodes)
        if previous is not None:
            tol = np.maximum(settings.rel_tol * np.abs(value), settings.abs_tol)
            if np.all(np.abs(value - previous) <= tol):
                return value * (2.0 - value)
            # exact zeros (flat-band rows/columns) already agree; keep going
        previous = value
        nodes *= 2
    raise QuadratureError(
        f"grid momentum integral not converged at {settings.max_nodes} nodes"
    )


def variance_branches_1d(alpha: float, beta: float) -> dict[str, float]:
    """The four closed-form variance branches at these patch angles.

    Each expression is exact inside its own parameter region; outside it
    they differ.  Keys name the angle whose cosine dominates and its sign.
    """
    ca, cb = np.cos(alpha), np.cos(beta)
    return {
        "beta+": 4.0 * cb * (1.0 - cb),
        "beta-": -4.0 * cb * (1.0 + cb),
        "alpha+": 4.0 * ca * (1.0 - ca),
        "alpha-": -4.0 * ca * (1.0 + ca),
    }


def variance_surface_1d(alpha, beta):
    """Exact variance coefficient, vectorized over patch angles.

    The branch whose cosine magnitude dominates is the active one, which
    collapses the four expressions of ``variance_branches_1d`` into
    ``4 M (1 - M)`` with ``M = max(|cos alpha|, |cos beta|)``.  Unlike the
    quadrature this costs nothing and has no trouble spots, so it is the
    right objective for refinement paths that pass arbitrarily close to
    the alpha = beta line (where the integrand develops a notch narrower
    than any fixed node budget resolves).
    """
    m = np.maximum(np.abs(np.cos(alpha)), np.abs(np.cos(beta)))
    return 4.0 * m * (1.0 - m)


def closed_form_variance_1d(alpha: float, beta: float,
                            reference: float | None = None,
                            settings: QuadratureSettings | None = None,
                            ) -> tuple[float, str]:
    """Pick the closed-form variance branch that matches quadrature.

    Returns ``(value, branch)``.  ``reference`` may supply a precomputed
    quadrature value; otherwise one is computed here.  A branch must agree
    with the reference within 1e-6, else ``ValueError`` (which would mean
    the closed forms and the integral disagree, i.e. a real defect).
    """
    if reference is None:
        reference = variance_coefficient_1d(
            Tessellation1D(alpha, 0.0, beta, 0.0), settings
        )
    branches = variance_branches_1d(alpha, beta)
    best = min(branches, key=lambda name: abs(branches[name] - reference))
    if abs(branches[best] - reference) > 1e-6:
        raise ValueError(
            f"no closed-form branch matches quadrature value {reference!r}"
        )
    return branches[best], best


# ---------------------------------------------------------------------------
# 2D closed forms

_D2 = 1.0 - 2.0 / np.pi


def _cell(values) -> tuple[complex, complex, complex, complex]:
    a, b, c, d = (complex(v) for v in np.asarray(values, dtype=complex).ravel())
    nrm = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("cell amplitudes must be normalized")
    return a, b, c, d


def first_moment_coefficients_2d(values) -> tuple[float, float]:
    """Drift coefficients (<x>/t, <y>/t) for an origin-cell start.

    ``values`` are the four cell amplitudes on sites (0,0), (0,1), (1,0),
    (1,1) in that order.
    """
    a, b, c, d = _cell(values)
    x1 = _D2 * (
        abs(a) ** 2 + abs(b) ** 2 - abs(c) ** 2 - abs(d) ** 2
        + 2.0 * (a * np.conj(b)).real - 2.0 * (c * np.conj(d)).real
    )
    y1 = _D2 * (
        abs(a) ** 2 - abs(b) ** 2 + abs(c) ** 2 - abs(d) ** 2
        - 2.0 * (b * np.conj(d)).real + 2.0 * (a * np.conj(c)).real
    )
    return float(x1), float(y1)


def second_moment_coefficients_2d(values) -> tuple[float, float]:
    """Second-moment coefficients (<x^2>/t^2, <y^2>/t^2) for a cell start."""
    a, b, c, d = _cell(values)
    g1 = 2.0 * (a * np.conj(c)).real + 2.0 * (b * np.conj(d)).real
    g2 = 2.0 * (a * np.conj(b)).real + 2.0 * (c * np.conj(d)).real
    g3 = 2.0 * (b * np.conj(c)).real + 2.0 * (a * np.conj(d)).real
    k1 = 1.0 - 3.0 / np.pi
    k2 = 1.0 - 7.0 / (3.0 * np.pi)
    k3 = 10.0 / (3.0 * np.pi) - 1.0
    x2 = 2.0 * (_D2 + k1 * g1 + k2 * g2 + k3 * g3)
    y2 = 2.0 * (_D2 + k1 * g2 + k2 * g1 + k3 * g3)
    return float(x2), float(y2)


def msd_coefficient_2d(values) -> float:
    """Mean-square-displacement coefficient (<x^2 + y^2>/t^2) for a cell start."""
    x2, y2 = second_moment_coefficients_2d(values)
    return x2 + y2


# ---------------------------------------------------------------------------
# empirical moments


def empirical_moment(state: LatticeState, order: int, axis: int = 0) -> float:
    """Moment <coordinate^order> of the site distribution along an axis."""
    if state.periodic:
        raise ValueError("moments are not defined on a periodic lattice")
    p = state.probabilities()
    coords = state.coordinates(axis).astype(float)
    if state.ndim == 1:
        return float(np.sum(p * coords ** order))
    weights = p.sum(axis=1 - axis)
    return float(np.sum(weights * coords ** order))


@dataclass(frozen=True)
class MomentReport:
    """Position moments of one state (or one closed-form evaluation).

    1D reports leave the y fields as ``None``; ``sigma2_total`` is the sum
    of the per-axis variances.  ``method`` records how the numbers were
    obtained: "empirical", "quadrature", or "closed-form".
    """

    t: int
    mean_x: float
    mean_x2: float
    var_x: float
    sigma2_total: float
    method: str
    mean_y: float | None = None
    mean_y2: float | None = None
    var_y: float | None = None

    def as_dict(self) -> dict:
        out = {
            "t": self.t,
            "mean_x": self.mean_x,
            "mean_x2": self.mean_x2,
            "var_x": self.var_x,
        }
        if self.mean_y is not None:
            out.update(mean_y=self.mean_y, mean_y2=self.mean_y2,
                       var_y=self.var_y)
        out.update(sigma2_total=self.sigma2_total, method=self.method)
        return out


def moment_report(state: LatticeState, t: int) -> MomentReport:
    """Empirical moment summary of an evolved state after ``t`` steps."""
    mx = empirical_moment(state, 1, 0)
    mx2 = empirical_moment(state, 2, 0)
    var_x = mx2 - mx * mx
    if state.ndim == 1:
        return MomentReport(t, mx, mx2, var_x, var_x, "empirical")
    my = empirical_moment(state, 1, 1)
    my2 = empirical_moment(state, 2, 1)
    var_y = my2 - my * my
    return MomentReport(t, mx, mx2, var_x, var_x + var_y, "empirical",
                        mean_y=my, mean_y2=my2, var_y=var_y)
