"""Momentum-space path: reduced evolution operators and staggered Fourier.

Because the two patch reflections are invariant under translation by two
sites per axis, the walk block-diagonalizes over plane waves with a
two-site (1D) or 2x2-cell (2D) internal structure.  Momenta live in a
half-width Brillouin zone ``[0, pi)`` per axis; the internal space carries
the site parity (or parities).  This module builds the reduced operator at
fixed momentum, its spectral decomposition in closed form with a generic
fallback, and a full evolution routine on periodic lattices that the
direct-evolution path can be checked against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .lattice import InitialCondition, LatticeState, Tessellation1D

__all__ = [
    "BandEdgeError",
    "ReducedOperator1D",
    "ReducedOperator2D",
    "EigenSystem",
    "reduced_operator_1d",
    "reduced_operator_2d",
    "eigensystem_1d",
    "eigensystem_2d",
    "dispersion_derivative_1d",
    "staggered_momenta",
    "staggered_components",
    "staggered_synthesis",
    "evolve_momentum",
]

# below this value of sin(theta) the spectral gap is too closed for the
# closed-form eigenvectors and for the group velocity
_EDGE_SIN = 1e-9


class BandEdgeError(ZeroDivisionError):
    """Group velocity requested at a closing of the dispersion band."""


@dataclass(frozen=True)
class ReducedOperator1D:
    """One-momentum block of the 1D walk.

    The block acts on (even-site, odd-site) plane-wave components and has
    the unitary form ``[[A, -conj(B)], [B, conj(A)]]`` with
    ``|A|**2 + |B|**2 = 1``.
    """

    k: float
    A: complex
    B: complex

    @property
    def matrix(self) -> np.ndarray:
        return np.array(
            [[self.A, -np.conj(self.B)], [self.B, np.conj(self.A)]],
            dtype=complex,
        )


def reduced_operator_1d(tess: Tessellation1D, k: float) -> ReducedOperator1D:
    """Reduced one-step operator of a 1D tessellation pair at momentum ``k``."""
    ca, sa = np.cos(tess.alpha), np.sin(tess.alpha)
    cb, sb = np.cos(tess.beta), np.sin(tess.beta)
    A = -ca * cb + sa * sb * np.exp(1j * (2 * k + tess.phi1 + tess.phi2))
    B = sa * cb * np.exp(1j * (k + tess.phi1)) \
        + ca * sb * np.exp(-1j * (k + tess.phi2))
    return ReducedOperator1D(float(k), complex(A), complex(B))


@dataclass(frozen=True)
class ReducedOperator2D:
    """One-momentum block of the 2D walk on the four cell parities.

    Component order is (0,0), (0,1), (1,0), (1,1) in (x-parity, y-parity).
    """

    k: float
    l: float

    @property
    def matrix(self) -> np.ndarray:
        k, l = self.k, self.l
        ck, sk = np.cos(k), np.sin(k)
        cl, sl = np.cos(l), np.sin(l)
        ekl = np.exp(1j * (k + l))
        ekml = np.exp(1j * (k - l))
        ek, el = np.exp(1j * k), np.exp(1j * l)
        cc, ss = ck * cl, sk * sl
        skcl = sk * cl
        cksl = ck * sl
        return np.array(
            [
                [ekl * cc, 1j * ek * skcl, 1j * el * cksl, ss],
                [1j * ek * skcl, ekml * cc, -ss, -1j * np.conj(el) * cksl],
                [1j * el * cksl, -ss, np.conj(ekml) * cc, -1j * np.conj(ek) * skcl],
                [ss, -1j * np.conj(el) * cksl, -1j * np.conj(ek) * skcl,
                 np.conj(ekl) * cc],
            ],
            dtype=complex,
        )


def reduced_operator_2d(k: float, l: float) -> ReducedOperator2D:
    """Reduced one-step operator of the 2D cell patterning at momenta (k, l)."""
    return ReducedOperator2D(float(k), float(l))


@dataclass(frozen=True)
class EigenSystem:
    """Spectral decomposition of a reduced operator.

    ``phases[i]`` is the eigenphase of column ``vectors[:, i]``; eigenvalues
    are ``exp(1j * phases)``.  ``closed_form`` records whether the analytic
    expressions were used or the generic (Schur) diagonalizer took over.
    """

    phases: np.ndarray
    vectors: np.ndarray
    closed_form: bool

    def reconstruct(self) -> np.ndarray:
        """Rebuild the operator as ``V diag(e^{i phases}) V^dagger``."""
        return (self.vectors * np.exp(1j * self.phases)) @ self.vectors.conj().T


def _schur_eigensystem(matrix: np.ndarray) -> EigenSystem:
    # complex Schur of a unitary (normal) matrix is an eigendecomposition
    T, Z = scipy.linalg.schur(matrix, output="complex")
    return EigenSystem(np.angle(np.diag(T)), Z, closed_form=False)


def eigensystem_1d(op: ReducedOperator1D) -> EigenSystem:
    """Eigenphases and eigenvectors of a 1D reduced operator.

    Eigenvalues are ``exp(+-1j*theta)`` with ``cos(theta) = Re A``.  The
    closed-form eigenvectors ``(-conj(B), e^{+-i theta} - A)`` are used
    whenever their normalizers ``2 sin(theta) (sin(theta) -+ Im A)`` are
    comfortably positive; band edges and the ballistic line ``B = 0`` fall
    back to the generic diagonalizer.
    """
    cos_t = min(1.0, max(-1.0, op.A.real))
    # sin^2(theta) = (Im A)^2 + |B|^2 exactly; computing it from cos(theta)
    # instead would lose half the digits near the band edges
    sin_t = min(1.0, np.hypot(op.A.imag, abs(op.B)))
    if abs(cos_t) <= 0.7:
        theta = np.arccos(cos_t)
    elif cos_t > 0.0:
        theta = np.arcsin(sin_t)
    else:
        theta = np.pi - np.arcsin(sin_t)
    # sin(theta) -+ Im A suffers cancellation near the ballistic line; use
    # sin^2(theta) - (Im A)^2 = |B|^2 to get the small side as a quotient
    b_sq = abs(op.B) ** 2
    if op.A.imag >= 0.0:
        large = sin_t + op.A.imag
        sin_minus_im = b_sq / large if large > 0.0 else 0.0
        sin_plus_im = large
    else:
        large = sin_t - op.A.imag
        sin_minus_im = large
        sin_plus_im = b_sq / large if large > 0.0 else 0.0
    norm_plus = 2.0 * sin_t * sin_minus_im
    norm_minus = 2.0 * sin_t * sin_plus_im
    if sin_t < _EDGE_SIN or min(norm_plus, norm_minus) < 1e-24:
        return _schur_eigensystem(op.matrix)
    # e^{+-i theta} - A = +-i (sin(theta) -+ Im A) exactly, cos(theta) = Re A
    vec = np.empty((2, 2), dtype=complex)
    vec[:, 0] = (-np.conj(op.B), 1j * sin_minus_im)
    vec[:, 0] /= np.sqrt(norm_plus)
    vec[:, 1] = (-np.conj(op.B), -1j * sin_plus_im)
    vec[:, 1] /= np.sqrt(norm_minus)
    return EigenSystem(np.array([theta, -theta]), vec, closed_form=True)


def dispersion_derivative_1d(op: ReducedOperator1D) -> float:
    """Group velocity d(theta)/dk of the upper band at this momentum.

    Raises ``BandEdgeError`` where the band gap closes (sin(theta) below
    1e-9), since the derivative is singular there.
    """
    sin_t = np.hypot(op.A.imag, abs(op.B))
    if sin_t < _EDGE_SIN:
        raise BandEdgeError(f"band edge at momentum {op.k!r}")
    return float(2.0 * op.A.imag / sin_t)


def eigensystem_2d(op: ReducedOperator2D) -> EigenSystem:
    """Eigenphases and eigenvectors of a 2D reduced operator.

    The spectrum is doubly degenerate at phase 0 plus ``+-theta`` with
    ``cos(theta) = 2 cos^2(k) cos^2(l) - 1``.  Closed-form eigenvectors are
    used away from the degenerate lines (momenta with ``sin(theta)`` or a
    closed-form normalizer below threshold, or ``cos k cos l = 0``, take the
    generic diagonalizer instead).
    """
    # the operator turns into a component permutation of itself under
    # momentum sign flips: swapping components (0 2)(1 3) realizes k -> -k
    # and (0 1)(2 3) realizes l -> -l.  The closed forms below assume
    # sin(k) >= 0 and sin(l) >= 0, so build in that quadrant and permute
    # the eigenvector rows back at the end.
    k = np.remainder(op.k + np.pi, 2.0 * np.pi) - np.pi
    l = np.remainder(op.l + np.pi, 2.0 * np.pi) - np.pi
    flip_x, flip_y = k < 0.0, l < 0.0
    if flip_x:
        k = -k
    if flip_y:
        l = -l
    ck, sk = np.cos(k), np.sin(k)
    cl, sl = np.cos(l), np.sin(l)
    ckcl = ck * cl
    # half-angle quantities: 1 +- ck*cl = cos/sin combinations with no
    # cancellation, which keeps every eigenvector entry fully accurate
    half_sum = 0.5 * (k + l)
    half_diff = 0.5 * (k - l)
    ss, cs = np.sin(half_sum), np.cos(half_sum)
    sd, cd = np.sin(half_diff), np.cos(half_diff)
    plus = cd * cd + cs * cs     # 1 + ck*cl
    minus = sd * sd + ss * ss    # 1 - ck*cl
    c = np.sqrt(plus * minus)    # sqrt(1 - (ck*cl)^2)
    sin_t = 2.0 * abs(ckcl) * c
    if sin_t < _EDGE_SIN or abs(ckcl) < 1e-12 or min(plus, minus) < 1e-18 \
            or c < _EDGE_SIN:
        return _schur_eigensystem(op.matrix)
    # the band phase, from whichever inverse is well conditioned here
    if c <= 0.7:
        theta = 2.0 * np.arcsin(min(1.0, c))
    else:
        theta = np.pi - 2.0 * np.arcsin(min(1.0, abs(ckcl)))

    # flat pair: exactly unit, exactly orthogonal
    flat0 = np.array([cd, -cs, -cs, cd]) / np.sqrt(2.0 * plus)
    flat1 = np.array([-sd, ss, -ss, sd]) / np.sqrt(2.0 * minus)

    # c -+ sk*cl and c -+ ck*sl: get the cancelling side as a quotient via
    # c^2 - (sk*cl)^2 = sl^2 and c^2 - (ck*sl)^2 = sk^2
    def stable_pair(x: float, complement_sq: float) -> tuple[float, float]:
        if x >= 0.0:
            big = c + x
            return complement_sq / big, big
        big = c - x
        return big, complement_sq / big

    skcl = ss * cs + sd * cd     # sin(k) cos(l)
    cksl = ss * cs - sd * cd     # cos(k) sin(l)
    c_m_skcl, c_p_skcl = stable_pair(skcl, sl * sl)
    c_m_cksl, c_p_cksl = stable_pair(cksl, sk * sk)

    def moving(sign: float) -> np.ndarray:
        rp = np.sqrt(c_m_skcl if sign > 0 else c_p_skcl)
        rm = np.sqrt(c_p_skcl if sign > 0 else c_m_skcl)
        qp = np.sqrt(c_m_cksl if sign > 0 else c_p_cksl)
        qm = np.sqrt(c_p_cksl if sign > 0 else c_m_cksl)
        return np.array(
            [-sign * rp * qp, rp * qm, rm * qp, sign * rm * qm]
        ) / (2.0 * c)

    eps = 1.0 if ckcl > 0 else -1.0
    vectors = np.column_stack(
        [flat0, flat1, moving(eps), moving(-eps)]
    ).astype(complex)
    if flip_x:
        vectors = vectors[[2, 3, 0, 1], :]
    if flip_y:
        vectors = vectors[[1, 0, 3, 2], :]
    phases = np.array([0.0, 0.0, -theta, theta])
    return EigenSystem(phases, vectors, closed_form=True)


# ---------------------------------------------------------------------------
# staggered Fourier transform


def staggered_momenta(extent: int) -> np.ndarray:
    """The reduced-zone momenta ``2 pi j / extent`` for ``j < extent/2``."""
    if extent % 2:
        raise ValueError("extent must be even")
    m = extent // 2
    return 2.0 * np.pi * np.arange(m) / extent


def staggered_components(amps: np.ndarray) -> np.ndarray:
    """Coefficients of a state in the staggered plane-wave basis.

    Returns shape ``(2, L/2)`` in 1D or ``(4, Lx/2, Ly/2)`` in 2D, the
    component axis ordered by site parity as in the reduced operators.
    The transform is unitary: synthesis inverts it exactly.
    """
    amps = np.asarray(amps, dtype=complex)
    if amps.ndim == 1:
        m = amps.shape[0] // 2
        k = staggered_momenta(amps.shape[0])
        out = np.empty((2, m), dtype=complex)
        for parity in (0, 1):
            sub = amps[parity::2]
            out[parity] = np.sqrt(m) * np.fft.ifft(sub) * np.exp(1j * parity * k)
        return out
    mx, my = amps.shape[0] // 2, amps.shape[1] // 2
    k = staggered_momenta(amps.shape[0])[:, None]
    l = staggered_momenta(amps.shape[1])[None, :]
    out = np.empty((4, mx, my), dtype=complex)
    for px in (0, 1):
        for py in (0, 1):
            sub = amps[px::2, py::2]
            out[2 * px + py] = (
                np.sqrt(mx * my)
                * np.fft.ifft2(sub)
                * np.exp(1j * (px * k + py * l))
            )
    return out


def staggered_synthesis(components: np.ndarray) -> np.ndarray:
    """Inverse of :func:`staggered_components`."""
    components = np.asarray(components, dtype=complex)
    if components.ndim == 2:
        m = components.shape[1]
        k = staggered_momenta(2 * m)
        amps = np.empty(2 * m, dtype=complex)
        for parity in (0, 1):
            y = components[parity] * np.exp(-1j * parity * k)
            amps[parity::2] = np.fft.fft(y) / np.sqrt(m)
        return amps
    mx, my = components.shape[1], components.shape[2]
    k = staggered_momenta(2 * mx)[:, None]
    l = staggered_momenta(2 * my)[None, :]
    amps = np.empty((2 * mx, 2 * my), dtype=complex)
    for px in (0, 1):
        for py in (0, 1):
            y = components[2 * px + py] * np.exp(-1j * (px * k + py * l))
            amps[px::2, py::2] = np.fft.fft2(y) / np.sqrt(mx * my)
    return amps


def evolve_momentum(init: InitialCondition, tess, steps: int,
                    extent) -> LatticeState:
    """Evolve on a periodic lattice by diagonalizing momentum by momentum.

    Produces the same state as ``lattice.evolve(..., periodic=True)`` with
    the same extent, up to roundoff; that agreement is the cross-check
    between the two computational paths.
    """
    if isinstance(extent, (int, np.integer)):
        extent = (int(extent),) * init.ndim
    state = init.embed(tuple(extent), (0,) * init.ndim, periodic=True)
    comps = staggered_components(state.amps)
    if init.ndim == 1:
        for j, k in enumerate(staggered_momenta(extent[0])):
            sys = eigensystem_1d(reduced_operator_1d(tess, k))
            weights = sys.vectors.conj().T @ comps[:, j]
            comps[:, j] = sys.vectors @ (np.exp(1j * sys.phases * steps) * weights)
    else:
        ks = staggered_momenta(extent[0])
        ls = staggered_momenta(extent[1])
        for jk, k in enumerate(ks):
            for jl, l in enumerate(ls):
                sys = eigensystem_2d(reduced_operator_2d(k, l))
                weights = sys.vectors.conj().T @ comps[:, jk, jl]
                comps[:, jk, jl] = sys.vectors @ (
                    np.exp(1j * sys.phases * steps) * weights
                )
    return LatticeState(staggered_synthesis(comps), (0,) * init.ndim,
                        periodic=True)
