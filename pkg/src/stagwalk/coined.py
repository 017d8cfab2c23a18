"""Coined-walk baselines: the 1D two-state walk and the 2D four-state walk.

These serve as reference dynamics to compare the coinless spreading rates
against.  Both use the usual coin-then-shift step on a padded lattice; the
coin degree of freedom rides along as the leading array axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import BoundaryError

__all__ = [
    "D1",
    "D2",
    "CoinedState",
    "hadamard_step",
    "hadamard_walk",
    "hadamard_moment_coefficients",
    "grover_step",
    "grover_walk",
    "grover_moment_coefficients",
]

D1 = 1.0 - 1.0 / np.sqrt(2.0)
D2 = 1.0 - 2.0 / np.pi

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
_GROVER = 0.5 * np.ones((4, 4)) - np.eye(4)

# coin component -> lattice displacement for the 2D walk: the first coin
# index pair moves along y, the middle two along x, signs +,+,-,-
_GROVER_SHIFTS = ((0, 1), (1, 0), (-1, 0), (0, -1))


@dataclass
class CoinedState:
    """Coin-resolved amplitudes: axis 0 is the coin, the rest the lattice."""

    amps: np.ndarray
    origin: tuple[int, ...]

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.ndim - 1 != len(self.origin):
            raise ValueError("origin arity must match the lattice dimension")

    @property
    def ndim(self) -> int:
        return self.amps.ndim - 1

    def coordinates(self, axis: int = 0) -> np.ndarray:
        return np.arange(self.amps.shape[axis + 1]) - self.origin[axis]

    def probabilities(self) -> np.ndarray:
        """Site probabilities, coin traced out."""
        return (np.abs(self.amps) ** 2).sum(axis=0)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps.ravel()))

    def moment(self, order: int, axis: int = 0) -> float:
        p = self.probabilities()
        coords = self.coordinates(axis).astype(float)
        if self.ndim == 2:
            p = p.sum(axis=1 - axis)
        return float(np.sum(p * coords ** order))


def hadamard_step(state: CoinedState) -> CoinedState:
    """One balanced-coin step: mix the two coin states, then shift by +-1."""
    mixed = np.tensordot(_HADAMARD, state.amps, axes=(1, 0))
    out = np.empty_like(mixed)
    out[0] = np.roll(mixed[0], 1)
    out[1] = np.roll(mixed[1], -1)
    return CoinedState(out, state.origin)


def hadamard_walk(alpha: float, phi: float, steps: int,
                  extent: int | None = None) -> CoinedState:
    """Run the 1D coined walk from cos(a/2)|0> + e^{i phi} sin(a/2)|1> at 0.

    ``alpha`` and ``phi`` are Bloch angles of the initial coin state, the
    same convention :func:`hadamard_moment_coefficients` uses.  The lattice
    is padded to ``2*steps + 8`` sites by default (support grows one site
    per step and side); a guard raises ``BoundaryError`` if any probability
    ends up within two sites of an edge.
    """
    if extent is None:
        extent = 2 * steps + 8
    origin = extent // 2
    amps = np.zeros((2, extent), dtype=complex)
    amps[0, origin] = np.cos(alpha / 2.0)
    amps[1, origin] = np.sin(alpha / 2.0) * np.exp(1j * phi)
    state = CoinedState(amps, (origin,))
    for _ in range(steps):
        state = hadamard_step(state)
    _check_coined_boundary(state)
    return state


def hadamard_moment_coefficients(alpha: float, phi: float) -> tuple[float, float]:
    """Asymptotic (first, second) moment coefficients of the 1D coined walk.

    Implements the conventional closed forms ``D1 * (1 + sin(a) cos(phi))``
    and ``D1``.  Note that direct simulation of the walk defined in this
    module gives a drift of ``D1 * (cos(a) + sin(a) cos(phi))`` instead; the
    two agree only at ``a = 0``.  The second moment coefficient is exact
    and independent of the initial coin.  See tests/test_acceptance.py for
    the checks that document the mismatch.
    """
    first = D1 * (1.0 + np.sin(alpha) * np.cos(phi))
    second = D1
    return float(first), float(second)


def grover_step(state: CoinedState) -> CoinedState:
    """One 2D step: the four-state balanced coin, then the diagonal-free shift."""
    mixed = np.tensordot(_GROVER, state.amps, axes=(1, 0))
    out = np.empty_like(mixed)
    for comp, shift in enumerate(_GROVER_SHIFTS):
        out[comp] = np.roll(mixed[comp], shift, axis=(0, 1))
    return CoinedState(out, state.origin)


def grover_walk(coin, steps: int, extent: int | None = None) -> CoinedState:
    """Run the 2D coined walk from the origin with the given coin amplitudes.

    ``coin`` holds the four coin-component amplitudes; the lattice is padded
    to ``2*steps + 8`` sites per axis by default.
    """
    coin = np.asarray(coin, dtype=complex).ravel()
    if coin.shape != (4,):
        raise ValueError("coin must have four amplitudes")
    if abs(np.linalg.norm(coin) - 1.0) > 1e-9:
        raise ValueError("coin amplitudes must be normalized")
    if extent is None:
        extent = 2 * steps + 8
    origin = extent // 2
    amps = np.zeros((4, extent, extent), dtype=complex)
    amps[:, origin, origin] = coin
    state = CoinedState(amps, (origin, origin))
    for _ in range(steps):
        state = grover_step(state)
    _check_coined_boundary(state)
    return state


def grover_moment_coefficients(a: complex, b: complex, c: complex,
                               d: complex) -> tuple[float, float, float, float]:
    """Asymptotic moment coefficients (x1, y1, x2, y2) of the 2D coined walk.

    Arguments are the four coin amplitudes in the component order used by
    :func:`grover_walk`.  Both drifts vanish on states symmetric under the
    walk's reflection symmetries; the square coefficients are bounded by
    ``1 - 2/pi`` per axis.
    """
    a, b, c, d = complex(a), complex(b), complex(c), complex(d)
    nrm = abs(a) ** 2 + abs(b) ** 2 + abs(c) ** 2 + abs(d) ** 2
    if abs(nrm - 1.0) > 1e-9:
        raise ValueError("coin amplitudes must be normalized")
    x1 = 0.5 * D2 * (
        abs(b) ** 2 - abs(c) ** 2 - ((a + d) * np.conj(b - c)).real
    )
    y1 = 0.5 * D2 * (
        abs(a) ** 2 - abs(d) ** 2 - ((a - d) * np.conj(b + c)).real
    )
    pi = np.pi
    x2 = (
        (1.0 + abs(b) ** 2 + abs(c) ** 2) / (6.0 * pi)
        + abs(a + d) ** 2 / (12.0 * pi)
        + (0.5 - 19.0 / (12.0 * pi)) * abs(b - c) ** 2
        - (0.5 - 4.0 / (3.0 * pi)) * ((a + d) * np.conj(b + c)).real
    )
    y2 = (
        (1.0 + abs(a) ** 2 + abs(d) ** 2) / (6.0 * pi)
        + abs(b + c) ** 2 / (12.0 * pi)
        + (0.5 - 19.0 / (12.0 * pi)) * abs(a - d) ** 2
        - (0.5 - 4.0 / (3.0 * pi)) * ((b + c) * np.conj(a + d)).real
    )
    return float(x1), float(y1), float(x2), float(y2)


def _check_coined_boundary(state: CoinedState) -> None:
    p = state.probabilities()
    if state.ndim == 1:
        leak = p[:2].sum() + p[-2:].sum()
    else:
        leak = p.sum() - p[2:-2, 2:-2].sum()
    if leak > 1e-14:
        raise BoundaryError(
            f"probability {leak:.3e} within two sites of the padded edge"
        )
