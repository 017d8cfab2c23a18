"""Direct real-space evolution of staggered walks on 1D and 2D lattices.

The walk alternates two reflection operators built from non-overlapping
patches of sites: an unshifted patterning and one shifted by a single site
along every axis.  Each reflection is ``2 P - I`` with ``P`` the projector
onto one unit vector per patch, so it is unitary, Hermitian, and squares to
the identity.  One time step applies the unshifted reflection first, then
the shifted one.

Two lattice modes are supported.  ``periodic`` wraps patches around an even
extent and is exactly unitary for any size.  The default padded mode embeds
the walker far from the boundary of a finite open lattice; the single site
per edge (1D) or one-site frame (2D) that the shifted patterning cannot
cover is an orphan patch whose "reflection" is multiplication by -1, which
keeps the operator unitary without coupling across the edge.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

__all__ = [
    "Tessellation1D",
    "Tessellation2D",
    "LatticeState",
    "InitialCondition",
    "BoundaryError",
    "build_reflection",
    "step",
    "evolve",
    "probability_distribution",
]


class BoundaryError(RuntimeError):
    """Walker support reached the padded boundary; results would be clipped."""


@dataclass(frozen=True)
class Tessellation1D:
    """Parameters of the two 1D patch reflections.

    The unshifted patterning pairs sites ``{2m, 2m+1}`` and carries
    ``(alpha, phi1)``; the shifted one pairs ``{2m+1, 2m+2}`` and carries
    ``(beta, phi2)``.  Each patch holds the unit vector
    ``cos(a)|left> + sin(a) e^{i phi}|right>``, giving the reflection block

        [[cos a,            sin a e^{-i phi}],
         [sin a e^{i phi},  -cos a          ]]

    acting on (left, right) amplitudes of the patch.
    """

    alpha: float
    phi1: float = 0.0
    beta: float = np.pi / 2
    phi2: float = 0.0

    def block(self, which: int) -> np.ndarray:
        """2x2 reflection block of patterning ``which`` (0 unshifted, 1 shifted)."""
        a, phi = (self.alpha, self.phi1) if which == 0 else (self.beta, self.phi2)
        c, s = np.cos(a), np.sin(a)
        return np.array(
            [[c, s * np.exp(-1j * phi)], [s * np.exp(1j * phi), -c]],
            dtype=complex,
        )


@dataclass(frozen=True)
class Tessellation2D:
    """The uniform 2x2-cell patterning pair on the square lattice.

    Both reflections use the same parameter-free block ``J/2 - I`` (``J`` the
    all-ones 4x4 matrix), i.e. the patch vector is the uniform superposition
    of the four cell sites.  The shifted patterning is displaced by one site
    along both axes.
    """

    def block(self, which: int) -> np.ndarray:
        del which  # same block for both patternings
        return 0.5 * np.ones((4, 4), dtype=complex) - np.eye(4, dtype=complex)


@dataclass
class LatticeState:
    """Site amplitudes on a finite lattice.

    ``amps`` has shape ``(L,)`` in 1D or ``(Lx, Ly)`` in 2D.  In padded mode
    the coordinate of index ``i`` along an axis is ``i - origin``; in periodic
    mode ``origin`` is 0 and coordinates live in ``[0, L)``.
    """

    amps: np.ndarray
    origin: tuple[int, ...]
    periodic: bool = False

    def __post_init__(self) -> None:
        self.amps = np.asarray(self.amps, dtype=complex)
        if self.amps.ndim not in (1, 2):
            raise ValueError("amplitudes must be a 1D or 2D array")
        if len(self.origin) != self.amps.ndim:
            raise ValueError("origin arity must match lattice dimension")
        for n in self.amps.shape:
            if n % 2:
                raise ValueError("lattice extent must be even to hold whole patches")

    @property
    def ndim(self) -> int:
        return self.amps.ndim

    @property
    def extent(self) -> tuple[int, ...]:
        return self.amps.shape

    def coordinates(self, axis: int = 0) -> np.ndarray:
        """Integer coordinate of every index along ``axis``."""
        return np.arange(self.amps.shape[axis]) - self.origin[axis]

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps.ravel()))

    def copy(self) -> "LatticeState":
        return LatticeState(self.amps.copy(), self.origin, self.periodic)


@dataclass(frozen=True)
class InitialCondition:
    """Normalized initial amplitudes given as coordinate -> amplitude.

    Coordinates are relative to the origin site; 1D sites may be given as
    bare integers.  The map must have unit 2-norm within 1e-12; anything
    else raises ``ValueError`` on construction.
    """

    amplitudes: Mapping[tuple[int, ...], complex]
    ndim: int = field(init=False)

    def __post_init__(self) -> None:
        if not self.amplitudes:
            raise ValueError("initial condition needs at least one site")
        if any(isinstance(c, (int, np.integer)) for c in self.amplitudes):
            object.__setattr__(self, "amplitudes", {
                (c,) if isinstance(c, (int, np.integer)) else c: v
                for c, v in self.amplitudes.items()
            })
        dims = {len(c) for c in self.amplitudes}
        if len(dims) != 1:
            raise ValueError("mixed coordinate arities in initial condition")
        object.__setattr__(self, "ndim", dims.pop())
        if self.ndim not in (1, 2):
            raise ValueError("only 1D and 2D lattices are supported")
        nrm = np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))
        if abs(nrm - 1.0) > 1e-12:
            raise ValueError(f"initial condition norm {nrm!r} is not 1")

    @classmethod
    def site(cls, *coord: int) -> "InitialCondition":
        """All amplitude on a single site, default the origin."""
        if not coord:
            coord = (0,)
        return cls({tuple(coord): 1.0 + 0j})

    @classmethod
    def pair(cls, left: complex, right: complex) -> "InitialCondition":
        """1D state on the origin patch sites 0 and 1."""
        return cls({(0,): complex(left), (1,): complex(right)})

    @classmethod
    def cell(cls, values: Iterable[complex]) -> "InitialCondition":
        """2D state on the origin cell.

        ``values`` are the four amplitudes on sites (0,0), (0,1), (1,0),
        (1,1), in that order (x is the first coordinate).
        """
        a, b, c, d = (complex(v) for v in values)
        return cls({(0, 0): a, (0, 1): b, (1, 0): c, (1, 1): d})

    def embed(self, extent: tuple[int, ...], origin: tuple[int, ...],
              periodic: bool = False) -> LatticeState:
        """Place the amplitudes on a concrete lattice."""
        amps = np.zeros(extent, dtype=complex)
        for coord, value in self.amplitudes.items():
            idx = tuple(
                (c + o) % n if periodic else c + o
                for c, o, n in zip(coord, origin, extent)
            )
            if not periodic and any(i < 0 or i >= n for i, n in zip(idx, extent)):
                raise ValueError(f"coordinate {coord} falls outside the lattice")
            amps[idx] += value
        return LatticeState(amps, origin, periodic)


# ---------------------------------------------------------------------------
# reflections


def _apply_cells_1d(a: np.ndarray, block: np.ndarray) -> np.ndarray:
    return (a.reshape(-1, 2) @ block.T).reshape(-1)


def _apply_cells_2d(a: np.ndarray, block: np.ndarray) -> np.ndarray:
    m, n = a.shape[0] // 2, a.shape[1] // 2
    cells = a.reshape(m, 2, n, 2).transpose(0, 2, 1, 3).reshape(m, n, 4)
    cells = cells @ block.T
    return cells.reshape(m, n, 2, 2).transpose(0, 2, 1, 3).reshape(2 * m, 2 * n)


@dataclass(frozen=True)
class Reflection:
    """One patch reflection bound to a lattice geometry."""

    block: np.ndarray
    shifted: bool
    periodic: bool
    ndim: int

    def apply(self, amps: np.ndarray) -> np.ndarray:
        """Return the reflection applied to an amplitude array."""
        apply_cells = _apply_cells_1d if self.ndim == 1 else _apply_cells_2d
        if not self.shifted:
            return apply_cells(amps, self.block)
        if self.periodic:
            shift = (-1,) * self.ndim
            rolled = np.roll(amps, shift, axis=tuple(range(self.ndim)))
            rolled = apply_cells(rolled, self.block)
            return np.roll(rolled, tuple(-s for s in shift),
                           axis=tuple(range(self.ndim)))
        out = -amps  # orphan boundary sites pick up the -1 of an empty patch
        if self.ndim == 1:
            out[1:-1] = apply_cells(amps[1:-1], self.block)
        else:
            out[1:-1, 1:-1] = apply_cells(amps[1:-1, 1:-1], self.block)
        return out

    def matrix(self, extent: tuple[int, ...]) -> np.ndarray:
        """Dense site-basis matrix, for small-lattice checks."""
        size = int(np.prod(extent))
        cols = np.eye(size, dtype=complex)
        out = np.empty((size, size), dtype=complex)
        for j in range(size):
            out[:, j] = self.apply(cols[:, j].reshape(extent)).ravel()
        return out


def build_reflection(tess, which: int, *, periodic: bool = False) -> Reflection:
    """Construct one of the two patch reflections of a tessellation pair.

    Parameters
    ----------
    tess : Tessellation1D or Tessellation2D
        Patterning parameters.
    which : int
        0 for the unshifted patterning, 1 for the one shifted by a single
        site along every axis.
    periodic : bool
        Whether patches wrap around the lattice edge.  In the padded
        (non-periodic) mode the shifted patterning leaves orphan boundary
        sites, which are multiplied by -1.
    """
    if which not in (0, 1):
        raise ValueError("which must be 0 or 1")
    ndim = 1 if isinstance(tess, Tessellation1D) else 2
    return Reflection(tess.block(which), bool(which), periodic, ndim)


def step(state: LatticeState, tess) -> LatticeState:
    """Advance one time step: unshifted reflection, then shifted."""
    r0 = build_reflection(tess, 0, periodic=state.periodic)
    r1 = build_reflection(tess, 1, periodic=state.periodic)
    return LatticeState(r1.apply(r0.apply(state.amps)), state.origin, state.periodic)


def _default_extent(steps: int, ndim: int) -> tuple[int, ...]:
    # support after t steps is within [-2t-1, 2t+1] per axis; pad past that
    return (4 * steps + 8,) * ndim


def evolve(init: InitialCondition, tess, steps: int, *,
           extent: tuple[int, ...] | None = None,
           periodic: bool = False) -> LatticeState:
    """Evolve an initial condition for ``steps`` time steps.

    In padded mode (default) the lattice extent is ``4*steps + 8`` per axis,
    the origin sits at ``extent // 2``, and a guard raises ``BoundaryError``
    if any probability is found within two sites of an edge afterwards.  In
    periodic mode ``extent`` is required and the origin is index 0.
    """
    if steps < 0:
        raise ValueError("steps must be nonnegative")
    if periodic:
        if extent is None:
            raise ValueError("periodic evolution needs an explicit extent")
    elif extent is None:
        extent = _default_extent(steps, init.ndim)
    if isinstance(extent, (int, np.integer)):
        extent = (int(extent),) * init.ndim
    if len(extent) != init.ndim:
        raise ValueError("extent arity must match the initial condition")
    origin = (0,) * init.ndim if periodic else tuple(n // 2 for n in extent)
    state = init.embed(tuple(extent), origin, periodic)
    r0 = build_reflection(tess, 0, periodic=periodic)
    r1 = build_reflection(tess, 1, periodic=periodic)
    amps = state.amps
    for _ in range(steps):
        amps = r1.apply(r0.apply(amps))
    out = LatticeState(amps, origin, periodic)
    if not periodic:
        _check_boundary(out)
    return out


def _check_boundary(state: LatticeState) -> None:
    p = state.probabilities()
    if state.ndim == 1:
        leak = p[:2].sum() + p[-2:].sum()
    else:
        leak = p.sum() - p[2:-2, 2:-2].sum()
    if leak > 1e-14:
        raise BoundaryError(
            f"probability {leak:.3e} within two sites of the padded edge"
        )


def probability_distribution(state: LatticeState, *,
                             threshold: float = 1e-16):
    """Return ``(coords, probs)`` for sites with probability >= threshold.

    ``coords`` holds origin-relative coordinates, shape ``(n,)`` in 1D and
    ``(n, 2)`` in 2D, sorted lexicographically.  The probabilities sum to
    the squared state norm up to the threshold cut.
    """
    p = state.probabilities()
    if state.ndim == 1:
        keep = np.flatnonzero(p >= threshold)
        return state.coordinates(0)[keep], p[keep]
    ix, iy = np.nonzero(p >= threshold)
    coords = np.column_stack((state.coordinates(0)[ix], state.coordinates(1)[iy]))
    return coords, p[ix, iy]
