"""Momentum-space path: reduced operators, eigensystems, Fourier transforms."""
import numpy as np
import pytest

from stagwalk import (
    BandEdgeError,
    InitialCondition,
    Tessellation1D,
    Tessellation2D,
    build_reflection,
    dispersion_derivative_1d,
    eigensystem_1d,
    eigensystem_2d,
    evolve,
    evolve_momentum,
    reduced_operator_1d,
    reduced_operator_2d,
    staggered_components,
    staggered_momenta,
    staggered_synthesis,
)


def random_tess_1d(rng):
    a, b = rng.uniform(0.2, np.pi - 0.2, size=2)
    p1, p2 = rng.uniform(-np.pi, np.pi, size=2)
    return Tessellation1D(a, p1, b, p2)


def basis_vector_1d(extent, j, parity):
    comp = np.zeros((2, extent // 2), dtype=complex)
    comp[parity, j] = 1.0
    return staggered_synthesis(comp)


def basis_vector_2d(extent, jx, jy, comp_index):
    comp = np.zeros((4, extent[0] // 2, extent[1] // 2), dtype=complex)
    comp[comp_index, jx, jy] = 1.0
    return staggered_synthesis(comp)


def test_reduced_operator_1d_is_unitary():
    rng = np.random.default_rng(10)
    for _ in range(100):
        op = reduced_operator_1d(random_tess_1d(rng), rng.uniform(0, np.pi))
        mat = op.matrix
        assert np.allclose(mat @ mat.conj().T, np.eye(2), atol=1e-14)
        assert abs(abs(op.A) ** 2 + abs(op.B) ** 2 - 1.0) < 1e-14


def test_reduced_operator_1d_matches_dense_projection():
    # the one-step operator is block diagonal in the staggered plane-wave
    # basis; each block must equal the closed-form reduced matrix
    rng = np.random.default_rng(11)
    L = 12
    for _ in range(10):
        tess = random_tess_1d(rng)
        dense = (build_reflection(tess, 1, periodic=True).matrix((L,))
                 @ build_reflection(tess, 0, periodic=True).matrix((L,)))
        for j, k in enumerate(staggered_momenta(L)):
            basis = np.column_stack([basis_vector_1d(L, j, p) for p in (0, 1)])
            block = basis.conj().T @ dense @ basis
            assert np.allclose(block, reduced_operator_1d(tess, k).matrix,
                               atol=1e-13)


def test_reduced_operator_2d_matches_dense_projection():
    L = (8, 8)
    tess = Tessellation2D()
    dense = (build_reflection(tess, 1, periodic=True).matrix(L)
             @ build_reflection(tess, 0, periodic=True).matrix(L))
    ks = staggered_momenta(L[0])
    ls = staggered_momenta(L[1])
    for jx, k in enumerate(ks):
        for jy, l in enumerate(ls):
            basis = np.column_stack(
                [basis_vector_2d(L, jx, jy, c).ravel() for c in range(4)]
            )
            block = basis.conj().T @ dense @ basis
            assert np.allclose(block, reduced_operator_2d(k, l).matrix,
                               atol=1e-13)


def test_reduced_operator_2d_is_unitary():
    rng = np.random.default_rng(12)
    for _ in range(100):
        k, l = rng.uniform(-np.pi, np.pi, size=2)
        mat = reduced_operator_2d(k, l).matrix
        assert np.allclose(mat @ mat.conj().T, np.eye(4), atol=1e-13)


def awkward_momenta():
    eps = 1e-8
    return [0.0, eps, np.pi / 2, np.pi / 2 - eps, np.pi / 2 + eps,
            np.pi - eps, np.pi, -np.pi / 2, 1e-15, 0.3]


def test_eigensystem_1d_residuals():
    rng = np.random.default_rng(13)
    specs = [random_tess_1d(rng) for _ in range(25)]
    specs += [Tessellation1D(a, 0.0, a, 0.0) for a in (0.5, np.pi / 3)]
    specs += [Tessellation1D(np.pi / 2, 0.2, np.pi / 2, -0.1)]
    for tess in specs:
        for k in awkward_momenta() + list(rng.uniform(-np.pi, np.pi, size=4)):
            op = reduced_operator_1d(tess, k)
            sys = eigensystem_1d(op)
            assert np.linalg.norm(sys.reconstruct() - op.matrix) < 5e-13
            gram = sys.vectors.conj().T @ sys.vectors
            assert np.linalg.norm(gram - np.eye(2)) < 5e-13


def test_eigensystem_2d_residuals():
    rng = np.random.default_rng(14)
    momenta = awkward_momenta() + list(rng.uniform(-np.pi, np.pi, size=6))
    for k in momenta:
        for l in momenta:
            op = reduced_operator_2d(k, l)
            sys = eigensystem_2d(op)
            assert np.linalg.norm(sys.reconstruct() - op.matrix) < 5e-13
            gram = sys.vectors.conj().T @ sys.vectors
            assert np.linalg.norm(gram - np.eye(4)) < 5e-13


def test_eigensystem_2d_spectrum():
    # two flat eigenvalues at +1 and a conjugate pair at the dispersion phase
    rng = np.random.default_rng(15)
    for _ in range(50):
        k, l = rng.uniform(-np.pi + 0.1, np.pi - 0.1, size=2)
        sys = eigensystem_2d(reduced_operator_2d(k, l))
        phases = np.sort(sys.phases)
        theta = np.arccos(np.clip(2 * (np.cos(k) * np.cos(l)) ** 2 - 1, -1, 1))
        expected = np.sort([0.0, 0.0, -theta, theta])
        assert np.allclose(phases, expected, atol=1e-10)


def test_closed_form_path_is_the_common_case():
    rng = np.random.default_rng(16)
    hits = 0
    for _ in range(200):
        k, l = rng.uniform(-np.pi, np.pi, size=2)
        hits += eigensystem_2d(reduced_operator_2d(k, l)).closed_form
    assert hits > 150


def test_dispersion_derivative_matches_finite_difference():
    rng = np.random.default_rng(17)
    for _ in range(30):
        tess = random_tess_1d(rng)
        if abs(abs(np.cos(tess.alpha)) - abs(np.cos(tess.beta))) < 0.05:
            continue  # stay away from gapless specs
        k = rng.uniform(-3.0, 3.0)
        h = 1e-5
        thetas = []
        for kk in (k - h, k + h):
            phases = eigensystem_1d(reduced_operator_1d(tess, kk)).phases
            thetas.append(abs(phases).max())
        fd = (thetas[1] - thetas[0]) / (2 * h)
        exact = dispersion_derivative_1d(reduced_operator_1d(tess, k))
        assert abs(abs(fd) - abs(exact)) < 1e-6


def test_dispersion_derivative_band_edge():
    # alpha == beta closes the gap at 2k + phi1 + phi2 = pi
    tess = Tessellation1D(1.0, 0.0, 1.0, 0.0)
    with pytest.raises(BandEdgeError):
        dispersion_derivative_1d(reduced_operator_1d(tess, np.pi / 2))


def test_staggered_momenta_layout():
    ks = staggered_momenta(12)
    assert ks.shape == (6,)
    assert ks[0] == 0.0
    assert np.allclose(np.diff(ks), 2 * np.pi / 12)
    with pytest.raises(ValueError):
        staggered_momenta(7)


def test_fourier_round_trip_and_parseval():
    rng = np.random.default_rng(18)
    for _ in range(60):
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        comp = staggered_components(amps)
        assert comp.shape == (2, 8)
        assert abs(np.linalg.norm(comp) - np.linalg.norm(amps)) < 1e-12
        back = staggered_synthesis(comp)
        assert np.allclose(back, amps, atol=1e-12)
    for _ in range(40):
        amps = rng.normal(size=(8, 10)) + 1j * rng.normal(size=(8, 10))
        comp = staggered_components(amps)
        assert comp.shape == (4, 4, 5)
        assert abs(np.linalg.norm(comp) - np.linalg.norm(amps)) < 1e-12
        assert np.allclose(staggered_synthesis(comp), amps, atol=1e-12)


def test_basis_vectors_are_orthonormal():
    L = 8
    vecs = np.column_stack(
        [basis_vector_1d(L, j, p) for j in range(L // 2) for p in (0, 1)]
    )
    assert np.allclose(vecs.conj().T @ vecs, np.eye(L), atol=1e-13)


def random_initial(rng, ndim):
    n = int(rng.integers(1, 4))
    amps = {}
    for _ in range(n):
        coord = tuple(int(c) for c in rng.integers(-2, 3, size=ndim))
        amps[coord if ndim > 1 else coord[0]] = complex(
            rng.normal(), rng.normal()
        )
    z = np.sqrt(sum(abs(v) ** 2 for v in amps.values()))
    return InitialCondition({c: v / z for c, v in amps.items()})


def test_cross_path_1d():
    rng = np.random.default_rng(19)
    L, t = 64, 20
    for _ in range(5):
        tess = random_tess_1d(rng)
        init = random_initial(rng, 1)
        direct = evolve(init, tess, t, extent=L, periodic=True)
        spectral = evolve_momentum(init, tess, t, L)
        assert np.max(np.abs(direct.amps - spectral.amps)) < 1e-12


def test_cross_path_2d():
    rng = np.random.default_rng(20)
    L, t = (16, 16), 8
    tess = Tessellation2D()
    for _ in range(3):
        init = random_initial(rng, 2)
        direct = evolve(init, tess, t, extent=L, periodic=True)
        spectral = evolve_momentum(init, tess, t, L)
        assert np.max(np.abs(direct.amps - spectral.amps)) < 1e-12
