"""Position-space building blocks: reflections, states, evolution."""
import numpy as np
import pytest

from stagwalk import (
    BoundaryError,
    InitialCondition,
    Tessellation1D,
    Tessellation2D,
    build_reflection,
    evolve,
    probability_distribution,
    step,
)


def random_tess_1d(rng):
    a, b = rng.uniform(0.2, np.pi - 0.2, size=2)
    p1, p2 = rng.uniform(-np.pi, np.pi, size=2)
    return Tessellation1D(a, p1, b, p2)


def test_block_is_unitary_involution():
    rng = np.random.default_rng(1)
    for _ in range(100):
        tess = random_tess_1d(rng)
        for which in (0, 1):
            blk = tess.block(which)
            assert np.allclose(blk @ blk.conj().T, np.eye(2), atol=1e-14)
            assert np.allclose(blk @ blk, np.eye(2), atol=1e-14)
    blk = Tessellation2D().block(0)
    assert np.allclose(blk @ blk.conj().T, np.eye(4), atol=1e-14)
    assert np.allclose(blk, blk.conj().T, atol=1e-15)


def test_dense_reflections_are_unitary_involutions():
    rng = np.random.default_rng(2)
    for _ in range(20):
        tess = random_tess_1d(rng)
        for which in (0, 1):
            for periodic in (False, True):
                mat = build_reflection(tess, which, periodic=periodic).matrix((12,))
                assert np.allclose(mat @ mat.conj().T, np.eye(12), atol=1e-13)
                assert np.allclose(mat @ mat, np.eye(12), atol=1e-13)
    tess2 = Tessellation2D()
    for which in (0, 1):
        mat = build_reflection(tess2, which, periodic=True).matrix((6, 6))
        assert np.allclose(mat @ mat.conj().T, np.eye(36), atol=1e-13)
        assert np.allclose(mat @ mat, np.eye(36), atol=1e-13)


def test_shifted_patterning_is_translated_unshifted():
    # with equal parameters on both patternings, the shifted reflection is
    # exactly the unshifted one conjugated by a one-site translation
    tess = Tessellation1D(0.9, 0.4, 0.9, 0.4)
    L = 10
    r0 = build_reflection(tess, 0, periodic=True).matrix((L,))
    r1 = build_reflection(tess, 1, periodic=True).matrix((L,))
    T = np.roll(np.eye(L), 1, axis=0)
    assert np.allclose(r1, T @ r0 @ T.T, atol=1e-14)

    tess2 = Tessellation2D()
    r0 = build_reflection(tess2, 0, periodic=True).matrix((6, 6))
    r1 = build_reflection(tess2, 1, periodic=True).matrix((6, 6))
    T1 = np.roll(np.eye(6), 1, axis=0)
    T = np.kron(T1, T1)
    assert np.allclose(r1, T @ r0 @ T.T, atol=1e-14)


def test_orphan_sites_get_a_sign_flip():
    # padded shifted patterning leaves the first and last site unpaired;
    # the reflection acts there as -identity so it stays an involution
    tess = Tessellation1D(0.7, 0.0, 1.1, 0.3)
    mat = build_reflection(tess, 1, periodic=False).matrix((8,))
    assert mat[0, 0] == -1.0 and np.allclose(mat[0, 1:], 0.0)
    assert mat[-1, -1] == -1.0 and np.allclose(mat[-1, :-1], 0.0)

    mat2 = build_reflection(Tessellation2D(), 1, periodic=False).matrix((6, 6))
    frame = [i * 6 + j for i in range(6) for j in range(6)
             if i in (0, 5) or j in (0, 5)]
    for idx in frame:
        row = mat2[idx].copy()
        assert row[idx] == -1.0
        row[idx] = 0.0
        assert np.allclose(row, 0.0)


def test_step_preserves_norm():
    rng = np.random.default_rng(3)
    for _ in range(50):
        tess = random_tess_1d(rng)
        amps = rng.normal(size=16) + 1j * rng.normal(size=16)
        amps /= np.linalg.norm(amps)
        init = InitialCondition(dict(enumerate(amps.tolist())))
        state = init.embed((32,), (0,), True)
        state = step(state, tess)
        assert abs(state.norm() - 1.0) < 1e-13
    tess2 = Tessellation2D()
    amps = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    state = InitialCondition.cell([0.5, 0.5, 0.5, 0.5]).embed((8, 8), (0, 0), True)
    state.amps[:] = amps / np.linalg.norm(amps)
    state = step(state, tess2)
    assert abs(state.norm() - 1.0) < 1e-13


def test_support_grows_at_most_two_sites_per_step():
    rng = np.random.default_rng(4)
    for _ in range(30):
        tess = random_tess_1d(rng)
        t = int(rng.integers(1, 6))
        final = evolve(InitialCondition.site(0), tess, t)
        coords, _ = probability_distribution(final, threshold=1e-300)
        assert coords.min() >= -2 * t - 1
        assert coords.max() <= 2 * t + 1
    final = evolve(InitialCondition.cell([0.5, 0.5, 0.5, 0.5]),
                   Tessellation2D(), 3)
    coords, _ = probability_distribution(final, threshold=1e-300)
    assert np.abs(coords).max() <= 2 * 3 + 1


def test_ballistic_transfer_both_directions():
    tess = Tessellation1D(np.pi / 2, 0.0, np.pi / 2, 0.0)
    right = evolve(InitialCondition.site(0), tess, 25)
    coords, probs = probability_distribution(right, threshold=1e-12)
    assert coords.tolist() == [50]
    assert probs[0] == pytest.approx(1.0, abs=1e-14)
    left = evolve(InitialCondition.site(1), tess, 25)
    coords, probs = probability_distribution(left, threshold=1e-12)
    assert coords.tolist() == [-49]
    assert probs[0] == pytest.approx(1.0, abs=1e-14)


def test_initial_condition_validation():
    with pytest.raises(ValueError):
        InitialCondition({0: 1.0, 1: 1.0})  # norm sqrt(2)
    with pytest.raises(ValueError):
        InitialCondition({(0,): 0.5, (0, 0): 0.5})  # mixed arity
    ic = InitialCondition.pair(1 / np.sqrt(2), 1j / np.sqrt(2))
    state = ic.embed((8,), (4,), False)
    assert state.amps[4] == pytest.approx(1 / np.sqrt(2))
    assert state.amps[5] == pytest.approx(1j / np.sqrt(2))
    with pytest.raises(ValueError):
        InitialCondition.site(30).embed((8,), (4,), False)


def test_default_extent_and_origin():
    state = evolve(InitialCondition.site(0), Tessellation1D(1.0), 3)
    assert state.extent == (20,)
    assert state.origin == (10,)
    state = evolve(InitialCondition.cell([1, 0, 0, 0]), Tessellation2D(), 2)
    assert state.extent == (16, 16)
    assert state.origin == (8, 8)


def test_boundary_guard_raises_on_small_extent():
    tess = Tessellation1D(1.0, 0.0, 1.2, 0.0)
    with pytest.raises(BoundaryError):
        evolve(InitialCondition.site(0), tess, 12, extent=16)
    with pytest.raises(BoundaryError):
        evolve(InitialCondition.cell([0.5, 0.5, 0.5, 0.5]),
               Tessellation2D(), 8, extent=(12, 12))


def test_periodic_matches_padded_before_wraparound():
    rng = np.random.default_rng(5)
    tess = random_tess_1d(rng)
    t, L = 6, 32
    padded = evolve(InitialCondition.site(0), tess, t)
    wrapped = evolve(InitialCondition.site(0), tess, t, extent=L, periodic=True)
    # padded support is within +-13 here, so nothing has wrapped yet
    pp = padded.probabilities()
    rel = np.arange(padded.extent[0]) - padded.origin[0]
    acc = np.zeros(L)
    np.add.at(acc, rel % L, pp)
    assert np.allclose(acc, wrapped.probabilities(), atol=1e-13)


def test_probability_distribution_threshold_and_order():
    state = evolve(InitialCondition.site(0), Tessellation1D(0.8, 0.1, 1.3, -0.4), 5)
    coords, probs = probability_distribution(state, threshold=1e-6)
    assert np.all(np.diff(coords) > 0)
    assert np.all(probs >= 1e-6)
    full_coords, full_probs = probability_distribution(state, threshold=0.0)
    assert full_probs.sum() == pytest.approx(1.0, abs=1e-13)
    assert probs.sum() <= full_probs.sum() + 1e-15


def test_evolve_rejects_bad_arguments():
    tess = Tessellation1D(1.0)
    with pytest.raises(ValueError):
        evolve(InitialCondition.site(0), tess, -1)
    with pytest.raises(ValueError):
        evolve(InitialCondition.site(0), tess, 3, periodic=True)  # no extent
    with pytest.raises(ValueError):
        evolve(InitialCondition.site(0), tess, 3, extent=(8, 8))  # wrong arity
