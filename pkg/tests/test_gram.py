import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gramtrack.errors import (DegenerateInputError, DimensionError,
                              NumericConsistencyError)
from gramtrack.gram import (build_gram, determinant, normalized_determinant,
                            parallelotope_volume, substitute_and_det)
from oracles import cofactor_determinant, random_unit_features


def vec(*values):
    return np.asarray(values, dtype=np.float64).reshape(1, 1, -1)


E1, E2, E3 = vec(1, 0, 0), vec(0, 1, 0), vec(0, 0, 1)


# -- build_gram ---------------------------------------------------------------

def test_gram_orthonormal_is_identity():
    g = build_gram([E1, E2])
    assert np.array_equal(g, np.eye(2))


def test_gram_duplicate_rows():
    f = vec(1.0, 2.0)
    g = build_gram([f, f])
    c = 5.0
    assert np.allclose(g, [[c, c], [c, c]], atol=1e-12)


def test_gram_sixty_degrees():
    a = vec(1.0, 0.0)
    b = vec(0.5, np.sqrt(3) / 2)
    g = build_gram([a, b])
    assert np.allclose(g, [[1.0, 0.5], [0.5, 1.0]], atol=1e-12)


def test_gram_exactly_symmetric(rng):
    feats = random_unit_features(rng, 6, 12)
    g = build_gram(feats)
    assert np.array_equal(g, g.T)


def test_gram_empty_raises():
    with pytest.raises(DimensionError):
        build_gram([])


def test_gram_shape_mismatch():
    with pytest.raises(DimensionError):
        build_gram([vec(1, 0), vec(1, 0, 0)])


# -- determinant ----------------------------------------------------------------

def test_det_identity():
    assert determinant(np.eye(2)) == pytest.approx(1.0, abs=1e-15)


def test_det_rank_deficient():
    assert determinant([[1.0, 1.0], [1.0, 1.0]]) == pytest.approx(0.0, abs=1e-12)


def test_det_hand_value():
    assert determinant([[1.0, 0.5], [0.5, 1.0]]) == pytest.approx(0.75, abs=1e-12)


def test_det_matches_cofactor_oracle(rng):
    for _ in range(200):
        n = int(rng.integers(1, 7))
        feats = random_unit_features(rng, n, 16)
        g = build_gram(feats)
        lu = determinant(g)
        ref = cofactor_determinant(g)
        assert lu == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_det_permutation_invariant(rng):
    feats = random_unit_features(rng, 5, 10)
    g = build_gram(feats)
    base = determinant(g)
    for _ in range(10):
        perm = rng.permutation(5)
        permuted = build_gram([feats[i] for i in perm])
        assert determinant(permuted) == pytest.approx(base, rel=1e-9, abs=1e-12)


def test_det_hadamard_bound_unit_features(rng):
    for _ in range(50):
        n = int(rng.integers(1, 7))
        feats = random_unit_features(rng, n, 12)
        assert determinant(build_gram(feats)) <= 1.0 + 1e-9


def test_det_zero_when_more_vectors_than_dims(rng):
    # n > D forces linear dependence
    for _ in range(20):
        dim = int(rng.integers(1, 5))
        feats = random_unit_features(rng, dim + int(rng.integers(1, 4)), dim)
        assert abs(determinant(build_gram(feats))) < 1e-6


# -- normalized determinant ---------------------------------------------------

def test_normalized_det_unit_diagonal_equals_det(rng):
    feats = random_unit_features(rng, 4, 9)
    g = build_gram(feats)
    assert normalized_determinant(g) == pytest.approx(determinant(g), rel=1e-12)


def test_normalized_det_scale_invariant(rng):
    feats = random_unit_features(rng, 4, 9)
    g = build_gram(feats)
    for s in (0.25, 3.0, 117.0):
        assert normalized_determinant(g * s) == pytest.approx(
            normalized_determinant(g), rel=1e-9)


def test_normalized_det_hand_value():
    assert normalized_determinant([[4.0, 2.0], [2.0, 4.0]]) == pytest.approx(0.75, abs=1e-12)


def test_normalized_det_degenerate_g11():
    with pytest.raises(DegenerateInputError):
        normalized_determinant([[0.0, 0.0], [0.0, 1.0]])


# -- substitution ----------------------------------------------------------------

def test_substitute_self_keeps_det(rng):
    feats = random_unit_features(rng, 4, 8)
    g = build_gram(feats)
    for slot in range(4):
        det = substitute_and_det(g, feats, feats[slot], slot)
        assert det == pytest.approx(determinant(g), rel=1e-9, abs=1e-12)


def test_substitute_duplicate_gives_zero():
    g = build_gram([E1, E2])
    assert substitute_and_det(g, [E1, E2], E1, 1) == pytest.approx(0.0, abs=1e-12)


def test_substitute_hand_value():
    mixed = vec(1 / np.sqrt(2), 1 / np.sqrt(2), 0)
    feats = [E1, mixed]
    g = build_gram(feats)
    assert determinant(g) == pytest.approx(0.5, abs=1e-12)
    assert substitute_and_det(g, feats, E2, 1) == pytest.approx(1.0, abs=1e-12)


def test_substitute_does_not_mutate(rng):
    feats = random_unit_features(rng, 3, 6)
    g = build_gram(feats)
    before = g.copy()
    substitute_and_det(g, feats, random_unit_features(rng, 1, 6)[0], 2)
    assert np.array_equal(g, before)


def test_substitute_slot_out_of_range(rng):
    feats = random_unit_features(rng, 3, 6)
    g = build_gram(feats)
    with pytest.raises(IndexError):
        substitute_and_det(g, feats, feats[0], 3)


def test_substitute_matches_rebuild_oracle(rng):
    # acceptance-grade oracle equivalence at smaller trial count
    from oracles import rebuild_substitution_det
    for _ in range(200):
        n = int(rng.integers(2, 9))
        feats = random_unit_features(rng, n, 12)
        cand = random_unit_features(rng, 1, 12)[0]
        slot = int(rng.integers(0, n))
        g = build_gram(feats)
        fast = substitute_and_det(g, feats, cand, slot)
        ref = rebuild_substitution_det(feats, cand, slot)
        assert fast == pytest.approx(ref, rel=1e-9, abs=1e-12)


# -- volume ---------------------------------------------------------------------

def test_volume_identity():
    assert parallelotope_volume(np.eye(4)) == pytest.approx(1.0, abs=1e-12)


def test_volume_singular():
    assert parallelotope_volume([[1.0, 1.0], [1.0, 1.0]]) == 0.0


def test_volume_thirty_degrees():
    c = np.cos(np.pi / 6)
    g = [[1.0, c], [c, 1.0]]
    assert parallelotope_volume(g) == pytest.approx(0.5, abs=1e-12)


def test_volume_clamps_tiny_negative():
    assert parallelotope_volume([[1.0, 1.0], [1.0, 1.0 - 1e-12]]) >= 0.0


def test_volume_rejects_large_negative():
    with pytest.raises(NumericConsistencyError):
        parallelotope_volume([[0.0, 1.0], [1.0, 0.0]])


@given(st.integers(0, 2 ** 31))
@settings(max_examples=30, deadline=None)
def test_gram_psd_leading_minors(seed):
    r = np.random.default_rng(seed)
    feats = random_unit_features(r, int(r.integers(1, 6)), 10)
    g = build_gram(feats)
    for k in range(1, g.shape[0] + 1):
        assert determinant(g[:k, :k]) >= -1e-9
