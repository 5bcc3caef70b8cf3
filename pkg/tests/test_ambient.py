import numpy as np
import numpy.testing as npt
import pytest

from sphere_structures.ambient import (
    AmbientVector,
    DimensionError,
    SignPattern,
    block_scalars,
    inner,
    ptilde,
)

PATTERNS = [(1, 1, 1), (-1, -1, -1), (1, -1, 1)]


@pytest.mark.parametrize(
    "signs, expected",
    [
        ((1,), [2.0, 1.0, 3.0]),  # Plain block swap
        ((-1,), [2.0, 1.0, -3.0]),  # Sign flip on the z-block
    ],
)
def test_ptilde_swaps_blocks(signs, expected):
    v = AmbientVector(1, 1, [1.0, 2.0, 3.0])
    assert ptilde(v, SignPattern(signs)).data.tolist() == expected


def test_ptilde_mixed_signs():
    v = AmbientVector(2, 2, [1.0, 2.0, 3.0, 4.0, 5.0, 6.0])
    out = ptilde(v, SignPattern((1, -1)))
    assert out.data.tolist() == [3.0, 4.0, 1.0, 2.0, 5.0, -6.0]


@pytest.mark.parametrize("signs", PATTERNS)
def test_ptilde_is_an_exact_involution(signs):
    rng = np.random.default_rng(7)
    s = SignPattern(signs)
    for _ in range(20):
        v = AmbientVector(3, 3, rng.standard_normal(9))
        assert ptilde(ptilde(v, s), s) == v


@pytest.mark.parametrize("signs", PATTERNS)
def test_ptilde_is_an_isometry(signs):
    rng = np.random.default_rng(11)
    s = SignPattern(signs)
    for _ in range(10_000):
        u = AmbientVector(2, 3, rng.uniform(-10.0, 10.0, 7))
        v = AmbientVector(2, 3, rng.uniform(-10.0, 10.0, 7))
        assert inner(ptilde(u, s), ptilde(v, s)) == pytest.approx(inner(u, v), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("signs", PATTERNS)
def test_ptilde_is_self_adjoint(signs):
    rng = np.random.default_rng(12)
    s = SignPattern(signs)
    for _ in range(1_000):
        u = AmbientVector(2, 3, rng.uniform(-10.0, 10.0, 7))
        v = AmbientVector(2, 3, rng.uniform(-10.0, 10.0, 7))
        assert inner(ptilde(u, s), v) == pytest.approx(inner(u, ptilde(v, s)), rel=1e-12, abs=1e-12)


def test_ptilde_rejects_wrong_sign_length():
    v = AmbientVector(1, 2, [1.0, 2.0, 3.0, 4.0])
    with pytest.raises(DimensionError):
        ptilde(v, SignPattern((1,)))


@pytest.mark.parametrize(
    "u, v, expected",
    [
        ([1.0, 0.0, 0.0], [1.0, 0.0, 0.0], 1.0),
        ([1.0, 2.0, 3.0], [3.0, 2.0, 1.0], 10.0),
    ],
)
def test_inner(u, v, expected):
    assert inner(AmbientVector(1, 1, u), AmbientVector(1, 1, v)) == expected


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner(AmbientVector(1, 1, [1.0, 0.0, 0.0]), AmbientVector(1, 2, [1.0, 0.0, 0.0, 0.0]))


def test_vector_rejects_bad_length():
    with pytest.raises(DimensionError):
        AmbientVector(2, 1, [1.0, 2.0, 3.0])


def test_vector_data_is_read_only():
    v = AmbientVector(1, 1, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        v.data[0] = 5.0


def test_vector_does_not_alias_input():
    source = np.array([1.0, 2.0, 3.0])
    v = AmbientVector(1, 1, source)
    source[0] = 9.0
    assert v.data[0] == 1.0


def test_from_blocks_and_views():
    v = AmbientVector.from_blocks([1.0, 2.0], [3.0, 4.0], [5.0])
    assert v.dims == (2, 1)
    assert v.xblock.tolist() == [1.0, 2.0]
    assert v.yblock.tolist() == [3.0, 4.0]
    assert v.zblock.tolist() == [5.0]


def test_from_blocks_rejects_unequal_xy():
    with pytest.raises(DimensionError):
        AmbientVector.from_blocks([1.0, 2.0], [3.0], [5.0])


def test_arithmetic():
    u = AmbientVector(1, 1, [1.0, 2.0, 3.0])
    v = AmbientVector(1, 1, [1.0, 1.0, 1.0])
    assert (u + v).data.tolist() == [2.0, 3.0, 4.0]
    assert (u - v).data.tolist() == [0.0, 1.0, 2.0]
    assert (2 * u).data.tolist() == [2.0, 4.0, 6.0]
    assert (u / 2).data.tolist() == [0.5, 1.0, 1.5]
    assert (-u).data.tolist() == [-1.0, -2.0, -3.0]
    with pytest.raises(DimensionError):
        u + AmbientVector.zeros(1, 2)


def test_block_scalars():
    rng = np.random.default_rng(3)
    data = rng.standard_normal(7)  # p=2, q=3
    r1sq, r2sq, r3sq, sigma = block_scalars(data, 2)
    npt.assert_allclose(
        [r1sq, r2sq, r3sq, sigma],
        [data[:2] @ data[:2], data[2:4] @ data[2:4], data[4:] @ data[4:], data[:2] @ data[2:4]],
        atol=1e-14,
    )


class TestSignPattern:
    def test_rejects_zero(self):
        with pytest.raises(DimensionError):
            SignPattern((1, 0))

    def test_rejects_empty(self):
        with pytest.raises(DimensionError):
            SignPattern(())

    def test_uniform(self):
        s = SignPattern.uniform(-1, 3)
        assert s.signs == (-1, -1, -1)
        assert s.is_uniform
        assert s.epsilon == -1
        assert str(s) == "(-1,-1,-1)"

    def test_epsilon_of_mixed_pattern_raises(self):
        with pytest.raises(DimensionError):
            SignPattern((1, -1)).epsilon

    def test_equality_ignores_cached_array(self):
        assert SignPattern((1, -1)) == SignPattern((1, -1))
        assert SignPattern((1, -1)) != SignPattern((-1, 1))
