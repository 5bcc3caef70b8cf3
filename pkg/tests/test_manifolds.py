import math

import numpy as np
import numpy.testing as npt
import pytest

from sphere_structures.ambient import AmbientVector, inner
from sphere_structures.manifolds import (
    DomainError,
    SubmanifoldFamily,
    SubmanifoldSpec,
    contains,
    frame_at,
    is_tangent,
    nested_specs,
    normal_frame,
    require_on_manifold,
    sample_point,
    sample_tangent,
    tangent_project,
)

SPECS = [
    SubmanifoldSpec.hypersphere(2, 2, 1.0),
    SubmanifoldSpec.hypersphere(1, 1, 1.5),
    SubmanifoldSpec.double_product(2, 2, 1.0, 2.0),
    SubmanifoldSpec.double_product(1, 3, 0.7, 1.3),
    SubmanifoldSpec.triple_product(2, 2, 1.0, 2.0, 1.0),
    SubmanifoldSpec.triple_product(3, 2, 0.5, 1.5, 2.5),
]


@pytest.fixture(params=SPECS, ids=str)
def spec(request) -> SubmanifoldSpec:
    return request.param


def vec(p, q, values) -> AmbientVector:
    return AmbientVector(p, q, values)


class TestSpecValidation:
    def test_negative_radius(self):
        with pytest.raises(DomainError):
            SubmanifoldSpec.hypersphere(1, 1, -1.0)

    def test_non_finite_radius(self):
        with pytest.raises(DomainError):
            SubmanifoldSpec.double_product(1, 2, math.inf, 1.0)

    def test_double_product_needs_q_two(self):
        with pytest.raises(DomainError):
            SubmanifoldSpec.double_product(1, 1, 1.0, 1.0)

    def test_triple_product_needs_p_two(self):
        with pytest.raises(DomainError):
            SubmanifoldSpec.triple_product(1, 2, 1.0, 1.0, 1.0)

    def test_consistent_derived_radius_is_accepted(self):
        spec = SubmanifoldSpec.from_definition("double_product", 1, 2, {"r": 3.0, "r3": 4.0, "R": 5.0})
        assert spec.radius("R") == 5.0

    def test_inconsistent_derived_radius(self):
        with pytest.raises(DomainError):
            SubmanifoldSpec.from_definition("double_product", 1, 2, {"r": 3.0, "r3": 4.0, "R": 6.0})

    def test_missing_radius(self):
        with pytest.raises(DomainError):
            SubmanifoldSpec.from_definition("triple_product", 2, 2, {"r1": 1.0, "r2": 1.0})

    def test_unknown_family(self):
        with pytest.raises(DomainError):
            SubmanifoldFamily.from_label("torus")

    def test_family_label_must_be_a_string(self):
        with pytest.raises(DomainError):
            SubmanifoldFamily.from_label(5)

    def test_non_numeric_radius(self):
        with pytest.raises(DomainError):
            SubmanifoldSpec.hypersphere(1, 1, "abc")

    def test_dimensions(self):
        spec = SubmanifoldSpec.triple_product(2, 2, 1.0, 1.0, 1.0)
        assert spec.codimension == 3
        assert spec.ambient_dimension == 6
        assert spec.dimension == 3
        derived = spec.derived_radii()
        assert derived["r"] == pytest.approx(math.sqrt(2.0), abs=1e-15)
        assert derived["R"] == pytest.approx(math.sqrt(3.0), abs=1e-15)


@pytest.mark.parametrize(
    "spec, point, expected",
    [
        (SubmanifoldSpec.hypersphere(1, 1, 1.0), [1.0, 0.0, 0.0], True),
        (SubmanifoldSpec.double_product(1, 2, 1.0, 1.0), [1.0, 0.0, 1.0, 0.0], True),
        (SubmanifoldSpec.double_product(1, 2, 1.0, 1.0), [1.0, 0.0, 1.0, 1.0], False),
        (SubmanifoldSpec.triple_product(2, 2, 1.0, 1.0, 1.0), [1.0, 0.0, 0.0, 1.0, 1.0, 0.0], True),
    ],
)
def test_contains(spec, point, expected):
    assert contains(spec, vec(spec.p, spec.q, point), 1e-10) is expected


def test_require_on_manifold_rejects_off_manifold_point():
    spec = SubmanifoldSpec.hypersphere(1, 1, 1.0)
    with pytest.raises(DomainError):
        require_on_manifold(spec, vec(1, 1, [2.0, 0.0, 0.0]))


@pytest.mark.parametrize("bad", [math.nan, math.inf])
def test_non_finite_point_is_rejected(bad):
    spec = SubmanifoldSpec.hypersphere(1, 1, 1.0)
    pt = vec(1, 1, [bad, 0.0, 0.0])
    with pytest.raises(DomainError):
        require_on_manifold(spec, pt)
    with pytest.raises(DomainError):
        normal_frame(spec, pt)
    assert not contains(spec, pt, 1e-10)


def test_frame_at_rejects_nan_radius():
    with pytest.raises(DomainError):
        frame_at(SubmanifoldSpec.hypersphere(1, 1, 1.0), vec(1, 1, [math.nan, 0.0, 0.0]))


class TestNormalFrame:
    def test_hypersphere_unit_point(self):
        spec = SubmanifoldSpec.hypersphere(1, 1, 1.0)
        (n1,) = normal_frame(spec, vec(1, 1, [1.0, 0.0, 0.0]))
        assert n1.data.tolist() == [1.0, 0.0, 0.0]

    def test_double_product_second_normal(self):
        spec = SubmanifoldSpec.double_product(1, 2, 1.0, 1.0)
        _, n2 = normal_frame(spec, vec(1, 2, [1.0, 0.0, 1.0, 0.0]))
        npt.assert_allclose(n2.data, np.array([1.0, 0.0, -1.0, 0.0]) / math.sqrt(2.0), atol=1e-15)

    def test_triple_product_third_normal(self):
        spec = SubmanifoldSpec.triple_product(2, 2, 1.0, 1.0, 1.0)
        frame = normal_frame(spec, vec(2, 2, [1.0, 0.0, 0.0, 1.0, 1.0, 0.0]))
        npt.assert_allclose(
            frame[2].data, np.array([1.0, 0.0, 0.0, -1.0, 0.0, 0.0]) / math.sqrt(2.0), atol=1e-15
        )
        gram = np.array([[f.data @ g.data for g in frame] for f in frame])
        npt.assert_allclose(gram, np.eye(3), atol=1e-12)

    def test_orthonormal_at_sampled_points(self, spec):
        rng = np.random.default_rng(0)
        for _ in range(50):
            pt = sample_point(spec, rng)
            frame = normal_frame(spec, pt)
            assert len(frame) == spec.codimension
            gram = np.array([[f.data @ g.data for g in frame] for f in frame])
            npt.assert_allclose(gram, np.eye(spec.codimension), atol=1e-12)

    def test_orthogonal_to_tangents(self, spec):
        rng = np.random.default_rng(1)
        for _ in range(50):
            pt = sample_point(spec, rng)
            frame = normal_frame(spec, pt)
            v = sample_tangent(spec, pt, rng)
            for n in frame:
                assert abs(n.data @ v.data) < 1e-10

    def test_frame_at_degenerate_point(self):
        spec = SubmanifoldSpec.triple_product(2, 2, 1.0, 1.0, 1.0)
        with pytest.raises(DomainError):
            frame_at(spec, vec(2, 2, [0.0, 0.0, 0.0, 1.0, 1.0, 0.0]))


class TestSampling:
    def test_point_lies_on_manifold(self, spec):
        rng = np.random.default_rng(2)
        for _ in range(50):
            assert contains(spec, sample_point(spec, rng), 1e-10)

    def test_double_product_block_norms(self):
        spec = SubmanifoldSpec.double_product(2, 2, 1.0, 2.0)
        pt = sample_point(spec, np.random.default_rng(5))
        assert np.linalg.norm(pt.data[:4]) == pytest.approx(1.0, abs=1e-10)
        assert np.linalg.norm(pt.zblock) == pytest.approx(2.0, abs=1e-10)

    def test_point_is_deterministic(self, spec):
        a = sample_point(spec, np.random.default_rng(42))
        b = sample_point(spec, np.random.default_rng(42))
        assert a == b

    def test_tangent_is_unit_and_tangent(self, spec):
        rng = np.random.default_rng(3)
        for _ in range(50):
            pt = sample_point(spec, rng)
            v = sample_tangent(spec, pt, rng)
            assert is_tangent(spec, pt, v, 1e-10)
            assert v.norm() == pytest.approx(1.0, abs=1e-12)

    def test_tangents_from_different_seeds_are_independent(self):
        spec = SubmanifoldSpec.hypersphere(2, 2, 1.0)
        pt = sample_point(spec, np.random.default_rng(0))
        u = sample_tangent(spec, pt, np.random.default_rng(1))
        v = sample_tangent(spec, pt, np.random.default_rng(2))
        gram = np.array([[u.data @ u.data, u.data @ v.data], [v.data @ u.data, v.data @ v.data]])
        assert np.linalg.det(gram) > 1e-6


class TestTangency:
    def test_hypersphere_tangent(self):
        spec = SubmanifoldSpec.hypersphere(1, 1, 1.0)
        pt = vec(1, 1, [1.0, 0.0, 0.0])
        assert is_tangent(spec, pt, vec(1, 1, [0.0, 5.0, 2.0]), 1e-10)
        assert not is_tangent(spec, pt, pt, 1e-10)

    def test_double_product_tangent(self):
        spec = SubmanifoldSpec.double_product(1, 2, 1.0, 1.0)
        pt = vec(1, 2, [1.0, 0.0, 1.0, 0.0])
        assert is_tangent(spec, pt, vec(1, 2, [0.0, 1.0, 0.0, 1.0]), 1e-10)
        assert not is_tangent(spec, pt, pt, 1e-10)

    def test_projection_fixes_tangents(self, spec):
        rng = np.random.default_rng(4)
        pt = sample_point(spec, rng)
        v = sample_tangent(spec, pt, rng)
        npt.assert_allclose(tangent_project(spec, pt, v).data, v.data, atol=1e-12)

    def test_projection_kills_normals(self, spec):
        pt = sample_point(spec, np.random.default_rng(5))
        for n in normal_frame(spec, pt):
            npt.assert_allclose(tangent_project(spec, pt, n).data, 0.0, atol=1e-12)

    def test_projection_is_idempotent(self, spec):
        rng = np.random.default_rng(6)
        pt = sample_point(spec, rng)
        v = AmbientVector(spec.p, spec.q, rng.standard_normal(spec.ambient_dimension))
        once = tangent_project(spec, pt, v)
        npt.assert_allclose(tangent_project(spec, pt, once).data, once.data, atol=1e-12)

    def test_projection_and_normals_reconstruct_the_vector(self, spec):
        rng = np.random.default_rng(7)
        for _ in range(10):
            pt = sample_point(spec, rng)
            v = AmbientVector(spec.p, spec.q, rng.standard_normal(spec.ambient_dimension))
            rebuilt = tangent_project(spec, pt, v)
            for n in normal_frame(spec, pt):
                rebuilt = rebuilt + inner(v, n) * n
            npt.assert_allclose(rebuilt.data, v.data, atol=1e-12)


def test_nested_specs():
    spec = SubmanifoldSpec.triple_product(2, 2, 3.0, 4.0, 12.0)
    double, sphere = nested_specs(spec)
    assert double.family == SubmanifoldFamily.DOUBLE_PRODUCT
    assert double.radii == (5.0, 12.0)
    assert sphere.radii == (13.0,)
    assert nested_specs(sphere) == []


@pytest.mark.parametrize(
    "spec",
    [
        SubmanifoldSpec.double_product(2, 2, 1.0, 2.0),
        SubmanifoldSpec.triple_product(2, 2, 1.0, 2.0, 1.0),
        SubmanifoldSpec.triple_product(3, 2, 0.5, 1.5, 2.5),
    ],
    ids=str,
)
def test_tangents_are_tangent_to_enclosing_families(spec):
    rng = np.random.default_rng(8)
    for _ in range(20):
        pt = sample_point(spec, rng)
        v = sample_tangent(spec, pt, rng)
        for outer in nested_specs(spec):
            assert contains(outer, pt, 1e-10)
            assert is_tangent(outer, pt, v, 1e-10)
