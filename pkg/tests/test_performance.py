# tests/test_performance.py

import numpy as np

from sphere_structures.ambient import AmbientVector, SignPattern, ptilde
from sphere_structures.induced import closed_form_structure, oracle_structure
from sphere_structures.manifolds import SubmanifoldSpec, sample_point, sample_tangent
from sphere_structures.normality import FDConfig, TangentFieldSpec, nijenhuis
from sphere_structures.verify import check_structure_identities, run_suite

TRIPLE = SubmanifoldSpec.triple_product(2, 2, 1.0, 2.0, 1.0)
SIGNS = SignPattern.uniform(1, 2)


def point_and_tangents(spec: SubmanifoldSpec, seed: int = 0):
    rng = np.random.default_rng(seed)
    pt = sample_point(spec, rng)
    return pt, sample_tangent(spec, pt, rng), sample_tangent(spec, pt, rng)


def test_performance_ptilde(benchmark):
    v = AmbientVector(8, 8, np.arange(24, dtype=np.float64))
    signs = SignPattern.uniform(-1, 8)
    benchmark(ptilde, v, signs)


def test_performance_closed_form_structure(benchmark):
    pt, _, _ = point_and_tangents(TRIPLE)
    benchmark(closed_form_structure, TRIPLE, pt, SIGNS)


def test_performance_oracle_structure(benchmark):
    pt, _, _ = point_and_tangents(TRIPLE)
    benchmark(oracle_structure, TRIPLE, pt, SIGNS)


def test_performance_identity_checks(benchmark):
    pt, X, Y = point_and_tangents(TRIPLE)
    struct = closed_form_structure(TRIPLE, pt, SIGNS)
    benchmark(check_structure_identities, struct, X, Y)


def test_performance_nijenhuis(benchmark):
    spec = SubmanifoldSpec.hypersphere(2, 2, 1.0)
    rng = np.random.default_rng(1)
    pt = sample_point(spec, rng)
    F = TangentFieldSpec(spec, AmbientVector(2, 2, rng.standard_normal(6)))
    G = TangentFieldSpec(spec, AmbientVector(2, 2, rng.standard_normal(6)))
    benchmark(nijenhuis, spec, F, G, pt, FDConfig())


def test_performance_suite_parallel(benchmark):
    """Throughput of the whole identity suite with joblib workers."""
    benchmark.pedantic(
        run_suite,
        args=(TRIPLE, SIGNS, 40, 5, 0),
        kwargs={"n_jobs": 2},
        rounds=1,
        iterations=1,
    )
