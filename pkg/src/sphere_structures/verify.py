# verify.py

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any, Final

import numpy as np
from joblib import Parallel, cpu_count, delayed
from tqdm import tqdm

from sphere_structures import config
from sphere_structures.ambient import AmbientVector, SignPattern, inner
from sphere_structures.induced import (
    InducedStructure,
    closed_form_structure,
    has_closed_form,
    hypersphere_consistency,
    normal_components,
    oracle_structure,
    p_apply,
    u_form,
    u_gram,
)
from sphere_structures.loguru_logger import logger
from sphere_structures.manifolds import SubmanifoldFamily, SubmanifoldSpec, sample_point, sample_tangent

# The eight pointwise identities of an induced (a,1)f structure.
STRUCTURE_IDENTITIES: Final[tuple[str, ...]] = (
    "identity.p_squared",
    "identity.u_of_p",
    "identity.a_symmetry",
    "identity.u_of_xi",
    "identity.p_of_xi",
    "identity.u_metric",
    "identity.p_symmetric",
    "identity.p_isometry",
)
CUBIC_IDENTITY: Final[str] = "identity.p_cubed"
CLOSED_FORM_PREFIX: Final[str] = "closed_form."
AGREEMENT_CHECKS: Final[tuple[str, ...]] = (
    "agreement.a",
    "agreement.xi",
    "agreement.u",
    "agreement.p",
)
CONSISTENCY_CHECK: Final[str] = "consistency.hypersphere_u"

# Category keys accepted in a tolerance map next to full residual names.
_CATEGORY_DEFAULTS: Final[dict[str, float]] = {
    "algebraic": config.TOL_ALGEBRAIC,
    "composed": config.TOL_COMPOSED,
    "agreement": config.TOL_AGREEMENT,
    "normality": config.TOL_NORMALITY,
    "weingarten": config.TOL_WEINGARTEN,
    "commutation": config.TOL_COMMUTATION,
    "self_adjoint": config.TOL_SELF_ADJOINT,
    "connection": config.TOL_CONNECTION,
}


def residual_category(name: str) -> str:
    """The tolerance category a residual name falls into."""
    base = name.removeprefix(CLOSED_FORM_PREFIX)
    if base == CUBIC_IDENTITY:
        return "composed"
    if base.startswith("identity.") or base.startswith("consistency."):
        return "algebraic"
    if base.startswith("agreement."):
        return "agreement"
    if base.startswith("normality."):
        key = base.removeprefix("normality.")
        if key == "sphere_shape_operator":
            return "weingarten"
        if key == "weingarten_commutation":
            return "commutation"
        if key == "weingarten_self_adjoint":
            return "self_adjoint"
        if key == "normal_connection":
            return "connection"
        return "normality"
    return "algebraic"


def resolve_tolerance(name: str, tols: Mapping[str, float] | None) -> float:
    tols = tols or {}
    if name in tols:
        return float(tols[name])
    category = residual_category(name)
    return float(tols.get(category, _CATEGORY_DEFAULTS[category]))


@dataclass(frozen=True, slots=True)
class Residual:
    """Aggregate absolute error of one identity over a sample set."""

    max_abs_err: float
    mean_abs_err: float
    samples: int
    tol: float
    asserted: bool = True

    @property
    def passed(self) -> bool:
        return self.max_abs_err < self.tol

    def to_dict(self) -> dict[str, Any]:
        return {
            "asserted": self.asserted,
            "max_abs_err": self.max_abs_err,
            "mean_abs_err": self.mean_abs_err,
            "pass": self.passed,
            "samples": self.samples,
            "tol": self.tol,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Residual:
        return cls(
            float(data["max_abs_err"]),
            float(data["mean_abs_err"]),
            int(data["samples"]),
            float(data["tol"]),
            bool(data.get("asserted", True)),
        )


class ResidualAccumulator:
    """
    Running max / sum / count per residual name. Sums are taken in
    insertion order, so merging per-point accumulators in a fixed order
    gives bit-identical means.
    """

    __slots__ = ("_stats",)

    def __init__(self):
        self._stats: dict[str, list[float]] = {}

    def add(self, name: str, value: float):
        value = abs(float(value))
        stats = self._stats.get(name)
        if stats is None:
            self._stats[name] = [value, value, 1]
            return
        if value > stats[0] or math.isnan(value):
            stats[0] = value
        stats[1] += value
        stats[2] += 1

    def add_many(self, values: Mapping[str, float]):
        for name, value in values.items():
            self.add(name, value)

    def merge(self, other: ResidualAccumulator):
        for name, (mx, total, count) in other._stats.items():
            stats = self._stats.get(name)
            if stats is None:
                self._stats[name] = [mx, total, count]
                continue
            if mx > stats[0] or math.isnan(mx):
                stats[0] = mx
            stats[1] += total
            stats[2] += count

    def names(self) -> list[str]:
        return list(self._stats)

    def finalize(
        self,
        tols: Mapping[str, float] | None = None,
        asserted: Iterable[str] | None = None,
    ) -> dict[str, Residual]:
        """asserted=None asserts every residual."""
        asserted = None if asserted is None else set(asserted)
        return {
            name: Residual(
                max_abs_err=mx,
                mean_abs_err=total / count,
                samples=int(count),
                tol=resolve_tolerance(name, tols),
                asserted=asserted is None or name in asserted,
            )
            for name, (mx, total, count) in sorted(self._stats.items())
        }


@dataclass(frozen=True, slots=True)
class ResidualReport:
    residuals: dict[str, Residual]
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(res.passed for res in self.residuals.values() if res.asserted)

    def failures(self) -> list[str]:
        return [name for name, res in self.residuals.items() if res.asserted and not res.passed]

    def merged(self, other: ResidualReport) -> ResidualReport:
        residuals = dict(self.residuals)
        residuals.update(other.residuals)
        metadata = dict(self.metadata)
        metadata.update(other.metadata)
        return ResidualReport(dict(sorted(residuals.items())), metadata)

    def to_dict(self) -> dict[str, Any]:
        return {
            "metadata": self.metadata,
            "passed": self.passed,
            "residuals": {name: res.to_dict() for name, res in self.residuals.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> ResidualReport:
        return cls(
            {name: Residual.from_dict(res) for name, res in data["residuals"].items()},
            dict(data.get("metadata", {})),
        )

    def to_json(self) -> str:
        # json writes floats with repr, the shortest round-trip decimal form.
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> ResidualReport:
        return cls.from_dict(json.loads(text))

    def to_csv_rows(self) -> list[list[str]]:
        rows = [["identity", "max_abs_err", "mean_abs_err", "samples", "tol", "pass", "asserted"]]
        for name, res in self.residuals.items():
            rows.append(
                [
                    name,
                    repr(res.max_abs_err),
                    repr(res.mean_abs_err),
                    str(res.samples),
                    repr(res.tol),
                    str(res.passed).lower(),
                    str(res.asserted).lower(),
                ]
            )
        return rows

    def to_csv(self) -> str:
        buffer = io.StringIO()
        csv.writer(buffer, lineterminator="\n").writerows(self.to_csv_rows())
        return buffer.getvalue()


# --- Pointwise checks ---


def _max_abs(values) -> float:
    values = np.asarray(values, dtype=np.float64)
    if values.size == 0:
        return 0.0
    return float(np.max(np.abs(values)))


def _combine(coefficients: np.ndarray, vectors: tuple[AmbientVector, ...]) -> np.ndarray:
    out = np.zeros_like(vectors[0].data)
    for coefficient, vector in zip(coefficients, vectors):
        out += coefficient * vector.data
    return out


def check_structure_identities(
    struct: InducedStructure, X: AmbientVector, Y: AmbientVector, eps: int = 1
) -> dict[str, float]:
    """
    Maximum absolute violation of each of the eight identities an induced
    (a,eps)f structure satisfies, at tangent vectors X and Y.
    """
    a, xi = struct.a, struct.xi
    c = struct.codimension
    PX = p_apply(struct, X)
    PY = p_apply(struct, Y)
    uX = u_form(struct, X)
    uY = u_form(struct, Y)

    p_squared = p_apply(struct, PX).data - eps * (X.data - _combine(uX, xi))
    u_of_p = u_form(struct, PX) + a.T @ uX
    a_symmetry = a - eps * a.T
    u_xi = np.column_stack([u_form(struct, xi_beta) for xi_beta in xi])
    u_of_xi = u_xi - (np.eye(c) - eps * (a @ a))
    p_of_xi = [p_apply(struct, xi[alpha]).data + _combine(a[alpha], xi) for alpha in range(c)]

    gram = u_gram(struct, X)
    definitional = normal_components(struct.frame, X, struct.signs)
    u_metric = np.concatenate((uX - gram, definitional - gram))

    p_symmetric = inner(PX, Y) - eps * inner(X, PY)
    p_isometry = inner(PX, PY) - inner(X, Y) + float(np.dot(uX, uY))

    values = (p_squared, u_of_p, a_symmetry, u_of_xi, p_of_xi, u_metric, p_symmetric, p_isometry)
    return {name: _max_abs(value) for name, value in zip(STRUCTURE_IDENTITIES, values)}


def check_cubic_identity(struct: InducedStructure, X: AmbientVector, eps: int = 1) -> float:
    """
    P^3 X against eps P X + sum a_ab <X, xi_b> xi_a, with the induced P
    composed three times.
    """
    PX = p_apply(struct, X)
    P3X = p_apply(struct, p_apply(struct, PX))
    gram = u_gram(struct, X)
    rhs = eps * PX.data + _combine(struct.a @ gram, struct.xi)
    return _max_abs(P3X.data - rhs)


def check_agreement(
    closed: InducedStructure, oracle: InducedStructure, X: AmbientVector
) -> dict[str, float]:
    """Componentwise deviation between the closed-form and oracle structures."""
    xi = max(_max_abs(c.data - o.data) for c, o in zip(closed.xi, oracle.xi))
    return {
        "agreement.a": _max_abs(closed.a - oracle.a),
        "agreement.xi": xi,
        "agreement.u": _max_abs(u_form(closed, X) - u_form(oracle, X)),
        "agreement.p": _max_abs(p_apply(closed, X).data - p_apply(oracle, X).data),
    }


# --- Suite ---


def _evaluate_point(
    spec: SubmanifoldSpec,
    signs: SignPattern,
    n_vectors: int,
    seed_sequence: np.random.SeedSequence,
) -> ResidualAccumulator:
    rng = np.random.default_rng(seed_sequence)
    pt = sample_point(spec, rng)
    acc = ResidualAccumulator()
    oracle = oracle_structure(spec, pt, signs)
    closed = closed_form_structure(spec, pt, signs) if has_closed_form(spec, signs) else None
    consistency = closed is not None and spec.family != SubmanifoldFamily.HYPERSPHERE

    for _ in range(n_vectors):
        X = sample_tangent(spec, pt, rng)
        Y = sample_tangent(spec, pt, rng)
        acc.add_many(check_structure_identities(oracle, X, Y))
        acc.add(CUBIC_IDENTITY, check_cubic_identity(oracle, X))
        if closed is None:
            continue
        for name, value in check_structure_identities(closed, X, Y).items():
            acc.add(CLOSED_FORM_PREFIX + name, value)
        acc.add(CLOSED_FORM_PREFIX + CUBIC_IDENTITY, check_cubic_identity(closed, X))
        acc.add_many(check_agreement(closed, oracle, X))
        if consistency:
            acc.add(CONSISTENCY_CHECK, hypersphere_consistency(spec, pt, X, signs))
    return acc


def spec_metadata(spec: SubmanifoldSpec) -> dict[str, Any]:
    return {
        "family": spec.family.label,
        "p": spec.p,
        "q": spec.q,
        "radii": spec.named_radii(),
    }


def run_suite(
    spec: SubmanifoldSpec,
    signs: SignPattern,
    n_points: int,
    n_vectors: int,
    seed: int,
    tols: Mapping[str, float] | None = None,
    n_jobs: int = 1,
    verbose: bool = False,
) -> ResidualReport:
    """
    Samples n_points points and n_vectors tangent pairs at each, and
    aggregates every pointwise identity, the closed-form/oracle agreement
    and the hypersphere consistency check. Each point draws from its own
    stream spawned off SeedSequence(seed), so the report does not depend
    on n_jobs.
    """
    if n_points < 1 or n_vectors < 1:
        raise ValueError(f"n_points and n_vectors must be >= 1, got {n_points}, {n_vectors}.")
    if n_jobs == -1:
        n_jobs = cpu_count()

    logger.info(
        f"Running identity suite on {spec} signs={signs} seed={seed} "
        f"({n_points} points x {n_vectors} vectors, n_jobs={n_jobs})"
    )
    seeds = np.random.SeedSequence(seed).spawn(n_points)
    parallel_gen = Parallel(n_jobs=n_jobs, prefer="processes", return_as="generator")(
        delayed(_evaluate_point)(spec, signs, n_vectors, ss) for ss in seeds
    )

    total = ResidualAccumulator()
    with tqdm(total=n_points, disable=not verbose, desc=str(spec)) as pbar:
        for acc in parallel_gen:
            total.merge(acc)
            pbar.update(1)

    report = ResidualReport(
        total.finalize(tols),
        {
            "n_points": n_points,
            "n_vectors": n_vectors,
            "seed": seed,
            "signs": list(signs.signs),
            "spec": spec_metadata(spec),
            "closed_form": has_closed_form(spec, signs),
        },
    )
    for name in report.failures():
        logger.warning(f"{name} failed: {report.residuals[name].max_abs_err!r}")
    logger.info(f"Identity suite finished, passed={report.passed}")
    return report

