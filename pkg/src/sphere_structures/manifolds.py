from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass
from enum import IntEnum, unique

import numpy as np

from sphere_structures.ambient import AmbientVector, DimensionError, GeometryError, block_scalars
from sphere_structures.config import (
    RADIUS_FLOOR,
    TANGENT_RESAMPLE_FLOOR,
    TOL_ON_MANIFOLD,
    TOL_RADII_CONSISTENCY,
)


class DomainError(GeometryError):
    """A point or vector lies outside the domain an operation is defined on."""


@unique
class SubmanifoldFamily(IntEnum):
    """The value of each member is the codimension of the family in E^{2p+q}."""

    HYPERSPHERE = 1
    DOUBLE_PRODUCT = 2
    TRIPLE_PRODUCT = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, label: str) -> SubmanifoldFamily:
        if not isinstance(label, str):
            raise DomainError(f"Submanifold family must be named by a string, got {label!r}.")
        key = label.strip().upper().replace("-", "_")
        try:
            return cls[key]
        except KeyError:
            raise DomainError(f"Unknown submanifold family '{label}'.") from None


# Radius names owned by each family, in storage order.
_RADIUS_NAMES: dict[SubmanifoldFamily, tuple[str, ...]] = {
    SubmanifoldFamily.HYPERSPHERE: ("R",),
    SubmanifoldFamily.DOUBLE_PRODUCT: ("r", "r3"),
    SubmanifoldFamily.TRIPLE_PRODUCT: ("r1", "r2", "r3"),
}


@dataclass(frozen=True, slots=True)
class SubmanifoldSpec:
    """
    One of the three sphere families sitting in E^{2p+q}:
      HYPERSPHERE     S^{2p+q-1}(R)
      DOUBLE_PRODUCT  S^{2p-1}(r) x S^{q-1}(r3)
      TRIPLE_PRODUCT  S^{p-1}(r1) x S^{p-1}(r2) x S^{q-1}(r3)
    """

    family: SubmanifoldFamily
    p: int
    q: int
    radii: tuple[float, ...]

    def __post_init__(self):
        try:
            radii = tuple(float(r) for r in self.radii)
        except (TypeError, ValueError):
            raise DomainError(f"Radii must be real numbers, got {self.radii!r}.") from None
        object.__setattr__(self, "radii", radii)
        names = _RADIUS_NAMES[self.family]
        if len(radii) != len(names):
            raise DomainError(
                f"{self.family.label} takes radii {names}, got {len(radii)} values."
            )
        for name, value in zip(names, radii):
            if not value > 0.0 or not math.isfinite(value):
                raise DomainError(f"Radius {name} must be a positive real, got {value}.")
        if self.p < 1 or self.q < 1:
            raise DomainError(f"p and q must be positive integers, got p={self.p}, q={self.q}.")
        if self.family == SubmanifoldFamily.DOUBLE_PRODUCT and self.q < 2:
            raise DomainError("double_product requires q >= 2.")
        if self.family == SubmanifoldFamily.TRIPLE_PRODUCT and (self.p < 2 or self.q < 2):
            raise DomainError("triple_product requires p >= 2 and q >= 2.")

    @classmethod
    def hypersphere(cls, p: int, q: int, R: float) -> SubmanifoldSpec:
        return cls(SubmanifoldFamily.HYPERSPHERE, p, q, (R,))

    @classmethod
    def double_product(cls, p: int, q: int, r: float, r3: float) -> SubmanifoldSpec:
        return cls(SubmanifoldFamily.DOUBLE_PRODUCT, p, q, (r, r3))

    @classmethod
    def triple_product(
        cls, p: int, q: int, r1: float, r2: float, r3: float
    ) -> SubmanifoldSpec:
        return cls(SubmanifoldFamily.TRIPLE_PRODUCT, p, q, (r1, r2, r3))

    @classmethod
    def from_definition(
        cls, family: SubmanifoldFamily | str, p: int, q: int, radii: Mapping[str, float]
    ) -> SubmanifoldSpec:
        """
        Builds a spec from named radii. Derived radii (r for the triple
        product, R for both products) may be supplied as well; they must
        agree with the ones computed from the owned radii.
        """
        if isinstance(family, str):
            family = SubmanifoldFamily.from_label(family)
        names = _RADIUS_NAMES[family]
        missing = [name for name in names if name not in radii]
        if missing:
            raise DomainError(f"{family.label} is missing radii {missing}.")
        spec = cls(family, int(p), int(q), tuple(radii[name] for name in names))
        derived = spec.derived_radii()
        for name, value in radii.items():
            if name in names:
                continue
            if name not in derived:
                raise DomainError(f"Unknown radius '{name}' for {family.label}.")
            expected = derived[name]
            if abs(float(value) ** 2 - expected**2) > TOL_RADII_CONSISTENCY * max(1.0, expected**2):
                raise DomainError(
                    f"Radius {name}={value} is inconsistent with the factor radii "
                    f"(expected {expected!r})."
                )
        return spec

    @property
    def codimension(self) -> int:
        return int(self.family)

    @property
    def ambient_dimension(self) -> int:
        return 2 * self.p + self.q

    @property
    def dimension(self) -> int:
        return self.ambient_dimension - self.codimension

    def radius(self, name: str) -> float:
        values = self.named_radii()
        if name in values:
            return values[name]
        derived = self.derived_radii()
        if name in derived:
            return derived[name]
        raise DomainError(f"{self.family.label} has no radius '{name}'.")

    def named_radii(self) -> dict[str, float]:
        return dict(zip(_RADIUS_NAMES[self.family], self.radii))

    def derived_radii(self) -> dict[str, float]:
        if self.family == SubmanifoldFamily.HYPERSPHERE:
            return {}
        if self.family == SubmanifoldFamily.DOUBLE_PRODUCT:
            r, r3 = self.radii
            return {"R": math.hypot(r, r3)}
        r1, r2, r3 = self.radii
        r = math.hypot(r1, r2)
        return {"r": r, "R": math.hypot(r, r3)}

    def check_dims(self, v: AmbientVector):
        if v.dims != (self.p, self.q):
            raise DimensionError(
                f"Vector dims {v.dims} do not match spec dims {(self.p, self.q)}."
            )

    def __str__(self) -> str:
        radii = ", ".join(f"{k}={v:g}" for k, v in self.named_radii().items())
        return f"{self.family.label}(p={self.p}, q={self.q}, {radii})"


@dataclass(frozen=True, slots=True)
class RadiiAtPoint:
    """Point-dependent radii and sigma = sum x^i y^i, read off the coordinates."""

    r1sq: float
    r2sq: float
    r3sq: float
    rsq: float
    Rsq: float
    sigma: float

    @classmethod
    def at(cls, pt: AmbientVector) -> RadiiAtPoint:
        r1sq, r2sq, r3sq, sigma = block_scalars(pt.data, pt.p)
        rsq = r1sq + r2sq
        return cls(r1sq, r2sq, r3sq, rsq, rsq + r3sq, sigma)

    @property
    def r1(self) -> float:
        return math.sqrt(self.r1sq)

    @property
    def r2(self) -> float:
        return math.sqrt(self.r2sq)

    @property
    def r3(self) -> float:
        return math.sqrt(self.r3sq)

    @property
    def r(self) -> float:
        return math.sqrt(self.rsq)

    @property
    def R(self) -> float:
        return math.sqrt(self.Rsq)


def _factor_residuals(spec: SubmanifoldSpec, rad: RadiiAtPoint) -> list[float]:
    """Distance of each point radius from the radius the family prescribes."""
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        (R,) = spec.radii
        return [abs(rad.R - R)]
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        r, r3 = spec.radii
        return [abs(rad.r - r), abs(rad.r3 - r3)]
    r1, r2, r3 = spec.radii
    return [abs(rad.r1 - r1), abs(rad.r2 - r2), abs(rad.r3 - r3)]


def contains(spec: SubmanifoldSpec, pt: AmbientVector, tol: float) -> bool:
    spec.check_dims(pt)
    return all(res <= tol for res in _factor_residuals(spec, RadiiAtPoint.at(pt)))


def require_on_manifold(spec: SubmanifoldSpec, pt: AmbientVector):
    spec.check_dims(pt)
    if not np.isfinite(pt.data).all():
        raise DomainError(f"Point {pt.data.tolist()} has non-finite coordinates.")
    residuals = _factor_residuals(spec, RadiiAtPoint.at(pt))
    if not max(residuals) <= TOL_ON_MANIFOLD:
        raise DomainError(
            f"Point {pt.data.tolist()} is not on {spec} (radius error {max(residuals):.3e})."
        )


def _require_nondegenerate(spec: SubmanifoldSpec, rad: RadiiAtPoint):
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        radii = {"R": rad.R}
    elif spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        radii = {"r": rad.r, "r3": rad.r3}
    else:
        radii = {"r1": rad.r1, "r2": rad.r2, "r3": rad.r3}
    for name, value in radii.items():
        if not value > RADIUS_FLOOR:
            raise DomainError(f"Radius {name}={value:.3e} at the point is degenerate.")


def frame_at(spec: SubmanifoldSpec, y: AmbientVector) -> tuple[AmbientVector, ...]:
    """
    Normal frame formulas evaluated with the radii of y itself. Valid in
    the open neighbourhood where the family radii stay above RADIUS_FLOOR;
    on the manifold this is the frame of normal_frame.
    """
    spec.check_dims(y)
    rad = RadiiAtPoint.at(y)
    _require_nondegenerate(spec, rad)
    R = rad.R
    frame = [y / R]
    if spec.codimension >= 2:
        r, r3 = rad.r, rad.r3
        frame.append(
            AmbientVector.from_blocks(
                (r3 / (r * R)) * y.xblock,
                (r3 / (r * R)) * y.yblock,
                -(r / (r3 * R)) * y.zblock,
            )
        )
    if spec.codimension == 3:
        r1, r2, r = rad.r1, rad.r2, rad.r
        frame.append(
            AmbientVector.from_blocks(
                (r2 / (r1 * r)) * y.xblock,
                -(r1 / (r2 * r)) * y.yblock,
                np.zeros(y.q),
            )
        )
    return tuple(frame)


def project_at(
    frame: tuple[AmbientVector, ...], v: AmbientVector
) -> AmbientVector:
    """v minus its components along an orthonormal frame."""
    data = v.data.copy()
    for n in frame:
        data -= np.dot(v.data, n.data) * n.data
    return AmbientVector(v.p, v.q, data)


def normal_frame(spec: SubmanifoldSpec, pt: AmbientVector) -> tuple[AmbientVector, ...]:
    """(N1), (N1, N2) or (N1, N2, N3) at an on-manifold point."""
    require_on_manifold(spec, pt)
    return frame_at(spec, pt)


def tangent_project(spec: SubmanifoldSpec, pt: AmbientVector, v: AmbientVector) -> AmbientVector:
    spec.check_dims(v)
    return project_at(normal_frame(spec, pt), v)


def tangency_residuals(spec: SubmanifoldSpec, pt: AmbientVector, v: AmbientVector) -> list[float]:
    """Left-hand sides of the family's tangency equations."""
    xX = float(np.dot(pt.xblock, v.xblock))
    yY = float(np.dot(pt.yblock, v.yblock))
    zZ = float(np.dot(pt.zblock, v.zblock))
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        return [xX + yY + zZ]
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        return [xX + yY, zZ]
    return [xX, yY, zZ]


def is_tangent(spec: SubmanifoldSpec, pt: AmbientVector, v: AmbientVector, tol: float) -> bool:
    spec.check_dims(pt)
    spec.check_dims(v)
    return all(abs(res) <= tol for res in tangency_residuals(spec, pt, v))


def require_tangent(spec: SubmanifoldSpec, pt: AmbientVector, v: AmbientVector, tol: float):
    if not is_tangent(spec, pt, v, tol):
        worst = max(abs(res) for res in tangency_residuals(spec, pt, v))
        raise DomainError(
            f"Vector {v.data.tolist()} is not tangent to {spec} (residual {worst:.3e})."
        )


def _factor_slices(spec: SubmanifoldSpec) -> list[tuple[slice, float]]:
    p, q = spec.p, spec.q
    n = 2 * p + q
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        return [(slice(0, n), spec.radii[0])]
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        r, r3 = spec.radii
        return [(slice(0, 2 * p), r), (slice(2 * p, n), r3)]
    r1, r2, r3 = spec.radii
    return [(slice(0, p), r1), (slice(p, 2 * p), r2), (slice(2 * p, n), r3)]


def sample_point(spec: SubmanifoldSpec, rng: np.random.Generator) -> AmbientVector:
    """
    Uniform point on each factor sphere by Gaussian normalization. Every
    factor draws from its own child stream spawned off rng.
    """
    factors = _factor_slices(spec)
    streams = rng.spawn(len(factors))
    data = np.empty(spec.ambient_dimension)
    for (block, radius), stream in zip(factors, streams):
        size = block.stop - block.start
        while True:
            g = stream.standard_normal(size)
            norm = np.linalg.norm(g)
            if norm > TANGENT_RESAMPLE_FLOOR:
                break
        data[block] = (radius / norm) * g
    return AmbientVector(spec.p, spec.q, data)


def sample_tangent(spec: SubmanifoldSpec, pt: AmbientVector, rng: np.random.Generator) -> AmbientVector:
    """Unit tangent vector: projected standard Gaussian, renormalized."""
    frame = normal_frame(spec, pt)
    while True:
        g = AmbientVector(spec.p, spec.q, rng.standard_normal(spec.ambient_dimension))
        v = project_at(frame, g)
        norm = v.norm()
        if norm >= TANGENT_RESAMPLE_FLOOR:
            return v / norm


def nested_specs(spec: SubmanifoldSpec) -> list[SubmanifoldSpec]:
    """
    The larger families that contain spec:
    triple product in double product in hypersphere.
    """
    derived = spec.derived_radii()
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        return []
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        return [SubmanifoldSpec.hypersphere(spec.p, spec.q, derived["R"])]
    return [
        SubmanifoldSpec.double_product(spec.p, spec.q, derived["r"], spec.radii[2]),
        SubmanifoldSpec.hypersphere(spec.p, spec.q, derived["R"]),
    ]
