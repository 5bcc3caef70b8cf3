from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum, unique

import numpy as np

from sphere_structures import config
from sphere_structures.ambient import AmbientVector, DimensionError, GeometryError, SignPattern, inner, ptilde
from sphere_structures.manifolds import (
    DomainError,
    RadiiAtPoint,
    SubmanifoldFamily,
    SubmanifoldSpec,
    frame_at,
    is_tangent,
    nested_specs,
    normal_frame,
    require_on_manifold,
    require_tangent,
)


class UnsupportedConfigurationError(GeometryError):
    """No closed form exists for the requested family and sign pattern."""


@unique
class Provenance(IntEnum):
    CLOSED_FORM = 0
    ORACLE = 1


@dataclass(frozen=True, slots=True, eq=False)
class InducedStructure:
    """
    The (a,1)f structure induced at one point: the matrix a, the tangent
    fields xi_alpha and the normal frame they were decomposed against.
    u_alpha and P are evaluated through u_form and p_apply.
    """

    spec: SubmanifoldSpec
    pt: AmbientVector
    a: np.ndarray
    xi: tuple[AmbientVector, ...]
    signs: SignPattern
    provenance: Provenance
    frame: tuple[AmbientVector, ...]

    def __post_init__(self):
        a = np.array(self.a, dtype=np.float64)
        a.flags.writeable = False
        object.__setattr__(self, "a", a)
        if config.DEBUG:
            c = self.spec.codimension
            assert a.shape == (c, c), f"a has shape {a.shape}, expected {(c, c)}"
            assert np.max(np.abs(a - a.T)) < 1e-12, "a is not symmetric"
            for xi in self.xi:
                assert is_tangent(self.spec, self.pt, xi, config.TOL_TANGENT)

    @property
    def codimension(self) -> int:
        return self.spec.codimension

    def __repr__(self) -> str:
        return (
            f"InducedStructure({self.provenance.name}, {self.spec}, "
            f"pt={self.pt.data.tolist()}, a={self.a.tolist()})"
        )


def _check_signs(spec: SubmanifoldSpec, signs: SignPattern):
    if signs.q != spec.q:
        raise DimensionError(f"Sign pattern has length {signs.q}, spec has q={spec.q}.")


def _require_closed_form(spec: SubmanifoldSpec, signs: SignPattern):
    _check_signs(spec, signs)
    if spec.family != SubmanifoldFamily.HYPERSPHERE and not signs.is_uniform:
        raise UnsupportedConfigurationError(
            f"No closed form for {spec.family.label} with non-uniform signs {signs}."
        )


def normal_components(
    frame: tuple[AmbientVector, ...], v: AmbientVector, signs: SignPattern
) -> np.ndarray:
    """<P~v, N_alpha> for each frame vector: the normal part of P~v."""
    pv = ptilde(v, signs)
    return np.array([inner(pv, n) for n in frame])


# --- Oracle ---


def oracle_structure(
    spec: SubmanifoldSpec, pt: AmbientVector, signs: SignPattern
) -> InducedStructure:
    """
    Decomposes P~N_alpha into tangential and normal parts using nothing but
    the normal frame: a_ab = <P~N_a, N_b>, xi_a = P~N_a - sum_b a_ab N_b.
    """
    _check_signs(spec, signs)
    frame = normal_frame(spec, pt)
    c = len(frame)
    images = [ptilde(n, signs) for n in frame]
    a = np.empty((c, c))
    for alpha in range(c):
        for beta in range(c):
            a[alpha, beta] = inner(images[alpha], frame[beta])
    xi = []
    for alpha in range(c):
        data = images[alpha].data.copy()
        for beta in range(c):
            data -= a[alpha, beta] * frame[beta].data
        xi.append(AmbientVector(spec.p, spec.q, data))
    return InducedStructure(spec, pt, a, tuple(xi), signs, Provenance.ORACLE, frame)


# --- Closed forms ---
#
# Every helper below reads the radii and sigma of the point it is given, so
# it also evaluates on the leaf through an off-manifold point.


def _tau(y: AmbientVector, X: AmbientVector) -> float:
    return float(np.dot(y.xblock, X.yblock) + np.dot(y.yblock, X.xblock))


def closed_form_a_at(
    spec: SubmanifoldSpec, y: AmbientVector, signs: SignPattern
) -> np.ndarray:
    _require_closed_form(spec, signs)
    rad = RadiiAtPoint.at(y)
    sigma, Rsq = rad.sigma, rad.Rsq
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        signed_r3sq = float(np.dot(signs.array, y.zblock**2))
        return np.array([[(2 * sigma + signed_r3sq) / Rsq]])

    eps = signs.epsilon
    r, r3, R = rad.r, rad.r3, rad.R
    rsq, r3sq = rad.rsq, rad.r3sq
    a11 = (2 * sigma + eps * r3sq) / Rsq
    a12 = (2 * sigma - eps * rsq) * r3 / (r * Rsq)
    a22 = (2 * sigma * r3sq + eps * rsq**2) / (rsq * Rsq)
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        return np.array([[a11, a12], [a12, a22]])

    r1, r2 = rad.r1, rad.r2
    r1sq, r2sq = rad.r1sq, rad.r2sq
    a13 = (r2sq - r1sq) * sigma / (r1 * r2 * r * R)
    a23 = (r2sq - r1sq) * r3 * sigma / (r1 * r2 * rsq * R)
    a33 = -2 * sigma / rsq
    return np.array([[a11, a12, a13], [a12, a22, a23], [a13, a23, a33]])


def closed_form_xi_at(
    spec: SubmanifoldSpec, y: AmbientVector, signs: SignPattern
) -> tuple[AmbientVector, ...]:
    _require_closed_form(spec, signs)
    rad = RadiiAtPoint.at(y)
    x, yy, z = y.xblock, y.yblock, y.zblock
    sigma, R = rad.sigma, rad.R
    zeros = np.zeros(y.q)

    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        a11 = closed_form_a_at(spec, y, signs)[0, 0]
        # Uniform signs reduce the z coefficient to (eps r^2 - 2 sigma)/R^2.
        zcoef = (signs.array * rad.Rsq - 2 * sigma - float(np.dot(signs.array, z**2))) / rad.Rsq
        return (
            AmbientVector.from_blocks(
                (yy - a11 * x) / R, (x - a11 * yy) / R, zcoef * z / R
            ),
        )

    r = rad.r
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        k = 2 * sigma / rad.rsq
        xi1 = AmbientVector.from_blocks((yy - k * x) / R, (x - k * yy) / R, zeros)
        return xi1, (rad.r3 / r) * xi1

    r1, r2 = rad.r1, rad.r2
    xi1 = AmbientVector.from_blocks(
        (yy - (sigma / rad.r1sq) * x) / R, (x - (sigma / rad.r2sq) * yy) / R, zeros
    )
    xi3 = AmbientVector.from_blocks(
        ((sigma / (r1 * r2)) * x - (r1 / r2) * yy) / r,
        ((r2 / r1) * x - (sigma / (r1 * r2)) * yy) / r,
        zeros,
    )
    return xi1, (rad.r3 / r) * xi1, xi3


def closed_form_u_at(
    spec: SubmanifoldSpec, y: AmbientVector, X: AmbientVector, signs: SignPattern
) -> np.ndarray:
    """The printed scalar formulas for u_alpha(X); X must be tangent to the leaf through y."""
    _require_closed_form(spec, signs)
    rad = RadiiAtPoint.at(y)
    tau = _tau(y, X)
    R = rad.R
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        signed_zZ = float(np.dot(signs.array * y.zblock, X.zblock))
        return np.array([(tau + signed_zZ) / R])

    r, r3 = rad.r, rad.r3
    u1 = tau / R
    u2 = r3 * tau / (r * R)
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        return np.array([u1, u2])

    r1, r2 = rad.r1, rad.r2
    xY = float(np.dot(y.xblock, X.yblock))
    yX = float(np.dot(y.yblock, X.xblock))
    u3 = ((r2 / r1) * xY - (r1 / r2) * yX) / r
    return np.array([u1, u2, u3])


def closed_form_p_at(
    spec: SubmanifoldSpec, y: AmbientVector, X: AmbientVector, signs: SignPattern
) -> AmbientVector:
    """The printed formula for the tangential part of P~X at y."""
    _require_closed_form(spec, signs)
    rad = RadiiAtPoint.at(y)
    x, yy, z = y.xblock, y.yblock, y.zblock
    Xx, Xy, Xz = X.xblock, X.yblock, X.zblock

    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        k = closed_form_u_at(spec, y, X, signs)[0] / rad.R
        return AmbientVector.from_blocks(Xy - k * x, Xx - k * yy, signs.array * Xz - k * z)

    eps = signs.epsilon
    if spec.family == SubmanifoldFamily.DOUBLE_PRODUCT:
        k = _tau(y, X) / rad.rsq
        return AmbientVector.from_blocks(Xy - k * x, Xx - k * yy, eps * Xz)

    kx = float(np.dot(x, Xy)) / rad.r1sq
    ky = float(np.dot(yy, Xx)) / rad.r2sq
    return AmbientVector.from_blocks(Xy - kx * x, Xx - ky * yy, eps * Xz)


def closed_form_structure(
    spec: SubmanifoldSpec, pt: AmbientVector, signs: SignPattern
) -> InducedStructure:
    _require_closed_form(spec, signs)
    require_on_manifold(spec, pt)
    return InducedStructure(
        spec,
        pt,
        closed_form_a_at(spec, pt, signs),
        closed_form_xi_at(spec, pt, signs),
        signs,
        Provenance.CLOSED_FORM,
        frame_at(spec, pt),
    )


def has_closed_form(spec: SubmanifoldSpec, signs: SignPattern) -> bool:
    return spec.family == SubmanifoldFamily.HYPERSPHERE or signs.is_uniform


def build_structure(
    spec: SubmanifoldSpec, pt: AmbientVector, signs: SignPattern, provenance: Provenance
) -> InducedStructure:
    if provenance == Provenance.CLOSED_FORM:
        return closed_form_structure(spec, pt, signs)
    return oracle_structure(spec, pt, signs)


# --- Evaluators ---


def u_form(struct: InducedStructure, X: AmbientVector) -> np.ndarray:
    """(u_1(X), ..., u_c(X)) for a tangent X."""
    require_tangent(struct.spec, struct.pt, X, config.TOL_TANGENT)
    if struct.provenance == Provenance.CLOSED_FORM:
        return closed_form_u_at(struct.spec, struct.pt, X, struct.signs)
    return u_gram(struct, X)


def u_gram(struct: InducedStructure, X: AmbientVector) -> np.ndarray:
    """u_alpha(X) = <X, xi_alpha>."""
    return np.array([inner(X, xi) for xi in struct.xi])


def p_apply(struct: InducedStructure, X: AmbientVector) -> AmbientVector:
    """Tangential part of P~X for a tangent X."""
    require_tangent(struct.spec, struct.pt, X, config.TOL_TANGENT)
    if struct.provenance == Provenance.CLOSED_FORM:
        return closed_form_p_at(struct.spec, struct.pt, X, struct.signs)
    components = normal_components(struct.frame, X, struct.signs)
    data = ptilde(X, struct.signs).data.copy()
    for value, n in zip(components, struct.frame):
        data -= value * n.data
    return AmbientVector(X.p, X.q, data)


def det_i_minus_a_squared(struct: InducedStructure) -> float:
    c = struct.codimension
    return float(np.linalg.det(np.eye(c) - struct.a @ struct.a))


def hypersphere_consistency(
    spec: SubmanifoldSpec, pt: AmbientVector, X: AmbientVector, signs: SignPattern
) -> float:
    """
    |u_bar(X) - u_1(X)| between the hypersphere structure through pt and the
    product structure of spec, for X tangent to the product.
    """
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        raise DomainError("hypersphere_consistency compares a product family with its hypersphere.")
    sphere = nested_specs(spec)[-1]
    outer = closed_form_structure(sphere, pt, signs)
    own = closed_form_structure(spec, pt, signs)
    return abs(float(u_form(outer, X)[0] - u_form(own, X)[0]))
