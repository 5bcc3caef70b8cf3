from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, replace

import numpy as np
from joblib import Parallel, cpu_count, delayed
from tqdm import tqdm

from sphere_structures import config
from sphere_structures.ambient import AmbientVector, DimensionError, GeometryError, SignPattern, inner, ptilde
from sphere_structures.induced import (
    Provenance,
    build_structure,
    closed_form_p_at,
    closed_form_xi_at,
    det_i_minus_a_squared,
    has_closed_form,
    p_apply,
)
from sphere_structures.loguru_logger import logger
from sphere_structures.manifolds import (
    DomainError,
    SubmanifoldFamily,
    SubmanifoldSpec,
    frame_at,
    project_at,
    require_on_manifold,
    sample_point,
    sample_tangent,
)
from sphere_structures.verify import ResidualAccumulator, ResidualReport, spec_metadata

VectorField = Callable[[AmbientVector], AmbientVector]


class FDConfigurationError(GeometryError):
    """The finite-difference step is out of range for the point it is used at."""


@dataclass(frozen=True, slots=True)
class FDConfig:
    """
    h           central-difference step, in [FD_STEP_MIN, FD_STEP_MAX]
    richardson  combine steps h and h/2 to cancel the h^2 error term
    du_half     evaluate du with the 1/2 factor of the alternating convention
    """

    h: float = config.FD_STEP
    richardson: bool = False
    du_half: bool = False

    def __post_init__(self):
        try:
            h = float(self.h)
        except (TypeError, ValueError):
            raise FDConfigurationError(f"FD step must be a number, got {self.h!r}.") from None
        if not config.FD_STEP_MIN <= h <= config.FD_STEP_MAX:
            raise FDConfigurationError(
                f"FD step h={h!r} outside [{config.FD_STEP_MIN}, {config.FD_STEP_MAX}]."
            )
        object.__setattr__(self, "h", h)

    def check_point(self, pt: AmbientVector):
        scale = max(1.0, pt.norm())
        if self.h < config.FD_STEP_MIN * scale:
            raise FDConfigurationError(
                f"FD step h={self.h!r} underflows at a point of norm {pt.norm():.3g}."
            )

    @property
    def du_factor(self) -> float:
        return 0.5 if self.du_half else 1.0


# --- Vector fields ---


@dataclass(frozen=True, slots=True)
class TangentFieldSpec:
    """X_c(y): the constant generator c projected onto the leaf through y."""

    spec: SubmanifoldSpec
    generator: AmbientVector

    def __call__(self, y: AmbientVector) -> AmbientVector:
        return project_at(frame_at(self.spec, y), self.generator)


@dataclass(frozen=True, slots=True, eq=False)
class LinearField:
    """y -> M y. With M antisymmetric this is a Killing field of every sphere about 0."""

    p: int
    q: int
    matrix: np.ndarray

    def __call__(self, y: AmbientVector) -> AmbientVector:
        return AmbientVector(self.p, self.q, self.matrix @ y.data)

    def exact_bracket(self, other: LinearField) -> LinearField:
        """[M y, K y] = (K M - M K) y."""
        return LinearField(self.p, self.q, other.matrix @ self.matrix - self.matrix @ other.matrix)


def rotation_field(i: int, j: int, p: int, q: int) -> LinearField:
    """Infinitesimal rotation in the (e_i, e_j) plane: y_i e_j - y_j e_i."""
    n = 2 * p + q
    if not (0 <= i < n and 0 <= j < n) or i == j:
        raise DimensionError(f"Rotation plane ({i}, {j}) is invalid in dimension {n}.")
    matrix = np.zeros((n, n))
    matrix[j, i] = 1.0
    matrix[i, j] = -1.0
    return LinearField(p, q, matrix)


def p_at(spec: SubmanifoldSpec, y: AmbientVector, v: AmbientVector, signs: SignPattern) -> AmbientVector:
    """Induced P on the leaf through y. Falls back to projecting P~v when no closed form exists."""
    if has_closed_form(spec, signs):
        return closed_form_p_at(spec, y, v, signs)
    frame = frame_at(spec, y)
    pv = ptilde(v, signs)
    return project_at(frame, pv)


def xi_at(spec: SubmanifoldSpec, y: AmbientVector, signs: SignPattern) -> tuple[AmbientVector, ...]:
    if has_closed_form(spec, signs):
        return closed_form_xi_at(spec, y, signs)
    frame = frame_at(spec, y)
    return tuple(project_at(frame, ptilde(n, signs)) for n in frame)


@dataclass(frozen=True, slots=True)
class PField:
    """y -> P(F(y)) on the leaf through y."""

    spec: SubmanifoldSpec
    field: VectorField
    signs: SignPattern

    def __call__(self, y: AmbientVector) -> AmbientVector:
        return p_at(self.spec, y, self.field(y), self.signs)


# --- Finite differences ---


def _values(out) -> np.ndarray:
    if isinstance(out, AmbientVector):
        return out.data
    return np.asarray(out, dtype=np.float64)


def _central(f: Callable, pt: AmbientVector, direction: AmbientVector, h: float) -> np.ndarray:
    step = direction * h
    return (_values(f(pt + step)) - _values(f(pt - step))) / (2.0 * h)


def directional_derivative(
    f: Callable, pt: AmbientVector, direction: AmbientVector, cfg: FDConfig
) -> np.ndarray:
    """Central difference of f along direction; f may return vectors, arrays or scalars."""
    d_h = _central(f, pt, direction, cfg.h)
    if not cfg.richardson:
        return d_h
    d_half = _central(f, pt, direction, cfg.h / 2.0)
    return (4.0 * d_half - d_h) / 3.0


def _prepare(spec: SubmanifoldSpec, pt: AmbientVector, cfg: FDConfig, signs: SignPattern | None):
    require_on_manifold(spec, pt)
    cfg.check_point(pt)
    if signs is None:
        signs = SignPattern.uniform(1, spec.q)
    if signs.q != spec.q:
        raise DimensionError(f"Sign pattern has length {signs.q}, spec has q={spec.q}.")
    return signs


def _bracket(F: VectorField, G: VectorField, pt: AmbientVector, cfg: FDConfig) -> AmbientVector:
    data = directional_derivative(G, pt, F(pt), cfg) - directional_derivative(F, pt, G(pt), cfg)
    return AmbientVector(pt.p, pt.q, data)


def lie_bracket(
    spec: SubmanifoldSpec, F: VectorField, G: VectorField, pt: AmbientVector, cfg: FDConfig
) -> AmbientVector:
    """[F, G] = D_F G - D_G F at pt."""
    _prepare(spec, pt, cfg, None)
    return _bracket(F, G, pt, cfg)


def nijenhuis(
    spec: SubmanifoldSpec,
    F: VectorField,
    G: VectorField,
    pt: AmbientVector,
    cfg: FDConfig,
    signs: SignPattern | None = None,
) -> AmbientVector:
    """N_P(F,G) = [PF,PG] + P^2[F,G] - P[PF,G] - P[F,PG]."""
    signs = _prepare(spec, pt, cfg, signs)
    PF = PField(spec, F, signs)
    PG = PField(spec, G, signs)

    def P(v: AmbientVector) -> AmbientVector:
        return p_at(spec, pt, v, signs)

    return (
        _bracket(PF, PG, pt, cfg)
        + P(P(_bracket(F, G, pt, cfg)))
        - P(_bracket(PF, G, pt, cfg))
        - P(_bracket(F, PG, pt, cfg))
    )


def _u_field(spec: SubmanifoldSpec, V: VectorField, signs: SignPattern) -> Callable[[AmbientVector], np.ndarray]:
    def u_of(y: AmbientVector) -> np.ndarray:
        v = V(y)
        return np.array([inner(v, xi) for xi in xi_at(spec, y, signs)])

    return u_of


def _du_all(
    spec: SubmanifoldSpec, F: VectorField, G: VectorField, pt: AmbientVector, cfg: FDConfig, signs: SignPattern
) -> np.ndarray:
    """du_alpha(F,G) for every alpha, without the 1/2 factor."""
    bracket = _bracket(F, G, pt, cfg)
    u_bracket = np.array([inner(bracket, xi) for xi in xi_at(spec, pt, signs)])
    return (
        directional_derivative(_u_field(spec, G, signs), pt, F(pt), cfg)
        - directional_derivative(_u_field(spec, F, signs), pt, G(pt), cfg)
        - u_bracket
    )


def du(
    spec: SubmanifoldSpec,
    alpha: int,
    F: VectorField,
    G: VectorField,
    pt: AmbientVector,
    cfg: FDConfig,
    signs: SignPattern | None = None,
) -> float:
    """du_alpha(F,G) = F(u_alpha(G)) - G(u_alpha(F)) - u_alpha([F,G]), halved under cfg.du_half."""
    if not 0 <= alpha < spec.codimension:
        raise DomainError(f"alpha={alpha} out of range for codimension {spec.codimension}.")
    signs = _prepare(spec, pt, cfg, signs)
    return cfg.du_factor * float(_du_all(spec, F, G, pt, cfg, signs)[alpha])


@dataclass(frozen=True, slots=True)
class NormalityCheck:
    residual: float
    residual_alternate: float
    det_i_minus_a2: float
    pairs: int


def _normality_terms(
    spec: SubmanifoldSpec,
    F: VectorField,
    G: VectorField,
    pt: AmbientVector,
    cfg: FDConfig,
    signs: SignPattern,
    xi: tuple[AmbientVector, ...],
) -> tuple[float, float]:
    """||N_P - 2 sum du_a xi_a|| under cfg's du convention and under the other one."""
    torsion = nijenhuis(spec, F, G, pt, cfg, signs).data
    forms = _du_all(spec, F, G, pt, cfg, signs)
    correction = np.zeros_like(torsion)
    for value, xi_alpha in zip(forms, xi):
        correction += value * xi_alpha.data
    full = float(np.max(np.abs(torsion - 2.0 * correction)))
    halved = float(np.max(np.abs(torsion - correction)))
    return (halved, full) if cfg.du_half else (full, halved)


def _generator(spec: SubmanifoldSpec, rng: np.random.Generator) -> AmbientVector:
    g = rng.standard_normal(spec.ambient_dimension)
    return AmbientVector(spec.p, spec.q, g / np.linalg.norm(g))


def _structure(spec: SubmanifoldSpec, pt: AmbientVector, signs: SignPattern):
    provenance = Provenance.CLOSED_FORM if has_closed_form(spec, signs) else Provenance.ORACLE
    return build_structure(spec, pt, signs, provenance)


def check_normality(
    spec: SubmanifoldSpec,
    pt: AmbientVector,
    cfg: FDConfig,
    n_fields: int,
    seed: int,
    signs: SignPattern | None = None,
) -> NormalityCheck:
    """
    Max over n_fields random generator pairs of ||N_P(F,G) - 2 sum du_a(F,G) xi_a||_inf,
    with det(I - a^2) at pt alongside.
    """
    if n_fields < 1:
        raise ValueError(f"n_fields must be positive, got {n_fields}.")
    signs = _prepare(spec, pt, cfg, signs)
    rng = np.random.default_rng(seed)
    xi = xi_at(spec, pt, signs)
    terms = []
    for _ in range(n_fields):
        F = TangentFieldSpec(spec, _generator(spec, rng))
        G = TangentFieldSpec(spec, _generator(spec, rng))
        terms.append(_normality_terms(spec, F, G, pt, cfg, signs, xi))
    # np.max keeps a NaN.
    worst, worst_alt = (float(v) for v in np.max(np.array(terms), axis=0))
    det = det_i_minus_a_squared(_structure(spec, pt, signs))
    return NormalityCheck(worst, worst_alt, det, n_fields)


# --- Weingarten operators ---


def weingarten(
    spec: SubmanifoldSpec, alpha: int, pt: AmbientVector, X: AmbientVector, cfg: FDConfig
) -> AmbientVector:
    """A_alpha X = -tangential(D_X N_alpha)."""
    if not 0 <= alpha < spec.codimension:
        raise DomainError(f"alpha={alpha} out of range for codimension {spec.codimension}.")
    _prepare(spec, pt, cfg, None)
    derivative = directional_derivative(lambda y: frame_at(spec, y)[alpha], pt, X, cfg)
    return -project_at(frame_at(spec, pt), AmbientVector(pt.p, pt.q, derivative))


def normal_connection_residual(
    spec: SubmanifoldSpec, pt: AmbientVector, X: AmbientVector, cfg: FDConfig
) -> np.ndarray:
    """Matrix of <D_X N_a, N_b> with the diagonal zeroed."""
    _prepare(spec, pt, cfg, None)
    frame = frame_at(spec, pt)
    derivative = directional_derivative(
        lambda y: np.stack([n.data for n in frame_at(spec, y)]), pt, X, cfg
    )
    normals = np.stack([n.data for n in frame])
    matrix = derivative @ normals.T
    np.fill_diagonal(matrix, 0.0)
    return matrix


def fd_convergence_ratio(quantity: Callable[[FDConfig], object], cfg: FDConfig) -> float:
    """
    e(h) / e(h/2), both errors measured against the Richardson value built
    from h/2 and h/4. Close to 4 for a second-order scheme.
    """
    plain = replace(cfg, richardson=False)
    d_h = _values(quantity(plain))
    d_h2 = _values(quantity(replace(plain, h=plain.h / 2.0)))
    d_h4 = _values(quantity(replace(plain, h=max(plain.h / 4.0, config.FD_STEP_MIN))))
    reference = (4.0 * d_h4 - d_h2) / 3.0
    e_h = float(np.max(np.abs(d_h - reference)))
    e_h2 = float(np.max(np.abs(d_h2 - reference)))
    if e_h2 == 0.0:
        return float("inf") if e_h > 0.0 else 1.0
    return e_h / e_h2


# --- Sweep ---

NORMALITY_RESIDUAL = "normality.residual"
NORMALITY_RESIDUAL_ALTERNATE = "normality.residual_alternate_du"
WEINGARTEN_COMMUTATION = "normality.weingarten_commutation"
WEINGARTEN_SELF_ADJOINT = "normality.weingarten_self_adjoint"
NORMAL_CONNECTION = "normality.normal_connection"
SPHERE_SHAPE_OPERATOR = "normality.sphere_shape_operator"


def asserted_normality_checks(spec: SubmanifoldSpec) -> list[str]:
    """
    Only the hypersphere is totally umbilical, so normality and commutation
    are contracts there and measurements elsewhere.
    """
    checks = [WEINGARTEN_SELF_ADJOINT, NORMAL_CONNECTION]
    if spec.family == SubmanifoldFamily.HYPERSPHERE:
        checks += [NORMALITY_RESIDUAL, WEINGARTEN_COMMUTATION, SPHERE_SHAPE_OPERATOR]
    return checks


@dataclass(frozen=True, slots=True)
class NormalityPoint:
    residuals: ResidualAccumulator
    det: float
    skipped: bool


def _evaluate_point(
    spec: SubmanifoldSpec,
    signs: SignPattern,
    n_fields: int,
    cfg: FDConfig,
    seed_sequence: np.random.SeedSequence,
) -> NormalityPoint:
    rng = np.random.default_rng(seed_sequence)
    pt = sample_point(spec, rng)
    acc = ResidualAccumulator()
    struct = _structure(spec, pt, signs)
    det = det_i_minus_a_squared(struct)
    skipped = abs(det) <= config.NORMALITY_DET_FLOOR
    xi = xi_at(spec, pt, signs)

    for _ in range(n_fields):
        F = TangentFieldSpec(spec, _generator(spec, rng))
        G = TangentFieldSpec(spec, _generator(spec, rng))
        if not skipped:
            res, alt = _normality_terms(spec, F, G, pt, cfg, signs, xi)
            acc.add(NORMALITY_RESIDUAL, res)
            acc.add(NORMALITY_RESIDUAL_ALTERNATE, alt)

        X = sample_tangent(spec, pt, rng)
        Y = sample_tangent(spec, pt, rng)
        PX = p_apply(struct, X)
        for alpha in range(spec.codimension):
            AX = weingarten(spec, alpha, pt, X, cfg)
            AY = weingarten(spec, alpha, pt, Y, cfg)
            APX = weingarten(spec, alpha, pt, PX, cfg)
            acc.add(WEINGARTEN_SELF_ADJOINT, inner(AX, Y) - inner(X, AY))
            acc.add(WEINGARTEN_COMMUTATION, float(np.max(np.abs((p_apply(struct, AX) - APX).data))))
            if spec.family == SubmanifoldFamily.HYPERSPHERE:
                shape = AX + X / spec.radii[0]
                acc.add(SPHERE_SHAPE_OPERATOR, float(np.max(np.abs(shape.data))))
        acc.add(NORMAL_CONNECTION, float(np.max(np.abs(normal_connection_residual(spec, pt, X, cfg)))))
    return NormalityPoint(acc, det, skipped)


def run_normality_sweep(
    spec: SubmanifoldSpec,
    signs: SignPattern,
    n_points: int,
    n_fields: int,
    seed: int,
    cfg: FDConfig | None = None,
    tols: Mapping[str, float] | None = None,
    n_jobs: int = 1,
    verbose: bool = False,
) -> ResidualReport:
    """
    Normality residual, Weingarten self-adjointness and commutation with P,
    and the normal connection, over n_points random points with n_fields
    field pairs and tangent probes at each.
    """
    if n_points < 1 or n_fields < 1:
        raise ValueError(f"n_points and n_fields must be >= 1, got {n_points}, {n_fields}.")
    cfg = cfg or FDConfig()
    if n_jobs == -1:
        n_jobs = cpu_count()

    logger.info(
        f"Running normality sweep on {spec} signs={signs} seed={seed} h={cfg.h} "
        f"du_half={cfg.du_half} ({n_points} points x {n_fields} fields)"
    )
    seeds = np.random.SeedSequence(seed).spawn(n_points)
    parallel_gen = Parallel(n_jobs=n_jobs, prefer="processes", return_as="generator")(
        delayed(_evaluate_point)(spec, signs, n_fields, cfg, ss) for ss in seeds
    )

    total = ResidualAccumulator()
    dets: list[float] = []
    skipped = 0
    with tqdm(total=n_points, disable=not verbose, desc=f"normality {spec}") as pbar:
        for point in parallel_gen:
            total.merge(point.residuals)
            dets.append(point.det)
            skipped += point.skipped
            pbar.update(1)

    if skipped:
        logger.info(f"Skipped normality residual at {skipped} points with |det(I - a^2)| <= {config.NORMALITY_DET_FLOOR}")
    report = ResidualReport(
        total.finalize(tols, asserted=asserted_normality_checks(spec)),
        {
            "normality": {
                "du_half": cfg.du_half,
                "h": cfg.h,
                "min_abs_det": float(min(abs(d) for d in dets)),
                "n_fields": n_fields,
                "n_points": n_points,
                "richardson": cfg.richardson,
                "seed": seed,
                "signs": list(signs.signs),
                "skipped_points": skipped,
                "spec": spec_metadata(spec),
            }
        },
    )
    for name in report.failures():
        logger.warning(f"{name} failed: {report.residuals[name].max_abs_err!r}")
    return report
