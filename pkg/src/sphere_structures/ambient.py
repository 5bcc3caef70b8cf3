from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit


class GeometryError(ValueError):
    """Base class for every error raised by the package."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


class DimensionError(GeometryError):
    """Block lengths of vectors and sign patterns do not match."""


@njit
def _ptilde_kernel(data, signs, p):
    out = np.empty(data.shape[0])
    for i in range(p):
        out[i] = data[p + i]
        out[p + i] = data[i]
    for j in range(signs.shape[0]):
        out[2 * p + j] = signs[j] * data[2 * p + j]
    return out


@njit
def block_scalars(data, p):
    """Returns (sum x^2, sum y^2, sum z^2, sum x*y) in a single pass."""
    r1sq = 0.0
    r2sq = 0.0
    sigma = 0.0
    for i in range(p):
        x = data[i]
        y = data[p + i]
        r1sq += x * x
        r2sq += y * y
        sigma += x * y
    r3sq = 0.0
    for j in range(2 * p, data.shape[0]):
        r3sq += data[j] * data[j]
    return r1sq, r2sq, r3sq, sigma


@dataclass(frozen=True, slots=True, eq=False)
class AmbientVector:
    """
    A point or tangent vector of E^{2p+q}, stored as one read-only array
    laid out as (x^1..x^p, y^1..y^p, z^1..z^q).
    """

    p: int
    q: int
    data: np.ndarray

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise DimensionError(f"Block sizes must be positive, got p={self.p}, q={self.q}.")
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 1 or data.shape[0] != 2 * self.p + self.q:
            raise DimensionError(
                f"Expected {2 * self.p + self.q} coordinates for (p={self.p}, q={self.q}), "
                f"got shape {data.shape}."
            )
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    @classmethod
    def from_blocks(cls, xblock, yblock, zblock) -> AmbientVector:
        xblock = np.atleast_1d(np.asarray(xblock, dtype=np.float64))
        yblock = np.atleast_1d(np.asarray(yblock, dtype=np.float64))
        zblock = np.atleast_1d(np.asarray(zblock, dtype=np.float64))
        if xblock.shape != yblock.shape:
            raise DimensionError(
                f"x- and y-blocks differ in length: {xblock.shape} vs {yblock.shape}."
            )
        return cls(xblock.shape[0], zblock.shape[0], np.concatenate((xblock, yblock, zblock)))

    @classmethod
    def zeros(cls, p: int, q: int) -> AmbientVector:
        return cls(p, q, np.zeros(2 * p + q))

    @property
    def xblock(self) -> np.ndarray:
        return self.data[: self.p]

    @property
    def yblock(self) -> np.ndarray:
        return self.data[self.p : 2 * self.p]

    @property
    def zblock(self) -> np.ndarray:
        return self.data[2 * self.p :]

    @property
    def dims(self) -> tuple[int, int]:
        return self.p, self.q

    def norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def _same_dims(self, other: AmbientVector):
        if self.dims != other.dims:
            raise DimensionError(f"Dimension mismatch: {self.dims} vs {other.dims}.")

    def __add__(self, other: AmbientVector) -> AmbientVector:
        self._same_dims(other)
        return AmbientVector(self.p, self.q, self.data + other.data)

    def __sub__(self, other: AmbientVector) -> AmbientVector:
        self._same_dims(other)
        return AmbientVector(self.p, self.q, self.data - other.data)

    def __neg__(self) -> AmbientVector:
        return AmbientVector(self.p, self.q, -self.data)

    def __mul__(self, scalar: float) -> AmbientVector:
        return AmbientVector(self.p, self.q, self.data * float(scalar))

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> AmbientVector:
        return AmbientVector(self.p, self.q, self.data / float(scalar))

    def __eq__(self, other):
        if not isinstance(other, AmbientVector):
            return NotImplemented
        return self.dims == other.dims and np.array_equal(self.data, other.data)

    def __hash__(self):
        return hash((self.p, self.q, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"AmbientVector(p={self.p}, q={self.q}, data={self.data.tolist()})"


@dataclass(frozen=True, slots=True)
class SignPattern:
    """The signs (eps_1, ..., eps_q) that the almost product operator puts on the z-block."""

    signs: tuple[int, ...]
    _array: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        signs = tuple(self.signs)
        if not signs:
            raise DimensionError("A sign pattern needs at least one entry.")
        for s in signs:
            if s not in (1, -1):
                raise DimensionError(f"Sign entries must be +1 or -1, got {s!r}.")
        signs = tuple(int(s) for s in signs)
        array = np.array(signs, dtype=np.float64)
        array.flags.writeable = False
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "_array", array)

    @classmethod
    def uniform(cls, epsilon: int, q: int) -> SignPattern:
        return cls((epsilon,) * q)

    @property
    def q(self) -> int:
        return len(self.signs)

    @property
    def array(self) -> np.ndarray:
        return self._array

    @property
    def is_uniform(self) -> bool:
        return len(set(self.signs)) == 1

    @property
    def epsilon(self) -> int:
        """The common sign of a uniform pattern."""
        if not self.is_uniform:
            raise DimensionError(f"Sign pattern {self.signs} is not uniform.")
        return self.signs[0]

    def __str__(self) -> str:
        return "(" + ",".join("+1" if s > 0 else "-1" for s in self.signs) + ")"


def ptilde(v: AmbientVector, s: SignPattern) -> AmbientVector:
    """Swaps the x- and y-blocks and multiplies the z-block by the signs."""
    if v.q != s.q:
        raise DimensionError(f"Vector has q={v.q} but sign pattern has length {s.q}.")
    return AmbientVector(v.p, v.q, _ptilde_kernel(v.data, s.array, v.p))


def inner(u: AmbientVector, v: AmbientVector) -> float:
    """Euclidean inner product over all 2p+q coordinates."""
    if u.dims != v.dims:
        raise DimensionError(f"Dimension mismatch: {u.dims} vs {v.dims}.")
    return float(np.dot(u.data, v.data))
