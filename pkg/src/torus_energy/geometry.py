"""Metric spaces used throughout the package: the flat torus, the circle and S^2.

Points are plain numpy arrays.  A torus point in ``d`` dimensions is a length
``d`` vector of angles in ``[0, 2*pi)``; a point on the 2-sphere is a unit
vector in R^3.  Batches of points are arrays with the coordinate axis last.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, OutOfRangeError

TWO_PI = 2.0 * math.pi
UNIT_NORM_TOL = 1e-12


@dataclass(frozen=True)
class Space:
    """A supported space.

    ``kind`` is ``"torus"``, ``"circle"`` or ``"sphere2"``.  The circle is the
    one-dimensional torus and shares its coordinates and metric.
    """

    kind: str
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("torus", "circle", "sphere2"):
            raise InvalidInputError(f"unknown space kind {self.kind!r}")
        if self.kind == "torus" and self.dim < 1:
            raise InvalidInputError("torus dimension must be >= 1")
        if self.kind == "circle" and self.dim != 1:
            raise InvalidInputError("circle has dimension 1")
        if self.kind == "sphere2" and self.dim != 2:
            raise InvalidInputError("sphere2 has dimension 2")

    @classmethod
    def torus(cls, d: int) -> "Space":
        return cls("torus", d)

    @classmethod
    def circle(cls) -> "Space":
        return cls("circle", 1)

    @classmethod
    def sphere2(cls) -> "Space":
        return cls("sphere2", 2)

    @classmethod
    def parse(cls, tag: str) -> "Space":
        """Parse ``"torus:d"``, ``"circle"`` or ``"sphere2"``."""
        tag = tag.strip().lower()
        if tag == "circle":
            return cls.circle()
        if tag == "sphere2":
            return cls.sphere2()
        if tag.startswith("torus:"):
            try:
                d = int(tag.split(":", 1)[1])
            except ValueError:
                raise InvalidInputError(f"bad torus tag {tag!r}") from None
            return cls.torus(d)
        raise InvalidInputError(f"unknown space tag {tag!r}")

    @property
    def tag(self) -> str:
        return f"torus:{self.dim}" if self.kind == "torus" else self.kind

    def __str__(self) -> str:
        return self.tag

    @property
    def is_periodic(self) -> bool:
        return self.kind in ("torus", "circle")

    @property
    def period(self) -> float:
        return TWO_PI

    @property
    def coord_len(self) -> int:
        """Length of the coordinate vector of a point."""
        return 3 if self.kind == "sphere2" else self.dim

    @property
    def diameter(self) -> float:
        if self.kind == "sphere2":
            return math.pi
        return math.pi * math.sqrt(self.dim)


def wrap(coords) -> np.ndarray:
    """Reduce angles into ``[0, 2*pi)``."""
    out = np.mod(np.asarray(coords, dtype=float), TWO_PI)
    # mod rounding returns exactly 2*pi for tiny negative inputs
    return np.where(out >= TWO_PI, 0.0, out)


def wrapped_offset(x, y) -> np.ndarray:
    """Minimal representative of ``x - y`` with every coordinate in ``[-pi, pi)``.

    Ties on the cut locus (a difference of exactly ``pi``) resolve to ``-pi``.
    """
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    return np.mod(diff + math.pi, TWO_PI) - math.pi


def wrapped_abs(x, y) -> np.ndarray:
    """Coordinatewise circle distances ``|wrapped_offset(x, y)|`` in ``[0, pi]``.

    Computed from ``|x - y|`` so the result is bitwise symmetric in ``x, y``.
    """
    a = np.mod(np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)), TWO_PI)
    return np.minimum(a, TWO_PI - a)


def as_points(space: Space, coords) -> np.ndarray:
    """Validate and canonicalize a point or batch of points for ``space``."""
    arr = np.atleast_1d(np.asarray(coords, dtype=float))
    if arr.shape[-1] != space.coord_len:
        raise InvalidInputError(
            f"{space.tag} points need {space.coord_len} coordinates, got {arr.shape[-1]}"
        )
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("point coordinates must be finite")
    if space.is_periodic:
        return wrap(arr)
    norms = np.linalg.norm(arr, axis=-1)
    if np.any(np.abs(norms - 1.0) > UNIT_NORM_TOL):
        raise InvalidInputError("sphere points must have unit norm")
    return arr


def _check_same(space: Space, x: np.ndarray, y: np.ndarray) -> None:
    if x.shape[-1] != space.coord_len or y.shape[-1] != space.coord_len:
        raise InvalidInputError(
            f"dimension mismatch: expected {space.coord_len} coordinates, "
            f"got {x.shape[-1]} and {y.shape[-1]}"
        )


def torus_distance(x, y) -> np.ndarray | float:
    """Geodesic distance on ``(R / 2 pi Z)^d``; broadcasts over leading axes."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1:] != y.shape[-1:]:
        raise InvalidInputError(f"dimension mismatch: {x.shape[-1:]} vs {y.shape[-1:]}")
    a = wrapped_abs(x, y)
    return np.sqrt(np.sum(a * a, axis=-1))


def sphere_distance(x, y) -> np.ndarray | float:
    """Great-circle distance between unit vectors of R^3."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape[-1] != 3 or y.shape[-1] != 3:
        raise InvalidInputError("sphere2 points are 3-vectors")
    for p in (x, y):
        if np.any(np.abs(np.linalg.norm(p, axis=-1) - 1.0) > UNIT_NORM_TOL):
            raise InvalidInputError("sphere points must have unit norm")
    # atan2 keeps full precision near 0 and pi, and is exactly symmetric
    cross = np.linalg.norm(np.cross(x, y), axis=-1)
    return np.arctan2(cross, np.sum(x * y, axis=-1))


def distance(space: Space, x, y) -> np.ndarray | float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same(space, x, y)
    if space.is_periodic:
        return torus_distance(x, y)
    return sphere_distance(x, y)


def unit_ball_volume(d: int) -> float:
    """Lebesgue volume of the unit ball in R^d."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def ball_volume(space: Space, r: float) -> float:
    """Normalized uniform measure of a geodesic ball of radius ``r``.

    On the torus only ``0 < r < pi`` is accepted, where the ball is isometric
    to a Euclidean ball.
    """
    if space.is_periodic:
        if not 0.0 < r < math.pi:
            raise OutOfRangeError(f"torus ball radius must lie in (0, pi), got {r}")
        d = space.dim
        return unit_ball_volume(d) * r**d / TWO_PI**d
    if not 0.0 < r <= math.pi:
        raise OutOfRangeError(f"sphere cap radius must lie in (0, pi], got {r}")
    return (1.0 - math.cos(r)) / 2.0


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator keyed by ``(seed, stream)``.

    Independent call sites use distinct ``stream`` ids so parallel samplers
    never share state.
    """
    key = ((int(seed) & 0xFFFFFFFFFFFFFFFF) << 64) | (int(stream) & 0xFFFFFFFFFFFFFFFF)
    return np.random.Generator(np.random.Philox(key=key))


def uniform_unit_vectors(rng: np.random.Generator, n: int, d: int) -> np.ndarray:
    v = rng.standard_normal((n, d))
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    # a zero gaussian draw has probability zero, guard anyway
    norms[norms == 0] = 1.0
    return v / norms


def rotation_to(center: np.ndarray) -> np.ndarray:
    """Orthogonal matrix whose third column is ``center``.

    Maps the north pole ``(0, 0, 1)`` to ``center``; columns one and two span
    the tangent plane there.
    """
    c = np.asarray(center, dtype=float)
    helper = np.array([1.0, 0.0, 0.0]) if abs(c[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = helper - np.dot(helper, c) * c
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(c, e1)
    return np.column_stack([e1, e2, c])


def cap_points(center: np.ndarray, t: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Points at geodesic distance ``t`` and azimuth ``phi`` around ``center``."""
    st = np.sin(t)
    local = np.stack([st * np.cos(phi), st * np.sin(phi), np.cos(t)], axis=-1)
    pts = local @ rotation_to(center).T
    return pts / np.linalg.norm(pts, axis=-1, keepdims=True)


def sample_ball_uniform(space: Space, center, r: float, n: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw ``n`` points uniformly from the ball ``B(center, r)``.

    Returns an ``(n, coord_len)`` array.  Deterministic in ``(seed, stream)``.
    """
    ball_volume(space, r)  # range check only
    if n < 1:
        raise InvalidInputError("need at least one sample")
    center = as_points(space, center)
    rng = make_rng(seed, stream)
    if space.is_periodic:
        d = space.dim
        dirs = uniform_unit_vectors(rng, n, d)
        radii = r * rng.random(n) ** (1.0 / d)
        return wrap(center + dirs * radii[:, None])
    # uniform cap: cos(t) uniform on [cos r, 1]
    cos_t = 1.0 - rng.random(n) * (1.0 - math.cos(r))
    t = np.arccos(np.clip(cos_t, -1.0, 1.0))
    phi = TWO_PI * rng.random(n)
    return cap_points(center, t, phi)


def uniform_points(space: Space, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` points drawn from the normalized uniform measure of ``space``."""
    if space.is_periodic:
        return TWO_PI * rng.random((n, space.dim))
    return uniform_unit_vectors(rng, n, 3)


def points_to_json(points) -> list:
    return np.asarray(points, dtype=float).tolist()
