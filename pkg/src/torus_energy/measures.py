"""Discrete signed measures and grid densities.

:class:`DiscreteMeasure` is a weighted point set.  Coincident atoms (closer
than ``MERGE_TOL``) are merged at construction, so the representation is
canonical.  :class:`GridMeasure` is a piecewise-constant density on the
midpoint grid of a torus; ``density`` is relative to the uniform measure, so
a cell carries mass ``density / n**d`` and the uniform measure has density 1.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import InvalidInputError, OutOfRangeError
from .geometry import TWO_PI, Space, as_points, distance

MERGE_TOL = 1e-9
SUPPORT_REL_TOL = 1e-12


def _merge_groups(space: Space, pts: np.ndarray, tol: float) -> np.ndarray:
    """Label of the merge group of every point (labels ordered by first occurrence)."""
    n = len(pts)
    if n <= 1:
        return np.zeros(n, dtype=int)
    if space.is_periodic:
        # periodic tree wants data strictly inside [0, boxsize)
        tree = cKDTree(np.minimum(pts, np.nextafter(TWO_PI, 0.0)), boxsize=TWO_PI)
    else:
        tree = cKDTree(pts)
    pairs = tree.query_pairs(tol, output_type="ndarray")
    if len(pairs) == 0:
        return np.arange(n)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    # relabel by first occurrence so the output order follows the input order
    _, first = np.unique(labels, return_index=True)
    order = np.argsort(first)
    relabel = np.empty_like(order)
    relabel[order] = np.arange(len(order))
    return relabel[labels]


class DiscreteMeasure:
    """Finite signed combination of point masses."""

    def __init__(self, space: Space, points, weights, merge_tol: float = MERGE_TOL):
        pts = as_points(space, np.asarray(points, dtype=float).reshape(-1, space.coord_len))
        w = np.asarray(weights, dtype=float).reshape(-1)
        if len(pts) != len(w):
            raise InvalidInputError(f"{len(pts)} points but {len(w)} weights")
        if not np.all(np.isfinite(w)):
            raise InvalidInputError("weights must be finite")
        labels = _merge_groups(space, pts, merge_tol)
        k = int(labels.max()) + 1 if len(labels) else 0
        merged_w = np.zeros(k)
        np.add.at(merged_w, labels, w)
        first = np.unique(labels, return_index=True)[1]
        self.space = space
        self.points = pts[first] if k else np.zeros((0, space.coord_len))
        self.weights = merged_w
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @classmethod
    def dirac(cls, space: Space, point, weight: float = 1.0) -> "DiscreteMeasure":
        return cls(space, [point], [weight])

    @classmethod
    def empirical(cls, space: Space, points) -> "DiscreteMeasure":
        """Equal weights ``1/N`` on ``points``."""
        pts = np.asarray(points, dtype=float).reshape(-1, space.coord_len)
        return cls(space, pts, np.full(len(pts), 1.0 / len(pts)))

    @classmethod
    def zero(cls, space: Space) -> "DiscreteMeasure":
        return cls(space, np.zeros((0, space.coord_len)), np.zeros(0))

    def __len__(self) -> int:
        return len(self.weights)

    def __repr__(self) -> str:
        return f"DiscreteMeasure({self.space.tag}, atoms={len(self)}, mass={self.total_mass:.6g})"

    @property
    def total_mass(self) -> float:
        return math.fsum(self.weights)

    @property
    def is_unsigned(self) -> bool:
        return bool(np.all(self.weights >= 0))

    def support(self) -> np.ndarray:
        return self.points[self.weights != 0]

    def nonzero(self) -> tuple[np.ndarray, np.ndarray]:
        mask = self.weights != 0
        return self.points[mask], self.weights[mask]

    def scaled(self, a: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.space, self.points, a * self.weights)

    def _combine(self, other: "DiscreteMeasure", sign: float) -> "DiscreteMeasure":
        if not isinstance(other, DiscreteMeasure) or other.space != self.space:
            raise InvalidInputError("can only combine discrete measures on the same space")
        pts = np.concatenate([self.points, other.points])
        w = np.concatenate([self.weights, sign * other.weights])
        return DiscreteMeasure(self.space, pts, w)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return self.scaled(-1.0)

    def to_dict(self) -> dict:
        return {"space": self.space.tag, "points": self.points.tolist(), "weights": self.weights.tolist()}


@dataclass(frozen=True, eq=False)
class GridMeasure:
    """Density on the ``n**d`` midpoint grid of a torus, relative to the uniform measure."""

    space: Space
    density: np.ndarray

    def __post_init__(self):
        if not self.space.is_periodic:
            raise InvalidInputError("grid measures live on a torus")
        dens = np.array(self.density, dtype=float)
        d = self.space.dim
        if dens.ndim != d or len(set(dens.shape)) != 1 or dens.shape[0] < 2:
            raise InvalidInputError(f"density must be an (n,)*{d} array with n >= 2")
        if not np.all(np.isfinite(dens)):
            raise InvalidInputError("density must be finite")
        dens.setflags(write=False)
        object.__setattr__(self, "density", dens)

    @property
    def dim(self) -> int:
        return self.space.dim

    @property
    def resolution(self) -> int:
        return self.density.shape[0]

    @property
    def cell_width(self) -> float:
        return TWO_PI / self.resolution

    @property
    def cell_volume(self) -> float:
        """Uniform-measure mass of one cell."""
        return float(self.resolution) ** (-self.dim)

    @property
    def cell_mass(self) -> np.ndarray:
        return self.density * self.cell_volume

    @property
    def total_mass(self) -> float:
        return math.fsum(self.cell_mass.ravel())

    @property
    def is_unsigned(self) -> bool:
        return bool(np.all(self.density >= 0))

    def centers(self) -> np.ndarray:
        """Cell centers in row-major order, shape ``(n**d, d)``."""
        return grid_centers(self.dim, self.resolution)

    def support_mask(self) -> np.ndarray:
        mass = np.abs(self.cell_mass)
        total = mass.sum()
        if total == 0:
            return np.zeros(mass.shape, dtype=bool)
        return mass > SUPPORT_REL_TOL * total

    def support(self) -> np.ndarray:
        return self.centers()[self.support_mask().ravel()]

    def resample(self, factor: int = 2) -> "GridMeasure":
        """Refine every cell into ``factor**d`` children of equal density."""
        dens = self.density
        for axis in range(self.dim):
            dens = np.repeat(dens, factor, axis=axis)
        return GridMeasure(self.space, dens)

    def as_discrete(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.space, self.centers(), self.cell_mass.ravel())

    def scaled(self, a: float) -> "GridMeasure":
        return GridMeasure(self.space, a * self.density)

    def _check_compatible(self, other):
        if not isinstance(other, GridMeasure) or other.space != self.space or other.resolution != self.resolution:
            raise InvalidInputError("grid measures must share space and resolution")

    def __add__(self, other):
        self._check_compatible(other)
        return GridMeasure(self.space, self.density + other.density)

    def __sub__(self, other):
        self._check_compatible(other)
        return GridMeasure(self.space, self.density - other.density)

    def __neg__(self):
        return self.scaled(-1.0)

    def to_dict(self) -> dict:
        return {"space": self.space.tag, "resolution": self.resolution, "density": self.density.tolist()}


Measure = Union[DiscreteMeasure, GridMeasure]


def grid_centers(d: int, n: int) -> np.ndarray:
    ticks = (np.arange(n) + 0.5) * (TWO_PI / n)
    mesh = np.meshgrid(*([ticks] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def uniform_measure(space: Space, n: int) -> GridMeasure:
    """The normalized uniform measure on an ``n**d`` midpoint grid."""
    if n < 2:
        raise InvalidInputError("resolution must be >= 2")
    return GridMeasure(space, np.ones((n,) * space.dim))


def grid_from_function(space: Space, n: int, g: Callable[[np.ndarray], np.ndarray]) -> GridMeasure:
    """Grid density sampled from ``g`` at the cell centers."""
    centers = grid_centers(space.dim, n)
    return GridMeasure(space, np.asarray(g(centers), dtype=float).reshape((n,) * space.dim))


def jordan_split(mu: Measure) -> tuple[Measure, Measure]:
    """Positive and negative parts, ``mu = plus - minus``."""
    if isinstance(mu, GridMeasure):
        return GridMeasure(mu.space, np.maximum(mu.density, 0.0)), GridMeasure(mu.space, np.maximum(-mu.density, 0.0))
    plus = DiscreteMeasure(mu.space, mu.points, np.maximum(mu.weights, 0.0))
    minus = DiscreteMeasure(mu.space, mu.points, np.maximum(-mu.weights, 0.0))
    return plus, minus


def pushforward_proj(mu: Measure, i: int) -> Measure:
    """Image of ``mu`` under the coordinate projection ``x -> x_i`` (``i`` is 1-based)."""
    if not mu.space.is_periodic:
        raise InvalidInputError("coordinate projections are defined on a torus")
    d = mu.space.dim
    if not 1 <= i <= d:
        raise OutOfRangeError(f"coordinate index must be in 1..{d}, got {i}")
    circle = Space.circle()
    if isinstance(mu, GridMeasure):
        others = tuple(a for a in range(d) if a != i - 1)
        mass = mu.cell_mass.sum(axis=others) if others else mu.cell_mass
        return GridMeasure(circle, mass * mu.resolution)
    return DiscreteMeasure(circle, mu.points[:, i - 1 : i], mu.weights)


def ball(space: Space, center, r: float) -> Callable[[np.ndarray], np.ndarray]:
    """Predicate of the closed ball ``B(center, r)``."""
    c = as_points(space, center)

    def inside(pts):
        return np.asarray(distance(space, pts, c)) <= r

    return inside


def complement(region: Callable[[np.ndarray], np.ndarray]) -> Callable[[np.ndarray], np.ndarray]:
    return lambda pts: ~np.asarray(region(pts), dtype=bool)


def restrict(mu: Measure, region: Callable[[np.ndarray], np.ndarray]) -> Measure:
    """Zero out the mass outside ``region`` (a predicate on point arrays)."""
    if isinstance(mu, GridMeasure):
        keep = np.asarray(region(mu.centers()), dtype=bool).reshape(mu.density.shape)
        return GridMeasure(mu.space, np.where(keep, mu.density, 0.0))
    if len(mu) == 0:
        return mu
    keep = np.asarray(region(mu.points), dtype=bool)
    return DiscreteMeasure(mu.space, mu.points, np.where(keep, mu.weights, 0.0))


def measure_from_dict(data: dict, space: Space | None = None) -> Measure:
    if "space" in data:
        space = Space.parse(data["space"])
    if space is None:
        raise InvalidInputError("measure file does not name its space")
    if "density" in data:
        return GridMeasure(space, np.asarray(data["density"], dtype=float))
    if "points" not in data:
        raise InvalidInputError("measure needs 'points' and 'weights' or a 'density'")
    pts = np.asarray(data["points"], dtype=float).reshape(-1, space.coord_len)
    weights = data.get("weights")
    if weights is None:
        weights = np.full(len(pts), 1.0 / max(len(pts), 1))
    return DiscreteMeasure(space, pts, weights)


def measure_to_csv(mu: Measure) -> str:
    """One row per atom (or cell): coordinates then weight (cell mass for grids)."""
    if isinstance(mu, GridMeasure):
        pts, w = mu.centers(), mu.cell_mass.ravel()
    else:
        pts, w = mu.points, mu.weights
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"x{k + 1}" for k in range(pts.shape[1])] + ["weight"])
    for p, wi in zip(pts, w):
        writer.writerow([repr(float(c)) for c in p] + [repr(float(wi))])
    return buf.getvalue()


def measure_from_csv(text: str, space: Space) -> DiscreteMeasure:
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise InvalidInputError("empty measure CSV")
    if not _is_number(rows[0][0]):
        rows = rows[1:]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float).reshape(-1, space.coord_len + 1)
    except ValueError as exc:
        raise InvalidInputError(f"bad measure CSV: {exc}") from None
    return DiscreteMeasure(space, data[:, :-1], data[:, -1])


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True
