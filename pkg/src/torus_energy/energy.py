"""Potentials, energies, mutual energies and the G-ratio.

Discrete measures are summed exactly over atom pairs.  Grid measures use the
midpoint rule; because every built-in torus kernel depends only on the wrapped
offset, the cell-to-cell interaction matrix is circulant and is applied with
an FFT.  The self-cell term, where the kernel may be singular, is set by a
diagonal policy:

``exclude``        drop it;
``analytic_cell``  integrate the kernel over the cell (closed form for Riesz
                   kernels, using the ball of the same volume; a graded corner
                   rule for singular profile kernels; the midpoint value for
                   finite kernels);
``cap_m``          replace the kernel by ``min(K, m)`` everywhere.

Final reductions use ``math.fsum`` so the result does not depend on the
summation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import InvalidInputError, OutOfRangeError, UndefinedEnergyError, UndefinedRatioError
from .geometry import TWO_PI, Space, as_points, distance, unit_ball_volume
from .kernels import Kernel, ProductProfileKernel, RieszKernel, truncate
from .measures import MERGE_TOL, DiscreteMeasure, GridMeasure, Measure, jordan_split
from .quadrature import box_corner_rule, corner_rule

POLICIES = ("exclude", "analytic_cell", "cap_m")
_CHUNK = 1 << 22  # kernel evaluations per block in direct sums


@dataclass
class EnergyReport:
    value: float
    kernel: dict
    infinite: bool = False
    diverged: bool = False
    diagonal_policy: str | None = None
    size: dict = field(default_factory=dict)
    assumptions: list = field(default_factory=lambda: ["capacity of every ball is positive (not verified)"])

    def to_dict(self) -> dict:
        return {
            "value": None if self.infinite else self.value,
            "infinite": self.infinite,
            "sign": int(np.sign(self.value)) if self.infinite else None,
            "diverged": self.diverged,
            "diagonal_policy": self.diagonal_policy,
            "size": self.size,
            "kernel": self.kernel,
            "assumptions": self.assumptions,
        }


def _report(value: float, kernel: Kernel, **kw) -> EnergyReport:
    return EnergyReport(value=value, kernel=kernel.to_dict(), infinite=math.isinf(value), **kw)


def _signed_sum(terms: np.ndarray) -> float:
    """Exact sum of extended-real terms; +inf and -inf together is an error."""
    terms = np.asarray(terms, dtype=float).ravel()
    pos = bool(np.any(terms == np.inf))
    neg = bool(np.any(terms == -np.inf))
    if pos and neg:
        raise UndefinedEnergyError("sum contains both +inf and -inf contributions")
    if pos:
        return math.inf
    if neg:
        return -math.inf
    return math.fsum(terms)


def _weighted(w: np.ndarray, kvals: np.ndarray) -> np.ndarray:
    """``w * K`` with ``sign(w) * inf`` where ``K`` is infinite (``w`` is never 0)."""
    return w * kvals


def _check_policy(policy: str) -> None:
    if policy not in POLICIES:
        raise InvalidInputError(f"unknown diagonal policy {policy!r}; choose from {POLICIES}")


def _resolve(kernel: Kernel, policy: str | None, cap: float | None) -> tuple[Kernel, str]:
    policy = policy or "analytic_cell"
    _check_policy(policy)
    if policy == "cap_m":
        if cap is None:
            raise InvalidInputError("policy cap_m needs a truncation level m")
        kernel = truncate(kernel, cap)
    return kernel, policy


def riesz_diverges(kernel: Kernel, d: int) -> bool:
    return isinstance(kernel, RieszKernel) and kernel.cap is None and kernel.s >= d


def self_cell_integral(kernel: Kernel, d: int, h: float, policy: str) -> float:
    """``integral of K(c, y) d sigma(y)`` over the cube of side ``h`` centered at ``c``."""
    vol = (h / TWO_PI) ** d
    if policy == "exclude":
        return 0.0
    if isinstance(kernel, RieszKernel) and kernel.cap is None:
        s = kernel.s
        if s >= d:
            return math.inf
        vd = unit_ball_volume(d)
        a = (h**d / vd) ** (1.0 / d)
        if s == 0:
            j = -vd * a**d * (math.log(a) - 1.0 / d)
        else:
            j = math.copysign(1.0, s) * d * vd * a ** (d - s) / (d - s)
        return j / TWO_PI**d + kernel.shift * vol
    if isinstance(kernel, ProductProfileKernel) and kernel.singular:
        nodes, weights = corner_rule(d, h / 2.0, 16)
        vals = kernel.profile(nodes)
        return 2**d * math.fsum(weights * vals) / TWO_PI**d + kernel.shift * vol
    diag = float(kernel.on_offsets(np.zeros(d)))
    if not math.isfinite(diag):
        raise InvalidInputError("kernel is singular on the diagonal; use a singular-aware policy")
    return diag * vol


def grid_table(kernel: Kernel, d: int, n: int, policy: str) -> np.ndarray:
    """Circulant weights ``T[k] = sigma-integral of K over cell k`` (offset index ``k``)."""
    h = TWO_PI / n
    ticks = np.mod(np.arange(n) * h + math.pi, TWO_PI) - math.pi
    mesh = np.meshgrid(*([ticks] * d), indexing="ij")
    offsets = np.stack(mesh, axis=-1)
    origin = (0,) * d
    with np.errstate(divide="ignore"):
        # the origin entry is replaced below
        offsets[origin] = h
        table = kernel.on_offsets(offsets) * (h / TWO_PI) ** d
    table[origin] = self_cell_integral(kernel, d, h, policy)
    return table


def _circular_apply(table: np.ndarray, density: np.ndarray) -> np.ndarray:
    """``U_i = sum_j T[i - j] rho_j`` on the periodic grid."""
    shape = density.shape
    ft = np.fft.rfftn(table)
    fr = np.fft.rfftn(density)
    return np.fft.irfftn(ft * fr, s=shape, axes=tuple(range(len(shape))))


def grid_potential_at_centers(kernel: Kernel, mu: GridMeasure, policy: str | None = None, cap: float | None = None) -> np.ndarray:
    kernel, policy = _resolve(kernel, policy, cap)
    kernel.check_space(mu.space)
    if riesz_diverges(kernel, mu.dim) and policy != "exclude":
        return np.full(mu.density.shape, math.inf)
    table = grid_table(kernel, mu.dim, mu.resolution, policy)
    return _circular_apply(table, mu.density)


def potential(kernel: Kernel, mu: Measure, x, policy: str | None = None, cap: float | None = None):
    """``U(x) = integral K(x, y) d mu(y)`` at one point or a batch of points.

    For a grid measure the sum runs over cell centers; a probe that coincides
    with a center gets that cell's self-term from the diagonal policy.
    """
    space = mu.space
    kernel.check_space(space)
    xs = as_points(space, x)
    single = xs.ndim == 1
    xs = xs.reshape(-1, space.coord_len)
    if isinstance(mu, GridMeasure):
        kern, pol = _resolve(kernel, policy, cap)
        out = _grid_potential(kern, mu, xs, pol)
    else:
        out = _discrete_potential(kernel, mu, xs)
    return float(out[0]) if single else out


def _blocks(n_rows: int, n_cols: int):
    step = max(1, _CHUNK // max(n_cols, 1))
    for start in range(0, n_rows, step):
        yield slice(start, min(n_rows, start + step))


def _discrete_potential(kernel: Kernel, mu: DiscreteMeasure, xs: np.ndarray) -> np.ndarray:
    pts, w = mu.nonzero()
    out = np.zeros(len(xs))
    if len(w) == 0:
        return out
    for rows in _blocks(len(xs), len(w)):
        xb = xs[rows]
        dist = np.asarray(distance(mu.space, xb[:, None, :], pts[None, :, :]))
        kv = np.asarray(kernel.evaluate(mu.space, xb[:, None, :], pts[None, :, :]), dtype=float)
        coincide = dist < MERGE_TOL
        if np.any(coincide):
            kv = np.where(coincide, kernel.diagonal_value(mu.space), kv)
        contrib = _weighted(w[None, :], kv)
        pos = np.any(contrib == np.inf, axis=1)
        neg = np.any(contrib == -np.inf, axis=1)
        if np.any(pos & neg):
            raise UndefinedEnergyError("potential combines +inf and -inf at a probe point")
        finite = np.where(np.isfinite(contrib), contrib, 0.0).sum(axis=1)
        out[rows] = np.where(pos, np.inf, np.where(neg, -np.inf, finite))
    return out


def _grid_potential(kernel: Kernel, mu: GridMeasure, xs: np.ndarray, policy: str) -> np.ndarray:
    centers = mu.centers()
    mass = mu.cell_mass.ravel()
    live = mass != 0
    centers, mass = centers[live], mass[live]
    out = np.zeros(len(xs))
    if len(mass) == 0:
        return out
    d, h = mu.dim, mu.cell_width
    self_term = self_cell_integral(kernel, d, h, policy) / mu.cell_volume
    for rows in _blocks(len(xs), len(mass)):
        xb = xs[rows]
        w = np.mod(xb[:, None, :] - centers[None, :, :] + math.pi, TWO_PI) - math.pi
        dist = np.sqrt(np.sum(w * w, axis=-1))
        coincide = dist < MERGE_TOL
        safe = np.where(coincide[..., None], 1.0, w)
        with np.errstate(divide="ignore"):
            kv = kernel.on_offsets(safe)
        contrib = np.where(coincide, mass * self_term, mass * kv)
        if kernel.singular:
            # cells next to an off-grid probe are integrated with the corner rule
            near = np.all(np.abs(w) <= 1.5 * h, axis=-1) & ~np.any(coincide, axis=1)[:, None]
            for r, c in zip(*np.nonzero(near)):
                offset = xb[r] - centers[c]
                offset = np.mod(offset + math.pi, TWO_PI) - math.pi
                cell = _box_integral(kernel, -h / 2 - offset, h / 2 - offset) / TWO_PI**d
                contrib[r, c] = mass[c] * cell / mu.cell_volume
        pos = np.any(contrib == np.inf, axis=1)
        neg = np.any(contrib == -np.inf, axis=1)
        if np.any(pos & neg):
            raise UndefinedEnergyError("potential combines +inf and -inf at a probe point")
        finite = np.where(np.isfinite(contrib), contrib, 0.0).sum(axis=1)
        out[rows] = np.where(pos, np.inf, np.where(neg, -np.inf, finite))
    return out


def _box_integral(kernel: Kernel, lo: np.ndarray, hi: np.ndarray, m: int = 8) -> float:
    """Lebesgue integral of ``K`` at offsets in the box ``prod [lo_i, hi_i]``.

    The box is written as a signed combination of boxes with a corner at the
    zero offset, each integrated with the singular corner rule.
    """
    parts = []
    for a, b in zip(lo, hi):
        if a < 0 < b:
            parts.append(((b, 1.0), (a, 1.0)))
        elif a >= 0:
            parts.append(((b, 1.0), (a, -1.0)))
        else:
            parts.append(((a, 1.0), (b, -1.0)))
    total = []
    for combo in product(*parts):
        ends = np.array([c[0] for c in combo])
        if np.any(ends == 0):
            continue
        coef = float(np.prod([c[1] for c in combo]))
        nodes, weights = box_corner_rule(np.abs(ends), m)
        total.append(coef * weights * kernel.on_offsets(nodes * np.sign(ends)))
    return math.fsum(np.concatenate(total)) if total else 0.0


def pair_matrix(kernel: Kernel, space: Space, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """``K(a_i, b_j)`` with coincident pairs set to the diagonal value."""
    kv = np.asarray(kernel.evaluate(space, a[:, None, :], b[None, :, :]), dtype=float)
    dist = np.asarray(distance(space, a[:, None, :], b[None, :, :]))
    coincide = dist < MERGE_TOL
    if np.any(coincide):
        kv = np.where(coincide, kernel.diagonal_value(space), kv)
    return kv


def energy_discrete(kernel: Kernel, mu: DiscreteMeasure, include_diagonal: bool = True) -> EnergyReport:
    """``sum_{i,j} w_i w_j K(x_i, x_j)``; without the diagonal this is the N-point energy."""
    kernel.check_space(mu.space)
    pts, w = mu.nonzero()
    size = {"atoms": int(len(w))}
    if len(w) == 0:
        return _report(0.0, kernel, size=size)
    kv = pair_matrix(kernel, mu.space, pts, pts)
    terms = (w[:, None] * w[None, :]) * kv
    if not include_diagonal:
        terms = terms[~np.eye(len(w), dtype=bool)]
    return _report(_signed_sum(terms), kernel, size=size)


def energy_grid(kernel: Kernel, mu: GridMeasure, policy: str | None = None, cap: float | None = None) -> EnergyReport:
    """Double midpoint quadrature of the energy of a grid density."""
    kernel.check_space(mu.space)
    kern, pol = _resolve(kernel, policy, cap)
    size = {"resolution": mu.resolution, "dim": mu.dim}
    if riesz_diverges(kern, mu.dim) and pol != "exclude":
        return _report(math.inf, kern, diverged=True, diagonal_policy=pol, size=size)
    u = _circular_apply(grid_table(kern, mu.dim, mu.resolution, pol), mu.density)
    value = math.fsum((mu.cell_mass * u).ravel())
    return _report(value, kern, diagonal_policy=pol, size=size)


def energy(kernel: Kernel, mu: Measure, policy: str | None = None, include_diagonal: bool = True, cap: float | None = None) -> EnergyReport:
    if isinstance(mu, GridMeasure):
        return energy_grid(kernel, mu, policy, cap)
    return energy_discrete(kernel, mu, include_diagonal)


def mutual_energy(
    kernel: Kernel,
    mu: Measure,
    nu: Measure,
    policy: str | None = None,
    include_diagonal: bool = True,
    cap: float | None = None,
) -> float:
    """``integral integral K(x, y) d mu(x) d nu(y)``."""
    if mu.space != nu.space:
        raise InvalidInputError("measures live on different spaces")
    kernel.check_space(mu.space)
    if isinstance(mu, GridMeasure) and isinstance(nu, GridMeasure):
        if mu.resolution != nu.resolution:
            raise InvalidInputError("grid measures must share a resolution")
        kern, pol = _resolve(kernel, policy, cap)
        if riesz_diverges(kern, mu.dim) and pol != "exclude":
            return math.inf
        u = _circular_apply(grid_table(kern, mu.dim, mu.resolution, pol), nu.density)
        return math.fsum((mu.cell_mass * u).ravel())
    if isinstance(mu, GridMeasure) or isinstance(nu, GridMeasure):
        grid, disc = (mu, nu) if isinstance(mu, GridMeasure) else (nu, mu)
        pts, w = disc.nonzero()
        if len(w) == 0:
            return 0.0
        kern, pol = _resolve(kernel, policy, cap)
        u = _grid_potential(kern, grid, pts, pol)
        return _signed_sum(_weighted(w, u))
    pa, wa = mu.nonzero()
    pb, wb = nu.nonzero()
    if len(wa) == 0 or len(wb) == 0:
        return 0.0
    kv = pair_matrix(kernel, mu.space, pa, pb)
    if not include_diagonal:
        dist = np.asarray(distance(mu.space, pa[:, None, :], pb[None, :, :]))
        kv = np.where(dist < MERGE_TOL, 0.0, kv)
    return _signed_sum((wa[:, None] * wb[None, :]) * kv)


def energy_signed(
    kernel: Kernel,
    mu: Measure,
    policy: str | None = None,
    include_diagonal: bool = True,
    cap: float | None = None,
) -> EnergyReport:
    """Energy of a signed measure via its Jordan decomposition.

    ``I(mu) = I(mu+) + I(mu-) - 2 integral K d mu+ d mu-``, defined when the
    self terms or the cross term is finite.
    """
    plus, minus = jordan_split(mu)
    ip = energy(kernel, plus, policy, include_diagonal, cap)
    im = energy(kernel, minus, policy, include_diagonal, cap)
    cross = mutual_energy(kernel, plus, minus, policy, include_diagonal, cap)
    own = ip.value + im.value
    if math.isinf(own) and math.isinf(cross):
        raise UndefinedEnergyError("both the self energies and the cross term are infinite")
    value = own - 2.0 * cross
    return EnergyReport(
        value=value,
        kernel=ip.kernel,
        infinite=math.isinf(value),
        diverged=ip.diverged or im.diverged,
        diagonal_policy=ip.diagonal_policy,
        size=ip.size,
    )


@dataclass
class GRatio:
    value: float
    energy_mu: float
    energy_nu: float
    cross: float

    @property
    def at_least_one(self) -> bool:
        return self.value >= 1.0

    def to_dict(self) -> dict:
        return {
            "G": self.value,
            "G_at_least_one": self.at_least_one,
            "energy_mu": self.energy_mu,
            "energy_nu": self.energy_nu,
            "cross": self.cross,
        }


def g_ratio(kernel: Kernel, mu: Measure, nu: Measure, policy: str | None = None, cap: float | None = None) -> GRatio:
    """``I(mu) I(nu) / (integral U^mu d nu)^2`` for unsigned ``mu`` and ``nu``."""
    if not (mu.is_unsigned and nu.is_unsigned):
        raise InvalidInputError("the G-ratio takes unsigned measures")
    a = energy(kernel, mu, policy, True, cap).value
    b = energy(kernel, nu, policy, True, cap).value
    c = mutual_energy(kernel, mu, nu, policy, True, cap)
    for name, v in (("I(mu)", a), ("I(nu)", b), ("cross term", c)):
        if not (math.isfinite(v) and v > 0):
            raise UndefinedRatioError(f"{name} must be positive and finite, got {v}")
    return GRatio(a * b / (c * c), a, b, c)


@dataclass
class CapacityReport:
    value: float
    minimal_energy: float
    zero_capacity: bool
    resolution: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "capacity": self.value,
            "minimal_energy": None if math.isinf(self.minimal_energy) else self.minimal_energy,
            "zero_capacity": self.zero_capacity,
            "resolution": self.resolution,
        }


def capacity_estimate(minimal_energy: float, resolution: dict | None = None) -> CapacityReport:
    """Reciprocal of a (numerically obtained) minimal energy."""
    if math.isnan(minimal_energy) or minimal_energy <= 0:
        raise OutOfRangeError("capacity needs a positive minimal energy (apply a kernel shift)")
    if math.isinf(minimal_energy):
        return CapacityReport(0.0, minimal_energy, True, resolution or {})
    return CapacityReport(1.0 / minimal_energy, minimal_energy, False, resolution or {})
