"""Numerical tests of the submean value inequality.

A function ``u`` is subharmonic with radius ``R`` when ``u(x)`` is at most
its ``sigma``-average over every ball ``B(x, r)`` with ``r < R``.  The routines
here estimate ball averages, compare them with centre values and aggregate
the resulting margins into verdicts.  All verdicts are statistical evidence
over finitely many balls, not proofs.

Monte Carlo ball averages are symmetrized: every uniform draw ``z`` in the
ball is combined with its images under the signed permutations of the
coordinates (on the sphere, the dihedral group of order 8 acting on the
azimuth).  The orbit mean of a quadratic form equals its trace term, so odd
Taylor terms cancel exactly and the sign of a margin of size ``O(r^2)``
is resolved even for radii near ``1e-3``.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Callable

import numpy as np

from .energy import potential
from .errors import InvalidInputError, PreconditionError
from .geometry import (
    TWO_PI,
    Space,
    as_points,
    ball_volume,
    cap_points,
    distance,
    make_rng,
    uniform_unit_vectors,
    wrap,
    wrapped_offset,
)
from .kernels import Kernel, Profile, riesz_eval
from .quadrature import gauss_legendre

K_SIGMA = 4.0
MIN_RADIUS = 1e-3
ROUNDING_FLOOR = 1e-14
CONFIRM_FACTOR = 4
CONFIRM_STREAM = 1 << 32
ASSUMPTIONS = (
    "upper semicontinuity of the tested function is assumed, not checked",
    "margins are finite-sample evidence over the sampled balls only",
)


@dataclass(frozen=True)
class SubmeanSample:
    """One ball: ``margin = mean_estimate - value_at_center``."""

    x: np.ndarray
    y: np.ndarray | None
    r: float
    mean_estimate: float
    mean_stderr: float
    value_at_center: float
    margin: float
    distance: float = math.nan
    quadrature: str = "mc"
    n_evals: int = 0
    confirmed: bool = False

    def to_dict(self) -> dict:
        return {
            "x": np.asarray(self.x).tolist(),
            "y": None if self.y is None else np.asarray(self.y).tolist(),
            "r": self.r,
            "distance": self.distance,
            "mean_estimate": self.mean_estimate,
            "mean_stderr": self.mean_stderr,
            "value_at_center": self.value_at_center,
            "margin": self.margin,
            "quadrature": self.quadrature,
            "n_evals": self.n_evals,
            "confirmed": self.confirmed,
        }


def verdict_of(samples, k: float = K_SIGMA) -> str:
    """``fails`` if some margin < -k stderr; ``strictly_passes`` if all > +k stderr."""
    if not samples:
        return "passes"
    margins = np.array([s.margin for s in samples])
    errs = np.array([s.mean_stderr for s in samples])
    if np.any(margins < -k * errs):
        return "fails"
    if np.all(margins > k * errs):
        return "strictly_passes"
    return "passes"


@dataclass
class SubharmonicityReport:
    kernel: dict
    space: str
    R: float
    samples: list
    worst_margin: float
    verdict: str
    k: float = K_SIGMA
    confidence: str = ""
    seed: int | None = None
    n_per_ball: int = 0
    assumptions: tuple = ASSUMPTIONS

    @property
    def witness(self) -> SubmeanSample | None:
        """Sample with the most negative normalized margin."""
        if not self.samples:
            return None
        return min(self.samples, key=lambda s: s.margin / s.mean_stderr)

    def to_dict(self) -> dict:
        w = self.witness
        return {
            "kernel": self.kernel,
            "space": self.space,
            "R": self.R,
            "k": self.k,
            "seed": self.seed,
            "n_per_ball": self.n_per_ball,
            "n_samples": len(self.samples),
            "worst_margin": self.worst_margin,
            "verdict": self.verdict,
            "confidence": self.confidence,
            "assumptions": list(self.assumptions),
            "witness": None if w is None else w.to_dict(),
            "samples": [s.to_dict() for s in self.samples],
        }

    def samples_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["x", "y", "distance", "r", "margin", "stderr"])
        for s in self.samples:
            xs = " ".join(repr(float(v)) for v in np.ravel(s.x))
            ys = "" if s.y is None else " ".join(repr(float(v)) for v in np.ravel(s.y))
            out.writerow([xs, ys, repr(s.distance), repr(s.r), repr(s.margin), repr(s.mean_stderr)])
        return buf.getvalue()


# -- symmetrized Monte Carlo -------------------------------------------------


def signed_permutations(d: int) -> np.ndarray:
    """Signed permutation matrices; sign flips only when ``d > 4``."""
    signs = np.array(list(product((1.0, -1.0), repeat=d)))
    perms = list(permutations(range(d))) if d <= 4 else [tuple(range(d))]
    mats = []
    for p in perms:
        eye = np.eye(d)[list(p)]
        for sg in signs:
            mats.append(sg[:, None] * eye)
    return np.array(mats)


def _euclidean_ball(rng: np.random.Generator, m: int, d: int, r: float) -> np.ndarray:
    dirs = uniform_unit_vectors(rng, m, d)
    return dirs * (r * rng.random(m) ** (1.0 / d))[:, None]


def _orbit_stats(diffs: np.ndarray, scale: float) -> tuple[float, float]:
    """Mean and standard error from an ``(orbit, m)`` array of differences."""
    per_base = diffs.mean(axis=0)
    m = per_base.size
    mean = math.fsum(per_base) / m
    var = float(np.var(per_base, ddof=1)) if m > 1 else 0.0
    err = math.sqrt(var / m)
    floor = ROUNDING_FLOOR * (1.0 + scale)
    return mean, math.hypot(err, floor)


def _offset_mc(diff_fn: Callable[[np.ndarray], np.ndarray], d: int, r: float, n: int, rng) -> tuple[np.ndarray, int]:
    mats = signed_permutations(d)
    m = max(2, -(-n // len(mats)))
    base = _euclidean_ball(rng, m, d, r)
    pts = np.einsum("gij,mj->gmi", mats, base)
    diffs = diff_fn(pts.reshape(-1, d)).reshape(len(mats), m)
    return diffs, m * len(mats)


def _sphere_mc(center: np.ndarray, func, r: float, n: int, rng) -> tuple[np.ndarray, int]:
    m = max(2, -(-n // 8))
    cos_t = 1.0 - rng.random(m) * (1.0 - math.cos(r))
    t = np.arccos(np.clip(cos_t, -1.0, 1.0))
    phi = TWO_PI * rng.random(m)
    quarter = np.arange(4)[:, None] * (math.pi / 2)
    phis = np.concatenate([phi[None, :] + quarter, -phi[None, :] + quarter])
    tt = np.broadcast_to(t, phis.shape)
    pts = cap_points(center, tt.ravel(), phis.ravel())
    return func(pts).reshape(8, m), 8 * m


# -- deterministic quadrature ------------------------------------------------


def _periodic_nodes(m: int) -> np.ndarray:
    return (np.arange(m) + 0.5) * (TWO_PI / m)


def _torus_ball_rule(d: int, r: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Polar rule for the Euclidean ball of radius ``r``, weights sum to 1."""
    if d == 1:
        z, w = gauss_legendre(m, -r, r)
        return z[:, None], w / (2 * r)
    rho, wr = gauss_legendre(m, 0.0, r)
    if d == 2:
        phi = _periodic_nodes(2 * m)
        R, P = np.meshgrid(rho, phi, indexing="ij")
        W = np.outer(wr * rho, np.full(phi.size, TWO_PI / phi.size))
        pts = np.stack([R * np.cos(P), R * np.sin(P)], axis=-1).reshape(-1, 2)
        W = W.ravel()
        return pts, W / W.sum()
    if d == 3:
        ct, wc = gauss_legendre(m, -1.0, 1.0)
        phi = _periodic_nodes(2 * m)
        R, C, P = np.meshgrid(rho, ct, phi, indexing="ij")
        S = np.sqrt(1.0 - C * C)
        W = (wr * rho**2)[:, None, None] * wc[None, :, None] * np.full(phi.size, TWO_PI / phi.size)[None, None, :]
        pts = np.stack([R * S * np.cos(P), R * S * np.sin(P), R * C], axis=-1).reshape(-1, 3)
        W = W.ravel()
        return pts, W / W.sum()
    raise InvalidInputError("tensor ball quadrature is implemented for d <= 3; use mc")


def _split_rule_1d(lo: float, hi: float, breaks, m: int):
    edges = np.unique(np.concatenate([[lo, hi], [b for b in breaks if lo < b < hi]]))
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        z, w = gauss_legendre(m, a, b)
        nodes.append(z)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def _torus_tensor_mean(kernel: Kernel, w0: np.ndarray, r: float, m: int) -> float:
    d = w0.size
    if d == 1:
        # split at the cut locus crossings so every panel is smooth
        breaks = [k * math.pi - w0[0] for k in (-3, -1, 1, 3)]
        z, w = _split_rule_1d(-r, r, breaks, m)
        vals = kernel.on_offsets(wrapped_offset(w0 + z[:, None], 0.0))
        return math.fsum(w * vals) / (2 * r)
    pts, w = _torus_ball_rule(d, r, m)
    vals = kernel.on_offsets(wrapped_offset(w0 + pts, 0.0))
    return math.fsum(w * vals)


def sphere_cap_mean(kernel: Kernel, D: float, r: float, m: int) -> float:
    """Average over ``B(x, r)`` of ``K(., y)`` on S^2 with ``d(x, y) = D``.

    ``K(., y)`` depends only on the colatitude ``theta`` about ``y``; the cap
    meets the circle of colatitude ``theta`` in an arc of half-angle
    ``phi0(theta)``, which reduces the mean to a 1D integral.  The variable
    change ``theta = a + (b - a)(1 - cos alpha)/2`` absorbs the square-root
    endpoint behaviour of ``phi0``.
    """
    a = D - r
    b = min(D + r, math.pi)
    alpha, wa = gauss_legendre(m, 0.0, math.pi)
    theta = a + (b - a) * (1.0 - np.cos(alpha)) / 2.0
    jac = (b - a) * np.sin(alpha) / 2.0
    st = np.sin(theta)
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = (math.cos(r) - np.cos(theta) * math.cos(D)) / (st * math.sin(D))
    arg = np.where(st > 0, arg, -1.0)
    phi0 = np.arccos(np.clip(arg, -1.0, 1.0))
    vals = kernel._finish(kernel.base_of_distance(theta))
    integrand = vals * 2.0 * phi0 * st * jac
    return math.fsum(wa * integrand) / (TWO_PI * (1.0 - math.cos(r)))


# -- public checks -----------------------------------------------------------


def _precheck(space: Space, x, y, r: float):
    ball_volume(space, r)
    x = as_points(space, x)
    y = as_points(space, y)
    dist = float(distance(space, x, y))
    if not dist > r:
        raise PreconditionError(f"ball B(x, {r}) reaches the singularity at y (distance {dist})")
    return x, y, dist


def submean_check(
    kernel: Kernel,
    space: Space,
    y,
    x,
    r: float,
    quadrature: str = "mc",
    n: int = 20000,
    seed: int = 0,
    stream: int = 0,
) -> SubmeanSample:
    """Compare ``K(x, y)`` with the ``sigma``-mean of ``K(., y)`` over ``B(x, r)``.

    Parameters
    ----------
    quadrature : ``"mc"`` or ``"tensor"``
        ``mc`` uses ``n`` symmetrized uniform draws and reports a standard
        error.  ``tensor`` uses ``n`` Gauss nodes per dimension (torus,
        ``d <= 3``) or a 1D colatitude rule (sphere); the error estimate is
        the change from halving ``n``.
    """
    kernel.check_space(space)
    x, y, dist = _precheck(space, x, y, r)
    if space.is_periodic:
        w0 = wrapped_offset(x, y)
        center = float(kernel.on_offsets(w0))
    else:
        center = float(kernel.evaluate(space, x, y))
    if quadrature == "mc":
        rng = make_rng(seed, stream)
        if space.is_periodic:
            diffs, count = _offset_mc(
                lambda z: kernel.on_offsets(wrapped_offset(w0 + z, 0.0)) - center, space.dim, r, n, rng
            )
        else:
            diffs, count = _sphere_mc(x, lambda p: kernel.evaluate(space, p, y) - center, r, n, rng)
        margin, err = _orbit_stats(diffs, abs(center))
    elif quadrature == "tensor":
        if n < 4:
            raise InvalidInputError("tensor quadrature needs n >= 4")
        if space.is_periodic:
            fine = _torus_tensor_mean(kernel, w0, r, n)
            coarse = _torus_tensor_mean(kernel, w0, r, max(2, n // 2))
            count = n ** space.dim * (2 ** (space.dim - 1))
        else:
            fine = sphere_cap_mean(kernel, dist, r, n)
            coarse = sphere_cap_mean(kernel, dist, r, max(2, n // 2))
            count = n
        margin = fine - center
        err = math.hypot(abs(fine - coarse), ROUNDING_FLOOR * (1.0 + abs(center)))
    else:
        raise InvalidInputError(f"unknown quadrature {quadrature!r}")
    return SubmeanSample(
        x=x,
        y=y,
        r=float(r),
        mean_estimate=center + margin,
        mean_stderr=err,
        value_at_center=center,
        margin=margin,
        distance=dist,
        quadrature=quadrature,
        n_evals=int(count),
    )


def function_submean_check(
    space: Space | None,
    func: Callable[[np.ndarray], np.ndarray],
    x,
    r: float,
    n: int = 20000,
    seed: int = 0,
    stream: int = 0,
) -> SubmeanSample:
    """Symmetrized Monte Carlo submean test for an arbitrary function.

    ``space=None`` means Euclidean ``R^d`` with Lebesgue measure; ``x`` then
    fixes ``d``.  On a torus the ball is wrapped.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if space is not None:
        ball_volume(space, r)
        x = as_points(space, x)
    elif not r > 0:
        raise InvalidInputError("radius must be positive")
    center = float(np.asarray(func(x[None, :]), dtype=float).reshape(-1)[0])
    rng = make_rng(seed, stream)
    if space is not None and not space.is_periodic:
        diffs, count = _sphere_mc(x, lambda p: np.asarray(func(p), dtype=float) - center, r, n, rng)
    else:
        shift = (lambda p: wrap(p)) if space is not None else (lambda p: p)
        diffs, count = _offset_mc(
            lambda z: np.asarray(func(shift(x + z)), dtype=float) - center, x.size, r, n, rng
        )
    margin, err = _orbit_stats(diffs, abs(center))
    return SubmeanSample(
        x=x,
        y=None,
        r=float(r),
        mean_estimate=center + margin,
        mean_stderr=err,
        value_at_center=center,
        margin=margin,
        n_evals=int(count),
    )


def potential_submean_check(kernel: Kernel, mu, x, r: float, n: int = 4096, seed: int = 0, stream: int = 0):
    """Submean test of ``U_K^mu`` on ``B(x, r)`` (ball must avoid ``supp mu``)."""
    space = mu.space
    x = as_points(space, x)
    supp = mu.support()
    if len(supp) and float(np.min(distance(space, supp, x))) <= r:
        raise PreconditionError("ball meets the support of the measure")
    return function_submean_check(space, lambda p: potential(kernel, mu, p), x, r, n, seed, stream)


def _pair_offsets(space: Space, D: np.ndarray, rng) -> np.ndarray:
    """Torus offsets with Euclidean norm ``D`` inside the cube ``[-pi, pi]^d``."""
    d = space.dim
    out = np.empty((D.size, d))
    for i, dist in enumerate(D):
        dirs = uniform_unit_vectors(rng, 256, d)
        ok = np.all(np.abs(dirs) * dist <= math.pi, axis=1)
        if np.any(ok):
            out[i] = dirs[np.argmax(ok)] * dist
        else:
            signs = np.where(rng.random(d) < 0.5, -1.0, 1.0)
            out[i] = signs * dist / math.sqrt(d)
    return out


def sample_pairs(space: Space, n_pairs: int, seed: int, distances=None, r_min: float = 3 * MIN_RADIUS):
    """``(x, y)`` pairs, stratified uniformly over ``distance(x, y)``.

    When ``distances`` is given the pairs are placed at those distances
    (cycled) instead.
    """
    rng = make_rng(seed, 1 << 40)
    diam = space.diameter
    if distances is None:
        D = r_min + (diam - r_min) * (np.arange(n_pairs) + rng.random(n_pairs)) / n_pairs
        D = np.minimum(D, diam * (1 - 1e-12))
    else:
        D = np.resize(np.asarray(distances, dtype=float), n_pairs)
    if space.is_periodic:
        y = TWO_PI * rng.random((n_pairs, space.dim))
        x = wrap(y + _pair_offsets(space, D, rng))
    else:
        y = uniform_unit_vectors(rng, n_pairs, 3)
        phi = TWO_PI * rng.random(n_pairs)
        x = np.array([cap_points(yy, np.array(dd), np.array(pp)) for yy, dd, pp in zip(y, D, phi)])
    return x, y, D


def scan_entire_subharmonicity(
    kernel: Kernel,
    space: Space,
    R: float = 0.5,
    n_pairs: int = 250,
    radii_per_pair: int = 4,
    seed: int = 0,
    n: int = 20000,
    k: float = K_SIGMA,
    distances=None,
    threads: int = 1,
) -> SubharmonicityReport:
    """Scan submean margins of ``K(., y)`` over random pairs and radii.

    Radii are log-uniform in ``[1e-3, min(R, distance - 1e-3)]``.  A margin
    below ``-k`` standard errors is re-estimated once with ``4 n`` fresh
    draws before it counts as a failure, which keeps the family-wise false
    alarm rate of the scan small while genuine violations persist.
    """
    kernel.check_space(space)
    if not 0 < R <= 0.5:
        raise InvalidInputError("scan radius bound R must lie in (0, 1/2]")
    xs, ys, D = sample_pairs(space, n_pairs, seed, distances)
    rng = make_rng(seed, 1 << 41)
    jobs = []
    for i in range(n_pairs):
        hi = min(R, D[i] - MIN_RADIUS)
        if hi <= MIN_RADIUS:
            continue
        logs = rng.uniform(math.log(MIN_RADIUS), math.log(hi), radii_per_pair)
        for r in np.exp(logs):
            jobs.append((xs[i], ys[i], float(r)))

    def run(idx):
        x, y, r = jobs[idx]
        s = submean_check(kernel, space, y, x, r, "mc", n, seed, idx)
        if s.margin < -k * s.mean_stderr:
            again = submean_check(kernel, space, y, x, r, "mc", CONFIRM_FACTOR * n, seed, CONFIRM_STREAM + idx)
            s = SubmeanSample(**{**again.__dict__, "confirmed": True})
        return s

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(run, range(len(jobs))))
    else:
        samples = [run(i) for i in range(len(jobs))]
    worst = min((s.margin for s in samples), default=math.nan)
    errs = [s.mean_stderr for s in samples]
    confidence = (
        f"symmetrized Monte Carlo, {n} draws per ball; verdict threshold {k} standard errors; "
        f"median stderr {float(np.median(errs)) if errs else math.nan:.3g}"
    )
    return SubharmonicityReport(
        kernel=kernel.to_dict(),
        space=space.tag,
        R=R,
        samples=samples,
        worst_margin=worst,
        verdict=verdict_of(samples, k),
        k=k,
        confidence=confidence,
        seed=seed,
        n_per_ball=n,
    )


# -- profile conditions ------------------------------------------------------


@dataclass
class ConditionResult:
    name: str
    passed: bool
    worst: float
    detail: str

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "worst": self.worst, "detail": self.detail}


@dataclass
class ProfileConditionReport:
    profile: dict
    conditions: list
    assumptions: tuple = (
        "continuity in the extended sense is assumed from the tabulation",
        "upper semicontinuity is assumed, not checked",
    )

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)

    def condition(self, name: str) -> ConditionResult:
        for c in self.conditions:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "passed": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
            "assumptions": list(self.assumptions),
        }


def _check_submean_on_cube(f: Profile, n_centers: int, n: int, seed: int, k: float) -> ConditionResult:
    d = f.d
    rng = make_rng(seed, 1 << 42)
    worst_ratio, worst = math.inf, math.inf
    samples = []
    tries = 0
    while len(samples) < n_centers and tries < 50 * n_centers:
        tries += 1
        r = math.exp(rng.uniform(math.log(MIN_RADIUS), math.log(0.25)))
        u = rng.uniform(r, math.pi - r, d)
        if np.linalg.norm(u) <= r + MIN_RADIUS:
            continue
        s = function_submean_check(None, f, u, r, n, seed, len(samples))
        samples.append(s)
    verdict = verdict_of(samples, k)
    for s in samples:
        ratio = s.margin / s.mean_stderr
        if ratio < worst_ratio:
            worst_ratio, worst = ratio, s.margin
    return ConditionResult(
        "b_subharmonic",
        verdict != "fails",
        worst,
        f"{len(samples)} Euclidean balls inside the cube, verdict {verdict}",
    )


def _check_edge_decrease(f: Profile, n_slices: int, seed: int, width: float = 0.1) -> ConditionResult:
    d = f.d
    rng = make_rng(seed, 1 << 43)
    worst = math.inf
    for i in range(d):
        u = rng.uniform(0.0, math.pi, (n_slices, d))
        u[:, i] = math.pi - width * rng.random(n_slices) ** 2
        u[0, i] = math.pi - width
        edge = u.copy()
        edge[:, i] = math.pi
        inner = u[:, i] < math.pi
        diff = f(u[inner]) - f(edge[inner])
        worst = min(worst, float(np.min(diff)))
    return ConditionResult("c_edge_decrease", worst > 0, worst, f"{n_slices} slices per coordinate, width {width}")


def _check_certificate(f: Profile, n_points: int, seed: int) -> ConditionResult:
    cert = f.riesz_equivalence
    if not f.singular_at_zero:
        return ConditionResult("d_riesz_equivalence", True, math.inf, "finite at the origin, not applicable")
    if cert is None:
        raise InvalidInputError("singular profile without a Riesz-equivalence certificate")
    rng = make_rng(seed, 1 << 44)
    d = f.d
    dirs = np.abs(uniform_unit_vectors(rng, n_points, d))
    radii = cert.r * rng.random(n_points) ** (1.0 / d)
    radii = np.maximum(radii, 1e-12)
    y = dirs * radii[:, None]
    y = y[np.all(y <= math.pi, axis=1)]
    rho = np.linalg.norm(y, axis=1)
    ks = np.asarray(riesz_eval(cert.s, rho))
    fv = f(y)
    tol = 1e-12 * np.maximum(1.0, np.abs(fv))
    lower = fv - cert.c1 * ks
    upper = cert.c2 * ks - fv
    worst = float(min(np.min(lower + tol), np.min(upper + tol)))
    return ConditionResult(
        "d_riesz_equivalence",
        worst >= 0,
        worst,
        f"c1={cert.c1}, c2={cert.c2}, r={cert.r}, s={cert.s} on {len(y)} points",
    )


def check_profile_conditions(
    f: Profile, n_centers: int = 200, n: int = 4096, n_slices: int = 200, seed: int = 0, k: float = K_SIGMA
) -> ProfileConditionReport:
    """Spot-check the conditions under which a product profile kernel has ``sigma`` as minimizer.

    ``b``: Euclidean submean inequality on balls inside ``[0, pi]^d`` away from
    the origin.  ``c``: strict decrease toward ``pi`` in every coordinate.
    ``d``: the Riesz-equivalence certificate near the origin.  Continuity is
    assumed.
    """
    if f.singular_at_zero and f.riesz_equivalence is None:
        raise InvalidInputError("singular profile without a Riesz-equivalence certificate")
    conds = [
        _check_submean_on_cube(f, n_centers, n, seed, k),
        _check_edge_decrease(f, n_slices, seed),
        _check_certificate(f, 1000, seed),
    ]
    return ProfileConditionReport(f.to_dict(), conds)


# -- first maximum principle -------------------------------------------------


@dataclass
class MaxPrincipleReport:
    support_max: float
    off_support_max: float
    violation: float
    passed: bool
    tol: float
    probe_resolution: int
    near_radius: float
    argmax: list = field(default_factory=list)
    argmax_near_support: bool = True
    applicable: bool = True
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "support_max": self.support_max,
            "off_support_max": self.off_support_max,
            "violation": self.violation,
            "passed": self.passed,
            "tol": self.tol,
            "probe_resolution": self.probe_resolution,
            "near_radius": self.near_radius,
            "argmax": self.argmax,
            "argmax_near_support": self.argmax_near_support,
            "applicable": self.applicable,
            "notes": self.notes,
        }


def probe_grid(space: Space, n: int) -> tuple[np.ndarray, float]:
    """Probe points and mesh spacing: torus vertices ``k 2pi/n``; sphere lat-long midpoints."""
    if space.is_periodic:
        h = TWO_PI / n
        axes = [np.arange(n) * h] * space.dim
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=-1), h
    h = math.pi / n
    theta = (np.arange(n) + 0.5) * h
    phi = (np.arange(2 * n) + 0.5) * h
    T, P = np.meshgrid(theta, phi, indexing="ij")
    pts = np.stack([np.sin(T) * np.cos(P), np.sin(T) * np.sin(P), np.cos(T)], axis=-1).reshape(-1, 3)
    return pts, h


def max_principle_check(
    kernel: Kernel,
    mu,
    probe: int = 128,
    tol: float = 1e-6,
    policy: str | None = None,
) -> MaxPrincipleReport:
    """Compare the potential near ``supp mu`` with its values elsewhere on a probe grid.

    ``M`` is the maximum over probes within one mesh-cell diagonal of the
    support (``+inf`` when a probe sits on an atom of a singular kernel).
    The violation is ``max(0, off_support_max - M)``.
    """
    space = mu.space
    kernel.check_space(space)
    if not mu.is_unsigned:
        raise InvalidInputError("maximum principle check needs an unsigned measure")
    pts, h = probe_grid(space, probe)
    near_radius = h * math.sqrt(space.dim)
    supp = mu.support()
    if len(supp) == 0:
        raise InvalidInputError("measure has empty support")
    dmin = np.full(len(pts), np.inf)
    for start in range(0, len(supp), 256):
        block = supp[start : start + 256]
        dd = distance(space, pts[:, None, :], block[None, :, :])
        dmin = np.minimum(dmin, dd.min(axis=1))
    near = dmin <= near_radius * (1 + 1e-12)
    values = potential(kernel, mu, pts, policy=policy)
    values = np.asarray(values, dtype=float).reshape(-1)
    support_max = float(np.max(values[near])) if np.any(near) else -math.inf
    off_max = float(np.max(values[~near])) if np.any(~near) else -math.inf
    if math.isinf(support_max) and support_max > 0:
        violation = 0.0
    else:
        violation = max(0.0, off_max - support_max)
    top = int(np.argmax(values))
    notes = []
    if np.any(np.isposinf(values)):
        notes.append("potential is +inf at probes on atoms of the measure")
    return MaxPrincipleReport(
        support_max=support_max,
        off_support_max=off_max,
        violation=violation,
        passed=violation <= tol,
        tol=tol,
        probe_resolution=probe,
        near_radius=near_radius,
        argmax=pts[top].tolist(),
        argmax_near_support=bool(near[top]),
        notes=notes,
    )
