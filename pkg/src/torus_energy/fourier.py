"""Cosine Fourier coefficients of profiles and torus kernels.

For a profile ``f`` on ``[0, pi]^d`` the coefficient of the multi-index
``n`` is the unnormalized integral

    c_n(f) = int_{[0, pi]^d} f(u) prod_i cos(n_i u_i) du.

For a translation invariant kernel on the torus the harmonic coefficient is
the ``sigma``-integral

    a_n(K) = int K(x, y) prod_i cos(n_i (x_i - y_i)) dsigma(y),

independent of ``x``.  For ``K = f(|w_1|, ..., |w_d|) + shift`` the two are
related by ``a_n = c_n / pi^d + shift * [n == 0]``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import DivergedError, InvalidInputError
from .geometry import TWO_PI, Space, as_points, wrap
from .kernels import Kernel, Profile, ProductProfileKernel, RieszKernel
from .quadrature import box_corner_rule, box_rule, corner_rule, tensor, gauss_legendre

NONNEG_FLOOR = 1e-8
NORMALIZATION = "c_n = int_[0,pi]^d f(u) prod cos(n_i u_i) du (no normalization)"
HARMONIC_NORMALIZATION = "a_n = int K(x, y) prod cos(n_i (x_i - y_i)) dsigma(y), sigma a probability measure"


def _check_index(n, d: int) -> tuple:
    n = tuple(int(v) for v in np.atleast_1d(n))
    if len(n) != d:
        raise InvalidInputError(f"multi-index needs {d} entries, got {len(n)}")
    if any(v < 0 for v in n):
        raise InvalidInputError("multi-index entries must be nonnegative")
    return n


def _singular_order(f: Profile) -> float | None:
    if not f.singular_at_zero:
        return None
    cert = f.riesz_equivalence
    if cert is None:
        raise InvalidInputError("singular profile without a Riesz-equivalence certificate")
    if cert.s >= f.d:
        raise DivergedError(f"profile behaves like |u|^-{cert.s} at 0, not integrable in dimension {f.d}")
    return cert.s


def profile_rule(f: Profile, resolution: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on ``[0, pi]^d`` suited to ``f``.

    Finite profiles use a tensor Gauss-Legendre rule with ``resolution``
    nodes per dimension.  Singular profiles use the Duffy corner rule with
    geometric grading toward the origin.
    """
    if resolution < 2:
        raise InvalidInputError("resolution must be at least 2")
    if _singular_order(f) is None:
        return box_rule(f.d, 0.0, math.pi, resolution)
    return corner_rule(f.d, math.pi, resolution)


def _coefficients(f: Profile, indices: list, resolution: int) -> np.ndarray:
    nodes, weights = profile_rule(f, resolution)
    fw = weights * f(nodes)
    if not np.all(np.isfinite(fw)):
        raise DivergedError("profile is not finite at the quadrature nodes")
    out = np.empty(len(indices))
    for k, n in enumerate(indices):
        basis = np.prod(np.cos(nodes * np.asarray(n, dtype=float)), axis=1)
        out[k] = math.fsum(fw * basis)
    return out


def cosine_coefficient(f: Profile, n, resolution: int = 64) -> float:
    """``int_{[0, pi]^d} f(u) prod cos(n_i u_i) du`` by quadrature."""
    n = _check_index(n, f.d)
    return float(_coefficients(f, [n], resolution)[0])


@dataclass
class FourierReport:
    multi_indices: list
    coefficients: list
    quadrature_resolution: int
    min_coefficient: float
    tol: float
    nonnegative_verdict: bool
    resolution_delta: float
    normalization: str = NORMALIZATION
    profile: dict = field(default_factory=dict)
    conditions_passed: bool | None = None
    warnings: list = field(default_factory=list)

    def coefficient(self, n) -> float:
        return self.coefficients[self.multi_indices.index(tuple(int(v) for v in n))]

    def to_dict(self) -> dict:
        return {
            "profile": self.profile,
            "normalization": self.normalization,
            "quadrature_resolution": self.quadrature_resolution,
            "resolution_delta": self.resolution_delta,
            "tol": self.tol,
            "min_coefficient": self.min_coefficient,
            "nonnegative_verdict": self.nonnegative_verdict,
            "conditions_passed": self.conditions_passed,
            "warnings": self.warnings,
            "multi_indices": [list(n) for n in self.multi_indices],
            "coefficients": self.coefficients,
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        d = len(self.multi_indices[0]) if self.multi_indices else 1
        out.writerow([f"n{i + 1}" for i in range(d)] + ["value"])
        for n, c in zip(self.multi_indices, self.coefficients):
            out.writerow(list(n) + [repr(c)])
        return buf.getvalue()


def nonnegativity_scan(
    f: Profile,
    n_max: int,
    resolution: int = 64,
    check_conditions: bool = True,
    seed: int = 0,
) -> FourierReport:
    """All coefficients with ``max_i n_i <= n_max`` and a nonnegativity verdict.

    The coefficients are computed at ``resolution`` and ``2 * resolution``;
    the finer values are reported and ``tol = max(1e-8, 10 * delta)`` where
    ``delta`` is the largest change.  Profile conditions are checked first
    unless ``check_conditions`` is false; a failed check is recorded as a
    warning and the scan still runs.  Coefficients are evidence only; they
    do not by themselves establish positive definiteness.
    """
    if n_max < 0:
        raise InvalidInputError("n_max must be nonnegative")
    _singular_order(f)
    warnings = []
    passed = None
    if check_conditions:
        from .subharmonic import check_profile_conditions

        rep = check_profile_conditions(f, seed=seed)
        passed = rep.passed
        if not passed:
            failed = [c.name for c in rep.conditions if not c.passed]
            warnings.append(f"profile conditions not satisfied: {', '.join(failed)}")
    else:
        warnings.append("profile conditions were not checked")
    indices = list(product(range(n_max + 1), repeat=f.d))
    coarse = _coefficients(f, indices, resolution)
    fine = _coefficients(f, indices, 2 * resolution)
    delta = float(np.max(np.abs(fine - coarse)))
    tol = max(NONNEG_FLOOR, 10.0 * delta)
    low = float(np.min(fine))
    return FourierReport(
        multi_indices=indices,
        coefficients=fine.tolist(),
        quadrature_resolution=2 * resolution,
        min_coefficient=low,
        tol=tol,
        nonnegative_verdict=low >= -tol,
        resolution_delta=delta,
        profile=f.to_dict(),
        conditions_passed=passed,
        warnings=warnings,
    )


def _kernel_is_singular(kernel: Kernel, d: int) -> bool:
    if isinstance(kernel, RieszKernel) and kernel.cap is None and kernel.s >= d:
        raise DivergedError(f"Riesz kernel with s={kernel.s} is not integrable on a {d}-torus")
    if isinstance(kernel, ProductProfileKernel) and kernel.cap is None:
        _singular_order(kernel.profile)
    return kernel.singular


def _orthant_rules(d: int, resolution: int, singular: bool):
    """Rules on the ``2^d`` boxes ``prod [0, +-pi]`` around the offset origin."""
    if singular:
        base = box_corner_rule([math.pi] * d, resolution)
    else:
        base = tensor([gauss_legendre(resolution, 0.0, math.pi)] * d)
    nodes, weights = base
    for signs in product((1.0, -1.0), repeat=d):
        yield nodes * np.asarray(signs), weights


def kernel_harmonic_coefficient(
    kernel: Kernel, space: Space, n, resolution: int = 64, x=None
) -> float:
    """``a_n = int K(x, y) prod cos(n_i (x_i - y_i)) dsigma(y)`` on the torus.

    The integral runs over real points ``y = x + v`` with ``v`` in the
    ``2^d`` boxes ``prod [0, +-pi]``; the box corner at ``x`` carries the
    singularity and uses the graded corner rule.  Kernel values come from
    :func:`kernel_eval` at the points, so this route does not use the
    profile or any folding of the integrand.  Nodes within ``1e-6`` of
    ``x`` are evaluated from their exact offset, which ``x + v`` would lose
    to rounding.
    """
    if not space.is_periodic:
        raise InvalidInputError("harmonic coefficients are implemented on the torus")
    kernel.check_space(space)
    d = space.dim
    n = np.asarray(_check_index(n, d), dtype=float)
    x = np.zeros(d) if x is None else as_points(space, x)
    singular = _kernel_is_singular(kernel, d)
    total = []
    for v, w in _orthant_rules(d, resolution, singular):
        y = wrap(x + v)
        with np.errstate(divide="ignore"):
            kv = kernel.evaluate(space, x, y)
            # nodes this close to x lose their offset when y is rounded
            near = np.linalg.norm(v, axis=-1) < 1e-6
            kv[near] = kernel.on_offsets(v[near])
        basis = np.prod(np.cos(n * (x - y)), axis=-1)
        total.append(w * kv * basis)
    return math.fsum(np.concatenate(total)) / TWO_PI**d


def harmonic_coefficients(kernel: Kernel, space: Space, n_max: int, resolution: int = 64) -> dict:
    """``{n: a_n}`` for all multi-indices with ``max_i n_i <= n_max``."""
    return {
        n: kernel_harmonic_coefficient(kernel, space, n, resolution)
        for n in product(range(n_max + 1), repeat=space.dim)
    }


def parseval_energy(kernel: Kernel, space: Space, cosine_coeffs: dict, resolution: int = 64) -> float:
    """Energy of the density ``g = sum_n c_n prod cos(n_i y_i)`` from the harmonic coefficients.

    With ``a_n`` as above, ``I(g sigma) = sum_n a_n c_n^2 / 2^{|supp n|}``
    where ``|supp n|`` counts the nonzero entries of ``n``: each cosine
    splits into two exponentials of weight one half.  For ``d = 1`` and
    ``n >= 1`` this is ``a_n c_n^2 / 2``.
    """
    total = []
    for n, c in cosine_coeffs.items():
        n = _check_index(n, space.dim)
        a = kernel_harmonic_coefficient(kernel, space, n, resolution)
        total.append(a * c * c / 2.0 ** sum(1 for v in n if v))
    return math.fsum(total)
