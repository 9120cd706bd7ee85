"""Symmetric kernels on the supported spaces.

Three families are provided:

* :class:`RieszKernel` -- ``sign(s) rho^-s`` (``-log rho`` for ``s = 0``) of the
  geodesic distance, on any space.
* :class:`ProductProfileKernel` -- ``f(d_1, ..., d_d)`` of the per-coordinate
  circle distances on a torus, for a :class:`Profile` ``f`` on ``[0, pi]^d``.
* :class:`RadialTableKernel` -- a tabulated function of the geodesic distance.

Every kernel carries an additive ``shift`` and an optional truncation level
``cap``; evaluation returns ``min(K + shift, cap)``.  Values may be ``+inf``
on the diagonal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from scipy.interpolate import RegularGridInterpolator

from .errors import InvalidInputError
from .geometry import Space, distance, wrapped_abs


def riesz_eval(s: float, rho):
    """Riesz profile ``sign(s) rho^-s`` (``-log rho`` when ``s == 0``).

    At ``rho == 0`` the value is ``+inf`` for ``s >= 0`` and ``0`` for ``s < 0``.
    Returns a float for scalar input, an array otherwise.
    """
    r = np.asarray(rho, dtype=float)
    with np.errstate(divide="ignore"):
        if s > 0:
            out = np.power(r, -s)
        elif s == 0:
            out = -np.log(r)
        else:
            out = -np.power(r, -s)
    if out.ndim == 0:
        return float(out)
    return out


def riesz_grad_factor(s: float, rho):
    """``g(rho)`` with ``d/dx K_s = g(rho) * w`` where ``w`` is the offset ``x - y``."""
    r = np.asarray(rho, dtype=float)
    if s == 0:
        return -np.power(r, -2.0)
    return -abs(s) * np.power(r, -s - 2.0)


def default_shift(s: float, space: Space) -> float:
    """Smallest nonnegative constant making ``K_s + shift >= 0`` on ``space``."""
    return max(0.0, -riesz_eval(s, space.diameter))


class Kernel:
    """Common interface.  Subclasses are frozen dataclasses."""

    family: str = "abstract"
    shift: float = 0.0
    cap: float | None = None

    def base_of_distance(self, rho):  # pragma: no cover - interface
        raise NotImplementedError

    def base_of_offsets(self, w):  # pragma: no cover - interface
        raise NotImplementedError

    def _finish(self, values):
        out = np.asarray(values, dtype=float) + self.shift
        if self.cap is not None:
            out = np.minimum(out, self.cap)
        return out

    def evaluate(self, space: Space, x, y) -> np.ndarray:
        """Kernel values for broadcast point arrays ``x`` and ``y``."""
        raise NotImplementedError  # pragma: no cover

    def on_offsets(self, w) -> np.ndarray:
        """Values at wrapped torus offsets ``w`` (coordinate axis last)."""
        return self._finish(self.base_of_offsets(np.asarray(w, dtype=float)))

    def supports(self, space: Space) -> bool:
        return True

    @property
    def singular(self) -> bool:
        """True when the kernel is ``+inf`` on the diagonal."""
        return False

    def diagonal_value(self, space: Space) -> float:
        zero = np.zeros(space.coord_len)
        if space.kind == "sphere2":
            zero = np.array([0.0, 0.0, 1.0])
        return float(self.evaluate(space, zero, zero))

    def check_space(self, space: Space) -> None:
        if not self.supports(space):
            raise InvalidInputError(f"{self.family} kernel is not defined on {space.tag}")

    def to_dict(self) -> dict:  # pragma: no cover - interface
        raise NotImplementedError


@dataclass(frozen=True)
class RieszKernel(Kernel):
    s: float
    shift: float = 0.0
    cap: float | None = None
    family: str = field(default="riesz", init=False, repr=False)

    def base_of_distance(self, rho):
        return riesz_eval(self.s, rho)

    def base_of_offsets(self, w):
        return riesz_eval(self.s, np.sqrt(np.sum(w * w, axis=-1)))

    def of_distance(self, rho):
        return self._finish(self.base_of_distance(rho))

    def evaluate(self, space, x, y):
        return self._finish(riesz_eval(self.s, distance(space, x, y)))

    @property
    def singular(self) -> bool:
        return self.s >= 0 and self.cap is None

    def to_dict(self) -> dict:
        out = {"family": "riesz", "s": self.s, "shift": self.shift}
        if self.cap is not None:
            out["cap"] = self.cap
        return out


@dataclass(frozen=True)
class RieszEquivalence:
    """Certificate ``c1 K_s(0, y) <= f(y) <= c2 K_s(0, y)`` for ``|y| < r``."""

    c1: float
    c2: float
    r: float
    s: float

    def to_dict(self) -> dict:
        return {"c1": self.c1, "c2": self.c2, "r": self.r, "s": self.s}


@dataclass(frozen=True, eq=False)
class Profile:
    """A function ``f: [0, pi]^d -> [0, inf]`` evaluated on arrays ``(..., d)``.

    Built-in profiles are created with :func:`named_profile` and tabulated
    ones with :func:`tabulated_profile`; both serialize through ``spec``.
    """

    func: Callable[[np.ndarray], np.ndarray]
    d: int
    singular_at_zero: bool = False
    riesz_equivalence: RieszEquivalence | None = None
    name: str = "custom"
    spec: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.d < 1:
            raise InvalidInputError("profile dimension must be >= 1")
        if self.singular_at_zero and self.riesz_equivalence is None:
            raise InvalidInputError("a profile singular at 0 needs a Riesz-equivalence certificate")

    def __call__(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        if u.shape[-1] != self.d:
            raise InvalidInputError(f"profile expects {self.d} coordinates, got {u.shape[-1]}")
        with np.errstate(divide="ignore"):
            return np.asarray(self.func(u), dtype=float)

    def to_dict(self) -> dict:
        out = dict(self.spec)
        out.setdefault("name", self.name)
        out["d"] = self.d
        if self.riesz_equivalence is not None:
            out["riesz_equivalence"] = self.riesz_equivalence.to_dict()
        return out


def _norm(u):
    return np.sqrt(np.sum(u * u, axis=-1))


def named_profile(name: str, d: int = 1, s: float | None = None) -> Profile:
    """Built-in profiles.

    ``linear``    ``sum_i (pi - u_i)``; for ``d = 1`` this is ``pi - u``.
    ``identity``  ``sum_i u_i``; increasing at ``pi``, violates the edge condition.
    ``riesz``     ``|u|^-s`` for ``0 < s``, singular at the origin.
    ``log``       ``log(pi sqrt(d) / |u|)``, singular at the origin.
    """
    if name == "linear":
        return Profile(lambda u: np.sum(math.pi - u, axis=-1), d, name=name, spec={"name": name})
    if name == "identity":
        return Profile(lambda u: np.sum(u, axis=-1), d, name=name, spec={"name": name})
    if name == "riesz":
        if s is None or s <= 0:
            raise InvalidInputError("riesz profile needs s > 0")
        cert = RieszEquivalence(1.0, 1.0, math.pi, float(s))
        return Profile(
            lambda u, _s=float(s): np.power(_norm(u), -_s),
            d,
            singular_at_zero=True,
            riesz_equivalence=cert,
            name=name,
            spec={"name": name, "s": float(s)},
        )
    if name == "log":
        diam = math.pi * math.sqrt(d)
        r = 0.5
        cert = RieszEquivalence(1.0, 1.0 + math.log(diam) / -math.log(r), r, 0.0)
        return Profile(
            lambda u, _c=math.log(diam): _c - np.log(_norm(u)),
            d,
            singular_at_zero=True,
            riesz_equivalence=cert,
            name=name,
            spec={"name": name},
        )
    raise InvalidInputError(f"unknown profile {name!r}")


def tabulated_profile(values, d: int | None = None) -> Profile:
    """Multilinear interpolant of ``values`` sampled on a uniform grid of ``[0, pi]^d``.

    ``values`` has shape ``(n,) * d`` with nodes ``linspace(0, pi, n)`` per axis.
    Tabulated profiles must be finite.
    """
    vals = np.asarray(values, dtype=float)
    d = vals.ndim if d is None else d
    if vals.ndim != d or min(vals.shape) < 2 or len(set(vals.shape)) != 1:
        raise InvalidInputError("table must be an (n,)*d array with n >= 2")
    if not np.all(np.isfinite(vals)):
        raise InvalidInputError("tabulated profiles must be finite")
    n = vals.shape[0]
    axes = [np.linspace(0.0, math.pi, n)] * d
    interp = RegularGridInterpolator(axes, vals, method="linear", bounds_error=False, fill_value=None)

    def func(u):
        u = np.clip(u, 0.0, math.pi)
        flat = u.reshape(-1, d)
        return interp(flat).reshape(u.shape[:-1])

    return Profile(func, d, name="table", spec={"table": {"values": vals.tolist(), "n": n}})


@dataclass(frozen=True)
class ProductProfileKernel(Kernel):
    """``K(x, y) = f(d(x_1, y_1), ..., d(x_d, y_d)) + shift`` on a torus."""

    profile: Profile
    shift: float = 0.0
    cap: float | None = None
    family: str = field(default="profile", init=False, repr=False)

    def supports(self, space: Space) -> bool:
        return space.is_periodic and space.dim == self.profile.d

    def base_of_offsets(self, w):
        return self.profile(np.abs(w))

    def evaluate(self, space, x, y):
        self.check_space(space)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if x.shape[-1] != space.dim or y.shape[-1] != space.dim:
            raise InvalidInputError("point dimension does not match the profile")
        return self._finish(self.profile(wrapped_abs(x, y)))

    @property
    def singular(self) -> bool:
        return self.profile.singular_at_zero and self.cap is None

    def to_dict(self) -> dict:
        out = {"family": "profile", "d": self.profile.d, "shift": self.shift}
        out.update(self.profile.to_dict())
        if self.cap is not None:
            out["cap"] = self.cap
        return out


@dataclass(frozen=True, eq=False)
class RadialTableKernel(Kernel):
    """Piecewise-linear function of the geodesic distance, from a table."""

    distances: tuple
    values: tuple
    shift: float = 0.0
    cap: float | None = None
    family: str = field(default="radial_table", init=False, repr=False)

    def __post_init__(self):
        dist = np.asarray(self.distances, dtype=float)
        if dist.ndim != 1 or dist.size < 2 or np.any(np.diff(dist) <= 0):
            raise InvalidInputError("distances must be strictly increasing")
        if len(self.values) != dist.size or not np.all(np.isfinite(self.values)):
            raise InvalidInputError("values must be finite and match distances")

    def base_of_distance(self, rho):
        return np.interp(rho, self.distances, self.values)

    def base_of_offsets(self, w):
        return self.base_of_distance(np.sqrt(np.sum(w * w, axis=-1)))

    def evaluate(self, space, x, y):
        return self._finish(self.base_of_distance(distance(space, x, y)))

    def to_dict(self) -> dict:
        out = {
            "family": "radial_table",
            "distances": list(self.distances),
            "values": list(self.values),
            "shift": self.shift,
        }
        if self.cap is not None:
            out["cap"] = self.cap
        return out


def kernel_eval(kernel: Kernel, space: Space, x, y):
    """``K(x, y)`` for single points or broadcast batches."""
    kernel.check_space(space)
    out = kernel.evaluate(space, x, y)
    if np.ndim(out) == 0:
        return float(out)
    return out


def truncate(kernel: Kernel, m: float) -> Kernel:
    """Kernel evaluating to ``min(K, m)``."""
    cap = m if kernel.cap is None else min(kernel.cap, m)
    return replace(kernel, cap=float(cap))


def with_shift(kernel: Kernel, shift: float) -> Kernel:
    return replace(kernel, shift=float(shift))


def riesz(s: float, space: Space | None = None, shift: float | str = 0.0) -> RieszKernel:
    """Riesz kernel; ``shift="auto"`` applies :func:`default_shift` on ``space``."""
    if shift == "auto":
        if space is None:
            raise InvalidInputError("automatic shift needs a space")
        shift = default_shift(s, space)
    return RieszKernel(float(s), float(shift))


def profile_from_dict(data: dict) -> Profile:
    d = int(data.get("d", 1))
    if "table" in data:
        table = data["table"]
        values = table["values"] if isinstance(table, dict) else table
        return tabulated_profile(values, d)
    name = data.get("name")
    if name is None:
        raise InvalidInputError("profile needs a 'name' or a 'table'")
    prof = named_profile(name, d, data.get("s"))
    cert = data.get("riesz_equivalence")
    if cert is not None:
        prof = Profile(prof.func, prof.d, prof.singular_at_zero, RieszEquivalence(**cert), prof.name, prof.spec)
    return prof


def kernel_from_dict(data: dict, space: Space | None = None) -> Kernel:
    """Inverse of ``Kernel.to_dict``; ``"shift": "auto"`` is resolved on ``space``."""
    if not isinstance(data, dict) or "family" not in data:
        raise InvalidInputError("kernel spec must be an object with a 'family' field")
    family = data["family"]
    shift = data.get("shift", 0.0)
    cap = data.get("cap")
    if family == "riesz":
        if "s" not in data:
            raise InvalidInputError("riesz kernel needs 's'")
        k: Kernel = riesz(float(data["s"]), space, shift)
    elif family == "profile":
        if shift == "auto":
            raise InvalidInputError("automatic shift is only defined for riesz kernels")
        k = ProductProfileKernel(profile_from_dict(data), float(shift))
    elif family == "radial_table":
        k = RadialTableKernel(tuple(data["distances"]), tuple(data["values"]), float(shift))
    else:
        raise InvalidInputError(f"unknown kernel family {family!r}")
    if cap is not None:
        k = truncate(k, float(cap))
    return k
