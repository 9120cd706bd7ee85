"""Tensor Gauss-Legendre rules, geometric grading and a Duffy corner rule.

The corner rule integrates functions on ``[0, a]^d`` with an integrable point
singularity at the origin.  The cube is split into ``d`` pyramids
``{u_k = max_j u_j}``; on pyramid ``k`` the substitution ``u_k = t``,
``u_j = t v_j`` has Jacobian ``t^(d-1)`` and turns ``|u|^-s`` into
``t^-s`` times a smooth function of ``v``.  The remaining radial factor is
handled by geometric grading of ``t`` toward zero.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product

import numpy as np

GRADING_LEVELS = 12
GRADING_RATIO = 0.5
INNER_POWER = 16


@lru_cache(maxsize=64)
def _leggauss(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre(m: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = _leggauss(m)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * w


def composite_gauss(edges, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre with ``m`` nodes on each panel ``[edges[i], edges[i+1]]``."""
    nodes, weights = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = gauss_legendre(m, a, b)
        nodes.append(x)
        weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def graded_edges(a: float, levels: int = GRADING_LEVELS, ratio: float = GRADING_RATIO) -> np.ndarray:
    """Panel edges ``0, a r^levels, ..., a r, a`` refined geometrically toward 0."""
    return np.concatenate([[0.0], a * ratio ** np.arange(levels, -1, -1)])


def graded_gauss(a: float, m: int, levels: int = GRADING_LEVELS) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss on :func:`graded_edges` for integrands singular at 0.

    The innermost panel ``[0, e]`` uses ``t = e tau^q`` with ``q = 16``, which
    multiplies the integrand by ``tau^(q-1)`` and tames ``log t`` and
    ``t^-s`` factors there.
    """
    edges = graded_edges(a, levels)
    t, wt = composite_gauss(edges[1:], m)
    tau, wtau = gauss_legendre(m, 0.0, 1.0)
    e, q = edges[1], INNER_POWER
    inner_t = e * tau**q
    inner_w = e * q * tau ** (q - 1) * wtau
    return np.concatenate([inner_t, t]), np.concatenate([inner_w, wt])


def tensor(rules) -> tuple[np.ndarray, np.ndarray]:
    """Tensor product of 1D rules ``[(nodes, weights), ...]``."""
    grids = np.meshgrid(*[r[0] for r in rules], indexing="ij")
    wgrids = np.meshgrid(*[r[1] for r in rules], indexing="ij")
    nodes = np.stack([g.ravel() for g in grids], axis=-1)
    weights = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
    return nodes, weights


def box_rule(d: int, a: float, b: float, m: int) -> tuple[np.ndarray, np.ndarray]:
    return tensor([gauss_legendre(m, a, b)] * d)


def corner_rule(d: int, a: float, m: int, levels: int = GRADING_LEVELS) -> tuple[np.ndarray, np.ndarray]:
    """Rule on ``[0, a]^d`` for integrands singular at the origin (see module doc)."""
    t, wt = graded_gauss(a, m, levels)
    if d == 1:
        return t[:, None], wt
    v, wv = box_rule(d - 1, 0.0, 1.0, m)
    tt = np.repeat(t, len(v))
    jac = np.repeat(wt * t ** (d - 1), len(v)) * np.tile(wv, len(t))
    vv = np.tile(v, (len(t), 1))
    blocks = []
    for k in range(d):
        u = np.empty((len(tt), d))
        u[:, k] = tt
        others = [j for j in range(d) if j != k]
        u[:, others] = vv * tt[:, None]
        blocks.append(u)
    return np.concatenate(blocks), np.tile(jac, d)


def orthant_signs(d: int) -> np.ndarray:
    return np.array(list(product((1.0, -1.0), repeat=d)))


def box_corner_rule(lengths, m: int, levels: int = GRADING_LEVELS) -> tuple[np.ndarray, np.ndarray]:
    """Corner rule on the box ``prod [0, L_i]`` (singularity at the origin corner)."""
    lengths = np.asarray(lengths, dtype=float)
    nodes, weights = corner_rule(len(lengths), 1.0, m, levels)
    return nodes * lengths, weights * float(np.prod(lengths))
