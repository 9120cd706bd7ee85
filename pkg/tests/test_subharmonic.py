import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from torus_energy.errors import InvalidInputError, PreconditionError
from torus_energy.geometry import Space, cap_points, make_rng, uniform_points, wrap
from torus_energy.kernels import ProductProfileKernel, RieszKernel, named_profile, tabulated_profile
from torus_energy.measures import DiscreteMeasure, GridMeasure
from torus_energy.subharmonic import (
    SubmeanSample,
    check_profile_conditions,
    function_submean_check,
    max_principle_check,
    potential_submean_check,
    scan_entire_subharmonicity,
    signed_permutations,
    sphere_cap_mean,
    submean_check,
    verdict_of,
)

T1, T2, T3, S2 = Space.torus(1), Space.torus(2), Space.torus(3), Space.sphere2()


def test_signed_permutations_group():
    for d in (1, 2, 3):
        g = signed_permutations(d)
        assert len(g) == 2**d * math.factorial(d)
        assert np.allclose(np.einsum("kij,kil->kjl", g, g), np.eye(d))


def test_affine_profile_margin_zero():
    k = ProductProfileKernel(named_profile("linear", 1))
    s = submean_check(k, T1, [0.0], [1.5], 0.3, n=4000)
    assert abs(s.margin) <= 4 * s.mean_stderr + 1e-14


def test_log_kernel_t2_random_balls():
    k = RieszKernel(0.0)
    gen = make_rng(21)
    for i in range(10):
        x, y = uniform_points(T2, 2, gen)
        D = float(np.linalg.norm(wrap(x - y + math.pi) - math.pi))
        r = min(0.49, 0.8 * D)
        s = submean_check(k, T2, y, x, r, n=4000, seed=1, stream=i)
        assert s.margin >= -4 * s.mean_stderr


def test_sphere_counterexample():
    k = RieszKernel(-1.0)
    y = np.array([0.0, 0.0, 1.0])
    x = cap_points(y, np.array(math.pi / 4), np.array(0.3))
    s = submean_check(k, S2, y, x, 0.1, n=20000, seed=2)
    assert s.margin < -4 * s.mean_stderr
    t = submean_check(k, S2, y, x, 0.1, quadrature="tensor", n=64)
    assert t.margin < 0
    assert abs(t.margin - s.margin) <= 4 * s.mean_stderr


@pytest.mark.parametrize("D,r", [(math.pi / 4, 0.1), (1.0, 0.5), (2.5, 0.6)])
def test_sphere_cap_mean_against_dblquad(D, r):
    # oracle: integrate in geodesic polar coordinates centered at x
    from scipy import integrate

    y = np.array([0.0, 0.0, 1.0])
    x = cap_points(y, np.array(D), np.array(0.0))

    def f(phi, t):
        p = cap_points(x, np.array(t), np.array(phi))
        return -math.acos(max(-1.0, min(1.0, float(p @ y)))) * math.sin(t)

    val = integrate.dblquad(f, 0.0, r, 0.0, 2 * math.pi, epsabs=1e-12, epsrel=1e-12)[0]
    oracle = val / (2 * math.pi * (1 - math.cos(r)))
    assert sphere_cap_mean(RieszKernel(-1.0), D, r, 64) == pytest.approx(oracle, abs=1e-9)


def test_precondition_ball_meets_singularity():
    with pytest.raises(PreconditionError):
        submean_check(RieszKernel(1.0), T2, [0.0, 0.0], [0.1, 0.0], 0.2)


def test_mc_and_tensor_agree_torus():
    gen = make_rng(22)
    for i, (space, s) in enumerate([(T1, 0.5), (T2, 1.0), (T2, 0.0), (T3, 1.0)] * 5):
        x, y = uniform_points(space, 2, gen)
        D = float(np.linalg.norm(wrap(x - y + math.pi) - math.pi))
        r = min(0.45, 0.7 * D)
        if r < 1e-2:
            continue
        k = RieszKernel(s)
        a = submean_check(k, space, y, x, r, n=4000, seed=3, stream=i)
        b = submean_check(k, space, y, x, r, quadrature="tensor", n=16 if space.dim == 3 else 48)
        assert abs(a.mean_estimate - b.mean_estimate) <= 4 * a.mean_stderr + 4 * b.mean_stderr + 1e-10


def test_monotone_evidence_strict_case():
    k = RieszKernel(1.0)
    y, x = np.array([1.0, 1.0]), np.array([1.8, 1.3])
    for n in (2000, 4000, 8000):
        s = submean_check(k, T2, y, x, 0.3, n=n, seed=4)
        assert s.margin > 4 * s.mean_stderr


def test_verdict_rules():
    def sample(m, e):
        return SubmeanSample(np.zeros(1), np.zeros(1), 0.1, m, e, 0.0, m)

    assert verdict_of([sample(1.0, 0.1), sample(0.5, 0.1)]) == "strictly_passes"
    assert verdict_of([sample(1.0, 0.1), sample(-0.3, 0.1)]) == "passes"
    assert verdict_of([sample(1.0, 0.1), sample(-0.5, 0.1)]) == "fails"


def test_scans_small():
    rep = scan_entire_subharmonicity(RieszKernel(1.0), T2, n_pairs=20, n=2000, seed=5)
    assert rep.verdict == "strictly_passes"
    rep0 = scan_entire_subharmonicity(RieszKernel(0.0), T2, n_pairs=20, n=2000, seed=5)
    assert rep0.verdict in ("passes", "strictly_passes")
    bad = scan_entire_subharmonicity(RieszKernel(-1.0), S2, n_pairs=5, n=4000, seed=5, distances=[math.pi / 4])
    assert bad.verdict == "fails"
    w = bad.witness
    assert w.confirmed and abs(w.distance - math.pi / 4) < 1e-9
    assert w.margin < -4 * w.mean_stderr
    assert len(rep.samples_csv().splitlines()) == len(rep.samples) + 1


def test_scan_deterministic_and_thread_independent():
    a = scan_entire_subharmonicity(RieszKernel(1.0), T2, n_pairs=6, n=1000, seed=9, threads=1)
    b = scan_entire_subharmonicity(RieszKernel(1.0), T2, n_pairs=6, n=1000, seed=9, threads=4)
    assert a.to_dict() == b.to_dict()


def test_scan_rejects_large_R():
    with pytest.raises(InvalidInputError):
        scan_entire_subharmonicity(RieszKernel(1.0), T2, R=0.8, n_pairs=2)


def test_profile_conditions_examples():
    assert check_profile_conditions(named_profile("linear", 1)).passed
    rep = check_profile_conditions(named_profile("riesz", 2, 1.0), n_centers=60, n=2048)
    assert rep.passed
    bad = check_profile_conditions(named_profile("identity", 1))
    assert not bad.condition("c_edge_decrease").passed
    assert bad.condition("b_subharmonic").passed


def test_profile_conditions_tabulated_concave_fails_b():
    # a strictly concave table is superharmonic
    u = np.linspace(0, math.pi, 65)
    f = tabulated_profile(10.0 - u**2)
    rep = check_profile_conditions(f, n_centers=100, n=2048)
    assert not rep.condition("b_subharmonic").passed


def test_max_principle_point_mass():
    mu = DiscreteMeasure.dirac(T2, [1.0, 2.0])
    rep = max_principle_check(RieszKernel(1.0), mu, probe=32)
    assert rep.passed
    assert rep.argmax_near_support


def test_max_principle_slice():
    ys = (np.arange(64) + 0.5) * 2 * math.pi / 64
    mu = DiscreteMeasure(T2, np.stack([np.zeros(64) + 0.01, ys], axis=1), np.full(64, 1 / 64))
    rep = max_principle_check(RieszKernel(0.0), mu, probe=128)
    assert rep.passed and rep.argmax_near_support


def test_max_principle_sphere_control_runs():
    y = np.array([0.0, 0.0, 1.0])
    gen = make_rng(6)
    t = np.arccos(1 - (1 - math.cos(0.5)) * gen.random(40))
    pts = np.array([cap_points(y, np.array(a), np.array(b)) for a, b in zip(t, 2 * math.pi * gen.random(40))])
    rep = max_principle_check(RieszKernel(-1.0, shift=math.pi), DiscreteMeasure(S2, pts, np.full(40, 1 / 40)), probe=24)
    assert rep.violation >= 0.0  # recorded, no pass asserted


def test_max_principle_rejects_signed():
    mu = GridMeasure(T2, np.array([[1.0, -1.0], [0.0, 0.0]]))
    with pytest.raises(InvalidInputError):
        max_principle_check(RieszKernel(1.0), mu)


def test_potential_subharmonic_off_support():
    gen = make_rng(7)
    mu = DiscreteMeasure(T2, 0.5 * gen.random((10, 2)), gen.random(10))
    for i, x in enumerate(([3.0, 3.0], [4.0, 1.5], [2.0, 5.0])):
        s = potential_submean_check(RieszKernel(1.0), mu, x, 0.4, n=2048, stream=i)
        assert s.margin >= -4 * s.mean_stderr
    with pytest.raises(PreconditionError):
        potential_submean_check(RieszKernel(1.0), mu, [0.3, 0.3], 0.4)


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0), st.floats(0.01, 0.9))
def test_euclidean_harmonic_function_has_zero_margin(a, b, r):
    # u = a x1 + b (x1^2 - x2^2) is harmonic in R^2
    def u(p):
        return a * p[:, 0] + b * (p[:, 0] ** 2 - p[:, 1] ** 2)

    s = function_submean_check(None, u, [0.3, -0.2], r, n=512)
    assert abs(s.margin) <= 4 * s.mean_stderr + 1e-12
