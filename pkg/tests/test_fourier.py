import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from torus_energy.energy import energy_signed, potential
from torus_energy.errors import DivergedError, InvalidInputError
from torus_energy.fourier import (
    cosine_coefficient,
    harmonic_coefficients,
    kernel_harmonic_coefficient,
    nonnegativity_scan,
    parseval_energy,
)
from torus_energy.geometry import Space
from torus_energy.kernels import ProductProfileKernel, RieszKernel, named_profile, tabulated_profile
from torus_energy.measures import grid_from_function, uniform_measure

T1, T2 = Space.torus(1), Space.torus(2)


def closed_form_linear(n):
    return math.pi**2 / 2 if n == 0 else (1 - math.cos(n * math.pi)) / n**2


def test_linear_profile_examples():
    f = named_profile("linear", 1)
    assert cosine_coefficient(f, [1]) == pytest.approx(2.0, abs=1e-12)
    assert cosine_coefficient(f, [2]) == pytest.approx(0.0, abs=1e-12)
    assert cosine_coefficient(f, [0]) == pytest.approx(math.pi**2 / 2, abs=1e-12)


def test_identity_profile_negative():
    rep = nonnegativity_scan(named_profile("identity", 1), 4)
    assert rep.coefficient([1]) == pytest.approx(-2.0, abs=1e-8)
    assert not rep.nonnegative_verdict
    assert any("c_edge_decrease" in w for w in rep.warnings)


def test_linear_scan_nonnegative():
    rep = nonnegativity_scan(named_profile("linear", 1), 16)
    assert rep.nonnegative_verdict
    for n in range(17):
        assert rep.coefficient([n]) == pytest.approx(closed_form_linear(n), abs=1e-10)


def test_riesz_profile_against_scipy_oracle():
    f = named_profile("riesz", 2, 1.0)

    def oracle(n1, n2):
        # polar coordinates remove the singularity: r^-1 * r dr dphi
        def inner(r, phi):
            return math.cos(n1 * r * math.cos(phi)) * math.cos(n2 * r * math.sin(phi))

        def rmax(phi):
            return math.pi / max(math.cos(phi), math.sin(phi))

        return integrate.dblquad(inner, 0, math.pi / 2, 0, rmax, epsabs=1e-10, epsrel=1e-10)[0]

    for n in ((0, 0), (1, 0), (2, 3)):
        assert cosine_coefficient(f, n, resolution=64) == pytest.approx(oracle(*n), abs=1e-7)


def test_divergent_profile():
    with pytest.raises(DivergedError):
        cosine_coefficient(named_profile("riesz", 1, 1.0), [0])
    with pytest.raises(InvalidInputError):
        cosine_coefficient(named_profile("linear", 1), [-1])
    with pytest.raises(InvalidInputError):
        cosine_coefficient(named_profile("linear", 2), [1])


def test_report_shapes():
    rep = nonnegativity_scan(named_profile("linear", 2), 3, resolution=16, check_conditions=False)
    assert len(rep.multi_indices) == 16
    assert len(rep.to_csv().splitlines()) == 17
    assert rep.tol >= 1e-8
    assert "not checked" in rep.warnings[0]


def test_quadrature_convergence_within_tol():
    f = named_profile("riesz", 2, 1.0)
    a = nonnegativity_scan(f, 4, resolution=32, check_conditions=False)
    b = nonnegativity_scan(f, 4, resolution=64, check_conditions=False)
    assert np.max(np.abs(np.subtract(a.coefficients, b.coefficients))) <= a.tol


def test_harmonic_matches_profile_route():
    f = named_profile("linear", 1)
    k = ProductProfileKernel(f, shift=0.3)
    for n in range(6):
        a = kernel_harmonic_coefficient(k, T1, [n], resolution=64)
        expect = cosine_coefficient(f, [n]) / math.pi + (0.3 if n == 0 else 0.0)
        assert a == pytest.approx(expect, abs=1e-12)


def test_harmonic_zero_mode_is_potential_of_sigma():
    k = RieszKernel(0.0)
    a0 = kernel_harmonic_coefficient(k, T1, [0], resolution=64)
    assert a0 == pytest.approx(1 - math.log(math.pi), abs=1e-10)
    u = potential(k, uniform_measure(T1, 4096), [1.234])
    assert a0 == pytest.approx(u, abs=1e-4)


def test_harmonic_independent_of_x():
    k = RieszKernel(1.0)
    a = kernel_harmonic_coefficient(k, T2, [1, 0], x=[0.0, 0.0])
    b = kernel_harmonic_coefficient(k, T2, [1, 0], x=[2.0, 5.0])
    assert a == pytest.approx(b, rel=1e-10)
    assert a >= -1e-6


def test_harmonic_riesz_diverges():
    with pytest.raises(DivergedError):
        kernel_harmonic_coefficient(RieszKernel(2.0), T2, [0, 0])


def test_parseval_against_energy():
    k = RieszKernel(-1.0, shift=math.pi)
    coeffs = {(1,): 0.7, (2,): -0.4, (3,): 0.25}

    def g(x):
        return sum(c * np.cos(n[0] * x[:, 0]) for n, c in coeffs.items())

    e = energy_signed(k, grid_from_function(T1, 4096, g)).value
    assert parseval_energy(k, T1, coeffs) == pytest.approx(e, abs=1e-6)


def test_harmonic_coefficients_table():
    table = harmonic_coefficients(RieszKernel(1.0), T2, 2, resolution=24)
    assert len(table) == 9
    assert table[(1, 2)] == pytest.approx(table[(2, 1)], rel=1e-10)


@given(st.lists(st.floats(0.0, 5.0), min_size=3, max_size=9), st.integers(0, 6))
def test_reflection_evenness(vals, n):
    # reversing a tabulation u -> pi - u multiplies the n-th coefficient by (-1)^n
    f = tabulated_profile(vals)
    g = tabulated_profile(vals[::-1])
    a = cosine_coefficient(f, [n], resolution=48)
    b = cosine_coefficient(g, [n], resolution=48)
    # piecewise-linear tables are integrated up to the kink error of Gauss rules
    assert b == pytest.approx((-1) ** n * a, abs=1e-2 * (1 + max(vals)))
