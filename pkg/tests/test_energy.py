import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from torus_energy.energy import (
    capacity_estimate,
    energy,
    energy_discrete,
    energy_grid,
    energy_signed,
    g_ratio,
    mutual_energy,
    potential,
)
from torus_energy.errors import InvalidInputError, OutOfRangeError, UndefinedEnergyError, UndefinedRatioError
from torus_energy.geometry import Space, make_rng, uniform_points
from torus_energy.kernels import ProductProfileKernel, RieszKernel, named_profile, riesz
from torus_energy.measures import DiscreteMeasure, GridMeasure, grid_from_function, uniform_measure

T1, T2, T3 = Space.torus(1), Space.torus(2), Space.torus(3)

# independent oracle: (1/pi) int_0^pi -log t dt
LOG_ORACLE = integrate.quad(lambda t: -math.log(t), 0.0, math.pi)[0] / math.pi


def test_log_oracle_value():
    assert LOG_ORACLE == pytest.approx(1 - math.log(math.pi), abs=1e-12)


def test_potential_single_atom():
    k = RieszKernel(1.0)
    y = np.array([1.0, 2.0])
    x = np.array([4.0, 0.5])
    assert potential(k, DiscreteMeasure.dirac(T2, y), x) == k.evaluate(T2, x, y)


def test_potential_uniform_log_kernel():
    mu = uniform_measure(T1, 4096)
    h = 2 * math.pi / 4096
    xs = np.array([[0.0], [h / 2], [1.0], [math.pi], [2.5 + h / 3], [6.0]])
    u = potential(RieszKernel(0.0), mu, xs)
    assert np.all(np.abs(u - LOG_ORACLE) <= 1e-4)


def test_potential_antipodal_pair():
    z = np.array([0.7, 1.1])
    mu = DiscreteMeasure(T2, [z, z + math.pi], [0.5, 0.5])
    assert potential(RieszKernel(-2.0), mu, z) == pytest.approx(-math.pi**2, abs=1e-12)


def test_potential_atom_at_probe_is_infinite():
    mu = DiscreteMeasure(T2, [[1.0, 1.0], [2.0, 2.0]], [0.5, 0.5])
    assert potential(RieszKernel(1.0), mu, [1.0, 1.0]) == math.inf
    signed = DiscreteMeasure(T2, [[1.0, 1.0], [2.0, 2.0]], [0.5, -0.5])
    assert potential(RieszKernel(1.0), signed, [2.0, 2.0]) == -math.inf


def test_energy_discrete_examples():
    z = np.array([0.3, 0.2])
    mu = DiscreteMeasure(T2, [z, z + math.pi], [0.5, 0.5])
    assert energy_discrete(RieszKernel(-2.0), mu).value == pytest.approx(-math.pi**2, abs=1e-12)
    nu = DiscreteMeasure(T1, [[0.0], [math.pi]], [0.5, 0.5])
    e = energy_discrete(RieszKernel(0.0), nu, include_diagonal=False).value
    assert e == pytest.approx(-0.5 * math.log(math.pi), abs=1e-14)
    assert e == pytest.approx(-0.57236, abs=1e-5)
    assert energy_discrete(RieszKernel(1.0), DiscreteMeasure(T1, np.zeros((0, 1)), [])).value == 0.0
    rep = energy_discrete(RieszKernel(1.0), nu)
    assert rep.infinite and rep.to_dict()["value"] is None


def test_energy_discrete_signed_atoms_infinite():
    # diagonal terms w_i^2 K(x_i, x_i) are all +inf, so the sum is +inf
    mu = DiscreteMeasure(T1, [[0.0], [1.0]], [1.0, -1.0])
    assert energy_discrete(RieszKernel(1.0), mu).value == math.inf


def test_energy_grid_log_t1():
    rep = energy_grid(RieszKernel(0.0), uniform_measure(T1, 4096), "analytic_cell")
    assert rep.value == pytest.approx(LOG_ORACLE, abs=5e-4)


def test_energy_grid_richardson_t2():
    k = RieszKernel(1.0)
    a = energy_grid(k, uniform_measure(T2, 64)).value
    b = energy_grid(k, uniform_measure(T2, 128)).value
    assert abs(a - b) <= 1e-2 * abs(b)


def test_energy_grid_diverges():
    rep = energy_grid(RieszKernel(2.0), uniform_measure(T2, 8))
    assert rep.infinite and rep.diverged


def test_policies():
    mu = uniform_measure(T2, 32)
    k = RieszKernel(1.0)
    ex = energy_grid(k, mu, "exclude").value
    an = energy_grid(k, mu, "analytic_cell").value
    # a cap below 1/h lowers every cell value, the self cell included
    cap = energy_grid(k, mu, "cap_m", cap=5.0).value
    assert ex < an
    assert cap <= an + 1e-12
    with pytest.raises(InvalidInputError):
        energy_grid(k, mu, "cap_m")
    with pytest.raises(InvalidInputError):
        energy_grid(k, mu, "bogus")


def test_uniform_minimal_against_perturbation():
    k = RieszKernel(1.0)
    e0 = energy_grid(k, uniform_measure(T2, 64)).value
    g = grid_from_function(T2, 64, lambda x: 1 + 0.3 * np.cos(x[:, 0]) * np.sin(2 * x[:, 1]))
    assert e0 <= energy_grid(k, g).value


def test_mutual_energy_examples():
    k = RieszKernel(1.0)
    x, y = np.array([0.1, 0.2]), np.array([3.0, 4.0])
    assert mutual_energy(k, DiscreteMeasure.dirac(T2, x), DiscreteMeasure.dirac(T2, y)) == k.evaluate(T2, x, y)
    gen = make_rng(8)
    mu = GridMeasure(T2, 1 + 0.5 * gen.random((16, 16)))
    nu = GridMeasure(T2, gen.random((16, 16)))
    assert mutual_energy(k, mu, mu) == pytest.approx(energy(k, mu).value, rel=1e-13)
    assert mutual_energy(k, mu, nu) == pytest.approx(mutual_energy(k, nu, mu), rel=1e-13)
    a = 2.7
    assert mutual_energy(k, mu.scaled(a), nu) == pytest.approx(a * mutual_energy(k, mu, nu), rel=1e-13)


def test_mutual_grid_discrete_mixed():
    k = RieszKernel(0.0)
    mu = uniform_measure(T1, 2048)
    d = DiscreteMeasure(T1, [[1.0], [2.5]], [0.25, 0.75])
    assert mutual_energy(k, mu, d) == pytest.approx(LOG_ORACLE, abs=2e-4)


def test_energy_signed_examples():
    k = RieszKernel(1.0)
    gen = make_rng(9)
    mu = GridMeasure(T2, gen.random((16, 16)))
    assert energy_signed(k, mu).value == pytest.approx(energy(k, mu).value, rel=1e-12)
    x = [1.0, 1.0]
    cancel = DiscreteMeasure(T2, [x, x], [1.0, -1.0])
    assert energy_signed(k, cancel).value == 0.0
    # s >= d: self energies and cross term are all infinite
    dens = np.where(np.arange(16) < 8, 1.0, -1.0)
    with pytest.raises(UndefinedEnergyError):
        energy_signed(RieszKernel(1.0), GridMeasure(T1, dens))


def test_g_ratio_examples():
    k = riesz(1.0, T2, shift="auto")
    gen = make_rng(10)
    mu = GridMeasure(T2, gen.random((16, 16)))
    assert g_ratio(k, mu, mu).value == pytest.approx(1.0, abs=1e-12)
    assert g_ratio(k, mu, mu.scaled(3.5)).value == pytest.approx(1.0, abs=1e-12)
    zero = GridMeasure(T2, np.zeros((16, 16)))
    with pytest.raises(UndefinedRatioError):
        g_ratio(k, mu, zero)
    with pytest.raises(InvalidInputError):
        g_ratio(k, mu, mu.scaled(-1.0))


def test_capacity():
    assert capacity_estimate(2.0).value == 0.5
    rep = capacity_estimate(math.inf)
    assert rep.value == 0.0 and rep.zero_capacity
    with pytest.raises(OutOfRangeError):
        capacity_estimate(0.0)
    # shift making I(sigma) = 1 for the log kernel on T^1
    e = energy_grid(RieszKernel(0.0), uniform_measure(T1, 4096)).value
    k = RieszKernel(0.0, shift=1.0 - e)
    e1 = energy_grid(k, uniform_measure(T1, 4096)).value
    assert capacity_estimate(e1).value == pytest.approx(1.0, abs=1e-12)


def test_profile_kernel_grid_energy_matches_coefficient():
    # I(sigma) of a product-profile kernel is the mean of f over the cube
    k = ProductProfileKernel(named_profile("linear", 2))
    e = energy_grid(k, uniform_measure(T2, 64)).value
    assert e == pytest.approx(math.pi, abs=1e-10)


def naive_energy(kernel, space, points, weights, include_diagonal=True):
    """Plain double loop over atoms, one kernel call per pair."""
    terms = []
    for i in range(len(weights)):
        for j in range(len(weights)):
            if i == j and not include_diagonal:
                continue
            kv = float(kernel.evaluate(space, points[i], points[j]))
            terms.append(weights[i] * weights[j] * kv)
    if any(t == math.inf for t in terms):
        return math.inf
    return math.fsum(terms)


@pytest.mark.parametrize("trial", range(6))
def test_energy_discrete_matches_naive_loop(trial):
    gen = make_rng(100 + trial)
    space = [T1, T2, T3, Space.sphere2()][trial % 4]
    N = int(gen.integers(2, 60))
    pts = uniform_points(space, N, gen)
    w = gen.random(N)
    k = RieszKernel([-2.0, -1.0, 0.0, 0.5, 1.0, -0.5][trial])
    mu = DiscreteMeasure(space, pts, w)
    assert energy_discrete(k, mu, include_diagonal=False).value == naive_energy(k, space, mu.points, mu.weights, False)


@given(st.integers(0, 10_000), st.floats(-3.0, 3.0))
def test_quadratic_form_identity(seed, c):
    gen = np.random.default_rng(seed)
    k = RieszKernel(1.0)
    mu = GridMeasure(T2, gen.random((8, 8)))
    nu = GridMeasure(T2, c * gen.random((8, 8)))
    lhs = energy_signed(k, mu + nu).value
    rhs = energy_signed(k, mu).value + energy_signed(k, nu).value + 2 * mutual_energy(k, mu, nu)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


@given(st.integers(0, 10_000), st.floats(-5.0, 5.0))
def test_shift_covariance(seed, c):
    gen = np.random.default_rng(seed)
    dens = gen.normal(size=(8, 8))
    mu = GridMeasure(T2, dens)
    a = energy_signed(RieszKernel(0.0), mu).value
    b = energy_signed(RieszKernel(0.0, shift=c), mu).value
    assert b - a == pytest.approx(c * mu.total_mass**2, abs=1e-10 * max(1.0, abs(a)))
    zero = GridMeasure(T2, dens - dens.mean())
    a0 = energy_signed(RieszKernel(0.0), zero).value
    b0 = energy_signed(RieszKernel(0.0, shift=c), zero).value
    assert abs(a0 - b0) <= 1e-10


@given(st.integers(0, 10_000))
def test_positive_definite_t2_t3(seed):
    gen = np.random.default_rng(seed)
    for space, s in ((T2, 0.0), (T2, 1.0), (T3, 1.0), (T3, 2.0)):
        n = 16 if space.dim == 2 else 8
        mu = GridMeasure(space, gen.normal(size=(n,) * space.dim))
        # arbitrary total mass needs the nonnegativity shift
        assert energy_signed(riesz(s, space, shift="auto"), mu).value >= -1e-6
        zero = GridMeasure(space, mu.density - mu.density.mean())
        assert energy_signed(RieszKernel(s), zero).value >= -1e-6


@given(st.integers(0, 10_000))
def test_g_ratio_implies_nonnegative_difference(seed):
    gen = np.random.default_rng(seed)
    k = riesz(1.0, T2, shift="auto")
    a, b = gen.random((16, 16)), gen.random((16, 16))
    mask = np.zeros((16, 16), bool)
    mask[:, :8] = True
    mu, nu = GridMeasure(T2, np.where(mask, a, 0)), GridMeasure(T2, np.where(mask, 0, b))
    G = g_ratio(k, mu, nu)
    assert G.value >= 1 - 1e-6
    assert energy_signed(k, mu - nu).value >= -1e-6
