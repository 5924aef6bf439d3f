import math

import numpy as np
import pytest

from vanhove import VanHoveError
from vanhove.grid import (AxisSpec, SampledFunction, build_axis, derivative, fd_weights,
                          integrate, product_grid, seminorm_estimate)

from conftest import gl_grid


def test_atomic_axis_passes_through():
    nodes, weights = build_axis(AxisSpec.atomic([0.5], [1.0]))
    assert nodes.tolist() == [0.5]
    assert weights.tolist() == [1.0]


def test_trapezoid_two_nodes():
    nodes, weights = build_axis(AxisSpec.continuous(0.0, 1.0, 2, rule="trapezoid"))
    assert nodes.tolist() == [0.0, 1.0]
    assert weights.tolist() == [0.5, 0.5]


def test_gauss_legendre_weights_sum_to_length():
    _, weights = build_axis(AxisSpec.continuous(0.0, 10.0, 64))
    assert abs(weights.sum() - 10.0) <= 1e-12


def test_gauss_legendre_exact_on_panel_polynomials():
    # composite GL with 8-point panels integrates degree 15 exactly
    x, w = build_axis(AxisSpec.continuous(0.0, 2.0, 16))
    assert np.dot(w, x**15) == pytest.approx(2.0**16 / 16, rel=1e-13)


def test_nodes_sorted_and_inside():
    x, w = build_axis(AxisSpec.continuous(1.0, 3.0, 24, atom=(0.5, 2.0)))
    assert np.all(np.diff(x) > 0)
    assert x[0] == 0.5 and w[0] == 2.0
    assert np.all((x[1:] > 1.0) & (x[1:] < 3.0))


@pytest.mark.parametrize("kwargs", [
    dict(lower=1.0, upper=0.0, n=8),
    dict(lower=0.0, upper=1.0, n=0),
    dict(lower=0.0, upper=1.0, n=12),  # not a multiple of the panel order
    dict(lower=0.0, upper=1.0, n=8, rule="simpson"),
])
def test_bad_continuous_axis(kwargs):
    with pytest.raises(VanHoveError):
        build_axis(AxisSpec.continuous(**kwargs))


def test_bad_atomic_axis():
    with pytest.raises(VanHoveError):
        AxisSpec.atomic([1.0, 0.0])
    with pytest.raises(VanHoveError):
        AxisSpec.atomic([0.0, 1.0], [1.0, -1.0])


def test_single_axis_grid_matches_build_axis():
    spec = AxisSpec.continuous(0.0, 10.0, 64)
    nodes, weights = build_axis(spec)
    grid = product_grid([spec])
    assert np.array_equal(grid.energy, nodes)
    assert np.array_equal(grid.weights, weights)
    assert grid.dim == 1


def test_product_grid_measure():
    cont = AxisSpec.continuous(0.0, 5.0, 4, rule="trapezoid")
    grid = product_grid([cont, AxisSpec.atomic([-1.0, 1.0], [1.0, 1.0])])
    assert grid.size == 8
    x, w = build_axis(cont)
    for k in range(grid.size):
        i, j = grid.axis_index[k]
        assert grid.nodes[k, 0] == x[i]
        assert grid.weights[k] == w[i] * 1.0
    gl = product_grid([AxisSpec.continuous(0.0, 5.0, 16), AxisSpec.atomic([-1.0, 1.0])])
    assert abs(integrate(gl.constant()) - 10.0) <= 1e-12


def test_product_grid_is_lexicographic():
    grid = product_grid([AxisSpec.continuous(0.0, 1.0, 8), AxisSpec.atomic([3.0, 4.0])])
    keys = [tuple(row) for row in grid.nodes]
    assert keys == sorted(keys)


def test_integrate_zero_and_one():
    grid = gl_grid(0.0, 1.0, 16)
    assert integrate(SampledFunction(grid, np.zeros(grid.size))) == 0
    assert abs(integrate(grid.constant()) - 1.0) <= 1e-12


def test_integrate_exponential():
    grid = gl_grid(0.0, 20.0, 128)
    f = grid.sample(lambda w: np.exp(-w))
    # exact value over [0, 20] is 1 - e^-20; the half-line value is 1
    assert abs(integrate(f) - (1 - math.exp(-20))) <= 1e-13
    assert abs(integrate(f) - 1.0) <= 1e-8


def test_integrate_rejects_other_grid():
    f = gl_grid(n=8).constant()
    with pytest.raises(VanHoveError):
        integrate(f, gl_grid(n=16))


def test_sampled_function_shape():
    with pytest.raises(VanHoveError):
        SampledFunction(gl_grid(n=8), np.ones(3))


def test_fd_weights_reproduce_polynomials():
    rng = np.random.default_rng(3)
    x = np.sort(rng.uniform(0, 1, 5))
    x0 = x[2] + 0.01
    # 5 points differentiate quartics exactly
    for m in range(5):
        c = fd_weights(x0, x, m)
        p = np.polynomial.Polynomial([0.3, -1.0, 2.0, 0.5, 1.5])
        assert np.dot(c, p(x)) == pytest.approx(p.deriv(m)(x0), abs=1e-7)


def test_derivative_of_sine_on_gl_nodes():
    grid = gl_grid(0.0, 3.0, 96)
    x = grid.energy
    assert np.max(np.abs(derivative(x, np.sin(x), 1) - np.cos(x))) < 1e-6


def test_seminorm_constants():
    grid = gl_grid(0.0, 10.0, 64)
    one = grid.constant()
    assert seminorm_estimate(one, 0, 0) == pytest.approx(1.0, abs=1e-15)
    assert seminorm_estimate(one, 0, 1) <= 1e-10


def test_seminorm_gaussian_matches_scan():
    grid = gl_grid(0.0, 10.0, 128)
    x = grid.energy
    f = grid.sample(lambda w: np.exp(-(w**2)))
    oracle = np.max((1 + x**2) * np.exp(-(x**2)))
    assert seminorm_estimate(f, 1, 0) == pytest.approx(oracle, rel=1e-14)
    # the supremum of (1 + x^2) exp(-x^2) on x >= 0 is 1, reached at x = 0
    assert oracle == pytest.approx(1.0, abs=1e-3)


def test_seminorm_rejects_high_order_and_product_grid():
    grid = gl_grid(n=16)
    with pytest.raises(VanHoveError):
        seminorm_estimate(grid.constant(), 0, 5)
    pg = product_grid([AxisSpec.continuous(0.0, 1.0, 8), AxisSpec.atomic([0.0, 1.0])])
    with pytest.raises(VanHoveError):
        seminorm_estimate(pg.constant(), 0, 0)


def test_refined_grid_and_band():
    grid = gl_grid(0.0, 10.0, 128)
    assert grid.refined().size == 256
    assert grid.resolvable_band() == pytest.approx(math.pi / 4 * 12.8)
    assert grid.quadrature_order == 16
