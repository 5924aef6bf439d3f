import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import dawsn

from vanhove import BandError, DegenerateCurveError, VanHoveError
from vanhove.algebra import (diagonal_observable, hamiltonian, identity, make_element,
                             multiply, random_element, star)
from vanhove.evolution import (DecayCurve, antidiagonal_values, asymptotic_expectation,
                               check_band, decay_curve, estimate_decoherence_time,
                               evolve_observable, evolve_state, offdiagonal_expectation,
                               offdiagonal_values, refinement_check)
from vanhove.grid import AxisSpec, product_grid
from vanhove.states import expectation, make_state, trace

from conftest import gaussian, gl_grid

GRID = gl_grid(n=32)


def close(a, b, tol=1e-12):
    s = max(1.0, np.abs(a.reg).max(), np.abs(a.diag).max())
    return (np.abs(a.diag - b.diag).max() <= tol * s
            and np.abs(a.reg - b.reg).max() <= tol * s)


def pair(grid, profile, scale=1.0):
    """State and observable with the same rank-one kernel ``scale * u (x) u``."""
    u = profile(grid.energy)
    d = gaussian(grid.energy)
    rho = make_state(grid, d / np.dot(grid.weights, d), scale * np.outer(u, u))
    a = make_element(grid, grid.energy, scale * np.outer(u, u))
    return rho, a


def origin_profile(w):
    return np.exp(-(w**2) / 2)


def dawson_oracle(t):
    """|int_0^inf exp(-w^2) exp(i w t) dw|^2 in closed form."""
    f = math.sqrt(math.pi) / 2 * np.exp(-(t**2) / 4) + 1j * dawsn(t / 2)
    return np.abs(f) ** 2


def test_identity_automorphism(grid64, rng):
    a = random_element(grid64, rng)
    assert evolve_observable(a, 0.0) is a


def test_diagonal_elements_fixed_exactly(grid64):
    f = diagonal_observable(grid64, np.sin(grid64.energy) + 2j)
    for t in (0.5, 3.0, 11.0):
        ft = evolve_observable(f, t)
        assert np.array_equal(ft.diag, f.diag) and not ft.reg.any()


def test_group_law_and_duality(grid64, rng):
    a = random_element(grid64, rng)
    s, t = 1.3, 2.9
    assert close(evolve_observable(evolve_observable(a, s), t), evolve_observable(a, s + t))
    g = gaussian(grid64.energy) * np.exp(0.4j * grid64.energy)
    rho = make_state(grid64, gaussian(grid64.energy), np.outer(g, g.conj()))
    lhs = expectation(evolve_state(rho, t), a)
    rhs = expectation(rho, evolve_observable(a, t))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs))


def test_conservation(grid64):
    rho, _ = pair(grid64, gaussian, 0.5)
    h = hamiltonian(grid64)
    e0 = expectation(rho, h)
    for t in np.linspace(0, grid64.resolvable_band(), 9):
        rt = evolve_state(rho, t)
        assert trace(rt) == trace(rho)
        assert abs(expectation(rt, h) - e0) <= 1e-12 * abs(e0)


def test_origin_gaussian_value_at_zero(grid128):
    rho, a = pair(grid128, origin_profile)
    assert abs(offdiagonal_expectation(rho, a, 0.0) - math.pi / 4) <= 1e-8


def test_origin_gaussian_follows_dawson_oracle(grid128):
    rho, a = pair(grid128, origin_profile)
    times = np.linspace(0, 12, 25)
    values = offdiagonal_values(rho, a, times)
    assert np.abs(values.imag).max() <= 1e-12
    # 8-point panels lose digits as the phase speeds up past the band edge
    assert np.allclose(values.real, dawson_oracle(times), rtol=1e-7, atol=0)
    inside = times <= grid128.resolvable_band()
    assert np.allclose(values.real[inside], dawson_oracle(times[inside]), rtol=1e-8, atol=0)
    finer = offdiagonal_values(*pair(gl_grid(n=256), origin_profile), times)
    assert np.allclose(finer.real, dawson_oracle(times), rtol=1e-11, atol=0)
    # the half-line edge at w = 0 keeps this curve from decaying like exp(-t^2 / 2)
    assert values[-1].real / values[0].real == pytest.approx(9.1004e-3, rel=1e-4)


def test_separable_case_matches_factored_integral(grid128):
    g = gaussian(grid128.energy, 4.0, 0.8) * np.exp(0.7j * grid128.energy)
    rho = make_state(grid128, gaussian(grid128.energy), np.outer(g, g.conj()))
    a = make_element(grid128, 0.0, np.ones((grid128.size, grid128.size)))
    for t in (0.0, 0.7, 2.5, 6.0):
        factor = np.sum(grid128.weights * g * np.exp(-1j * grid128.energy * t))
        value = offdiagonal_expectation(rho, a, t)
        assert abs(value - abs(factor) ** 2) <= 1e-13
        assert value.real >= 0


def test_zero_regular_part_gives_zero(grid64):
    rho, a = pair(grid64, gaussian)
    diag_only = make_element(grid64, a.diag)
    assert np.all(offdiagonal_values(rho, diag_only, [0.0, 1.0, 5.0]) == 0)


def test_centred_gaussian_decay_and_oracle():
    profile = lambda w: gaussian(w, 5.0, 1.0)
    coarse = pair(gl_grid(n=128), profile, 0.5)
    fine = pair(gl_grid(n=1024), profile, 0.5)
    curve = decay_curve(*coarse, np.linspace(0, 12, 121), band_override=True)
    oracle = decay_curve(*fine, np.linspace(0, 12, 121))
    assert curve.reference == pytest.approx(math.pi / 4 * math.erf(5) ** 2, abs=1e-14)
    assert abs(curve.reference - math.pi / 4) <= 1e-8
    assert curve.final_ratio <= 1e-6
    assert oracle.final_ratio <= 1e-6
    # away from the roundoff floor the two resolutions agree
    head = curve.ratios > 1e-10
    assert np.allclose(curve.ratios[head], oracle.ratios[head], rtol=1e-9)


def test_atom_term_is_constant():
    grid = gl_grid(n=64, atom=(0.0, 1.0))
    atom = grid.energy_is_atom.astype(float)
    rho = make_state(grid, gaussian(grid.energy) + atom, 0.25 * np.outer(atom, atom))
    a = make_element(grid, grid.energy, np.outer(atom, atom))
    curve = decay_curve(rho, a, np.linspace(0, grid.resolvable_band(), 40))
    assert np.abs(curve.magnitudes - curve.reference).max() <= 1e-12 * curve.reference
    est = estimate_decoherence_time(curve)
    assert not est.reached


def test_diag_only_curve(grid64):
    rho, a = pair(grid64, gaussian)
    curve = decay_curve(rho, make_element(grid64, a.diag), np.linspace(0, 5, 11))
    assert curve.reference == 0 and not curve.values.any()
    with pytest.raises(DegenerateCurveError):
        estimate_decoherence_time(curve)


def test_band_guard(grid128):
    rho, a = pair(grid128, gaussian)
    with pytest.raises(BandError) as info:
        decay_curve(rho, a, np.linspace(0, 12, 13))
    assert "t_max=12" in str(info.value) and "10.05" in str(info.value)
    assert check_band(grid128, [12.0], override=True) == pytest.approx(grid128.resolvable_band())


def test_bad_time_lists(grid64):
    rho, a = pair(grid64, gaussian)
    with pytest.raises(VanHoveError):
        decay_curve(rho, a, [0.5, 1.0])
    with pytest.raises(VanHoveError):
        decay_curve(rho, a, [0.0, 2.0, 1.0])


def test_asymptotic_expectation(grid64, rng):
    rho, a = pair(grid64, gaussian)
    assert asymptotic_expectation(rho, identity(grid64)) == pytest.approx(1.0, abs=1e-12)
    h = hamiltonian(grid64)
    assert asymptotic_expectation(rho, h) == pytest.approx(expectation(rho, h), abs=1e-13)


def test_wstar_limit_gaussian():
    grid = gl_grid(n=128)
    rho, a = pair(grid, lambda w: gaussian(w, 5.0, 1.0), 0.5)
    ref = abs(offdiagonal_expectation(rho, a, 0.0))
    late = expectation(evolve_state(rho, 12.0), a)
    assert abs(late - asymptotic_expectation(rho, a)) <= 1e-6 * ref


def test_estimate_zero_after_start():
    t = np.linspace(0, 1, 11)
    v = np.zeros(11, dtype=complex)
    v[0] = 2.0
    est = estimate_decoherence_time(DecayCurve(t, v, 2.0))
    assert est.crossing_time == t[1]


def test_estimate_constant_curve():
    t = np.linspace(0, 1, 11)
    est = estimate_decoherence_time(DecayCurve(t, np.full(11, 0.3 + 0j), 0.3))
    assert est.crossing_time is None and not est.reached


def test_estimate_model_selection():
    t = np.linspace(0, 4, 41)
    g = estimate_decoherence_time(DecayCurve(t, np.exp(-0.7 * t**2) + 0j, 1.0))
    e = estimate_decoherence_time(DecayCurve(t, np.exp(-1.3 * t) + 0j, 1.0))
    assert g.model == "gaussian" and g.params["gaussian"] == pytest.approx(0.7)
    assert e.model == "exponential" and e.params["exponential"] == pytest.approx(1.3)


def test_decoherence_time_matches_dense_oracle():
    profile = lambda w: gaussian(w, 5.0, 1.0)
    step = 0.1
    curve = decay_curve(*pair(gl_grid(n=128), profile, 0.5), np.arange(0, 121) * step,
                        band_override=True)
    est = estimate_decoherence_time(curve, 0.5)
    dense_t = np.linspace(0, 2.4, 2401)
    dense = decay_curve(*pair(gl_grid(n=1024), profile, 0.5), dense_t)
    crossing = dense_t[np.flatnonzero(dense.ratios <= 0.5)[0]]
    assert abs(est.crossing_time - crossing) <= step
    # the factored integral gives exp(-t^2 / 2): crossing at sqrt(2 ln 2)
    assert crossing == pytest.approx(math.sqrt(2 * math.log(2)), abs=1e-3)


def _lattice_grids():
    yield gl_grid(n=64)
    yield product_grid([AxisSpec.continuous(0.0, 6.0, 40, rule="trapezoid")])
    yield gl_grid(n=64, atom=(0.0, 0.5))
    yield product_grid([AxisSpec.continuous(0.0, 8.0, 32), AxisSpec.atomic([-1.0, 0.0, 2.0])])


@pytest.mark.parametrize("grid", list(_lattice_grids()), ids=["gl", "trap", "atom", "product"])
def test_antidiagonal_equals_direct(grid):
    rng = np.random.default_rng(11)
    b = random_element(grid, rng)
    u = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
    rho = make_state(grid, np.abs(u), np.outer(u, u.conj()))
    times = np.linspace(0, 15, 31)
    direct = offdiagonal_values(rho, b, times)
    fast = antidiagonal_values(rho, b, times)
    assert np.abs(fast - direct).max() <= 1e-10 * np.abs(direct).max()


def test_refinement_check_logic():
    d1, d2, ok = refinement_check([1.0, 5.0], [1.1, 5.0], [1.1 + 1e-6, 5.0], order=2, atol=1e-14)
    assert ok.all()
    _, _, bad = refinement_check([1.0], [1.1], [1.2], order=4, atol=1e-14)
    assert not bad.any()


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-20, 20), st.floats(-20, 20))
def test_automorphism_properties(seed, s, t):
    rng = np.random.default_rng(seed)
    a, b = random_element(GRID, rng), random_element(GRID, rng)
    assert close(evolve_observable(multiply(a, b), t),
                 multiply(evolve_observable(a, t), evolve_observable(b, t)))
    assert close(evolve_observable(star(a), t), star(evolve_observable(a, t)))
    assert close(evolve_observable(evolve_observable(a, s), t), evolve_observable(a, s + t))
