"""Time evolution, off-diagonal decay and the decohered limit.

The automorphism acts on kernels by the energy phase
``a_r(W, W') -> exp(i (w - w') t) a_r(W, W')`` and leaves diagonal symbols
untouched. Paired with a state, the regular contribution becomes the
oscillatory double sum

    sum_ij w_i w_j exp(i (w_j - w_i) t) rho_r(i, j) a_r(j, i)

which decays with t when both kernels are smooth in the energy variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import BandError, DegenerateCurveError, VanHoveError, same_grid
from .algebra import VanHoveElement
from .grid import SpectralGrid
from .states import VanHoveState

__all__ = [
    "DecayCurve",
    "DecoherenceEstimate",
    "AntiDiagonalCorrelation",
    "evolve_observable",
    "evolve_state",
    "pair_integrand",
    "offdiagonal_expectation",
    "offdiagonal_values",
    "antidiagonal_correlation",
    "antidiagonal_values",
    "decay_curve",
    "asymptotic_expectation",
    "estimate_decoherence_time",
    "check_band",
    "refinement_check",
    "BAND_CONSTANT",
]

BAND_CONSTANT = np.pi / 4
FIT_MODELS = ("gaussian", "exponential")


def _phase(grid: SpectralGrid, t: float) -> np.ndarray:
    w = grid.energy
    return np.exp(1j * (w[:, None] - w[None, :]) * t)


def evolve_observable(a: VanHoveElement, t: float) -> VanHoveElement:
    if t == 0 or not a.reg.any():
        return a
    return VanHoveElement(a.grid, a.diag, a.reg * _phase(a.grid, t))


def evolve_state(rho: VanHoveState, t: float) -> VanHoveState:
    """Dual evolution: ``evolve_state(rho, t)(a) == rho(evolve_observable(a, t))``."""
    if t == 0 or not rho.reg.any():
        return rho
    return VanHoveState(rho.grid, rho.diag, rho.reg * _phase(rho.grid, t).conj(),
                        normalized=rho.normalized)


def pair_integrand(rho: VanHoveState, a: VanHoveElement) -> np.ndarray:
    """``M_ij = w_i w_j rho_r(i, j) a_r(j, i)``, the t = 0 summand."""
    same_grid(rho.grid, a.grid)
    w = rho.grid.weights
    return (w[:, None] * w[None, :]) * rho.reg * a.reg.T


def offdiagonal_values(rho: VanHoveState, a: VanHoveElement, times) -> np.ndarray:
    """Direct weighted double sum at each requested time."""
    m = pair_integrand(rho, a)
    times = np.atleast_1d(np.asarray(times, dtype=float))
    e = np.exp(1j * np.outer(times, rho.grid.energy))
    return np.sum((e.conj() @ m) * e, axis=1)


def offdiagonal_expectation(rho: VanHoveState, a: VanHoveElement, t: float) -> complex:
    return complex(offdiagonal_values(rho, a, [t])[0])


@dataclass(frozen=True)
class AntiDiagonalCorrelation:
    """Integrand summed along lines of constant energy difference.

    Node energies are ``offsets[c] + p * step`` (class c, panel p), so
    ``w_j - w_i = offsets[c_j] - offsets[c_i] + lag * step``. ``table``
    holds the summand collected by ``(c_i, c_j, lag)``; for a uniform grid
    there is a single class and this is the plain anti-diagonal correlation.
    """

    offsets: np.ndarray
    step: float
    lags: np.ndarray
    table: np.ndarray

    def values(self, times) -> np.ndarray:
        times = np.atleast_1d(np.asarray(times, dtype=float))
        lag_phase = np.exp(1j * np.outer(self.lags * self.step, times))
        inner = self.table @ lag_phase
        diff = self.offsets[None, :] - self.offsets[:, None]
        outer = np.exp(1j * diff[:, :, None] * times[None, None, :])
        return np.sum(outer * inner, axis=(0, 1))


def antidiagonal_correlation(rho: VanHoveState, a: VanHoveElement) -> AntiDiagonalCorrelation:
    grid = rho.grid
    m = pair_integrand(rho, a)
    cls, panel = grid.energy_class, grid.energy_panel
    k = len(grid.energy_offsets)
    span = int(panel.max()) if len(panel) else 0
    lag = panel[None, :] - panel[:, None] + span
    table = np.zeros((k, k, 2 * span + 1), dtype=complex)
    np.add.at(table, (cls[:, None], cls[None, :], lag), m)
    return AntiDiagonalCorrelation(
        grid.energy_offsets, grid.energy_step, np.arange(-span, span + 1), table
    )


def antidiagonal_values(rho: VanHoveState, a: VanHoveElement, times) -> np.ndarray:
    """Same quantity as :func:`offdiagonal_values`, via the lag table."""
    return antidiagonal_correlation(rho, a).values(times)


def check_band(grid: SpectralGrid, times, constant: float = BAND_CONSTANT,
               override: bool = False) -> float:
    band = grid.resolvable_band(constant)
    t_max = float(np.max(times))
    if t_max > band * (1 + 1e-12) and not override:
        raise BandError(
            f"t_max={t_max:g} exceeds the resolvable band {band:g} "
            f"(= {constant:g} / mean node spacing); enable the band override to sample it"
        )
    return band


@dataclass(frozen=True)
class DecayCurve:
    times: np.ndarray
    values: np.ndarray
    reference: float
    tail_bound: float = 0.0

    @property
    def magnitudes(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def ratios(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.magnitudes / self.reference

    @property
    def final_ratio(self) -> float:
        return float(self.ratios[-1])


def decay_curve(rho: VanHoveState, a: VanHoveElement, times, *, tail_bound: float = 0.0,
                band_constant: float = BAND_CONSTANT, band_override: bool = False,
                method: str = "direct") -> DecayCurve:
    """Sample the off-diagonal expectation over ``times`` (must start at 0)."""
    times = np.asarray(times, dtype=float)
    if times.size == 0:
        raise VanHoveError("time list is empty")
    if times[0] != 0 or np.any(np.diff(times) <= 0):
        raise VanHoveError("times must start at 0 and increase strictly")
    check_band(rho.grid, times, band_constant, band_override)
    if method == "direct":
        values = offdiagonal_values(rho, a, times)
    elif method == "antidiagonal":
        values = antidiagonal_values(rho, a, times)
    else:
        raise VanHoveError(f"unknown method {method!r}")
    return DecayCurve(times, values, float(abs(values[0])), float(tail_bound))


def asymptotic_expectation(rho: VanHoveState, a: VanHoveElement) -> complex:
    """Time-independent part ``rho_hat(a_hat)``; real for symmetric ``a``."""
    same_grid(rho.grid, a.grid)
    return complex(np.dot(rho.grid.weights * rho.diag, a.diag))


@dataclass(frozen=True)
class DecoherenceEstimate:
    threshold: float
    crossing_time: float | None
    model: str | None
    params: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)

    @property
    def reached(self) -> bool:
        return self.crossing_time is not None


def estimate_decoherence_time(curve: DecayCurve, threshold: float = 0.5,
                              models=FIT_MODELS, fit_floor: float = 1e-13) -> DecoherenceEstimate:
    """First sampled crossing of ``threshold * reference`` plus a descriptive fit.

    ``log(|v| / ref)`` is fitted by least squares against ``-alpha t^2``
    (gaussian) and ``-beta t`` (exponential), using samples above
    ``fit_floor`` only; the model with the smaller RMS residual is reported.
    """
    if not 0 < threshold < 1:
        raise VanHoveError(f"threshold must lie in (0, 1), got {threshold}")
    if curve.reference == 0:
        raise DegenerateCurveError("reference magnitude is zero: regular parts vanish at t=0")
    ratios = curve.ratios
    below = np.flatnonzero(ratios <= threshold)
    crossing = float(curve.times[below[0]]) if below.size else None

    keep = (curve.times > 0) & (ratios > fit_floor)
    t, y = curve.times[keep], np.log(ratios[keep])
    params, residuals = {}, {}
    if t.size:
        for name in models:
            if name == "gaussian":
                basis = t**2
            elif name == "exponential":
                basis = t
            else:
                raise VanHoveError(f"unknown fit model {name!r}")
            rate = 0.0 - float(np.dot(basis, y) / np.dot(basis, basis))
            params[name] = rate
            residuals[name] = float(np.sqrt(np.mean((y + rate * basis) ** 2)))
    model = min(residuals, key=residuals.get) if residuals else None
    return DecoherenceEstimate(threshold, crossing, model, params, residuals)


def refinement_check(coarse, medium, fine, order: int, atol: float, slack: float = 4.0):
    """Observed-order test over three grids, each twice as fine as the last.

    For a rule of order ``p`` the change ``|fine - medium|`` should be about
    ``2**-p`` times ``|medium - coarse|``. Entries pass when the second
    change is at most ``slack * 2**-p`` times the first, or below ``atol``.
    Returns ``(first_change, second_change, passed)`` arrays.
    """
    coarse, medium, fine = (np.asarray(v) for v in (coarse, medium, fine))
    d1 = np.abs(medium - coarse)
    d2 = np.abs(fine - medium)
    passed = (d2 <= atol) | (d2 <= slack * 2.0 ** (-order) * d1)
    return d1, d2, passed
