"""Built-in parameterized symbol families used by scenarios.

A profile is a function of the energy coordinate, optionally multiplied by
one factor per atom of each extra (atomic) axis, and optionally overridden
at the energy-axis atom. Diagonal symbols are profiles; regular kernels are
``zero`` or rank one, ``scale * u (x) conj(u)`` for a profile ``u``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import VanHoveError
from .grid import AxisSpec, SpectralGrid, product_grid

__all__ = ["PROFILES", "KERNELS", "ProfileSpec", "KernelSpec", "evaluate_profile",
           "evaluate_kernel", "tail_integrals"]


def _gaussian(w, center, width, amplitude):
    return amplitude * np.exp(-((w - center) ** 2) / (2 * width**2))


def _lorentzian_windowed(w, center, width, window, amplitude):
    lorentz = width**2 / ((w - center) ** 2 + width**2)
    return amplitude * lorentz * np.exp(-((w - center) ** 2) / (2 * window**2))


# name -> (function of omega, default parameters)
PROFILES = {
    "zero": (lambda w: np.zeros_like(w), {}),
    "constant": (lambda w, value: np.full_like(w, value), {"value": 1.0}),
    "energy": (lambda w: w.copy(), {}),
    "gaussian": (_gaussian, {"center": 0.0, "width": 1.0, "amplitude": 1.0}),
    "lorentzian_windowed": (
        _lorentzian_windowed,
        {"center": 0.0, "width": 1.0, "window": 1.0, "amplitude": 1.0},
    ),
    # indicator of the bound-state atom on the energy axis
    "atom": (lambda w: np.zeros_like(w), {}),
}
KERNELS = ("zero", "rank1")


@dataclass(frozen=True)
class ProfileSpec:
    family: str = "zero"
    params: dict = field(default_factory=dict)
    factors: dict = field(default_factory=dict)  # extra axis k -> per-atom factors
    atom_value: complex | None = None

    def __post_init__(self):
        if self.family not in PROFILES:
            raise VanHoveError(f"unknown profile family {self.family!r}; "
                               f"known: {sorted(PROFILES)}")
        unknown = set(self.params) - set(PROFILES[self.family][1])
        if unknown:
            raise VanHoveError(f"family {self.family!r} has no parameter(s) {sorted(unknown)}")
        if self.family == "gaussian" or self.family == "lorentzian_windowed":
            merged = self.resolved_params()
            for key in ("width", "window"):
                if key in merged and merged[key] <= 0:
                    raise VanHoveError(f"{self.family}: {key} must be positive")

    def resolved_params(self) -> dict:
        return {**PROFILES[self.family][1], **self.params}


@dataclass(frozen=True)
class KernelSpec:
    kind: str = "zero"
    profile: ProfileSpec = field(default_factory=ProfileSpec)
    scale: complex = 1.0

    def __post_init__(self):
        if self.kind not in KERNELS:
            raise VanHoveError(f"unknown kernel family {self.kind!r}; known: {list(KERNELS)}")


def _continuum_values(spec: ProfileSpec, omega: np.ndarray) -> np.ndarray:
    func, _ = PROFILES[spec.family]
    return np.asarray(func(omega, **spec.resolved_params()), dtype=complex)


def evaluate_profile(spec: ProfileSpec, grid: SpectralGrid) -> np.ndarray:
    values = _continuum_values(spec, grid.energy)
    if spec.family == "atom":
        values = grid.energy_is_atom.astype(complex)
    if spec.atom_value is not None:
        values = np.where(grid.energy_is_atom, spec.atom_value, values)
    for k, factors in spec.factors.items():
        if k < 1 or k >= grid.dim:
            raise VanHoveError(f"factors given for axis {k}, grid has extra axes 1..{grid.dim - 1}")
        factors = np.asarray(factors, dtype=complex)
        count = len(grid.axes[k].atoms)
        if grid.axes[k].kind != "atomic" or len(factors) != count:
            raise VanHoveError(f"axis {k} needs {count} factors (one per atom), got {len(factors)}")
        values = values * factors[grid.axis_index[:, k]]
    return values


def evaluate_kernel(spec: KernelSpec, grid: SpectralGrid) -> np.ndarray | None:
    if spec.kind == "zero":
        return None
    u = evaluate_profile(spec.profile, grid)
    return spec.scale * np.outer(u, u.conj())


def _extension(grid: SpectralGrid, nodes: int = 512) -> SpectralGrid:
    ax = grid.axes[0]
    span = ax.upper - ax.lower
    tail_axis = AxisSpec.continuous(ax.upper, ax.upper + 4 * span, nodes)
    return product_grid([tail_axis, *grid.axes[1:]])


def tail_integrals(first: ProfileSpec, second: ProfileSpec, grid: SpectralGrid,
                   first_scale: float = 1.0, second_scale: float = 1.0) -> tuple[float, float]:
    """``(inside, tail)`` integrals of ``|first * second|`` over and beyond the grid.

    The tail runs from the truncation bound over four further grid lengths,
    where every built-in decaying family is negligible.
    """
    ext = _extension(grid)
    inside = np.dot(grid.weights, np.abs(evaluate_profile(first, grid)
                                         * evaluate_profile(second, grid)))
    beyond = np.dot(ext.weights, np.abs(evaluate_profile(first, ext)
                                        * evaluate_profile(second, ext)))
    s = abs(first_scale * second_scale)
    return float(s * inside), float(s * beyond)
