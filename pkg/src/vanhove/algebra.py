"""Van Hove algebra elements: a diagonal symbol plus a regular kernel.

An element ``a`` has kernel ``a_hat(W) delta(w - w') + a_r(W, W')``. The
delta part is never sampled as a spike; it is kept as its symbol ``diag``
and contracted analytically, while regular kernels are contracted with the
grid quadrature weights. The discrete product is therefore an exact matrix
algebra over fixed weights and the algebra laws hold to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import GridMismatchError, as_kernel, as_vector, frozen, same_grid
from .grid import SampledFunction, SpectralGrid, derivative_matrix

__all__ = [
    "VanHoveElement",
    "RegularityThresholds",
    "RegularityReport",
    "make_element",
    "zero",
    "identity",
    "diagonal_observable",
    "hamiltonian",
    "multiply",
    "star",
    "add",
    "scale",
    "commutator",
    "is_symmetric",
    "apply",
    "classify_regularity",
    "random_element",
]


@dataclass(frozen=True, eq=False)
class VanHoveElement:
    grid: SpectralGrid
    diag: np.ndarray
    reg: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "diag", frozen(as_vector(self.grid, self.diag, name="diag")))
        object.__setattr__(self, "reg", frozen(as_kernel(self.grid, self.reg, name="reg")))

    @property
    def is_diagonal(self) -> bool:
        return not np.any(self.reg)

    @property
    def symbol(self) -> SampledFunction:
        return SampledFunction(self.grid, self.diag)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __neg__(self):
        return scale(self, -1)

    def __mul__(self, c):
        if isinstance(c, VanHoveElement):
            return NotImplemented
        return scale(self, c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        return multiply(self, other)

    def star(self) -> "VanHoveElement":
        return star(self)


def make_element(grid: SpectralGrid, diag=0.0, reg=None) -> VanHoveElement:
    """Pair a diagonal symbol with a regular kernel. No regularity check."""
    return VanHoveElement(grid, diag, reg)


def zero(grid: SpectralGrid) -> VanHoveElement:
    return VanHoveElement(grid, 0.0, None)


def identity(grid: SpectralGrid) -> VanHoveElement:
    return VanHoveElement(grid, 1.0, None)


def diagonal_observable(grid: SpectralGrid, f) -> VanHoveElement:
    """Element of the abelian subalgebra with symbol ``f`` and no regular part."""
    return VanHoveElement(grid, f, None)


def hamiltonian(grid: SpectralGrid) -> VanHoveElement:
    return diagonal_observable(grid, grid.energy)


def _pair(a: VanHoveElement, b: VanHoveElement) -> None:
    if not isinstance(b, VanHoveElement):
        raise TypeError(f"expected VanHoveElement, got {type(b).__name__}")
    same_grid(a.grid, b.grid)


def multiply(a: VanHoveElement, b: VanHoveElement) -> VanHoveElement:
    """Product of generalized matrices.

    delta*delta gives delta with symbol ``a_hat*b_hat``; delta*regular and
    regular*delta scale rows / columns; regular*regular is the weighted
    matrix product ``sum_k w_k a_r(W, W_k) b_r(W_k, W')``.
    """
    _pair(a, b)
    w = a.grid.weights
    reg = (
        a.diag[:, None] * b.reg
        + a.reg * b.diag[None, :]
        + a.reg @ (w[:, None] * b.reg)
    )
    return VanHoveElement(a.grid, a.diag * b.diag, reg)


def star(a: VanHoveElement) -> VanHoveElement:
    """Involution: complex conjugation followed by transposition."""
    return VanHoveElement(a.grid, a.diag.conj(), a.reg.conj().T)


def add(a: VanHoveElement, b: VanHoveElement) -> VanHoveElement:
    _pair(a, b)
    return VanHoveElement(a.grid, a.diag + b.diag, a.reg + b.reg)


def scale(a: VanHoveElement, c: complex) -> VanHoveElement:
    return VanHoveElement(a.grid, c * a.diag, c * a.reg)


def commutator(a: VanHoveElement, b: VanHoveElement) -> VanHoveElement:
    ab = multiply(a, b)
    ba = multiply(b, a)
    return VanHoveElement(a.grid, ab.diag - ba.diag, ab.reg - ba.reg)


def is_symmetric(a: VanHoveElement, tol: float = 1e-12) -> bool:
    """True when ``a* = a`` entrywise within ``tol``."""
    diag_dev = np.max(np.abs(a.diag - a.diag.conj()), initial=0.0)
    reg_dev = np.max(np.abs(a.reg - a.reg.conj().T), initial=0.0)
    return bool(diag_dev <= tol and reg_dev <= tol)


def apply(a: VanHoveElement, f) -> SampledFunction:
    """Act with the kernel on a sampled function: ``a_hat f + int a_r f dmu``."""
    if isinstance(f, SampledFunction) and not f.grid.same_as(a.grid):
        raise GridMismatchError("function and element are defined on different grids")
    values = as_vector(a.grid, f)
    out = a.diag * values + a.reg @ (a.grid.weights * values)
    return SampledFunction(a.grid, out)


def random_element(grid: SpectralGrid, rng: np.random.Generator,
                   *, diag: bool = True, reg: bool = True) -> VanHoveElement:
    """Element with standard complex-normal symbol and kernel entries."""
    n = grid.size
    d = rng.standard_normal(n) + 1j * rng.standard_normal(n) if diag else 0.0
    r = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) if reg else None
    return VanHoveElement(grid, d, r)


@dataclass(frozen=True)
class RegularityThresholds:
    """Finite stand-in for the Schwartz-class requirement.

    A table entry is suspect if it exceeds ``limit`` or if the weighted
    profile is still at least ``edge_fraction`` of its supremum at the
    truncation edge (the function has not decayed inside the grid).
    Profiles whose supremum is below ``floor``, or below ``relative_floor``
    times the underived (m = 0) profile, are finite-difference noise and
    count as zero.
    """

    max_n: int = 2
    max_m: int = 2
    limit: float = 1e6
    edge_fraction: float = 1e-3
    floor: float = 1e-12
    relative_floor: float = 1e-8


@dataclass(frozen=True)
class RegularityReport:
    table: dict[tuple[str, int, int], float]
    suspect_entries: tuple[tuple[str, int, int], ...]
    thresholds: RegularityThresholds = field(repr=False)

    @property
    def flag(self) -> str:
        return "suspect" if self.suspect_entries else "regular"

    @property
    def regular_part_flag(self) -> str:
        """Classification restricted to the regular kernel."""
        return "suspect" if any(k[0] != "diag" for k in self.suspect_entries) else "regular"


def _entries(weight, deriv_rows, rows, th: RegularityThresholds):
    """Seminorm values and suspect flags for each row of ``deriv_rows``."""
    profile = weight * np.abs(deriv_rows)
    sup = profile.max(axis=-1)
    noise = np.maximum(th.floor, th.relative_floor * (weight * np.abs(rows)).max(axis=-1))
    sup = np.where(sup <= noise, 0.0, sup)
    edge = profile[..., -1] >= th.edge_fraction * sup
    bad = (sup > 0) & ((sup > th.limit) | edge)
    return float(sup.max(initial=0.0)), bool(bad.any())


def classify_regularity(a: VanHoveElement,
                        thresholds: RegularityThresholds | None = None) -> RegularityReport:
    """Tabulate seminorm estimates of the symbol and kernel rows/columns.

    On product grids each energy slice (fixed values of the other
    observables) is classified separately and the worst value is kept.
    Energy atoms are excluded: derivatives are meaningless there.
    """
    th = thresholds or RegularityThresholds()
    omega = a.grid.energy
    table: dict[tuple[str, int, int], float] = {}
    suspect: set[tuple[str, int, int]] = set()
    slices = [s for s in a.grid.energy_slices() if len(s)]
    rows = np.concatenate(slices)
    for s in slices:
        x = omega[s]
        parts = {"diag": a.diag[s][None, :]}
        if a.reg.any():
            parts["reg_row"] = a.reg[np.ix_(rows, s)]
            parts["reg_col"] = a.reg[np.ix_(s, rows)].T
        for m in range(th.max_m + 1):
            dmat = derivative_matrix(x, m)
            derivs = {name: block @ dmat.T for name, block in parts.items()}
            for n in range(th.max_n + 1):
                weight = (1 + x**2) ** n
                for name in ("diag", "reg_row", "reg_col"):
                    key = (name, n, m)
                    value, bad = (0.0, False)
                    if name in derivs:
                        value, bad = _entries(weight, derivs[name], parts[name], th)
                    table[key] = max(table.get(key, 0.0), value)
                    if bad:
                        suspect.add(key)
    return RegularityReport(table, tuple(sorted(suspect)), th)
