"""Discretized joint spectrum: axes, product grids, quadrature and seminorms.

A grid is the Cartesian product of one energy axis (continuous, optionally
carrying a single bound-state atom) and any number of further axes for the
other commuting observables. Every node carries a positive quadrature weight,
so sums ``sum(w * f)`` approximate integrals against the spectral measure.

Nodes are stored in lexicographic order of ``(omega, o_1, ..., o_N)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss

from ._validation import ShapeError, VanHoveError, frozen, same_grid

__all__ = [
    "AxisSpec",
    "SpectralGrid",
    "SampledFunction",
    "build_axis",
    "product_grid",
    "integrate",
    "seminorm_estimate",
    "fd_weights",
    "derivative",
    "derivative_matrix",
]

CONTINUOUS = "continuous"
ATOMIC = "atomic"
RULES = ("gauss-legendre", "trapezoid")
STENCIL = 5


@dataclass(frozen=True)
class AxisSpec:
    """Declaration of one spectral axis.

    Continuous axes cover ``[lower, upper]`` with ``n`` quadrature nodes
    (``upper`` is the truncation bound of the half line). Composite
    Gauss-Legendre uses ``n // panel_order`` equal panels. A continuous axis
    may carry one atom ``(location, weight)``; atomic axes are nothing but
    atoms.
    """

    kind: str
    lower: float = 0.0
    upper: float = 10.0
    n: int = 128
    rule: str = "gauss-legendre"
    panel_order: int = 8
    atoms: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        object.__setattr__(
            self, "atoms", tuple((float(x), float(w)) for x, w in self.atoms)
        )
        if self.kind == CONTINUOUS:
            if self.n <= 0:
                raise VanHoveError(f"node count must be positive, got n={self.n}")
            if self.n < 2:
                raise VanHoveError(f"continuous axis needs n >= 2, got n={self.n}")
            if not self.lower >= 0:
                raise VanHoveError(f"lower bound must be >= 0, got {self.lower}")
            if not self.upper > self.lower:
                raise VanHoveError(
                    f"upper bound {self.upper} must exceed lower bound {self.lower}"
                )
            if self.rule not in RULES:
                raise VanHoveError(f"unknown quadrature rule {self.rule!r}; use one of {RULES}")
            if self.rule == "gauss-legendre":
                if self.panel_order < 1 or self.n % self.panel_order:
                    raise VanHoveError(
                        f"n={self.n} is not a multiple of panel_order={self.panel_order}"
                    )
            if len(self.atoms) > 1:
                raise VanHoveError("a continuous axis carries at most one atom")
        elif self.kind == ATOMIC:
            if not self.atoms:
                raise VanHoveError("atomic axis needs at least one atom")
        else:
            raise VanHoveError(f"unknown axis kind {self.kind!r}")
        locs = [x for x, _ in self.atoms]
        if any(w <= 0 for _, w in self.atoms):
            raise VanHoveError("atom weights must be positive")
        if any(b <= a for a, b in zip(locs, locs[1:])):
            raise VanHoveError("atom locations must be strictly increasing")

    @classmethod
    def continuous(cls, lower=0.0, upper=10.0, n=128, rule="gauss-legendre",
                   panel_order=8, atom=None) -> "AxisSpec":
        atoms = () if atom is None else (tuple(atom),)
        return cls(CONTINUOUS, float(lower), float(upper), int(n), rule,
                   int(panel_order), atoms)

    @classmethod
    def atomic(cls, locations, weights=None) -> "AxisSpec":
        locations = list(locations)
        if weights is None:
            weights = [1.0] * len(locations)
        if len(weights) != len(locations):
            raise VanHoveError("atomic axis needs one weight per location")
        return cls(ATOMIC, atoms=tuple(zip(locations, weights)))

    @property
    def order(self) -> int | None:
        """Algebraic convergence order of the continuous rule (None if atomic)."""
        if self.kind != CONTINUOUS:
            return None
        return 2 * self.panel_order if self.rule == "gauss-legendre" else 2

    @property
    def spacing(self) -> float:
        """Mean node spacing of the continuous part."""
        return (self.upper - self.lower) / self.n

    def refined(self, factor: int = 2) -> "AxisSpec":
        if self.kind != CONTINUOUS:
            return self
        return replace(self, n=self.n * factor)


def _continuous_lattice(spec: AxisSpec):
    """Nodes, weights and the (class, panel, offset, step) lattice layout.

    Every continuous node sits at ``offset[class] + panel * step``; the
    anti-diagonal evaluation of oscillatory sums relies on this layout.
    """
    a, b, n = spec.lower, spec.upper, spec.n
    if spec.rule == "trapezoid":
        h = (b - a) / (n - 1)
        nodes = a + h * np.arange(n)
        nodes[-1] = b
        weights = np.full(n, h)
        weights[[0, -1]] = h / 2
        return nodes, weights, np.zeros(n, int), np.arange(n), np.array([a]), h
    q = spec.panel_order
    x, w = leggauss(q)
    panels = n // q
    h = (b - a) / panels
    local = a + (x + 1) * h / 2
    p = np.repeat(np.arange(panels), q)
    cls = np.tile(np.arange(q), panels)
    nodes = local[cls] + p * h
    weights = np.tile(w * h / 2, panels)
    return nodes, weights, cls, p, local, h


def _axis_layout(spec: AxisSpec):
    if spec.kind == ATOMIC:
        locs = np.array([x for x, _ in spec.atoms])
        wts = np.array([w for _, w in spec.atoms])
        m = len(locs)
        return locs, wts, np.arange(m), np.zeros(m, int), locs.copy(), 0.0
    nodes, weights, cls, panel, offsets, step = _continuous_lattice(spec)
    if spec.atoms:
        (loc, wt), = spec.atoms
        if np.any(np.isclose(nodes, loc, rtol=0, atol=1e-12 * max(1.0, abs(loc)))):
            raise VanHoveError(f"atom at {loc} coincides with a quadrature node")
        nodes = np.append(nodes, loc)
        weights = np.append(weights, wt)
        cls = np.append(cls, len(offsets))
        panel = np.append(panel, 0)
        offsets = np.append(offsets, loc)
        order = np.argsort(nodes, kind="stable")
        nodes, weights, cls, panel = nodes[order], weights[order], cls[order], panel[order]
    return nodes, weights, cls, panel, offsets, step


def build_axis(spec: AxisSpec) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(nodes, weights)`` for one axis, sorted by node."""
    nodes, weights, *_ = _axis_layout(spec)
    return nodes, weights


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    axes: tuple[AxisSpec, ...]
    nodes: np.ndarray
    weights: np.ndarray
    axis_index: np.ndarray
    energy_class: np.ndarray
    energy_panel: np.ndarray
    energy_offsets: np.ndarray
    energy_step: float
    energy_is_atom: np.ndarray = field(repr=False)

    @property
    def size(self) -> int:
        return len(self.weights)

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def energy(self) -> np.ndarray:
        return self.nodes[:, 0]

    def coordinate(self, k: int) -> np.ndarray:
        return self.nodes[:, k]

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())

    @property
    def quadrature_order(self) -> int:
        return self.axes[0].order

    def resolvable_band(self, constant: float = np.pi / 4) -> float:
        """Largest time ``c / dw`` at which phases stay resolved on the grid."""
        return constant / self.axes[0].spacing

    def same_as(self, other: "SpectralGrid") -> bool:
        if self is other:
            return True
        return (
            isinstance(other, SpectralGrid)
            and self.axes == other.axes
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def sample(self, func: Callable[..., np.ndarray]) -> "SampledFunction":
        """Evaluate ``func(omega, o_1, ..., o_N)`` at every node."""
        values = func(*(self.nodes[:, k] for k in range(self.dim)))
        return SampledFunction(self, np.broadcast_to(values, (self.size,)))

    def constant(self, value: complex = 1.0) -> "SampledFunction":
        return SampledFunction(self, np.full(self.size, value, dtype=complex))

    def integrate(self, f) -> complex:
        return integrate(f if isinstance(f, SampledFunction) else SampledFunction(self, f))

    def refined(self, factor: int = 2) -> "SpectralGrid":
        """Same grid with the energy continuum resolved ``factor`` times finer."""
        return product_grid([self.axes[0].refined(factor), *self.axes[1:]])

    def energy_slices(self) -> list[np.ndarray]:
        """Node indices of the energy continuum, one array per fixed (o_1..o_N)."""
        rest = self.axis_index[:, 1:]
        cont = ~self.energy_is_atom
        if rest.shape[1] == 0:
            return [np.flatnonzero(cont)]
        keys, inverse = np.unique(rest, axis=0, return_inverse=True)
        inverse = inverse.reshape(-1)
        return [np.flatnonzero(cont & (inverse == k)) for k in range(len(keys))]


def product_grid(axes: Sequence[AxisSpec]) -> SpectralGrid:
    """Cartesian product of the axes with product weights; axis 0 is energy."""
    axes = tuple(axes)
    if not axes:
        raise VanHoveError("product_grid needs at least one axis")
    if axes[0].kind != CONTINUOUS:
        raise VanHoveError("axis 0 (energy) must be continuous")
    for k, ax in enumerate(axes[1:], start=1):
        if ax.kind == CONTINUOUS and ax.atoms:
            raise VanHoveError(f"axis {k}: only the energy axis may mix continuum and atom")
    layouts = [_axis_layout(ax) for ax in axes]
    counts = [len(lay[0]) for lay in layouts]
    idx = np.stack(
        [g.reshape(-1) for g in np.meshgrid(*[np.arange(c) for c in counts], indexing="ij")],
        axis=1,
    )
    nodes = np.stack([layouts[k][0][idx[:, k]] for k in range(len(axes))], axis=1)
    weights = np.prod([layouts[k][1][idx[:, k]] for k in range(len(axes))], axis=0)
    nodes0, _, cls0, panel0, offsets0, step0 = layouts[0]
    n_cont_classes = len(offsets0) - len(axes[0].atoms)
    grid = SpectralGrid(
        axes=axes,
        nodes=frozen(nodes),
        weights=frozen(weights),
        axis_index=frozen(idx),
        energy_class=frozen(cls0[idx[:, 0]]),
        energy_panel=frozen(panel0[idx[:, 0]]),
        energy_offsets=frozen(offsets0),
        energy_step=float(step0),
        energy_is_atom=frozen(cls0[idx[:, 0]] >= n_cont_classes),
    )
    if np.any(grid.weights <= 0):
        raise VanHoveError("all quadrature weights must be positive")
    if np.any(grid.energy < 0):
        raise VanHoveError("energy coordinates must be non-negative")
    return grid


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """Complex values of a function at the nodes of one grid."""

    grid: SpectralGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.grid.size,):
            raise ShapeError(
                f"sampled function has shape {values.shape}, expected ({self.grid.size},)"
            )
        object.__setattr__(self, "values", frozen(values))

    def __len__(self):
        return len(self.values)

    def integrate(self) -> complex:
        return integrate(self)


def integrate(f: SampledFunction, grid: SpectralGrid | None = None) -> complex:
    """Quadrature sum ``sum_i w_i f(Omega_i)``."""
    if grid is not None:
        same_grid(grid, f.grid)
    return complex(np.dot(f.grid.weights, f.values))


def fd_weights(x0: float, x: np.ndarray, m: int) -> np.ndarray:
    """Finite-difference weights for the m-th derivative at ``x0``.

    Fornberg's recursion; works for arbitrarily spaced stencil points ``x``.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - x0
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - x0
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c[:, m]


def derivative_matrix(x: np.ndarray, m: int) -> np.ndarray:
    """Matrix ``D`` with ``D @ y`` the m-th derivative of samples ``y(x)``.

    Uses 5-point stencils on the sorted nodes, centred where possible and
    shifted to one side near the ends.
    """
    x = np.asarray(x, dtype=float)
    n = len(x)
    width = min(STENCIL, n)
    if m > width - 1:
        raise VanHoveError(
            f"derivative order m={m} exceeds the {width}-point stencil support"
        )
    if m == 0:
        return np.eye(n)
    out = np.zeros((n, n))
    half = width // 2
    for i in range(n):
        start = min(max(i - half, 0), n - width)
        out[i, start:start + width] = fd_weights(x[i], x[start:start + width], m)
    return out


def derivative(x: np.ndarray, y: np.ndarray, m: int) -> np.ndarray:
    """m-th derivative of samples ``y(x)`` on sorted nodes (see derivative_matrix)."""
    return derivative_matrix(x, m) @ np.asarray(y)


def _weighted_sup(x, y, n, m):
    profile = (1 + x**2) ** n * np.abs(derivative(x, y, m))
    return float(profile.max()) if len(profile) else 0.0, profile


def seminorm_estimate(f: SampledFunction, n: int, m: int) -> float:
    """Estimate ``sup_x (1 + x^2)^n |D^m f(x)|`` over the grid nodes."""
    grid = f.grid
    if grid.dim != 1 or grid.axes[0].atoms:
        raise VanHoveError("seminorm_estimate needs a single continuous axis without atoms")
    if n < 0 or m < 0:
        raise VanHoveError("seminorm indices must be non-negative")
    value, _ = _weighted_sup(grid.energy, f.values, n, m)
    return value
