"""GNS space of the diagonal density and the final pointer basis.

On the abelian subalgebra the diagonal density defines the inner product
``(a, b) = rho_hat(conj(a) b) = sum_i sigma_i conj(a_i) b_i`` with
``sigma_i = rho_hat_i w_i``. Nodes where ``sigma`` vanishes form the null
space and are quotiented out; what remains is a finite weighted l2 space on
which every diagonal symbol acts by multiplication. The indicator vectors of
the support nodes are the pointer basis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import NonDiagonalError, VanHoveError, as_vector, frozen, same_grid
from .algebra import VanHoveElement
from .evolution import asymptotic_expectation
from .grid import SampledFunction, SpectralGrid
from .states import VanHoveState

__all__ = [
    "PointerSpace",
    "PointerOperator",
    "PointerBasis",
    "gns_inner_product",
    "build_pointer_space",
    "pointer_representation",
    "verify_gns_identity",
    "pointer_basis",
    "spectral_resolution_residual",
    "full_diagonal_check",
    "NULL_TOL",
]

NULL_TOL = 1e-14


def _density(rho_hat, grid: SpectralGrid | None = None) -> tuple[SpectralGrid, np.ndarray]:
    if isinstance(rho_hat, VanHoveState):
        if grid is not None:
            same_grid(grid, rho_hat.grid)
        return rho_hat.grid, np.asarray(rho_hat.diag)
    if isinstance(rho_hat, SampledFunction):
        grid = grid or rho_hat.grid
        same_grid(grid, rho_hat.grid)
    if grid is None:
        raise VanHoveError("a grid is needed to interpret a raw density array")
    values = as_vector(grid, rho_hat)
    if np.any(np.abs(values.imag) > 0):
        raise VanHoveError("diagonal density must be real")
    return grid, values.real


def _symbol(a: VanHoveElement) -> np.ndarray:
    if not a.is_diagonal:
        raise NonDiagonalError("pointer construction is defined on diagonal elements only")
    return a.diag


def gns_inner_product(a: VanHoveElement, b: VanHoveElement, rho_hat) -> complex:
    """``(a, b) = rho_hat(a* b) = sum_i w_i rho_hat_i conj(a_i) b_i``."""
    same_grid(a.grid, b.grid)
    grid, density = _density(rho_hat, a.grid)
    return complex(np.sum(grid.weights * density * _symbol(a).conj() * _symbol(b)))


@dataclass(frozen=True, eq=False)
class PointerSpace:
    grid: SpectralGrid
    sigma: np.ndarray
    density: np.ndarray
    support: np.ndarray
    null: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.support)

    def project(self, values) -> np.ndarray:
        """Class of a sampled function: its values on the support nodes."""
        return as_vector(self.grid, values)[self.support]

    def inner(self, u: np.ndarray, v: np.ndarray) -> complex:
        """Inner product of two support vectors."""
        return complex(np.sum(self.sigma[self.support] * np.conj(u) * v))

    @property
    def cyclic_vector(self) -> np.ndarray:
        """The class of the identity."""
        return np.ones(self.dim, dtype=complex)


def build_pointer_space(rho_hat, grid: SpectralGrid | None = None,
                        null_tol: float | None = None) -> PointerSpace:
    """Weights ``sigma_i = rho_hat_i w_i`` and the support / null partition.

    Nodes with ``rho_hat_i <= null_tol`` join the null space. The default
    floor is ``NULL_TOL * max(rho_hat)``.
    """
    grid, density = _density(rho_hat, grid)
    if np.any(density < 0):
        raise VanHoveError("diagonal density must be non-negative")
    peak = float(density.max(initial=0.0))
    if null_tol is None:
        null_tol = NULL_TOL * peak
    mask = density > null_tol
    if not mask.any():
        raise VanHoveError("diagonal density vanishes everywhere: the GNS space is trivial")
    sigma = density * grid.weights
    return PointerSpace(
        grid, frozen(sigma), frozen(density),
        frozen(np.flatnonzero(mask)), frozen(np.flatnonzero(~mask)),
    )


@dataclass(frozen=True, eq=False)
class PointerOperator:
    """Multiplication by a diagonal symbol, restricted to the support."""

    space: PointerSpace
    values: np.ndarray

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(self.values)

    def __call__(self, v: np.ndarray) -> np.ndarray:
        return self.values * v

    def __matmul__(self, other: "PointerOperator") -> "PointerOperator":
        return PointerOperator(self.space, self.values * other.values)

    def adjoint(self) -> "PointerOperator":
        # sigma-weights are real, so the weighted adjoint of a multiplication is conj
        return PointerOperator(self.space, self.values.conj())


def pointer_representation(a: VanHoveElement, space: PointerSpace) -> PointerOperator:
    """Left multiplication ``[b] -> [a b]`` on the GNS space."""
    same_grid(a.grid, space.grid)
    return PointerOperator(space, frozen(_symbol(a)[space.support]))


def verify_gns_identity(a: VanHoveElement, rho_hat, space: PointerSpace) -> float:
    """Relative residual of ``(R|pi(a)|R) = rho_hat(a)`` with ``R = [I]``."""
    grid, density = _density(rho_hat, space.grid)
    r = space.cyclic_vector
    lhs = space.inner(r, pointer_representation(a, space)(r))
    rhs = complex(np.sum(grid.weights * density * _symbol(a)))
    return abs(lhs - rhs) / max(abs(rhs), np.finfo(float).tiny)


@dataclass(frozen=True, eq=False)
class PointerBasis:
    """Support nodes in lexicographic order with their weights."""

    space: PointerSpace
    indices: np.ndarray
    coordinates: np.ndarray
    sigma: np.ndarray
    rho_hat: np.ndarray

    def __len__(self):
        return len(self.indices)

    def operator_matrix(self, a: VanHoveElement) -> np.ndarray:
        """Matrix of ``pi(a)`` in this basis."""
        # column k is pi(a) applied to the k-th indicator vector
        return np.eye(len(self)) * _symbol(a)[self.indices][:, None]


def pointer_basis(space: PointerSpace) -> PointerBasis:
    if space.dim == 0:
        raise VanHoveError("trivial pointer space")
    coords = space.grid.nodes[space.support]
    order = np.lexsort(coords.T[::-1])
    idx = space.support[order]
    return PointerBasis(
        space, frozen(idx), frozen(space.grid.nodes[idx]),
        frozen(space.sigma[idx]), frozen(space.density[idx]),
    )


def spectral_resolution_residual(a: VanHoveElement, b: VanHoveElement,
                                 basis: PointerBasis) -> float:
    """Relative gap between ``sum_Theta sigma conj(a) b`` and ``(a, b)``."""
    resummed = complex(np.sum(basis.sigma * _symbol(a)[basis.indices].conj()
                              * _symbol(b)[basis.indices]))
    direct = gns_inner_product(a, b, basis.space.density)
    scale = max(abs(direct), np.finfo(float).tiny)
    return abs(resummed - direct) / scale


def full_diagonal_check(rho: VanHoveState, a: VanHoveElement, space: PointerSpace) -> float:
    """Relative gap between ``rho_hat(a_hat)`` and the pointer-basis sum.

    The right-hand side is ``sum_Theta sigma(Theta) a_hat(Theta)``: the
    decohered state read as a diagonal measure on the pointer basis. The
    regular part of ``a`` does not enter.
    """
    basis = pointer_basis(space)
    lhs = asymptotic_expectation(rho, a)
    rhs = complex(np.sum(basis.sigma * a.diag[basis.indices]))
    return abs(lhs - rhs) / max(abs(lhs), np.finfo(float).tiny)
