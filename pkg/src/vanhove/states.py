"""Van Hove states ``rho = rho_hat + rho_r`` and their expectation values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._validation import StateConditionError, as_kernel, as_vector, frozen, same_grid
from .algebra import VanHoveElement, identity, multiply, random_element, star
from .grid import SpectralGrid

__all__ = [
    "VanHoveState",
    "ProbeReport",
    "make_state",
    "expectation",
    "trace",
    "positivity_probe",
    "reduce",
    "hermiticity_residual",
    "kernel_min_eigenvalue",
    "weighted_kernel",
    "normalization_residual",
]

TOL = 1e-10
EIG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class VanHoveState:
    """Diagonal density ``diag`` (real) plus regular kernel ``reg``.

    Build through :func:`make_state` to get the admissibility checks; the
    bare constructor only checks shapes.
    """

    grid: SpectralGrid
    diag: np.ndarray
    reg: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        diag = as_vector(self.grid, self.diag, dtype=complex, name="diag")
        object.__setattr__(self, "diag", frozen(diag.real))
        object.__setattr__(self, "reg", frozen(as_kernel(self.grid, self.reg, name="reg")))

    def __call__(self, a: VanHoveElement) -> complex:
        return expectation(self, a)


def weighted_kernel(grid: SpectralGrid, kernel: np.ndarray) -> np.ndarray:
    """``sqrt(w_i) K_ij sqrt(w_j)``: the kernel as an operator on l2(weights)."""
    s = np.sqrt(grid.weights)
    return s[:, None] * kernel * s[None, :]


def hermiticity_residual(kernel: np.ndarray) -> float:
    return float(np.max(np.abs(kernel - kernel.conj().T), initial=0.0))


def kernel_min_eigenvalue(grid: SpectralGrid, kernel: np.ndarray) -> float:
    m = weighted_kernel(grid, kernel)
    m = (m + m.conj().T) / 2
    return float(np.linalg.eigvalsh(m)[0]) if len(m) else 0.0


def make_state(grid: SpectralGrid, diag, reg=None, tol: float = TOL,
               eig_tol: float = EIG_TOL) -> VanHoveState:
    """Validate and build a state.

    Raises :class:`StateConditionError` naming the failed condition:
    ``2'`` (real diagonal), ``4'`` (non-negative diagonal), ``3'``
    (hermitian kernel) or ``5'`` (positive kernel). Normalization is not an
    error; it only sets ``normalized``.
    """
    d = as_vector(grid, diag, name="diag")
    r = as_kernel(grid, reg, name="reg")
    imag = float(np.max(np.abs(d.imag), initial=0.0))
    if imag > tol:
        raise StateConditionError("2'", f"diagonal part is not real (max |Im| = {imag:.3e})")
    low = float(np.min(d.real, initial=0.0))
    if low < -tol:
        raise StateConditionError("4'", f"diagonal part takes negative value {low:.3e}")
    herm = hermiticity_residual(r)
    if herm > tol:
        raise StateConditionError("3'", f"regular part is not hermitian (deviation {herm:.3e})")
    if r.any():
        lam = kernel_min_eigenvalue(grid, r)
        if lam < -eig_tol:
            raise StateConditionError("5'", f"regular kernel has eigenvalue {lam:.3e} < 0")
    total = float(np.dot(grid.weights, d.real))
    return VanHoveState(grid, d.real, r, normalized=abs(total - 1.0) <= tol)


def expectation(rho: VanHoveState, a: VanHoveElement) -> complex:
    """``rho(a) = sum w rho_hat a_hat + sum w_i w_j rho_r(i, j) a_r(j, i)``."""
    same_grid(rho.grid, a.grid)
    w = rho.grid.weights
    diag_part = np.dot(w * rho.diag, a.diag)
    if not rho.reg.any() or not a.reg.any():
        return complex(diag_part)
    reg_part = np.sum(weighted_kernel(rho.grid, rho.reg) * weighted_kernel(rho.grid, a.reg).T)
    return complex(diag_part + reg_part)


def trace(rho: VanHoveState) -> float:
    """``rho(I)``; only the diagonal density contributes."""
    return float(np.dot(rho.grid.weights, rho.diag))


def reduce(rho: VanHoveState) -> VanHoveState:
    """Restriction to the abelian subalgebra: drop the regular kernel."""
    return VanHoveState(rho.grid, rho.diag, None, normalized=rho.normalized)


@dataclass(frozen=True)
class ProbeReport:
    values: np.ndarray
    minimum: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.minimum >= -self.tol


def positivity_probe(rho: VanHoveState, trials: int = 100, seed: int = 0,
                     tol: float = TOL, *, diag: bool = True, reg: bool = True) -> ProbeReport:
    """Evaluate ``rho(b* b)`` on seeded random elements ``b``.

    ``diag``/``reg`` select which parts of ``b`` are randomized.
    """
    rng = np.random.default_rng(seed)
    values = np.empty(trials)
    for k in range(trials):
        b = random_element(rho.grid, rng, diag=diag, reg=reg)
        values[k] = expectation(rho, multiply(star(b), b)).real
    minimum = float(values.min()) if trials else 0.0
    return ProbeReport(values, minimum, tol)


def normalization_residual(rho: VanHoveState) -> float:
    return abs(rho(identity(rho.grid)) - 1.0)
