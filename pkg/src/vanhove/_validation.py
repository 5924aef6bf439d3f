"""Exceptions and small input-checking helpers shared across the package."""

from __future__ import annotations

import numpy as np


class VanHoveError(ValueError):
    """Base class for all errors raised by this package."""


class GridMismatchError(VanHoveError):
    """Operands live on different spectral grids."""


class ShapeError(VanHoveError):
    """Sampled values do not match the grid they are attached to."""


class NonDiagonalError(VanHoveError):
    """A diagonal-only (abelian subalgebra) element was required."""


class StateConditionError(VanHoveError):
    """A state violates one of the admissibility conditions.

    ``condition`` holds the condition label (``"2'"``, ``"3'"``, ``"4'"``,
    ``"5'"``) so callers can report which requirement failed.
    """

    def __init__(self, condition: str, message: str):
        super().__init__(f"condition {condition} violated: {message}")
        self.condition = condition


class BandError(VanHoveError):
    """Requested times fall outside the resolvable band of the grid."""


class DegenerateCurveError(VanHoveError):
    """A decay curve has zero reference magnitude."""


class ConfigError(VanHoveError):
    """Scenario configuration does not match the schema."""


def same_grid(a, b) -> None:
    if not a.same_as(b):
        raise GridMismatchError("operands are defined on different grids")


def frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, copy=True)
    arr.setflags(write=False)
    return arr


def as_vector(grid, values, *, dtype=complex, name: str = "values") -> np.ndarray:
    """Return ``values`` as a 1-d array with one entry per grid node.

    Accepts a :class:`~vanhove.grid.SampledFunction`, a scalar (broadcast) or
    an array-like.
    """
    if hasattr(values, "grid") and hasattr(values, "values"):
        same_grid(grid, values.grid)
        values = values.values
    arr = np.asarray(values, dtype=dtype)
    if arr.ndim == 0:
        arr = np.full(grid.size, arr, dtype=dtype)
    if arr.shape != (grid.size,):
        raise ShapeError(f"{name} has shape {arr.shape}, expected ({grid.size},)")
    return arr


def as_kernel(grid, values, *, name: str = "kernel") -> np.ndarray:
    if values is None:
        return np.zeros((grid.size, grid.size), dtype=complex)
    arr = np.asarray(values, dtype=complex)
    if arr.ndim == 0:
        arr = np.full((grid.size, grid.size), arr, dtype=complex)
    if arr.shape != (grid.size, grid.size):
        raise ShapeError(
            f"{name} has shape {arr.shape}, expected ({grid.size}, {grid.size})"
        )
    return arr
