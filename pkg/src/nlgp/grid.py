"""
Periodic box discretization of R^N.

Conventions
-----------
Points  x_j = -L/2 + j*h  on each axis (box centred at the origin).
Wavenumbers per axis  2*pi*k/L  in FFT order  0, 1, ..., n/2-1, -n/2, ..., -1.

The forward transform carries the volume element so that continuum
formulas transcribe without extra constants::

    f_hat(xi_k) = h * sum_j f_j exp(-i xi_k . x_j)
    f_j         = (1/V) * sum_k f_hat(xi_k) exp(+i xi_k . x_j)

and the discrete Parseval identity reads
``h * sum |f|^2 == (1/V) * sum |f_hat|^2``.
"""

from __future__ import annotations

import enum
import os
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft

__all__ = [
    "Grid",
    "Field",
    "Space",
    "make_grid",
    "forward_transform",
    "inverse_transform",
    "norm_l2",
    "seminorm_h1",
    "norm_linf",
]


def fft_workers() -> int:
    """Thread count for FFTs, from ``NLGP_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("NLGP_THREADS", "1")))
    except ValueError:
        return 1


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class Grid:
    """Immutable uniform periodic grid. Build with :func:`make_grid`."""

    dim: int
    n: tuple[int, ...]
    L: tuple[float, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(length / pts for length, pts in zip(self.L, self.n))

    @property
    def volume_element(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.L))

    @property
    def total_points(self) -> int:
        return int(np.prod(self.n))

    @cached_property
    def axes(self) -> tuple[np.ndarray, ...]:
        """1-D coordinate arrays per axis."""
        return tuple(
            -length / 2 + np.arange(pts) * (length / pts)
            for length, pts in zip(self.L, self.n)
        )

    @cached_property
    def wavenumbers(self) -> tuple[np.ndarray, ...]:
        """1-D wavenumber arrays per axis, FFT order."""
        return tuple(
            2 * np.pi * np.fft.fftfreq(pts, d=length / pts)
            for length, pts in zip(self.L, self.n)
        )

    @cached_property
    def x(self) -> tuple[np.ndarray, ...]:
        """Broadcast coordinate arrays (``ij`` indexing)."""
        return tuple(np.meshgrid(*self.axes, indexing="ij"))

    @cached_property
    def k(self) -> tuple[np.ndarray, ...]:
        """Broadcast wavenumber arrays (``ij`` indexing)."""
        return tuple(np.meshgrid(*self.wavenumbers, indexing="ij"))

    @cached_property
    def ksq(self) -> np.ndarray:
        return sum(ki**2 for ki in self.k)

    @cached_property
    def _origin_phase(self) -> np.ndarray:
        # exp(-i xi . x_0) with x_0 the first grid point on every axis
        x0 = [ax[0] for ax in self.axes]
        return np.exp(-1j * sum(ki * x0i for ki, x0i in zip(self.k, x0)))

    # -- array-level helpers used by the solver and diagnostics ----------

    def fft(self, values: np.ndarray) -> np.ndarray:
        """Continuum-normalized forward transform of a raw array."""
        raw = scipy.fft.fftn(values, workers=fft_workers())
        return self.volume_element * raw * self._origin_phase

    def ifft(self, values: np.ndarray) -> np.ndarray:
        raw = scipy.fft.ifftn(values / self._origin_phase, workers=fft_workers())
        return raw / self.volume_element

    def apply_multiplier(self, symbol: np.ndarray, values: np.ndarray) -> np.ndarray:
        """Apply a Fourier multiplier; normalization and phase cancel."""
        workers = fft_workers()
        return scipy.fft.ifftn(symbol * scipy.fft.fftn(values, workers=workers), workers=workers)

    def derivative(self, values: np.ndarray, axis: int) -> np.ndarray:
        return self.apply_multiplier(1j * self.k[axis], values)

    def gradient(self, values: np.ndarray) -> list[np.ndarray]:
        return [self.derivative(values, ax) for ax in range(self.dim)]

    def laplacian(self, values: np.ndarray) -> np.ndarray:
        return self.apply_multiplier(-self.ksq, values)

    def integrate(self, values: np.ndarray) -> float | complex:
        return self.volume_element * values.sum()

    def l2(self, values: np.ndarray) -> float:
        return float(np.sqrt(self.volume_element * np.sum(np.abs(values) ** 2)))

    def h1_seminorm(self, values: np.ndarray) -> float:
        f_hat = self.fft(values)
        return float(np.sqrt(np.sum(self.ksq * np.abs(f_hat) ** 2) / self.volume))

    def periodic_distance(self, center) -> np.ndarray:
        """Minimum-image Euclidean distance from ``center`` to every point."""
        total = np.zeros(self.shape)
        for xi, ci, length in zip(self.x, center, self.L):
            d = np.mod(xi - ci + length / 2, length) - length / 2
            total = total + d**2
        return np.sqrt(total)


def make_grid(dim: int, points_per_axis, length_per_axis) -> Grid:
    """Create a periodic grid.

    Raises ``ValueError`` for dimensions outside {1, 2, 3}, axis sizes that
    are not powers of two >= 8, or nonpositive lengths.
    """
    if dim not in (1, 2, 3):
        raise ValueError(f"dim must be 1, 2 or 3, got {dim}")
    n = tuple(int(v) for v in points_per_axis)
    L = tuple(float(v) for v in length_per_axis)
    if len(n) != dim or len(L) != dim:
        raise ValueError(f"expected {dim} sizes and lengths, got {len(n)} and {len(L)}")
    for pts in n:
        if not _is_power_of_two(pts) or pts < 8:
            raise ValueError(f"points per axis must be a power of two >= 8, got {pts}")
    for length in L:
        if not length > 0:
            raise ValueError(f"box lengths must be positive, got {length}")
    return Grid(dim, n, L)


class Space(enum.Enum):
    PHYSICAL = "physical"
    SPECTRAL = "spectral"


@dataclass(frozen=True, eq=False)
class Field:
    """Samples of a complex function on a grid, in one of the two spaces."""

    grid: Grid
    values: np.ndarray
    space: Space = Space.PHYSICAL

    def __post_init__(self):
        values = np.asarray(self.values)
        if values.size != self.grid.total_points:
            raise ValueError(
                f"field has {values.size} values, grid has {self.grid.total_points} points"
            )
        object.__setattr__(self, "values", values.reshape(self.grid.shape))


def _require(field: Field, space: Space) -> None:
    if field.space is not space:
        raise ValueError(f"expected a {space.value} field, got {field.space.value}")


def forward_transform(field: Field) -> Field:
    _require(field, Space.PHYSICAL)
    return Field(field.grid, field.grid.fft(field.values), Space.SPECTRAL)


def inverse_transform(field: Field) -> Field:
    _require(field, Space.SPECTRAL)
    return Field(field.grid, field.grid.ifft(field.values), Space.PHYSICAL)


def norm_l2(field: Field) -> float:
    _require(field, Space.PHYSICAL)
    return field.grid.l2(field.values)


def seminorm_h1(field: Field) -> float:
    """sqrt(sum_j ||d_j f||^2), computed with the |xi|^2 symbol."""
    _require(field, Space.PHYSICAL)
    return field.grid.h1_seminorm(field.values)


def norm_linf(field: Field) -> float:
    _require(field, Space.PHYSICAL)
    return float(np.max(np.abs(field.values)))
