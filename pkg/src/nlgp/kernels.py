"""Interaction kernels as real, even Fourier multipliers.

Every kernel is described by a small frozen dataclass and discretized by
sampling its Fourier transform ``W_hat(xi) = int W(x) exp(-i x.xi) dx`` on
the grid's wavenumber lattice. Convolution is then a pointwise product in
spectral space, which is exact for the periodized operator.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Union

import numpy as np
from scipy import integrate, special

from nlgp.grid import Field, Grid, Space

__all__ = [
    "Delta",
    "BesselYukawa",
    "SoftCore",
    "Dipolar",
    "LaguerreGaussian",
    "BerloffRoton",
    "CustomMultiplier",
    "Scaled",
    "KernelSpec",
    "Multiplier",
    "Kind",
    "Classification",
    "NotNormalizableError",
    "sample_multiplier",
    "classify",
    "convolve",
    "quadratic_form",
    "normalize_physical",
    "zero_frequency_value",
    "radial_fourier_transform",
    "laguerre_gaussian_profile",
    "berloff_profile",
    "BERLOFF_REFERENCE",
]

QUAD_RTOL = 1e-10


@dataclass(frozen=True)
class Delta:
    """Local contact interaction, W_hat = 1."""


@dataclass(frozen=True)
class BesselYukawa:
    """W_hat = 1/(1 + eps^2 |xi|^2): Macdonald kernel in 2-D, Yukawa in 3-D."""

    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError(f"BesselYukawa eps must be positive, got {self.eps}")


@dataclass(frozen=True)
class SoftCore:
    """Indicator of the ball of radius ``a``."""

    a: float

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"SoftCore radius must be positive, got {self.a}")


@dataclass(frozen=True)
class Dipolar:
    """alpha1 * delta + alpha2 * K with K = (x1^2 + x2^2 - 2 x3^2)/|x|^5 (3-D only)."""

    alpha1: float
    alpha2: float


@dataclass(frozen=True)
class LaguerreGaussian:
    """exp(-r^2) * L_m^{N/2}(r^2); sign-changing but positive definite."""

    m: int

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 0:
            raise ValueError(f"LaguerreGaussian order must be a nonnegative integer, got {self.m}")


@dataclass(frozen=True)
class BerloffRoton:
    """(alpha + beta A^2 r^2 + gamma A^4 r^4) exp(-A^2 r^2) (3-D only)."""

    A: float
    alpha: float
    beta: float
    gamma: float

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"BerloffRoton A must be positive, got {self.A}")


@dataclass(frozen=True)
class CustomMultiplier:
    """User-supplied symbol.

    ``func`` receives |xi| when ``radial`` is true, otherwise the tuple of
    broadcast wavenumber arrays. It must be real and even in xi.
    """

    func: Callable
    radial: bool = True
    zero_value: float | None = None


@dataclass(frozen=True)
class Scaled:
    """``factor`` times another kernel."""

    base: "KernelSpec"
    factor: float


KernelSpec = Union[
    Delta, BesselYukawa, SoftCore, Dipolar, LaguerreGaussian, BerloffRoton, CustomMultiplier, Scaled
]

# Default Berloff-type parameters: W_hat(0) > 0 with a negative band near
# |xi| in (0.73, 2.73). Checked by the test suite, not assumed.
BERLOFF_REFERENCE = BerloffRoton(A=1.0, alpha=1.0, beta=-3.0, gamma=1.0)


@dataclass(frozen=True, eq=False)
class Multiplier:
    grid: Grid
    values: np.ndarray
    min_value: float
    max_abs: float

    @classmethod
    def from_values(cls, grid: Grid, values: np.ndarray) -> "Multiplier":
        values = np.asarray(values, dtype=float).reshape(grid.shape)
        values.setflags(write=False)
        return cls(grid, values, float(values.min()), float(np.abs(values).max()))

    @property
    def zero_value(self) -> float:
        return float(self.values.flat[0])


# -- radial profiles and transforms -------------------------------------


def laguerre_gaussian_profile(m: int, dim: int) -> Callable[[float], float]:
    coeffs = [
        (-1) ** k / math.factorial(k) * special.binom(m + dim / 2, m - k) for k in range(m + 1)
    ]

    def profile(r):
        r2 = r * r
        return np.exp(-r2) * sum(c * r2**k for k, c in enumerate(coeffs))

    return profile


def berloff_profile(spec: BerloffRoton) -> Callable[[float], float]:
    A2 = spec.A**2

    def profile(r):
        s = A2 * r * r
        return (spec.alpha + spec.beta * s + spec.gamma * s * s) * np.exp(-s)

    return profile


def _quad(func, a, b, **kw) -> float:
    # full_output silences scipy's roundoff warning, which fires in the far
    # tail where the transform is below 1e-14 and only the absolute error
    # matters; a genuinely poor estimate is still reported
    val, err, *_ = integrate.quad(func, a, b, full_output=1, epsrel=QUAD_RTOL, epsabs=1e-14, limit=500, **kw)
    if err > max(QUAD_RTOL * abs(val), 1e-12):
        warnings.warn(f"radial quadrature error estimate {err:.2e} for value {val:.6e}", RuntimeWarning)
    return val


def radial_fourier_transform(profile, kappa: float, dim: int, r_max: float) -> float:
    """Fourier transform of a radial function at |xi| = kappa.

    ``profile`` must be negligible beyond ``r_max``. Adaptive quadrature with
    relative tolerance 1e-10.
    """
    if dim == 1:
        if kappa == 0:
            return 2 * _quad(profile, 0, r_max)
        return 2 * _quad(profile, 0, r_max, weight="cos", wvar=kappa)
    if dim == 2:
        return 2 * np.pi * _quad(lambda r: profile(r) * special.j0(kappa * r) * r, 0, r_max)
    if kappa == 0:
        return 4 * np.pi * _quad(lambda r: profile(r) * r * r, 0, r_max)
    return 4 * np.pi * _quad(lambda r: profile(r) * r, 0, r_max, weight="sin", wvar=kappa) / kappa


@lru_cache(maxsize=64)
def _quadrature_multiplier(spec, grid: Grid) -> np.ndarray:
    # one quadrature per distinct |xi|^2; identical |xi|^2 share a value so
    # the lattice evenness is exact
    if isinstance(spec, LaguerreGaussian):
        profile = laguerre_gaussian_profile(spec.m, grid.dim)
        r_max = 12.0
    else:
        profile = berloff_profile(spec)
        r_max = 12.0 / spec.A
    distinct, inverse = np.unique(grid.ksq, return_inverse=True)
    vals = np.array([radial_fourier_transform(profile, math.sqrt(q), grid.dim, r_max) for q in distinct])
    out = vals[inverse].reshape(grid.shape)
    out.setflags(write=False)
    return out


def _softcore_symbol(a: float, dim: int, kappa: np.ndarray) -> np.ndarray:
    out = np.empty_like(kappa)
    zero = kappa == 0
    kz = np.where(zero, 1.0, kappa)
    if dim == 1:
        out[:] = 2 * np.sin(a * kz) / kz
        out[zero] = 2 * a
    elif dim == 2:
        out[:] = 2 * np.pi * a * special.j1(a * kz) / kz
        out[zero] = np.pi * a**2
    else:
        out[:] = 4 * np.pi * (np.sin(a * kz) - a * kz * np.cos(a * kz)) / kz**3
        out[zero] = 4 / 3 * np.pi * a**3
    return out


def _symbol(spec: KernelSpec, grid: Grid) -> np.ndarray:
    if isinstance(spec, Delta):
        return np.ones(grid.shape)
    if isinstance(spec, BesselYukawa):
        return 1.0 / (1.0 + spec.eps**2 * grid.ksq)
    if isinstance(spec, SoftCore):
        return _softcore_symbol(spec.a, grid.dim, np.sqrt(grid.ksq))
    if isinstance(spec, Dipolar):
        if grid.dim != 3:
            raise ValueError("Dipolar kernel requires a 3-D grid")
        ksq = grid.ksq
        zero = ksq == 0
        angular = 3 * grid.k[2] ** 2 / np.where(zero, 1.0, ksq) - 1
        out = spec.alpha1 + spec.alpha2 * (4 * np.pi / 3) * angular
        out[zero] = spec.alpha1
        return out
    if isinstance(spec, LaguerreGaussian):
        return np.array(_quadrature_multiplier(spec, grid))
    if isinstance(spec, BerloffRoton):
        if grid.dim != 3:
            raise ValueError("BerloffRoton kernel requires a 3-D grid")
        return np.array(_quadrature_multiplier(spec, grid))
    if isinstance(spec, CustomMultiplier):
        if spec.radial:
            out = np.asarray(spec.func(np.sqrt(grid.ksq)), dtype=float)
        else:
            out = np.asarray(spec.func(grid.k), dtype=float)
        out = np.broadcast_to(out, grid.shape).copy()
        if spec.zero_value is not None:
            out.flat[0] = spec.zero_value
        return out
    if isinstance(spec, Scaled):
        return spec.factor * _symbol(spec.base, grid)
    raise TypeError(f"unknown kernel spec {spec!r}")


def sample_multiplier(spec: KernelSpec, grid: Grid) -> Multiplier:
    """Sample W_hat on the grid's wavenumber lattice."""
    return Multiplier.from_values(grid, _symbol(spec, grid))


# -- classification ------------------------------------------------------


class Kind(enum.Enum):
    COERCIVE = "Coercive"
    POSITIVE_SEMIDEFINITE = "PositiveSemidefinite"
    INDEFINITE = "Indefinite"


@dataclass(frozen=True)
class Classification:
    kind: Kind
    min_value: float

    @property
    def sigma_min(self) -> float | None:
        return self.min_value if self.kind is Kind.COERCIVE else None

    @property
    def positive_definite(self) -> bool:
        return self.kind is not Kind.INDEFINITE

    def __str__(self) -> str:
        if self.kind is Kind.COERCIVE:
            return f"Coercive(sigma_min={self.min_value:.12g})"
        if self.kind is Kind.INDEFINITE:
            return f"Indefinite(min_value={self.min_value:.12g})"
        return "PositiveSemidefinite"


def classify(mult: Multiplier, tol: float = 1e-12) -> Classification:
    m = mult.min_value
    if m > tol:
        return Classification(Kind.COERCIVE, m)
    if m < -tol:
        return Classification(Kind.INDEFINITE, m)
    return Classification(Kind.POSITIVE_SEMIDEFINITE, m)


# -- operators -----------------------------------------------------------


def _convolve_array(mult: Multiplier, values: np.ndarray) -> np.ndarray:
    out = mult.grid.apply_multiplier(mult.values, values)
    if np.isrealobj(values):
        return out.real
    return out


def convolve(mult: Multiplier, field: Field) -> Field:
    """W * f. Real input gives real output (imaginary roundoff dropped)."""
    if field.grid != mult.grid:
        raise ValueError("multiplier and field live on different grids")
    if field.space is not Space.PHYSICAL:
        raise ValueError("convolve expects a physical field")
    return Field(field.grid, _convolve_array(mult, field.values), Space.PHYSICAL)


def quadratic_form(mult: Multiplier, field: Field | np.ndarray) -> float:
    """int (W*f) f dx for real f."""
    values = field.values if isinstance(field, Field) else np.asarray(field)
    if np.iscomplexobj(values):
        if np.max(np.abs(values.imag)) > 0:
            raise ValueError("quadratic_form needs a real-valued field")
        values = values.real
    return float(mult.grid.integrate(_convolve_array(mult, values) * values))


class NotNormalizableError(ValueError):
    pass


def zero_frequency_value(spec: KernelSpec, grid: Grid | None = None) -> float:
    """W_hat(0), i.e. W*1. For Dipolar the principal-value part contributes 0."""
    if isinstance(spec, Delta):
        return 1.0
    if isinstance(spec, BesselYukawa):
        return 1.0
    if isinstance(spec, SoftCore):
        if grid is None:
            raise ValueError("SoftCore zero-frequency value depends on the dimension; pass a grid")
        return float(_softcore_symbol(spec.a, grid.dim, np.zeros(1))[0])
    if isinstance(spec, Dipolar):
        return float(spec.alpha1)
    if isinstance(spec, Scaled):
        return spec.factor * zero_frequency_value(spec.base, grid)
    if grid is None:
        raise ValueError(f"{type(spec).__name__} zero-frequency value needs a grid")
    return float(_symbol(spec, grid).flat[0])


def normalize_physical(spec: KernelSpec, grid: Grid | None = None) -> tuple[KernelSpec, float]:
    """Return ``(spec scaled to W_hat(0) = 1, lambda^2 = 1/W_hat(0))``."""
    w0 = zero_frequency_value(spec, grid)
    if not w0 > 0:
        raise NotNormalizableError(f"kernel is not normalizable: W*1 = {w0:.6g} <= 0")
    lam2 = 1.0 / w0
    if w0 == 1.0:
        return spec, lam2
    return Scaled(spec, lam2), lam2
