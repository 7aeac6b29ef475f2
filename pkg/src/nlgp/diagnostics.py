"""Conserved quantities and growth-bound checks.

Conventions: ``<z1, z2> = Re(z1 * conj(z2))``; the momentum density along
axis j is ``<i d_j u, u>``; ``eta = 1 - |u|^2``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from nlgp.dynamics import Background, State
from nlgp.kernels import Kind, Multiplier, classify, quadratic_form

__all__ = [
    "DiagnosticsRecord",
    "BoundKind",
    "BoundReport",
    "BoundNotApplicableError",
    "PhaseUndefinedError",
    "energy",
    "momentum",
    "momentum_untwisted_1d",
    "cutoff",
    "mass",
    "measure",
    "gradient_bound_rhs",
    "check_linear_growth",
    "linear_growth_constant",
    "check_exponential_growth",
    "fit_exponential_rate",
    "check_gradient_bound",
    "conservation_report",
]

BOUND_TOL = 1e-8
GRAD_TOL = 1e-6


class PhaseUndefinedError(ValueError):
    pass


class BoundNotApplicableError(ValueError):
    pass


@dataclass
class DiagnosticsRecord:
    t: float
    e_kinetic: float
    e_potential: float
    e_total: float
    l2_w: float
    h1semi_w: float
    momentum: tuple[float, ...]
    mass_total: float
    max_density_deviation: float
    momentum_untwisted_1d: float | None = None
    mass_windowed: list[tuple[tuple[float, ...], float, float]] = field(default_factory=list)

    @property
    def finite(self) -> bool:
        vals = [self.e_total, self.l2_w, self.h1semi_w, self.mass_total, *self.momentum]
        return all(math.isfinite(v) for v in vals)


def energy(state: State, mult: Multiplier) -> tuple[float, float, float]:
    """(kinetic, potential, total) with E = 1/2 |grad u|^2 + 1/4 (W*eta) eta."""
    if mult.grid != state.grid:
        raise ValueError("multiplier and state live on different grids")
    u = state.u
    kin = 0.5 * state.grid.h1_seminorm(u) ** 2
    eta = 1.0 - np.abs(u) ** 2
    pot = 0.25 * quadratic_form(mult, eta)
    return kin, pot, kin + pot


def momentum(state: State) -> tuple[float, ...]:
    """Generalized momentum q_j = L_j(<i d_j phi, phi>) + 1/2 int <i d_j w, w> + int <i d_j phi, w>.

    The renormalized background term comes from the background catalog.
    With <a, b> = Re(a conj(b)), the plane wave w = eps exp(ix) on phi = 1
    carries q = -eps^2 L / 2.
    """
    grid, bg, w = state.grid, state.background, state.w
    real_w = not np.any(np.imag(w))
    out = []
    for j in range(grid.dim):
        dw = grid.derivative(w, j)
        if real_w:
            # a real field has a real derivative; drop FFT roundoff so that
            # Re(i a b) vanishes exactly for real a, b
            dw = dw.real
        quad = 0.5 * grid.integrate(np.real(1j * dw * np.conj(w)))
        cross = grid.integrate(np.real(1j * bg.grad_phi[j] * np.conj(w)))
        out.append(float(bg.renorm_momentum[j] + quad + cross))
    return tuple(out)


def momentum_untwisted_1d(state: State) -> float:
    """1/2 int <i u', u> - 1/2 (total phase change), reduced to [0, pi)."""
    grid = state.grid
    if grid.dim != 1:
        raise ValueError("untwisted momentum is defined in 1-D only")
    u = state.u
    if np.min(np.abs(u)) < 0.1:
        raise PhaseUndefinedError("|u| drops below 0.1; phase is undefined")
    du = grid.derivative(u, 0)
    p = 0.5 * grid.integrate(np.real(1j * du * np.conj(u)))
    increments = np.angle(np.roll(u, -1) / u)
    winding = round(float(increments.sum()) / (2 * np.pi))
    return float(np.mod(p - 0.5 * 2 * np.pi * winding, np.pi))


def cutoff(s: np.ndarray) -> np.ndarray:
    """Radial cutoff: 1 on [0, 1], 0 on [2, inf), quintic smoothstep between.

    |chi'| <= 15/8. A C^2 unit drop over a unit interval needs |chi''| >= 4,
    so the quintic's 10/sqrt(3) is accepted for the second derivative.
    """
    t = np.clip(np.asarray(s, dtype=float) - 1.0, 0.0, 1.0)
    return 1.0 - t**3 * (10 - 15 * t + 6 * t**2)


def mass(state: State, windows: Sequence[tuple[Sequence[float], float]] = ()):
    """Total mass int eta and windowed masses int eta chi(|x-a|/R)."""
    grid = state.grid
    eta = 1.0 - np.abs(state.u) ** 2
    total = float(grid.integrate(eta))
    half = min(grid.L) / 2
    out = []
    for center, R in windows:
        center = tuple(float(c) for c in np.atleast_1d(center))
        if len(center) != grid.dim:
            raise ValueError(f"window centre {center} has wrong dimension")
        if not R > 0 or 2 * R > half:
            raise ValueError(f"window radius R={R} needs 0 < 2R <= {half}")
        chi = cutoff(grid.periodic_distance(center) / R)
        out.append((center, float(R), float(grid.integrate(eta * chi))))
    return total, out


def measure(state: State, mult: Multiplier, windows=()) -> DiagnosticsRecord:
    kin, pot, tot = energy(state, mult)
    grid = state.grid
    total, windowed = mass(state, windows)
    untwisted = None
    if grid.dim == 1:
        try:
            untwisted = momentum_untwisted_1d(state)
        except PhaseUndefinedError:
            untwisted = None
    return DiagnosticsRecord(
        t=float(state.time),
        e_kinetic=kin,
        e_potential=pot,
        e_total=tot,
        l2_w=grid.l2(state.w),
        h1semi_w=grid.h1_seminorm(state.w),
        momentum=momentum(state),
        mass_total=total,
        max_density_deviation=float(np.max(np.abs(1.0 - np.abs(state.u) ** 2))),
        momentum_untwisted_1d=untwisted,
        mass_windowed=windowed,
    )


# -- bounds --------------------------------------------------------------


class BoundKind(enum.Enum):
    LINEAR_GROWTH = "LinearGrowth"
    EXPONENTIAL_GROWTH = "ExponentialGrowth"
    GRADIENT = "GradientBound"


@dataclass
class BoundReport:
    kind: BoundKind
    constant_C: float
    satisfied: bool
    worst_margin: float
    times_checked: int
    worst_time: float | None = None
    tolerance: float = BOUND_TOL
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "constant_C": self.constant_C,
            "satisfied": self.satisfied,
            "worst_margin": self.worst_margin,
            "worst_time": self.worst_time,
            "times_checked": self.times_checked,
            "tolerance": self.tolerance,
            **self.details,
        }


def _report(kind, C, margins, times, tol, **details) -> BoundReport:
    margins = np.asarray(margins, dtype=float)
    i = int(np.argmin(margins))
    worst = float(margins[i])
    return BoundReport(kind, float(C), worst >= -tol, worst, len(margins), float(times[i]), tol, details)


def _sq_norm(grid, values) -> float:
    return grid.l2(values) ** 2


def linear_growth_constant(e0: float, mult: Multiplier, background: Background) -> float:
    """||lap phi||_2 + ||W||_{2,2} ||phi||_inf sqrt(4 E0 / sigma)."""
    cls = classify(mult)
    if cls.kind is not Kind.COERCIVE:
        raise BoundNotApplicableError(f"linear growth bound needs a coercive kernel, got {cls}")
    grid = mult.grid
    lap = grid.l2(background.lap_phi)
    sup_phi = float(np.max(np.abs(background.phi)))
    return lap + mult.max_abs * sup_phi * math.sqrt(4 * max(e0, 0.0) / cls.min_value)


def check_linear_growth(records, e0: float, mult: Multiplier, background: Background) -> BoundReport:
    if not records:
        raise ValueError("empty trajectory")
    C = linear_growth_constant(e0, mult, background)
    t0 = records[0].t
    base = records[0].l2_w
    times = [r.t for r in records]
    margins = [C * abs(r.t - t0) + base - r.l2_w for r in records]
    return _report(BoundKind.LINEAR_GROWTH, C, margins, times, BOUND_TOL)


def check_exponential_growth(records, c1: float, c2: float) -> BoundReport:
    if not records:
        raise ValueError("empty trajectory")
    t0 = records[0].t
    base = 1.0 + records[0].l2_w
    times = [r.t for r in records]
    margins = [c1 * math.exp(c2 * abs(r.t - t0)) * base - r.l2_w for r in records]
    return _report(BoundKind.EXPONENTIAL_GROWTH, c1, margins, times, BOUND_TOL, c2=float(c2))


def fit_exponential_rate(records, floor: float = 1e-3) -> float:
    """Largest finite-difference slope of log ||w||_2, at least ``floor``."""
    ts = np.array([r.t for r in records])
    ls = np.array([r.l2_w for r in records])
    ok = ls > 0
    ts, ls = ts[ok], np.log(ls[ok])
    if len(ts) < 2:
        return floor
    slopes = np.diff(ls) / np.diff(ts)
    return float(max(slopes.max(), floor))


def gradient_bound_rhs(e0: float, state: State) -> float:
    """4 E0 + 2 ||grad phi||_2^2."""
    grid = state.grid
    grad_sq = sum(_sq_norm(grid, g) for g in state.background.grad_phi)
    return 4 * e0 + 2 * grad_sq


def check_gradient_bound(records, e0: float, state: State) -> BoundReport:
    rhs = gradient_bound_rhs(e0, state)
    times = [r.t for r in records]
    margins = [rhs - r.h1semi_w**2 for r in records]
    return _report(BoundKind.GRADIENT, rhs, margins, times, GRAD_TOL)


def _drift(values) -> float:
    values = np.asarray(values, dtype=float)
    ref = values[0]
    return float(np.max(np.abs(values - ref)) / max(abs(ref), 1e-12))


def conservation_report(records) -> dict[str, float]:
    """Max relative drift from the first record for energy, momentum, total mass."""
    if len(records) < 2:
        raise ValueError("need at least two records")
    out = {"energy": _drift([r.e_total for r in records])}
    for j in range(len(records[0].momentum)):
        out[f"momentum_{j}"] = _drift([r.momentum[j] for r in records])
    out["mass_total"] = _drift([r.mass_total for r in records])
    return out
