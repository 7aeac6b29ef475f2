"""Backgrounds, initial perturbations and Strang-split time stepping.

The unknown is ``u = phi + w`` with a fixed background ``phi`` (|phi| -> 1
away from localized structures) and a perturbation ``w``. One step of
size ``dt`` is the symmetric composition

    N(dt/2) . L(dt) . N(dt/2)

of the two exact subflows

    N(s): u <- u * exp(i s V),   V = W * (1 - |u|^2)   (|u| is frozen)
    L(s): u_hat <- u_hat * exp(-i |xi|^2 s)

so each step is exactly reversible: ``step(-dt) . step(dt) = id``.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from nlgp.grid import Grid, make_grid
from nlgp.kernels import BesselYukawa, Delta, Multiplier, sample_multiplier

__all__ = [
    "ConstantOne",
    "BlackSolitonPair",
    "FromFile",
    "Background",
    "State",
    "IntegratorConfig",
    "BlowUpError",
    "Trajectory",
    "make_background",
    "make_state",
    "gaussian_bump",
    "random_smooth_field",
    "step_strang",
    "nonlinear_substep",
    "linear_substep",
    "evolve",
    "run_delta_limit",
    "h1_distance",
    "read_field_file",
    "write_field_file",
    "FIELD_FILE_MAGIC",
]

SQRT2 = math.sqrt(2.0)
FIELD_FILE_MAGIC = "# nlgp-field v1"


# -- backgrounds ---------------------------------------------------------


@dataclass(frozen=True)
class ConstantOne:
    pass


@dataclass(frozen=True)
class BlackSolitonPair:
    """tanh((x-c1)/sqrt2) * (-tanh((x-c2)/sqrt2)), 1-D only."""

    c1: float
    c2: float


@dataclass(frozen=True)
class FromFile:
    path: str


@dataclass(frozen=True, eq=False)
class Background:
    phi: np.ndarray
    grad_phi: tuple[np.ndarray, ...]
    lap_phi: np.ndarray
    renorm_momentum: tuple[float, ...]


def _black_pair(grid: Grid, c1: float, c2: float) -> Background:
    x = grid.x[0]
    a = np.tanh((x - c1) / SQRT2)
    b = -np.tanh((x - c2) / SQRT2)
    # tanh(y/sqrt2) solves f'' + f(1 - f^2) = 0, so f'' = -f(1 - f^2)
    da = (1 - a**2) / SQRT2
    db = -(1 - b**2) / SQRT2
    dda = -a * (1 - a**2)
    ddb = -b * (1 - b**2)
    phi = a * b
    return Background(
        phi=phi.astype(complex),
        grad_phi=((da * b + a * db).astype(complex),),
        lap_phi=(dda * b + 2 * da * db + a * ddb).astype(complex),
        renorm_momentum=(0.0,),
    )


def _spectral_tail(grid: Grid, values: np.ndarray) -> float:
    """Largest |f_hat| in the top eighth of the band, relative to the largest overall."""
    f_hat = np.abs(np.fft.fftn(values))
    peak = f_hat.max()
    if peak == 0:
        return 0.0
    band = np.zeros(grid.shape, dtype=bool)
    for ax, (kax, n) in enumerate(zip(grid.wavenumbers, grid.n)):
        kmax = np.abs(kax).max()
        sel = np.abs(kax) > 0.75 * kmax
        idx = [np.newaxis] * grid.dim
        idx[ax] = slice(None)
        band |= sel[tuple(idx)]
    return float(f_hat[band].max() / peak)


def make_background(spec, grid: Grid) -> Background:
    """Build phi with its gradient, Laplacian and momentum renormalization constants."""
    if isinstance(spec, ConstantOne):
        zero = np.zeros(grid.shape, dtype=complex)
        return Background(
            phi=np.ones(grid.shape, dtype=complex),
            grad_phi=tuple(zero.copy() for _ in range(grid.dim)),
            lap_phi=zero,
            renorm_momentum=(0.0,) * grid.dim,
        )
    if isinstance(spec, BlackSolitonPair):
        if grid.dim != 1:
            raise ValueError("BlackSolitonPair is only defined on 1-D grids")
        lo, hi = -grid.L[0] / 2, grid.L[0] / 2
        if not spec.c1 < spec.c2:
            raise ValueError(f"need c1 < c2, got {spec.c1}, {spec.c2}")
        if spec.c1 - lo < 5 or hi - spec.c2 < 5:
            raise ValueError(
                f"soliton centres must lie at least 5 units inside the box [{lo}, {hi}]"
            )
        bg = _black_pair(grid, spec.c1, spec.c2)
        left = np.tanh((lo - spec.c1) / SQRT2) * -np.tanh((lo - spec.c2) / SQRT2)
        right = np.tanh((hi - spec.c1) / SQRT2) * -np.tanh((hi - spec.c2) / SQRT2)
        if abs(left - right) > 1e-10:
            raise ValueError(f"background is not periodic-compatible (face mismatch {abs(left - right):.3g})")
        return bg
    if isinstance(spec, FromFile):
        file_grid, phi, renorm = read_field_file(spec.path)
        if file_grid != grid:
            raise ValueError(f"{spec.path}: grid {file_grid} does not match {grid}")
        grad = tuple(grid.gradient(phi))
        tail = max(_spectral_tail(grid, g) for g in grad) if np.any(grad[0]) else 0.0
        if tail > 1e-10:
            raise ValueError(
                f"{spec.path}: background is not periodic-compatible (spectral tail {tail:.3g})"
            )
        return Background(phi, grad, grid.laplacian(phi), renorm)
    raise TypeError(f"unknown background spec {spec!r}")


# -- field files ---------------------------------------------------------


def write_field_file(path, grid: Grid, values: np.ndarray, renorm_momentum=None) -> None:
    """Write a complex field in the versioned text format.

    Line 1: ``# nlgp-field v1``; line 2: JSON header with ``dim``, ``n``,
    ``L`` and ``renorm_momentum``; then one ``re im`` pair per point in
    row-major order.
    """
    header = {
        "dim": grid.dim,
        "n": list(grid.n),
        "L": list(grid.L),
        "renorm_momentum": list(renorm_momentum or [0.0] * grid.dim),
    }
    flat = np.asarray(values, dtype=complex).reshape(-1)
    with open(path, "w") as fh:
        fh.write(FIELD_FILE_MAGIC + "\n")
        fh.write(json.dumps(header) + "\n")
        for z in flat:
            fh.write(f"{float(z.real)!r} {float(z.imag)!r}\n")


def read_field_file(path) -> tuple[Grid, np.ndarray, tuple[float, ...]]:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ValueError(f"cannot read field file {path}: {exc}") from exc
    if not lines or lines[0].strip() != FIELD_FILE_MAGIC:
        raise ValueError(f"{path}:1: expected '{FIELD_FILE_MAGIC}'")
    try:
        header = json.loads(lines[1])
        grid = make_grid(header["dim"], header["n"], header["L"])
    except (IndexError, KeyError, json.JSONDecodeError, TypeError, ValueError) as exc:
        raise ValueError(f"{path}:2: bad header: {exc}") from exc
    renorm = tuple(float(v) for v in header.get("renorm_momentum", [0.0] * grid.dim))
    if len(renorm) != grid.dim:
        raise ValueError(f"{path}:2: renorm_momentum needs {grid.dim} entries")
    body = lines[2:]
    if len(body) != grid.total_points:
        raise ValueError(f"{path}: expected {grid.total_points} data lines, found {len(body)}")
    data = np.empty(grid.total_points, dtype=complex)
    for i, line in enumerate(body):
        parts = line.split()
        try:
            re_, im_ = float(parts[0]), float(parts[1])
        except (IndexError, ValueError) as exc:
            raise ValueError(f"{path}:{i + 3}: expected 're im', got {line!r}") from exc
        data[i] = complex(re_, im_)
    return grid, data.reshape(grid.shape), renorm


# -- state ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class State:
    grid: Grid
    background: Background
    w: np.ndarray
    time: float = 0.0

    @property
    def phi(self) -> np.ndarray:
        return self.background.phi

    @property
    def u(self) -> np.ndarray:
        return self.background.phi + self.w


def make_state(grid: Grid, background: Background, w=None, time: float = 0.0) -> State:
    if w is None:
        w = np.zeros(grid.shape, dtype=complex)
    w = np.asarray(w, dtype=complex).reshape(grid.shape)
    return State(grid, background, w, time)


def gaussian_bump(grid: Grid, amplitude, width, center=None, phase_winding=None) -> np.ndarray:
    """amplitude * exp(-|x-c|^2 / (2 width^2)) * exp(i k.(x-c))."""
    center = [0.0] * grid.dim if center is None else list(center)
    if phase_winding is None:
        phase_winding = [0.0] * grid.dim
    elif np.isscalar(phase_winding):
        phase_winding = [float(phase_winding)] + [0.0] * (grid.dim - 1)
    r2 = sum((xi - ci) ** 2 for xi, ci in zip(grid.x, center))
    phase = sum(ki * (xi - ci) for xi, ci, ki in zip(grid.x, center, phase_winding))
    return amplitude * np.exp(-r2 / (2 * width**2)) * np.exp(1j * phase)


def random_smooth_field(grid: Grid, amplitude: float, correlation: float, seed: int) -> np.ndarray:
    """Band-limited complex random field with max modulus ``amplitude``."""
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    coeffs *= np.exp(-grid.ksq * correlation**2 / 2)
    values = np.fft.ifftn(coeffs)
    peak = np.abs(values).max()
    return amplitude * values / peak if peak > 0 else values


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_end: float
    record_every: int = 1

    def validate(self, grid: Grid) -> int:
        """Check the config against ``grid``; return the number of steps."""
        if not self.dt > 0 or not self.t_end > 0:
            raise ValueError("dt and t_end must be positive")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ValueError("record_every must be a positive integer")
        limit = 0.1 * min(grid.spacing) ** 2
        if self.dt > limit * (1 + 1e-12):
            raise ValueError(f"dt = {self.dt:g} exceeds 0.1*h_min^2 = {limit:g}")
        ratio = self.t_end / self.dt
        steps = round(ratio)
        if abs(ratio - steps) > 1e-9 * max(1.0, ratio) or steps < 1:
            raise ValueError(f"t_end/dt = {ratio!r} is not an integer")
        return int(steps)


class BlowUpError(RuntimeError):
    def __init__(self, time: float, records=None, state: State | None = None):
        super().__init__(f"numerical blow-up at t = {time:.6g}")
        self.time = time
        self.records = records if records is not None else []
        self.state = state


# -- stepping ------------------------------------------------------------


def _potential(mult: Multiplier, u: np.ndarray) -> np.ndarray:
    eta = 1.0 - (u.real**2 + u.imag**2)
    return mult.grid.apply_multiplier(mult.values, eta).real


def nonlinear_substep(u: np.ndarray, mult: Multiplier, s: float) -> np.ndarray:
    """Exact flow of i u_t + u V = 0 with V = W*(1-|u|^2) frozen."""
    return u * np.exp(1j * s * _potential(mult, u))


def linear_substep(u: np.ndarray, grid: Grid, s: float) -> np.ndarray:
    return grid.apply_multiplier(np.exp(-1j * grid.ksq * s), u)


class _Stepper:
    def __init__(self, grid: Grid, mult: Multiplier, dt: float):
        if mult.grid != grid:
            raise ValueError("multiplier lives on a different grid")
        self.grid, self.mult, self.dt = grid, mult, dt
        self.propagator = np.exp(-1j * grid.ksq * dt)

    def __call__(self, u: np.ndarray) -> np.ndarray:
        half = 0.5 * self.dt
        u = nonlinear_substep(u, self.mult, half)
        u = self.grid.apply_multiplier(self.propagator, u)
        return nonlinear_substep(u, self.mult, half)


def step_strang(state: State, mult: Multiplier, dt: float) -> State:
    u = _Stepper(state.grid, mult, dt)(state.u)
    if not np.all(np.isfinite(u)):
        raise BlowUpError(state.time + dt, state=state)
    return replace(state, w=u - state.phi, time=state.time + dt)


@dataclass
class Trajectory:
    records: list
    final: State
    steps: int = 0
    extra: dict = field(default_factory=dict)


def evolve(
    state: State,
    mult: Multiplier,
    config: IntegratorConfig,
    recorder: Callable[[State], Any] | None = None,
) -> Trajectory:
    """Advance ``state`` to ``state.time + t_end``.

    ``recorder`` is called on the state at t=0, every ``record_every`` steps
    and at the final time; it defaults to the full diagnostics record.
    """
    if recorder is None:
        from nlgp.diagnostics import measure

        def recorder(s):
            return measure(s, mult)

    steps = config.validate(state.grid)
    stepper = _Stepper(state.grid, mult, config.dt)
    t0 = state.time
    phi = state.phi
    u = state.u
    records = [recorder(state)]
    current = state
    for i in range(1, steps + 1):
        u = stepper(u)
        t = t0 + i * config.dt
        if not np.all(np.isfinite(u)):
            raise BlowUpError(t, records, current)
        if i % config.record_every == 0 or i == steps:
            current = replace(state, w=u - phi, time=t)
            records.append(recorder(current))
    final = replace(state, w=u - phi, time=t0 + steps * config.dt)
    return Trajectory(records, final, steps)


# -- delta limit ---------------------------------------------------------


def h1_distance(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    d = a - b
    return math.sqrt(grid.l2(d) ** 2 + grid.h1_seminorm(d) ** 2)


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("NLGP_THREADS", "1")))
    except ValueError:
        return 1


def run_delta_limit(
    eps_list: Sequence[float],
    state: State,
    config: IntegratorConfig,
) -> list[tuple[float, float]]:
    """sup_t H^1 distance between BesselYukawa(eps) and delta solutions.

    All runs start from ``state``; rows come back in the order of ``eps_list``.
    """
    if state.grid.dim > 3:
        raise ValueError("delta limit is only meaningful for dim <= 3")
    eps_list = [float(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly descending")
    grid = state.grid

    def snapshots(spec):
        mult = sample_multiplier(spec, grid)
        return evolve(state, mult, config, recorder=lambda s: s.w.copy()).records

    reference = snapshots(Delta())

    def distance(eps):
        runs = snapshots(BesselYukawa(eps))
        return max(h1_distance(grid, a, b) for a, b in zip(runs, reference))

    workers = min(_threads(), len(eps_list))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            dists = list(pool.map(distance, eps_list))
    else:
        dists = [distance(e) for e in eps_list]
    return list(zip(eps_list, dists))
