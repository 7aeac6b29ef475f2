"""Scenario configuration files (JSON, schema version 1)."""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from nlgp import dynamics, kernels
from nlgp.grid import Grid, make_grid

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "load_config",
    "parse_kernel",
    "git_blob_hash",
    "SCHEMA_VERSION",
]

SCHEMA_VERSION = 1


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GridBlock(_Strict):
    dim: Literal[1, 2, 3]
    n: list[int]
    L: list[float]

    def build(self) -> Grid:
        return make_grid(self.dim, self.n, self.L)


# -- kernels -------------------------------------------------------------


class DeltaK(_Strict):
    type: Literal["delta"]

    def build(self):
        return kernels.Delta()


class BesselYukawaK(_Strict):
    type: Literal["bessel_yukawa"]
    eps: float = Field(gt=0)

    def build(self):
        return kernels.BesselYukawa(self.eps)


class SoftCoreK(_Strict):
    type: Literal["soft_core"]
    a: float = Field(gt=0)

    def build(self):
        return kernels.SoftCore(self.a)


class DipolarK(_Strict):
    type: Literal["dipolar"]
    alpha1: float
    alpha2: float

    def build(self):
        return kernels.Dipolar(self.alpha1, self.alpha2)


class LaguerreK(_Strict):
    type: Literal["laguerre_gaussian"]
    m: int = Field(ge=0)

    def build(self):
        return kernels.LaguerreGaussian(self.m)


class BerloffK(_Strict):
    type: Literal["berloff_roton"]
    A: float = Field(default=kernels.BERLOFF_REFERENCE.A, gt=0)
    alpha: float = kernels.BERLOFF_REFERENCE.alpha
    beta: float = kernels.BERLOFF_REFERENCE.beta
    gamma: float = kernels.BERLOFF_REFERENCE.gamma

    def build(self):
        return kernels.BerloffRoton(self.A, self.alpha, self.beta, self.gamma)


KernelBlock = Annotated[
    Union[DeltaK, BesselYukawaK, SoftCoreK, DipolarK, LaguerreK, BerloffK],
    Field(discriminator="type"),
]


class _KernelHolder(_Strict):
    kernel: KernelBlock


# -- background and initial perturbation ---------------------------------


class ConstantOneB(_Strict):
    type: Literal["constant_one"]


class BlackPairB(_Strict):
    type: Literal["black_soliton_pair"]
    c1: float
    c2: float


class FromFileB(_Strict):
    type: Literal["from_file"]
    path: str


BackgroundBlock = Annotated[Union[ConstantOneB, BlackPairB, FromFileB], Field(discriminator="type")]


class ZeroW(_Strict):
    type: Literal["zero"]


class GaussianW(_Strict):
    type: Literal["gaussian"]
    amplitude: float
    width: float = Field(gt=0)
    center: Optional[list[float]] = None
    phase_winding: Union[float, list[float], None] = None


class FileW(_Strict):
    type: Literal["file"]
    path: str


class RandomW(_Strict):
    type: Literal["random"]
    amplitude: float
    correlation: float = Field(default=1.0, gt=0)
    seed: int


InitialBlock = Annotated[Union[ZeroW, GaussianW, FileW, RandomW], Field(discriminator="type")]


class IntegratorBlock(_Strict):
    dt: float = Field(gt=0)
    t_end: float = Field(gt=0)
    record_every: int = Field(default=1, ge=1)

    def build(self) -> dynamics.IntegratorConfig:
        return dynamics.IntegratorConfig(self.dt, self.t_end, self.record_every)


class WindowBlock(_Strict):
    center: list[float]
    R: float = Field(gt=0)


class DeltaLimitBlock(_Strict):
    eps: list[float] = Field(min_length=1)


CHECK_NAMES = ("energy_drift", "linear_growth", "exponential_growth", "momentum", "mass", "grad_bound")
_CHECK_PARAMS = {
    "energy_drift": {"tol"},
    "linear_growth": set(),
    "exponential_growth": {"c1", "c2"},
    "momentum": {"tol"},
    "mass": {"tol"},
    "grad_bound": set(),
}


class CheckSpec(_Strict):
    name: str
    params: dict[str, float] = {}


class ScenarioConfig(_Strict):
    schema_version: Literal[1]
    name: Optional[str] = None
    description: Optional[str] = None
    grid: GridBlock
    kernel: KernelBlock
    background: BackgroundBlock
    initial_w: InitialBlock
    integrator: IntegratorBlock
    checks: list[CheckSpec] = []
    mass_windows: list[WindowBlock] = []
    delta_limit: Optional[DeltaLimitBlock] = None

    @field_validator("checks", mode="before")
    @classmethod
    def _normalize_checks(cls, value: Any):
        if not isinstance(value, list):
            raise ValueError("checks must be a list")
        out = []
        for i, item in enumerate(value):
            if isinstance(item, str):
                name, params = item, {}
            elif isinstance(item, dict) and set(item) == {"name", "params"}:
                # normalized form, as echoed in summary.json
                name, params = item["name"], item["params"] or {}
            elif isinstance(item, dict) and len(item) == 1:
                name, params = next(iter(item.items()))
                params = params or {}
                if not isinstance(params, dict):
                    raise ValueError(f"checks[{i}]: parameters of '{name}' must be an object")
            else:
                raise ValueError(f"checks[{i}]: expected a check name or a one-key object")
            if name not in CHECK_NAMES:
                raise ValueError(f"checks[{i}]: unknown check '{name}' (known: {', '.join(CHECK_NAMES)})")
            unknown = set(params) - _CHECK_PARAMS[name]
            if unknown:
                raise ValueError(f"checks[{i}]: unknown parameter(s) {sorted(unknown)} for '{name}'")
            out.append({"name": name, "params": params})
        return out

    # populated by load_config
    _base_dir: Path = Path(".")

    def resolve(self, path: str) -> Path:
        p = Path(path)
        return p if p.is_absolute() else self._base_dir / p

    def build_grid(self) -> Grid:
        return self.grid.build()

    def build_kernel(self):
        return self.kernel.build()

    def build_background(self, grid: Grid) -> dynamics.Background:
        b = self.background
        if isinstance(b, ConstantOneB):
            spec = dynamics.ConstantOne()
        elif isinstance(b, BlackPairB):
            spec = dynamics.BlackSolitonPair(b.c1, b.c2)
        else:
            spec = dynamics.FromFile(str(self.resolve(b.path)))
        return dynamics.make_background(spec, grid)

    def build_w0(self, grid: Grid):
        w = self.initial_w
        if isinstance(w, ZeroW):
            return None
        if isinstance(w, GaussianW):
            return dynamics.gaussian_bump(grid, w.amplitude, w.width, w.center, w.phase_winding)
        if isinstance(w, RandomW):
            return dynamics.random_smooth_field(grid, w.amplitude, w.correlation, w.seed)
        file_grid, values, _ = dynamics.read_field_file(self.resolve(w.path))
        if file_grid != grid:
            raise ValueError(f"{w.path}: grid does not match the scenario grid")
        return values

    def referenced_files(self) -> list[Path]:
        out = []
        for block in (self.background, self.initial_w):
            path = getattr(block, "path", None)
            if path is not None:
                out.append(self.resolve(path))
        return out

    def windows(self) -> list[tuple[list[float], float]]:
        return [(w.center, w.R) for w in self.mass_windows]


def git_blob_hash(data: bytes) -> str:
    """SHA-1 of ``blob <len>\\0<data>``, as git computes object ids."""
    return hashlib.sha1(b"blob %d\x00" % len(data) + data).hexdigest()


def _format_validation(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "\n".join(lines)


def load_config(path) -> tuple[ScenarioConfig, bytes]:
    """Parse and validate a scenario file. Raises :class:`ConfigError`."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror or exc}") from exc
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a JSON object")
    if "schema_version" not in data:
        raise ConfigError(f"{path}: schema_version: field required")
    try:
        cfg = ScenarioConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{path}:\n{_format_validation(exc)}") from exc
    cfg._base_dir = path.parent
    return cfg, raw


def parse_kernel(text_or_path: str):
    """Kernel spec from inline JSON or a JSON file; accepts ``{"kernel": {...}}`` too."""
    candidate = Path(text_or_path)
    try:
        text = candidate.read_text() if candidate.is_file() else text_or_path
    except OSError:
        text = text_or_path
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"kernel: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if isinstance(data, dict) and "kernel" in data and "type" not in data:
        data = data["kernel"]
    try:
        return _KernelHolder.model_validate({"kernel": data}).kernel.build()
    except ValidationError as exc:
        raise ConfigError(_format_validation(exc)) from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
