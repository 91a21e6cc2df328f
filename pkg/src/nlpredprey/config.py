"""Run configuration: one JSON document per run, validated before any computation."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .dispersion import ModelParams
from .kernels import Kernel, load_tabulated

Positive = Field(gt=0, allow_inf_nan=False)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ParamsSpec(_Strict):
    a: float = Positive
    b: float = Positive
    d: float = Positive

    def build(self) -> ModelParams:
        return ModelParams(self.a, self.b, self.d)


_REQUIRED = {
    "uniform": ("S",),
    "triangular": ("S",),
    "truncated_gaussian": ("sigma", "S"),
    "laplace": ("alpha",),
    "gaussian": ("sigma",),
    "tabulated": ("path",),
}


class KernelSpec(_Strict):
    family: Literal["uniform", "triangular", "truncated_gaussian", "laplace", "gaussian", "tabulated"]
    S: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)
    sigma: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)
    alpha: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)
    path: Optional[str] = None

    @model_validator(mode="after")
    def _fields_match_family(self):
        need = _REQUIRED[self.family]
        for name in ("S", "sigma", "alpha", "path"):
            given = getattr(self, name) is not None
            if name in need and not given:
                raise ValueError(f"kernel family {self.family!r} requires field {name!r}")
            if name not in need and given:
                raise ValueError(f"kernel family {self.family!r} does not take field {name!r}")
        return self

    def build(self, base: Path) -> Kernel:
        if self.family == "tabulated":
            p = Path(self.path)
            return load_tabulated(p if p.is_absolute() else base / p)
        if self.family == "truncated_gaussian":
            return Kernel.truncated_gaussian(self.sigma, self.S)
        if self.family in ("uniform", "triangular"):
            return getattr(Kernel, self.family)(self.S)
        if self.family == "laplace":
            return Kernel.laplace(self.alpha)
        return Kernel.gaussian(self.sigma)


SpeedValue = Union[float, Literal["critical"]]


class SpeedBlock(_Strict):
    pass


class RootsBlock(_Strict):
    s: float = Positive


class BoundsBlock(_Strict):
    s: SpeedValue = "critical"
    q_rule: Literal["tail", "global"] = "tail"
    grid_span: float = Field(default=50.0, gt=0, allow_inf_nan=False)
    grid_n: int = Field(default=20000, ge=10)

    @model_validator(mode="after")
    def _positive_speed(self):
        if self.s != "critical" and not self.s > 0:
            raise ValueError("bounds.s must be positive or 'critical'")
        return self


class WaveBlock(_Strict):
    s: SpeedValue = "critical"
    bundle: Optional[str] = None
    L: float = Field(default=80.0, gt=0, allow_inf_nan=False)
    n: int = Field(default=8000, ge=2000)
    tol: float = Field(default=1e-6, gt=0, allow_inf_nan=False)
    max_iter: int = Field(default=20000, ge=1)

    @model_validator(mode="after")
    def _positive_speed(self):
        if self.s != "critical" and not self.s > 0:
            raise ValueError("wave.s must be positive or 'critical'")
        return self


class SimulateBlock(_Strict):
    initial: Literal["invasion", "wave"] = "invasion"
    profile: Optional[str] = None
    X: float = Field(default=400.0, gt=0, allow_inf_nan=False)
    h: float = Field(default=0.05, gt=0, allow_inf_nan=False)
    T: float = Field(default=100.0, ge=0, allow_inf_nan=False)
    dt: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)
    level: Optional[float] = Field(default=None, gt=0, allow_inf_nan=False)
    snapshot_every: Optional[float] = Field(default=10.0, gt=0, allow_inf_nan=False)
    sample_every: float = Field(default=0.5, gt=0, allow_inf_nan=False)
    fit_skip: float = Field(default=0.3, ge=0, lt=1)
    order: Literal[2, 4] = 2
    margin: Optional[float] = Field(default=None, ge=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def _profile_for_wave(self):
        if self.initial == "wave" and not self.profile:
            raise ValueError("simulate.profile is required when initial = 'wave'")
        if self.initial == "invasion" and self.profile:
            raise ValueError("simulate.profile is only used when initial = 'wave'")
        return self


class ValidateKernelBlock(_Strict):
    tol: float = Field(default=1e-8, gt=0, allow_inf_nan=False)


class RunConfig(_Strict):
    params: ParamsSpec
    J1: KernelSpec
    J2: KernelSpec
    speed: SpeedBlock = SpeedBlock()
    roots: Optional[RootsBlock] = None
    bounds: BoundsBlock = BoundsBlock()
    wave: WaveBlock = WaveBlock()
    simulate: SimulateBlock = SimulateBlock()
    validate_kernel: ValidateKernelBlock = ValidateKernelBlock()
    out: Optional[str] = None


class ConfigError(ValueError):
    pass


def load_config(path) -> tuple[RunConfig, Path]:
    """Parse and validate a config file; returns the config and its directory (for relative paths)."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    try:
        cfg = RunConfig.model_validate(raw)
    except ValidationError as exc:
        lines = []
        for err in exc.errors():
            loc = ".".join(str(p) for p in err["loc"])
            lines.append(f"{loc}: {err['msg']}")
        raise ConfigError(f"{path}: invalid configuration\n  " + "\n  ".join(lines)) from None
    return cfg, path.resolve().parent
