"""Traveling waves and invasion fronts for a predator-prey system with nonlocal dispersal."""

from .bounds import BoundsBundle, NumericalError, Regime, VerificationReport, construct, verify
from .dispersion import ModelParams, PreconditionError, RootPair, SpeedReport, a_roots, minimal_speed
from .kernels import Kernel, KernelDomainError, mgf, mgf_d1, mgf_d2, stencil
from .simulate import FrontTrace, SimState, front_position, run, spreading_speed, wave_drift_test
from .wave import TailReport, WaveProfile, residual, solve, tail_check

__all__ = [
    "BoundsBundle",
    "FrontTrace",
    "Kernel",
    "KernelDomainError",
    "ModelParams",
    "NumericalError",
    "PreconditionError",
    "Regime",
    "RootPair",
    "SimState",
    "SpeedReport",
    "TailReport",
    "VerificationReport",
    "WaveProfile",
    "a_roots",
    "construct",
    "front_position",
    "minimal_speed",
    "mgf",
    "mgf_d1",
    "mgf_d2",
    "residual",
    "run",
    "solve",
    "spreading_speed",
    "stencil",
    "tail_check",
    "verify",
    "wave_drift_test",
]
