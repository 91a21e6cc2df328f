"""Minimal wave speed and the characteristic functions of the linearized predator front."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernels import Kernel, mgf, mgf_d1
from .numerics import bisect, golden_section

LAMBDA_START = 1e-3
CRITICAL_RTOL = 1e-12


class PreconditionError(ValueError):
    """A mathematical hypothesis of the construction is not met."""


@dataclass(frozen=True)
class ModelParams:
    """Prey growth ``a``, predator growth ``b``, predator dispersal rate ``d``."""

    a: float
    b: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "d"):
            val = getattr(self, name)
            if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
                raise ValueError(f"parameter {name} must be finite and positive, got {val!r}")

    @property
    def a_star(self) -> float:
        return 1.0 - 1.0 / self.a

    def require_wave_hypotheses(self) -> None:
        """Existence constructions need a >= 4 and d < b."""
        if self.a < 4:
            raise PreconditionError(f"construction requires a >= 4, got a = {self.a!r}")
        if self.d >= self.b:
            raise PreconditionError(
                f"construction requires d < b, got d = {self.d!r}, b = {self.b!r}"
            )


@dataclass(frozen=True)
class SpeedReport:
    s_star: float
    lambda_star: float
    attained: bool
    bracket: tuple[float, float]
    objective_samples: list[tuple[float, float]] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "s_star": self.s_star,
            "lambda_star": self.lambda_star,
            "attained": self.attained,
            "bracket": list(self.bracket),
        }


@dataclass(frozen=True)
class RootPair:
    lambda1: float
    lambda2: float
    s: float

    def to_dict(self) -> dict:
        return {"s": self.s, "lambda1": self.lambda1, "lambda2": self.lambda2}


def char_A(params: ModelParams, k2: Kernel, lam, s: float):
    """A(lam; s) = d [I2(lam) - 1] - s lam + b."""
    if np.any(np.asarray(lam) < 0):
        raise ValueError("char_A is defined for lam >= 0")
    return params.d * (mgf(k2, lam) - 1.0) - s * lam + params.b


def char_B(params: ModelParams, k1: Kernel, lam, s: float):
    """B(lam; s) = [I1(lam) - 1] - s lam."""
    return (mgf(k1, lam) - 1.0) - s * lam


def speed_objective(params: ModelParams, k2: Kernel, lam):
    """F(lam) = (d [I2(lam) - 1] + b) / lam, whose infimum over lam > 0 is s*."""
    return (params.d * (mgf(k2, lam) - 1.0) + params.b) / lam


def _stationarity(params: ModelParams, k2: Kernel, lam: float) -> float:
    # lam^2 F'(lam); strictly increasing since its derivative is d lam I2''(lam) > 0
    return lam * params.d * mgf_d1(k2, lam) - params.d * (mgf(k2, lam) - 1.0) - params.b


def _lambda_cap(k2: Kernel) -> float:
    if math.isfinite(k2.lambda_hat):
        return 0.999 * k2.lambda_hat
    return 50.0 / k2.scale


def minimal_speed(params: ModelParams, k2: Kernel) -> SpeedReport:
    """Minimize F by golden-section search on a bracket found by doubling from 1e-3.

    The golden-section minimizer is then polished by bisection on F' = 0,
    which is a monotone equation; this pins the double root of A to rounding
    level, beyond what comparing values of the flat objective can resolve.
    """
    F = lambda lam: speed_objective(params, k2, lam)
    cap = _lambda_cap(k2)
    samples = []
    lam = min(LAMBDA_START, 0.5 * cap)
    f_prev = F(lam)
    samples.append((lam, f_prev))
    lo = 0.5 * lam
    while True:
        nxt = min(2.0 * lam, cap)
        f_nxt = F(nxt)
        samples.append((nxt, f_nxt))
        if f_nxt >= f_prev:
            hi = nxt
            break
        if nxt >= cap:
            # still descending at the edge of the admissible range
            g_cap = _stationarity(params, k2, cap)
            if g_cap < 0:
                return SpeedReport(
                    s_star=f_nxt,
                    lambda_star=cap,
                    attained=False,
                    bracket=(lam, cap),
                    objective_samples=samples,
                )
            hi = cap
            break
        lo, lam, f_prev = lam, nxt, f_nxt
    x_gs, _, (b_lo, b_hi) = golden_section(F, lo, hi, rtol=1e-10)
    G = lambda v: _stationarity(params, k2, v)
    lo_p, hi_p = b_lo, b_hi
    # widen the golden bracket until the monotone stationarity function changes sign
    while G(lo_p) > 0 and lo_p > lo:
        lo_p = max(lo, lo_p - 2 * (b_hi - b_lo))
    while G(hi_p) < 0 and hi_p < hi:
        hi_p = min(hi, hi_p + 2 * (b_hi - b_lo))
    lam_star = bisect(G, lo_p, hi_p) if G(lo_p) * G(hi_p) < 0 else x_gs
    s_star = F(lam_star)
    samples.append((lam_star, s_star))
    return SpeedReport(
        s_star=s_star,
        lambda_star=lam_star,
        attained=True,
        bracket=(lo, hi),
        objective_samples=samples,
    )


def is_critical(s: float, s_star: float) -> bool:
    return abs(s - s_star) <= CRITICAL_RTOL * s_star


def a_roots(
    params: ModelParams, k2: Kernel, s: float, speed: SpeedReport | None = None
) -> RootPair:
    """The two positive zeros lambda1 < lambda2 of A(.; s) for a supercritical speed."""
    speed = speed or minimal_speed(params, k2)
    if not speed.attained:
        raise PreconditionError("minimal speed is not attained; roots of A are undefined")
    s_star, lam_star = speed.s_star, speed.lambda_star
    if s <= s_star * (1 + CRITICAL_RTOL):
        raise PreconditionError(
            f"speed s = {s!r} must exceed the minimal speed s* = {s_star!r}; "
            "use minimal_speed for the critical double root"
        )
    A = lambda lam: char_A(params, k2, lam, s)
    lam1 = bisect(A, 0.0, lam_star)
    lam_hat = k2.lambda_hat
    hi = lam_star
    for _ in range(2000):
        hi_next = 2.0 * hi if not math.isfinite(lam_hat) else min(2.0 * hi, 0.5 * (hi + lam_hat))
        if hi_next == hi:
            break
        hi = hi_next
        if A(hi) > 0:
            break
    if not A(hi) > 0:
        raise PreconditionError("A(.; s) has no second zero below lambda_hat")
    lam2 = bisect(A, lam_star, hi)
    return RootPair(lambda1=lam1, lambda2=lam2, s=s)


def choose_lambda0(
    params: ModelParams, k1: Kernel, s: float, lambda1: float
) -> float:
    """Largest min(lambda1, lambda_hat_1) / 2^k with B(lambda0; s) < 0."""
    if not lambda1 > 0:
        raise ValueError("lambda1 must be positive")
    top = min(lambda1, k1.lambda_hat)
    lam0 = 0.5 * top
    while char_B(params, k1, lam0, s) >= 0:
        lam0 *= 0.5
        if lam0 < 1e-300:
            raise PreconditionError("no lambda0 with B(lambda0) < 0 found")
    return lam0
