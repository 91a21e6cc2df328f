"""Upper/lower solution pairs for the wave system and their numerical verification.

Two constructions are provided: one for speeds above the minimal speed and one
for the minimal speed itself (which needs a compactly supported predator
kernel). Every free constant is fixed by a deterministic rule so the resulting
bundle is reproducible and can be checked pointwise by :func:`verify`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .dispersion import (
    ModelParams,
    PreconditionError,
    SpeedReport,
    a_roots,
    char_A,
    choose_lambda0,
    is_critical,
    minimal_speed,
)
from .kernels import Kernel, evaluate, mgf_d1, mgf_d2
from .numerics import bisect, gauss_legendre, golden_section

VERIFY_TOL = 1e-9
DOUBLE_ROOT_TOL = 1e-8


class NumericalError(RuntimeError):
    """A numerical step failed (non-convergence, underflow, lost accuracy)."""


class Regime(str, Enum):
    SUPERCRITICAL = "supercritical"
    CRITICAL = "critical"


DOCUMENT_FIELDS = (
    "regime", "s", "a", "b", "d", "lambda0", "lambda1", "lambda2", "mu", "q",
    "delta", "epsilon", "h", "z0", "z1", "z2", "z3", "z4", "zM", "S",
)  # fmt: skip


@dataclass(frozen=True)
class BoundsBundle:
    """Constants of an upper/lower solution pair; the four functions are methods."""

    regime: Regime
    s: float
    params: ModelParams
    lambda0: float
    lambda1: float
    lambda2: float
    q: float
    delta: float
    epsilon: float
    z0: float
    z1: float
    zM: float
    mu: float | None = None
    h: float | None = None
    z2: float | None = None
    z3: float | None = None
    z4: float | None = None
    S: float | None = None

    @property
    def kinks(self) -> tuple[float, ...]:
        if self.regime is Regime.SUPERCRITICAL:
            return (0.0, self.z1)
        return (0.0, self.z2, self.z3, self.z4)

    # -- the four piecewise functions -------------------------------------

    def phi_upper(self, z, deriv: bool = False):
        z = np.asarray(z, dtype=float)
        right = z > 0
        e = np.exp(-self.lambda1 * np.where(right, z, 0.0))
        if deriv:
            return np.where(right, self.epsilon * self.lambda1 * e, 0.0)
        return np.where(right, 1.0 - self.epsilon * e, 1.0 - self.epsilon)

    def phi_lower(self, z, deriv: bool = False):
        z = np.asarray(z, dtype=float)
        z_kink = 0.0 if self.regime is Regime.SUPERCRITICAL else self.z3
        right = z > z_kink
        e = np.exp(-self.lambda0 * np.where(right, z - z_kink, 0.0))
        if deriv:
            return np.where(right, 0.5 * self.lambda0 * e, 0.0)
        return np.where(right, 1.0 - 0.5 * e, 0.5)

    def psi_upper(self, z, deriv: bool = False):
        z = np.asarray(z, dtype=float)
        lam = self.lambda1
        if self.regime is Regime.SUPERCRITICAL:
            right = z > 0
            e = np.exp(-lam * np.where(right, z, 0.0))
            if deriv:
                return np.where(right, -lam * e, 0.0)
            return np.where(right, e, 1.0)
        right = z > self.z2
        zr = np.where(right, z, self.z2)
        e = np.exp(-lam * zr)
        if deriv:
            return np.where(right, self.h * (1.0 - lam * zr) * e, 0.0)
        return np.where(right, self.h * zr * e, 1.0)

    def psi_lower(self, z, deriv: bool = False):
        z = np.asarray(z, dtype=float)
        lam = self.lambda1
        if self.regime is Regime.SUPERCRITICAL:
            right = z > self.z1
            zr = np.where(right, z, self.z1)
            e1, e2 = np.exp(-lam * zr), np.exp(-self.mu * lam * zr)
            if deriv:
                return np.where(right, -lam * e1 + self.q * self.mu * lam * e2, 0.0)
            return np.where(right, e1 - self.q * e2, self.delta)
        right = z > self.z4
        zr = np.where(right, z, self.z4)
        rt = np.sqrt(zr)
        e = np.exp(-lam * zr)
        if deriv:
            poly = self.h * zr - self.q * rt
            return np.where(right, (self.h - 0.5 * self.q / rt - lam * poly) * e, 0.0)
        return np.where(right, (self.h * zr - self.q * rt) * e, self.delta)

    def functions(self):
        return {
            "phi_upper": self.phi_upper,
            "phi_lower": self.phi_lower,
            "psi_upper": self.psi_upper,
            "psi_lower": self.psi_lower,
        }

    # -- serialization -----------------------------------------------------

    def to_document(self) -> dict:
        doc = {name: None for name in DOCUMENT_FIELDS}
        doc.update(
            regime=self.regime.value,
            a=self.params.a,
            b=self.params.b,
            d=self.params.d,
        )
        for name in DOCUMENT_FIELDS:
            if name in ("regime", "a", "b", "d"):
                continue
            doc[name] = getattr(self, name)
        return doc

    @classmethod
    def from_document(cls, doc: dict) -> "BoundsBundle":
        missing = [k for k in DOCUMENT_FIELDS if k not in doc]
        if missing:
            raise ValueError(f"bundle document lacks fields {missing}")
        extra = sorted(set(doc) - set(DOCUMENT_FIELDS))
        if extra:
            raise ValueError(f"bundle document has unknown fields {extra}")
        kw = {k: doc[k] for k in DOCUMENT_FIELDS if k not in ("regime", "a", "b", "d")}
        return cls(
            regime=Regime(doc["regime"]),
            params=ModelParams(doc["a"], doc["b"], doc["d"]),
            **kw,
        )


def eval_bundle(bundle: BoundsBundle, z):
    """``(phi_upper, phi_lower, psi_upper, psi_lower)`` at ``z``."""
    return (
        bundle.phi_upper(z),
        bundle.phi_lower(z),
        bundle.psi_upper(z),
        bundle.psi_lower(z),
    )


def kink_jumps(bundle: BoundsBundle) -> dict[str, float]:
    """Largest left/right value mismatch of each function over the kink set."""
    out = {}
    for name, fn in bundle.functions().items():
        worst = 0.0
        for e in bundle.kinks:
            lv = float(fn(np.nextafter(e, -np.inf)))
            rv = float(fn(np.nextafter(e, np.inf)))
            worst = max(worst, abs(lv - rv))
        out[name] = worst
    return out


# ---------------------------------------------------------------------------
# constructions


def _speed_for(params: ModelParams, k2: Kernel, speed: SpeedReport | None) -> SpeedReport:
    speed = speed or minimal_speed(params, k2)
    if not speed.attained:
        raise PreconditionError("the minimal speed is not attained for this kernel")
    return speed


def construct_supercritical(
    params: ModelParams,
    k1: Kernel,
    k2: Kernel,
    s: float,
    speed: SpeedReport | None = None,
) -> BoundsBundle:
    """Exponential upper/lower solutions for a speed strictly above s*."""
    params.require_wave_hypotheses()
    speed = _speed_for(params, k2, speed)
    if s <= speed.s_star or is_critical(s, speed.s_star):
        raise PreconditionError(
            f"supercritical construction requires s > s* = {speed.s_star!r}, got s = {s!r}"
        )
    a, b, d = params.a, params.b, params.d
    roots = a_roots(params, k2, s, speed)
    lam1, lam2 = roots.lambda1, roots.lambda2
    mu = 0.5 * (1.0 + min(lam2 / lam1, 2.0))
    A_mu = char_A(params, k2, mu * lam1, s)
    if not A_mu < 0:
        raise NumericalError(f"A(mu lambda1) = {A_mu!r} is not negative")
    q = 2.0 * max(1.0, 2.0 * b / (-A_mu))
    rate = (mu - 1.0) * lam1
    z0 = math.log(q) / rate
    zM = math.log(q * mu) / rate

    def f(z):
        return math.exp(-lam1 * z) - q * math.exp(-mu * lam1 * z)

    f_max = f(zM)
    delta = 0.5 * min(f_max, params.a_star, 0.5 * (1.0 - d / b))
    z1 = bisect(lambda z: f(z) - delta, z0, zM)
    growth = math.exp(rate * z1)
    epsilon = 0.5 * min(delta, (growth - q) / growth) / (1.0 + s * lam1 + a)
    lam0 = choose_lambda0(params, k1, s, lam1)
    return BoundsBundle(
        regime=Regime.SUPERCRITICAL,
        s=s,
        params=params,
        lambda0=lam0,
        lambda1=lam1,
        lambda2=lam2,
        mu=mu,
        q=q,
        delta=delta,
        epsilon=epsilon,
        z0=z0,
        z1=z1,
        zM=zM,
    )


def _root_pair_hz(h: float, lam: float) -> tuple[float, float]:
    """Both roots of h z exp(-lam z) = 1 (requires h > lam e)."""
    w = lambda z: h * z * math.exp(-lam * z) - 1.0
    peak = 1.0 / lam
    z1 = bisect(w, 0.0, peak)
    hi = 2.0 * peak
    while w(hi) > 0:
        hi *= 2.0
    z2 = bisect(w, peak, hi)
    return z1, z2


def _sup_tail_weight(lam: float, S: float, z_lo: float) -> float:
    """sup over z >= z_lo of z^2 (z + S)^(3/2) exp(-lam z); the function is log-concave."""
    w = lambda z: z * z * (z + S) ** 1.5 * math.exp(-lam * z)
    z_hi = max(z_lo, 4.0 / lam + S) + 60.0 / lam
    x, _, _ = golden_section(lambda z: -w(z), z_lo, z_hi, rtol=1e-12)
    return max(w(z_lo), w(x))


def construct_critical(
    params: ModelParams,
    k1: Kernel,
    k2: Kernel,
    speed: SpeedReport | None = None,
    q_rule: str = "tail",
) -> BoundsBundle:
    """Upper/lower solutions at the minimal speed for a compactly supported predator kernel.

    ``q_rule`` selects how the amplitude ``q`` of the lower predator bound is
    fixed. ``"global"`` bounds the weight z^2 (z+S)^(3/2) exp(-lambda1 z) by its
    maximum over all z > 0. That value is valid but, at moderate parameters,
    pushes the lower bound's support so far right that its height underflows
    double precision, in which case a :class:`NumericalError` is raised.
    ``"tail"`` (default) uses the supremum over z >= z0 = (q/h)^2 only, which
    covers every z where the bound is needed (z > z4 > z0), doubling q until
    the condition holds.
    """
    params.require_wave_hypotheses()
    S = k2.support_radius
    if S is None:
        raise PreconditionError("critical construction requires compact support of the predator kernel")
    if q_rule not in ("tail", "global"):
        raise ValueError(f"unknown q_rule {q_rule!r}")
    speed = _speed_for(params, k2, speed)
    a, b, d = params.a, params.b, params.d
    s, lam1 = speed.s_star, speed.lambda_star
    defect = abs(d * mgf_d1(k2, lam1) - s)
    if defect > DOUBLE_ROOT_TOL:
        raise NumericalError(f"double-root identity violated by {defect:.3g}")

    h = 2.0 * lam1 * math.e
    while True:
        z1, z2 = _root_pair_hz(h, lam1)
        if z2 - z1 > S:
            break
        h *= 2.0
    lam0 = choose_lambda0(params, k1, s, lam1)
    z3 = max(2.0 * z2, math.log(4.0 * h / (a * (lam1 - lam0) * math.e)) / lam0)

    coef = 16.0 * b * h * h / (d * mgf_d2(k2, lam1))
    if q_rule == "global":
        q = 2.0 * coef * _sup_tail_weight(lam1, S, 0.0)
        while (q / h) ** 2 <= z2:
            q *= 2.0
    else:
        q = h * math.sqrt(2.0 * z2)
        while q < 2.0 * coef * _sup_tail_weight(lam1, S, (q / h) ** 2):
            q *= 2.0
    z0 = (q / h) ** 2

    def g(z):
        return (h * z - q * math.sqrt(z)) * math.exp(-lam1 * z)

    def g_slope_sign(z):
        return h - 0.5 * q / math.sqrt(z) - lam1 * (h * z - q * math.sqrt(z))

    step = 20.0 / lam1
    hi = z0 + step
    while g_slope_sign(hi) > 0:
        step *= 2.0
        hi = z0 + step
    zM = bisect(g_slope_sign, z0, hi)
    g_max = g(zM)
    if not g_max > 1e-300:
        raise NumericalError(
            f"max of the lower predator bound underflows (z0 = {z0:.6g}); "
            "the 'global' q rule is not representable here, use q_rule='tail'"
        )
    delta = 0.5 * min(g_max, params.a_star, 0.5 * (1.0 - d / b))
    z4 = bisect(lambda z: g(z) - delta, z0, zM)
    epsilon = 0.5 * min(delta, h * z4 - q * math.sqrt(z4)) / (1.0 + s * lam1 + a)
    return BoundsBundle(
        regime=Regime.CRITICAL,
        s=s,
        params=params,
        lambda0=lam0,
        lambda1=lam1,
        lambda2=lam1,
        q=q,
        delta=delta,
        epsilon=epsilon,
        z0=z0,
        z1=z1,
        zM=zM,
        h=h,
        z2=z2,
        z3=z3,
        z4=z4,
        S=S,
    )


def construct(
    params: ModelParams, k1: Kernel, k2: Kernel, s: float | None = None, **kw
) -> BoundsBundle:
    """Supercritical bundle for ``s``, or the critical one when ``s`` is None or equals s*."""
    speed = _speed_for(params, k2, kw.pop("speed", None))
    if s is None or is_critical(s, speed.s_star):
        return construct_critical(params, k1, k2, speed=speed, **kw)
    return construct_supercritical(params, k1, k2, s, speed=speed)


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class VerificationReport:
    max_U1: float
    z_U1: float
    max_U2: float
    z_U2: float
    min_L1: float
    z_L1: float
    min_L2: float
    z_L2: float
    tol: float
    n_points: int
    # (first z, last z) where each inequality fails beyond tol; None when it holds
    violations: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        t = self.tol
        return self.max_U1 <= t and self.max_U2 <= t and self.min_L1 >= -t and self.min_L2 >= -t

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["violations"] = {k: (list(v) if v else None) for k, v in self.violations.items()}
        out["passed"] = self.passed
        return out


def nonlocal_action(kernel: Kernel, fn, kinks, z: np.ndarray, panels_per_scale: int = 4):
    """(J * fn)(z) - fn(z) for a piecewise-smooth callable ``fn`` with the given kinks.

    The y-integral is split at the kernel's breakpoints, at the preimages
    z - kink of the function's kinks and on a uniform panel grid, then each
    piece gets 12-point Gauss-Legendre. All z are processed at once.
    """
    z = np.asarray(z, dtype=float)
    R = kernel.effective_radius
    n_panels = max(4, int(math.ceil(2 * R / kernel.scale * panels_per_scale)))
    fixed = np.union1d(np.linspace(-R, R, n_panels + 1), kernel.breakpoints())
    moving = np.clip(z[:, None] - np.asarray(kinks, dtype=float)[None, :], -R, R)
    cuts = np.sort(np.concatenate((np.broadcast_to(fixed, (z.size, fixed.size)), moving), axis=1), axis=1)
    lo, hi = cuts[:, :-1], cuts[:, 1:]
    t, w = gauss_legendre(12)
    y = lo[..., None] + (hi - lo)[..., None] * t
    wy = (hi - lo)[..., None] * w * evaluate(kernel, y)
    fz = fn(z)
    vals = fn(z[:, None, None] - y) - fz[:, None, None]
    return np.sum(wy * vals, axis=(1, 2))


def inequality_values(bundle: BoundsBundle, k1: Kernel, k2: Kernel, z) -> dict[str, np.ndarray]:
    """The four defining quantities U1, U2 (must be <= 0) and L1, L2 (must be >= 0) at ``z``."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    p = bundle.params
    s = bundle.s
    kinks = bundle.kinks
    po, pu = bundle.phi_upper(z), bundle.phi_lower(z)
    so, su = bundle.psi_upper(z), bundle.psi_lower(z)
    U1 = nonlocal_action(k1, bundle.phi_upper, kinks, z) + s * bundle.phi_upper(z, True) + p.a * po * (1 - po) - su
    U2 = p.d * nonlocal_action(k2, bundle.psi_upper, kinks, z) + s * bundle.psi_upper(z, True) + p.b * so * (1 - so / po)
    L1 = nonlocal_action(k1, bundle.phi_lower, kinks, z) + s * bundle.phi_lower(z, True) + p.a * pu * (1 - pu) - so
    L2 = p.d * nonlocal_action(k2, bundle.psi_lower, kinks, z) + s * bundle.psi_lower(z, True) + p.b * su * (1 - su / pu)
    return {"U1": U1, "U2": U2, "L1": L1, "L2": L2}


def verify(
    bundle: BoundsBundle,
    k1: Kernel,
    k2: Kernel,
    grid_span: float = 50.0,
    grid_n: int = 20000,
    kink_radius: float = 1e-3,
    tol: float = VERIFY_TOL,
    chunk: int = 2000,
) -> VerificationReport:
    """Evaluate the four inequalities on a uniform grid of [-grid_span, grid_span] minus kink neighborhoods."""
    if not kink_radius > 0:
        raise ValueError("kink_radius must be positive")
    z = np.linspace(-grid_span, grid_span, grid_n)
    far = np.all(np.abs(z[:, None] - np.asarray(bundle.kinks)[None, :]) > kink_radius, axis=1)
    z = z[far]
    parts = [inequality_values(bundle, k1, k2, z[i : i + chunk]) for i in range(0, z.size, chunk)]
    vals = {k: np.concatenate([p[k] for p in parts]) for k in ("U1", "U2", "L1", "L2")}
    iU1, iU2 = int(np.argmax(vals["U1"])), int(np.argmax(vals["U2"]))
    iL1, iL2 = int(np.argmin(vals["L1"])), int(np.argmin(vals["L2"]))
    violations = {}
    for key in ("U1", "U2", "L1", "L2"):
        bad = vals[key] > tol if key[0] == "U" else vals[key] < -tol
        violations[key] = (float(z[bad][0]), float(z[bad][-1])) if bad.any() else None
    return VerificationReport(
        max_U1=float(vals["U1"][iU1]),
        z_U1=float(z[iU1]),
        max_U2=float(vals["U2"][iU2]),
        z_U2=float(z[iU2]),
        min_L1=float(vals["L1"][iL1]),
        z_L1=float(z[iL1]),
        min_L2=float(vals["L2"][iL2]),
        z_L2=float(z[iL2]),
        tol=tol,
        n_points=int(z.size),
        violations=violations,
    )


def with_delta(bundle: BoundsBundle, delta: float) -> BoundsBundle:
    """Copy of ``bundle`` with only delta replaced (other constants kept)."""
    return replace(bundle, delta=delta)


def delta_cap(bundle: BoundsBundle) -> float:
    """The strict upper limit for delta used by the constructions."""
    p = bundle.params
    if bundle.regime is Regime.SUPERCRITICAL:
        peak = math.exp(-bundle.lambda1 * bundle.zM) - bundle.q * math.exp(-bundle.mu * bundle.lambda1 * bundle.zM)
    else:
        zM = bundle.zM
        peak = (bundle.h * zM - bundle.q * math.sqrt(zM)) * math.exp(-bundle.lambda1 * zM)
    return min(peak, p.a_star, 0.5 * (1.0 - p.d / p.b))
