"""Wave profiles by damped fixed-point iteration inside an upper/lower solution box."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .bounds import BoundsBundle, NumericalError
from .dispersion import ModelParams
from .kernels import Kernel, stencil
from .numerics import gauss_legendre

EDGE_EXCLUDE = 5
DAMPING = 0.5
STALL_CHANGE = 1e-14
STALL_SWEEPS = 20


class BundleMismatchError(ValueError):
    pass


class WaveConvergenceError(NumericalError):
    """Raised when the iteration stalls; ``profile`` holds the best iterate."""

    def __init__(self, message: str, profile: "WaveProfile"):
        super().__init__(message)
        self.profile = profile


@dataclass(frozen=True)
class WaveProfile:
    s: float
    params: ModelParams
    z: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    psi: np.ndarray = field(repr=False)
    beta: float
    residual: tuple[float, float]
    iterations: int
    converged: bool = True

    @property
    def h(self) -> float:
        return float(self.z[-1] - self.z[0]) / (self.z.size - 1)

    @property
    def L(self) -> float:
        return 0.5 * float(self.z[-1] - self.z[0])


@dataclass(frozen=True)
class TailReport:
    phi_minus: float
    phi_plus: float
    psi_minus: float
    psi_plus: float
    right_phi_min: float
    right_phi_max: float
    right_psi_min: float
    right_psi_max: float
    ordering: bool
    left_inequality: bool
    right_inequality: bool
    left_gap: float
    right_gap: float

    @property
    def ok(self) -> bool:
        return self.ordering and self.left_inequality and self.right_inequality

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["ok"] = self.ok
        return out


def shift_parameter(params: ModelParams) -> float:
    """beta = 1 + a + 2b + d keeps both integrands nondecreasing in their own unknown on the box."""
    return 1.0 + params.a + 2.0 * params.b + params.d


def _cubic_exp_weights(kappa: float, h: float) -> np.ndarray:
    """Integrals of exp(-kappa tau) against the cubic Lagrange basis on nodes -h, 0, h, 2h over [0, h]."""
    t, w = gauss_legendre(20)
    ell = np.stack(
        (
            -t * (t - 1) * (t - 2) / 6,
            (t + 1) * (t - 1) * (t - 2) / 2,
            -(t + 1) * t * (t - 2) / 2,
            (t + 1) * t * (t - 1) / 6,
        )
    )
    return h * (ell * (w * np.exp(-kappa * h * t))).sum(axis=1)


def integrate_from_right(H: np.ndarray, s: float, beta: float, h: float) -> np.ndarray:
    """Bounded solution u of s u' - beta u = -H, i.e. u(z) = (1/s) int_z^inf exp(beta (z-t)/s) H(t) dt.

    Uses the exact one-step recursion with H replaced by its local cubic
    interpolant; the value at the right end is taken as H/beta (the tail of
    the array must be long enough for that start to be forgotten).
    """
    kappa = beta / s
    c = _cubic_exp_weights(kappa, h) / s
    Hm1 = np.concatenate(([H[0]], H[:-2]))
    H0 = H[:-1]
    H1 = H[1:]
    H2 = np.concatenate((H[2:], [H[-1]]))
    g = c[0] * Hm1 + c[1] * H0 + c[2] * H1 + c[3] * H2
    r = math.exp(-kappa * h)
    u_last = H[-1] / beta
    y, _ = lfilter([1.0], [1.0, -r], g[::-1], zi=[r * u_last])
    return np.concatenate((y[::-1], [u_last]))


def derivative(f: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order centered first derivative; one-sided values near the ends are left as NaN."""
    out = np.full_like(f, np.nan)
    out[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    return out


def _tws_residuals(phi, psi, n1, n2, s, params, h):
    dphi, dpsi = derivative(phi, h), derivative(psi, h)
    r1 = n1 + s * dphi + params.a * phi * (1 - phi) - psi
    r2 = params.d * n2 + s * dpsi + params.b * psi * (1 - psi / phi)
    return r1, r2


def residual(profile: WaveProfile, k1: Kernel, k2: Kernel) -> tuple[float, float]:
    """Sup norms of both wave equations on the profile grid.

    Convolutions extend the profile by its edge values; derivatives are
    fourth-order centered differences; five points at each end are skipped.
    """
    h = profile.h
    st1, st2 = stencil(k1, h), stencil(k2, h)
    phi, psi = profile.phi, profile.psi
    n1 = st1.nonlocal_op(phi, phi[0], phi[-1])
    n2 = st2.nonlocal_op(psi, psi[0], psi[-1])
    r1, r2 = _tws_residuals(phi, psi, n1, n2, profile.s, profile.params, h)
    sl = slice(EDGE_EXCLUDE, -EDGE_EXCLUDE)
    return float(np.max(np.abs(r1[sl]))), float(np.max(np.abs(r2[sl])))


def solve(
    params: ModelParams,
    k1: Kernel,
    k2: Kernel,
    bundle: BoundsBundle,
    L: float = 80.0,
    n: int = 8000,
    tol: float = 1e-6,
    max_iter: int = 20000,
    damping: float = DAMPING,
    center: float = 0.0,
) -> WaveProfile:
    """Wave profile on ``center + [-L, L]`` with ``n`` cells, sandwiched by ``bundle``.

    Each sweep applies the integrating-factor map to both components, damps
    the update, and clips into the bundle box. Outside the grid the profile
    is continued by (a*, a*) on the left and by the bundle's upper functions
    on the right. ``center`` shifts both the grid and the bundle.
    """
    if bundle.params != params:
        raise BundleMismatchError(f"bundle built for {bundle.params}, solve called with {params}")
    if n < 2000:
        raise ValueError("n must be at least 2000")
    s = bundle.s
    beta = shift_parameter(params)
    h = 2.0 * L / n
    st1, st2 = stencil(k1, h), stencil(k2, h)
    m = max(st1.half_width, st2.half_width) + 2
    n_left = m
    n_right = m + int(math.ceil(40.0 * s / beta / h))
    idx = np.arange(-n_left, n + 1 + n_right)
    zz = -L + h * idx  # bundle coordinates
    inner = slice(n_left, n_left + n + 1)
    zi = zz[inner]

    a, b, d = params.a, params.b, params.d
    a_star = params.a_star
    phi = np.empty(zz.size)
    psi = np.empty(zz.size)
    phi[:n_left] = a_star
    psi[:n_left] = a_star
    phi[inner.stop :] = bundle.phi_upper(zz[inner.stop :])
    psi[inner.stop :] = bundle.psi_upper(zz[inner.stop :])
    lo_phi, hi_phi = bundle.phi_lower(zi), bundle.phi_upper(zi)
    lo_psi, hi_psi = bundle.psi_lower(zi), bundle.psi_upper(zi)
    phi[inner] = 0.5 * (lo_phi + hi_phi)
    psi[inner] = 0.5 * (lo_psi + hi_psi)

    core = slice(n_left + EDGE_EXCLUDE, n_left + n + 1 - EDGE_EXCLUDE)
    best = None
    res = (math.inf, math.inf)
    change = math.inf
    stalled = 0
    for it in range(1, max_iter + 1):
        n1 = st1.nonlocal_op(phi, phi[0], phi[-1])
        n2 = st2.nonlocal_op(psi, psi[0], psi[-1])
        r1, r2 = _tws_residuals(phi, psi, n1, n2, s, params, h)
        res = (float(np.max(np.abs(r1[core]))), float(np.max(np.abs(r2[core]))))
        if best is None or max(res) < max(best[2]):
            best = (phi[inner].copy(), psi[inner].copy(), res, it - 1)
        if change < tol / 10 and max(res) < tol:
            break
        # iterate no longer moves but the residual is above tol: discretization floor
        stalled = stalled + 1 if change < STALL_CHANGE else 0
        if stalled >= STALL_SWEEPS:
            break
        H1 = n1 + beta * phi + a * phi * (1 - phi) - psi
        H2 = d * n2 + beta * psi + b * psi * (1 - psi / phi)
        u1 = integrate_from_right(H1, s, beta, h)[inner]
        u2 = integrate_from_right(H2, s, beta, h)[inner]
        new_phi = np.clip((1 - damping) * phi[inner] + damping * u1, lo_phi, hi_phi)
        new_psi = np.clip((1 - damping) * psi[inner] + damping * u2, lo_psi, hi_psi)
        change = max(
            float(np.max(np.abs(new_phi - phi[inner]))),
            float(np.max(np.abs(new_psi - psi[inner]))),
        )
        phi[inner], psi[inner] = new_phi, new_psi
    if not (change < tol / 10 and max(res) < tol):
        bphi, bpsi, bres, bit = best
        prof = WaveProfile(s, params, zi + center, bphi, bpsi, beta, bres, bit, converged=False)
        raise WaveConvergenceError(
            f"no convergence after {it} sweeps: residual {max(res):.3g}, last change {change:.3g}",
            prof,
        )
    prof = WaveProfile(s, params, zi + center, phi[inner].copy(), psi[inner].copy(), beta, res, it - 1)
    return prof


def in_sandwich(profile: WaveProfile, bundle: BoundsBundle, center: float = 0.0, slack: float = 0.0) -> bool:
    z = profile.z - center
    return bool(
        np.all(bundle.phi_lower(z) - slack <= profile.phi)
        and np.all(profile.phi <= bundle.phi_upper(z) + slack)
        and np.all(bundle.psi_lower(z) - slack <= profile.psi)
        and np.all(profile.psi <= bundle.psi_upper(z) + slack)
    )


def tail_check(profile: WaveProfile, tol: float = 1e-8, fraction: float = 0.1) -> TailReport:
    """Tail statistics on the outer ``fraction`` of the grid at each end.

    Checks 1/2 < phi- <= psi- <= psi+ <= phi+ < 1 and the two logistic
    inequalities linking prey and predator tail values, each with slack ``tol``.
    """
    k = max(1, int(round(fraction * profile.z.size)))
    pl, sl = profile.phi[:k], profile.psi[:k]
    pr, sr = profile.phi[-k:], profile.psi[-k:]
    a = profile.params.a
    a_star = profile.params.a_star
    pm, pp, qm, qp = float(pl.min()), float(pl.max()), float(sl.min()), float(sl.max())
    ordering = 0.5 < pm and pm <= qm + tol and qm <= qp and qp <= pp + tol and pp < 1.0
    left_ineq = a * pm * (1 - pm) <= qp + tol
    right_ineq = a * pp * (1 - pp) >= qm - tol
    return TailReport(
        phi_minus=pm,
        phi_plus=pp,
        psi_minus=qm,
        psi_plus=qp,
        right_phi_min=float(pr.min()),
        right_phi_max=float(pr.max()),
        right_psi_min=float(sr.min()),
        right_psi_max=float(sr.max()),
        ordering=bool(ordering),
        left_inequality=bool(left_ineq),
        right_inequality=bool(right_ineq),
        left_gap=float(np.max(np.abs(pl - a_star) + np.abs(sl - a_star))),
        right_gap=float(np.max(np.abs(pr - 1.0) + np.abs(sr))),
    )
