"""Method-of-lines simulation of the predator-prey system with nonlocal dispersal, plus front tracking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicSpline

from .bounds import NumericalError
from .dispersion import ModelParams
from .kernels import Kernel, Stencil, stencil
from .wave import WaveProfile

U_FLOOR = 1e-8
V_NEG_TOL = 1e-12
FIT_SKIP = 0.3
# linear product weights are nonnegative, so discontinuous invasion data stay >= 0
DEFAULT_ORDER = 2
MIN_FIT_SAMPLES = 20


class SimulationError(NumericalError):
    """Positivity lost during a run; ``state`` is the offending snapshot."""

    def __init__(self, message: str, state: "SimState"):
        super().__init__(message)
        self.state = state


@dataclass(frozen=True)
class SimState:
    x: np.ndarray = field(repr=False)
    U: np.ndarray = field(repr=False)
    V: np.ndarray = field(repr=False)
    t: float = 0.0
    u_floor: float = U_FLOOR

    @property
    def h(self) -> float:
        return float(self.x[-1] - self.x[0]) / (self.x.size - 1)


def invasion_state(X: float, h: float, u_floor: float = U_FLOOR) -> SimState:
    """U = 1 everywhere, V = 1/2 on [0, 1] and 0 elsewhere, on [0, X]."""
    n = int(round(X / h))
    x = h * np.arange(n + 1)
    V = np.where(x <= 1.0, 0.5, 0.0)
    return SimState(x, np.ones_like(x), V, 0.0, u_floor)


def wave_state(profile: WaveProfile, u_floor: float = U_FLOOR) -> SimState:
    """Profile as initial data on [0, 2L]: x = z + L."""
    x = profile.z - profile.z[0]
    return SimState(x, profile.phi.copy(), profile.psi.copy(), 0.0, u_floor)


class _Operators:
    def __init__(self, params: ModelParams, k1: Kernel, k2: Kernel, h: float, order: int = 2):
        self.params = params
        self.st1: Stencil = stencil(k1, h, order)
        self.st2: Stencil = stencil(k2, h, order)

    def rhs(self, U, V, u_floor):
        p = self.params
        n1 = self.st1.nonlocal_op(U, U[0], U[-1])
        n2 = self.st2.nonlocal_op(V, V[0], V[-1])
        dU = n1 + p.a * U * (1 - U) - V
        dV = p.d * n2 + p.b * V * (1 - V / np.maximum(U, u_floor))
        return dU, dV


def rhs(state: SimState, params: ModelParams, k1: Kernel, k2: Kernel, order: int = DEFAULT_ORDER):
    """Time derivatives (dU, dV); V/U uses max(U, u_floor)."""
    return _Operators(params, k1, k2, state.h, order).rhs(state.U, state.V, state.u_floor)


def stable_dt(params: ModelParams, u_min: float, u_floor: float = U_FLOOR) -> float:
    """Explicit step bound 0.25 / (max(1, d) + a + b (1 + 1/max(u_min, u_floor)))."""
    u = max(u_min, u_floor)
    return 0.25 / (max(1.0, params.d) + params.a + params.b * (1.0 + 1.0 / u))


def _check(state: SimState) -> None:
    if not (np.all(np.isfinite(state.U)) and np.all(np.isfinite(state.V))):
        raise SimulationError(f"non-finite values at t = {state.t!r}", state)
    if state.U.min() < -state.u_floor:
        raise SimulationError(f"U = {state.U.min()!r} < 0 at t = {state.t!r}", state)
    if state.V.min() < -V_NEG_TOL:
        raise SimulationError(f"V = {state.V.min()!r} < 0 at t = {state.t!r}", state)


def _rk4(ops: _Operators, U, V, dt, u_floor):
    k1u, k1v = ops.rhs(U, V, u_floor)
    k2u, k2v = ops.rhs(U + 0.5 * dt * k1u, V + 0.5 * dt * k1v, u_floor)
    k3u, k3v = ops.rhs(U + 0.5 * dt * k2u, V + 0.5 * dt * k2v, u_floor)
    k4u, k4v = ops.rhs(U + dt * k3u, V + dt * k3v, u_floor)
    U_new = U + dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u)
    V_new = V + dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return U_new, V_new


def step(
    state: SimState, dt: float, params: ModelParams, k1: Kernel, k2: Kernel, order: int = DEFAULT_ORDER
) -> SimState:
    """One classical Runge-Kutta step, with the positivity check."""
    ops = _Operators(params, k1, k2, state.h, order)
    U, V = _rk4(ops, state.U, state.V, dt, state.u_floor)
    out = replace(state, U=U, V=V, t=state.t + dt)
    _check(out)
    return out


def front_position(state: SimState, level: float) -> tuple[float, bool]:
    """Largest x with V(x) >= level, linearly interpolated; (0, False) when V never reaches level."""
    hit = np.nonzero(state.V >= level)[0]
    if hit.size == 0:
        return 0.0, False
    i = int(hit[-1])
    if i == state.x.size - 1:
        return float(state.x[-1]), True
    v0, v1 = state.V[i], state.V[i + 1]
    frac = (v0 - level) / (v0 - v1)
    return float(state.x[i] + frac * (state.x[i + 1] - state.x[i])), True


@dataclass(frozen=True)
class FrontTrace:
    level: float
    t: np.ndarray = field(repr=False)
    x_front: np.ndarray = field(repr=False)
    found: np.ndarray = field(repr=False)
    speed: float | None = None
    intercept: float | None = None
    window: tuple[float, float] | None = None
    fit_residual: float | None = None
    n_fit: int = 0

    def to_dict(self) -> dict:
        return {
            "level": self.level,
            "speed": self.speed,
            "intercept": self.intercept,
            "window": list(self.window) if self.window else None,
            "fit_residual": self.fit_residual,
            "n_fit": self.n_fit,
            "n_samples": int(self.t.size),
        }


def fit_front(trace: FrontTrace, skip: float = FIT_SKIP) -> FrontTrace:
    """Least-squares line through the samples after the first ``skip`` fraction of the run."""
    t, x, ok = trace.t, trace.x_front, trace.found
    if t.size == 0:
        raise ValueError("empty front trace")
    t_lo = t[0] + skip * (t[-1] - t[0])
    sel = (t >= t_lo) & ok
    if sel.sum() < MIN_FIT_SAMPLES:
        raise ValueError(f"need at least {MIN_FIT_SAMPLES} samples in the fit window, got {int(sel.sum())}")
    (slope, icpt), res, *_ = np.polyfit(t[sel], x[sel], 1, full=True)
    rms = math.sqrt(float(res[0]) / sel.sum()) if res.size else 0.0
    return replace(
        trace,
        speed=float(slope),
        intercept=float(icpt),
        window=(float(t[sel][0]), float(t[sel][-1])),
        fit_residual=rms,
        n_fit=int(sel.sum()),
    )


def spreading_speed(trace: FrontTrace, skip: float = FIT_SKIP) -> float:
    return fit_front(trace, skip).speed


@dataclass
class Trajectory:
    snapshots: list[SimState]
    fronts: dict[float, FrontTrace]
    dt: float
    dt_max: float
    steps: int
    guard_hits: int
    min_U: float

    @property
    def final(self) -> SimState:
        return self.snapshots[-1]


def run(
    params: ModelParams,
    k1: Kernel,
    k2: Kernel,
    initial: SimState,
    T: float,
    dt: float | None = None,
    snapshot_every: float | None = None,
    levels: tuple[float, ...] = (),
    sample_every: float | None = None,
    order: int = DEFAULT_ORDER,
) -> Trajectory:
    """Advance ``initial`` to time T with fixed-step RK4.

    ``dt`` defaults to the stability bound of the initial state and must not
    exceed it. Snapshots are kept every ``snapshot_every`` (only the ends
    when None); front positions for each of ``levels`` are sampled every
    ``sample_every`` (every step when None). ``guard_hits`` counts grid
    points, summed over steps, where the singularity floor was active.
    ``order`` selects the convolution weights (see ``kernels.stencil``).
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    _check(initial)
    dt_max = stable_dt(params, float(initial.U.min()), initial.u_floor)
    if dt is None:
        dt = dt_max
    if not 0 < dt <= dt_max:
        raise ValueError(f"dt = {dt!r} outside (0, {dt_max!r}]")
    steps = int(math.ceil(T / dt - 1e-9)) if T > 0 else 0
    dt = T / steps if steps else dt
    ops = _Operators(params, k1, k2, initial.h, order)
    snap_stride = max(1, int(round(snapshot_every / dt))) if snapshot_every else None
    sample_stride = max(1, int(round(sample_every / dt))) if sample_every else 1

    samples = {lv: ([], [], []) for lv in levels}

    def record(st: SimState):
        for lv in levels:
            xf, ok = front_position(st, lv)
            ts, xs, fs = samples[lv]
            ts.append(st.t)
            xs.append(xf)
            fs.append(ok)

    state = initial
    snaps = [state]
    record(state)
    guard = int(np.sum(state.U < state.u_floor))
    min_U = float(state.U.min())
    U, V = state.U, state.V
    for k in range(1, steps + 1):
        U, V = _rk4(ops, U, V, dt, initial.u_floor)
        state = SimState(initial.x, U, V, initial.t + k * dt, initial.u_floor)
        _check(state)
        guard += int(np.sum(U < initial.u_floor))
        min_U = min(min_U, float(U.min()))
        if k % sample_stride == 0 or k == steps:
            record(state)
        if (snap_stride and k % snap_stride == 0) or k == steps:
            if snaps[-1] is not state:
                snaps.append(state)
    fronts = {
        lv: FrontTrace(lv, np.array(ts), np.array(xs), np.array(fs, dtype=bool))
        for lv, (ts, xs, fs) in samples.items()
    }
    return Trajectory(snaps, fronts, dt, dt_max, steps, guard, min_U)


@dataclass(frozen=True)
class DriftReport:
    s: float
    T: float
    dt: float
    h: float
    shift: float
    margin: float
    discrepancy: float
    discrepancy_U: float
    discrepancy_V: float
    guard_hits: int

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def translation_discrepancy(
    profile: WaveProfile, state: SimState, shift: float, margin: float
) -> tuple[float, float]:
    """Sup-norm gaps between ``state`` and the profile moved right by ``shift``, ``margin`` away from both ends."""
    z0 = profile.z[0]
    spl_phi = CubicSpline(profile.z, profile.phi)
    spl_psi = CubicSpline(profile.z, profile.psi)
    zq = state.x + z0 - shift
    # beyond the profile grid, continue by the edge values
    zc = np.clip(zq, profile.z[0], profile.z[-1])
    phi = spl_phi(zc)
    psi = spl_psi(zc)
    keep = (state.x >= state.x[0] + margin) & (state.x <= state.x[-1] - margin)
    if not keep.any():
        raise ValueError("margin leaves no interior points")
    return (
        float(np.max(np.abs(state.U[keep] - phi[keep]))),
        float(np.max(np.abs(state.V[keep] - psi[keep]))),
    )


def wave_drift_test(
    profile: WaveProfile,
    params: ModelParams,
    k1: Kernel,
    k2: Kernel,
    T: float,
    dt: float | None = None,
    margin: float | None = None,
    shift_factor: float = 1.0,
    order: int = DEFAULT_ORDER,
) -> DriftReport:
    """Evolve the profile for time T and compare with its translate by s T.

    ``shift_factor`` scales the comparison shift (1 for the matched speed);
    the default margin is a tenth of the domain length and the default step
    is min(h/2, stability bound).
    """
    init = wave_state(profile)
    if margin is None:
        margin = 0.1 * float(init.x[-1])
    if dt is None:
        dt = min(0.5 * init.h, stable_dt(params, float(init.U.min()), init.u_floor))
    traj = run(params, k1, k2, init, T, dt, order=order)
    return drift_report(profile, traj, margin, shift_factor)


def drift_report(
    profile: WaveProfile, traj: Trajectory, margin: float, shift_factor: float = 1.0
) -> DriftReport:
    """Compare the last state of a run started from ``profile`` with the profile moved by s T."""
    final = traj.final
    T = final.t - traj.snapshots[0].t
    shift = shift_factor * profile.s * T
    du, dv = translation_discrepancy(profile, final, shift, margin)
    return DriftReport(
        s=profile.s,
        T=T,
        dt=traj.dt,
        h=final.h,
        shift=shift,
        margin=margin,
        discrepancy=max(du, dv),
        discrepancy_U=du,
        discrepancy_V=dv,
        guard_hits=traj.guard_hits,
    )
