"""Symmetric dispersal kernels: densities, exponential moments and discrete convolution."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Union

import numpy as np
from scipy.integrate import quad
from scipy.special import erf, erfcinv

from .numerics import adaptive_simpson, gauss_legendre, integrate_pieces

TAIL_MASS = 1e-10
QUAD_TOL = 1e-10
_SERIES_TERMS = 40


class KernelDomainError(ValueError):
    """Exponential moment requested at or beyond the abscissa of convergence."""


class KernelFileError(ValueError):
    pass


class Family(str, Enum):
    UNIFORM = "uniform"
    TRIANGULAR = "triangular"
    TRUNCATED_GAUSSIAN = "truncated_gaussian"
    LAPLACE = "laplace"
    GAUSSIAN = "gaussian"
    TABULATED = "tabulated"


@dataclass(frozen=True, eq=False)
class Kernel:
    """An even probability density on the line.

    Use the classmethod constructors; they validate parameters. Tabulated
    kernels are symmetrized and renormalized on construction and keep the
    size of those corrections in ``raw_mass`` and ``raw_asymmetry``.
    """

    family: Family
    S: float | None = None
    sigma: float | None = None
    alpha: float | None = None
    table_y: np.ndarray | None = field(default=None, repr=False)
    table_J: np.ndarray | None = field(default=None, repr=False)
    declared_lambda_hat: float | None = None
    raw_mass: float = 1.0
    raw_asymmetry: float = 0.0

    @classmethod
    def uniform(cls, S: float) -> "Kernel":
        _require_positive(S=S)
        return cls(Family.UNIFORM, S=float(S))

    @classmethod
    def triangular(cls, S: float) -> "Kernel":
        _require_positive(S=S)
        return cls(Family.TRIANGULAR, S=float(S))

    @classmethod
    def truncated_gaussian(cls, sigma: float, S: float) -> "Kernel":
        _require_positive(sigma=sigma, S=S)
        return cls(Family.TRUNCATED_GAUSSIAN, S=float(S), sigma=float(sigma))

    @classmethod
    def laplace(cls, alpha: float) -> "Kernel":
        _require_positive(alpha=alpha)
        return cls(Family.LAPLACE, alpha=float(alpha))

    @classmethod
    def gaussian(cls, sigma: float) -> "Kernel":
        _require_positive(sigma=sigma)
        return cls(Family.GAUSSIAN, sigma=float(sigma))

    @classmethod
    def tabulated(cls, y, J, lambda_hat: float) -> "Kernel":
        """Kernel from samples ``(y, J(y))`` on a grid symmetric about 0.

        The density is the piecewise-linear interpolant, zero outside the grid.
        """
        y = np.asarray(y, dtype=float)
        J = np.asarray(J, dtype=float)
        if y.ndim != 1 or y.shape != J.shape or y.size < 3:
            raise KernelFileError("tabulated kernel needs matching 1-D arrays of at least 3 samples")
        order = np.argsort(y)
        y, J = y[order], J[order]
        if np.any(np.diff(y) <= 0):
            raise KernelFileError("tabulated abscissae must be distinct")
        scale = max(abs(y[0]), abs(y[-1]))
        if np.max(np.abs(y + y[::-1])) > 1e-9 * scale:
            raise KernelFileError("tabulated grid must be symmetric about y = 0")
        if np.any(J < 0):
            raise KernelFileError("tabulated kernel has negative values")
        if not lambda_hat > 0:
            raise KernelFileError("lambda_hat must be positive (or inf)")
        y = 0.5 * (y - y[::-1])
        asym = float(np.max(np.abs(J - J[::-1])))
        J = 0.5 * (J + J[::-1])
        mass = float(np.sum(0.5 * (J[1:] + J[:-1]) * np.diff(y)))
        if mass <= 0:
            raise KernelFileError("tabulated kernel has zero mass")
        y.setflags(write=False)
        Jn = J / mass
        Jn.setflags(write=False)
        return cls(
            Family.TABULATED,
            table_y=y,
            table_J=Jn,
            declared_lambda_hat=float(lambda_hat),
            raw_mass=mass,
            raw_asymmetry=asym,
        )

    @property
    def lambda_hat(self) -> float:
        if self.family is Family.LAPLACE:
            return self.alpha
        if self.family is Family.TABULATED:
            return self.declared_lambda_hat
        return math.inf

    @property
    def support_radius(self) -> float | None:
        if self.family in (Family.UNIFORM, Family.TRIANGULAR, Family.TRUNCATED_GAUSSIAN):
            return self.S
        if self.family is Family.TABULATED:
            return float(self.table_y[-1])
        return None

    @property
    def scale(self) -> float:
        """Characteristic jump length."""
        if self.family is Family.LAPLACE:
            return 1.0 / self.alpha
        if self.family in (Family.GAUSSIAN, Family.TRUNCATED_GAUSSIAN):
            return self.sigma if self.family is Family.GAUSSIAN else min(self.sigma, self.S)
        return self.support_radius

    @property
    def effective_radius(self) -> float:
        """Radius outside of which at most ``TAIL_MASS`` of the kernel lies."""
        if self.family is Family.LAPLACE:
            return math.log(1.0 / TAIL_MASS) / self.alpha
        if self.family is Family.GAUSSIAN:
            return self.sigma * math.sqrt(2.0) * float(erfcinv(TAIL_MASS))
        return self.support_radius

    def breakpoints(self) -> list[float]:
        """Points inside the effective support where J is not smooth (support ends included)."""
        R = self.effective_radius
        if self.family is Family.TABULATED:
            return [float(v) for v in self.table_y]
        pts = {-R, R}
        if self.family in (Family.TRIANGULAR, Family.LAPLACE):
            pts.add(0.0)
        return sorted(pts)

    def describe(self) -> dict:
        out: dict = {"family": self.family.value}
        for name in ("S", "sigma", "alpha"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        if self.family is Family.TABULATED:
            out["lambda_hat"] = self.declared_lambda_hat
            out["n_samples"] = int(self.table_y.size)
        return out


def _require_positive(**kw) -> None:
    for name, val in kw.items():
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0):
            raise ValueError(f"kernel parameter {name} must be finite and positive, got {val!r}")


def load_tabulated(path: Union[str, Path]) -> Kernel:
    """Read a tabulated kernel file: ``lambda_hat=<value|inf>`` then ``y J(y)`` lines."""
    lines = [ln.strip() for ln in Path(path).read_text().splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines or not lines[0].startswith("lambda_hat="):
        raise KernelFileError(f"{path}: first line must be 'lambda_hat=<value|inf>'")
    try:
        lam_hat = float(lines[0].split("=", 1)[1])
        data = np.array([[float(t) for t in ln.split()] for ln in lines[1:]])
    except ValueError as exc:
        raise KernelFileError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != 2:
        raise KernelFileError(f"{path}: expected two columns 'y J(y)'")
    return Kernel.tabulated(data[:, 0], data[:, 1], lam_hat)


def evaluate(kernel: Kernel, y):
    """J(y); zero outside the support (and outside the grid for tabulated kernels)."""
    y = np.asarray(y, dtype=float)
    fam = kernel.family
    if fam is Family.UNIFORM:
        out = np.where(np.abs(y) <= kernel.S, 0.5 / kernel.S, 0.0)
    elif fam is Family.TRIANGULAR:
        out = np.maximum(kernel.S - np.abs(y), 0.0) / kernel.S**2
    elif fam is Family.TRUNCATED_GAUSSIAN:
        sig, S = kernel.sigma, kernel.S
        Z = sig * math.sqrt(2 * math.pi) * erf(S / (sig * math.sqrt(2)))
        out = np.where(np.abs(y) <= S, np.exp(-0.5 * (y / sig) ** 2) / Z, 0.0)
    elif fam is Family.LAPLACE:
        out = 0.5 * kernel.alpha * np.exp(-kernel.alpha * np.abs(y))
    elif fam is Family.GAUSSIAN:
        sig = kernel.sigma
        out = np.exp(-0.5 * (y / sig) ** 2) / (sig * math.sqrt(2 * math.pi))
    else:
        out = np.interp(y, kernel.table_y, kernel.table_J, left=0.0, right=0.0)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# exponential moments


def mgf(kernel: Kernel, lam):
    """I(lam) = integral of J(y) exp(lam y) dy."""
    return _moment(kernel, lam, 0)


def mgf_d1(kernel: Kernel, lam):
    """I'(lam) = integral of J(y) y exp(lam y) dy."""
    return _moment(kernel, lam, 1)


def mgf_d2(kernel: Kernel, lam):
    """I''(lam) = integral of J(y) y^2 exp(lam y) dy."""
    return _moment(kernel, lam, 2)


def _check_domain(kernel: Kernel, lam: np.ndarray) -> None:
    if lam.size and np.max(np.abs(lam)) >= kernel.lambda_hat:
        raise KernelDomainError(
            f"|lambda| = {float(np.max(np.abs(lam)))!r} is outside the convergence "
            f"domain (-lambda_hat, lambda_hat), lambda_hat = {kernel.lambda_hat!r}"
        )


def _moment(kernel: Kernel, lam, order: int):
    lam_arr = np.asarray(lam, dtype=float)
    _check_domain(kernel, lam_arr)
    fam = kernel.family
    if fam is Family.UNIFORM:
        out = _compact_closed(lam_arr, kernel.S, order, _uniform_closed, _uniform_moment)
    elif fam is Family.TRIANGULAR:
        out = _compact_closed(lam_arr, kernel.S, order, _triangular_closed, _triangular_moment)
    elif fam is Family.LAPLACE:
        out = _laplace_closed(lam_arr, kernel.alpha, order)
    elif fam is Family.GAUSSIAN:
        out = _gaussian_closed(lam_arr, kernel.sigma, order)
    elif fam is Family.TABULATED:
        out = _tabulated_moment(kernel, lam_arr, order)
    else:
        out = _truncated_gaussian_quad(lam_arr, kernel.sigma, kernel.S, order)
    return out if np.ndim(out) else float(out)


def _uniform_moment(k: int) -> float:
    # E[y^k] / S^k for the uniform density
    return 0.0 if k % 2 else 1.0 / (k + 1)


def _triangular_moment(k: int) -> float:
    return 0.0 if k % 2 else 2.0 / ((k + 1) * (k + 2))


def _uniform_closed(x, order):
    sh, ch = np.sinh(x), np.cosh(x)
    if order == 0:
        return sh / x
    if order == 1:
        return ch / x - sh / x**2
    return sh / x - 2 * ch / x**2 + 2 * sh / x**3


def _triangular_closed(x, order):
    sh, ch = np.sinh(x), np.cosh(x)
    if order == 0:
        return 2 * (ch - 1) / x**2
    if order == 1:
        return 2 * sh / x**2 - 4 * (ch - 1) / x**3
    return 2 * ch / x**2 - 8 * sh / x**3 + 12 * (ch - 1) / x**4


def _compact_closed(lam, S, order, closed, moment):
    """Closed form in x = lam*S for |x| > 1, Taylor series of the moments below."""
    x = lam * S
    small = np.abs(x) <= 1.0
    out = np.empty_like(x)
    if np.any(small):
        xs = x[small]
        acc = np.zeros_like(xs)
        for n in range(_SERIES_TERMS - 1, -1, -1):
            acc = acc * xs / (n + 1) + moment(n + order)
        # Horner above builds sum_n m_{n+order} x^n / n!
        out[small] = acc
    if np.any(~small):
        with np.errstate(over="ignore", invalid="ignore"):
            out[~small] = closed(x[~small], order)
    return out * S**order


def _laplace_closed(lam, alpha, order):
    a2 = alpha * alpha
    den = a2 - lam * lam
    if order == 0:
        return a2 / den
    if order == 1:
        return 2 * a2 * lam / den**2
    return 2 * a2 * (a2 + 3 * lam * lam) / den**3


def _gaussian_closed(lam, sigma, order):
    s2 = sigma * sigma
    base = np.exp(0.5 * s2 * lam * lam)
    if order == 0:
        return base
    if order == 1:
        return s2 * lam * base
    return (s2 + s2 * s2 * lam * lam) * base


def _truncated_gaussian_quad(lam, sigma, S, order):
    """Moments of N(0, sigma^2) restricted to [-S, S] by scipy quad.

    The integrand exp(lam y - y^2 / 2 sigma^2) is divided by its maximum on
    [-S, S] (attained at y = clip(sigma^2 lam)), which is also passed to quad
    as a breakpoint; closed forms in terms of Phi lose digits to cancellation
    once sigma^2 lam is well outside the support.
    """
    log_z = math.log(math.erf(S / (sigma * math.sqrt(2.0)))) + math.log(sigma * math.sqrt(2.0 * math.pi))

    def one(v: float) -> float:
        peak = min(max(sigma * sigma * v, -S), S)
        e_max = v * peak - 0.5 * (peak / sigma) ** 2
        f = lambda y: math.exp(v * y - 0.5 * (y / sigma) ** 2 - e_max) * y**order
        pts = sorted({-S, peak, 0.0, S})
        total = sum(
            quad(f, lo, hi, epsabs=0.0, epsrel=1e-13, limit=200)[0]
            for lo, hi in zip(pts[:-1], pts[1:])
            if hi > lo
        )
        return total * math.exp(e_max - log_z)

    return np.vectorize(one, otypes=[float])(lam)


def _tabulated_moment(kernel: Kernel, lam, order):
    """Exact (to rounding) moments of the piecewise-linear density by per-segment Gauss-Legendre."""
    y, J = kernel.table_y, kernel.table_J
    t, w = gauss_legendre(12)
    y0, dy = y[:-1, None], np.diff(y)[:, None]
    nodes = y0 + dy * t[None, :]
    vals = (J[:-1, None] * (1 - t) + J[1:, None] * t) * dy * w[None, :]
    vals = vals * nodes**order
    flat_nodes, flat_vals = nodes.ravel(), vals.ravel()
    lam_flat = lam.reshape(-1)
    with np.errstate(over="ignore"):
        res = np.array([np.sum(flat_vals * np.exp(v * flat_nodes)) for v in lam_flat])
    return res.reshape(lam.shape)


def mgf_by_quadrature(kernel: Kernel, lam: float, order: int = 0, tol: float = QUAD_TOL) -> float:
    """Moment of order 0-2 by adaptive Simpson, split at the kernel's kinks.

    The tolerance is scaled by the size of the integrand so very large moments
    are resolved relative to their magnitude.
    """
    _check_domain(kernel, np.asarray(lam))
    R = _tilted_radius(kernel, lam)
    if kernel.family is Family.GAUSSIAN:
        centre = kernel.sigma**2 * lam
        pts = [centre - R, centre, centre + R]
    else:
        pts = [p for p in kernel.breakpoints() if -R < p < R] + [-R, R]
        pts = sorted(set(pts))
    def integrand(y: float) -> float:
        return _tilted(kernel, y, lam) * y**order

    # tolerance relative to the integrand's size at the piece ends
    mag = max(1.0, max(abs(integrand(p)) for p in pts))

    return integrate_pieces(integrand, pts, tol * mag)


def _tilted(kernel: Kernel, y: float, lam: float) -> float:
    """J(y) exp(lam y) without overflow for the unbounded families."""
    if kernel.family is Family.LAPLACE:
        return 0.5 * kernel.alpha * math.exp(lam * y - kernel.alpha * abs(y))
    if kernel.family is Family.GAUSSIAN:
        sig = kernel.sigma
        return math.exp(lam * y - 0.5 * (y / sig) ** 2) / (sig * math.sqrt(2 * math.pi))
    return float(evaluate(kernel, y)) * math.exp(lam * y)


def _tilted_radius(kernel: Kernel, lam: float) -> float:
    if kernel.family is Family.LAPLACE:
        gap = kernel.alpha - abs(lam)
        # tail of (alpha/2) exp(-gap y) y^2 below ~1e-14
        return max(kernel.effective_radius, (math.log(kernel.alpha / (2 * gap)) + 40.0) / gap)
    if kernel.family is Family.GAUSSIAN:
        return 10.0 * kernel.sigma
    return kernel.effective_radius


# ---------------------------------------------------------------------------
# discrete convolution


@dataclass(frozen=True, eq=False)
class Stencil:
    """Quadrature weights ``w_j`` so that (J * f)(x_i) ~ sum_j w_j f(x_i - j h).

    Weights come from integrating J exactly against the local cubic
    interpolant of f (fourth order for smooth f) and are rescaled to sum to 1
    so constants are reproduced exactly.
    """

    h: float
    offsets: np.ndarray
    weights: np.ndarray
    warnings: tuple[str, ...] = ()

    @property
    def half_width(self) -> int:
        return int(self.offsets[-1])

    def apply(self, f: np.ndarray, left: float, right: float) -> np.ndarray:
        """Convolve with constant extension by ``left``/``right`` beyond the grid."""
        m = self.half_width
        fpad = np.concatenate((np.full(m, left), f, np.full(m, right)))
        return np.convolve(fpad, self.weights, mode="valid")

    def nonlocal_op(self, f: np.ndarray, left: float, right: float) -> np.ndarray:
        """(J * f) - f as sum_j w_j (f(x_i - j h) - f(x_i)), exactly zero on constants."""
        m = self.half_width
        fpad = np.concatenate((np.full(m, left), f, np.full(m, right)))
        n = f.size
        out = np.zeros(n)
        for off, w in zip(self.offsets, self.weights):
            out += w * (fpad[m - off : m - off + n] - f)
        return out

    def apply_padded(self, fpad: np.ndarray) -> np.ndarray:
        """Convolve an array already padded with ``half_width`` ghost values on each side."""
        return np.convolve(fpad, self.weights, mode="valid")

    def apply_periodic(self, f: np.ndarray, method: str = "direct") -> np.ndarray:
        n, m = f.size, self.half_width
        if method == "fft":
            g = np.zeros(n)
            np.add.at(g, self.offsets % n, self.weights)
            return np.fft.irfft(np.fft.rfft(f) * np.fft.rfft(g), n)
        if m > n:
            reps = -(-m // n)
            tiled = np.tile(f, 2 * reps + 1)
            fpad = tiled[reps * n - m : reps * n + n + m]
        else:
            fpad = np.concatenate((f[n - m :], f, f[:m]))
        return self.apply_padded(fpad)


def _cubic_basis(t):
    """Lagrange basis on nodes -1, 0, 1, 2 evaluated at t in [0, 1]."""
    return np.stack(
        (
            -t * (t - 1) * (t - 2) / 6,
            (t + 1) * (t - 1) * (t - 2) / 2,
            -(t + 1) * t * (t - 2) / 2,
            (t + 1) * t * (t - 1) / 6,
        )
    )


def stencil(kernel: Kernel, h: float, order: int = 4) -> Stencil:
    """Build the convolution weights of ``kernel`` for grid spacing ``h``.

    ``order=4`` integrates J against the local cubic interpolant. ``order=2``
    uses the piecewise-linear interpolant instead; its weights are all
    nonnegative, so the discrete convolution preserves positivity of
    discontinuous data.
    """
    if not h > 0:
        raise ValueError("grid spacing h must be positive")
    if order not in (2, 4):
        raise ValueError(f"order must be 2 or 4, got {order!r}")
    R = kernel.effective_radius
    warns = []
    if kernel.family in (Family.GAUSSIAN, Family.TRUNCATED_GAUSSIAN) and h > kernel.sigma:
        warns.append(f"grid spacing h={h!r} exceeds kernel width sigma={kernel.sigma!r}")
    rad = kernel.support_radius
    if rad is not None and h > rad:
        warns.append(f"grid spacing h={h!r} exceeds support radius S={rad!r}")
    if kernel.family is Family.LAPLACE and h > 1.0 / kernel.alpha:
        warns.append(f"grid spacing h={h!r} exceeds decay length 1/alpha={1 / kernel.alpha!r}")

    c_lo, c_hi = math.floor(-R / h), math.ceil(R / h)
    cells = np.arange(c_lo, c_hi + 1) * h
    pts = np.union1d(cells[(cells > -R) & (cells < R)], [p for p in kernel.breakpoints() if -R <= p <= R])
    pts = np.union1d(pts, [-R, R])
    lo, hi = pts[:-1], pts[1:]
    keep = hi - lo > 1e-14 * h
    lo, hi = lo[keep], hi[keep]
    cell = np.floor(0.5 * (lo + hi) / h).astype(int)
    t, w = gauss_legendre(10)
    y = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    jw = evaluate(kernel, y) * (hi - lo)[:, None] * w[None, :]
    tau = y / h - cell[:, None]
    if order == 4:
        basis, first = _cubic_basis(tau), -1  # (4, npieces, nodes) on nodes -1..2
    else:
        basis, first = np.stack((1.0 - tau, tau)), 0
    contrib = np.einsum("kpn,pn->kp", basis, jw)
    j_min, j_max = cell.min() + first, cell.max() + first + basis.shape[0] - 1
    m = max(-j_min, j_max)
    weights = np.zeros(2 * m + 1)
    for k in range(basis.shape[0]):
        np.add.at(weights, cell + (k + first) + m, contrib[k])
    weights /= weights.sum()
    offsets = np.arange(-m, m + 1)
    return Stencil(h=float(h), offsets=offsets, weights=weights, warnings=tuple(warns))


@dataclass(frozen=True)
class ConvolutionResult:
    values: np.ndarray
    warnings: tuple[str, ...] = ()


Extension = Union[str, Callable[[np.ndarray], np.ndarray]]


def convolve(
    kernel: Kernel,
    f,
    h: float,
    extension: Extension = "constant",
    left: float | None = None,
    right: float | None = None,
    x0: float = 0.0,
    method: str = "direct",
) -> ConvolutionResult:
    """Samples of (J * f) on the grid ``x0 + i h`` of ``f``.

    ``extension`` is ``"constant"`` (tails ``left``/``right``, defaulting to
    the edge values), ``"periodic"``, or a callable returning f at arbitrary
    points outside the grid.
    """
    f = np.asarray(f, dtype=float)
    st = stencil(kernel, h)
    if extension == "periodic":
        vals = st.apply_periodic(f, method)
    elif extension == "constant":
        vals = st.apply(f, f[0] if left is None else left, f[-1] if right is None else right)
    elif callable(extension):
        m = st.half_width
        xl = x0 + h * np.arange(-m, 0)
        xr = x0 + h * np.arange(f.size, f.size + m)
        fpad = np.concatenate((extension(xl), f, extension(xr)))
        vals = st.apply_padded(fpad)
    else:
        raise ValueError(f"unknown extension {extension!r}")
    return ConvolutionResult(vals, st.warnings)


# ---------------------------------------------------------------------------
# validation


@dataclass
class ValidationReport:
    family: str
    normalization_defect: float
    symmetry_defect: float
    min_value: float
    lambda_hat: float
    lambda_hat_consistent: bool
    probes: list[dict]
    issues: list[str]

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "normalization_defect": self.normalization_defect,
            "symmetry_defect": self.symmetry_defect,
            "min_value": self.min_value,
            "lambda_hat": self.lambda_hat,
            "lambda_hat_consistent": self.lambda_hat_consistent,
            "probes": self.probes,
            "issues": self.issues,
            "ok": self.ok,
        }


def validate(kernel: Kernel, tol: float = 1e-8) -> ValidationReport:
    """Check the kernel hypotheses numerically; failures are collected, not raised."""
    issues = []
    R = kernel.effective_radius
    mass = integrate_pieces(lambda v: float(evaluate(kernel, v)), kernel.breakpoints(), QUAD_TOL)
    norm_defect = max(abs(mass - 1.0), abs(kernel.raw_mass - 1.0))
    if norm_defect > tol:
        issues.append(f"normalization defect {norm_defect:.3g} (mass as given {kernel.raw_mass:.10g})")

    ys = np.linspace(0.0, R, 1001)
    Jp, Jm = evaluate(kernel, ys), evaluate(kernel, -ys)
    sym = max(float(np.max(np.abs(Jp - Jm))), kernel.raw_asymmetry)
    if sym > 1e-12:
        issues.append(f"asymmetry {sym:.3g} (symmetrized on load)" if kernel.raw_asymmetry else f"asymmetry {sym:.3g}")
    min_val = float(min(Jp.min(), Jm.min()))
    if min_val < 0:
        issues.append(f"negative density value {min_val:.3g}")

    lam_hat = kernel.lambda_hat
    probes = []
    consistent = True
    if math.isfinite(lam_hat):
        probe_lams = [0.5 * lam_hat, 0.9 * lam_hat, (1 - 5e-4) * lam_hat]
    else:
        probe_lams = [c / kernel.scale for c in (1.0, 5.0, 20.0)]
    for lam in probe_lams:
        val = mgf(kernel, lam)
        finite = bool(np.isfinite(val))
        probes.append({"lambda": lam, "mgf": val if finite else None, "finite": finite})
        consistent &= finite
    if math.isfinite(lam_hat):
        try:
            mgf(kernel, lam_hat)
            probes.append({"lambda": lam_hat, "mgf": None, "domain_error": False})
            consistent = False
        except KernelDomainError:
            probes.append({"lambda": lam_hat, "mgf": None, "domain_error": True})
    if not consistent:
        issues.append("exponential moment not finite below lambda_hat or defined at lambda_hat")
    return ValidationReport(
        family=kernel.family.value,
        normalization_defect=norm_defect,
        symmetry_defect=sym,
        min_value=min_val,
        lambda_hat=lam_hat,
        lambda_hat_consistent=consistent,
        probes=probes,
        issues=issues,
    )
