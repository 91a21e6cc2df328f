"""Small scalar numerics shared by the modules: quadrature, 1-D search, root bracketing."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-10,
    max_depth: int = 60,
) -> float:
    """Integrate ``f`` over ``[a, b]`` by adaptive Simpson with Richardson correction.

    ``tol`` is an absolute tolerance on the whole interval; it is split in half
    at each bisection so the accumulated error stays below it.
    """
    if a == b:
        return 0.0
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0
    total = 0.0
    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, est, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        delta = left + right - est
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((lo, mid, flo, flm, fmid, left, 0.5 * eps, depth + 1))
            stack.append((mid, hi, fmid, frm, fhi, right, 0.5 * eps, depth + 1))
    return total


def integrate_pieces(
    f: Callable[[float], float], breakpoints, tol: float = 1e-10
) -> float:
    """Adaptive Simpson over consecutive pieces of a sorted breakpoint list."""
    pts = sorted(breakpoints)
    n = len(pts) - 1
    return sum(adaptive_simpson(f, pts[i], pts[i + 1], tol / n) for i in range(n))


_GL_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the ``n``-point Gauss-Legendre rule on [0, 1]."""
    if n not in _GL_CACHE:
        x, w = np.polynomial.legendre.leggauss(n)
        _GL_CACHE[n] = (0.5 * (x + 1.0), 0.5 * w)
    return _GL_CACHE[n]


def golden_section(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rtol: float = 1e-10,
    max_iter: int = 500,
    atol: float = 1e-15,
) -> tuple[float, float, tuple[float, float]]:
    """Minimize a unimodal ``f`` on ``[lo, hi]``.

    Returns ``(x_min, f_min, (lo, hi))`` where the last item is the final
    bracket; iteration stops once its width is below ``rtol * |x| + atol``.
    """
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if hi - lo <= rtol * max(abs(x1), abs(x2)) + atol:
            break
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
    if f1 <= f2:
        return x1, f1, (lo, hi)
    return x2, f2, (lo, hi)


def bisect(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    rtol: float = 1e-15,
    max_iter: int = 200,
) -> float:
    """Root of ``f`` on ``[lo, hi]`` by bisection; ``f(lo)`` and ``f(hi)`` must differ in sign.

    Runs until the bracket stops shrinking in floating point or its width is
    below ``rtol * |root|``.
    """
    flo, fhi = f(lo), f(hi)
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change on [{lo!r}, {hi!r}]: f={flo!r}, {fhi!r}")
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * abs(mid):
            break
        fm = f(mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    # endpoint with the smaller residual
    return lo if abs(flo) <= abs(f(hi)) else hi
