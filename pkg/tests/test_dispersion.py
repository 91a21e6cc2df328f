import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq, minimize_scalar

from conftest import LAMBDA_STAR_REF, S_STAR_REF
from nlpredprey.dispersion import (
    ModelParams,
    PreconditionError,
    a_roots,
    char_A,
    char_B,
    choose_lambda0,
    is_critical,
    minimal_speed,
    speed_objective,
)
from nlpredprey.kernels import Kernel, mgf, mgf_d1


def test_frozen_reference_speed(speed):
    assert speed.attained
    assert speed.s_star == pytest.approx(S_STAR_REF, abs=1e-14)
    assert speed.lambda_star == pytest.approx(LAMBDA_STAR_REF, rel=1e-9)


def test_against_brute_force_grid(params, kernel, speed):
    lam = np.linspace(1e-4, 30.0, 1_000_000)
    F = speed_objective(params, kernel, lam)
    i = int(np.argmin(F))
    assert abs(F[i] - speed.s_star) < 1e-8
    assert F[i] >= speed.s_star - 1e-15
    assert abs(lam[i] - speed.lambda_star) < 1e-4


def test_against_scipy_bounded_minimizer(params, kernel, speed):
    res = minimize_scalar(
        lambda v: speed_objective(params, kernel, v), bounds=(0.1, 10.0), method="bounded",
        options={"xatol": 1e-12},
    )
    assert res.fun == pytest.approx(speed.s_star, abs=1e-12)


def test_double_root_identity(params, kernel, speed):
    lam, s = speed.lambda_star, speed.s_star
    assert abs(params.d * mgf_d1(kernel, lam) - s) <= 1e-12
    assert abs(char_A(params, kernel, lam, s)) <= 1e-12


@given(
    b=st.floats(0.1, 5.0),
    d_frac=st.floats(0.05, 0.95),
    S=st.floats(0.2, 4.0),
)
@settings(max_examples=40, deadline=None)
def test_double_root_identity_random(b, d_frac, S):
    p = ModelParams(5.0, b, d_frac * b)
    k = Kernel.uniform(S)
    rep = minimal_speed(p, k)
    assert rep.attained
    assert abs(p.d * mgf_d1(k, rep.lambda_star) - rep.s_star) <= 1e-8 * max(1.0, rep.s_star)
    # nothing below s* on a coarse scan
    lam = np.linspace(1e-3, 3 * rep.lambda_star, 4001)
    assert np.min(speed_objective(p, k, lam)) >= rep.s_star * (1 - 1e-12)


@given(b=st.floats(0.2, 3.0), d=st.floats(0.05, 0.19))
@settings(max_examples=25, deadline=None)
def test_speed_increases_with_b(b, d):
    k = Kernel.gaussian(0.8)
    s1 = minimal_speed(ModelParams(5.0, b, d), k).s_star
    s2 = minimal_speed(ModelParams(5.0, 2 * b, d), k).s_star
    assert s2 > s1


@pytest.mark.parametrize(
    "kernel", [Kernel.laplace(1.5), Kernel.gaussian(0.6), Kernel.triangular(2.0), Kernel.truncated_gaussian(0.6, 1.5)],
    ids=lambda k: k.family.value,
)
def test_other_families_match_scipy(kernel):
    p = ModelParams(5.0, 1.0, 0.5)
    rep = minimal_speed(p, kernel)
    top = 0.999 * kernel.lambda_hat if math.isfinite(kernel.lambda_hat) else 40.0 / kernel.scale
    res = minimize_scalar(lambda v: speed_objective(p, kernel, v), bounds=(1e-3, top), method="bounded",
                          options={"xatol": 1e-12})
    assert rep.s_star == pytest.approx(res.fun, rel=1e-10)


def test_non_attainment_reported():
    # compact table with a declared abscissa below the stationary point
    y = np.linspace(-1, 1, 101)
    k = Kernel.tabulated(y, np.full_like(y, 0.5), lambda_hat=0.5)
    p = ModelParams(5.0, 1.0, 0.5)
    rep = minimal_speed(p, k)
    assert not rep.attained
    assert rep.lambda_star <= 0.5
    with pytest.raises(PreconditionError):
        a_roots(p, k, rep.s_star * 1.5, rep)


def test_a_roots_against_brentq(params, kernel, speed):
    s = 1.2 * speed.s_star
    pair = a_roots(params, kernel, s, speed)
    A = lambda v: char_A(params, kernel, v, s)
    l1 = brentq(A, 1e-9, speed.lambda_star, xtol=1e-15)
    l2 = brentq(A, speed.lambda_star, 20.0, xtol=1e-15)
    assert pair.lambda1 == pytest.approx(l1, rel=1e-12)
    assert pair.lambda2 == pytest.approx(l2, rel=1e-12)
    assert pair.lambda1 < speed.lambda_star < pair.lambda2
    lam = np.linspace(pair.lambda1, pair.lambda2, 101)[1:-1]
    assert np.all(char_A(params, kernel, lam, s) < 0)


def test_a_roots_rejects_slow_speed(params, kernel, speed):
    with pytest.raises(PreconditionError, match="minimal speed"):
        a_roots(params, kernel, 0.9 * speed.s_star, speed)
    with pytest.raises(PreconditionError):
        a_roots(params, kernel, speed.s_star, speed)


@given(st.floats(1.0001, 3.0))
@settings(max_examples=30, deadline=None)
def test_roots_bracket_lambda_star(factor):
    p = ModelParams(5.0, 1.0, 0.5)
    k = Kernel.uniform(1.0)
    rep = minimal_speed(p, k)
    pair = a_roots(p, k, factor * rep.s_star, rep)
    assert 0 < pair.lambda1 < rep.lambda_star < pair.lambda2
    for lam in (pair.lambda1, pair.lambda2):
        assert abs(char_A(p, k, lam, pair.s)) < 1e-12 * max(1.0, mgf(k, lam))


def test_lambda0(params, kernel, speed):
    s = 1.2 * speed.s_star
    pair = a_roots(params, kernel, s, speed)
    lam0 = choose_lambda0(params, kernel, s, pair.lambda1)
    assert char_B(params, kernel, lam0, s) < 0
    assert lam0 <= pair.lambda1
    # largest of the halving sequence
    assert lam0 == pytest.approx(0.5 * pair.lambda1)


def test_char_A_domain(params, kernel):
    with pytest.raises(ValueError):
        char_A(params, kernel, -0.1, 1.0)


def test_params_validation_and_hypotheses():
    with pytest.raises(ValueError, match="d"):
        ModelParams(5.0, 1.0, -1.0)
    with pytest.raises(ValueError):
        ModelParams(math.nan, 1.0, 1.0)
    with pytest.raises(PreconditionError, match="a >= 4"):
        ModelParams(3.0, 1.0, 0.5).require_wave_hypotheses()
    with pytest.raises(PreconditionError, match="d < b"):
        ModelParams(5.0, 1.0, 1.0).require_wave_hypotheses()
    assert ModelParams(5.0, 1.0, 0.5).a_star == pytest.approx(0.8)


def test_is_critical():
    assert is_critical(1.0, 1.0)
    assert is_critical(1.0 + 1e-13, 1.0)
    assert not is_critical(1.0 + 1e-9, 1.0)
