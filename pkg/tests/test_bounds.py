import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.optimize import brentq

from nlpredprey.bounds import (
    BoundsBundle,
    NumericalError,
    Regime,
    construct,
    construct_critical,
    delta_cap,
    eval_bundle,
    inequality_values,
    kink_jumps,
    nonlocal_action,
    verify,
    with_delta,
)
from nlpredprey.dispersion import ModelParams, PreconditionError, a_roots
from nlpredprey.kernels import Kernel, evaluate


def test_supercritical_constants_from_definitions(params, kernel, speed, super_bundle):
    b = super_bundle
    s = 1.2 * speed.s_star
    pair = a_roots(params, kernel, s, speed)
    l1, l2 = pair.lambda1, pair.lambda2
    assert b.regime is Regime.SUPERCRITICAL
    assert b.lambda1 == pytest.approx(l1, rel=1e-14)
    mu = 0.5 * (1 + min(l2 / l1, 2.0))
    assert b.mu == pytest.approx(mu, rel=1e-14)
    assert b.z0 == pytest.approx(math.log(b.q) / ((mu - 1) * l1), rel=1e-12)
    assert b.zM == pytest.approx(math.log(b.q * mu) / ((mu - 1) * l1), rel=1e-12)
    f = lambda z: math.exp(-l1 * z) - b.q * math.exp(-mu * l1 * z)
    assert b.z1 == pytest.approx(brentq(lambda z: f(z) - b.delta, b.z0, b.zM, xtol=1e-15), rel=1e-10)
    assert 0 < b.delta <= delta_cap(b)
    # frozen values for the reference case
    assert b.q == pytest.approx(13.882521467296295, rel=1e-10)
    assert b.delta == pytest.approx(3.8435233522029e-4, rel=1e-8)
    assert b.epsilon == pytest.approx(2.6697563076455036e-05, rel=1e-8)


def test_critical_constants(critical_bundle, speed):
    b = critical_bundle
    assert b.regime is Regime.CRITICAL
    assert b.s == speed.s_star
    assert b.z2 - b.z1 > b.S
    assert b.z1 < b.z2 < b.z3 < b.z4
    assert b.z0 < b.z4
    assert b.delta > 0 and b.epsilon > 0


def test_supercritical_verifies(super_bundle, kernel):
    rep = verify(super_bundle, kernel, kernel)
    assert rep.passed, rep.to_dict()
    assert all(v is None for v in rep.violations.values())


def test_critical_verifies(critical_bundle, kernel):
    rep = verify(critical_bundle, kernel, kernel)
    assert rep.passed, rep.to_dict()


@pytest.mark.parametrize("which", ["super_bundle", "critical_bundle"])
def test_kinks_continuous(which, request):
    jumps = kink_jumps(request.getfixturevalue(which))
    assert max(jumps.values()) <= 1e-12


@pytest.mark.parametrize("which", ["super_bundle", "critical_bundle"])
def test_sandwich_ordering(which, request):
    b = request.getfixturevalue(which)
    z = np.linspace(-60, 60, 24001)
    pu, pl, su, sl = eval_bundle(b, z)
    assert np.all(pl <= pu) and np.all(sl <= su)
    assert np.all(pl >= 0.5 - 1e-15)
    assert np.all(sl >= 0)


def test_nonlocal_action_against_scipy(super_bundle, kernel):
    """Oracle: the kinked convolution by scipy quad with explicit breakpoints."""
    b = super_bundle
    zs = np.array([-3.0, 0.2, b.z1 + 0.3, b.z1 - 0.5, 4.7, 12.0])
    for fn in (b.phi_upper, b.phi_lower, b.psi_upper, b.psi_lower):
        got = nonlocal_action(kernel, fn, b.kinks, zs)
        for z, g in zip(zs, got):
            brk = sorted({-1.0, 1.0, *[float(np.clip(z - k, -1, 1)) for k in b.kinks]})
            integrand = lambda y: float(evaluate(kernel, y)) * (float(fn(z - y)) - float(fn(z)))
            ref = sum(quad(integrand, lo, hi, epsabs=1e-15, epsrel=1e-13)[0] for lo, hi in zip(brk[:-1], brk[1:]))
            assert g == pytest.approx(ref, abs=1e-13)


def test_derivative_flags_match_finite_differences(super_bundle, critical_bundle):
    for b in (super_bundle, critical_bundle):
        z = np.linspace(-5, 30, 357) + 0.0123
        far = np.all(np.abs(z[:, None] - np.array(b.kinks)[None, :]) > 1e-3, axis=1)
        z = z[far]
        e = 1e-6
        for fn in (b.phi_upper, b.phi_lower, b.psi_upper, b.psi_lower):
            fd = (fn(z + e) - fn(z - e)) / (2 * e)
            assert np.max(np.abs(fd - fn(z, True))) < 1e-6


def test_sabotaged_bundle_fails_locally(super_bundle, kernel, params):
    # delta past (1 - d/b)/2 and past 1/2 = min phi_lower: the predator term turns negative
    bad = with_delta(super_bundle, 3 * 0.5 * (1 - params.d / params.b))
    rep = verify(bad, kernel, kernel)
    assert not rep.passed
    assert rep.min_L2 < -1e-9
    assert rep.violations["U1"] is None and rep.violations["U2"] is None and rep.violations["L1"] is None
    lo, hi = rep.violations["L2"]
    # confined to the plateau of the lower predator bound
    assert hi <= super_bundle.z1 + 1e-2
    assert lo <= rep.z_L2 <= hi


def test_doubling_delta_alone_keeps_inequality(super_bundle, kernel):
    """Doubling delta inside its natural range leaves the lower predator inequality intact."""
    rep = verify(with_delta(super_bundle, 2 * delta_cap(super_bundle)), kernel, kernel)
    assert rep.min_L2 >= -1e-9


def test_document_round_trip(super_bundle, critical_bundle):
    for b in (super_bundle, critical_bundle):
        doc = b.to_document()
        again = BoundsBundle.from_document(doc)
        assert again == b
        z = np.linspace(-10, 40, 501)
        for f, g in zip(eval_bundle(b, z), eval_bundle(again, z)):
            assert np.array_equal(f, g)


def test_document_rejects_bad_fields(super_bundle):
    doc = super_bundle.to_document()
    with pytest.raises(ValueError):
        BoundsBundle.from_document({**doc, "extra": 1})
    doc.pop("q")
    with pytest.raises(ValueError):
        BoundsBundle.from_document(doc)


def test_global_q_rule_underflows(params, kernel, speed):
    with pytest.raises(NumericalError):
        construct_critical(params, kernel, kernel, speed=speed, q_rule="global")


def test_preconditions(kernel):
    with pytest.raises(PreconditionError):
        construct(ModelParams(3.0, 1.0, 0.5), kernel, kernel, 1.0)
    with pytest.raises(PreconditionError):
        construct(ModelParams(5.0, 1.0, 1.5), kernel, kernel, 2.0)
    lap = Kernel.laplace(3.0)
    with pytest.raises(PreconditionError, match="compact support"):
        construct(ModelParams(5.0, 1.0, 0.5), kernel, lap, None)


def test_inequalities_hold_at_random_points(super_bundle, kernel):
    z = np.random.default_rng(0).uniform(-20, 30, 500)
    vals = inequality_values(super_bundle, kernel, kernel, z)
    assert vals["U1"].max() <= 1e-9 and vals["U2"].max() <= 1e-9
    assert vals["L1"].min() >= -1e-9 and vals["L2"].min() >= -1e-9


@given(factor=st.floats(1.05, 2.5), b=st.floats(0.6, 2.0), d_frac=st.floats(0.1, 0.8))
@settings(max_examples=6, deadline=None)
def test_supercritical_verifies_for_random_parameters(factor, b, d_frac):
    p = ModelParams(5.0, b, d_frac * b)
    k = Kernel.uniform(1.0)
    bundle = construct(p, k, k, None if factor == 1 else factor * construct_speed(p, k))
    rep = verify(bundle, k, k, grid_n=4000)
    assert rep.passed, rep.to_dict()


def construct_speed(p, k):
    from nlpredprey.dispersion import minimal_speed

    return minimal_speed(p, k).s_star
