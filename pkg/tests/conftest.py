from __future__ import annotations

import pytest

from nlpredprey.bounds import construct
from nlpredprey.dispersion import ModelParams, minimal_speed
from nlpredprey.kernels import Kernel
from nlpredprey.wave import solve

# reference values frozen from independent oracles (see test_dispersion)
S_STAR_REF = 0.6828323480286598
LAMBDA_STAR_REF = 2.399357280515468


@pytest.fixture(scope="session")
def params():
    return ModelParams(5.0, 1.0, 0.5)


@pytest.fixture(scope="session")
def kernel():
    return Kernel.uniform(1.0)


@pytest.fixture(scope="session")
def speed(params, kernel):
    return minimal_speed(params, kernel)


@pytest.fixture(scope="session")
def super_bundle(params, kernel, speed):
    return construct(params, kernel, kernel, 1.2 * speed.s_star, speed=speed)


@pytest.fixture(scope="session")
def critical_bundle(params, kernel, speed):
    return construct(params, kernel, kernel, None, speed=speed)


@pytest.fixture(scope="session")
def super_profile(params, kernel, super_bundle):
    return solve(params, kernel, kernel, super_bundle, L=80.0, n=8000, tol=1e-6)


@pytest.fixture(scope="session")
def critical_profile(params, kernel, critical_bundle):
    return solve(params, kernel, kernel, critical_bundle, L=80.0, n=8000, tol=1e-5)
