import math

import numpy as np
from hypothesis import strategies as st

from genstab import FamilyParams

# shape exponents per regime, with the sign of a that makes a valid chf
SHAPES = {
    "a": (st.floats(-4.0, -0.05), -1.0),
    "b": (st.floats(0.05, 0.95), 1.0),
    "d": (st.floats(1.05, 1.95), -1.0),
    "e": (st.just(2.0), -1.0),
}


@st.composite
def valid_members(draw, regimes="abde", c_sign=None):
    regime = draw(st.sampled_from(list(regimes)))
    shape, a_sign = SHAPES[regime]
    gamma = draw(shape)
    a = a_sign * draw(st.floats(0.1, 5.0))
    sign = c_sign if c_sign is not None else draw(st.sampled_from([-1.0, 1.0]))
    if regime == "b":
        sign = 1.0 if c_sign is None else c_sign
    c = sign * draw(st.floats(0.2, 3.0))
    return FamilyParams(gamma, a, c)


@st.composite
def members_with_theta(draw, regimes="abde"):
    p = draw(valid_members(regimes))
    B = draw(st.floats(0.2, 5.0))
    theta = (1.0 - B) / p.c
    return p, theta


def random_members(n, seed, regimes="abde"):
    """Deterministic list of (params, theta) pairs spanning all regimes."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        regime = regimes[i % len(regimes)]
        lo, hi, a_sign = {"a": (-4, -0.05, -1), "b": (0.05, 0.95, 1), "d": (1.05, 1.95, -1), "e": (2, 2, -1)}[regime]
        gamma = 2.0 if regime == "e" else rng.uniform(lo, hi)
        c = rng.uniform(0.2, 3.0) * (1.0 if regime == "b" else rng.choice([-1.0, 1.0]))
        p = FamilyParams(gamma, a_sign * rng.uniform(0.1, 5.0), c)
        out.append((p, (1.0 - rng.uniform(0.2, 5.0)) / c))
    return out


def se_binomial(p, n):
    return math.sqrt(p * (1 - p) / n)


import pytest  # noqa: E402

from genstab import mle_fit, sample  # noqa: E402

IG_MEMBER = FamilyParams(0.5, 2.0, 1.0)
IG_FIT_SEED = 2024


@pytest.fixture(scope="session")
def ig_data():
    return sample(IG_MEMBER, 10_000, seed=IG_FIT_SEED).values


@pytest.fixture(scope="session")
def ig_fit(ig_data):
    return mle_fit(ig_data)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
