import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from henon.nonlinearity import (
    DomainError,
    NonlinearitySpec,
    admissible_alpha_min,
    check_assumptions,
    is_admissible,
)

CATALOGUE = [
    "pow:p=3",
    "pow:p=2",
    "pow:p=1.5,m=2",
    "poly:p=3,c2=0.5",
    "maxpow:p=3,q=2",
    "rational:p=2,q=3",
    "rational:p=3,q=2",
]


def test_cubic_values():
    F = NonlinearitySpec.parse("pow:p=3")
    assert F.evaluate(2.0) == (6.0, 11.0)
    assert F.evaluate(0.0) == (0.0, -1.0)


def test_rational_value_and_derivative():
    F = NonlinearitySpec.parse("rational:q=3,p=2,m=1")
    f, df = F.evaluate(1.0)
    assert f == pytest.approx(-0.5, abs=1e-15)
    h = 1e-6
    fd = (F(1 + h) - F(1 - h)) / (2 * h)
    assert df == pytest.approx(fd, abs=1e-6)


@pytest.mark.parametrize("text", CATALOGUE)
def test_finite_difference_derivative(text):
    F = NonlinearitySpec.parse(text)
    u = np.geomspace(0.01, 50, 400)
    u = u[np.abs(u - 1.0) > 2e-6]  # maxpow has a kink at u = 1
    h = 1e-6
    _, df = F.evaluate(u)
    fd = (F(u + h) - F(u - h)) / (2 * h)
    assert np.all(np.abs(df - fd) <= 1e-6 * (1 + np.abs(df)))


@pytest.mark.parametrize("text", CATALOGUE)
def test_fin0(text):
    F = NonlinearitySpec.parse(text)
    f0, df0 = F.evaluate(0.0)
    assert f0 == 0.0
    assert df0 == -F.m


@given(st.sampled_from(CATALOGUE), st.floats(0, 30, allow_nan=False))
def test_odd_extension(text, u):
    F = NonlinearitySpec.parse(text)
    assert F(-u) == -F(u)


@given(st.sampled_from(CATALOGUE))
def test_string_round_trip(text):
    F = NonlinearitySpec.parse(text)
    G = NonlinearitySpec.parse(F.to_string())
    assert G.kind == F.kind and dict(G.params) == dict(F.params) and G.coeffs == F.coeffs


def test_assumptions_cubic():
    rep = check_assumptions(NonlinearitySpec.parse("pow:p=3"))
    assert rep.theta == pytest.approx(1.0, abs=1e-12)
    assert rep.phi == pytest.approx(math.sqrt(2), abs=1e-10)
    assert rep.lambda_limit == pytest.approx(3.0, abs=1e-6)
    assert rep.passes["F2"] and rep.passes["F3"] and rep.passes["Fnozero"]
    # the literal form F(u) > theta fails just above theta
    assert not rep.passes["F2_literal"]


def test_assumptions_quadratic():
    rep = check_assumptions(NonlinearitySpec.parse("pow:p=2"))
    assert rep.theta == pytest.approx(1.0, abs=1e-12)
    assert rep.phi == pytest.approx(1.5, abs=1e-10)
    assert rep.lambda_limit == pytest.approx(2.0, abs=1e-6)


def test_phi_is_zero_of_primitive():
    F = NonlinearitySpec.parse("poly:p=3,c2=0.5")
    rep = check_assumptions(F)
    assert rep.theta < rep.phi
    assert abs(F.primitive(rep.phi)) < 1e-10


def test_maxpow_G_nonincreasing():
    rep = check_assumptions(NonlinearitySpec.parse("maxpow:p=3,q=2"))
    assert rep.passes["F3_G_nonincreasing"]


@settings(max_examples=30)
@given(st.floats(1.05, 6.0))
def test_power_has_positive_primitive_witness(p):
    rep = check_assumptions(NonlinearitySpec.parse(f"pow:p={p!r}"))
    assert rep.passes["Fnozero"]
    F = NonlinearitySpec.parse(f"pow:p={p!r}")
    assert F.primitive(rep.s_witness) > 0


def test_report_round_trip():
    rep = check_assumptions(NonlinearitySpec.parse("pow:p=3"))
    again = type(rep).from_dict(rep.to_dict())
    assert again.passes == rep.passes and again.phi == rep.phi


def test_alphapow_exponent_and_binding():
    F = NonlinearitySpec.parse("alphapow:eps=1")
    assert F.exponent(2.0, 3) == pytest.approx(8.0)
    with pytest.raises(DomainError):
        F.evaluate(1.0)
    assert F.evaluate(2.0, alpha=2.0, N=3)[0] == pytest.approx(2.0**8 - 2.0)
    assert F.bind(2.0, 3).kind == "pow"


@pytest.mark.parametrize(
    "text",
    ["pow:p=1", "pow:p=3,m=0", "pow:p=3,m=-1", "nope:p=3", "pow:p=abc", "pow:p=3,zz=1", "maxpow:p=3", "poly:p=3,c4=1", "pow"],
)
def test_invalid_specs(text):
    with pytest.raises(DomainError):
        NonlinearitySpec.parse(text)


def test_admissibility():
    F = NonlinearitySpec.parse("pow:p=3")
    assert admissible_alpha_min(3, 5) == 1.0
    assert not is_admissible(F, 1.0, 5)
    assert is_admissible(F, 1.5, 5)
    assert is_admissible(F, 0.0, 3)
