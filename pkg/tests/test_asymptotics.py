import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from henon import asymptotics as asy
from henon.radial_ode import SyntheticProfile


def test_half_integer_example():
    p = asy.bessel_ik(0.5, 1.0)
    assert p.I == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-13)
    assert p.K == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-1.0), rel=1e-13)


def test_wronskian_example():
    assert asy.bessel_ik(1.3, 2.0).wronskian == pytest.approx(-0.5, rel=1e-10)


def test_large_argument_matches_expansion():
    s, nu = 50.0, 2.0
    ratio = asy.bessel_i(nu, s) * math.sqrt(2 * math.pi * s) / math.exp(s)
    mu4 = 4 * nu * nu
    series = 1 - (mu4 - 1) / (8 * s) + (mu4 - 1) * (mu4 - 9) / (2 * (8 * s) ** 2)
    assert ratio == pytest.approx(series, abs=5e-6)
    # the leading correction is far from negligible at this argument
    assert abs(ratio - 1) > 0.03


@settings(max_examples=200)
@given(st.floats(0, 6, allow_subnormal=False), st.floats(0.05, 60))
def test_against_reference(nu, s):
    Ih, Kh = asy.bessel_scaled(nu, s)
    assert Ih[0] == pytest.approx(special.ive(nu, s), rel=1e-11)
    assert Kh[0] == pytest.approx(special.kve(nu, s), rel=1e-11)


@settings(max_examples=100)
@given(st.floats(0, 5, allow_subnormal=False), st.floats(0.1, 40))
def test_wronskian_property(nu, s):
    assert abs(asy.bessel_ik(nu, s).wronskian * s + 1) < 1e-10


@pytest.mark.parametrize("nu", [0.0, 0.5, 1.0, 2.3, 4.0])
def test_regimes_agree_in_overlap(nu):
    s = np.linspace(15, 30, 31)
    Is, Ks = asy.bessel_scaled(nu, s, s_switch=1e9)
    Ia, Ka = asy.bessel_scaled(nu, s, s_switch=0.0)
    assert np.max(np.abs(Is / Ia - 1)) < 1e-9
    assert np.max(np.abs(Ks / Ka - 1)) < 1e-9


@pytest.mark.parametrize("nu", [0.3, 1.7])
def test_k_series_and_integral_agree(nu):
    s = np.geomspace(0.05, 2.0, 20)
    _, a = asy.bessel_scaled(nu, s, k_method="series")
    _, b = asy.bessel_scaled(nu, s, k_method="integral")
    assert np.allclose(a, b, rtol=1e-11, atol=0)


def test_integer_order_uses_stable_path():
    p = asy.bessel_ik(1.0 + 1e-6, 0.5)
    assert p.near_integer
    assert p.K == pytest.approx(special.kv(1.0 + 1e-6, 0.5), rel=1e-11)


def test_errors():
    with pytest.raises(ValueError):
        asy.bessel_ik(1.0, 0.0)
    with pytest.raises(ValueError):
        asy.bessel_scaled(-1.0, 1.0)
    with pytest.raises(asy.PrecisionError):
        asy.bessel_ik(1.0, 800.0)
    # scaled values stay finite where the unscaled ones overflow
    Ih, Kh = asy.bessel_scaled(1.0, 800.0)
    assert np.isfinite(Ih[0]) and np.isfinite(Kh[0])


def test_bessel_pair_round_trip():
    p = asy.bessel_ik(2.3, 3.0)
    assert asy.BesselPair.from_dict(p.to_dict()) == p


def test_kelvin_of_fundamental_solution_is_constant():
    k = 2.5
    t = np.geomspace(0.01, 50, 100)
    W = asy.kelvin(SyntheticProfile(t, t ** (1 - k), k), k)
    assert np.allclose(W.values, 1.0, rtol=1e-13)


def test_kelvin_of_zero():
    t = np.linspace(0.1, 5, 20)
    W = asy.kelvin(SyntheticProfile(t, np.zeros_like(t), 2.0, np.zeros_like(t)), 2.0)
    assert np.all(W.values == 0) and np.all(W.derivative == 0)


@given(st.floats(1.2, 4.0))
def test_kelvin_is_involution(k):
    t = np.geomspace(0.05, 20, 50)
    V = np.exp(-t) / (1 + t)
    dV = -np.exp(-t) / (1 + t) - np.exp(-t) / (1 + t) ** 2
    g = asy.GridFunction(t, V, dV)
    back = asy.kelvin(asy.kelvin(g, k), k)
    assert np.allclose(back.t, t, rtol=1e-14)
    assert np.allclose(back.values, V, rtol=1e-12)
    assert np.allclose(back.derivative, dV, rtol=1e-10)


def test_kelvin_of_ground_state(profile_3_1):
    k = profile_3_1.k
    W = asy.kelvin(profile_3_1, k)
    # sup of W t^{k-1} over the reciprocal grid is sup V
    assert np.max(W.values * W.t ** (k - 1)) == pytest.approx(np.max(profile_3_1.V[profile_3_1.grid > 0]), rel=1e-12)
    flux = asy.kelvin_flux_at_zero(W, k)
    assert np.all(np.abs(flux) < 1e-3)


def test_decay_square_source():
    rep = asy.verify_superexp_decay("square", 2.0, 1.0, np.linspace(0.5, 30, 60))
    w = dict(zip(rep.t.tolist(), np.abs(rep.weighted_Z).tolist()))
    assert w[15.0] / w[30.0] > 10
    assert rep.monotone_tail and rep.decade_ratio > 10
    assert rep.residual_max < 1e-7


@pytest.mark.parametrize("h", ["xlog", "pow1.5"])
def test_decay_other_sources(h):
    rep = asy.verify_superexp_decay(h, 2.0, 1.0, np.linspace(0.5, 30, 60))
    assert rep.monotone_tail and rep.decade_ratio > 1


def test_decay_zero_source_with_homogeneous_part():
    t = np.linspace(1.0, 30, 30)
    rep = asy.verify_superexp_decay("zero", 2.0, 1.0, t, b0=1.0, check_residual=False)
    beta = rep.beta
    nu = rep.nu
    expect = np.exp((t / beta) ** beta) * t**-nu * special.kv(nu, t)
    assert np.allclose(rep.weighted_Z, expect, rtol=1e-10)
    assert rep.monotone_tail


def test_decay_report_round_trip():
    rep = asy.verify_superexp_decay("square", 2.0, 1.0, np.linspace(1, 10, 10), check_residual=False)
    again = asy.DecayReport.from_dict(rep.to_dict())
    assert np.array_equal(again.weighted_Z, rep.weighted_Z) and again.decade_ratio == rep.decade_ratio


def test_unknown_source():
    with pytest.raises(ValueError):
        asy.tail_source("cube")
    assert asy.tail_source("s^2")[0] == "square"
