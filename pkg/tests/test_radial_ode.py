import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from henon.nonlinearity import DomainError, NonlinearitySpec
from henon.radial_ode import (
    Event,
    ProblemSpec,
    RadialProfile,
    ShootingError,
    SyntheticProfile,
    classify,
    cov_forward,
    cov_inverse,
    decay_fit,
    integrate_ivp,
    k_of_alpha,
    lift_to_rn,
    radial_bound,
    rn_residual,
    shoot_ground_state,
    sobolev_ratio,
    taylor_start,
    weighted_integral,
)

# reference value from a run at integrator tolerance 1e-12
A_STAR_3_0_3 = 4.337387679977041


def test_k_values():
    assert k_of_alpha(0, 3) == 2.0
    assert k_of_alpha(2, 3) == 1.5
    assert k_of_alpha(0, 5) == 4.0


@given(st.one_of(st.just(0.0), st.floats(1e-6, 50)), st.floats(0, 20))
def test_change_of_variables_round_trip(r, alpha):
    t = cov_forward(r, alpha)
    assert cov_inverse(t, alpha) == pytest.approx(r, rel=1e-12, abs=1e-300)


def test_change_of_variables_rejects_negative():
    with pytest.raises(ValueError):
        cov_forward(-1.0, 1.0)
    with pytest.raises(ValueError):
        cov_inverse(np.array([1.0, -0.5]), 1.0)


def test_taylor_start():
    spec = ProblemSpec(3, 0.0, NonlinearitySpec.parse("pow:p=3"))
    V, dV = taylor_start(2.0, spec, 1e-3)
    assert dV == pytest.approx(-2e-3)
    assert V == pytest.approx(2.0 - 6.0 * 1e-6 / 6)
    with pytest.raises(DomainError):
        taylor_start(-1.0, spec)


def test_problem_spec_validation():
    F = NonlinearitySpec.parse("pow:p=3")
    with pytest.raises(DomainError):
        ProblemSpec(2, 1.0, F)
    with pytest.raises(DomainError):
        ProblemSpec(3, -0.5, F)
    assert ProblemSpec(5, 0.5, F).inadmissible
    assert not ProblemSpec(5, 1.5, F).inadmissible
    spec = ProblemSpec(4, 2.5, NonlinearitySpec.parse("alphapow:eps=1"))
    assert ProblemSpec.from_dict(spec.to_dict()).to_dict() == spec.to_dict()


def test_pinned_ground_state_value(profile_3_0):
    assert profile_3_0.a_star == pytest.approx(A_STAR_3_0_3, rel=1e-8)


def test_classification_brackets_the_ground_state(profile_3_1):
    spec, a = profile_3_1.spec, profile_3_1.a_star
    for d in (1e-2, 1e-5):
        assert classify(a * (1 - d), spec) is Event.UNDERSHOOT
        assert classify(a * (1 + d), spec) is Event.OVERSHOOT


def test_ivp_events(profile_3_1):
    spec, a = profile_3_1.spec, profile_3_1.a_star
    assert integrate_ivp(a, spec, decay_tol=1e-3).event is Event.DECAY
    assert integrate_ivp(a, spec, t_max=1.0).event is Event.TIMEOUT
    assert integrate_ivp(2 * a, spec).event is Event.OVERSHOOT


def test_profile_shape(profile_3_1):
    p = profile_3_1
    inner = p.grid <= p.t_handoff
    assert p.grid[0] == 0.0 and p.V[0] == p.a_star
    assert np.all(p.V > 0)
    assert np.all(p.dV[inner][1:] < 0)
    assert np.max(np.abs(p.residual())) < 1e-4


def test_profile_continuous_at_handoff(profile_3_1):
    p = profile_3_1
    lo = p.evaluate(p.t_handoff * (1 - 1e-12))
    hi = p.evaluate(p.t_handoff * (1 + 1e-12))
    assert lo[0] == pytest.approx(hi[0], rel=1e-8)
    assert lo[1] == pytest.approx(hi[1], rel=1e-3)


def test_nehari_identity(profile_3_1):
    p = profile_3_1
    k = p.k
    grad = p.energy_norms[0]
    rhs = weighted_integral(p, lambda t, V, dV: t**k * V * p.spec.Fb.evaluate(V)[0])
    assert grad == pytest.approx(rhs, rel=1e-7)


def test_lifted_profile_solves_pde(profile_3_1):
    r, res = rn_residual(profile_3_1)
    assert r.max() > 5
    assert np.max(np.abs(res)) < 1e-4
    lifted = lift_to_rn(profile_3_1)
    assert lifted.u[0] == profile_3_1.a_star and lifted.N == 3


def test_decay_rate_and_radial_bound(profile_3_2):
    assert 0.95 <= decay_fit(profile_3_2, 1.0) <= 1.01
    _, ratio = radial_bound(profile_3_2)
    assert np.all(ratio <= 1)
    assert sobolev_ratio(profile_3_2) > 0


@given(st.floats(0.3, 3.0), st.floats(1.1, 4.0))
def test_decay_fit_exact_on_synthetic_tail(delta, k):
    t = np.linspace(0.0, 40.0 / delta, 400)
    V = np.ones_like(t)
    V[1:] = t[1:] ** (-k / 2) * np.exp(-delta * t[1:])
    assert decay_fit(SyntheticProfile(t, V, k), 1.0, window=(10 / delta, 30 / delta)) == pytest.approx(delta, rel=1e-9)


def test_decay_fit_needs_a_tail():
    t = np.linspace(0, 1, 50)
    with pytest.raises(ShootingError) as err:
        decay_fit(SyntheticProfile(t, 1 - 0.5 * t, 2.0), 1.0)
    assert err.value.code == "TAIL_TOO_SHORT"


def test_no_bracket_below_cap():
    spec = ProblemSpec(3, 1.0, NonlinearitySpec.parse("pow:p=3"))
    with pytest.raises(ShootingError) as err:
        shoot_ground_state(spec, a_cap=1.5)
    assert err.value.code == "NO_BRACKET"


def test_warm_start_reproduces_cold_start(profile_3_1):
    warm = shoot_ground_state(profile_3_1.spec, guess=profile_3_1.a_star * 1.0005)
    assert warm.a_star == pytest.approx(profile_3_1.a_star, rel=1e-11)


def test_other_nonlinearities():
    for text, N, alpha in (("pow:p=2", 4, 1.0), ("alphapow:eps=1", 3, 1.0), ("poly:p=3,c2=0.5", 3, 1.0)):
        p = shoot_ground_state(ProblemSpec(N, alpha, NonlinearitySpec.parse(text)))
        assert np.all(p.V > 0)
        scale = abs(p.spec.Fb.evaluate(p.a_star)[0])
        assert np.max(np.abs(p.residual())) < 1e-6 * scale


def test_profile_round_trip(profile_3_0):
    again = RadialProfile.from_dict(profile_3_0.to_dict())
    assert again.a_star == profile_3_0.a_star
    assert np.array_equal(again.V, profile_3_0.V)
    t = np.linspace(0, 2 * profile_3_0.t_handoff, 50)
    assert np.array_equal(again.evaluate(t)[0], profile_3_0.evaluate(t)[0])
    with pytest.raises(ValueError):
        RadialProfile.from_dict({"type": "Other"})


def test_tail_matches_bessel_asymptotics(profile_3_0):
    # far out V ~ C t^{-k/2} e^{-t}
    t = np.array([40.0, 60.0])
    V, _ = profile_3_0.evaluate(t)
    k = profile_3_0.k
    rate = -math.log(V[1] * 60 ** (k / 2) / (V[0] * 40 ** (k / 2))) / 20
    assert rate == pytest.approx(1.0, abs=2e-3)


def test_halving_tolerance_moves_a_star_little(profile_3_1):
    finer = shoot_ground_state(profile_3_1.spec, 5e-11)
    assert abs(finer.a_star - profile_3_1.a_star) < 10 * 1e-10 * profile_3_1.a_star
    assert sobolev_ratio(finer) == pytest.approx(sobolev_ratio(profile_3_1), rel=1e-6)


def test_decay_fit_default_window_on_synthetic_profile():
    t = np.linspace(0, 40, 800)
    V = np.ones_like(t)
    V[1:] = t[1:] ** -1.0 * np.exp(-0.8 * t[1:])
    assert decay_fit(SyntheticProfile(t, V, 2.0), 1.0) == pytest.approx(0.8, abs=1e-3)
