import math

import pytest
from hypothesis import given, settings, strategies as st

from passive_bb84.bounds import (
    PH_SATURATED,
    Z_FLOORED,
    EstimateSet,
    decoy_coefficients,
    default_estimates,
    finite_key_bounds,
    lemma_constants,
    phase_error_upper,
    single_photon_z_lower,
    single_photon_z_yield,
)
from passive_bb84.channel import ObservedCounts, expected_counts
from passive_bb84.concentration import (
    DeviationInput,
    deviation_lower,
    deviation_upper,
    kato_lower_coeffs,
    kato_upper_coeffs,
)
from passive_bb84.protocol import (
    ChannelParams,
    ProtocolParams,
    poisson_photon_prob,
    single_photon_prob,
)

ZERO = {"S": 0.0, "D": 0.0, "V": 0.0}


def zero_counts():
    return ObservedCounts(n_z=dict(ZERO), n_x=dict(ZERO), n_x_error=dict(ZERO),
                          n_cross=dict(ZERO), n_sift=0.0, e_bit=0.0)


def zero_estimates():
    return EstimateSet(*([0.0] * 9))


def test_lemma_constants_reference_point():
    p = ProtocolParams(q=0.25, p_Z=0.75, p_X=0.25, d=0.0)
    c1, c2 = lemma_constants(p)
    assert c1 == pytest.approx(9.0, rel=1e-14)
    assert c2 == pytest.approx(0.75, rel=1e-14)
    assert c2 == pytest.approx(p.p_Z * (1 - 2 * p.q) / (2 * p.q), rel=1e-14)


@given(q=st.floats(0.01, 0.49), p_Z=st.floats(0.51, 0.99))
def test_c2_closed_form_without_dark_counts(q, p_Z):
    p = ProtocolParams(q=q, p_Z=p_Z, p_X=1 - p_Z, d=0.0)
    c1, c2 = lemma_constants(p)
    assert c1 == pytest.approx((1 - q) * p_Z / (q * (1 - p_Z)), rel=1e-12)
    assert c2 == pytest.approx(p_Z * (1 - 2 * q) / (2 * q), rel=1e-10)
    assert c2 >= 0


def test_c2_limits():
    assert lemma_constants(ProtocolParams(q=0.5 - 1e-12))[1] < 1e-10
    assert lemma_constants(ProtocolParams(d=1 - 1e-9))[1] < 1e-15


def test_lemma_constants_domain():
    with pytest.raises(ZeroDivisionError):
        lemma_constants(ProtocolParams(q=0.0))
    with pytest.raises(ValueError):
        lemma_constants(ProtocolParams(q=0.5))


@settings(max_examples=200, deadline=None)
@given(
    mu_S=st.floats(0.05, 1.5),
    ratio=st.floats(0.01, 0.95),
    p_S=st.floats(0.1, 0.8),
    p_D=st.floats(0.05, 0.5),
)
def test_decoy_sign_pattern(mu_S, ratio, p_S, p_D):
    p_V = 1 - p_S - p_D
    if p_V <= 0.01:
        return
    p = ProtocolParams(mu_S=mu_S, mu_D=mu_S * ratio, p_S=p_S, p_D=p_D, p_V=p_V)
    t_S, t_D, t_V = decoy_coefficients(p)
    assert t_S <= 0 <= t_D
    assert t_V <= 0


def test_decoy_poisson_identity():
    p = ProtocolParams()
    t = dict(zip("SDV", decoy_coefficients(p)))
    p1 = single_photon_prob(p)
    weight = lambda n: sum(t[w] * p.p(w) * poisson_photon_prob(w, n, p) for w in "SDV")
    assert weight(1) == pytest.approx(p1, rel=1e-12)
    assert weight(0) == pytest.approx(-p1 * p.mu_D / (p.mu_S * (p.mu_S - p.mu_D)), rel=1e-12)
    for n in range(2, 51):
        assert weight(n) <= 1e-15


def test_decoy_singular():
    with pytest.raises(ZeroDivisionError):
        decoy_coefficients(ProtocolParams(mu_D=0.5))


def test_zero_estimates_saturate_phase_bound():
    # a zero phase-error estimate pushes a_L past sqrt(N)/2
    p = ProtocolParams(N=1e10)
    assert phase_error_upper(zero_counts(), zero_estimates(), p, 1e-20 / 144) == p.N


def test_zero_counts_give_pure_deviation_bound():
    p = ProtocolParams(N=1e10)
    eps = 1e-20 / 144
    N = p.N
    est = EstimateSet(1e4, 0, 0, 0, 0, 0, 0, 0, 0)
    got = phase_error_upper(zero_counts(), est, p, eps)

    c1, c2 = lemma_constants(p)
    dev0 = DeviationInput(0.0, 0.0, N, eps)
    bracket = math.exp(p.mu_D) * deviation_upper(dev0) / p.p_D + deviation_lower(dev0) / p.p_V
    k = kato_lower_coeffs(N, 1e4, eps)
    value = single_photon_prob(p) / p.mu_D * (c1 + c2) * bracket + (k.b - k.a) * math.sqrt(N)
    value /= 1 - 2 * k.a / math.sqrt(N)
    assert got > 0
    assert got == pytest.approx(value, rel=1e-12)


def test_phase_bound_saturates():
    p = ProtocolParams(N=4.0)
    b = finite_key_bounds(zero_counts(), zero_estimates(), p, 1e-30)
    assert kato_lower_coeffs(4.0, 0.0, 1e-30).a >= 1.0
    assert b.n_ph1_upper == 4.0
    assert PH_SATURATED in b.branch_flags


def test_z_bound_floor():
    p = ProtocolParams(N=4.0)
    assert kato_upper_coeffs(4.0, 4.0, 1e-30).a <= -1.0
    est = EstimateSet(0, 4.0, 0, 0, 0, 0, 0, 0, 0)
    b = finite_key_bounds(zero_counts(), est, p, 1e-30)
    assert b.n_z1_lower == 0.0
    assert Z_FLOORED in b.branch_flags


def test_z_bound_clamped_for_empty_run():
    p = ProtocolParams(N=1e10)
    assert single_photon_z_lower(zero_counts(), zero_estimates(), p, 1e-20) == 0.0


def test_cross_terms_zero_reproduce_active():
    p = ProtocolParams(N=1e10)
    ch = ChannelParams(1e-2)
    c = expected_counts(p, ch)
    est = default_estimates(p, ch, c)
    no_cross = ObservedCounts(c.n_z, c.n_x, c.n_x_error, dict(ZERO), c.n_sift, c.e_bit)
    est0 = EstimateSet(**{**est.__dict__, "est_cross_D": 0.0, "est_cross_V": 0.0})
    with_zero_cross = phase_error_upper(no_cross, est0, p, 1e-20)
    # the cross-click deviation terms remain, so compare in asymptotic mode as well
    active = phase_error_upper(c, est, p, 1e-20, include_cross=False)
    passive = phase_error_upper(c, est, p, 1e-20)
    assert active <= passive
    assert phase_error_upper(no_cross, est0, p, 1e-20, asymptotic=True) == pytest.approx(
        phase_error_upper(c, est, p, 1e-20, include_cross=False, asymptotic=True), rel=1e-12)
    assert with_zero_cross >= active


def yield_oracle(n, eta, q, d):
    # each photon survives and lands on Z (eta (1-q)), on X (eta q), or is lost
    x_silent = (1 - eta * q) ** n * (1 - d) ** 2
    both_silent = (1 - eta) ** n * (1 - d) ** 4
    return x_silent - both_silent


def test_single_photon_yield_oracle():
    p = ProtocolParams(q=0.2, d=1e-3)
    ch = ChannelParams(0.37)
    assert single_photon_z_yield(p, ch) == pytest.approx(yield_oracle(1, 0.37, 0.2, 1e-3), rel=1e-12)


@pytest.mark.parametrize("eta", [1e-4, 1e-2, 0.5, 1.0])
def test_asymptotic_consistency(eta):
    p = ProtocolParams(N=1e10, delta_mis=0.0)
    ch = ChannelParams(eta)
    c = expected_counts(p, ch)
    got = single_photon_z_lower(c, default_estimates(p, ch, c), p, 1e-20, asymptotic=True)
    t = dict(zip("SDV", decoy_coefficients(p)))
    weight = lambda n: sum(t[w] * p.p(w) * poisson_photon_prob(w, n, p) for w in "SDV")
    expected = p.p_Z * sum(weight(n) * yield_oracle(n, eta, p.q, p.d) for n in range(60))
    assert got / p.N == pytest.approx(expected, rel=1e-9)
    # and it never overstates the true single-photon yield
    assert got / p.N <= p.p_Z * single_photon_prob(p) * yield_oracle(1, eta, p.q, p.d)


def test_bounds_within_unit_range():
    p = ProtocolParams(N=1e6)
    ch = ChannelParams(0.1)
    c = expected_counts(p, ch)
    b = finite_key_bounds(c, default_estimates(p, ch, c), p, 1e-10)
    assert 0 <= b.n_z1_lower <= p.N
    assert 0 <= b.n_ph1_upper <= p.N


def test_finite_looser_than_asymptotic():
    p = ProtocolParams(N=1e10)
    ch = ChannelParams(1e-2)
    c = expected_counts(p, ch)
    est = default_estimates(p, ch, c)
    fin = finite_key_bounds(c, est, p, 1e-20)
    asy = finite_key_bounds(c, est, p, 1e-20, asymptotic=True)
    assert fin.n_ph1_upper >= asy.n_ph1_upper
    assert fin.n_z1_lower <= asy.n_z1_lower


@settings(max_examples=60, deadline=None)
@given(
    field=st.sampled_from(["n_x_error", "n_cross"]),
    omega=st.sampled_from(["D", "V"]),
    bump=st.floats(1.0, 1e4),
)
def test_phase_bound_monotone(field, omega, bump):
    # d = 1e-4 puts every estimate well above the count where |a| reaches sqrt(N)/2
    p = ProtocolParams(N=1e10, d=1e-4)
    ch = ChannelParams(1e-2)
    c = expected_counts(p, ch)
    est = default_estimates(p, ch, c)
    base = phase_error_upper(c, est, p, 1e-20)
    bumped = dict(getattr(c, field))
    bumped[omega] += bump
    moved = phase_error_upper(ObservedCounts(**{**c.__dict__, field: bumped}), est, p, 1e-20)
    if omega == "D":
        assert moved >= base
    else:
        assert moved <= base


def test_phase_bound_reverses_for_sparse_vacuum_counts():
    # with an estimate near zero a_L > sqrt(N)/2, so the realised count enters
    # the lower deviation with a negative net weight
    p = ProtocolParams(N=1e10)
    ch = ChannelParams(1e-2)
    c = expected_counts(p, ch)
    est = default_estimates(p, ch, c)
    assert kato_lower_coeffs(p.N, est.est_x_error_V, 1e-20).a > math.sqrt(p.N) / 2
    bumped = dict(c.n_x_error)
    bumped["V"] += 1.0
    moved = phase_error_upper(ObservedCounts(**{**c.__dict__, "n_x_error": bumped}), est, p, 1e-20)
    assert moved > phase_error_upper(c, est, p, 1e-20)
