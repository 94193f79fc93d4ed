import math

import pytest
from hypothesis import given, settings, strategies as st

from passive_bb84.channel import (
    DegenerateChannelError,
    conditional_click_prob,
    conditional_error_prob,
    cross_click_prob,
    expected_counts,
    line_probabilities,
)
from passive_bb84.protocol import ChannelParams, ProtocolParams


def direct_click(mu_eta, own, other, d):
    return math.exp(-mu_eta * other) * (1 - d) ** 2 * (1 - math.exp(-mu_eta * own) * (1 - d) ** 2)


def direct_error(mu_eta, own, other, d):
    return math.exp(-mu_eta * other) * (1 - d) ** 2 * (
        math.exp(-mu_eta * own) * (d * (1 - d) + d * d / 2) + (1 - math.exp(-mu_eta * own)) * d / 2
    )


def test_vacuum_without_dark_counts_never_clicks():
    p = ProtocolParams(d=0.0)
    assert conditional_click_prob("Z", "V", p, ChannelParams(0.5)) == 0.0


def test_zero_intensity_pure_dark():
    d = 1e-3
    p = ProtocolParams(d=d)
    got = conditional_click_prob("Z", "V", p, ChannelParams(0.7))
    assert got == pytest.approx((1 - d) ** 2 * (1 - (1 - d) ** 2), rel=1e-14)


def test_click_direct_formula():
    p = ProtocolParams(mu_S=0.5, q=0.25, d=1e-6)
    got = conditional_click_prob("Z", "S", p, ChannelParams(0.1))
    assert got == pytest.approx(direct_click(0.05, 0.75, 0.25, 1e-6), rel=1e-12)
    got = conditional_click_prob("X", "S", p, ChannelParams(0.1))
    assert got == pytest.approx(direct_click(0.05, 0.25, 0.75, 1e-6), rel=1e-12)


def test_error_without_dark_counts():
    p = ProtocolParams(d=0.0)
    for w in ("S", "D", "V"):
        assert conditional_error_prob("Z", w, p, ChannelParams(0.3)) == 0.0


def test_error_zero_intensity():
    d = 1e-2
    p = ProtocolParams(d=d)
    got = conditional_error_prob("Z", "V", p, ChannelParams(0.3))
    assert got == pytest.approx((1 - d) ** 2 * (d * (1 - d) + d * d / 2), rel=1e-14)


def test_error_direct_formula():
    p = ProtocolParams(mu_S=0.5, q=0.25, d=1e-3)
    got = conditional_error_prob("Z", "S", p, ChannelParams(0.1))
    assert got == pytest.approx(direct_error(0.05, 0.75, 0.25, 1e-3), rel=1e-12)


def test_cross_zero_cases():
    assert cross_click_prob("V", ProtocolParams(d=0.0), ChannelParams(0.5)) == 0.0
    d = 1e-2
    got = cross_click_prob("V", ProtocolParams(d=d), ChannelParams(0.5))
    assert got == pytest.approx((1 - (1 - d) ** 2) ** 2, rel=1e-14)


def test_cross_direct_formula():
    mu_eta, q, d = 0.25, 0.3, 1e-6
    p = ProtocolParams(mu_S=0.5, q=q, d=d)
    # complement: P(both lines click) = 1 - P(Z silent) - P(X silent) + P(both silent)
    z_silent = math.exp(-mu_eta * (1 - q)) * (1 - d) ** 2
    x_silent = math.exp(-mu_eta * q) * (1 - d) ** 2
    expected = 1 - z_silent - x_silent + z_silent * x_silent
    assert cross_click_prob("S", p, ChannelParams(0.5)) == pytest.approx(expected, rel=1e-9)


@settings(max_examples=300, deadline=None)
@given(
    mu=st.floats(0.01, 2.0),
    eta=st.floats(0.0, 1.0),
    q=st.floats(0.01, 0.49),
    d=st.floats(0.0, 0.2),
)
def test_outcomes_partition_unity(mu, eta, q, d):
    p = ProtocolParams(mu_S=mu, mu_D=mu / 10, q=q, d=d)
    for w in ("S", "D", "V"):
        probs = line_probabilities(w, p, ChannelParams(eta))
        assert sum(probs.values()) == pytest.approx(1.0, abs=1e-12)
        assert min(probs.values()) >= 0
        for basis in ("Z", "X"):
            assert conditional_error_prob(basis, w, p, ChannelParams(eta)) <= probs[basis] + 1e-15


def test_degenerate_channel():
    with pytest.raises(DegenerateChannelError):
        expected_counts(ProtocolParams(d=0.0), ChannelParams(0.0))


def test_no_errors_without_noise():
    c = expected_counts(ProtocolParams(d=0.0, delta_mis=0.0), ChannelParams(0.1))
    assert c.e_bit == 0.0


def test_misalignment_adds_at_count_level():
    base = ProtocolParams(delta_mis=0.0)
    mis = ProtocolParams(delta_mis=0.03)
    ch = ChannelParams(1e-2)
    c0, c1 = expected_counts(base, ch), expected_counts(mis, ch)
    assert c1.e_bit == pytest.approx(c0.e_bit + 0.03, rel=1e-12)
    for w in ("S", "D", "V"):
        assert c1.n_x_error[w] == pytest.approx(c0.n_x_error[w] + 0.03 * c0.n_x[w], rel=1e-12)
        assert c1.n_z[w] == c0.n_z[w]


def test_counts_scale_with_pulses():
    ch = ChannelParams(1e-2)
    a = expected_counts(ProtocolParams(N=1e8), ch)
    b = expected_counts(ProtocolParams(N=1e10), ch)
    assert b.n_sift == pytest.approx(100 * a.n_sift, rel=1e-12)
    assert b.e_bit == pytest.approx(a.e_bit, rel=1e-12)
