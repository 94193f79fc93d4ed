"""
Monte-Carlo checks of the model and the bounds
==============================================

Simulated pulses against the closed-form detection probabilities, then the
empirical failure rate of both single-photon bounds.
"""

# %%
from passive_bb84 import ChannelParams, ProtocolParams, SecurityParams
from passive_bb84.montecarlo import validate_bounds, validate_channel_model

params = ProtocolParams(p_Z=0.75, p_X=0.25, q=0.25, d=1e-3, delta_mis=0.0)
channel = ChannelParams(0.3)

# %%
# Every count of a million simulated pulses lies within a few standard
# deviations of its expectation.
rep = validate_channel_model(params, channel, 1_000_000, seed=1)
for key, z in rep.z_scores.items():
    print(f"{key:16s} observed {rep.observed[key]:9.0f} expected {rep.expected[key]:11.1f} z {z:+.2f}")

# %%
# Soundness at desk scale. The bounds hold in every trial, but at this size
# they sit far above the true phase-error count.
sec = SecurityParams(eps=1e-3)
desk = params.replace(N=1e5)
rep = validate_bounds(desk, channel, sec, trials=20, seed=2)
print(f"violations {rep.upper_violations}/{rep.lower_violations} of 20")
print(f"mean n_ph1 {sum(rep.n_ph1) / 20:.1f} vs mean bound {sum(rep.n_ph1_upper) / 20:.0f}")

# %%
# With heavy misalignment, a near-balanced splitter and a lossless channel
# the phase-error bound is tight enough that halving it is caught at once.
tight = ProtocolParams(N=1e6, p_Z=0.55, p_X=0.45, q=0.45, p_S=0.6, p_D=0.3, p_V=0.1,
                       mu_S=0.6, mu_D=0.1, d=1e-4, delta_mis=0.1)
for scale in (1.0, 0.5):
    rep = validate_bounds(tight, ChannelParams(1.0), sec, trials=5, seed=3, upper_scale=scale)
    print(f"bound x{scale}: {rep.upper_violations} of 5 trials violate it")
