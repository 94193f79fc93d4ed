"""
Kato's inequality on a Bernoulli sequence
=========================================

Coverage of the upper and lower deviation terms, and how much tighter the
optimised coefficients are than the a = 0 (Hoeffding-like) choice.
"""

# %%
import math

import numpy as np

from passive_bb84 import DeviationInput, deviation_lower, deviation_upper, kato_upper_coeffs

N, p, eps, trials = 10_000, 0.1, 1e-2, 1000
rng = np.random.default_rng(1)
counts = rng.binomial(N, p, size=trials)

# %%
# The sum of conditional probabilities is N p for i.i.d. draws. Count how
# often it escapes [M - Delta_L, M + Delta_U].
up = sum(N * p > m + deviation_upper(DeviationInput(m, N * p, N, eps)) for m in counts)
lo = sum(N * p < m - deviation_lower(DeviationInput(m, N * p, N, eps)) for m in counts)
print(f"upper violations {up}, lower violations {lo}, expected at most ~{eps * trials:.0f}")

# %%
# Width of the window for a rare event, against the a = 0 value.
for C in (10.0, 100.0, 1000.0, 5000.0):
    k = kato_upper_coeffs(N, C, eps)
    width = deviation_upper(DeviationInput(C, C, N, eps))
    print(f"C={C:6.0f}  a={k.a:8.3f}  Delta_U={width:8.2f}  a=0 width={math.sqrt(N * math.log(1 / eps) / 2):.2f}")
