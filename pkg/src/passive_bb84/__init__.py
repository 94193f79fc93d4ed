"""Finite-key key rates for decoy-state BB84 with a passive, biased basis choice."""

from .bounds import (
    BoundsResult,
    EstimateSet,
    decoy_coefficients,
    default_estimates,
    finite_key_bounds,
    lemma_constants,
    phase_error_upper,
    single_photon_z_lower,
)
from .channel import (
    DegenerateChannelError,
    ObservedCounts,
    conditional_click_prob,
    conditional_error_prob,
    cross_click_prob,
    expected_counts,
)
from .concentration import (
    DeviationInput,
    KatoCoefficients,
    deviation_lower,
    deviation_upper,
    kato_lower_coeffs,
    kato_upper_coeffs,
)
from .keyrate import (
    KeyRateResult,
    SecurityParams,
    binary_entropy,
    error_correction_cost,
    key_length,
    key_rate,
    secrecy_epsilons,
)
from .optimize import OptimizationSpec, optimize, sweep
from .protocol import (
    ChannelParams,
    InvalidParamsError,
    ProtocolParams,
    poisson_photon_prob,
    single_photon_prob,
    validate_params,
)

__version__ = "0.1.0"
