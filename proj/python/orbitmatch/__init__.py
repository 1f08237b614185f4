"""Matching and shortest-distance scaling laws for random sequences and orbits.

Thin wrapper over the C++ core. Entropies are in nats. Angles are 128-bit
fixed-point numbers written as "0x" + 32 hex digits.
"""

from ._core import (
    AlphabetMismatch,
    ConfigError,
    ConvergenceError,
    DimensionMismatch,
    Error,
    FitError,
    InvalidArgument,
    IoError,
    MetricMismatch,
    NumericDegeneracy,
    __version__,
    collision_entropy,
    continued_fraction,
    correlation_dimension,
    correlation_sum,
    default_config,
    designed_theta,
    eta_estimate,
    golden_theta,
    h2_iid,
    h2_markov,
    lcs,
    lcs_text,
    mindist,
    normalize_config,
    orbit,
    rotation_mindist,
    run_experiment,
    sample_iid,
    sample_markov,
    sha256_file,
    sqrt2_theta,
    stationary_distribution,
)

__all__ = [name for name in dir() if not name.startswith("_")]
