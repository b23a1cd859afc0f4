"""Comparison-function certificates for nonlinear systems: coordinate changes,
interconnections, and verification by simulation."""

from . import certificates, comparison, interconnect, transforms
from .certificates import (
    IISS, ISS, AlphaIntegrable, L2Stable, LinearL2, NonlinearL2, TransformedCertificate, cert_from_dict,
)
from .comparison import (
    ScalarGainFn, certify_kinf, compose, evaluate, exp_minus_one, gain_sum, identity, inverse, inverse_eval,
    linear, log_one_plus, pointwise_max, pointwise_min, post_scale, power, pre_scale, residual,
)
from .errors import (
    BlowUpError, CertificationError, ConfigError, DomainError, GainCertError, PreconditionError, RangeError,
)
from .interconnect import CompositionFailure, SectorConstants, SmallGainParams, sector_check, small_gain_solve
from .transforms import CoordinateTransform, build_lower, build_upper, numeric_bounds

__version__ = "0.1.0"
