"""Exception hierarchy shared by every module of the toolkit."""


class GainCertError(Exception):
    """Base class for all toolkit errors."""


class DomainError(GainCertError, ValueError):
    """An argument lies outside the domain of an operation (negative s, eps <= 0, bad dims...)."""


class RangeError(GainCertError, ValueError):
    """A target value could not be bracketed inside the saturation range."""


class PreconditionError(GainCertError):
    """A comparison-function precondition (membership in K-infinity) failed."""


class CertificationError(GainCertError):
    """A numerically constructed bound could not be certified."""


class BlowUpError(GainCertError, ArithmeticError):
    """Integration left the simulation envelope or produced non-finite values."""


class ConfigError(GainCertError):
    """A run configuration is malformed or references unknown names."""
