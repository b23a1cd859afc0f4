"""Stability certificates and the constructive equivalences between them.

Every certificate bounds an integral of the state by a transient term and an
input term::

    AlphaIntegrable  int alpha(|x|)     <= beta(|x0|)
    L2Stable         ||x||^2            <= beta(|x0|)
    ISS              int alpha(|x|)     <= beta(|x0|) (+) int sigma(|w|)
    IISS             int alpha(|x|)     <= beta(|x0|) (+) gamma(int sigma(|w|))
    LinearL2         ||x||^2            <= beta(|x0|) (+) gbar_sq ||w||^2
    NonlinearL2      ||x||^2            <= beta(|x0|) (+) gamma(||w||^2)

where (+) is ``max`` or ``+`` according to ``mode``.  All norms are truncated
at the current time t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields, replace
from typing import Mapping

from . import comparison as cf
from . import transforms as tr
from .comparison import ScalarGainFn
from .errors import DomainError, PreconditionError
from .transforms import CoordinateTransform

MODES = ("max", "sum")


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise DomainError(f"combine mode must be 'max' or 'sum', got {mode!r}")


class _CertMixin:
    kind: str = ""
    _gain_fields: tuple[str, ...] = ()
    _rhs_fields: tuple[str, ...] = ()

    def functions(self) -> dict[str, ScalarGainFn]:
        return {name: getattr(self, name) for name in self._gain_fields}

    def certify(self, grid: cf.GridSpec = cf.DEFAULT_GRID) -> dict[str, cf.KinfCertReport]:
        return {name: cf.certify_kinf(f, grid) for name, f in self.functions().items()}

    def validate(self) -> None:
        for name, report in self.certify().items():
            if not report:
                raise PreconditionError(f"{self.kind}.{name}: {report.summary()}")

    def with_trace(self, *steps: str):
        return replace(self, trace=tuple(self.trace) + steps)

    def to_dict(self) -> dict:
        doc = {"kind": self.kind, "mode": self.mode}
        for f in fields(self):
            if f.name in ("mode", "trace"):
                continue
            v = getattr(self, f.name)
            doc[f.name] = cf.to_dict(v) if isinstance(v, ScalarGainFn) else v
        if self.trace:
            doc["trace"] = list(self.trace)
        return doc

    @property
    def has_input(self) -> bool:
        return self.kind in ("ISS", "IISS", "LinearL2", "NonlinearL2")

    @property
    def state_integrand(self) -> ScalarGainFn:
        """Integrand applied to |x| on the left-hand side."""
        return getattr(self, "alpha", None) or cf.power(2.0)

    @property
    def input_integrand(self) -> ScalarGainFn | None:
        if not self.has_input:
            return None
        return getattr(self, "sigma", None) or cf.power(2.0)

    @property
    def input_gain(self) -> ScalarGainFn | None:
        """Outer gain applied to the input integral (identity for ISS; None without input)."""
        if self.kind in ("IISS", "NonlinearL2"):
            return self.gamma
        if self.kind == "LinearL2" and self.gamma_bar_sq > 0:
            return cf.linear(self.gamma_bar_sq)
        if self.kind == "ISS":
            return cf.identity()
        return None


@dataclass(frozen=True)
class AlphaIntegrable(_CertMixin):
    alpha: ScalarGainFn
    beta: ScalarGainFn
    mode: str = "max"
    trace: tuple = field(default=(), compare=False)
    kind = "AlphaIntegrable"
    _gain_fields = ("alpha", "beta")
    _rhs_fields = ("beta",)


@dataclass(frozen=True)
class L2Stable(_CertMixin):
    beta: ScalarGainFn
    mode: str = "max"
    trace: tuple = field(default=(), compare=False)
    kind = "L2Stable"
    _gain_fields = ("beta",)
    _rhs_fields = ("beta",)


@dataclass(frozen=True)
class ISS(_CertMixin):
    alpha: ScalarGainFn
    beta: ScalarGainFn
    sigma: ScalarGainFn
    mode: str = "max"
    trace: tuple = field(default=(), compare=False)
    kind = "ISS"
    _gain_fields = ("alpha", "beta", "sigma")
    _rhs_fields = ("beta", "sigma")


@dataclass(frozen=True)
class IISS(_CertMixin):
    alpha: ScalarGainFn
    beta: ScalarGainFn
    gamma: ScalarGainFn
    sigma: ScalarGainFn
    mode: str = "max"
    trace: tuple = field(default=(), compare=False)
    kind = "IISS"
    _gain_fields = ("alpha", "beta", "gamma", "sigma")
    _rhs_fields = ("beta", "gamma")


@dataclass(frozen=True)
class LinearL2(_CertMixin):
    beta: ScalarGainFn
    gamma_bar_sq: float
    mode: str = "max"
    trace: tuple = field(default=(), compare=False)
    kind = "LinearL2"
    _gain_fields = ("beta",)
    _rhs_fields = ("beta",)

    def __post_init__(self):
        if not (self.gamma_bar_sq >= 0 and math.isfinite(self.gamma_bar_sq)):
            raise DomainError("gamma_bar_sq must be a nonnegative real")


@dataclass(frozen=True)
class NonlinearL2(_CertMixin):
    beta: ScalarGainFn
    gamma: ScalarGainFn
    mode: str = "max"
    trace: tuple = field(default=(), compare=False)
    kind = "NonlinearL2"
    _gain_fields = ("beta", "gamma")
    _rhs_fields = ("beta", "gamma")


Certificate = AlphaIntegrable | L2Stable | ISS | IISS | LinearL2 | NonlinearL2
CERT_TYPES = {c.kind: c for c in (AlphaIntegrable, L2Stable, ISS, IISS, LinearL2, NonlinearL2)}


@dataclass(frozen=True)
class TransformedCertificate:
    """``cert`` holds for the system in coordinates z = T(x), v = S(w)."""

    state_transform: CoordinateTransform
    input_transform: CoordinateTransform | None
    cert: Certificate

    @property
    def trace(self) -> tuple:
        return self.cert.trace

    def to_dict(self) -> dict:
        doc = {"kind": "Transformed", "state_transform": self.state_transform.to_dict(),
               "cert": self.cert.to_dict()}
        if self.input_transform is not None:
            doc["input_transform"] = self.input_transform.to_dict()
        return doc


def cert_from_dict(doc, functions: Mapping[str, ScalarGainFn] | None = None,
                   transforms: Mapping[str, CoordinateTransform] | None = None):
    """Parse a certificate document (also accepts the ``Transformed`` wrapper)."""
    if isinstance(doc, (TransformedCertificate,) + tuple(CERT_TYPES.values())):
        return doc
    if not isinstance(doc, Mapping) or "kind" not in doc:
        raise DomainError(f"cannot parse certificate from {doc!r}")
    kind = doc["kind"]
    if kind == "Transformed":
        def tf(d):
            if isinstance(d, str):
                if transforms and d in transforms:
                    return transforms[d]
                return tr.generic(d)
            return tr.from_dict(d, functions)
        inner = cert_from_dict(doc["cert"], functions, transforms)
        s = doc.get("input_transform")
        return TransformedCertificate(tf(doc["state_transform"]), tf(s) if s is not None else None, inner)
    if kind not in CERT_TYPES:
        raise DomainError(f"unknown certificate kind {kind!r}")
    cls = CERT_TYPES[kind]
    kwargs = {"mode": doc.get("mode", "max")}
    _check_mode(kwargs["mode"])
    for name in cls._gain_fields:
        if name not in doc:
            raise DomainError(f"{kind} certificate is missing {name!r}")
        kwargs[name] = cf.from_dict(doc[name], functions)
    if cls is LinearL2:
        if "gamma_bar_sq" not in doc:
            raise DomainError("LinearL2 certificate is missing 'gamma_bar_sq'")
        kwargs["gamma_bar_sq"] = float(doc["gamma_bar_sq"])
    kwargs["trace"] = tuple(doc.get("trace", ()))
    return cls(**kwargs)


# ---------------------------------------------------------------------------
# equivalence constructors
# ---------------------------------------------------------------------------

def l2_to_alpha_integrable(c: L2Stable) -> AlphaIntegrable:
    return AlphaIntegrable(cf.power(2.0), c.beta, c.mode,
                           c.trace + ("L2-stable implies alpha-integrable with alpha(s) = s^2",))


def alpha_integrable_to_l2(c: AlphaIntegrable, n: int = 1) -> TransformedCertificate:
    """Coordinates z = T(x) with |T(x)|^2 <= alpha(|x|) make the system L2-stable."""
    T = tr.build_lower(cf.sqrt_gain(c.alpha), n)
    lo = tr.numeric_bounds(T).lower
    beta = cf.compose(c.beta, cf.inverse(lo))
    cert = L2Stable(beta, c.mode, c.trace + (
        f"alpha-integrable to L2-stable: T = lower diagonal transform of alpha^(1/2) on R^{n}, "
        "beta_new = beta o (lower bound of |T|)^-1",))
    return TransformedCertificate(T, None, cert)


def linear_l2_to_iss(c: LinearL2) -> ISS:
    sigma = cf.post_scale(c.gamma_bar_sq, cf.power(2.0)) if c.gamma_bar_sq > 0 else cf.power(2.0)
    return ISS(cf.power(2.0), c.beta, sigma, c.mode,
               c.trace + ("linear L2-gain implies ISS with alpha(s) = s^2, sigma(s) = gbar^2 s^2",))


def iss_to_linear_l2(c: ISS, gamma_bar: float = 1.0, n: int = 1, m: int = 1) -> TransformedCertificate:
    """Coordinates z = T(x), v = S(w) in which an ISS system has linear L2-gain gamma_bar^2."""
    if not (gamma_bar > 0 and math.isfinite(gamma_bar)):
        raise DomainError("gamma_bar must be a positive real")
    T = tr.build_lower(cf.sqrt_gain(c.alpha), n)
    S = tr.build_upper(cf.post_scale(1.0 / gamma_bar, cf.sqrt_gain(c.sigma)), m)
    lo = tr.numeric_bounds(T).lower
    cert = LinearL2(cf.compose(c.beta, cf.inverse(lo)), gamma_bar ** 2, c.mode, c.trace + (
        f"ISS to linear L2-gain {gamma_bar ** 2:g}: T = lower transform of alpha^(1/2), "
        "S = upper transform of sigma^(1/2)/gbar, beta_new = beta o (lower bound of |T|)^-1",))
    return TransformedCertificate(T, S, cert)


def nonlinear_l2_to_iiss(c: NonlinearL2) -> IISS:
    return IISS(cf.power(2.0), c.beta, c.gamma, cf.power(2.0), c.mode,
                c.trace + ("nonlinear L2-gain implies iISS with alpha(s) = sigma(s) = s^2",))


def iiss_to_nonlinear_l2(c: IISS, lam: float = 1.0, n: int = 1, m: int = 1) -> TransformedCertificate:
    """Coordinates in which an iISS system has nonlinear L2-gain s -> gamma(lam s)."""
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError("lambda must be a positive real")
    T = tr.build_lower(cf.sqrt_gain(c.alpha), n)
    S = tr.build_upper(cf.post_scale(lam ** -0.5, cf.sqrt_gain(c.sigma)), m)
    lo = tr.numeric_bounds(T).lower
    cert = NonlinearL2(cf.compose(c.beta, cf.inverse(lo)), cf.pre_scale(lam, c.gamma), c.mode, c.trace + (
        f"iISS to nonlinear L2-gain (lambda = {lam:g}): T = lower transform of alpha^(1/2), "
        "S = upper transform of sigma^(1/2)/sqrt(lambda), gamma_new(s) = gamma(lambda s)",))
    return TransformedCertificate(T, S, cert)


def max_to_sum(c):
    if c.mode != "max":
        raise DomainError("max_to_sum needs a certificate in max mode")
    return replace(c, mode="sum", trace=c.trace + ("max{a,b} <= a + b",))


def sum_to_max(c):
    if c.mode != "sum":
        raise DomainError("sum_to_max needs a certificate in sum mode")
    changes = {name: cf.post_scale(2.0, getattr(c, name)) for name in c._rhs_fields}
    if isinstance(c, LinearL2):
        changes["gamma_bar_sq"] = 2.0 * c.gamma_bar_sq
    return replace(c, mode="max", trace=c.trace + ("a + b <= max{2a, 2b}",), **changes)


def transform_cert(c, T: CoordinateTransform, S: CoordinateTransform | None = None):
    """Same-kind certificate for z = T(x), v = S(w)."""
    if not isinstance(c, (ISS, IISS, AlphaIntegrable)):
        raise DomainError(f"coordinate changes are only carried through ISS, iISS and alpha-integrable "
                          f"certificates, not {c.kind}")
    if c.has_input and S is None:
        raise DomainError(f"{c.kind} certificates need an input transform S")
    bT = tr.numeric_bounds(T)
    alpha = cf.compose(c.alpha, cf.inverse(bT.upper))
    beta = cf.compose(c.beta, cf.inverse(bT.lower))
    step = "coordinate change: alpha o (upper bound of |T|)^-1, beta o (lower bound of |T|)^-1"
    if isinstance(c, AlphaIntegrable):
        return AlphaIntegrable(alpha, beta, c.mode, c.trace + (step,))
    sigma = cf.compose(c.sigma, cf.inverse(tr.numeric_bounds(S).lower))
    step += ", sigma o (lower bound of |S|)^-1"
    if isinstance(c, ISS):
        return ISS(alpha, beta, sigma, c.mode, c.trace + (step,))
    return IISS(alpha, beta, c.gamma, sigma, c.mode, c.trace + (step,))
