"""Certificates for cascade and feedback interconnections.

Subsystem i has state x_i in R^(n_i) and input w_i in R^(m_i).  A cascade sets
w1 = x2 and keeps w2 as the external input; a feedback loop sets
w1 = x2 + eta1, w2 = x1 + eta2 (eta = 0 in the input-free variants).  Every
composed certificate is stated for the stacked state x = (x1, x2) and, where
present, the stacked external input.

Each builder returns a certificate on success or a falsy
:class:`CompositionFailure` explaining which condition failed.  The composed
functions are expression trees that spell out the bounding chain step by step:
Young splitting of squared norms, the weak triangle inequality
gamma(a + b) <= max{gamma(rho(a)), gamma(mu(b))}, a + b <= max{2a, 2b}, and
small-gain solves u <= a + g(u)  =>  u <= (Id - g)^-1(a).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import certificates as ce
from . import comparison as cf
from . import transforms as tr
from .comparison import ScalarGainFn
from .errors import DomainError, PreconditionError
from .transforms import CoordinateTransform

_ID = cf.identity()


@dataclass(frozen=True)
class CompositionFailure:
    reason: str
    report: object = None

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class SmallGainParams:
    """Young constant eps and weak-triangle function rho (rho - Id must be K-infinity).

    ``eps1``/``rho1`` and ``eps2``/``rho2`` override the shared pair for the
    bound derived for subsystem 1 and subsystem 2 respectively.
    """

    eps: float = 1.0
    rho: ScalarGainFn = field(default_factory=lambda: cf.linear(2.0))
    eps1: float | None = None
    eps2: float | None = None
    rho1: ScalarGainFn | None = None
    rho2: ScalarGainFn | None = None

    def site(self, i: int) -> tuple[float, ScalarGainFn]:
        eps = (self.eps1 if i == 1 else self.eps2) or self.eps
        rho = (self.rho1 if i == 1 else self.rho2) or self.rho
        return eps, rho

    def validate(self) -> None:
        for i in (1, 2):
            eps, rho = self.site(i)
            if not (eps > 0 and math.isfinite(eps)):
                raise DomainError("eps must be a positive real")
            cf.require_kinf(cf.excess(rho), f"rho - Id (site {i})")


@dataclass(frozen=True)
class SectorConstants:
    """Constants of the sector bounds; each is validated by :func:`sector_check` before use."""

    c: float | None = None
    c1: float | None = None
    c2: float | None = None
    c_s: tuple[float, float] | None = None
    c_t: tuple[float, float] | None = None
    lam: float = 1.0
    sample_evidence: int = 0


# ---------------------------------------------------------------------------
# checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SectorReport:
    ok: bool
    worst_ratio_sq: float      # sup |A|^2 / |B|^2 over the samples
    samples: int
    worst_point: tuple = ()

    def __bool__(self) -> bool:
        return self.ok


def sample_points(p: int, samples: int = 2048, r_range: tuple[float, float] = (1e-3, 1e3),
                  seed: int = 0) -> np.ndarray:
    """Sphere points at log-spaced radii plus quasi-random points filling balls."""
    dirs = tr.unit_directions(p, 16 * p, seed)
    per = max(2, samples // (2 * len(dirs)))
    radii = np.geomspace(r_range[0], r_range[1], per)
    sphere = (radii[:, None, None] * dirs[None]).reshape(-1, p)
    from scipy.stats import qmc
    cube = qmc.Halton(d=p, scramble=True, seed=seed).random(samples // 2) * 2 - 1
    scales = np.geomspace(r_range[0], r_range[1], len(cube))
    return np.vstack([sphere, cube * scales[:, None]])


def _sector_values(A, B, p: int, samples: int, r_range, seed: int):
    pts = sample_points(p, samples, r_range, seed)
    a = tr.safe_norm(np.asarray(tr.apply(A, pts)).reshape(pts.shape)) if A is not None \
        else np.linalg.norm(pts, axis=-1)
    b = tr.safe_norm(np.asarray(tr.apply(B, pts)).reshape(pts.shape)) if B is not None \
        else np.linalg.norm(pts, axis=-1)
    return pts, a, b


def _dim(A, B) -> int:
    dims = {T.dim for T in (A, B) if T is not None}
    if len(dims) > 1:
        raise DomainError("sector check needs transforms of equal dimension")
    return dims.pop() if dims else 1


def sector_check(A: CoordinateTransform | None, B: CoordinateTransform | None, c: float,
                 samples: int = 2048, r_range: tuple[float, float] = (1e-3, 1e3), seed: int = 0,
                 p: int | None = None) -> SectorReport:
    """|A(z)| <= sqrt(c) |B(z)| at every sampled z (None stands for the identity)."""
    p = p or _dim(A, B)
    pts, a, b = _sector_values(A, B, p, samples, r_range, seed)
    rhs = math.sqrt(c) * b
    ok = a <= rhs + 1e-9 * np.maximum(1.0, rhs)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(b > 0, (a / b) ** 2, np.where(a > 0, np.inf, 0.0))
    i = int(np.argmax(ratio))
    return SectorReport(bool(ok.all()), float(ratio[i]), len(pts), tuple(pts[i]))


def sector_constant(A: CoordinateTransform | None, B: CoordinateTransform | None, samples: int = 2048,
                    r_range: tuple[float, float] = (1e-3, 1e3), seed: int = 0, p: int | None = None) -> float:
    """Smallest c with |A| <= sqrt(c) |B| on the samples."""
    return sector_check(A, B, 1.0, samples, r_range, seed, p).worst_ratio_sq


@dataclass(frozen=True)
class GridConditionReport:
    ok: bool
    worst_s: float
    worst_violation: float

    def __bool__(self) -> bool:
        return self.ok


def grid_condition(f: ScalarGainFn, g: ScalarGainFn, c: float, grid: cf.GridSpec = cf.DEFAULT_GRID,
                   rtol: float = 1e-9) -> GridConditionReport:
    """f(s) <= c g(s) on the grid."""
    s = grid.samples()
    lhs = cf.evaluate(f, s)
    rhs = c * cf.evaluate(g, s)
    excess = lhs - rhs - rtol * np.maximum(1.0, rhs)
    i = int(np.argmax(excess))
    return GridConditionReport(bool(excess[i] <= 0), float(s[i]), float(lhs[i] - rhs[i]))


def small_gain_solve(a: ScalarGainFn, g: ScalarGainFn) -> ScalarGainFn:
    """From u <= a(s) + g(u) conclude u <= (Id - g)^-1(a(s))."""
    cf.require_kinf(cf.residual(g), "Id - g")
    return cf.compose(cf.inverse(cf.residual(g)), a)


def _sgc(g: ScalarGainFn) -> cf.KinfCertReport:
    return cf.certify_kinf(cf.residual(g))


def _as_max(c):
    return ce.sum_to_max(c) if c.mode == "sum" else c


def _expect(c, kind: str, name: str):
    if c.kind != kind:
        raise DomainError(f"{name} must be a {kind} certificate, got {c.kind}")


# ---------------------------------------------------------------------------
# nonlinear L2-gain interconnections
# ---------------------------------------------------------------------------

def cascade_nl2(c1: ce.NonlinearL2, c2: ce.NonlinearL2):
    """System 2 drives system 1 (w1 = x2); input w2."""
    _expect(c1, "NonlinearL2", "c1")
    _expect(c2, "NonlinearL2", "c2")
    c1, c2 = _as_max(c1), _as_max(c2)
    beta = cf.post_scale(2.0, cf.pointwise_max(c1.beta, cf.compose(c1.gamma, c2.beta), c2.beta))
    gamma = cf.post_scale(2.0, cf.pointwise_max(cf.compose(c1.gamma, c2.gamma), c2.gamma))
    return ce.NonlinearL2(beta, gamma, "max", (
        "cascade of nonlinear L2-gain systems: substitute the driver bound into the driven bound",
        "sum of the two maxima <= 2 max of all terms",
    ))


def feedback_nl2_no_input(c1: ce.NonlinearL2, c2: ce.NonlinearL2):
    """w1 = x2, w2 = x1.  L2-stable when Id - g_i o g_j is K-infinity for both orders."""
    _expect(c1, "NonlinearL2", "c1")
    _expect(c2, "NonlinearL2", "c2")
    c1, c2 = _as_max(c1), _as_max(c2)
    certs = {1: c1, 2: c2}
    parts = []
    for i, j in ((1, 2), (2, 1)):
        loop = cf.compose(certs[i].gamma, certs[j].gamma)
        report = _sgc(loop)
        if not report:
            return CompositionFailure(f"small-gain condition failed: Id - gamma{i} o gamma{j} is not K-infinity "
                                      f"({report.summary()})", report)
        a = cf.pointwise_max(certs[i].beta, cf.compose(certs[i].gamma, certs[j].beta))
        parts.append(small_gain_solve(a, loop))
    return ce.L2Stable(cf.gain_sum(*parts), "max", (
        "feedback without inputs: ||x_i||^2 <= max{beta_i, gamma_i o beta_j} + gamma_i o gamma_j(||x_i||^2)",
        "small-gain solve with (Id - gamma_i o gamma_j)^-1, then ||x||^2 = ||x_1||^2 + ||x_2||^2",
    ))


def _hat(gamma: ScalarGainFn, eps: float, rho: ScalarGainFn) -> ScalarGainFn:
    """s -> gamma(rho((1 + eps^2) s))."""
    return cf.compose(gamma, rho, cf.linear(1.0 + eps * eps))


def feedback_nl2_max(c1: ce.NonlinearL2, c2: ce.NonlinearL2, p: SmallGainParams = SmallGainParams()):
    """w_i = x_j + eta_i; nonlinear L2-gain from eta = (eta1, eta2) to x."""
    _expect(c1, "NonlinearL2", "c1")
    _expect(c2, "NonlinearL2", "c2")
    p.validate()
    c1, c2 = _as_max(c1), _as_max(c2)
    certs = {1: c1, 2: c2}
    hat = {i: _hat(certs[i].gamma, *p.site(i)) for i in (1, 2)}
    betas, gammas = [], []
    for i, j in ((1, 2), (2, 1)):
        loop = cf.compose(hat[i], hat[j])
        report = _sgc(loop)
        if not report:
            return CompositionFailure(f"small-gain condition failed: Id - hat_gamma{i} o hat_gamma{j} is not "
                                      f"K-infinity ({report.summary()})", report)
        eps_i, rho_i = p.site(i)
        eps_j, rho_j = p.site(j)
        mu_i = cf.compose(cf.mu_of(rho_i), cf.linear(1.0 + 1.0 / eps_i ** 2))
        mu_j = cf.compose(cf.mu_of(rho_j), cf.linear(1.0 + 1.0 / eps_j ** 2))
        B = cf.pointwise_max(certs[i].beta, cf.compose(hat[i], certs[j].beta))
        G = cf.pointwise_max(cf.compose(certs[i].gamma, mu_i), cf.compose(hat[i], certs[j].gamma, mu_j))
        betas.append(small_gain_solve(B, loop))
        gammas.append(small_gain_solve(G, loop))
    beta = cf.post_scale(2.0, cf.pointwise_max(*betas))
    gamma = cf.post_scale(2.0, cf.pointwise_max(*gammas))
    return ce.NonlinearL2(beta, gamma, "max", (
        "feedback with inputs (max form): Young splitting ||x_j + eta_i||^2 <= (1+eps^2)||x_j||^2 "
        "+ (1+1/eps^2)||eta_i||^2",
        "weak triangle inequality with rho and mu = rho o (rho - Id)^-1",
        "small-gain solve with (Id - hat_gamma_i o hat_gamma_j)^-1, then sum of two maxima <= 2 max",
    ))


def feedback_nl2_sum(c1: ce.NonlinearL2, c2: ce.NonlinearL2, p: SmallGainParams = SmallGainParams()):
    """Sum-form version of :func:`feedback_nl2_max`; the result is in sum mode."""
    _expect(c1, "NonlinearL2", "c1")
    _expect(c2, "NonlinearL2", "c2")
    p.validate()
    certs = {1: c1 if c1.mode == "sum" else ce.max_to_sum(c1),
             2: c2 if c2.mode == "sum" else ce.max_to_sum(c2)}
    hat = {i: _hat(certs[i].gamma, *p.site(i)) for i in (1, 2)}
    tilde = {}
    for i in (1, 2):
        eps, rho = p.site(i)
        tilde[i] = cf.compose(certs[i].gamma, rho, rho, cf.linear(1.0 + eps * eps))
    two = cf.linear(2.0)
    betas, gammas = [], []
    for i, j in ((1, 2), (2, 1)):
        eps_i, rho_i = p.site(i)
        eps_j, rho_j = p.site(j)
        loop = cf.compose(tilde[i], rho_i, hat[j])
        report = _sgc(loop)
        if not report:
            return CompositionFailure(f"small-gain condition failed: Id - tilde_gamma{i} o rho o hat_gamma{j} "
                                      f"is not K-infinity ({report.summary()})", report)
        mu = cf.mu_of(rho_i)
        in_i = cf.compose(cf.mu_of(rho_i), cf.linear(1.0 + 1.0 / eps_i ** 2))
        in_j = cf.compose(cf.mu_of(rho_j), cf.linear(1.0 + 1.0 / eps_j ** 2))
        B = cf.gain_sum(certs[i].beta, cf.compose(hat[i], mu, two, certs[j].beta))
        G = cf.gain_sum(cf.compose(certs[i].gamma, in_i),
                        cf.compose(hat[i], mu, two, certs[j].gamma, in_j))
        phi = small_gain_solve(_ID, loop)
        betas.append(cf.compose(phi, two, B))
        gammas.append(cf.compose(phi, two, G))
    return ce.NonlinearL2(cf.gain_sum(*betas), cf.gain_sum(*gammas), "sum", (
        "feedback with inputs (sum form): Young splitting and the weak triangle inequality on "
        "hat_gamma_i(hat_gamma_j(u) + rest)",
        "hat_gamma_i o rho <= tilde_gamma_i o rho since rho >= Id",
        "small-gain solve with (Id - tilde_gamma_i o rho o hat_gamma_j)^-1 and Phi(a + b) <= Phi(2a) + Phi(2b)",
    ))


# ---------------------------------------------------------------------------
# ISS / iISS interconnections
# ---------------------------------------------------------------------------

def _squared_lower(T: CoordinateTransform) -> ScalarGainFn:
    return cf.square_gain(tr.numeric_bounds(T).lower)


def _alpha_int_beta(beta_tilde: ScalarGainFn, up1: ScalarGainFn, up2: ScalarGainFn,
                    rho: ScalarGainFn) -> ScalarGainFn:
    """beta_tilde(|xi|) <= max{beta_tilde o rho o up1, beta_tilde o mu o up2}(|x(0)|)."""
    return cf.pointwise_max(cf.compose(beta_tilde, rho, up1), cf.compose(beta_tilde, cf.mu_of(rho), up2))


def feedback_iss_via_linear(c1: ce.ISS, c2: ce.ISS, k: SectorConstants, n1: int = 1, n2: int = 1,
                            rho: ScalarGainFn | None = None, samples: int = 2048):
    """Feedback w1 = x2, w2 = x1 of ISS systems via linear-L2 coordinates; alpha-integrable if c1 c2 < 1."""
    _expect(c1, "ISS", "c1")
    _expect(c2, "ISS", "c2")
    rho = rho or cf.linear(2.0)
    cf.require_kinf(cf.excess(rho), "rho - Id")
    c1, c2 = _as_max(c1), _as_max(c2)
    if k.c1 is None or k.c2 is None:
        raise DomainError("feedback_iss_via_linear needs sector constants c1 and c2")
    t1 = ce.iss_to_linear_l2(c1, 1.0, n1, n2)
    t2 = ce.iss_to_linear_l2(c2, 1.0, n2, n1)
    T = {1: t1.state_transform, 2: t2.state_transform}
    S = {1: t1.input_transform, 2: t2.input_transform}
    const = {1: k.c1, 2: k.c2}
    for i, j in ((1, 2), (2, 1)):
        rep = sector_check(S[j], T[i], const[i], samples)
        if not rep:
            return CompositionFailure(f"sector bound |S{j}(z)| <= sqrt(c{i}) |T{i}(z)| violated "
                                      f"(sampled sup ratio^2 = {rep.worst_ratio_sq:.6g})", rep)
    if k.c1 * k.c2 >= 1:
        return CompositionFailure(f"small-gain condition c1 c2 < 1 failed (c1 c2 = {k.c1 * k.c2:g})")
    bh = {1: t1.cert.beta, 2: t2.cert.beta}
    b1 = cf.pointwise_max(bh[1], cf.post_scale(k.c2, bh[2]))
    b2 = cf.pointwise_max(bh[2], cf.post_scale(k.c1, bh[1]))
    beta_tilde = cf.post_scale(1.0 / (1.0 - k.c1 * k.c2), cf.gain_sum(b1, b2))
    up = {i: tr.numeric_bounds(T[i]).upper for i in (1, 2)}
    beta = _alpha_int_beta(beta_tilde, up[1], up[2], rho)
    alpha = cf.sum_lower_envelope(_squared_lower(T[1]), _squared_lower(T[2]))
    return ce.AlphaIntegrable(alpha, beta, "max", (
        "convert each ISS system to linear L2-gain 1 in coordinates (T_i, S_i)",
        f"sector bounds |S_j| <= sqrt(c_i)|T_i| with c1 = {k.c1:g}, c2 = {k.c2:g}",
        "||psi_i||^2 <= beta_i(|xi|)/(1 - c1 c2); weak triangle inequality on |xi| <= |xi_1| + |xi_2|",
        "alpha from the sum lower envelope of the squared lower bounds of |T_i|",
    ))


def _nl2_pair(c1: ce.IISS, c2: ce.IISS, n1: int, n2: int, m1: int, m2: int, lam: float = 1.0):
    return ce.iiss_to_nonlinear_l2(c1, lam, n1, m1), ce.iiss_to_nonlinear_l2(c2, lam, n2, m2)


def cascade_iiss_via_nl2(c1: ce.IISS, c2: ce.IISS, k: SectorConstants, n1: int = 1, n2: int = 1, m2: int = 1,
                         samples: int = 2048):
    """System 2 drives system 1 (w1 = x2); iISS from w2 when |S1(z)| <= sqrt(c)|T2(z)|."""
    _expect(c1, "IISS", "c1")
    _expect(c2, "IISS", "c2")
    if k.c is None:
        raise DomainError("cascade_iiss_via_nl2 needs the sector constant c")
    c1, c2 = _as_max(c1), _as_max(c2)
    t1, t2 = _nl2_pair(c1, c2, n1, n2, n2, m2)
    rep = sector_check(t1.input_transform, t2.state_transform, k.c, samples)
    if not rep:
        return CompositionFailure(f"sector bound |S1(z)| <= sqrt(c)|T2(z)| violated "
                                  f"(sampled sup ratio^2 = {rep.worst_ratio_sq:.6g})", rep)
    b1, g1 = t1.cert.beta, t1.cert.gamma
    b2, g2 = t2.cert.beta, t2.cert.gamma
    up1 = tr.numeric_bounds(t1.state_transform).upper
    up2 = tr.numeric_bounds(t2.state_transform).upper
    cc = cf.linear(k.c)
    beta = cf.post_scale(2.0, cf.pointwise_max(cf.compose(b1, up1), cf.compose(g1, cc, b2, up2),
                                               cf.compose(b2, up2)))
    gamma = cf.post_scale(2.0, cf.pointwise_max(cf.compose(g1, cc, g2), g2))
    alpha = cf.sum_lower_envelope(_squared_lower(t1.state_transform), _squared_lower(t2.state_transform))
    sigma = cf.square_gain(tr.numeric_bounds(t2.input_transform).upper)
    return ce.IISS(alpha, beta, gamma, sigma, "max", (
        "convert each iISS system to nonlinear L2-gain in coordinates (T_i, S_i)",
        f"sector bound |S1| <= sqrt(c)|T2| with c = {k.c:g}",
        "cascade bound, sum of two maxima <= 2 max; |xi_i| <= upper bound of |T_i|",
        "sigma = (upper bound of |S2|)^2; alpha from squared lower bounds of |T_i|",
    ))


def cascade_iiss_direct(c1: ce.IISS, c2: ce.IISS, c: float):
    """System 2 drives system 1 (w1 = x2); iISS from w2 when sigma1 <= c alpha2."""
    _expect(c1, "IISS", "c1")
    _expect(c2, "IISS", "c2")
    c1, c2 = _as_max(c1), _as_max(c2)
    rep = grid_condition(c1.sigma, c2.alpha, c)
    if not rep:
        return CompositionFailure(f"condition sigma1 <= c alpha2 fails near s = {rep.worst_s:.6g} "
                                  f"(excess {rep.worst_violation:.6g})", rep)
    cc = cf.linear(c)
    beta = cf.post_scale(2.0, cf.pointwise_max(c1.beta, cf.compose(c1.gamma, cc, c2.beta), c2.beta))
    gamma = cf.post_scale(2.0, cf.pointwise_max(cf.compose(c1.gamma, cc, c2.gamma), c2.gamma))
    alpha = cf.sum_lower_envelope(c1.alpha, c2.alpha)
    return ce.IISS(alpha, beta, gamma, c2.sigma, "max", (
        f"cascade of iISS systems with sigma1 <= {c:g} alpha2 on the grid",
        "substitute the driver estimate into the driven estimate; sum of two maxima <= 2 max",
        "alpha from the sum lower envelope of alpha1, alpha2",
    ))


def feedback_iiss_no_input(c1: ce.IISS, c2: ce.IISS, k: SectorConstants, n1: int = 1, n2: int = 1,
                           rho: ScalarGainFn | None = None, samples: int = 2048):
    """Feedback w1 = x2, w2 = x1 of iISS systems via nonlinear-L2 coordinates; alpha-integrable."""
    _expect(c1, "IISS", "c1")
    _expect(c2, "IISS", "c2")
    rho = rho or cf.linear(2.0)
    cf.require_kinf(cf.excess(rho), "rho - Id")
    if k.c1 is None or k.c2 is None:
        raise DomainError("feedback_iiss_no_input needs sector constants c1 and c2")
    c1, c2 = _as_max(c1), _as_max(c2)
    t1, t2 = _nl2_pair(c1, c2, n1, n2, n2, n1)
    T = {1: t1.state_transform, 2: t2.state_transform}
    S = {1: t1.input_transform, 2: t2.input_transform}
    bh = {1: t1.cert.beta, 2: t2.cert.beta}
    gh = {1: t1.cert.gamma, 2: t2.cert.gamma}
    const = {1: k.c1, 2: k.c2}
    for i, j in ((1, 2), (2, 1)):
        rep = sector_check(S[j], T[i], const[i], samples)
        if not rep:
            return CompositionFailure(f"sector bound |S{j}(z)| <= sqrt(c{i}) |T{i}(z)| violated "
                                      f"(sampled sup ratio^2 = {rep.worst_ratio_sq:.6g})", rep)
    parts = []
    for i, j in ((1, 2), (2, 1)):
        loop = cf.compose(gh[i], cf.linear(const[j]), gh[j], cf.linear(const[i]))
        report = _sgc(loop)
        if not report:
            return CompositionFailure(f"small-gain condition failed: Id - hat_gamma{i}(c{j} hat_gamma{j}(c{i} .)) "
                                      f"is not K-infinity ({report.summary()})", report)
        B = cf.pointwise_max(bh[i], cf.compose(gh[i], cf.linear(const[j]), bh[j]))
        parts.append(small_gain_solve(B, loop))
    beta_tilde = cf.gain_sum(*parts)
    up = {i: tr.numeric_bounds(T[i]).upper for i in (1, 2)}
    beta = _alpha_int_beta(beta_tilde, up[1], up[2], rho)
    alpha = cf.sum_lower_envelope(_squared_lower(T[1]), _squared_lower(T[2]))
    return ce.AlphaIntegrable(alpha, beta, "max", (
        "convert each iISS system to nonlinear L2-gain in coordinates (T_i, S_i)",
        f"sector bounds |S_j| <= sqrt(c_i)|T_i| with c1 = {k.c1:g}, c2 = {k.c2:g}",
        "small-gain solve of ||psi_i||^2 <= max{hat_beta_i, hat_gamma_i(c_j hat_beta_j)} "
        "+ hat_gamma_i(c_j hat_gamma_j(c_i ||psi_i||^2))",
        "weak triangle inequality on |xi| <= |xi_1| + |xi_2|; alpha from squared lower bounds of |T_i|",
    ))


def feedback_iiss_with_input(c1: ce.IISS, c2: ce.IISS, k: SectorConstants,
                             p: SmallGainParams = SmallGainParams(), n1: int = 1, n2: int = 1,
                             samples: int = 2048):
    """Feedback w_i = x_j + eta_i of iISS systems via nonlinear-L2 coordinates; iISS from eta."""
    _expect(c1, "IISS", "c1")
    _expect(c2, "IISS", "c2")
    p.validate()
    if k.c_s is None or k.c_t is None:
        raise DomainError("feedback_iiss_with_input needs sector constants c_s and c_t")
    c1, c2 = _as_max(c1), _as_max(c2)
    t1, t2 = _nl2_pair(c1, c2, n1, n2, n2, n1)
    T = {1: t1.state_transform, 2: t2.state_transform}
    S = {1: t1.input_transform, 2: t2.input_transform}
    bh = {1: t1.cert.beta, 2: t2.cert.beta}
    gh = {1: t1.cert.gamma, 2: t2.cert.gamma}
    cS = {1: k.c_s[0], 2: k.c_s[1]}
    cT = {1: k.c_t[0], 2: k.c_t[1]}
    for i in (1, 2):
        rep = sector_check(S[i], None, cS[i], samples)
        if not rep:
            return CompositionFailure(f"sector bound |S{i}(z)| <= sqrt(c_S{i}) |z| violated "
                                      f"(sampled sup ratio^2 = {rep.worst_ratio_sq:.6g})", rep)
        rep = sector_check(None, T[i], cT[i], samples)
        if not rep:
            return CompositionFailure(f"sector bound |z| <= sqrt(c_T{i}) |T{i}(z)| violated "
                                      f"(sampled sup ratio^2 = {rep.worst_ratio_sq:.6g})", rep)
    tilde, E = {}, {}
    for i, j in ((1, 2), (2, 1)):
        eps, rho = p.site(i)
        tilde[i] = cf.compose(gh[i], rho, cf.linear(cS[i] * cT[j] * (1.0 + eps * eps)))
        E[i] = cf.compose(gh[i], cf.mu_of(rho), cf.linear(cS[i] * (1.0 + 1.0 / eps ** 2)))
    up = {i: tr.numeric_bounds(T[i]).upper for i in (1, 2)}
    betas, gammas = [], []
    for i, j in ((1, 2), (2, 1)):
        loop = cf.compose(tilde[i], tilde[j])
        report = _sgc(loop)
        if not report:
            return CompositionFailure(f"small-gain condition failed: Id - tilde_gamma{i} o tilde_gamma{j} is not "
                                      f"K-infinity ({report.summary()})", report)
        B = cf.pointwise_max(cf.compose(bh[i], up[i]), cf.compose(tilde[i], bh[j], up[j]))
        G = cf.pointwise_max(E[i], cf.compose(tilde[i], E[j]))
        betas.append(small_gain_solve(B, loop))
        gammas.append(small_gain_solve(G, loop))
    alpha = cf.sum_lower_envelope(_squared_lower(T[1]), _squared_lower(T[2]))
    return ce.IISS(alpha, cf.post_scale(2.0, cf.pointwise_max(*betas)),
                   cf.post_scale(2.0, cf.pointwise_max(*gammas)), cf.power(2.0), "max", (
        "convert each iISS system to nonlinear L2-gain in coordinates (T_i, S_i)",
        "||S_i(w_i)||^2 <= c_Si (1+eps^2) c_Tj ||T_j(x_j)||^2 + c_Si (1+1/eps^2) ||eta_i||^2",
        "weak triangle inequality, then small-gain solve with (Id - tilde_gamma_i o tilde_gamma_j)^-1",
        "sum of two maxima <= 2 max; alpha from squared lower bounds of |T_i|; sigma(s) = s^2",
    ))


def feedback_iiss_direct(c1: ce.IISS, c2: ce.IISS, rho1: ScalarGainFn, rho2: ScalarGainFn, rho: ScalarGainFn,
                         k1: float, k2: float):
    """Feedback w_i = x_j + eta_i of iISS systems when sigma_i o rho_i <= k_j alpha_j.

    With A_i = int alpha_i(|x_i|) and N = int sigma(|eta|), sigma = max_i sigma_i o mu_i:

        int sigma_i(|w_i|) <= k_j A_j + N
        A_i <= max{beta_i, gamma_i(rho(k_j beta_j)), gamma_i(mu(N)), h_i(A_i + N/k_i)}

    with h_i(u) = gamma_i(rho(k_j gamma_j(k_i u))).  If A_i is bounded by the last
    term then y = A_i + N/k_i satisfies y - h_i(y) <= N/k_i, so
    A_i <= (Id - h_i)^-1(N/k_i).
    """
    _expect(c1, "IISS", "c1")
    _expect(c2, "IISS", "c2")
    for name, r in (("rho1", rho1), ("rho2", rho2), ("rho", rho)):
        report = cf.certify_kinf(cf.excess(r))
        if not report:
            return CompositionFailure(f"{name} - Id is not K-infinity ({report.summary()})", report)
    c1, c2 = _as_max(c1), _as_max(c2)
    certs = {1: c1, 2: c2}
    rhos = {1: rho1, 2: rho2}
    ks = {1: k1, 2: k2}
    for i, j in ((1, 2), (2, 1)):
        rep = grid_condition(cf.compose(certs[i].sigma, rhos[i]), certs[j].alpha, ks[j])
        if not rep:
            return CompositionFailure(f"condition sigma{i} o rho{i} <= k{j} alpha{j} fails near "
                                      f"s = {rep.worst_s:.6g} (excess {rep.worst_violation:.6g})", rep)
    betas, gammas = [], []
    mu = cf.mu_of(rho)
    for i, j in ((1, 2), (2, 1)):
        h = cf.compose(certs[i].gamma, rho, cf.linear(ks[j]), certs[j].gamma, cf.linear(ks[i]))
        report = _sgc(h)
        if not report:
            return CompositionFailure(f"small-gain condition failed: Id - gamma{i} o rho o k{j} gamma{j}(k{i} .) "
                                      f"is not K-infinity ({report.summary()})", report)
        betas += [certs[i].beta, cf.compose(certs[i].gamma, rho, cf.linear(ks[j]), certs[j].beta)]
        gammas += [cf.compose(certs[i].gamma, mu), small_gain_solve(cf.linear(1.0 / ks[i]), h)]
    sigma = cf.pointwise_max(cf.compose(c1.sigma, cf.mu_of(rho1)), cf.compose(c2.sigma, cf.mu_of(rho2)))
    return ce.IISS(cf.sum_lower_envelope(c1.alpha, c2.alpha), cf.post_scale(2.0, cf.pointwise_max(*betas)),
                   cf.post_scale(2.0, cf.pointwise_max(*gammas)), sigma, "max", (
        "sigma_i(|x_j + eta_i|) <= sigma_i o rho_i(|x_j|) + sigma_i o mu_i(|eta_i|) <= k_j alpha_j(|x_j|) "
        "+ sigma(|eta|)",
        "weak triangle inequality with rho on gamma_i(k_j A_j + N)",
        "shifted small-gain solve A_i <= (Id - h_i)^-1(N/k_i) with h_i = gamma_i o rho o k_j gamma_j(k_i .)",
        "A_1 + A_2 <= 2 max; alpha from the sum lower envelope of alpha_1, alpha_2",
    ))
