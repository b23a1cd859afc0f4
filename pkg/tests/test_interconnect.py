import math

import numpy as np
import pytest

from gaincert import certificates as ce
from gaincert import comparison as cf
from gaincert import interconnect as ic
from gaincert import transforms as tr
from gaincert.errors import DomainError, PreconditionError
from gaincert.fixtures import FIXTURES
from gaincert.simulate.verify import monte_carlo_verify

S = np.geomspace(1e-3, 1e3, 31)
ID = cf.identity


def val(f, s=S):
    return np.asarray(cf.evaluate(f, s))


def nl2(k, beta=None):
    return ce.NonlinearL2(beta or ID(), cf.linear(k))


def iiss(k, alpha=None, sigma=None):
    """iISS certificate whose nonlinear-L2 coordinates are the identity when alpha = sigma = s^2."""
    return ce.IISS(alpha or cf.power(2), ID(), cf.linear(k), sigma or cf.power(2))


# ---------------------------------------------------------------------------
# nonlinear L2-gain compositions
# ---------------------------------------------------------------------------

def test_cascade_linear_gains():
    out = ic.cascade_nl2(nl2(2.0), nl2(3.0))
    assert np.allclose(val(out.gamma), 12 * S)
    assert np.allclose(val(out.beta), 4 * S)


def test_cascade_identity():
    out = ic.cascade_nl2(nl2(1.0), nl2(1.0))
    assert np.allclose(val(out.gamma), 2 * S) and np.allclose(val(out.beta), 2 * S)


def test_cascade_small_driver_gain():
    g1 = cf.power(2)
    for eps in (1e-1, 1e-3):
        out = ic.cascade_nl2(ce.NonlinearL2(ID(), g1), nl2(eps))
        direct = 2 * np.maximum((eps * S) ** 2, eps * S)
        assert np.allclose(val(out.gamma), direct)


def test_cascade_converts_sum_mode():
    out = ic.cascade_nl2(ce.NonlinearL2(ID(), ID(), "sum"), nl2(1.0))
    assert out.mode == "max"
    assert np.allclose(val(out.gamma), 4 * S)


def test_cascade_rejects_wrong_kind():
    with pytest.raises(DomainError):
        ic.cascade_nl2(ce.L2Stable(ID()), nl2(1.0))


def test_feedback_no_input_linear():
    out = ic.feedback_nl2_no_input(nl2(0.5), nl2(1.0))
    assert out.kind == "L2Stable"
    # u <= a + u/2 gives u <= 2a for each subsystem
    assert np.allclose(val(out.beta), 4 * S, rtol=1e-9)


@pytest.mark.parametrize("k1,k2", [(1.0, 1.0), (2.0, 1.0)])
def test_feedback_no_input_fails(k1, k2):
    out = ic.feedback_nl2_no_input(nl2(k1), nl2(k2))
    assert not out
    assert isinstance(out, ic.CompositionFailure)
    assert "small-gain" in out.reason and out.report is not None


@pytest.mark.parametrize("k,ok", [(0.2, True), (0.24, True), (0.26, False), (1.0, False)])
def test_feedback_max_reduction(k, ok):
    # hat gamma(s) = 4ks, so the condition is 16 k^2 < 1
    out = ic.feedback_nl2_max(nl2(k), nl2(k))
    assert bool(out) is ok
    assert (16 * k * k < 1) is ok


def test_feedback_max_nonlinear_gain_with_small_partner():
    out = ic.feedback_nl2_max(ce.NonlinearL2(ID(), cf.log_one_plus()), nl2(0.05))
    assert out and out.kind == "NonlinearL2"


@pytest.mark.parametrize("k,ok", [(0.1, True), (0.12, True), (0.13, False), (0.2, False)])
def test_feedback_sum_reduction(k, ok):
    # tilde gamma(s) = 8ks, hat gamma(s) = 4ks, loop 64 k^2 s
    out = ic.feedback_nl2_sum(nl2(k), nl2(k))
    assert bool(out) is ok
    assert (64 * k * k < 1) is ok
    if ok:
        assert out.mode == "sum"


def test_small_gain_params_validation():
    with pytest.raises(PreconditionError):
        ic.feedback_nl2_max(nl2(0.1), nl2(0.1), ic.SmallGainParams(rho=cf.linear(1.0)))
    with pytest.raises(DomainError):
        ic.feedback_nl2_max(nl2(0.1), nl2(0.1), ic.SmallGainParams(eps=-1.0))


def test_small_gain_params_override():
    p = ic.SmallGainParams(eps=1.0, rho=cf.linear(2.0), eps2=0.5, rho1=cf.linear(3.0))
    assert p.site(1)[0] == 1.0 and p.site(1)[1](1.0) == 3.0
    assert p.site(2)[0] == 0.5 and p.site(2)[1](1.0) == 2.0
    # rho1 = 3s makes hat gamma1 = 6ks, hat gamma2 = (1 + 1/4) 2 k s = 2.5 k s
    assert ic.feedback_nl2_max(nl2(0.2), nl2(0.2), p)
    assert not ic.feedback_nl2_max(nl2(0.3), nl2(0.3), p)


@pytest.mark.parametrize("k1,k2", [(0.2, 0.5), (0.5, 1.5), (1.0, 0.95), (1.5, 1.5), (0.1, 2.0)])
def test_no_input_matches_linear_test(k1, k2):
    assert bool(ic.feedback_nl2_no_input(nl2(k1), nl2(k2))) is (k1 * k2 < 1)


# ---------------------------------------------------------------------------
# sector and grid checks
# ---------------------------------------------------------------------------

def test_sector_identity():
    I = tr.build_upper(ID(), 1)
    assert ic.sector_check(I, I, 1.0)
    assert ic.sector_check(None, None, 1.0, p=3)


def test_sector_scaled():
    S2 = tr.build_upper(cf.linear(2.0), 1)
    assert not ic.sector_check(S2, None, 1.0)
    assert ic.sector_check(S2, None, 4.0)
    assert ic.sector_constant(S2, None) == pytest.approx(4.0)


def test_sector_constant_matches_dense_sweep():
    A = tr.build_upper(ID(), 1)
    B = tr.build_lower(cf.power(2), 1)
    # ball points reach below the sphere radii, so sweep the radii actually sampled
    norms = np.abs(ic.sample_points(1))
    r = np.geomspace(norms[norms > 0].min(), norms.max(), 100001)
    oracle = np.max((r / r ** 2) ** 2)
    assert ic.sector_constant(A, B) == pytest.approx(oracle, rel=1e-9)
    assert ic.sector_check(A, B, oracle)
    assert not ic.sector_check(A, B, 0.99 * oracle)


def test_sector_points_cover_ball():
    pts = ic.sample_points(3, 512, (1e-2, 10.0), seed=1)
    norms = np.linalg.norm(pts, axis=1)
    assert pts.shape[1] == 3
    assert norms.min() < 2e-2 and norms.max() > 5.0
    assert np.array_equal(pts, ic.sample_points(3, 512, (1e-2, 10.0), seed=1))


def test_sector_dimension_mismatch():
    with pytest.raises(DomainError):
        ic.sector_check(tr.build_upper(ID(), 2), tr.build_upper(ID(), 3), 1.0)


def test_grid_condition():
    assert ic.grid_condition(cf.power(2), cf.power(2), 1.0)
    rep = ic.grid_condition(cf.post_scale(2, cf.power(2)), cf.power(2), 1.0)
    assert not rep and rep.worst_violation > 0


# ---------------------------------------------------------------------------
# ISS / iISS compositions
# ---------------------------------------------------------------------------

def quarter_iss():
    # linear-L2 coordinates T = identity, S = z/2
    return ce.ISS(cf.power(2), ID(), cf.post_scale(0.25, cf.power(2)))


def test_feedback_iss_via_linear_quarter():
    k = ic.SectorConstants(c1=0.25, c2=0.25)
    out = ic.feedback_iss_via_linear(quarter_iss(), quarter_iss(), k)
    assert out.kind == "AlphaIntegrable"
    # beta_tilde = (s + s)/(1 - 1/16); rho = mu = 2s
    beta_tilde = 2 * S / (1 - 1 / 16)
    assert np.allclose(val(out.beta), 2 * beta_tilde, rtol=1e-9)
    # one of s1, s2 is at least s/2 when s1 + s2 = s
    assert np.allclose(val(out.alpha), S ** 2 / 4, rtol=1e-9)


def test_feedback_iss_via_linear_product_one():
    out = ic.feedback_iss_via_linear(quarter_iss(), quarter_iss(), ic.SectorConstants(c1=4.0, c2=0.25))
    assert not out and "c1 c2 < 1" in out.reason


def test_feedback_iss_via_linear_sector_violation():
    out = ic.feedback_iss_via_linear(quarter_iss(), quarter_iss(), ic.SectorConstants(c1=0.2, c2=0.2))
    assert not out and "sector bound" in out.reason


def test_feedback_iss_via_linear_needs_constants():
    with pytest.raises(DomainError):
        ic.feedback_iss_via_linear(quarter_iss(), quarter_iss(), ic.SectorConstants(c=1.0))


def test_cascade_iiss_via_nl2_identity():
    out = ic.cascade_iiss_via_nl2(iiss(1.0), iiss(1.0), ic.SectorConstants(c=1.0))
    assert out.kind == "IISS"
    assert np.allclose(val(out.beta), 2 * S, rtol=1e-9)
    assert np.allclose(val(out.gamma), 2 * S, rtol=1e-9)


def test_cascade_iiss_via_nl2_monotone_in_c():
    a = ic.cascade_iiss_via_nl2(iiss(1.0), iiss(1.0), ic.SectorConstants(c=1.0))
    b = ic.cascade_iiss_via_nl2(iiss(1.0), iiss(1.0), ic.SectorConstants(c=2.0))
    assert np.all(val(b.gamma) >= val(a.gamma))
    assert np.any(val(b.gamma) > val(a.gamma))


def test_cascade_iiss_via_nl2_sector_failure():
    out = ic.cascade_iiss_via_nl2(iiss(1.0), iiss(1.0), ic.SectorConstants(c=0.5))
    assert not out


def test_cascade_iiss_direct_equality_case():
    out = ic.cascade_iiss_direct(iiss(1.0), iiss(1.0), 1.0)
    assert np.allclose(val(out.beta), 2 * S) and np.allclose(val(out.gamma), 2 * S)
    assert np.allclose(val(out.sigma), S ** 2)


def test_cascade_iiss_direct_constant():
    c1 = iiss(1.0, sigma=cf.post_scale(2, cf.power(2)))
    fail = ic.cascade_iiss_direct(c1, iiss(1.0), 1.0)
    assert not fail and fail.report.worst_violation > 0
    assert ic.cascade_iiss_direct(c1, iiss(1.0), 2.0)


def test_cascade_iiss_direct_all_identity():
    c = ce.IISS(ID(), ID(), ID(), ID())
    out = ic.cascade_iiss_direct(c, c, 1.0)
    assert np.allclose(val(out.beta), 2 * S) and np.allclose(val(out.gamma), 2 * S)


def test_feedback_iiss_no_input():
    k = ic.SectorConstants(c1=1.0, c2=1.0)
    assert ic.feedback_iiss_no_input(iiss(0.5), iiss(0.5), k).kind == "AlphaIntegrable"
    fail = ic.feedback_iiss_no_input(iiss(1.0), iiss(1.0), k)
    assert not fail and "small-gain" in fail.reason


def test_feedback_iiss_no_input_scaled_constants():
    # loop = (s/8)(2)(s/8)(2) = s/16
    assert ic.feedback_iiss_no_input(iiss(1 / 8), iiss(1 / 8), ic.SectorConstants(c1=2.0, c2=2.0))


def test_feedback_iiss_with_input():
    k = ic.SectorConstants(c_s=(1.0, 1.0), c_t=(1.0, 1.0))
    out = ic.feedback_iiss_with_input(iiss(1 / 20), iiss(1 / 20), k)
    assert out.kind == "IISS"
    assert not ic.feedback_iiss_with_input(iiss(1.0), iiss(1.0), k)


def test_feedback_iiss_with_input_monotone_in_cs():
    a = ic.feedback_iiss_with_input(iiss(1 / 20), iiss(1 / 20), ic.SectorConstants(c_s=(1.0, 1.0), c_t=(1.0, 1.0)))
    b = ic.feedback_iiss_with_input(iiss(1 / 20), iiss(1 / 20), ic.SectorConstants(c_s=(2.0, 1.0), c_t=(1.0, 1.0)))
    assert np.all(val(b.gamma) >= val(a.gamma) * (1 - 1e-12))


def test_feedback_iiss_with_input_sector_failure():
    out = ic.feedback_iiss_with_input(iiss(1 / 20), iiss(1 / 20), ic.SectorConstants(c_s=(0.5, 1.0), c_t=(1.0, 1.0)))
    assert not out and "c_S1" in out.reason


def direct_pair(k):
    return iiss(k, alpha=cf.post_scale(4, cf.power(2)))


def test_feedback_iiss_direct():
    r = cf.linear(2.0)
    out = ic.feedback_iiss_direct(direct_pair(0.1), direct_pair(0.1), r, r, r, 1.0, 1.0)
    assert out.kind == "IISS"
    # sigma_i o mu_i with mu = 2s
    assert np.allclose(val(out.sigma), (2 * S) ** 2)
    fail = ic.feedback_iiss_direct(direct_pair(1.0), direct_pair(1.0), r, r, r, 1.0, 1.0)
    assert not fail and "small-gain" in fail.reason


def test_feedback_iiss_direct_grid_condition():
    r = cf.linear(2.0)
    out = ic.feedback_iiss_direct(iiss(0.1), iiss(0.1), r, r, r, 1.0, 1.0)
    assert not out and "sigma1 o rho1" in out.reason


def test_feedback_iiss_direct_bad_rho():
    out = ic.feedback_iiss_direct(direct_pair(0.1), direct_pair(0.1), cf.linear(0.5), cf.linear(2.0),
                                  cf.linear(2.0), 1.0, 1.0)
    assert not out and "rho1" in out.reason


# ---------------------------------------------------------------------------
# small-gain solve
# ---------------------------------------------------------------------------

def test_small_gain_solve_linear():
    half = cf.linear(0.5)
    assert np.allclose(val(ic.small_gain_solve(ID(), half)), 2 * S)
    assert np.allclose(val(ic.small_gain_solve(cf.power(2), half)), 2 * S ** 2)


def test_small_gain_solve_fixed_point_iteration():
    g = cf.post_scale(0.5, cf.log_one_plus())
    u_star = ic.small_gain_solve(ID(), g)
    for s in (0.0, 0.01, 1.0, 7.5, 300.0):
        u = s
        for _ in range(200):
            u = s + 0.5 * math.log1p(u)
        assert u_star(s) == pytest.approx(u, rel=1e-6, abs=1e-12)


def test_small_gain_solve_requires_kinf():
    with pytest.raises(PreconditionError):
        ic.small_gain_solve(ID(), cf.linear(2.0))


# ---------------------------------------------------------------------------
# monotonicity and trajectory soundness
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("build", [
    lambda k: ic.cascade_nl2(nl2(k), nl2(0.5)),
    lambda k: ic.cascade_nl2(nl2(0.5), nl2(k)),
    lambda k: ic.feedback_nl2_no_input(nl2(k), nl2(0.5)),
    lambda k: ic.feedback_nl2_max(nl2(k / 4), nl2(0.1)),
    lambda k: ic.cascade_iiss_direct(iiss(k), iiss(0.5), 1.0),
    lambda k: ic.feedback_iiss_direct(direct_pair(k / 10), direct_pair(0.1), *[cf.linear(2.0)] * 3, 1.0, 1.0),
])
def test_composition_monotone_in_gains(build):
    lo, hi = build(0.5), build(0.9)
    for name in lo._gain_fields:
        assert np.all(val(getattr(hi, name)) >= val(getattr(lo, name)) * (1 - 1e-12))


def test_composition_monotone_in_beta():
    lo = ic.feedback_nl2_no_input(nl2(0.5, ID()), nl2(0.5))
    hi = ic.feedback_nl2_no_input(nl2(0.5, cf.linear(3.0)), nl2(0.5))
    assert np.all(val(hi.beta) >= val(lo.beta))


def test_every_op_has_a_fixture():
    ops = {"cascade_nl2", "feedback_nl2_no_input", "feedback_nl2_max", "feedback_nl2_sum",
           "feedback_iss_via_linear", "cascade_iiss_via_nl2", "cascade_iiss_direct",
           "feedback_iiss_no_input", "feedback_iiss_with_input", "feedback_iiss_direct"}
    assert set(FIXTURES) == ops


@pytest.mark.parametrize("name", sorted(FIXTURES))
def test_trajectory_soundness(name):
    fx = FIXTURES[name]
    cert = fx.build()
    assert cert, getattr(cert, "reason", "")
    rep = monte_carlo_verify(cert, fx.model(), fx.sampler, N=200, seed=11, tol=1e-6)
    assert rep.verdict, rep.summary()
