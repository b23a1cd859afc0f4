import math

import numpy as np
import pytest

from gaincert import certificates as ce
from gaincert import comparison as cf
from gaincert import fixtures as fx
from gaincert.errors import BlowUpError, DomainError
from gaincert.simulate import models as md
from gaincert.simulate import (
    SamplerSpec, closed_form_ex1, constant, convergence_check, falsify_linear_l2_bilinear, get_model,
    horizon_test, integral_of, integrate, integrate_batch, monte_carlo_verify, piecewise_constant,
    time_grid, truncated_l2_sq, verify_certificate, zero,
)
from gaincert.simulate.verify import batch_reports, sides


# ---------------------------------------------------------------------------
# integration
# ---------------------------------------------------------------------------

def test_ex1_value_at_one():
    traj = integrate(get_model("ex1_cubic"), [1.0], None, 1.0, 1e-4)
    assert traj.x[-1, 0] == pytest.approx(1 / math.sqrt(3), abs=1e-6)


def test_ex3_exponential_growth():
    traj = integrate(get_model("ex3_bilinear"), [1.0], constant(2.0), 1.0, 1e-3)
    assert traj.x[-1, 0] == pytest.approx(math.e, rel=1e-9)


@pytest.mark.parametrize("name", ["ex1_cubic", "ex2_cubic_forced", "ex3_bilinear", "ex1_transformed",
                                  "ex2_transformed", "linear1d"])
def test_equilibrium(name):
    model = get_model(name)
    traj = integrate(model, np.zeros(model.n), zero(), 1.0, 1e-2)
    assert np.all(traj.x == 0)


def test_integrator_accuracy_against_closed_form():
    x0 = np.array([-2.0, -0.5, 0.3, 1.0, 2.0])
    batch = integrate_batch(get_model("ex1_cubic"), x0, zero(), 10.0, 1e-4)
    exact = np.array([[closed_form_ex1(a, t)[0] for t in batch.t[::1000]] for a in x0])
    assert np.abs(batch.x[:, ::1000, 0] - exact).max() <= 1e-6


def test_fourth_order_convergence():
    def err(dt):
        traj = integrate(get_model("ex1_cubic"), [1.0], None, 1.0, dt)
        return abs(traj.x[-1, 0] - closed_form_ex1(1.0, 1.0)[0])
    ratio = err(0.01) / err(0.005)
    assert 12 < ratio < 20


def test_blow_up_aborts():
    with pytest.raises(BlowUpError):
        integrate(get_model("ex3_bilinear"), [1.0], constant(2.0), 40.0, 1e-2)


def test_batch_marks_aborted_rows():
    batch = integrate_batch(get_model("ex3_bilinear"), np.array([1.0, 0.0]), constant(2.0), 40.0, 1e-2)
    assert batch.aborted.tolist() == [True, False]
    assert np.all(np.isfinite(batch.x))


def test_dimension_checks():
    with pytest.raises(DomainError):
        integrate(get_model("ex1_cubic"), [1.0, 2.0], None, 1.0)
    with pytest.raises(DomainError):
        time_grid(1.0, 2.0)


def test_time_grid_uniform():
    t, h = time_grid(1.0, 0.3)
    assert t[-1] == pytest.approx(1.0) and np.allclose(np.diff(t), h) and h <= 0.3


def test_piecewise_input_left_continuous():
    u = piecewise_constant([1.0], [[0.5], [2.0]])
    w = u.sample(np.array([0.0, 0.5, 0.999, 1.0, 1.5]), 1)[:, 0]
    assert w.tolist() == [0.5, 0.5, 0.5, 2.0, 2.0]


def test_composed_models():
    fb = md.feedback(md.linear1d(1.0, 0.3), md.linear1d(1.0, 0.3), external=True)
    assert (fb.n, fb.m) == (2, 2)
    casc = md.cascade(get_model("ex3_bilinear"), md.linear1d(1.0, 0.5))
    assert (casc.n, casc.m) == (2, 1)
    # driven state sees the driver state as its input: x1' = -x1 + x1 x2
    x = np.array([[1.0, 2.0]])
    assert casc.rhs(x, np.zeros((1, 1)))[0, 0] == pytest.approx(1.0)


def test_unknown_model():
    with pytest.raises(DomainError):
        get_model("van_der_pol")


# ---------------------------------------------------------------------------
# truncated norms
# ---------------------------------------------------------------------------

def test_truncated_norm_constant():
    t = np.linspace(0, 2, 201)
    assert truncated_l2_sq(np.ones_like(t), t[1] - t[0]) == 2.0


def test_truncated_norm_ex1():
    traj = integrate(get_model("ex1_cubic"), [1.0], None, 1.0, 1e-4)
    assert truncated_l2_sq(traj.x[:, 0], traj.dt) == pytest.approx(0.5 * math.log(3), abs=1e-7)
    assert closed_form_ex1(1.0, 1.0)[1] == pytest.approx(0.54931, abs=1e-5)


def test_integral_of_square_is_truncated_norm():
    x = np.sin(np.linspace(0, 3, 301))
    assert integral_of(cf.power(2), x, 0.01) == pytest.approx(truncated_l2_sq(x, 0.01), rel=1e-14)


# ---------------------------------------------------------------------------
# verification
# ---------------------------------------------------------------------------

def test_bilinear_certificate_passes():
    traj = integrate(get_model("ex3_bilinear"), [1.0], constant(0.5), 5.0, 1e-3)
    rep = verify_certificate(fx.ex3_nl2(), traj)
    assert rep.verdict and rep.kind == "NonlinearL2"
    assert np.all(rep.margin >= 0)


def test_long_horizon_l2_claim_fails():
    traj = integrate(get_model("ex1_cubic"), [1.0], None, 1e4, 0.05)
    rep = verify_certificate(ce.L2Stable(cf.power(2)), traj)
    assert not rep
    assert rep.lhs[-1] == pytest.approx(0.5 * math.log1p(2e4), rel=1e-3)
    assert rep.lhs[-1] > 4.9


def test_zero_trajectory_passes():
    traj = integrate(get_model("ex3_bilinear"), [0.0], zero(), 1.0, 1e-2)
    rep = verify_certificate(fx.ex3_nl2(), traj)
    assert rep and np.array_equal(rep.margin, rep.rhs) and np.all(rep.rhs >= 0)


def test_unforced_certificate_rejects_input():
    traj = integrate(get_model("ex3_bilinear"), [1.0], constant(0.1), 1.0, 1e-2)
    with pytest.raises(DomainError):
        verify_certificate(ce.L2Stable(cf.power(2)), traj)


def test_cubic_transformed_decay():
    z0 = np.array([-3.0, -0.4, 0.2, 1.0, 5.0])
    batch = integrate_batch(get_model("ex1_transformed"), z0, zero(), 10.0, 1e-3)
    bound = np.abs(z0)[:, None] * np.exp(-batch.t)[None] * (1 + 1e-6)
    assert np.all(np.abs(batch.x[..., 0]) <= bound)
    l2 = np.array([truncated_l2_sq(batch.x[i, :, 0], batch.dt) for i in range(len(z0))])
    assert np.all(l2 <= 0.5 * z0 ** 2 * (1 + 1e-6))


def test_forced_cubic_transformed_linear_gain():
    sampler = SamplerSpec(t_end=10.0, dt=5e-3, x0_range=(-2.0, 2.0), amplitude=(-2.0, 2.0))
    rep = monte_carlo_verify(fx.ex2_z_linear_l2(), get_model("ex2_transformed"), sampler, N=20, seed=5)
    assert rep.verdict, rep.summary()


def test_sum_and_max_forms_agree():
    c = fx.linear1d_iss(1.0, 0.3)
    s = ce.max_to_sum(c)
    model = md.linear1d(1.0, 0.3)
    rng = np.random.default_rng(2)
    sampler = SamplerSpec(t_end=5.0, dt=1e-2)
    x0 = rng.uniform(-2, 2, size=(30, 1))
    inputs = [sampler.draw(np.random.default_rng([2, i]), 1, 1)[1] for i in range(30)]
    batch = integrate_batch(model, x0, inputs, 5.0, 1e-2)
    _, rhs_max = sides(c, batch.x, batch.w, batch.dt)
    _, rhs_sum = sides(s, batch.x, batch.w, batch.dt)
    assert np.all(rhs_sum >= rhs_max)
    for a, b in zip(batch_reports(c, batch), batch_reports(s, batch)):
        assert a.verdict and b.verdict


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------

def test_monte_carlo_bilinear():
    rep = monte_carlo_verify(fx.ex3_nl2(), get_model("ex3_bilinear"), SamplerSpec(), N=200, seed=0)
    assert rep.pass_rate == 1.0 and not rep.failing


def test_monte_carlo_shrunk_gain_fails():
    # the input term only dominates on longer horizons, so use t_end = 20
    c = fx.ex3_nl2()
    shrunk = ce.NonlinearL2(c.beta, cf.post_scale(0.5, c.gamma))
    sampler = SamplerSpec(t_end=20.0, dt=1e-2)
    model = get_model("ex3_bilinear")
    assert monte_carlo_verify(c, model, sampler, N=200, seed=0).verdict
    rep = monte_carlo_verify(shrunk, model, sampler, N=200, seed=0)
    assert rep.pass_rate < 1.0 and rep.failing
    # each failing index reproduces on its own
    i = rep.failing[0]
    single = monte_carlo_verify(shrunk, model, sampler, N=i + 1, seed=0)
    assert i in single.failing


def test_monte_carlo_no_evidence():
    rep = monte_carlo_verify(fx.ex3_nl2(), get_model("ex3_bilinear"), N=0)
    assert rep.verdict and rep.no_evidence and rep.summary()["evidence"] == "none"


def test_monte_carlo_deterministic():
    model = get_model("ex3_bilinear")
    a = monte_carlo_verify(fx.ex3_nl2(), model, SamplerSpec(t_end=2.0), N=20, seed=9)
    b = monte_carlo_verify(fx.ex3_nl2(), model, SamplerSpec(t_end=2.0), N=20, seed=9, chunk=7)
    assert a.summary() == b.summary()


# ---------------------------------------------------------------------------
# falsification and convergence
# ---------------------------------------------------------------------------

def test_falsify_unit_gain():
    assert horizon_test(1.0, 1.0, 2.0)
    assert 5 < 0.25 * math.expm1(4.0)
    cx = falsify_linear_l2_bilinear(cf.power(2), 1.0)
    assert cx.x0 == pytest.approx(1.0) and cx.t_star <= 2.0
    assert cx.violated and cx.lhs > cx.rhs_sum >= cx.rhs_max


def test_falsify_zero_gain():
    assert horizon_test(1.0, 0.0, 1.0)
    cx = falsify_linear_l2_bilinear(cf.power(2), 0.0)
    assert 0 < cx.t_star <= 1.0 and cx.violated
    # simulated norm matches the closed form x0^2 (e^(2t) - 1)/2
    assert cx.lhs == pytest.approx(0.5 * math.expm1(2 * cx.t_star), rel=1e-6)


def test_falsify_huge_gain_terminates():
    cx = falsify_linear_l2_bilinear(cf.power(2), 1e3)
    assert cx.violated and cx.t_star < 20


def test_falsify_negative_gain():
    with pytest.raises(DomainError):
        falsify_linear_l2_bilinear(cf.power(2), -1.0)


def test_convergence_check():
    assert convergence_check(integrate(get_model("ex1_cubic"), [1.0], None, 100.0, 1e-2))
    assert not convergence_check(integrate(get_model("ex3_bilinear"), [1.0], constant(2.0), 5.0, 1e-2))
    assert convergence_check(integrate(get_model("ex1_cubic"), [0.0], None, 1.0, 1e-2))


def test_closed_form_ex1():
    x, l2 = closed_form_ex1(1.0, 1.0)
    assert x == pytest.approx(0.57735, abs=1e-5) and l2 == pytest.approx(0.54931, abs=1e-5)
    assert closed_form_ex1(0.0, 7.0) == (0.0, 0.0)
    assert closed_form_ex1(2.0, 0.0) == (2.0, 0.0)


# ---------------------------------------------------------------------------
# export
# ---------------------------------------------------------------------------

def test_trajectory_csv(tmp_path):
    traj = integrate(get_model("ex3_bilinear"), [1.0], constant(0.5), 1.0, 0.1)
    traj.to_csv(tmp_path / "traj.csv")
    lines = (tmp_path / "traj.csv").read_text().splitlines()
    assert lines[0] == "t,x1,w1" and len(lines) == len(traj.t) + 1
    data = np.loadtxt(tmp_path / "traj.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 1], traj.x[:, 0])


def test_report_csv(tmp_path):
    traj = integrate(get_model("ex3_bilinear"), [1.0], constant(0.5), 1.0, 0.1)
    rep = verify_certificate(fx.ex3_nl2(), traj)
    rep.to_csv(tmp_path / "report.csv")
    assert (tmp_path / "report.csv").read_text().splitlines()[0] == "t,lhs,rhs,margin"
    assert rep.summary()["verdict"] == "pass"
