"""Acceptance suite shared by the test-suite and the ``selftest`` command.

Each check returns an :class:`AcceptanceResult`; ``run_all`` runs them in order.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import certificates as ce
from . import comparison as cf
from . import fixtures as fx
from . import interconnect as ic
from . import transforms as tr
from .simulate import falsify as fs
from .simulate import verify as vf
from .simulate.integrator import integrate
from .simulate.models import get_model


@dataclass(frozen=True)
class AcceptanceResult:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.title} ({self.detail}; {self.seconds:.2f}s)"


def _timed(number: int, title: str, fn) -> AcceptanceResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return AcceptanceResult(number, title, bool(passed), detail, time.perf_counter() - t0)


def example1_closed_form() -> AcceptanceResult:
    def run():
        t0 = time.perf_counter()
        traj = integrate(get_model("ex1_cubic"), [1.0], None, 1.0, 1e-4)
        value = vf.truncated_l2_sq(traj.x, traj.dt)
        elapsed = time.perf_counter() - t0
        exact = 0.5 * math.log(3.0)
        rel = abs(value - exact) / exact
        return rel < 1e-5 and elapsed < 1.0, f"||x||^2 = {value:.9f}, rel err {rel:.2e}, {elapsed:.2f}s"
    return _timed(1, "cubic decay closed-form squared norm", run)


def example1_unbounded() -> AcceptanceResult:
    def run():
        t_end, dt = 1e4, 0.05
        traj = integrate(get_model("ex1_cubic"), [1.0], None, t_end, dt)
        norm = vf.truncated_l2_sq(traj.x, traj.dt)
        z0 = tr.ex2_forward(1.0)
        ztraj = integrate(get_model("ex1_transformed"), [z0], None, t_end, dt)
        cert = fx.ex1_z_l2()
        lhs, _ = vf.sides(cert, ztraj.x, ztraj.w, ztraj.dt)
        bound = 0.5 * z0 * z0 * (1 + 1e-6)
        # the state stalls at the smallest subnormal once it underflows; allow one normal-float quantum
        decay = np.abs(ztraj.x[:, 0]) <= abs(z0) * np.exp(-ztraj.t) * (1 + 1e-6) + np.finfo(float).tiny
        ok = norm > 4.9 and bool(np.all(lhs <= bound)) and bool(decay.all())
        return ok, f"||x||^2(1e4) = {norm:.4f}, max ||z||^2 = {lhs.max():.6f} <= {bound:.6f}"
    return _timed(2, "cubic decay not L2-stable, transformed system L2-stable", run)


def example2_linear_gain() -> AcceptanceResult:
    def run():
        sampler = vf.SamplerSpec(t_end=20.0, dt=5e-3, amplitude=(-2.0, 2.0))
        rep = vf.monte_carlo_verify(fx.ex2_z_linear_l2(), get_model("ex2_transformed"), sampler, 200, seed=0)
        return rep.pass_rate == 1.0, f"pass rate {rep.pass_rate:.3f}, worst scaled margin {rep.worst_margin:.3g}"
    return _timed(3, "forced cubic transformed linear gain 2", run)


def example3_nonlinear_gain() -> AcceptanceResult:
    def run():
        sampler = vf.SamplerSpec(t_end=10.0, dt=1e-3, amplitude=(-1.5, 1.5))
        rep = vf.monte_carlo_verify(fx.ex3_nl2(), get_model("ex3_bilinear"), sampler, 500, seed=0, tol=1e-6)
        return rep.pass_rate == 1.0, f"pass rate {rep.pass_rate:.3f}, worst scaled margin {rep.worst_margin:.3g}"
    return _timed(4, "bilinear nonlinear L2-gain", run)


def example3_falsification() -> AcceptanceResult:
    def run():
        cex = fs.falsify_linear_l2_bilinear(cf.power(2.0), 1.0)
        analytic = fs.horizon_test(1.0, 1.0, 2.0)
        ok = abs(cex.x0 - 1.0) < 1e-9 and cex.t_star <= 3.0 and cex.violated and cex.margin > 0.1 and analytic
        return ok, f"x0 = {cex.x0:.6g}, t* = {cex.t_star:g}, lhs {cex.lhs:.4f} vs {cex.rhs_sum:.4f}, margin {cex.margin:.1%}"
    return _timed(5, "bilinear linear-gain falsification", run)


def _slack(rhs):
    return 1e-9 * np.maximum(1.0, np.abs(rhs))


def lemma_suites(cases: int = 10_000, seed: int = 0) -> AcceptanceResult:
    """Sandwich bounds, weak triangle, sum lower envelope, sum bound, Young splitting."""
    def run():
        rng = np.random.default_rng(seed)
        n_fn = 100
        per = cases // n_fn
        bad = dict.fromkeys(["sandwich", "weak_triangle", "sum_envelope", "sum_bound", "young"], 0)
        sandwich_cases = 0
        while sandwich_cases < cases:
            alpha = cf.random_kinf(rng, depth=4)
            p = int(rng.integers(1, 4))
            T = (tr.build_lower if rng.random() < 0.5 else tr.build_upper)(alpha, p)
            b = tr.numeric_bounds(T)
            z = rng.normal(size=(per, p)) * 10 ** rng.uniform(-3, 3, size=(per, 1))
            r = tr.safe_norm(z)
            lo, hi = cf.evaluate(b.lower, r), cf.evaluate(b.upper, r)
            # only points whose bounds stay below the saturation level are meaningful
            keep = hi < cf.SATURATION
            keep[np.cumsum(keep) > cases - sandwich_cases] = False
            mag = tr.safe_norm(np.asarray(tr.apply(T, z)).reshape(z.shape))
            bad["sandwich"] += int(np.sum(keep & ((lo > mag + _slack(mag)) | (mag > hi + _slack(hi)))))
            sandwich_cases += int(keep.sum())
        for _ in range(n_fn):
            gamma = cf.random_kinf(rng, depth=4)
            rho = cf.gain_sum(cf.identity(), cf.random_kinf(rng, depth=3))
            a = 10 ** rng.uniform(-3, 3, per)
            c = 10 ** rng.uniform(-3, 3, per)
            lhs = cf.evaluate(gamma, a + c)
            rhs = cf.weak_triangle_bound(gamma, rho, a, c, check=False)
            bad["weak_triangle"] += int(np.sum(lhs > rhs + _slack(rhs)))
            rhs = np.maximum(cf.evaluate(gamma, 2 * a), cf.evaluate(gamma, 2 * c))
            bad["sum_bound"] += int(np.sum((lhs > rhs + _slack(rhs)) | (a + c > np.maximum(2 * a, 2 * c))))

            a1, a2 = cf.random_kinf(rng, depth=3), cf.random_kinf(rng, depth=3)
            env = cf.sum_lower_envelope(a1, a2)
            lhs = cf.evaluate(env, a + c)
            rhs = cf.evaluate(a1, a) + cf.evaluate(a2, c)
            bad["sum_envelope"] += int(np.sum(lhs > rhs + _slack(rhs)))

            x = rng.normal(size=(per, 20, 2)) * rng.uniform(0, 3, size=(per, 1, 1))
            y = rng.normal(size=(per, 20, 2)) * rng.uniform(0, 3, size=(per, 1, 1))
            eps = 10 ** rng.uniform(-1, 1, size=per)
            nx = np.sum(x * x, axis=(1, 2))
            ny = np.sum(y * y, axis=(1, 2))
            nxy = np.sum((x + y) ** 2, axis=(1, 2))
            rhs = (1 + eps ** 2) * nx + (1 + eps ** -2) * ny
            bad["young"] += int(np.sum(nxy > rhs + _slack(rhs)))
        total = n_fn * per
        return sum(bad.values()) == 0, f"{total} cases per suite, violations {bad}"
    return _timed(6, "comparison-function inequality suites", run)


def linear_small_gain_grid() -> AcceptanceResult:
    def run():
        ks = np.linspace(0.2, 2.0, 10)
        wrong, checked = 0, 0
        for k1 in ks:
            for k2 in ks:
                res = ic.feedback_nl2_no_input(ce.NonlinearL2(cf.identity(), cf.linear(k1)),
                                               ce.NonlinearL2(cf.identity(), cf.linear(k2)))
                if abs(k1 * k2 - 1.0) < 0.01:
                    continue
                checked += 1
                wrong += bool(res) != (k1 * k2 < 1.0)
        return wrong == 0, f"{checked} grid pairs away from the boundary, {wrong} misclassified"
    return _timed(7, "linear small-gain reduction", run)


SOUNDNESS_OPS = ("cascade_nl2", "feedback_nl2_no_input", "feedback_nl2_max", "cascade_iiss_direct")


def composition_soundness(ops=SOUNDNESS_OPS, N: int = 200) -> AcceptanceResult:
    def run():
        t0 = time.perf_counter()
        parts = []
        ok = True
        for name in ops:
            f = fx.FIXTURES[name]
            cert = f.build()
            if not cert:
                ok = False
                parts.append(f"{name}: {cert.reason}")
                continue
            rep = vf.monte_carlo_verify(cert, f.model(), f.sampler, N, seed=0, tol=1e-6)
            ok &= rep.verdict
            parts.append(f"{name} {rep.passed}/{rep.n}")
        elapsed = time.perf_counter() - t0
        return ok and elapsed < 60.0, ", ".join(parts) + f", {elapsed:.1f}s total"
    return _timed(8, "composition soundness on interconnected trajectories", run)


def equivalence_soundness() -> AcceptanceResult:
    def run():
        tc = ce.iss_to_linear_l2(fx.ex2_x_iss(), 1.0, 1, 1)
        rep = vf.monte_carlo_verify(tc, get_model("ex2_cubic_forced"), vf.SamplerSpec(), 100, seed=0)
        return rep.verdict, f"pass rate {rep.pass_rate:.3f}, worst scaled margin {rep.worst_margin:.3g}"
    return _timed(9, "ISS to linear L2-gain coordinates on the forced cubic", run)


CHECKS = (example1_closed_form, example1_unbounded, example2_linear_gain, example3_nonlinear_gain,
          example3_falsification, lemma_suites, linear_small_gain_grid, composition_soundness,
          equivalence_soundness)


def run_all() -> list[AcceptanceResult]:
    return [check() for check in CHECKS]
