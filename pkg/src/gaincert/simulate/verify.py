"""Check certificate inequalities along simulated trajectories.

State integrals use the trapezoid rule on the grid.  Input integrals use the
hold rule sum_k sigma(|w_k|) dt, which is exact for the zero-order-hold inputs
fed to the integrator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import comparison as cf
from .. import transforms as tr
from ..certificates import TransformedCertificate
from ..comparison import ScalarGainFn
from ..errors import DomainError
from .integrator import BatchTrajectory, Trajectory, integrate_batch
from .models import SystemModel
from .signals import random_piecewise

DEFAULT_TOL = 1e-6


def cumulative_trapezoid(values: np.ndarray, dt: float) -> np.ndarray:
    """Running trapezoid integral along the last axis, starting at 0."""
    out = np.zeros_like(values, dtype=float)
    # sum first and scale once so a constant integrates to value * length exactly
    out[..., 1:] = np.cumsum(values[..., 1:] + values[..., :-1], axis=-1) * (0.5 * dt)
    return out


def truncated_l2_sq(samples, dt: float) -> float:
    """Trapezoid integral of |y|^2 over the whole sample window."""
    y = np.asarray(samples, dtype=float)
    mag = y * y if y.ndim == 1 else np.sum(y * y, axis=-1)
    return float(cumulative_trapezoid(mag, dt)[-1]) if mag.size > 1 else 0.0


def integral_of(alpha: ScalarGainFn, samples, dt: float) -> float:
    """Trapezoid integral of alpha(|y|) over the sample window."""
    y = np.asarray(samples, dtype=float)
    mag = np.abs(y) if y.ndim == 1 else np.linalg.norm(y, axis=-1)
    vals = cf.evaluate(alpha, mag)
    return float(cumulative_trapezoid(np.asarray(vals), dt)[-1]) if mag.size > 1 else 0.0


def held_integral(values: np.ndarray, dt: float) -> np.ndarray:
    """Running integral of a zero-order-hold signal: I_k = dt * sum_{j<k} v_j."""
    out = np.zeros_like(values, dtype=float)
    out[..., 1:] = np.cumsum(values[..., :-1], axis=-1) * dt
    return out


@dataclass
class EstimateReport:
    t: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    kind: str
    mode: str
    tolerance: float
    margin: np.ndarray = field(init=False)
    verdict: bool = field(init=False)
    worst_index: int = field(init=False)

    def __post_init__(self):
        self.margin = self.rhs - self.lhs
        scaled = self.margin / np.maximum(1.0, self.rhs)
        self.worst_index = int(np.argmin(scaled))
        self.verdict = bool(scaled[self.worst_index] >= -self.tolerance)

    def __bool__(self) -> bool:
        return self.verdict

    @property
    def worst_time(self) -> float:
        return float(self.t[self.worst_index])

    @property
    def worst_margin(self) -> float:
        return float(self.margin[self.worst_index])

    def summary(self) -> dict:
        return {
            "kind": self.kind, "mode": self.mode, "verdict": "pass" if self.verdict else "fail",
            "worst_time": self.worst_time, "worst_margin": self.worst_margin,
            "lhs_at_worst": float(self.lhs[self.worst_index]),
            "rhs_at_worst": float(self.rhs[self.worst_index]), "tolerance": self.tolerance,
        }

    def to_csv(self, path) -> None:
        np.savetxt(path, np.column_stack([self.t, self.lhs, self.rhs, self.margin]), delimiter=",",
                   header="t,lhs,rhs,margin", comments="", fmt="%.17g")


def _unwrap(c):
    if isinstance(c, TransformedCertificate):
        return c.cert, c.state_transform, c.input_transform
    return c, None, None


def transform_states(T, x: np.ndarray) -> np.ndarray:
    return np.asarray(tr.apply(T, x)).reshape(x.shape) if T is not None else x


def sides(c, x: np.ndarray, w: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """lhs and rhs of the certificate inequality at every grid time.

    x has shape (..., K+1, n) and w has shape (..., K+1, m).
    """
    cert, T, S = _unwrap(c)
    x = transform_states(T, x)
    if S is not None and w.shape[-1] > 0:
        w = transform_states(S, w)
    xnorm = np.linalg.norm(x, axis=-1)
    lhs = cumulative_trapezoid(np.asarray(cf.evaluate(cert.state_integrand, xnorm)), dt)
    trans = np.asarray(cf.evaluate(cert.beta, xnorm[..., :1]))
    if not cert.has_input:
        if w.shape[-1] and np.any(w != 0):
            raise DomainError(f"{cert.kind} certificates describe unforced systems; the trajectory has a nonzero input")
        return lhs, np.broadcast_to(trans, lhs.shape).copy()
    if w.shape[-1]:
        wnorm = np.linalg.norm(w, axis=-1)
        integral = held_integral(np.asarray(cf.evaluate(cert.input_integrand, wnorm)), dt)
    else:
        integral = np.zeros_like(lhs)
    if cert.kind == "LinearL2":
        forced = cert.gamma_bar_sq * integral
    else:
        forced = np.asarray(cf.evaluate(cert.input_gain, integral))
    rhs = np.maximum(trans, forced) if cert.mode == "max" else trans + forced
    return lhs, rhs


def verify_certificate(c, traj: Trajectory, tol: float = DEFAULT_TOL) -> EstimateReport:
    cert = _unwrap(c)[0]
    lhs, rhs = sides(c, traj.x, traj.w, traj.dt)
    return EstimateReport(traj.t, lhs, rhs, cert.kind, cert.mode, tol)


@dataclass(frozen=True)
class SamplerSpec:
    """Random initial states in a box and piecewise-constant inputs."""

    t_end: float = 10.0
    dt: float = 1e-3
    x0_range: tuple[float, float] = (-2.0, 2.0)
    amplitude: tuple[float, float] = (-1.0, 1.0)
    switches: int = 5

    def draw(self, rng: np.random.Generator, n: int, m: int):
        x0 = rng.uniform(self.x0_range[0], self.x0_range[1], size=n)
        u = random_piecewise(rng, self.t_end, m, self.switches, self.amplitude)
        return x0, u


@dataclass
class MonteCarloReport:
    n: int
    passed: int
    worst_margin: float            # most negative scaled margin (margin / max(1, rhs))
    failing: list[int]             # trajectory indices i; trajectory i uses seed [seed, i]
    aborted: list[int]
    seed: int

    @property
    def pass_rate(self) -> float:
        return self.passed / self.n if self.n else 1.0

    @property
    def no_evidence(self) -> bool:
        return self.n == 0

    @property
    def verdict(self) -> bool:
        return self.passed == self.n

    def summary(self) -> dict:
        return {"n": self.n, "passed": self.passed, "pass_rate": self.pass_rate,
                "worst_scaled_margin": self.worst_margin, "failing": self.failing,
                "aborted": self.aborted, "seed": self.seed,
                "evidence": "none" if self.no_evidence else "sampled"}


def draw_batch(model: SystemModel, sampler: SamplerSpec, indices, seed: int):
    x0s, inputs = [], []
    for i in indices:
        x0, u = sampler.draw(np.random.default_rng([seed, int(i)]), model.n, model.m)
        x0s.append(x0)
        inputs.append(u)
    return np.array(x0s), inputs


def monte_carlo_verify(c, model: SystemModel, sampler: SamplerSpec = SamplerSpec(), N: int = 100,
                       seed: int = 0, tol: float = DEFAULT_TOL, chunk: int = 250) -> MonteCarloReport:
    """Verify ``c`` on N random trajectories; trajectory i is drawn from ``default_rng([seed, i])``.

    Trajectories that leave the integration envelope count as failures and are
    listed under ``aborted``.
    """
    passed, worst = 0, np.inf
    failing, aborted = [], []
    for start in range(0, N, chunk):
        idx = np.arange(start, min(N, start + chunk))
        x0, inputs = draw_batch(model, sampler, idx, seed)
        batch = integrate_batch(model, x0, inputs, sampler.t_end, sampler.dt)
        lhs, rhs = sides(c, batch.x, batch.w, batch.dt)
        scaled = ((rhs - lhs) / np.maximum(1.0, rhs)).min(axis=-1)
        ok = (scaled >= -tol) & ~batch.aborted
        passed += int(ok.sum())
        worst = min(worst, float(scaled.min()))
        failing.extend(int(i) for i in idx[~ok])
        aborted.extend(int(i) for i in idx[batch.aborted])
    return MonteCarloReport(N, passed, worst if N else 0.0, failing, aborted, seed)


def batch_reports(c, batch: BatchTrajectory, tol: float = DEFAULT_TOL) -> list[EstimateReport]:
    cert = _unwrap(c)[0]
    lhs, rhs = sides(c, batch.x, batch.w, batch.dt)
    return [EstimateReport(batch.t, lhs[i], rhs[i], cert.kind, cert.mode, tol) for i in range(len(batch))]


def convergence_check(traj: Trajectory, window: float = 0.1, threshold: float = 0.1) -> bool:
    """Advisory: max |x| over the trailing window is at most threshold * |x(0)|."""
    mag = np.linalg.norm(traj.x, axis=-1)
    start = int(np.floor((1.0 - window) * (len(mag) - 1)))
    return bool(mag[start:].max() <= threshold * mag[0])


def closed_form_ex1(x0: float, t: float) -> tuple[float, float]:
    """Exact state and truncated squared norm of x' = -x^3."""
    d = 1.0 + 2.0 * x0 * x0 * t
    return x0 / np.sqrt(d), 0.5 * np.log(d)
