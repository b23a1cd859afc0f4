"""Counterexample search against a claimed linear L2-gain for the bilinear system.

For x' = -x + x w with w = 2 the solution is x(0) e^t, so the truncated squared
norm grows like e^(2t) while any linear-gain bound grows linearly in t.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import comparison as cf
from ..comparison import ScalarGainFn
from ..errors import DomainError
from .integrator import Trajectory, integrate
from .models import get_model
from .signals import InputSignal, constant
from .verify import cumulative_trapezoid, held_integral

FORCING = 2.0


@dataclass(frozen=True)
class Counterexample:
    x0: float
    t_star: float
    input: InputSignal
    trajectory: Trajectory
    lhs: float                 # simulated ||x||^2 on [0, t*]
    rhs_sum: float             # beta_hat(|x0|) + gbar^2 ||w||^2
    rhs_max: float             # max{beta_hat(|x0|), gbar^2 ||w||^2}

    @property
    def margin(self) -> float:
        """Relative excess of the simulated norm over the sum-form bound."""
        return (self.lhs - self.rhs_sum) / self.rhs_sum

    @property
    def violated(self) -> bool:
        return self.lhs > self.rhs_sum

    def to_dict(self) -> dict:
        return {"x0": self.x0, "t_star": self.t_star, "input": self.input.to_dict(), "lhs": self.lhs,
                "rhs_sum": self.rhs_sum, "rhs_max": self.rhs_max, "relative_margin": self.margin,
                "violated": self.violated}


def horizon_test(x0: float, gamma_bar: float, t: float) -> bool:
    """1 + 2 gbar^2 t < (1/4) x0^2 (e^(2t) - 1)."""
    return 1.0 + 2.0 * gamma_bar ** 2 * t < 0.25 * x0 * x0 * math.expm1(2.0 * t)


def falsify_linear_l2_bilinear(beta_hat: ScalarGainFn, gamma_bar: float, t_step: float = 0.01,
                               dt: float = 1e-3, t_limit: float = 200.0) -> Counterexample:
    """Initial state beta_hat^-1(1), constant input 2, smallest grid horizon t* passing the test."""
    if not gamma_bar >= 0:
        raise DomainError("gamma_bar must be nonnegative")
    x0 = float(cf.inverse_eval(beta_hat, 1.0))
    t = t_step
    while not horizon_test(x0, gamma_bar, t):
        t = round(t + t_step, 12)
        if t > t_limit:
            raise DomainError(f"no horizon below {t_limit:g}; x0 = {x0:g} is too small")
    u = constant(FORCING)
    traj = integrate(get_model("ex3_bilinear"), [x0], u, t, min(dt, t))
    lhs = float(cumulative_trapezoid(traj.x[:, 0] ** 2, traj.dt)[-1])
    wsq = float(held_integral(traj.w[:, 0] ** 2, traj.dt)[-1])
    b = float(cf.evaluate(beta_hat, abs(x0)))
    g = gamma_bar ** 2 * wsq
    return Counterexample(x0, t, u, traj, lhs, b + g, max(b, g))
