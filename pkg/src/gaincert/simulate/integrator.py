"""Fixed-step classical Runge-Kutta integration, batched over trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import BlowUpError, DomainError
from .models import SystemModel
from .signals import InputSignal

ENVELOPE = 1e12


@dataclass(frozen=True)
class Trajectory:
    t: np.ndarray          # (K+1,)
    x: np.ndarray          # (K+1, n)
    w: np.ndarray          # (K+1, m); row k is held on [t_k, t_k+1)
    model: str
    dt: float
    method: str = "rk4"

    def to_csv(self, path) -> None:
        n, m = self.x.shape[1], self.w.shape[1]
        header = ",".join(["t"] + [f"x{i + 1}" for i in range(n)] + [f"w{i + 1}" for i in range(m)])
        np.savetxt(path, np.column_stack([self.t, self.x, self.w]), delimiter=",", header=header,
                   comments="", fmt="%.17g")


@dataclass(frozen=True)
class BatchTrajectory:
    t: np.ndarray          # (K+1,)
    x: np.ndarray          # (B, K+1, n)
    w: np.ndarray          # (B, K+1, m)
    aborted: np.ndarray    # (B,) rows that left the envelope (frozen afterwards)
    model: str
    dt: float

    def __len__(self) -> int:
        return self.x.shape[0]

    def __getitem__(self, i: int) -> Trajectory:
        return Trajectory(self.t, self.x[i], self.w[i], self.model, self.dt)


def time_grid(t_end: float, dt: float) -> tuple[np.ndarray, float]:
    """Uniform grid on [0, t_end]; dt is shrunk slightly if it does not divide t_end."""
    if not (t_end > 0 and dt > 0 and math.isfinite(t_end)):
        raise DomainError("t_end and dt must be positive")
    if dt > t_end:
        raise DomainError("dt must not exceed t_end")
    K = int(round(t_end / dt))
    if abs(K * dt - t_end) > 1e-9 * t_end:
        K = int(math.ceil(t_end / dt))
    h = t_end / K
    return np.arange(K + 1) * h, h


def integrate_batch(model: SystemModel, x0, inputs, t_end: float, dt: float,
                    envelope: float = ENVELOPE) -> BatchTrajectory:
    """Integrate B trajectories at once.

    ``inputs`` is a list of B :class:`InputSignal` (or one shared signal), or a
    held-value array of shape (B, K+1, m).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 1:
        x0 = x0[:, None] if model.n == 1 else x0[None, :]
    B = x0.shape[0]
    if x0.shape[1] != model.n:
        raise DomainError(f"model {model.name} has n={model.n}, got x0 with {x0.shape[1]} components")
    t, h = time_grid(t_end, dt)
    K = len(t) - 1
    if isinstance(inputs, InputSignal):
        W = np.broadcast_to(inputs.sample(t, model.m), (B, K + 1, model.m))
    elif isinstance(inputs, np.ndarray):
        W = inputs
    else:
        if len(inputs) != B:
            raise DomainError("need one input signal per initial condition")
        W = np.stack([u.sample(t, model.m) for u in inputs])
    if W.shape != (B, K + 1, model.m):
        raise DomainError(f"input array has shape {W.shape}, expected {(B, K + 1, model.m)}")

    X = np.empty((B, K + 1, model.n))
    X[:, 0] = x0
    aborted = np.zeros(B, dtype=bool)
    f = model.rhs
    half = 0.5 * h
    sixth = h / 6.0
    with np.errstate(over="ignore", invalid="ignore"):
        x = x0.copy()
        for k in range(K):
            w = W[:, k]
            k1 = f(x, w)
            k2 = f(x + half * k1, w)
            k3 = f(x + half * k2, w)
            k4 = f(x + h * k3, w)
            xn = x + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            bad = ~np.isfinite(xn).all(axis=1) | (np.abs(xn).max(axis=1) > envelope)
            if bad.any():
                aborted |= bad
                xn[bad] = x[bad]
            X[:, k + 1] = xn
            x = xn
    return BatchTrajectory(t, X, np.asarray(W), aborted, model.name, h)


def integrate(model: SystemModel, x0, u: InputSignal | None, t_end: float, dt: float = 1e-3,
              envelope: float = ENVELOPE) -> Trajectory:
    """Single trajectory; raises :class:`BlowUpError` if the state leaves the envelope."""
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    batch = integrate_batch(model, x0[None, :], u if u is not None else InputSignal("zero"),
                            t_end, dt, envelope)
    if batch.aborted[0]:
        raise BlowUpError(f"{model.name}: state left |x| <= {envelope:g} or became non-finite")
    return batch[0]
