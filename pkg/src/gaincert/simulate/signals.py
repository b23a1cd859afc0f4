"""Input signals sampled on a uniform time grid with zero-order hold."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DomainError

# waveform name -> f(t, **params) returning an array shaped like t
_WAVEFORMS: dict[str, Callable[..., np.ndarray]] = {
    "sine": lambda t, amplitude=1.0, frequency=1.0, phase=0.0: amplitude * np.sin(2 * np.pi * frequency * t + phase),
    "square": lambda t, amplitude=1.0, period=1.0: amplitude * np.where((t % period) < period / 2, 1.0, -1.0),
    "decaying_exp": lambda t, amplitude=1.0, rate=1.0: amplitude * np.exp(-rate * t),
}


def register_waveform(name: str, fn: Callable[..., np.ndarray]) -> None:
    _WAVEFORMS[name] = fn


def waveforms() -> list[str]:
    return sorted(_WAVEFORMS)


@dataclass(frozen=True)
class InputSignal:
    """An input w(t) on [0, t_end].

    ``values`` is a constant vector for ``constant`` and an array of segment
    values (one row per segment) for ``piecewise_constant``; segment k is active
    on [switch_times[k-1], switch_times[k]).
    """

    kind: str = "zero"
    values: tuple = ()
    switch_times: tuple = ()
    waveform: str | None = None
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in ("zero", "constant", "piecewise_constant", "waveform"):
            raise DomainError(f"unknown signal kind {self.kind!r}")
        if self.kind == "waveform" and self.waveform not in _WAVEFORMS:
            raise DomainError(f"unknown waveform {self.waveform!r}; known: {waveforms()}")
        if self.kind == "piecewise_constant":
            if len(self.values) != len(self.switch_times) + 1:
                raise DomainError("piecewise_constant needs one more value than switch times")
            if any(b < a for a, b in zip(self.switch_times, self.switch_times[1:])):
                raise DomainError("switch times must be nondecreasing")

    def sample(self, times: np.ndarray, m: int) -> np.ndarray:
        """Held values on the grid, shape (len(times), m); row k is applied on [t_k, t_k+1)."""
        K = len(times)
        if m == 0:
            return np.zeros((K, 0))
        if self.kind == "zero":
            return np.zeros((K, m))
        if self.kind == "constant":
            v = np.broadcast_to(np.asarray(self.values, dtype=float).reshape(-1), (m,))
            return np.tile(v, (K, 1))
        if self.kind == "piecewise_constant":
            vals = np.asarray(self.values, dtype=float).reshape(len(self.values), -1)
            vals = np.broadcast_to(vals, (len(self.values), m))
            dt = times[1] - times[0] if K > 1 else 1.0
            # switch times snapped to the grid
            snapped = np.round(np.asarray(self.switch_times, dtype=float) / dt) * dt
            idx = np.searchsorted(snapped, times + 1e-9 * dt, side="right")
            return vals[idx]
        out = np.asarray(_WAVEFORMS[self.waveform](times, **self.params), dtype=float)
        return np.broadcast_to(out.reshape(K, -1), (K, m)).copy()

    def to_dict(self) -> dict:
        doc = {"kind": self.kind}
        if self.kind in ("constant", "piecewise_constant"):
            doc["values"] = np.asarray(self.values, dtype=float).tolist()
        if self.kind == "piecewise_constant":
            doc["switch_times"] = list(self.switch_times)
        if self.kind == "waveform":
            doc["waveform"] = self.waveform
            doc["params"] = dict(self.params)
        return doc


def zero() -> InputSignal:
    return InputSignal("zero")


def constant(value) -> InputSignal:
    return InputSignal("constant", tuple(np.atleast_1d(np.asarray(value, dtype=float)).tolist()))


def piecewise_constant(switch_times, values) -> InputSignal:
    vals = tuple(np.asarray(v, dtype=float).tolist() for v in values)
    return InputSignal("piecewise_constant", vals, tuple(float(t) for t in switch_times))


def waveform(name: str, **params) -> InputSignal:
    return InputSignal("waveform", waveform=name, params=params)


def signal_from_dict(doc) -> InputSignal:
    if isinstance(doc, InputSignal):
        return doc
    kind = doc.get("kind", "zero")
    if kind == "zero":
        return zero()
    if kind == "constant":
        return constant(doc["values"] if "values" in doc else doc["value"])
    if kind == "piecewise_constant":
        return piecewise_constant(doc["switch_times"], doc["values"])
    if kind == "waveform":
        return waveform(doc["waveform"], **doc.get("params", {}))
    raise DomainError(f"unknown signal kind {kind!r}")


def random_piecewise(rng: np.random.Generator, t_end: float, m: int, switches: int,
                     amplitude: tuple[float, float]) -> InputSignal:
    """Random piecewise-constant signal with ``switches`` uniform switch times."""
    times = np.sort(rng.uniform(0.0, t_end, size=switches))
    vals = rng.uniform(amplitude[0], amplitude[1], size=(switches + 1, max(m, 1)))
    return piecewise_constant(times, vals)
