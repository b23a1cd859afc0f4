"""Benchmark vector fields and interconnection composers.

Every right-hand side is batched: ``rhs(x, w)`` takes states of shape (B, n)
and inputs of shape (B, m) and returns (B, n).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..errors import DomainError
from ..transforms import ex2_backward


@dataclass(frozen=True)
class SystemModel:
    name: str
    n: int
    m: int
    rhs: Callable[[np.ndarray, np.ndarray], np.ndarray] = field(compare=False, repr=False)
    parts: tuple = field(default=(), compare=False, repr=False)

    def f(self, x, w=None) -> np.ndarray:
        """Unbatched evaluation at a single state/input."""
        x = np.atleast_1d(np.asarray(x, dtype=float))[None, :]
        w = np.zeros((1, self.m)) if w is None else np.atleast_1d(np.asarray(w, dtype=float))[None, :]
        return self.rhs(x, w)[0]


def _ex1(x, w):
    return -x ** 3


def _ex2(x, w):
    return -x ** 3 + w


def _ex3(x, w):
    return -x + x * w


def _ex1_z(z, w):
    x = ex2_backward(z)
    return -z * (1.0 + x * x)


def ex2_input_gain(x):
    """exp(-1/(2x^2)) (1 + 1/x^2), the input coefficient of the transformed forced system."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        inv = 1.0 / (x * x)
        out = np.exp(-0.5 * inv) * (1.0 + inv)
    return np.where(np.isfinite(out), out, 0.0)


def _ex2_z(z, w):
    x = ex2_backward(z)
    return -z * (1.0 + x * x) + ex2_input_gain(x) * w


def linear1d(a: float = 1.0, b: float = 1.0) -> SystemModel:
    """x' = -a x + b w."""
    if not a > 0:
        raise DomainError("linear1d needs a > 0")
    return SystemModel(f"linear1d(a={a:g},b={b:g})", 1, 1, lambda x, w: -a * x + b * w)


def scaled_bilinear(k: float = 1.0) -> SystemModel:
    """x' = -x + k x w."""
    return SystemModel(f"bilinear(k={k:g})", 1, 1, lambda x, w: -x + k * x * w)


def cascade(driven: SystemModel, driver: SystemModel) -> SystemModel:
    """State (x1, x2) with w1 = x2; the external input is the driver's input w2."""
    if driven.m != driver.n:
        raise DomainError(f"cascade needs m1 = n2, got m1={driven.m}, n2={driver.n}")
    n1 = driven.n

    def rhs(x, w):
        x1, x2 = x[:, :n1], x[:, n1:]
        return np.concatenate([driven.rhs(x1, x2), driver.rhs(x2, w)], axis=1)

    return SystemModel(f"cascade({driven.name},{driver.name})", n1 + driver.n, driver.m, rhs, (driven, driver))


def feedback(sys1: SystemModel, sys2: SystemModel, external: bool = True) -> SystemModel:
    """w1 = x2 + eta1, w2 = x1 + eta2; the external input is (eta1, eta2) when ``external``."""
    if sys1.m != sys2.n or sys2.m != sys1.n:
        raise DomainError("feedback needs m1 = n2 and m2 = n1")
    n1, m1 = sys1.n, sys1.m

    def rhs(x, w):
        x1, x2 = x[:, :n1], x[:, n1:]
        if external:
            w1, w2 = x2 + w[:, :m1], x1 + w[:, m1:]
        else:
            w1, w2 = x2, x1
        return np.concatenate([sys1.rhs(x1, w1), sys2.rhs(x2, w2)], axis=1)

    tag = "feedback" if external else "feedback0"
    return SystemModel(f"{tag}({sys1.name},{sys2.name})", n1 + sys2.n,
                       sys1.m + sys2.m if external else 0, rhs, (sys1, sys2))


_FACTORIES: dict[str, Callable[..., SystemModel]] = {
    "ex1_cubic": lambda: SystemModel("ex1_cubic", 1, 0, _ex1),
    "ex2_cubic_forced": lambda: SystemModel("ex2_cubic_forced", 1, 1, _ex2),
    "ex3_bilinear": lambda: SystemModel("ex3_bilinear", 1, 1, _ex3),
    "ex1_transformed": lambda: SystemModel("ex1_transformed", 1, 0, _ex1_z),
    "ex2_transformed": lambda: SystemModel("ex2_transformed", 1, 1, _ex2_z),
    "linear1d": linear1d,
    "bilinear": scaled_bilinear,
}


def register_model(name: str, factory: Callable[..., SystemModel]) -> None:
    _FACTORIES[name] = factory


def model_names() -> list[str]:
    return sorted(_FACTORIES)


def get_model(name: str, **params) -> SystemModel:
    if name not in _FACTORIES:
        raise DomainError(f"unknown model {name!r}; known: {model_names()}")
    return _FACTORIES[name](**params)


def model_from_dict(doc, models: dict | None = None) -> SystemModel:
    """Model spec: a name, {"name": ..., "params": {...}}, {"cascade": [a, b]} or {"feedback": [a, b]}."""
    if isinstance(doc, SystemModel):
        return doc
    if isinstance(doc, str):
        if models and doc in models:
            return models[doc]
        return get_model(doc)
    if not isinstance(doc, dict):
        raise DomainError(f"cannot parse model from {doc!r}")
    if "cascade" in doc:
        a, b = doc["cascade"]
        return cascade(model_from_dict(a, models), model_from_dict(b, models))
    if "feedback" in doc:
        a, b = doc["feedback"]
        return feedback(model_from_dict(a, models), model_from_dict(b, models), bool(doc.get("external", True)))
    if "name" in doc:
        return get_model(doc["name"], **doc.get("params", {}))
    raise DomainError(f"cannot parse model from {doc!r}")
