"""Origin-fixing coordinate changes and their K-infinity sandwich bounds.

Two diagonal constructions turn a scalar gain alpha into a coordinate change on
R^p acting axis by axis::

    upper:  T_i(z) = sgn(z_i) alpha(|z_i| sqrt(p))        alpha(|z|) <= |T(z)|
    lower:  T_i(z) = sgn(z_i) alpha(|z_i|) / sqrt(p)      |T(z)| <= alpha(|z|)

Generic transforms are user-supplied forward/backward pairs, referenced by a
registered name when they have to be serialised.  :func:`numeric_bounds` returns
K-infinity functions lo, hi with lo(|z|) <= |T(z)| <= hi(|z|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import lambertw
from scipy.stats import norm, qmc

from . import comparison as cf
from .comparison import ScalarGainFn
from .errors import CertificationError, DomainError

KINDS = ("diagonal_upper", "diagonal_lower", "generic")


@dataclass(frozen=True)
class _Registered:
    forward: Callable[[np.ndarray], np.ndarray]
    backward: Callable[[np.ndarray], np.ndarray]
    lower: ScalarGainFn | None
    upper: ScalarGainFn | None
    scalar_only: bool


_REGISTRY: dict[str, _Registered] = {}


def register_transform(name: str, forward: Callable, backward: Callable,
                       lower: ScalarGainFn | None = None, upper: ScalarGainFn | None = None,
                       scalar_only: bool = False) -> None:
    """Register a generic transform.  Maps act on arrays whose last axis is the state.

    ``lower``/``upper`` may supply exact radial bounds; otherwise they are sampled.
    """
    _REGISTRY[name] = _Registered(forward, backward, lower, upper, scalar_only)


def registered_transforms() -> list[str]:
    return sorted(_REGISTRY)


@dataclass(frozen=True)
class CoordinateTransform:
    kind: str
    dim: int
    axis_fn: ScalarGainFn | None = None
    name: str | None = None
    forward: Callable | None = field(default=None, compare=False, repr=False)
    backward: Callable | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown transform kind {self.kind!r}")
        if int(self.dim) < 1:
            raise DomainError("transform dimension must be >= 1")
        if self.kind != "generic" and self.axis_fn is None:
            raise DomainError("diagonal transforms need an axis function")
        if self.kind == "generic" and (self.forward is None or self.backward is None):
            raise DomainError("generic transforms need forward and backward maps")

    def __call__(self, z):
        return apply(self, z)

    def inverse(self) -> "CoordinateTransform":
        """The inverse map as a generic transform."""
        name = None
        if self.kind == "generic" and self.name is not None:
            partner = self.name[:-len("_inverse")] if self.name.endswith("_inverse") else self.name + "_inverse"
            name = partner if partner in _REGISTRY else None
        if name is not None:
            return generic(name, self.dim)
        return CoordinateTransform("generic", self.dim, name=None,
                                   forward=lambda psi: apply_inverse(self, psi),
                                   backward=lambda z: apply(self, z))

    def to_dict(self) -> dict:
        if self.kind == "generic":
            if self.name is None:
                raise DomainError("only registered generic transforms can be serialised")
            return {"kind": "generic", "name": self.name, "p": self.dim}
        return {"kind": self.kind, "p": self.dim, "axis_fn": cf.to_dict(self.axis_fn)}


def _check_dim(p) -> int:
    if int(p) != p or p < 1:
        raise DomainError(f"dimension must be a positive integer, got {p!r}")
    return int(p)


def build_upper(alpha: ScalarGainFn, p: int) -> CoordinateTransform:
    return CoordinateTransform("diagonal_upper", _check_dim(p), alpha)


def build_lower(alpha: ScalarGainFn, p: int) -> CoordinateTransform:
    return CoordinateTransform("diagonal_lower", _check_dim(p), alpha)


def generic(name: str, p: int = 1) -> CoordinateTransform:
    if name not in _REGISTRY:
        raise DomainError(f"unknown transform {name!r}; known: {registered_transforms()}")
    reg = _REGISTRY[name]
    p = _check_dim(p)
    if reg.scalar_only and p != 1:
        raise DomainError(f"transform {name!r} is scalar only")
    return CoordinateTransform("generic", p, name=name, forward=reg.forward, backward=reg.backward)


def custom(forward: Callable, backward: Callable, p: int = 1) -> CoordinateTransform:
    """Unregistered generic transform from a user-supplied pair of maps."""
    return CoordinateTransform("generic", _check_dim(p), forward=forward, backward=backward)


def from_dict(doc, functions: dict | None = None) -> CoordinateTransform:
    if isinstance(doc, CoordinateTransform):
        return doc
    kind = doc.get("kind")
    p = int(doc.get("p", 1))
    if kind == "generic":
        return generic(doc["name"], p)
    if kind in ("diagonal_upper", "diagonal_lower"):
        alpha = cf.from_dict(doc["axis_fn"], functions)
        return (build_upper if kind == "diagonal_upper" else build_lower)(alpha, p)
    raise DomainError(f"cannot parse transform from {doc!r}")


def _as_points(T: CoordinateTransform, z) -> tuple[np.ndarray, bool]:
    arr = np.asarray(z, dtype=float)
    scalar = False
    if T.dim == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
        scalar = True
    if arr.shape[-1] != T.dim:
        raise DomainError(f"transform acts on R^{T.dim}, got trailing dimension {arr.shape[-1]}")
    return arr, scalar


def _finish(out: np.ndarray, scalar: bool):
    out = out[..., 0] if scalar else out
    return float(out) if np.ndim(out) == 0 else out


def safe_norm(v, axis: int = -1) -> np.ndarray:
    """Euclidean norm along ``axis`` without overflow for entries above 1e154."""
    v = np.asarray(v, dtype=float)
    scale = np.max(np.abs(v), axis=axis, keepdims=True)
    with np.errstate(invalid="ignore", divide="ignore"):
        unit = np.where(scale > 0, v / np.where(scale > 0, scale, 1.0), 0.0)
    return np.squeeze(scale, axis=axis) * np.linalg.norm(unit, axis=axis)


def apply(T: CoordinateTransform, z):
    """T(z); the last axis of z is the state (a bare scalar is accepted when p = 1)."""
    arr, scalar = _as_points(T, z)
    root = math.sqrt(T.dim)
    if T.kind == "diagonal_upper":
        out = np.sign(arr) * cf.evaluate(T.axis_fn, np.abs(arr) * root)
    elif T.kind == "diagonal_lower":
        out = np.sign(arr) * cf.evaluate(T.axis_fn, np.abs(arr)) / root
    else:
        out = np.asarray(T.forward(arr), dtype=float)
    return _finish(out, scalar)


def apply_inverse(T: CoordinateTransform, psi):
    """T^-1(psi).  Diagonal kinds invert each axis with ``inverse_eval``."""
    arr, scalar = _as_points(T, psi)
    root = math.sqrt(T.dim)
    if T.kind == "diagonal_upper":
        out = np.sign(arr) * cf.inverse_eval(T.axis_fn, np.abs(arr)) / root
    elif T.kind == "diagonal_lower":
        out = np.sign(arr) * cf.inverse_eval(T.axis_fn, np.abs(arr) * root)
    else:
        out = np.asarray(T.backward(arr), dtype=float)
    return _finish(out, scalar)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TransformBounds:
    lower: ScalarGainFn
    upper: ScalarGainFn
    provenance: str


@dataclass(frozen=True)
class RadialGrid:
    r_min: float = 1e-4
    r_max: float = 1e4
    points: int = 128

    def radii(self) -> np.ndarray:
        return np.geomspace(self.r_min, self.r_max, self.points)


DEFAULT_RADII = RadialGrid()


def unit_directions(p: int, count: int, seed: int = 0) -> np.ndarray:
    """Quasi-random unit vectors in R^p plus the axis and main-diagonal directions."""
    if p == 1:
        return np.array([[1.0], [-1.0]])
    extra = [np.eye(p), -np.eye(p), np.ones((1, p)) / math.sqrt(p), -np.ones((1, p)) / math.sqrt(p)]
    sampler = qmc.Halton(d=p, scramble=True, seed=seed)
    u = np.clip(sampler.random(count), 1e-12, 1 - 1e-12)
    g = norm.ppf(u)
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return np.vstack(extra + [g])


def sphere_profile(T: CoordinateTransform, radii: np.ndarray, directions: np.ndarray):
    """min and max of |T| over sampled points of each sphere |z| = r."""
    pts = radii[:, None, None] * directions[None, :, :]
    vals = np.linalg.norm(np.asarray(apply(T, pts)).reshape(pts.shape), axis=-1)
    return vals.min(axis=1), vals.max(axis=1)


def _analytic(T: CoordinateTransform) -> TransformBounds:
    root = math.sqrt(T.dim)
    a = T.axis_fn
    if T.kind == "diagonal_lower":
        return TransformBounds(cf.post_scale(1.0 / root, cf.pre_scale(1.0 / root, a)), a, "analytic")
    return TransformBounds(a, cf.post_scale(root, cf.pre_scale(root, a)), "analytic")


def numeric_bounds(T: CoordinateTransform, radii: RadialGrid | None = None,
                   force_sampling: bool = False, seed: int = 0) -> TransformBounds:
    """K-infinity lo, hi with lo(|z|) <= |T(z)| <= hi(|z|).

    Diagonal kinds get the exact analytic sandwich; registered generic maps with
    known radial bounds use them; anything else is sampled on spheres.
    """
    if not force_sampling:
        if T.kind != "generic":
            return _analytic(T)
        reg = _REGISTRY.get(T.name) if T.name else None
        if reg is not None and reg.lower is not None and reg.upper is not None:
            return TransformBounds(reg.lower, reg.upper, "analytic")
    grid = radii or DEFAULT_RADII
    r = grid.radii()
    dirs = unit_directions(T.dim, 64 * T.dim, seed)
    lo, hi = sphere_profile(T, r, dirs)
    if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
        raise CertificationError("transform produced non-finite values on the sampled spheres")
    # min over |z| >= r and max over |z| <= r, then shift one knot so that
    # linear interpolation between knots stays on the safe side.
    lo = np.minimum.accumulate(lo[::-1])[::-1]
    hi = np.maximum.accumulate(hi)
    if lo[0] <= 0:
        raise CertificationError("sampled lower envelope is not positive definite")
    lower = cf.interp(r[1:], lo[:-1])
    upper = cf.interp(r[:-1], hi[1:])
    return TransformBounds(lower, upper, "sampled")


# ---------------------------------------------------------------------------
# built-in generic transforms
# ---------------------------------------------------------------------------

def ex2_forward(x):
    """x exp(-1/(2x^2)), extended by 0 at the origin."""
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = x * np.exp(-0.5 / (x * x))
    return np.where(x == 0, 0.0, out)


def ex2_backward(z):
    """Closed-form inverse of :func:`ex2_forward`.

    With u = 1/x^2 the relation z^2 = x^2 exp(-1/x^2) reads u e^u = 1/z^2, so
    x = sgn(z) / sqrt(W(1/z^2)) with W the principal Lambert function.
    """
    z = np.asarray(z, dtype=float)
    flat = np.atleast_1d(z)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        # work with L = log(1/z^2) so that tiny |z| (where 1/z^2 overflows) stays exact
        big = -2.0 * np.log(np.abs(flat))
        L = np.where(np.isfinite(big), big, 0.0)
        w = lambertw(np.exp(np.minimum(L, 600.0))).real
        far = L >= 600.0
        if far.any():
            # asymptotic start, then Newton on w + log w = L
            v = L[far] - np.log(L[far])
            for _ in range(3):
                v = v - (v + np.log(v) - L[far]) / (1.0 + 1.0 / v)
            w[far] = v
        out = (np.sign(flat) / np.sqrt(w)).reshape(z.shape)
    return np.where(z == 0, 0.0, out)


cf.register_named("example2", lambda a: ex2_forward(a), lambda a: ex2_backward(a))
register_transform("identity", lambda z: np.asarray(z, dtype=float), lambda z: np.asarray(z, dtype=float),
                   cf.identity(), cf.identity())
register_transform("example2", ex2_forward, ex2_backward,
                   cf.named("example2"), cf.named("example2"), scalar_only=True)
register_transform("example2_inverse", ex2_backward, ex2_forward,
                   cf.inverse(cf.named("example2")), cf.inverse(cf.named("example2")), scalar_only=True)
