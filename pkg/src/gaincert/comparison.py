"""Candidate class-K-infinity scalar functions as immutable expression trees.

A :class:`ScalarGainFn` is a small expression tree built from five atoms
(identity, power, linear, exp_minus_one, log_one_plus) and a handful of
combinators (compose, pointwise max/min, sum, post/pre scaling, residual,
excess, inverse).  Trees are evaluated with numpy, so every operation accepts
scalars or arrays.

Evaluation is total: each node saturates at ``+-SATURATION`` instead of
overflowing.  Atoms are extended to negative arguments as odd functions; a
negative argument can only appear inside a tree through a ``residual`` or
``excess`` node, and callers of :func:`evaluate` must pass ``s >= 0``.

Membership in K-infinity is never assumed.  :func:`certify_kinf` checks it
numerically on a grid and returns a report; that report is advisory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping

import numpy as np

from .errors import DomainError, PreconditionError, RangeError

SATURATION = 1e300
INVERSE_MAX_ITER = 200
INVERSE_REL_WIDTH = 1e-12
_GROWTH = 16.0
_TINY = 1e-300

ATOMS = ("identity", "power", "linear", "exp_minus_one", "log_one_plus", "interp", "named")
COMBINATORS = (
    "compose", "max", "min", "sum", "post_scale", "pre_scale", "residual", "excess", "inverse",
)

# Named scalar functions (odd, vectorised); registered by other modules, e.g. the
# radial profiles of registered coordinate transforms.
_NAMED: dict[str, tuple[Callable[[np.ndarray], np.ndarray], Callable[[np.ndarray], np.ndarray] | None]] = {}


def register_named(name: str, fn: Callable, inverse_fn: Callable | None = None) -> None:
    """Register a nonnegative, increasing scalar map usable as the ``named`` atom.

    ``fn`` receives a nonnegative float array.  ``inverse_fn`` is optional; when
    absent the inverse falls back to bisection.
    """
    _NAMED[name] = (fn, inverse_fn)


def named_functions() -> list[str]:
    return sorted(_NAMED)


@dataclass(frozen=True)
class ScalarGainFn:
    """Immutable expression-tree node.

    ``params`` holds the op-specific data (an exponent, a slope, knot tables or a
    registered name); ``args`` holds child nodes.
    """

    op: str
    args: tuple["ScalarGainFn", ...] = ()
    params: tuple = ()

    def __call__(self, s):
        return evaluate(self, s)

    # Light operator sugar: f @ g is composition, f + g pointwise sum, k * f post-scaling.
    def __matmul__(self, other: "ScalarGainFn") -> "ScalarGainFn":
        return compose(self, other)

    def __add__(self, other: "ScalarGainFn") -> "ScalarGainFn":
        return gain_sum(self, other)

    def __rmul__(self, k: float) -> "ScalarGainFn":
        return post_scale(k, self)

    def __str__(self) -> str:
        return describe(self)

    def to_dict(self) -> dict:
        return to_dict(self)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------

def _positive(name: str, value: float) -> float:
    value = float(value)
    if not (value > 0 and math.isfinite(value)):
        raise DomainError(f"{name} must be a positive finite real, got {value!r}")
    return value


def identity() -> ScalarGainFn:
    return ScalarGainFn("identity")


def power(p: float) -> ScalarGainFn:
    p = _positive("power exponent", p)
    if p == 1.0:
        return identity()
    return ScalarGainFn("power", params=(p,))


def linear(k: float) -> ScalarGainFn:
    k = _positive("linear slope", k)
    if k == 1.0:
        return identity()
    return ScalarGainFn("linear", params=(k,))


def exp_minus_one() -> ScalarGainFn:
    return ScalarGainFn("exp_minus_one")


def log_one_plus() -> ScalarGainFn:
    return ScalarGainFn("log_one_plus")


def interp(xs: Iterable[float], ys: Iterable[float]) -> ScalarGainFn:
    """Piecewise-linear function through (0, 0) and the given knots.

    Beyond the last knot it continues along the secant through the origin, so
    it stays unbounded whenever the last value is positive.
    """
    xs = tuple(float(x) for x in xs)
    ys = tuple(float(y) for y in ys)
    if len(xs) != len(ys) or not xs:
        raise DomainError("interp needs equally long, nonempty knot tables")
    if xs[0] <= 0 or any(b <= a for a, b in zip(xs, xs[1:])):
        raise DomainError("interp knots must be positive and strictly increasing")
    if ys[0] < 0 or any(b < a for a, b in zip(ys, ys[1:])):
        raise DomainError("interp values must be nonnegative and nondecreasing")
    return ScalarGainFn("interp", params=(xs, ys))


def named(name: str) -> ScalarGainFn:
    if name not in _NAMED:
        raise DomainError(f"unknown named function {name!r}; known: {named_functions()}")
    return ScalarGainFn("named", params=(name,))


def compose(*fns: ScalarGainFn) -> ScalarGainFn:
    """compose(f, g, h) is f o g o h."""
    if not fns:
        raise DomainError("compose needs at least one function")
    out = fns[-1]
    for f in reversed(fns[:-1]):
        if f.op == "identity":
            continue
        if out.op == "identity":
            out = f
            continue
        out = ScalarGainFn("compose", (f, out))
    return out


def _nary(op: str, fns: tuple[ScalarGainFn, ...]) -> ScalarGainFn:
    if not fns:
        raise DomainError(f"{op} needs at least one function")
    if len(fns) == 1:
        return fns[0]
    return ScalarGainFn(op, tuple(fns))


def pointwise_max(*fns: ScalarGainFn) -> ScalarGainFn:
    return _nary("max", fns)


def pointwise_min(*fns: ScalarGainFn) -> ScalarGainFn:
    return _nary("min", fns)


def gain_sum(*fns: ScalarGainFn) -> ScalarGainFn:
    return _nary("sum", fns)


def post_scale(k: float, f: ScalarGainFn) -> ScalarGainFn:
    """s -> k * f(s)."""
    k = _positive("post_scale factor", k)
    if k == 1.0:
        return f
    return ScalarGainFn("post_scale", (f,), (k,))


def pre_scale(k: float, f: ScalarGainFn) -> ScalarGainFn:
    """s -> f(k * s)."""
    k = _positive("pre_scale factor", k)
    if k == 1.0:
        return f
    return ScalarGainFn("pre_scale", (f,), (k,))


def residual(f: ScalarGainFn) -> ScalarGainFn:
    """s -> s - f(s).  Not assumed to be in K-infinity."""
    return ScalarGainFn("residual", (f,))


def excess(f: ScalarGainFn) -> ScalarGainFn:
    """s -> f(s) - s, i.e. rho - Id.  Not assumed to be in K-infinity."""
    return ScalarGainFn("excess", (f,))


def numeric_inverse(f: ScalarGainFn) -> ScalarGainFn:
    """Lazy inverse evaluated by bracketing and bisection."""
    return ScalarGainFn("inverse", (f,))


def inverse(f: ScalarGainFn) -> ScalarGainFn:
    """Inverse of f, in closed form when the tree allows it, else a bisection node."""
    closed = _closed_inverse(f)
    return closed if closed is not None else numeric_inverse(f)


def _closed_inverse(f: ScalarGainFn) -> ScalarGainFn | None:
    op = f.op
    if op == "identity":
        return f
    if op == "power":
        return power(1.0 / f.params[0])
    if op == "linear":
        return linear(1.0 / f.params[0])
    if op == "exp_minus_one":
        return log_one_plus()
    if op == "log_one_plus":
        return exp_minus_one()
    if op == "inverse":
        return f.args[0]
    slope = linear_slope(f)
    if slope is not None and slope > 0:
        return linear(1.0 / slope)
    if op == "compose":
        return compose(inverse(f.args[1]), inverse(f.args[0]))
    if op == "post_scale":
        return compose(inverse(f.args[0]), linear(1.0 / f.params[0]))
    if op == "pre_scale":
        return post_scale(1.0 / f.params[0], inverse(f.args[0]))
    return None


def linear_slope(f: ScalarGainFn) -> float | None:
    """Slope k when f(s) = k*s exactly on s >= 0, else None."""
    op = f.op
    if op == "identity":
        return 1.0
    if op == "linear":
        return f.params[0]
    if op in ("post_scale", "pre_scale"):
        inner = linear_slope(f.args[0])
        return None if inner is None else f.params[0] * inner
    slopes = [linear_slope(a) for a in f.args]
    if not f.args or any(k is None for k in slopes):
        return None
    if op == "compose":
        return slopes[0] * slopes[1]
    if op == "sum":
        return float(sum(slopes))
    if op == "max":
        return max(slopes)
    if op == "min":
        return min(slopes)
    if op == "residual":
        return 1.0 - slopes[0]
    if op == "excess":
        return slopes[0] - 1.0
    if op == "inverse":
        return 1.0 / slopes[0] if slopes[0] > 0 else None
    return None


def sqrt_gain(f: ScalarGainFn) -> ScalarGainFn:
    """s -> f(s)**(1/2), folding the obvious power cases."""
    if f.op == "identity":
        return power(0.5)
    if f.op == "power":
        return power(f.params[0] / 2.0)
    if f.op == "compose" and f.args[0].op == "power":
        return compose(power(f.args[0].params[0] / 2.0), f.args[1])
    if f.op == "post_scale":
        return post_scale(math.sqrt(f.params[0]), sqrt_gain(f.args[0]))
    return compose(power(0.5), f)


def square_gain(f: ScalarGainFn) -> ScalarGainFn:
    """s -> f(s)**2."""
    if f.op == "power":
        return power(2.0 * f.params[0])
    if f.op == "identity":
        return power(2.0)
    if f.op == "compose" and f.args[0].op == "power":
        return compose(power(2.0 * f.args[0].params[0]), f.args[1])
    return compose(power(2.0), f)


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _sat(v: np.ndarray) -> np.ndarray:
    return np.clip(v, -SATURATION, SATURATION)


def _odd(fn: Callable[[np.ndarray], np.ndarray], s: np.ndarray) -> np.ndarray:
    return np.sign(s) * fn(np.abs(s))


def _interp_eval(params: tuple, s: np.ndarray) -> np.ndarray:
    xs, ys = params
    kx = np.concatenate(([0.0], xs))
    ky = np.concatenate(([0.0], ys))
    tail = ys[-1] / xs[-1]

    def pos(a):
        inside = np.interp(a, kx, ky)
        return np.where(a > xs[-1], ys[-1] + tail * (a - xs[-1]), inside)

    return _odd(pos, s)


def _ev(f: ScalarGainFn, s: np.ndarray) -> np.ndarray:
    op = f.op
    if op == "identity":
        out = s
    elif op == "power":
        out = _odd(lambda a: a ** f.params[0], s)
    elif op == "linear":
        out = f.params[0] * s
    elif op == "exp_minus_one":
        out = _odd(np.expm1, s)
    elif op == "log_one_plus":
        out = _odd(np.log1p, s)
    elif op == "interp":
        out = _interp_eval(f.params, s)
    elif op == "named":
        out = _odd(_NAMED[f.params[0]][0], s)
    elif op == "compose":
        out = _ev(f.args[0], _ev(f.args[1], s))
    elif op == "max":
        out = np.maximum.reduce([_ev(a, s) for a in f.args])
    elif op == "min":
        out = np.minimum.reduce([_ev(a, s) for a in f.args])
    elif op == "sum":
        out = np.add.reduce([_ev(a, s) for a in f.args])
    elif op == "post_scale":
        out = f.params[0] * _ev(f.args[0], s)
    elif op == "pre_scale":
        out = _ev(f.args[0], _sat(f.params[0] * s))
    elif op == "residual":
        out = s - _ev(f.args[0], s)
    elif op == "excess":
        out = _ev(f.args[0], s) - s
    elif op == "inverse":
        out = _invert(f.args[0], s, strict=False)
    else:
        raise DomainError(f"unknown op {op!r}")
    return _sat(out)


def evaluate(f: ScalarGainFn, s):
    """Evaluate f at s >= 0 (scalar or array).  Returns a float for scalar input."""
    arr = np.asarray(s, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("comparison functions are evaluated on s >= 0 only")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        out = _ev(f, arr)
    return float(out) if out.ndim == 0 else out


def _invert(f: ScalarGainFn, y: np.ndarray, strict: bool,
            rel_width: float = INVERSE_REL_WIDTH, max_iter: int = INVERSE_MAX_ITER) -> np.ndarray:
    """Solve f(s) = y elementwise by bracket growth then bisection (f increasing)."""
    y = np.asarray(y, dtype=float)
    shape = y.shape
    sign = np.sign(y).ravel()
    t = np.abs(y).ravel()
    lo = np.zeros_like(t)
    hi = np.ones_like(t)
    bad = np.zeros(t.shape, dtype=bool)

    pending = np.nonzero(t > 0)[0]
    if f.op == "named" and _NAMED[f.params[0]][1] is not None:
        out = _NAMED[f.params[0]][1](t)
        return (sign * out).reshape(shape)

    grew = np.zeros(t.shape, dtype=bool)
    grow = pending[_ev(f, hi[pending]) < t[pending]]
    while grow.size:
        grew[grow] = True
        lo[grow] = hi[grow]
        capped = grow[hi[grow] >= SATURATION]
        bad[capped] = True
        grow = grow[hi[grow] < SATURATION]
        hi[grow] = np.minimum(hi[grow] * _GROWTH, SATURATION)
        grow = grow[_ev(f, hi[grow]) < t[grow]]

    shrink = pending[~grew[pending]]
    while shrink.size:
        cand = hi[shrink] / _GROWTH
        above = (_ev(f, cand) >= t[shrink]) & (cand > _TINY)
        hi[shrink[above]] = cand[above]
        lo[shrink[~above]] = cand[~above]
        shrink = shrink[above]

    if strict and bad.any():
        worst = float(t[bad].max())
        raise RangeError(f"value {worst:g} is not bracketable below the saturation cap {SATURATION:g}")

    live = pending[~bad[pending]]
    for _ in range(max_iter):
        if not live.size:
            break
        mid = 0.5 * (lo[live] + hi[live])
        below = _ev(f, mid) < t[live]
        lo[live[below]] = mid[below]
        hi[live[~below]] = mid[~below]
        live = live[(hi[live] - lo[live]) > rel_width * hi[live]]

    out = 0.5 * (lo + hi)
    out[t == 0] = 0.0
    out[bad] = SATURATION
    return (sign * out).reshape(shape)


def inverse_eval(f: ScalarGainFn, y, rel_width: float = INVERSE_REL_WIDTH,
                 max_iter: int = INVERSE_MAX_ITER):
    """Return s with f(s) = y (up to the bisection width).

    f is assumed increasing on the bracket.  Raises :class:`RangeError` when y
    cannot be bracketed below the saturation cap.
    """
    arr = np.asarray(y, dtype=float)
    if np.any(arr < 0) or np.any(np.isnan(arr)):
        raise DomainError("inverse_eval needs y >= 0")
    closed = _closed_inverse(f)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if closed is not None and closed.op != "inverse":
            out = _ev(closed, arr)
            if np.any(np.abs(out) >= SATURATION):
                raise RangeError(f"value {float(np.max(arr)):g} has no preimage below the saturation cap")
        else:
            out = _invert(f, arr, strict=True, rel_width=rel_width, max_iter=max_iter)
    return float(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Sampling grid for numerical K-infinity checks."""

    s_max: float = 1e9
    points: int = 512
    spacing: str = "log"
    s_min: float = 1e-9

    def __post_init__(self):
        if self.points < 2 or not self.s_max > 0:
            raise DomainError("grid needs at least 2 points and s_max > 0")
        if self.spacing not in ("log", "linear"):
            raise DomainError(f"unknown grid spacing {self.spacing!r}")
        if self.spacing == "log" and not (0 < self.s_min < self.s_max):
            raise DomainError("log grid needs 0 < s_min < s_max")

    def samples(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.s_min, self.s_max, self.points)
        return np.linspace(0.0, self.s_max, self.points)


DEFAULT_GRID = GridSpec()
DEFAULT_TOL = 1e-10
UNBOUNDED_THRESHOLD = 1e6


@dataclass(frozen=True)
class KinfCertReport:
    zero_at_zero: bool
    monotone_on_grid: bool
    unbounded_advisory: bool
    grid: GridSpec
    tolerance: float
    worst_step: float = 0.0
    worst_at: float = 0.0
    value_at_max: float = 0.0

    @property
    def verdict(self) -> bool:
        return self.zero_at_zero and self.monotone_on_grid and self.unbounded_advisory

    def __bool__(self) -> bool:
        return self.verdict

    def summary(self) -> str:
        flags = []
        if not self.zero_at_zero:
            flags.append("f(0) != 0")
        if not self.monotone_on_grid:
            flags.append(f"decreases by {-self.worst_step:.3g} near s={self.worst_at:.3g}")
        if not self.unbounded_advisory:
            flags.append(f"f(s_max)={self.value_at_max:.3g} below unboundedness threshold")
        return "K-infinity on grid" if not flags else "not K-infinity: " + "; ".join(flags)


def certify_kinf(f: ScalarGainFn, grid: GridSpec = DEFAULT_GRID, tol: float = DEFAULT_TOL,
                 unbounded_threshold: float = UNBOUNDED_THRESHOLD) -> KinfCertReport:
    """Numerical proxy for f in K-infinity.  Never raises for a well-formed tree."""
    s = np.concatenate(([0.0], grid.samples()))
    s = np.unique(s)
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        v = _ev(f, s)
    finite = np.isfinite(v)
    v = np.where(finite, v, -SATURATION)
    steps = np.diff(v)
    i = int(np.argmin(steps))
    return KinfCertReport(
        zero_at_zero=bool(abs(v[0]) <= tol),
        monotone_on_grid=bool(finite.all() and steps[i] >= -tol),
        unbounded_advisory=bool(v[-1] > unbounded_threshold),
        grid=grid,
        tolerance=tol,
        worst_step=float(steps[i]),
        worst_at=float(s[i + 1]),
        value_at_max=float(v[-1]),
    )


def require_kinf(f: ScalarGainFn, what: str = "function", grid: GridSpec = DEFAULT_GRID,
                 tol: float = DEFAULT_TOL) -> KinfCertReport:
    report = certify_kinf(f, grid, tol)
    if not report:
        raise PreconditionError(f"{what} {describe(f)}: {report.summary()}")
    return report


# ---------------------------------------------------------------------------
# inequality lemmas
# ---------------------------------------------------------------------------

def weak_triangle_bound(gamma: ScalarGainFn, rho: ScalarGainFn, a, b, check: bool = True):
    """max{gamma(rho(a)), gamma(mu(b))} with mu = rho o (rho - Id)^-1.

    The result dominates gamma(a + b) whenever gamma and rho - Id are in
    K-infinity; with ``check`` both memberships are certified first.
    """
    if check:
        require_kinf(gamma, "gamma")
        require_kinf(excess(rho), "rho - Id")
    mu = compose(rho, inverse(excess(rho)))
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.maximum(evaluate(gamma, evaluate(rho, a)), evaluate(gamma, evaluate(mu, b)))
    return float(out) if np.ndim(out) == 0 else out


def mu_of(rho: ScalarGainFn) -> ScalarGainFn:
    """rho o (rho - Id)^-1, the companion function of the weak triangle inequality."""
    return compose(rho, inverse(excess(rho)))


def sum_lower_envelope(alpha1: ScalarGainFn, alpha2: ScalarGainFn) -> ScalarGainFn:
    """alpha(s) = min{alpha1(s/2), alpha2(s/2)}; alpha(s1+s2) <= alpha1(s1) + alpha2(s2)."""
    return pointwise_min(pre_scale(0.5, alpha1), pre_scale(0.5, alpha2))


def young_split(a_sq: float, b_sq: float, eps: float) -> float:
    """Upper bound (1+eps^2) a_sq + (1+1/eps^2) b_sq for ||a+b||^2."""
    if not eps > 0:
        raise DomainError("Young splitting needs eps > 0")
    if a_sq < 0 or b_sq < 0:
        raise DomainError("squared norms must be nonnegative")
    return (1.0 + eps * eps) * a_sq + (1.0 + 1.0 / (eps * eps)) * b_sq


# ---------------------------------------------------------------------------
# structured text form
# ---------------------------------------------------------------------------

_SCALAR_PARAM = {"power": "p", "linear": "k", "post_scale": "k", "pre_scale": "k"}
_ALIASES = {
    "pointwise_max": "max", "pointwise_min": "min", "numeric_inverse": "inverse",
    "add": "sum",
}


def to_dict(f: ScalarGainFn) -> dict:
    d: dict[str, Any] = {"op": f.op}
    if f.op in _SCALAR_PARAM:
        d[_SCALAR_PARAM[f.op]] = f.params[0]
    elif f.op == "interp":
        d["xs"], d["ys"] = list(f.params[0]), list(f.params[1])
    elif f.op == "named":
        d["name"] = f.params[0]
    if f.args:
        d["args"] = [to_dict(a) for a in f.args]
    return d


def from_dict(doc, refs: Mapping[str, ScalarGainFn] | None = None) -> ScalarGainFn:
    """Parse the structured form.  A bare string is an atom name or a reference into ``refs``."""
    if isinstance(doc, ScalarGainFn):
        return doc
    if isinstance(doc, str):
        if refs is not None and doc in refs:
            return refs[doc]
        doc = {"op": doc}
    if not isinstance(doc, Mapping) or "op" not in doc:
        raise DomainError(f"cannot parse comparison function from {doc!r}")
    op = _ALIASES.get(doc["op"], doc["op"])
    args = [from_dict(a, refs) for a in doc.get("args", [])]

    def need(n):
        if len(args) != n:
            raise DomainError(f"{op} takes {n} argument(s), got {len(args)}")

    if op == "identity":
        return identity()
    if op == "power":
        return power(doc["p"])
    if op == "linear":
        return linear(doc["k"])
    if op == "exp_minus_one":
        return exp_minus_one()
    if op == "log_one_plus":
        return log_one_plus()
    if op == "interp":
        return interp(doc["xs"], doc["ys"])
    if op == "named":
        return named(doc["name"])
    if op == "compose":
        return ScalarGainFn("compose", tuple(args)) if len(args) == 2 else compose(*args)
    if op in ("max", "min", "sum"):
        return _nary(op, tuple(args))
    if op == "post_scale":
        need(1)
        return post_scale(doc["k"], args[0])
    if op == "pre_scale":
        need(1)
        return pre_scale(doc["k"], args[0])
    if op == "residual":
        need(1)
        return residual(args[0])
    if op == "excess":
        need(1)
        return excess(args[0])
    if op == "inverse":
        need(1)
        return numeric_inverse(args[0])
    raise DomainError(f"unknown op {op!r}")


def describe(f: ScalarGainFn) -> str:
    op = f.op
    if op == "identity":
        return "Id"
    if op == "power":
        return f"s^{f.params[0]:g}"
    if op == "linear":
        return f"{f.params[0]:g}s"
    if op == "exp_minus_one":
        return "(e^s-1)"
    if op == "log_one_plus":
        return "log(1+s)"
    if op == "interp":
        return f"interp[{len(f.params[0])} knots]"
    if op == "named":
        return f.params[0]
    if op == "post_scale":
        return f"{f.params[0]:g}*{describe(f.args[0])}"
    if op == "pre_scale":
        return f"{describe(f.args[0])}({f.params[0]:g}s)"
    if op == "compose":
        return f"{describe(f.args[0])} o {describe(f.args[1])}"
    if op == "residual":
        return f"(Id - {describe(f.args[0])})"
    if op == "excess":
        return f"({describe(f.args[0])} - Id)"
    if op == "inverse":
        return f"({describe(f.args[0])})^-1"
    inner = ", ".join(describe(a) for a in f.args)
    return f"{op}{{{inner}}}"


# ---------------------------------------------------------------------------
# random trees (property testing and acceptance sweeps)
# ---------------------------------------------------------------------------

def random_kinf(rng: np.random.Generator, depth: int = 5, allow_inverse: bool = True) -> ScalarGainFn:
    """Random tree over the grammar without residual/excess; always in K-infinity."""
    if depth <= 1 or rng.random() < 0.3:
        kind = rng.integers(5)
        if kind == 0:
            return identity()
        if kind == 1:
            return power(float(rng.uniform(0.3, 3.0)))
        if kind == 2:
            return linear(float(rng.uniform(0.1, 10.0)))
        if kind == 3:
            return exp_minus_one()
        return log_one_plus()
    kind = rng.integers(7 if allow_inverse else 6)
    sub = lambda: random_kinf(rng, depth - 1, allow_inverse)  # noqa: E731
    if kind == 0:
        return compose(sub(), sub())
    if kind == 1:
        return pointwise_max(sub(), sub())
    if kind == 2:
        return pointwise_min(sub(), sub())
    if kind == 3:
        return gain_sum(sub(), sub())
    if kind == 4:
        return post_scale(float(rng.uniform(0.1, 10.0)), sub())
    if kind == 5:
        return pre_scale(float(rng.uniform(0.1, 10.0)), sub())
    return numeric_inverse(sub())
