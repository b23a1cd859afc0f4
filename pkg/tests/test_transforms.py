import math

import numpy as np
import pytest

from gaincert import comparison as cf
from gaincert import transforms as tr
from gaincert.errors import CertificationError, DomainError


def test_build_upper_scalar():
    T = tr.build_upper(cf.power(2), 1)
    assert tr.apply(T, 2.0) == pytest.approx(4.0)
    assert cf.evaluate(cf.power(2), 2.0) <= abs(tr.apply(T, 2.0)) + 1e-12


def test_build_upper_four_dims():
    T = tr.build_upper(cf.identity(), 4)
    z = np.ones(4)
    out = tr.apply(T, z)
    assert np.allclose(out, 2.0)
    assert np.linalg.norm(out) == pytest.approx(4.0)
    assert np.linalg.norm(out) >= np.linalg.norm(z)


def test_build_lower_scalar():
    T = tr.build_lower(cf.power(2), 1)
    assert tr.apply(T, 2.0) == pytest.approx(4.0)


def test_build_lower_four_dims():
    T = tr.build_lower(cf.identity(), 4)
    out = tr.apply(T, np.ones(4))
    assert np.allclose(out, 0.5)
    assert np.linalg.norm(out) == pytest.approx(1.0)
    assert np.linalg.norm(out) <= 2.0


@pytest.mark.parametrize("build", [tr.build_upper, tr.build_lower])
@pytest.mark.parametrize("p", [1, 3])
def test_origin_fixed(build, p):
    T = build(cf.exp_minus_one(), p)
    assert np.all(tr.apply(T, np.zeros(p)) == 0)


def test_dimension_errors():
    with pytest.raises(DomainError):
        tr.build_upper(cf.identity(), 0)
    with pytest.raises(DomainError):
        tr.apply(tr.build_upper(cf.identity(), 3), np.ones(2))


def test_sign_preserving():
    T = tr.build_lower(cf.power(3), 3)
    z = np.array([-2.0, 0.5, -0.1])
    assert np.array_equal(np.sign(tr.apply(T, z)), np.sign(z))


def test_ex2_transform_value():
    T = tr.generic("example2")
    assert tr.apply(T, 1.0) == pytest.approx(math.exp(-0.5))
    assert tr.apply(T, 0.0) == 0.0


def test_ex2_round_trip():
    T = tr.generic("example2")
    assert tr.apply_inverse(T, tr.apply(T, 0.7)) == pytest.approx(0.7, rel=1e-12)
    x = np.concatenate([-np.geomspace(0.05, 1e4, 40), np.geomspace(0.05, 1e4, 40)])
    assert np.allclose(tr.apply_inverse(T, tr.apply(T, x)), x, rtol=1e-10)


def test_ex2_inverse_matches_bisection():
    # the closed-form inverse against bisection on the forward map
    z = np.array([1e-6, 0.01, 0.3, 0.9, 5.0, 300.0])
    if "example2_forward_only" not in cf.named_functions():
        cf.register_named("example2_forward_only", tr.ex2_forward)
    bisect = cf.evaluate(cf.numeric_inverse(cf.named("example2_forward_only")), z)
    assert np.allclose(tr.ex2_backward(z), bisect, rtol=1e-9)


def test_diagonal_round_trip():
    T = tr.build_upper(cf.gain_sum(cf.power(2), cf.identity()), 3)
    z = np.array([[0.3, -2.0, 5.0], [1e-3, 0.0, -40.0]])
    assert np.allclose(tr.apply_inverse(T, tr.apply(T, z)), z, rtol=1e-9, atol=1e-14)


def test_bounds_lower_kind():
    b = tr.numeric_bounds(tr.build_lower(cf.identity(), 4))
    assert b.provenance == "analytic"
    assert b.lower(2.0) == pytest.approx(0.5)
    assert b.upper(2.0) == pytest.approx(2.0)


def test_bounds_lower_kind_cross_check_sampling():
    T = tr.build_lower(cf.identity(), 4)
    sampled = tr.numeric_bounds(T, force_sampling=True)
    assert sampled.provenance == "sampled"
    r = np.geomspace(0.01, 100, 30)
    analytic = tr.numeric_bounds(T)
    # |T(z)| = |z|/2 exactly, so both bound families must bracket r/2
    lo, hi = cf.evaluate(sampled.lower, r), cf.evaluate(sampled.upper, r)
    assert np.all(lo <= r / 2 * (1 + 1e-12)) and np.all(hi >= r / 2 * (1 - 1e-12))
    assert np.all(cf.evaluate(analytic.lower, r) <= lo * (1 + 1e-12))
    assert np.all(hi <= cf.evaluate(analytic.upper, r) * (1 + 1e-12))


def test_bounds_identity_generic():
    b = tr.numeric_bounds(tr.generic("identity"))
    s = np.geomspace(1e-3, 1e3, 20)
    assert np.allclose(cf.evaluate(b.lower, s), s)
    assert np.allclose(cf.evaluate(b.upper, s), s)


def test_bounds_ex2_at_one():
    b = tr.numeric_bounds(tr.generic("example2"))
    # 1-d minimization of |T(x)| over |x| >= 1 on a dense grid
    x = np.concatenate([np.geomspace(1.0, 1e4, 20001), -np.geomspace(1.0, 1e4, 20001)])
    assert b.lower(1.0) == pytest.approx(math.exp(-0.5))
    assert b.lower(1.0) == pytest.approx(np.abs(tr.ex2_forward(x)).min(), rel=1e-12)


def test_sampled_bounds_are_conservative():
    T = tr.generic("example2")
    # T underflows to 0 below |x| ~ 0.027, so sample from 0.05 and check inside that range
    b = tr.numeric_bounds(T, tr.RadialGrid(0.05, 1e3, 128), force_sampling=True)
    x = np.geomspace(0.05, 1e3, 500)
    mag = np.abs(tr.ex2_forward(x))
    assert np.all(cf.evaluate(b.lower, x) <= mag * (1 + 1e-12))
    assert np.all(cf.evaluate(b.upper, x) >= mag * (1 - 1e-12))


def test_serialization():
    T = tr.build_lower(cf.power(2), 3)
    U = tr.from_dict(T.to_dict())
    z = np.array([0.5, -1.0, 2.0])
    assert np.allclose(tr.apply(T, z), tr.apply(U, z))
    assert tr.from_dict({"kind": "generic", "name": "example2"}).name == "example2"


def test_unit_directions():
    d = tr.unit_directions(3, 50)
    assert np.allclose(np.linalg.norm(d, axis=1), 1.0)
    assert np.array_equal(tr.unit_directions(3, 50), d)


def test_safe_norm():
    v = np.array([[3e200, 4e200], [0.0, 0.0]])
    assert np.allclose(tr.safe_norm(v), [5e200, 0.0])


def test_sampled_bounds_reject_degenerate_envelope():
    with pytest.raises(CertificationError):
        tr.numeric_bounds(tr.generic("example2"), tr.RadialGrid(1e-4, 1.0, 32), force_sampling=True)
