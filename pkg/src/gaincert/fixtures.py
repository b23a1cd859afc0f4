"""Benchmark certificates and interconnection fixtures with simulation setups.

The scalar linear system x' = -a x + b w satisfies
d/dt x^2 <= -a x^2 + (b^2/a) w^2, hence
||x||^2 <= x(0)^2/a + (b/a)^2 ||w||^2 and, in max form,
||x||^2 <= max{2 x(0)^2/a, 2 (b/a)^2 ||w||^2}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from . import certificates as ce
from . import comparison as cf
from . import interconnect as ic
from . import transforms as tr
from .simulate import models as md
from .simulate.verify import SamplerSpec


def linear1d_nl2(a: float = 1.0, b: float = 1.0) -> ce.NonlinearL2:
    return ce.NonlinearL2(cf.post_scale(2.0 / a, cf.power(2.0)), cf.linear(2.0 * (b / a) ** 2), "max",
                          (f"x' = -{a:g}x + {b:g}w: energy estimate, sum form split as 2 max",))


def linear1d_iss(a: float = 1.0, b: float = 1.0) -> ce.ISS:
    nl2 = linear1d_nl2(a, b)
    return ce.ISS(cf.power(2.0), nl2.beta, cf.post_scale(2.0 * (b / a) ** 2, cf.power(2.0)), "max", nl2.trace)


def linear1d_iiss(a: float = 1.0, b: float = 1.0) -> ce.IISS:
    return ce.nonlinear_l2_to_iiss(linear1d_nl2(a, b))


def ex1_alpha_integrable() -> ce.AlphaIntegrable:
    """x' = -x^3: d/dt x^2 = -2x^4, so int x^4 <= x(0)^2 / 2."""
    return ce.AlphaIntegrable(cf.power(4.0), cf.post_scale(0.5, cf.power(2.0)))


def ex1_z_l2() -> ce.L2Stable:
    """Transformed cubic decay x' = -x^3: |z(t)| <= |z(0)| e^-t, so ||z||^2 <= z(0)^2 / 2."""
    return ce.L2Stable(cf.post_scale(0.5, cf.power(2.0)))


def ex2_z_linear_l2() -> ce.LinearL2:
    """Transformed forced cubic x' = -x^3 + w: z' = -z (1 + ...) + g(x) w with 0 < g <= 2/sqrt(e).

    d/dt z^2 <= -2 z^2 + 2|z| g |w| <= -z^2 + g^2 w^2, so
    ||z||^2 <= z(0)^2 + (4/e) ||w||^2 <= max{2 z(0)^2, 4 ||w||^2}.
    """
    return ce.LinearL2(cf.post_scale(2.0, cf.power(2.0)), 4.0, "max",
                       ("transformed cubic system: Young splitting with the input coefficient bound 2/sqrt(e)",))


def ex2_x_iss() -> ce.ISS:
    """ISS certificate for x' = -x^3 + w obtained from the transformed linear-gain certificate."""
    iss_z = ce.linear_l2_to_iss(ex2_z_linear_l2())
    return ce.transform_cert(iss_z, tr.generic("example2_inverse", 1), tr.generic("identity", 1))


def ex3_nl2() -> ce.NonlinearL2:
    return ce.NonlinearL2(cf.gain_sum(cf.power(2.0), cf.post_scale(0.5, cf.power(4.0))),
                          cf.post_scale(0.5, cf.square_gain(cf.exp_minus_one())), "max",
                          ("bilinear system: estimate from V(x) = log(1 + x^2)",))


def ex3_iiss() -> ce.IISS:
    return ce.nonlinear_l2_to_iiss(ex3_nl2())


@dataclass(frozen=True)
class CompositionFixture:
    name: str
    build: Callable[[], object]
    model: Callable[[], md.SystemModel]
    sampler: SamplerSpec = SamplerSpec()


def _lin(a, b):
    return lambda: md.linear1d(a, b)


def _fb(a, b, external):
    return lambda: md.feedback(md.linear1d(a, b), md.linear1d(a, b), external)


def _casc():
    return md.cascade(md.get_model("ex3_bilinear"), md.linear1d(1.0, 0.5))


FIXTURES: dict[str, CompositionFixture] = {f.name: f for f in [
    CompositionFixture("cascade_nl2", lambda: ic.cascade_nl2(ex3_nl2(), linear1d_nl2(1.0, 0.5)), _casc),
    CompositionFixture("feedback_nl2_no_input",
                       lambda: ic.feedback_nl2_no_input(linear1d_nl2(1.0, 0.3), linear1d_nl2(1.0, 0.3)),
                       _fb(1.0, 0.3, False)),
    CompositionFixture("feedback_nl2_max",
                       lambda: ic.feedback_nl2_max(linear1d_nl2(1.0, 0.3), linear1d_nl2(1.0, 0.3)),
                       _fb(1.0, 0.3, True)),
    CompositionFixture("feedback_nl2_sum",
                       lambda: ic.feedback_nl2_sum(linear1d_nl2(1.0, 0.1), linear1d_nl2(1.0, 0.1)),
                       _fb(1.0, 0.1, True)),
    CompositionFixture("feedback_iss_via_linear",
                       lambda: ic.feedback_iss_via_linear(linear1d_iss(1.0, 0.3), linear1d_iss(1.0, 0.3),
                                                          ic.SectorConstants(c1=0.18, c2=0.18)),
                       _fb(1.0, 0.3, False)),
    CompositionFixture("cascade_iiss_via_nl2",
                       lambda: ic.cascade_iiss_via_nl2(ex3_iiss(), linear1d_iiss(1.0, 0.5), ic.SectorConstants(c=1.0)),
                       _casc),
    CompositionFixture("cascade_iiss_direct",
                       lambda: ic.cascade_iiss_direct(ex3_iiss(), linear1d_iiss(1.0, 0.5), 1.0), _casc),
    CompositionFixture("feedback_iiss_no_input",
                       lambda: ic.feedback_iiss_no_input(linear1d_iiss(1.0, 0.3), linear1d_iiss(1.0, 0.3),
                                                         ic.SectorConstants(c1=1.0, c2=1.0)),
                       _fb(1.0, 0.3, False)),
    CompositionFixture("feedback_iiss_with_input",
                       lambda: ic.feedback_iiss_with_input(linear1d_iiss(1.0, 0.1), linear1d_iiss(1.0, 0.1),
                                                           ic.SectorConstants(c_s=(1.0, 1.0), c_t=(1.0, 1.0))),
                       _fb(1.0, 0.1, True)),
    CompositionFixture("feedback_iiss_direct",
                       lambda: ic.feedback_iiss_direct(linear1d_iiss(1.0, 0.1), linear1d_iiss(1.0, 0.1),
                                                       cf.linear(2.0), cf.linear(2.0), cf.linear(2.0), 4.0, 4.0),
                       _fb(1.0, 0.1, True)),
]}
