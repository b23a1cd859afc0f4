"""Batch front-end: ``gaincert --config run.yaml --out results/``.

Exit status 0 means the requested verdict holds (certificate verified,
composition or small-gain condition succeeded, counterexample found), 1 means
it does not, and 2 signals a configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from . import certificates as ce
from . import comparison as cf
from . import interconnect as ic
from .config import RunConfig, load_config
from .errors import BlowUpError, ConfigError, DomainError, PreconditionError
from .simulate import falsify as fs
from .simulate import verify as vf
from .simulate.integrator import integrate

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class _Run:
    def __init__(self, cfg: RunConfig, out: Path, quiet: bool):
        self.cfg = cfg
        self.out = out
        self.quiet = quiet

    def say(self, text: str) -> None:
        if not self.quiet:
            print(text)

    def write_json(self, name: str, doc) -> None:
        (self.out / name).write_text(json.dumps(doc, indent=2) + "\n")

    def need(self, key: str):
        if key not in self.cfg.run:
            raise ConfigError(f"command {self.cfg.command!r} needs run.{key}")
        return self.cfg.run[key]

    def emit_certificate(self, op: str, result) -> int:
        if not result:
            self.write_json("failure.json", {"op": op, "reason": result.reason})
            self.say(f"{op}: FAILED: {result.reason}")
            return EXIT_FAIL
        doc = {"op": op, "certificate": result.to_dict(), "trace": list(result.trace)}
        self.write_json("certificate.json", doc)
        (self.out / "trace.txt").write_text("".join(f"{i + 1}. {step}\n" for i, step in enumerate(result.trace)))
        self.say(f"{op}: success, {_kind(result)} certificate written to {self.out / 'certificate.json'}")
        for i, step in enumerate(result.trace):
            self.say(f"  {i + 1}. {step}")
        return EXIT_OK


def _kind(c) -> str:
    return "Transformed " + c.cert.kind if isinstance(c, ce.TransformedCertificate) else c.kind


def cmd_simulate(r: _Run) -> int:
    cfg = r.cfg
    model = cfg.model(r.need("model"))
    x0 = np.atleast_1d(np.asarray(r.need("x0"), dtype=float))
    if x0.shape != (model.n,):
        raise ConfigError(f"x0 has {x0.size} components, model {model.name} has n = {model.n}")
    u = cfg.signal(cfg.run["signal"]) if "signal" in cfg.run else None
    traj = integrate(model, x0, u, float(cfg.settings["t_end"]), float(cfg.settings["dt"]))
    traj.to_csv(r.out / "trajectory.csv")
    r.write_json("summary.json", {"model": model.name, "n": model.n, "m": model.m, "dt": traj.dt,
                                  "steps": len(traj.t) - 1, "x_final": traj.x[-1].tolist()})
    r.say(f"simulated {model.name} to t = {traj.t[-1]:g} ({len(traj.t) - 1} steps); x(t_end) = {traj.x[-1].tolist()}")
    return EXIT_OK


def cmd_verify(r: _Run) -> int:
    cfg = r.cfg
    cert = cfg.certificate(r.need("certificate"))
    model = cfg.model(r.need("model"))
    tol = float(cfg.settings["tol"])
    summary = {"certificate": _kind(cert), "model": model.name}
    ok = True
    if "x0" not in cfg.run and cfg.settings["N"] == 0:
        raise ConfigError("verify needs run.x0 (single trajectory) or settings.N > 0 (Monte Carlo)")
    if "x0" in cfg.run:
        x0 = np.atleast_1d(np.asarray(cfg.run["x0"], dtype=float))
        if x0.shape != (model.n,):
            raise ConfigError(f"x0 has {x0.size} components, model {model.name} has n = {model.n}")
        u = cfg.signal(cfg.run["signal"]) if "signal" in cfg.run else None
        traj = integrate(model, x0, u, float(cfg.settings["t_end"]), float(cfg.settings["dt"]))
        rep = vf.verify_certificate(cert, traj, tol)
        rep.to_csv(r.out / "report.csv")
        traj.to_csv(r.out / "trajectory.csv")
        summary["trajectory"] = rep.summary()
        ok &= rep.verdict
        r.say(f"trajectory: {'pass' if rep.verdict else 'FAIL'} (worst margin {rep.worst_margin:.6g} "
              f"at t = {rep.worst_time:g})")
    if cfg.settings["N"] > 0:
        mc = vf.monte_carlo_verify(cert, model, cfg.sampler(), int(cfg.settings["N"]), int(cfg.settings["seed"]), tol)
        summary["monte_carlo"] = mc.summary()
        ok &= mc.verdict
        r.say(f"monte carlo: {mc.passed}/{mc.n} passed (worst scaled margin {mc.worst_margin:.6g})")
    summary["verdict"] = "pass" if ok else "fail"
    r.write_json("summary.json", summary)
    return EXIT_OK if ok else EXIT_FAIL


def _small_gain_params(cfg: RunConfig, p: dict) -> ic.SmallGainParams:
    kw = {}
    for key in ("eps", "eps1", "eps2"):
        if key in p:
            kw[key] = float(p[key])
    for key in ("rho", "rho1", "rho2"):
        if key in p:
            kw[key] = cfg.function(p[key])
    return ic.SmallGainParams(**kw)


def _sector(p: dict) -> ic.SectorConstants:
    kw = {k: float(p[k]) for k in ("c", "c1", "c2") if k in p}
    for k in ("c_s", "c_t"):
        if k in p:
            kw[k] = tuple(float(v) for v in p[k])
    return ic.SectorConstants(**kw)


def _dims(p: dict, *names) -> dict:
    return {n: int(p[n]) for n in names if n in p}


def _compose_table(cfg: RunConfig, p: dict):
    fn = lambda key, default=None: cfg.function(p[key]) if key in p else default  # noqa: E731
    return {
        "cascade_nl2": lambda a, b: ic.cascade_nl2(a, b),
        "feedback_nl2_no_input": lambda a, b: ic.feedback_nl2_no_input(a, b),
        "feedback_nl2_max": lambda a, b: ic.feedback_nl2_max(a, b, _small_gain_params(cfg, p)),
        "feedback_nl2_sum": lambda a, b: ic.feedback_nl2_sum(a, b, _small_gain_params(cfg, p)),
        "feedback_iss_via_linear": lambda a, b: ic.feedback_iss_via_linear(
            a, b, _sector(p), rho=fn("rho"), **_dims(p, "n1", "n2")),
        "cascade_iiss_via_nl2": lambda a, b: ic.cascade_iiss_via_nl2(a, b, _sector(p), **_dims(p, "n1", "n2", "m2")),
        "cascade_iiss_direct": lambda a, b: ic.cascade_iiss_direct(a, b, float(p["c"])),
        "feedback_iiss_no_input": lambda a, b: ic.feedback_iiss_no_input(
            a, b, _sector(p), rho=fn("rho"), **_dims(p, "n1", "n2")),
        "feedback_iiss_with_input": lambda a, b: ic.feedback_iiss_with_input(
            a, b, _sector(p), _small_gain_params(cfg, p), **_dims(p, "n1", "n2")),
        "feedback_iiss_direct": lambda a, b: ic.feedback_iiss_direct(
            a, b, fn("rho1"), fn("rho2"), fn("rho"), float(p["k1"]), float(p["k2"])),
    }


def cmd_compose(r: _Run) -> int:
    cfg = r.cfg
    op = r.need("op")
    names = r.need("certificates")
    if not isinstance(names, list) or len(names) != 2:
        raise ConfigError("run.certificates must list exactly two certificates")
    c1, c2 = (cfg.certificate(n) for n in names)
    params = cfg.run.get("params", {})
    table = _compose_table(cfg, params)
    if op not in table:
        raise ConfigError(f"unknown composition {op!r}; known: {sorted(table)}")
    try:
        result = table[op](c1, c2)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"{op}: missing or malformed parameter ({exc})") from exc
    return r.emit_certificate(op, result)


def cmd_equiv(r: _Run) -> int:
    cfg = r.cfg
    op = r.need("op")
    c = cfg.certificate(r.need("certificate"))
    p = cfg.run.get("params", {})
    table = {
        "l2_to_alpha_integrable": lambda: ce.l2_to_alpha_integrable(c),
        "alpha_integrable_to_l2": lambda: ce.alpha_integrable_to_l2(c, **_dims(p, "n")),
        "linear_l2_to_iss": lambda: ce.linear_l2_to_iss(c),
        "iss_to_linear_l2": lambda: ce.iss_to_linear_l2(c, float(p.get("gamma_bar", 1.0)), **_dims(p, "n", "m")),
        "nonlinear_l2_to_iiss": lambda: ce.nonlinear_l2_to_iiss(c),
        "iiss_to_nonlinear_l2": lambda: ce.iiss_to_nonlinear_l2(c, float(p.get("lam", 1.0)), **_dims(p, "n", "m")),
        "max_to_sum": lambda: ce.max_to_sum(c),
        "sum_to_max": lambda: ce.sum_to_max(c),
        "transform_cert": lambda: ce.transform_cert(c, cfg.transform(p["T"]),
                                                    cfg.transform(p["S"]) if "S" in p else None),
    }
    if op not in table:
        raise ConfigError(f"unknown equivalence {op!r}; known: {sorted(table)}")
    try:
        result = table[op]()
    except (KeyError, TypeError, AttributeError) as exc:
        raise ConfigError(f"{op}: wrong certificate kind or missing parameter ({exc})") from exc
    return r.emit_certificate(op, result)


def cmd_smallgain(r: _Run) -> int:
    cfg = r.cfg
    if "g" in cfg.run:
        loops = {"g": cfg.function(cfg.run["g"])}
    else:
        g1, g2 = cfg.function(r.need("gamma1")), cfg.function(r.need("gamma2"))
        loops = {"gamma1 o gamma2": cf.compose(g1, g2), "gamma2 o gamma1": cf.compose(g2, g1)}
    reports = {}
    ok = True
    for name, g in loops.items():
        rep = cf.certify_kinf(cf.residual(g))
        reports[name] = rep.summary()
        ok &= rep.verdict
        r.say(f"Id - {name}: {'K-infinity' if rep.verdict else 'residual not K-infinity'} ({rep.summary()})")
    r.write_json("smallgain.json", {"verdict": "pass" if ok else "fail", "residuals": reports})
    return EXIT_OK if ok else EXIT_FAIL


def cmd_falsify(r: _Run) -> int:
    cfg = r.cfg
    beta_hat = cfg.function(r.need("beta_hat"))
    gbar = float(r.need("gamma_bar"))
    cex = fs.falsify_linear_l2_bilinear(beta_hat, gbar, float(cfg.run.get("t_step", 0.01)),
                                        float(cfg.settings["dt"]))
    r.write_json("counterexample.json", cex.to_dict())
    cex.trajectory.to_csv(r.out / "trajectory.csv")
    r.say(f"x0 = {cex.x0:.6g}, t* = {cex.t_star:g}: ||x||^2 = {cex.lhs:.6g} vs bound {cex.rhs_sum:.6g} "
          f"({'violated' if cex.violated else 'held'})")
    return EXIT_OK if cex.violated else EXIT_FAIL


def cmd_selftest(r: _Run) -> int:
    wanted = r.cfg.run.get("criteria")
    checks = [c for i, c in enumerate(acceptance.CHECKS, 1) if wanted is None or i in wanted]
    lines, ok = [], True
    for check in checks:
        res = check()
        ok &= res.passed
        lines.append(res.line())
        r.say(res.line())
    (r.out / "acceptance.txt").write_text("\n".join(lines) + "\n")
    return EXIT_OK if ok else EXIT_FAIL


COMMANDS = {
    "simulate": cmd_simulate, "verify": cmd_verify, "compose": cmd_compose, "equiv": cmd_equiv,
    "smallgain": cmd_smallgain, "falsify": cmd_falsify, "selftest": cmd_selftest,
}


def run(cfg: RunConfig, out: Path, quiet: bool = False) -> int:
    out.mkdir(parents=True, exist_ok=True)
    r = _Run(cfg, out, quiet)
    try:
        return COMMANDS[cfg.command](r)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BlowUpError, PreconditionError) as exc:
        print(f"failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="gaincert", description=__doc__.splitlines()[0])
    parser.add_argument("--config", required=True, help="YAML or JSON run configuration")
    parser.add_argument("--out", default="out", help="directory for artifacts (default: out)")
    parser.add_argument("--seed", type=int, help="override settings.seed")
    parser.add_argument("--quiet", action="store_true", help="suppress progress output")
    args = parser.parse_args(argv)
    try:
        cfg = load_config(args.config)
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        cfg.settings["seed"] = args.seed
    return run(cfg, Path(args.out), args.quiet)


if __name__ == "__main__":
    sys.exit(main())
