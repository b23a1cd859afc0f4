"""Run configuration documents (YAML or JSON) and name resolution.

A document has the keys ``command``, ``functions``, ``transforms``,
``certificates``, ``models``, ``signals``, ``settings`` and ``run``.  Named
entries may reference each other within a section (functions, models) in
any order, and entries of the sections above them; certificates may also be
loaded from a file with ``{"include": "path.json"}`` relative to the config file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from . import certificates as ce
from . import comparison as cf
from . import transforms as tr
from .errors import ConfigError, GainCertError
from .simulate import models as md
from .simulate import signals as sg
from .simulate.verify import SamplerSpec

COMMANDS = ("simulate", "verify", "compose", "smallgain", "equiv", "falsify", "selftest")

DEFAULT_SETTINGS = {
    "dt": 1e-3,
    "t_end": 10.0,
    "tol": 1e-6,
    "seed": 0,
    "N": 0,
    "x0_range": [-2.0, 2.0],
    "amplitude": [-1.0, 1.0],
    "switches": 5,
}

_RANGES = {
    "dt": (0.0, None),
    "t_end": (0.0, None),
    "tol": (0.0, 1.0),
    "N": (-1, None),
    "switches": (-1, None),
}


@dataclass
class RunConfig:
    command: str
    functions: dict[str, cf.ScalarGainFn] = field(default_factory=dict)
    transforms: dict[str, tr.CoordinateTransform] = field(default_factory=dict)
    certificates: dict[str, Any] = field(default_factory=dict)
    models: dict[str, md.SystemModel] = field(default_factory=dict)
    signals: dict[str, sg.InputSignal] = field(default_factory=dict)
    settings: dict[str, Any] = field(default_factory=lambda: dict(DEFAULT_SETTINGS))
    run: dict[str, Any] = field(default_factory=dict)
    base: Path = Path(".")

    def function(self, ref) -> cf.ScalarGainFn:
        return _wrap("function", ref, lambda: cf.from_dict(ref, self.functions))

    def transform(self, ref) -> tr.CoordinateTransform:
        if isinstance(ref, str):
            if ref in self.transforms:
                return self.transforms[ref]
            return _wrap("transform", ref, lambda: tr.generic(ref))
        return _wrap("transform", ref, lambda: tr.from_dict(ref, self.functions))

    def certificate(self, ref):
        if isinstance(ref, str):
            if ref not in self.certificates:
                raise ConfigError(f"unknown certificate {ref!r}; defined: {sorted(self.certificates)}")
            return self.certificates[ref]
        return _parse_cert(ref, self)

    def model(self, ref) -> md.SystemModel:
        return _wrap("model", ref, lambda: md.model_from_dict(ref, self.models))

    def signal(self, ref) -> sg.InputSignal:
        if isinstance(ref, str):
            if ref not in self.signals:
                raise ConfigError(f"unknown signal {ref!r}; defined: {sorted(self.signals)}")
            return self.signals[ref]
        return _wrap("signal", ref, lambda: sg.signal_from_dict(ref))

    def sampler(self) -> SamplerSpec:
        s = self.settings
        return SamplerSpec(float(s["t_end"]), float(s["dt"]), tuple(map(float, s["x0_range"])),
                           tuple(map(float, s["amplitude"])), int(s["switches"]))


def _wrap(what: str, ref, build):
    try:
        return build()
    except (GainCertError, KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"cannot resolve {what} {ref!r}: {exc}") from exc


def _parse_cert(doc, cfg: RunConfig):
    if isinstance(doc, dict) and "include" in doc:
        path = cfg.base / doc["include"]
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read certificate file {path}: {exc}") from exc
        doc = doc.get("certificate", doc)
    return _wrap("certificate", doc, lambda: ce.cert_from_dict(doc, cfg.functions, cfg.transforms))


def _resolve(section: dict, store: dict, build) -> None:
    """Resolve named entries that may refer to each other in any order."""
    pending = dict(section)
    while pending:
        errors = {}
        before = len(pending)
        for name, entry in list(pending.items()):
            try:
                store[name] = build(entry)
            except ConfigError as exc:
                errors[name] = exc
                continue
            del pending[name]
        if len(pending) == before:
            raise next(iter(errors.values()))


def _section(doc: dict, name: str) -> dict:
    sec = doc.get(name) or {}
    if not isinstance(sec, dict):
        raise ConfigError(f"section {name!r} must be a mapping")
    return sec


def parse_config(doc: dict, base: Path = Path(".")) -> RunConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    command = doc.get("command")
    if command not in COMMANDS:
        raise ConfigError(f"command must be one of {COMMANDS}, got {command!r}")
    cfg = RunConfig(command, base=base)
    unknown = set(doc) - {"command", "functions", "transforms", "certificates", "models", "signals",
                          "settings", "run", "version"}
    if unknown:
        raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
    _resolve(_section(doc, "functions"), cfg.functions, cfg.function)
    for name, tdoc in _section(doc, "transforms").items():
        cfg.transforms[name] = cfg.transform(tdoc)
    for name, cdoc in _section(doc, "certificates").items():
        cfg.certificates[name] = _parse_cert(cdoc, cfg)
    _resolve(_section(doc, "models"), cfg.models, cfg.model)
    for name, sdoc in _section(doc, "signals").items():
        cfg.signals[name] = cfg.signal(sdoc)
    settings = _section(doc, "settings")
    extra = set(settings) - set(DEFAULT_SETTINGS)
    if extra:
        raise ConfigError(f"unknown settings {sorted(extra)}")
    cfg.settings.update(settings)
    for key, (lo, hi) in _RANGES.items():
        v = cfg.settings[key]
        if not isinstance(v, (int, float)) or v <= lo or (hi is not None and v > hi):
            raise ConfigError(f"setting {key} = {v!r} is outside the allowed range")
    for key in ("x0_range", "amplitude"):
        v = cfg.settings[key]
        if not (isinstance(v, (list, tuple)) and len(v) == 2 and v[0] <= v[1]):
            raise ConfigError(f"setting {key} must be a pair [low, high]")
    if cfg.settings["dt"] > cfg.settings["t_end"]:
        raise ConfigError("dt must not exceed t_end")
    cfg.run = _section(doc, "run")
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(doc, path.parent)
