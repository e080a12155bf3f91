"""INI run configurations.

A run config is a plain ``configparser`` file.  Loading fills every default
into the parsed object, so the materialized config written next to a report
replays the run exactly.

Sections::

    [run]       command, seed, refine, gate
    [function]  kind = characteristic | steps | interval | line | grid | power-law | csv
    [p], [q]    exponent specs (see VariableExponent.from_config)
    [norm]      name, lambda
    [apply]     operator, points, beta, kernel, eps, eps_points, delta, t, exclusion, ...
    [omega]     kind, params, lip_gamma, lip_constant, table
    [verify]    experiment, lambda, beta, operator, norm, kernel, delta, eps_points
    [family]    generator, count, seed, scale_min, scale_max, grid_m
"""

from __future__ import annotations

import configparser
import io
from pathlib import Path
from typing import Dict, Union

import numpy as np

from .errors import ConfigError, DomainError, PreconditionError
from .experiments import FunctionFamily
from .exponent import ExponentPair, VariableExponent, WeightExponent
from .operators import ApproxKernel, OmegaKernel
from .signal import GridFunction2D, LineStep, PowerLaw, StepFunction

COMMANDS = ("norm", "apply", "rearrange", "verify")

DEFAULTS: Dict[str, Dict[str, str]] = {
    "run": {"seed": "0", "refine": "0", "gate": "false"},
    "p": {"kind": "constant", "value": "2.0"},
    "q": {"kind": "constant", "value": "2.0"},
    "norm": {"name": "morrey-lorentz", "lambda": "0.0"},
    "apply": {"beta": "0.0", "kernel": "poisson", "eps": "1.0", "eps_points": "16",
              "delta": "1.0", "t": "1.0", "exclusion": "0.0", "dimension": "1", "r": "1.0"},
    "omega": {"kind": "cos", "lip_gamma": "1.0", "lip_constant": "1.0"},
    "verify": {"experiment": "T3.1", "lambda": "0.0", "norm": "morrey-lorentz",
               "kernel": "poisson", "delta": "1.0", "eps_points": "16"},
    "family": {"generator": "random-steps", "count": "50", "seed": "0",
               "scale_min": "0.1", "scale_max": "10.0", "grid_m": "4"},
}


def floats(text: str) -> list:
    try:
        return [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a list of numbers, got {text!r}") from None


def load(path: Union[str, Path], command: str = None) -> configparser.ConfigParser:
    """Read an INI file and fill in defaults."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse(path.read_text(), command, source=str(path))


def parse(text: str, command: str = None, source: str = "<config>") -> configparser.ConfigParser:
    """Parse INI text and fill in defaults."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None
    if command is not None:
        if not cp.has_section("run"):
            cp.add_section("run")
        cp["run"].setdefault("command", command)
    cmd = cp.get("run", "command", fallback=None)
    if cmd is not None and cmd not in COMMANDS:
        raise ConfigError(f"unknown command {cmd!r}")
    for section, values in DEFAULTS.items():
        if section in ("p", "q") and cp.has_section(section):
            continue
        if section == "omega" and not (cp.has_section("omega") or _needs_omega(cp)):
            continue
        if not cp.has_section(section):
            cp.add_section(section)
        for k, v in values.items():
            cp[section].setdefault(k, v)
    return cp


def _needs_omega(cp) -> bool:
    op = cp.get("apply", "operator", fallback="")
    exp = cp.get("verify", "experiment", fallback="")
    return op.startswith("marcinkiewicz") or op == "dominated-2d" or exp in ("C4.3",)


def dumps(cp: configparser.ConfigParser) -> str:
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def as_dict(cp: configparser.ConfigParser) -> dict:
    return {s: dict(cp[s]) for s in cp.sections()}


# -- typed getters ----------------------------------------------------------------


def get_float(cp, section: str, key: str) -> float:
    try:
        return cp.getfloat(section, key)
    except (configparser.Error, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None


def get_int(cp, section: str, key: str) -> int:
    try:
        return cp.getint(section, key)
    except (configparser.Error, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None


def get_bool(cp, section: str, key: str) -> bool:
    try:
        return cp.getboolean(section, key)
    except (configparser.Error, ValueError) as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None


def exponent(cp, name: str) -> VariableExponent:
    if not cp.has_section(name):
        raise ConfigError(f"missing exponent section [{name}]")
    try:
        return VariableExponent.from_config(cp[name])
    except DomainError as exc:
        raise ConfigError(f"[{name}] {exc}") from None


def pair(cp, section: str) -> ExponentPair:
    lam = get_float(cp, section, "lambda")
    try:
        return ExponentPair(exponent(cp, "p"), exponent(cp, "q"), lam)
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def weight(cp, section: str, key: str = "beta"):
    """A constant weight exponent, or ``lorentz`` for 1/p - 1/q."""
    text = cp.get(section, key, fallback="0.0").strip()
    if text == "lorentz":
        return WeightExponent.lorentz(exponent(cp, "p"), exponent(cp, "q"))
    try:
        return WeightExponent.constant(float(text))
    except ValueError:
        raise ConfigError(f"[{section}] {key} must be a number or 'lorentz'") from None


def omega(cp) -> OmegaKernel:
    s = cp["omega"] if cp.has_section("omega") else DEFAULTS["omega"]
    try:
        return OmegaKernel(
            s.get("kind", "cos").strip(),
            tuple(floats(s.get("params", ""))),
            float(s.get("lip_gamma", "1.0")),
            float(s.get("lip_constant", "1.0")),
            table=tuple(floats(s.get("table", ""))),
        )
    except (DomainError, ValueError) as exc:
        raise ConfigError(f"[omega] {exc}") from None


def kernel(cp, section: str) -> ApproxKernel:
    try:
        return ApproxKernel(cp.get(section, "kernel").strip())
    except DomainError as exc:
        raise ConfigError(str(exc)) from None


def family(cp) -> FunctionFamily:
    s = cp["family"]
    try:
        return FunctionFamily(
            s["generator"].strip(),
            get_int(cp, "family", "count"),
            get_int(cp, "family", "seed"),
            (get_float(cp, "family", "scale_min"), get_float(cp, "family", "scale_max")),
            get_int(cp, "family", "grid_m"),
        )
    except (DomainError, PreconditionError) as exc:
        raise ConfigError(f"[family] {exc}") from None


def function(cp, base: Path = None):
    """The [function] section as a StepFunction, LineStep or GridFunction2D."""
    if not cp.has_section("function"):
        raise ConfigError("missing [function] section")
    s = cp["function"]
    kind = s.get("kind", "").strip()
    try:
        if kind == "characteristic":
            return StepFunction.characteristic(float(s.get("length", "1.0")),
                                               float(s.get("value", "1.0")),
                                               float(s.get("start", "0.0")))
        if kind == "steps":
            return StepFunction(floats(s["breakpoints"]), floats(s["values"]))
        if kind == "interval":
            return LineStep.characteristic(float(s["a"]), float(s["b"]), float(s.get("value", "1.0")))
        if kind == "line":
            return LineStep(floats(s["edges"]), floats(s["values"]))
        if kind == "grid":
            side = float(s["side"])
            m = int(s["m"])
            vals = np.asarray(floats(s["values"]), dtype=float)
            if vals.size != m * m:
                raise ConfigError(f"[function] grid needs m*m = {m * m} values, got {vals.size}")
            return GridFunction2D(tuple(floats(s.get("origin", "0, 0"))), side, vals.reshape(m, m))
        if kind == "power-law":
            law = PowerLaw(float(s.get("coef", "1.0")), float(s["exponent"]),
                           float(s.get("support", "1.0")))
            return law.to_step(int(s.get("pieces", "64")), float(s.get("decades", "8.0")))
        if kind == "csv":
            path = Path(s["file"])
            if base is not None and not path.is_absolute():
                path = base / path
            if not path.is_file():
                raise ConfigError(f"function file not found: {path}")
            text = path.read_text()
            if s.get("format", "steps").strip() == "grid":
                return GridFunction2D.from_csv(text)
            return StepFunction.from_csv(text)
    except KeyError as exc:
        raise ConfigError(f"[function] missing key {exc}") from None
    except (ValueError, IndexError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[function] {exc}") from None
    raise ConfigError(f"[function] unknown kind {kind!r}")
