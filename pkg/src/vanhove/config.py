"""Scenario configuration: a sectioned INI file with a fixed schema.

Sections and keys (units: energies and times in the same reciprocal units)::

    [scenario]   name, description, seed (int, 0)
    [grid]       omega_min (0.0), omega_max (10.0), n (128),
                 rule (gauss-legendre | trapezoid), panel_order (8),
                 atom = location, weight          (optional bound-state atom)
    [axis.K]     locations = o_1, o_2, ...; weights = ... (default all 1)
                 one section per extra atomic axis, K = 1, 2, ...
    [state]      diag (gaussian), normalize (true), reg (zero | rank1)
    [observable] diag (energy), reg (zero)
    [time]       t_max (resolvable band), samples (121),
                 band_override (false), band_constant (pi/4)
    [analysis]   threshold (0.5), fit_models (gaussian, exponential),
                 refine (false), decay_target (none), expect_constant (false),
                 probe_trials (100), tol (1e-10), eig_tol (1e-8),
                 null_tol (none: relative 1e-14 of max rho_hat),
                 residual_tol (1e-12), oracle_rtol (1e-10),
                 constant_tol (1e-12), refine_atol (1e-12)
    [output]     directory (none), plot (false)

In ``[state]`` and ``[observable]`` the diagonal symbol takes
``diag_<param>`` keys of its family, ``diag_atom_value`` and
``diag_factors_<K>`` (one complex factor per atom of axis K). A ``rank1``
kernel is configured by ``reg_profile`` (family), ``reg_scale`` and the same
``reg_<param>`` / ``reg_atom_value`` / ``reg_factors_<K>`` keys.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from ._validation import ConfigError, VanHoveError
from .grid import AxisSpec
from .symbols import KERNELS, PROFILES, KernelSpec, ProfileSpec

__all__ = ["ScenarioConfig", "parse_config", "parse_text", "DEFAULTS"]

_NONE = object()


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _list(conv):
    def parse(text: str):
        return [conv(item.strip()) for item in text.split(",") if item.strip()]
    parse.__name__ = f"list of {conv.__name__}"
    return parse


def _complex(text: str) -> complex:
    return complex(text.replace(" ", ""))


def _optional_float(text: str):
    return None if text.strip().lower() in ("", "none") else float(text)


_optional_float.__name__ = "float or none"

# section -> key -> (converter, default)
SCHEMA = {
    "scenario": {"name": (str, None), "description": (str, ""), "seed": (int, 0)},
    "grid": {
        "omega_min": (float, 0.0),
        "omega_max": (float, 10.0),
        "n": (int, 128),
        "rule": (str, "gauss-legendre"),
        "panel_order": (int, 8),
        "atom": (_list(float), None),
    },
    "time": {
        "t_max": (_optional_float, None),
        "samples": (int, 121),
        "band_override": (_bool, False),
        "band_constant": (float, math.pi / 4),
    },
    "analysis": {
        "threshold": (float, 0.5),
        "fit_models": (_list(str), ["gaussian", "exponential"]),
        "refine": (_bool, False),
        "decay_target": (_optional_float, None),
        "expect_constant": (_bool, False),
        "probe_trials": (int, 100),
        "tol": (float, 1e-10),
        "eig_tol": (float, 1e-8),
        "null_tol": (_optional_float, None),
        "residual_tol": (float, 1e-12),
        "oracle_rtol": (float, 1e-10),
        "constant_tol": (float, 1e-12),
        "refine_atol": (float, 1e-12),
    },
    "output": {"directory": (str, None), "plot": (_bool, False)},
}
AXIS_SCHEMA = {"locations": (_list(float), _NONE), "weights": (_list(float), None)}
SYMBOL_DEFAULTS = {"state": ("gaussian", "zero"), "observable": ("energy", "zero")}
DEFAULTS = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}


@dataclass(frozen=True)
class SymbolBlock:
    diag: ProfileSpec
    reg: KernelSpec
    normalize: bool = False


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    description: str
    seed: int
    axes: tuple[AxisSpec, ...]
    state: SymbolBlock
    observable: SymbolBlock
    time: dict
    analysis: dict
    output: dict
    band: float = field(default=0.0)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.time["t_max"], self.time["samples"])

    def with_energy_nodes(self, n: int) -> "ScenarioConfig":
        return replace(self, axes=(replace(self.axes[0], n=n), *self.axes[1:]))

    def to_dict(self) -> dict:
        def plain(x):
            if isinstance(x, complex):
                return [x.real, x.imag]
            if isinstance(x, dict):
                return {str(k): plain(v) for k, v in x.items()}
            if isinstance(x, (list, tuple)):
                return [plain(v) for v in x]
            return x
        return plain({
            "name": self.name,
            "description": self.description,
            "seed": self.seed,
            "axes": [asdict(ax) for ax in self.axes],
            "state": asdict(self.state),
            "observable": asdict(self.observable),
            "time": self.time,
            "analysis": self.analysis,
            "output": self.output,
            "band": self.band,
        })


def _convert(section: str, key: str, conv, text: str):
    try:
        return conv(text)
    except (TypeError, ValueError) as exc:
        raise ConfigError(
            f"[{section}] {key}: expected {getattr(conv, '__name__', conv)}, got {text!r}"
        ) from exc


def _read_section(parser, section: str, schema: dict) -> dict:
    items = dict(parser.items(section)) if parser.has_section(section) else {}
    unknown = sorted(set(items) - set(schema))
    if unknown:
        raise ConfigError(
            f"[{section}] unknown key(s) {unknown}; valid keys: {sorted(schema)}"
        )
    out = {}
    for key, (conv, default) in schema.items():
        if key in items:
            out[key] = _convert(section, key, conv, items[key])
        elif default is _NONE:
            raise ConfigError(f"[{section}] missing required key {key!r}")
        else:
            out[key] = default
    return out


_FACTOR = re.compile(r"^(diag|reg)_factors_(\d+)$")


def _profile(section, items, prefix, family, used) -> ProfileSpec:
    params, factors, atom_value = {}, {}, None
    allowed = PROFILES[family][1] if family in PROFILES else {}
    for key, text in items.items():
        m = _FACTOR.match(key)
        if m and m.group(1) == prefix:
            factors[int(m.group(2))] = _convert(section, key, _list(_complex), text)
            used.add(key)
        elif key == f"{prefix}_atom_value":
            atom_value = _convert(section, key, _complex, text)
            used.add(key)
        elif key.startswith(prefix + "_") and key[len(prefix) + 1:] in allowed:
            params[key[len(prefix) + 1:]] = _convert(section, key, float, text)
            used.add(key)
    return ProfileSpec(family, params, factors, atom_value)


def _symbol_block(parser, section: str) -> SymbolBlock:
    items = dict(parser.items(section)) if parser.has_section(section) else {}
    diag_default, reg_default = SYMBOL_DEFAULTS[section]
    diag_family = items.get("diag", diag_default)
    reg_kind = items.get("reg", reg_default)
    used = {"diag", "reg"}
    if section == "state":
        used.add("normalize")
    normalize = _convert(section, "normalize", _bool, items.get("normalize", "true")) \
        if section == "state" else False
    try:
        diag = _profile(section, items, "diag", diag_family, used)
        if reg_kind not in KERNELS:
            raise VanHoveError(f"unknown kernel family {reg_kind!r}; known: {list(KERNELS)}")
        profile = ProfileSpec()
        scale = 1.0
        if reg_kind == "rank1":
            used.update({"reg_profile", "reg_scale"})
            fam = items.get("reg_profile", "gaussian")
            scale = _convert(section, "reg_scale", _complex, items.get("reg_scale", "1"))
            profile = _profile(section, items, "reg", fam, used)
        kernel = KernelSpec(reg_kind, profile, scale)
    except VanHoveError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"[{section}] {exc}") from exc
    unknown = sorted(set(items) - used)
    if unknown:
        valid = sorted(used | {f"diag_{p}" for p in PROFILES.get(diag_family, ({}, {}))[1]})
        raise ConfigError(f"[{section}] unknown key(s) {unknown}; valid keys here: {valid}")
    return SymbolBlock(diag, kernel, normalize)


def parse_text(text: str, name: str = "scenario") -> ScenarioConfig:
    parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    axis_sections = sorted(
        (s for s in parser.sections() if s.startswith("axis.")),
        key=lambda s: int(s.split(".", 1)[1]) if s.split(".", 1)[1].isdigit() else -1,
    )
    known = set(SCHEMA) | {"state", "observable"} | set(axis_sections)
    unknown = sorted(set(parser.sections()) - known)
    if unknown:
        raise ConfigError(
            f"unknown section(s) {unknown}; valid sections: "
            f"{sorted(set(SCHEMA) | {'state', 'observable'})} and [axis.K]"
        )
    values = {sec: _read_section(parser, sec, schema) for sec, schema in SCHEMA.items()}
    g = values["grid"]

    try:
        atom = g["atom"]
        if atom is not None and len(atom) != 2:
            raise ConfigError("[grid] atom: expected 'location, weight'")
        axes = [AxisSpec.continuous(g["omega_min"], g["omega_max"], g["n"], g["rule"],
                                    g["panel_order"], atom)]
        for k, sec in enumerate(axis_sections, start=1):
            if sec != f"axis.{k}":
                raise ConfigError(f"axis sections must be numbered 1, 2, ...; found [{sec}]")
            ax = _read_section(parser, sec, AXIS_SCHEMA)
            axes.append(AxisSpec.atomic(ax["locations"], ax["weights"]))
    except ConfigError:
        raise
    except VanHoveError as exc:
        raise ConfigError(f"[grid] {exc}") from exc

    state = _symbol_block(parser, "state")
    observable = _symbol_block(parser, "observable")

    t = values["time"]
    band = t["band_constant"] / axes[0].spacing
    if t["t_max"] is None:
        t["t_max"] = band
    if t["t_max"] <= 0:
        raise ConfigError("[time] t_max must be positive")
    if t["samples"] < 2:
        raise ConfigError("[time] samples must be at least 2")
    if t["t_max"] > band * (1 + 1e-12) and not t["band_override"]:
        raise ConfigError(
            f"[time] t_max={t['t_max']:g} exceeds the resolvable band {band:g}; "
            "set band_override = true to sample beyond it"
        )
    a = values["analysis"]
    if not 0 < a["threshold"] < 1:
        raise ConfigError("[analysis] threshold must lie in (0, 1)")
    for model in a["fit_models"]:
        if model not in ("gaussian", "exponential"):
            raise ConfigError(f"[analysis] fit_models: unknown model {model!r}")

    sc = values["scenario"]
    return ScenarioConfig(
        name=sc["name"] or name,
        description=sc["description"],
        seed=sc["seed"],
        axes=tuple(axes),
        state=state,
        observable=observable,
        time=t,
        analysis=a,
        output=values["output"],
        band=band,
    )


def parse_config(path) -> ScenarioConfig:
    """Read and validate a scenario file; defaults are filled in."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_text(path.read_text(), name=path.stem)
