"""Run configuration files.

INI-style, sectioned ``key = value`` text::

    [dgp]
    kind = discrete            ; or gaussian
    n = 10000
    p_complier = 0.25
    ...

    [scenario]
    mechanisms = no_screen, oracle_complier   ; r values for gaussian: 0.25, 1.0
    n_reps = 2000
    base_seed = 0
    population_sign = +
    apply_sign_screen = false
    workers = 1

    [diagnostic]               ; optional: size/power run of a bootstrap test
    test = retention_test      ; or tnr_test
    alpha = 0.05
    n_boot = 999

    [output]
    dir = results
    format = csv               ; RepTable format: csv or json

Unknown sections and keys are rejected by name. Any key left out takes the
default of the corresponding dataclass field.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass
from typing import Optional, Union

from .dgp import DiscreteDgpConfig, GaussianDgpConfig
from .diagnostics import check_test_args
from .errors import ConfigError, InvalidConfig, ScreenlabError
from .montecarlo import Scenario
from .power import PowerSpec

DEFAULT_ALPHA = 0.05
DEFAULT_N_BOOT = 999
DEFAULT_N_REPS = 2000


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def _words(text: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in text.split(",") if x.strip())


_DGP_TYPES = {
    "discrete": DiscreteDgpConfig,
    "gaussian": GaussianDgpConfig,
}

_SCENARIO_KEYS = {
    "mechanisms": str,
    "n_reps": int,
    "base_seed": int,
    "population_sign": str,
    "apply_sign_screen": _bool,
    "workers": int,
}
_DIAGNOSTIC_KEYS = {"test": str, "alpha": float, "n_boot": int}
_OUTPUT_KEYS = {"dir": str, "format": str}
_POWER_KEYS = {
    "alpha": float,
    "target_power": float,
    "se_unscreened": float,
    "n": int,
    "sigma_u": float,
    "q": float,
    "r_candidates": _floats,
}


@dataclass(frozen=True)
class DiagnosticSpec:
    test: str = "retention_test"
    alpha: float = DEFAULT_ALPHA
    n_boot: int = DEFAULT_N_BOOT


@dataclass(frozen=True)
class RunConfig:
    scenario: Scenario
    workers: int = 1
    diagnostic: Optional[DiagnosticSpec] = None
    power: Optional[PowerSpec] = None
    out_dir: str = "results"
    out_format: str = "csv"

    @property
    def dgp(self) -> Union[DiscreteDgpConfig, GaussianDgpConfig]:
        return self.scenario.dgp


def _typed_section(parser, section: str, keys: dict) -> dict:
    out = {}
    if not parser.has_section(section):
        return out
    for key, raw in parser.items(section):
        if key not in keys:
            raise ConfigError(f"unknown key {key!r} in section [{section}]")
        try:
            out[key] = keys[key](raw)
        except ValueError as err:
            raise ConfigError(f"[{section}] {key}: {err}") from None
    return out


def _dgp_keys(cls) -> dict:
    return {f.name: (int if f.type in ("int", int) else float) for f in dataclasses.fields(cls)}


def parse_config(text: str) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError(f"malformed config: {err}") from None
    allowed = {"dgp", "scenario", "diagnostic", "output", "power"}
    for section in parser.sections():
        if section not in allowed:
            raise ConfigError(f"unknown section [{section}]")
    if not parser.has_section("dgp"):
        raise ConfigError("missing required section [dgp]")

    kind = parser.get("dgp", "kind", fallback="discrete").strip()
    if kind not in _DGP_TYPES:
        raise ConfigError(f"[dgp] kind must be one of {sorted(_DGP_TYPES)}, got {kind!r}")
    parser.remove_option("dgp", "kind")
    cls = _DGP_TYPES[kind]
    dgp = cls(**_typed_section(parser, "dgp", _dgp_keys(cls)))

    sc_raw = _typed_section(parser, "scenario", _SCENARIO_KEYS)
    workers = sc_raw.pop("workers", 1)
    mech_text = sc_raw.pop("mechanisms", None)
    if mech_text is None:
        mechanisms = (1.0,) if kind == "gaussian" else ("no_screen", "oracle_complier")
    elif kind == "gaussian":
        try:
            mechanisms = _floats(mech_text)
        except ValueError as err:
            raise ConfigError(f"[scenario] mechanisms: {err}") from None
    else:
        mechanisms = _words(mech_text)
    sc_raw.setdefault("n_reps", DEFAULT_N_REPS)
    try:
        scenario = Scenario(dgp=dgp, mechanisms=mechanisms, **sc_raw).validate()
    except ScreenlabError as err:
        raise ConfigError(str(err)) from None
    except ValueError as err:
        raise ConfigError(f"[scenario] {err}") from None

    diagnostic = None
    if parser.has_section("diagnostic"):
        diagnostic = DiagnosticSpec(**_typed_section(parser, "diagnostic", _DIAGNOSTIC_KEYS))
        if diagnostic.test not in ("retention_test", "tnr_test"):
            raise ConfigError(f"[diagnostic] test must be retention_test or tnr_test, got {diagnostic.test!r}")
        try:
            check_test_args(diagnostic.alpha, diagnostic.n_boot, "centered")
        except InvalidConfig as err:
            raise ConfigError(f"[diagnostic] {err}") from None
        if kind != "discrete":
            raise ConfigError("[diagnostic] needs a discrete DGP")

    power = None
    if parser.has_section("power"):
        try:
            power = PowerSpec(**_typed_section(parser, "power", _POWER_KEYS)).validate()
        except InvalidConfig as err:
            raise ConfigError(str(err)) from None

    output = _typed_section(parser, "output", _OUTPUT_KEYS)
    fmt = output.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"[output] format must be csv or json, got {fmt!r}")
    if workers < 1:
        raise ConfigError("[scenario] workers must be at least 1")
    return RunConfig(
        scenario=scenario,
        workers=workers,
        diagnostic=diagnostic,
        power=power,
        out_dir=output.get("dir", "results"),
        out_format=fmt,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    return parse_config(text)
