"""Declarative scenario configuration: TOML with strict schema validation.

Unknown keys are rejected everywhere and all numeric ranges are enforced at
parse time, so a config that loads is a config that runs.
"""

import json
import math
from dataclasses import dataclass, field
from typing import Optional

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover - depends on interpreter
    import tomli as tomllib

from .errors import ConfigError
from .model import (ChannelScenario2, ChannelScenarioK, GlobalError,
                    PerUserError, PerUserErrorK)
from .search import SearchOptions

SCHEMA_VERSION = 1

_SCHEMES = ("SUP", "SUPNORS", "CCP", "TDM", "CONVERSE")


@dataclass(frozen=True)
class OutputOptions:
    units: str = "nats"
    format: str = "csv"
    convex_hull: bool = False


@dataclass(frozen=True)
class RegionOptions:
    schemes: tuple = _SCHEMES
    r2_points: int = 40
    r2_max: float = 0.0  # <= 0 selects the converse-based automatic range


@dataclass(frozen=True)
class MapOptions:
    gamma_min: float = 2.0
    gamma_max: float = 50.0
    grid: int = 25
    map_points: int = 15
    tolerance: float = 1e-4


@dataclass(frozen=True)
class KuserOptions:
    alphas: Optional[tuple] = None
    simplex_grid: int = 0
    eps_rule: str = "equal"


@dataclass(frozen=True)
class RunConfig:
    scenario2: Optional[ChannelScenario2]
    scenariok: Optional[ChannelScenarioK]
    search: SearchOptions
    output: OutputOptions
    region: RegionOptions
    map: MapOptions
    kuser: KuserOptions
    raw: dict = field(default_factory=dict)

    def scenario_echo(self) -> str:
        return json.dumps(self.raw.get("scenario", {}), sort_keys=True,
                          separators=(",", ":"))


def _require_table(doc, key) -> dict:
    t = doc.get(key)
    if t is None:
        raise ConfigError(f"missing required table [{key}]")
    if not isinstance(t, dict):
        raise ConfigError(f"[{key}] must be a table")
    return t


def _opt_table(doc, key) -> dict:
    t = doc.get(key, {})
    if not isinstance(t, dict):
        raise ConfigError(f"[{key}] must be a table")
    return t


def _reject_unknown(table: dict, allowed, where: str) -> None:
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(unknown)}")


def _number(table, key, where, *, lo=None, hi=None, default=None,
            integer=False, lo_open=False, hi_open=False):
    if key not in table:
        if default is None:
            raise ConfigError(f"missing required key {where}.{key}")
        return default
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    v = float(v)
    if not math.isfinite(v):
        raise ConfigError(f"{where}.{key} must be finite")
    if integer:
        if v != int(v):
            raise ConfigError(f"{where}.{key} must be an integer")
        v = int(v)
    if lo is not None and (v <= lo if lo_open else v < lo):
        raise ConfigError(f"{where}.{key} must be {'>' if lo_open else '>='} {lo}")
    if hi is not None and (v >= hi if hi_open else v > hi):
        raise ConfigError(f"{where}.{key} must be {'<' if hi_open else '<='} {hi}")
    return v


def _parse_error_model(err: dict, nuser: int):
    _reject_unknown(err, ["model", "eps", "eps1", "eps2"], "scenario.error")
    model = err.get("model")
    if model not in ("global", "per_user"):
        raise ConfigError("scenario.error.model must be 'global' or 'per_user'")
    if model == "global":
        eps = _number(err, "eps", "scenario.error", lo=0.0, hi=1.0,
                      lo_open=True, hi_open=True)
        return GlobalError(eps)
    if "eps" in err:  # list form, required for K > 2
        eps = err["eps"]
        if not isinstance(eps, list) or len(eps) != nuser:
            raise ConfigError(
                f"scenario.error.eps must be a list of {nuser} probabilities")
        vals = []
        for i, e in enumerate(eps):
            if isinstance(e, bool) or not isinstance(e, (int, float)) \
                    or not (0.0 < float(e) < 1.0):
                raise ConfigError(f"scenario.error.eps[{i}] must lie in (0, 1)")
            vals.append(float(e))
        if nuser == 2:
            return PerUserError(vals[0], vals[1])
        return PerUserErrorK(tuple(vals))
    if nuser != 2:
        raise ConfigError("per-user K-user scenarios need scenario.error.eps as a list")
    e1 = _number(err, "eps1", "scenario.error", lo=0.0, hi=1.0,
                 lo_open=True, hi_open=True)
    e2 = _number(err, "eps2", "scenario.error", lo=0.0, hi=1.0,
                 lo_open=True, hi_open=True)
    return PerUserError(e1, e2)


def _parse_scenario(doc: dict):
    sc = _require_table(doc, "scenario")
    _reject_unknown(sc, ["gamma1", "gamma2", "gammas", "n", "error"], "scenario")
    err = sc.get("error")
    if not isinstance(err, dict):
        raise ConfigError("missing required table [scenario.error]")
    n = _number(sc, "n", "scenario", lo=1, integer=True)
    has_pair = "gamma1" in sc or "gamma2" in sc
    has_vec = "gammas" in sc
    if has_pair and has_vec:
        raise ConfigError("give either scenario.gamma1/gamma2 or scenario.gammas, not both")
    scenario2 = scenariok = None
    if has_vec:
        gam = sc["gammas"]
        if not isinstance(gam, list) or not (2 <= len(gam) <= 6):
            raise ConfigError("scenario.gammas must be a list of 2 to 6 SNRs")
        vals = []
        for i, g in enumerate(gam):
            if isinstance(g, bool) or not isinstance(g, (int, float)) or float(g) <= 0:
                raise ConfigError(f"scenario.gammas[{i}] must be a positive number")
            vals.append(float(g))
        model = _parse_error_model(err, len(vals))
        scenariok = ChannelScenarioK(tuple(vals), n, model)
        if len(vals) == 2 and isinstance(model, (GlobalError, PerUserError)):
            scenario2 = ChannelScenario2(vals[0], vals[1], n, model)
    elif has_pair:
        g1 = _number(sc, "gamma1", "scenario", lo=0.0)
        g2 = _number(sc, "gamma2", "scenario", lo=0.0)
        model = _parse_error_model(err, 2)
        scenario2 = ChannelScenario2(g1, g2, n, model)
    else:
        raise ConfigError("scenario needs gamma1/gamma2 (two users) or gammas (K users)")
    return scenario2, scenariok


def _parse_search(doc: dict) -> SearchOptions:
    t = _opt_table(doc, "search")
    allowed = ["alpha_grid", "beta_interior", "eps_grid", "refinement_rounds",
               "golden_iters", "tolerance", "rng_seed"]
    _reject_unknown(t, allowed, "search")
    return SearchOptions(
        alpha_grid=_number(t, "alpha_grid", "search", lo=2, hi=4096,
                           integer=True, default=SearchOptions.alpha_grid),
        beta_interior=_number(t, "beta_interior", "search", lo=0, hi=1024,
                              integer=True, default=SearchOptions.beta_interior),
        eps_grid=_number(t, "eps_grid", "search", lo=2, hi=4096,
                         integer=True, default=SearchOptions.eps_grid),
        refinement_rounds=_number(t, "refinement_rounds", "search", lo=0, hi=16,
                                  integer=True, default=SearchOptions.refinement_rounds),
        golden_iters=_number(t, "golden_iters", "search", lo=4, hi=128,
                             integer=True, default=SearchOptions.golden_iters),
        tolerance=_number(t, "tolerance", "search", lo=0.0, lo_open=True,
                          default=SearchOptions.tolerance),
        rng_seed=_number(t, "rng_seed", "search", lo=0, integer=True,
                         default=SearchOptions.rng_seed),
    )


def _parse_output(doc: dict) -> OutputOptions:
    t = _opt_table(doc, "output")
    _reject_unknown(t, ["units", "format", "convex_hull"], "output")
    units = t.get("units", "nats")
    if units not in ("nats", "bits"):
        raise ConfigError("output.units must be 'nats' or 'bits'")
    fmt = t.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format must be 'csv' or 'json'")
    hull = t.get("convex_hull", False)
    if not isinstance(hull, bool):
        raise ConfigError("output.convex_hull must be a boolean")
    return OutputOptions(units=units, format=fmt, convex_hull=hull)


def _parse_region(doc: dict) -> RegionOptions:
    t = _opt_table(doc, "region")
    _reject_unknown(t, ["schemes", "r2_points", "r2_max"], "region")
    schemes = t.get("schemes", list(_SCHEMES))
    if not isinstance(schemes, list) or not schemes:
        raise ConfigError("region.schemes must be a non-empty list")
    up = []
    for sch in schemes:
        if not isinstance(sch, str) or sch.upper() not in _SCHEMES:
            raise ConfigError(f"region.schemes entries must be among {_SCHEMES}")
        up.append(sch.upper())
    if len(set(up)) != len(up):
        raise ConfigError("region.schemes must not repeat entries")
    return RegionOptions(
        schemes=tuple(up),
        r2_points=_number(t, "r2_points", "region", lo=2, hi=100000,
                          integer=True, default=RegionOptions.r2_points),
        r2_max=_number(t, "r2_max", "region", default=RegionOptions.r2_max),
    )


def _parse_map(doc: dict) -> MapOptions:
    t = _opt_table(doc, "map")
    _reject_unknown(t, ["gamma_min", "gamma_max", "grid", "map_points",
                        "tolerance"], "map")
    gmin = _number(t, "gamma_min", "map", lo=0.0, lo_open=True,
                   default=MapOptions.gamma_min)
    gmax = _number(t, "gamma_max", "map", lo=0.0, lo_open=True,
                   default=MapOptions.gamma_max)
    if gmax < gmin:
        raise ConfigError("map.gamma_max must be >= map.gamma_min")
    return MapOptions(
        gamma_min=gmin, gamma_max=gmax,
        grid=_number(t, "grid", "map", lo=1, hi=200, integer=True,
                     default=MapOptions.grid),
        map_points=_number(t, "map_points", "map", lo=3, hi=1000, integer=True,
                           default=MapOptions.map_points),
        tolerance=_number(t, "tolerance", "map", lo=0.0, lo_open=True,
                          default=MapOptions.tolerance),
    )


def _parse_kuser(doc: dict) -> KuserOptions:
    t = _opt_table(doc, "kuser")
    _reject_unknown(t, ["alphas", "simplex_grid", "eps_rule"], "kuser")
    alphas = t.get("alphas")
    if alphas is not None:
        if not isinstance(alphas, list) or not alphas:
            raise ConfigError("kuser.alphas must be a non-empty list")
        vals = []
        for i, a in enumerate(alphas):
            if isinstance(a, bool) or not isinstance(a, (int, float)) \
                    or not (0.0 <= float(a) <= 1.0):
                raise ConfigError(f"kuser.alphas[{i}] must lie in [0, 1]")
            vals.append(float(a))
        if sum(vals) > 1.0 + 1e-9:
            raise ConfigError("kuser.alphas must sum to at most 1")
        alphas = tuple(vals)
    grid = _number(t, "simplex_grid", "kuser", lo=0, hi=64, integer=True, default=0)
    rule = t.get("eps_rule", "equal")
    if rule not in ("equal", "caps"):
        raise ConfigError("kuser.eps_rule must be 'equal' or 'caps'")
    return KuserOptions(alphas=alphas, simplex_grid=grid, eps_rule=rule)


def load_config(path: str) -> RunConfig:
    """Parse and validate a TOML run configuration."""
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"config is not valid TOML: {exc}") from exc

    _reject_unknown(doc, ["schema_version", "scenario", "search", "output",
                          "region", "map", "kuser"], "<root>")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}")

    scenario2, scenariok = _parse_scenario(doc)
    return RunConfig(
        scenario2=scenario2,
        scenariok=scenariok,
        search=_parse_search(doc),
        output=_parse_output(doc),
        region=_parse_region(doc),
        map=_parse_map(doc),
        kuser=_parse_kuser(doc),
        raw=doc,
    )
