"""Command-line frontend: scenario configs in, plot-ready CSV/JSON out.

Exit codes: 0 success, 2 config error, 3 infeasible scenario,
4 internal numerical failure.
"""

import argparse
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import itcore, kernels, regions2, regionsk
from .config import SCHEMA_VERSION, load_config
from .errors import (ConfigError, DomainError, GaussBCError, InfeasibleError,
                     NumericalError, UnsupportedError)
from .model import (ChannelScenario2, GlobalError, PerUserError, SupParams,
                    TdmParams)
from .search import SearchOptions, classify_schemes, trace_boundary

_LN2 = math.log(2.0)

REGION_COLUMNS = ("R2", "R1", "scheme", "alpha", "beta", "eps10", "eps11",
                  "eps2", "ordering")


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    v = float(value)
    if math.isnan(v):
        return ""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.12g}"


def _meta_lines(cfg, args, extra=None) -> list:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.scenario_echo(),
        "seed": args.seed if args.seed is not None else cfg.search.rng_seed,
        "units": args.units or cfg.output.units,
    }
    meta.update(extra or {})
    return [f"# {k}={meta[k]}" for k in meta]


def _write_csv(path: Path, meta_lines, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in meta_lines:
            fh.write(line + "\n")
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_json(path: Path, meta: dict, data) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"meta": meta, "data": data}, fh, sort_keys=True,
                  separators=(",", ": "), indent=1)
        fh.write("\n")


def _json_meta(cfg, args, extra=None) -> dict:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "scenario": cfg.raw.get("scenario", {}),
        "seed": args.seed if args.seed is not None else cfg.search.rng_seed,
        "units": args.units or cfg.output.units,
    }
    meta.update(extra or {})
    return meta


def _rate_scale(cfg, args) -> float:
    units = args.units or cfg.output.units
    return 1.0 / _LN2 if units == "bits" else 1.0


def _search_opts(cfg, args) -> SearchOptions:
    if args.seed is None:
        return cfg.search
    return dataclasses.replace(cfg.search, rng_seed=int(args.seed))


def _region_rows(boundary, scale):
    rows = []
    for p in boundary.points:
        alpha = beta = e10 = e11 = e2 = ordering = None
        if isinstance(p.params, SupParams):
            alpha, beta = p.params.alpha, p.params.beta
            e10, e11 = p.params.eps_sat, p.params.eps_cc_strong
            e2 = p.params.eps_weakuser
            ordering = str(p.params.ordering)
        rows.append([p.r2 * scale, p.r1 * scale, boundary.scheme,
                     alpha, beta, e10, e11, e2, ordering])
    return rows


def _auto_r2_grid(s: ChannelScenario2, region_opts):
    if region_opts.r2_max > 0.0:
        r2max = region_opts.r2_max
    else:
        b = regions2.converse_region(s)
        r2max = min(b.r2_bound, b.sum_bound)
    if r2max <= 0.0:
        return np.array([0.0])
    return np.linspace(0.0, r2max, region_opts.r2_points)


def cmd_region(cfg, args) -> int:
    if cfg.scenario2 is None:
        raise ConfigError("the region command needs a two-user scenario "
                          "(scenario.gamma1/gamma2)")
    s = cfg.scenario2
    opts = _search_opts(cfg, args)
    grid = _auto_r2_grid(s, cfg.region)
    scale = _rate_scale(cfg, args)
    fmt = args.format or cfg.output.format
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    use_hull = args.hull or cfg.output.convex_hull

    wrote_any = False
    for scheme in cfg.region.schemes:
        boundary = trace_boundary(scheme, s, grid, opts)
        if use_hull:
            boundary = regions2.upper_concave_hull(boundary)
        rows = _region_rows(boundary, scale)
        wrote_any = wrote_any or bool(rows)
        stem = f"region_{scheme.lower()}"
        extra = {"scheme": scheme, "convex_hull": use_hull}
        if fmt == "csv":
            _write_csv(outdir / f"{stem}.csv", _meta_lines(cfg, args, extra),
                       REGION_COLUMNS, rows)
        else:
            _write_json(outdir / f"{stem}.json", _json_meta(cfg, args, extra),
                        {"columns": list(REGION_COLUMNS), "rows": rows})
    if not wrote_any:
        raise InfeasibleError("no scheme produced any feasible boundary point")
    return 0


def cmd_params(cfg, args) -> int:
    if cfg.scenario2 is None:
        raise ConfigError("the params command needs a two-user scenario")
    s = cfg.scenario2
    opts = _search_opts(cfg, args)
    grid = _auto_r2_grid(s, cfg.region)
    scale = _rate_scale(cfg, args)
    fmt = args.format or cfg.output.format
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    sup = trace_boundary("SUP", s, grid, opts)
    split_cols = ("R2", "R1", "alpha", "beta", "eps10", "eps11", "eps2",
                  "ordering")
    split_rows = []
    for p in sup.points:
        q = p.params
        split_rows.append([p.r2 * scale, p.r1 * scale, q.alpha, q.beta,
                           q.eps_sat, q.eps_cc_strong, q.eps_weakuser,
                           str(q.ordering)])

    nors = trace_boundary("SUPNORS", s, grid, opts)
    eps_cols = ("alpha", "eps10", "eps11", "eps2", "R2")
    eps_rows = sorted(([p.params.alpha, p.params.eps_sat,
                        p.params.eps_cc_strong, p.params.eps_weakuser,
                        p.r2 * scale] for p in nors.points),
                      key=lambda r: (r[0], r[4]))
    if not split_rows and not eps_rows:
        raise InfeasibleError("no feasible operating points to report")

    if fmt == "csv":
        _write_csv(outdir / "params_split_vs_r2.csv",
                   _meta_lines(cfg, args, {"trace": "SUP"}), split_cols,
                   split_rows)
        _write_csv(outdir / "params_eps_vs_alpha.csv",
                   _meta_lines(cfg, args, {"trace": "SUPNORS"}), eps_cols,
                   eps_rows)
    else:
        _write_json(outdir / "params_split_vs_r2.json",
                    _json_meta(cfg, args, {"trace": "SUP"}),
                    {"columns": list(split_cols), "rows": split_rows})
        _write_json(outdir / "params_eps_vs_alpha.json",
                    _json_meta(cfg, args, {"trace": "SUPNORS"}),
                    {"columns": list(eps_cols), "rows": eps_rows})
    return 0


def cmd_map(cfg, args) -> int:
    if cfg.scenario2 is None:
        raise ConfigError("the map command needs a two-user error model "
                          "(scenario.gamma1/gamma2 as placeholders)")
    model = cfg.scenario2.error_model
    mo = cfg.map
    gammas = np.linspace(mo.gamma_min, mo.gamma_max, mo.grid)
    opts = _search_opts(cfg, args)
    result = classify_schemes(gammas, gammas, cfg.scenario2.n, model,
                              opts=opts, tol=mo.tolerance,
                              grid_points=mo.map_points,
                              threads=max(1, args.threads))
    is_global = result.model_kind == "global"
    cols = ("gamma1", "gamma2", "label")
    rows = []
    for i, g1 in enumerate(result.gamma1_values):
        for jj, g2 in enumerate(result.gamma2_values):
            if is_global and g1 < g2:
                continue  # lower half mirrors the upper half exactly
            rows.append([g1, g2, result.labels[i][jj]])
    fmt = args.format or cfg.output.format
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    extra = {"model": result.model_kind,
             "symmetric_half": is_global,
             "rate_floor": math.log(cfg.scenario2.n) / cfg.scenario2.n}
    if fmt == "csv":
        _write_csv(outdir / "map.csv", _meta_lines(cfg, args, extra), cols, rows)
    else:
        _write_json(outdir / "map.json", _json_meta(cfg, args, extra),
                    {"columns": list(cols), "rows": rows})
    return 0


def _simplex_points(k: int, m: int):
    """Compositions of m into k parts, scaled to the unit simplex."""
    def rec(remaining, parts_left):
        if parts_left == 1:
            yield (remaining,)
            return
        for head in range(remaining + 1):
            for tail in rec(remaining - head, parts_left - 1):
                yield (head,) + tail
    return [tuple(c / m for c in comp) for comp in rec(m, k)]


def cmd_kuser(cfg, args) -> int:
    if cfg.scenariok is None:
        raise ConfigError("the kuser command needs scenario.gammas")
    s = cfg.scenariok
    if isinstance(s.error_model, PerUserError):
        raise ConfigError("K-user per-user scenarios use scenario.error.eps as a list")
    ko = cfg.kuser
    if ko.alphas is not None and ko.simplex_grid > 0:
        raise ConfigError("give kuser.alphas or kuser.simplex_grid, not both")
    if ko.eps_rule == "caps" and isinstance(s.error_model, GlobalError):
        raise ConfigError("kuser.eps_rule='caps' needs a per-user error model")
    if ko.alphas is not None:
        if len(ko.alphas) != s.k:
            raise ConfigError(f"kuser.alphas must have length {s.k}")
        alpha_list = [np.asarray(ko.alphas)]
    elif ko.simplex_grid > 0:
        alpha_list = [np.asarray(a) for a in _simplex_points(s.k, ko.simplex_grid)]
    else:
        alpha_list = [np.full(s.k, 1.0 / s.k)]

    eps_alloc = regionsk.equal_split_eps(s)
    seed = args.seed if args.seed is not None else cfg.search.rng_seed
    scale = _rate_scale(cfg, args)

    ach_rows = []
    ach_json = []
    for pid, alphas in enumerate(alpha_list):
        pt = regionsk.kuser_achievable_point(s, alphas, eps_alloc, seed=seed)
        if not pt.feasible:
            raise InfeasibleError("reliability allocation infeasible")
        entry = {"point": pid, "alphas": [float(a) for a in alphas],
                 "users": []}
        for uc in pt.users:
            entry["users"].append({
                "user": uc.user, "eps": uc.eps,
                "quantile_scale": uc.quantile_scale,
                "rhs": [float(v) * scale for v in uc.rhs],
            })
            for m, rhs in enumerate(uc.rhs):
                ach_rows.append([pid] + [float(a) for a in alphas]
                                + [uc.user, m + 1, float(rhs) * scale, uc.eps,
                                   uc.quantile_scale])
        ach_json.append(entry)

    conv = regionsk.kuser_converse(s)
    conv_rows = [["+".join(str(u) for u in b.users),
                  b.eps_used, b.bound * scale if not b.vacuous else None,
                  "yes" if b.vacuous else "no"] for b in conv]
    conv_json = [{"users": list(b.users), "eps_used": b.eps_used,
                  "bound": (None if b.vacuous else b.bound * scale),
                  "vacuous": b.vacuous} for b in conv]

    fmt = args.format or cfg.output.format
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    order = list(regionsk.sort_order(s))
    extra = {"k": s.k, "sorted_physical_indices": json.dumps(order),
             "boundary_point": "equal-quantile"}
    if fmt == "csv":
        alpha_cols = tuple(f"alpha{i+1}" for i in range(s.k))
        _write_csv(outdir / "kuser_achievable.csv",
                   _meta_lines(cfg, args, extra),
                   ("point",) + alpha_cols + ("user", "prefix_len", "rhs",
                                              "eps", "quantile_scale"),
                   ach_rows)
        _write_csv(outdir / "kuser_converse.csv",
                   _meta_lines(cfg, args, extra),
                   ("users", "eps_used", "bound", "vacuous"), conv_rows)
    else:
        _write_json(outdir / "kuser.json",
                    _json_meta(cfg, args, {"k": s.k,
                                           "sorted_physical_indices": order,
                                           "boundary_point": "equal-quantile"}),
                    {"achievable": ach_json, "converse": conv_json})
    return 0


def cmd_selftest(cfg, args) -> int:
    failures = 0

    def check(name, ok, detail=""):
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'} {name}{' ' + detail if detail else ''}")
        failures += 0 if ok else 1

    check("q_inv(1e-5)", abs(kernels.q_inv(1e-5) - 4.2648907939228247) < 1e-9)
    check("bvn orthant identity",
          abs(kernels.bvn_cdf(0.0, 0.0, 0.5) - 1.0 / 3.0) < 5e-9)
    rng = np.random.default_rng(0)
    ok = True
    for _ in range(100):
        e0, e1 = rng.uniform(0.0, 1.0, 2)
        f1 = itcore.correct_decode_F(e0, e1, 1.0)
        f0 = itcore.correct_decode_F(e0, e1, 0.0)
        fm = itcore.correct_decode_F(e0, e1, -1.0)
        ok &= abs(f1 - (1.0 - max(e0, e1))) < 1e-9
        ok &= abs(f0 - (1.0 - e0) * (1.0 - e1)) < 1e-9
        ok &= abs(fm - max(0.0, 1.0 - e0 - e1)) < 1e-9
    check("correct-decode closed forms", ok)
    xs = np.logspace(-2, 2, 40)
    ok = all(abs(itcore.cloud_dispersion(x, y)
                 - itcore.cloud_dispersion_sum_form(x, y)) < 1e-12
             for x in xs for y in xs if x <= y)
    check("cloud dispersion identity", ok)
    check("kappa(100,30,0.1)", abs(itcore.kappa(100, 30.0, 0.1) - 1.6264) < 1e-3)
    s = ChannelScenario2(15.0, 10.0, 100, GlobalError(1e-5))
    opts = SearchOptions(alpha_grid=24, eps_grid=16, refinement_rounds=1,
                         golden_iters=16)
    grid = np.linspace(0.0, 0.8, 6)
    sup = regions2.boundary_sup(s, grid, opts)
    conv = regions2.boundary_converse(s, grid)
    ok = all(p.r1 <= conv.r1_at(p.r2) + 1e-6 for p in sup.points)
    check("achievable within converse", ok)
    return 0 if failures == 0 else 4


def _error_json(kind, exc) -> str:
    return json.dumps({"error": kind, "message": str(exc)}, sort_keys=True)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaussbc",
        description="Second-order rate regions of the scalar Gaussian "
                    "broadcast channel: boundary traces, optimal-parameter "
                    "traces, scheme maps and K-user bounds.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn, needs_config in (
            ("region", cmd_region, True),
            ("params", cmd_params, True),
            ("map", cmd_map, True),
            ("kuser", cmd_kuser, True),
            ("selftest", cmd_selftest, False)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config, default=None)
        p.add_argument("--out", default=".")
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--units", choices=("nats", "bits"), default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--hull", action="store_true")
        p.add_argument("--threads", type=int, default=1)
        p.set_defaults(func=fn, needs_config=needs_config)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else None
        if cfg is None and args.needs_config:
            raise ConfigError("a --config file is required")
        return args.func(cfg, args)
    except (ConfigError, UnsupportedError, DomainError) as exc:
        print(_error_json("config", exc), file=sys.stderr)
        return 2
    except InfeasibleError as exc:
        print(_error_json("infeasible", exc), file=sys.stderr)
        return 3
    except (NumericalError, GaussBCError, FloatingPointError) as exc:
        print(_error_json("numerical", exc), file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
