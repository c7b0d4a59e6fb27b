"""Command-line harness: price, select, table and dump-coeffs."""
from __future__ import annotations

import argparse
import json
import sys

from .density import CfEvaluationCache, DensityVariant, SwiftGrid
from .models import (
    HestonParams,
    ModelSpecError,
    OptionStyle,
    VanillaContract,
    load_model,
    make_cf,
    model_from_dict,
)
from .paramselect import (
    JRule,
    RefineRule,
    ScaleRule,
    SelectionError,
    ToleranceConfig,
    grid_from_halfwidth,
    initial_halfwidth,
    refine,
    select_scale,
)
from .payoff import PayoffVariant
from .pricer import reference_price, swift_prices
from . import tables

EXIT_CONFIG = 1
EXIT_SELECTION = 2

# config-file keys; each maps onto the argparse dest of the same name
CONFIG_KEYS = {
    "model", "forward", "maturity", "discount", "style", "strikes",
    "eps_m", "eps_f", "L", "scale_rule", "j_rule", "refine", "density",
    "payoff", "m", "J_payoff", "out", "trace_out",
}

DEFAULTS = {
    "forward": 100.0,
    "maturity": 1.0,
    "discount": 1.0,
    "style": "put",
    "eps_m": 1e-8,
    "eps_f": 1e-8,
    "L": 8.0,
    "scale_rule": "leitao",
    "j_rule": "pi_kappa",
    "refine": "leitao",
    "density": "midpoint",
    "payoff": "sem0",
    "trace_out": "selection_trace.csv",
}


class ConfigError(ValueError):
    pass


def _enum_names(enum_cls):
    return [e.value for e in enum_cls]


def _strikes(text):
    try:
        return [float(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"strikes must be comma-separated numbers, got {text!r}")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON run configuration; flags override its values")
    p.add_argument("--model", help="JSON model file")
    p.add_argument("--forward", type=float)
    p.add_argument("--maturity", type=float)
    p.add_argument("--discount", type=float)
    p.add_argument("--style", choices=["put", "call"])
    p.add_argument("--strikes", type=_strikes, help="comma-separated strikes")
    p.add_argument("--eps-m", dest="eps_m", type=float)
    p.add_argument("--eps-f", dest="eps_f", type=float)
    p.add_argument("--L", dest="L", type=float)
    p.add_argument("--scale-rule", dest="scale_rule", choices=_enum_names(ScaleRule))
    p.add_argument("--j-rule", dest="j_rule", choices=_enum_names(JRule))
    p.add_argument("--refine", choices=_enum_names(RefineRule))
    p.add_argument("--density", choices=_enum_names(DensityVariant))
    p.add_argument("--payoff", choices=_enum_names(PayoffVariant))
    p.add_argument("--m", dest="m", type=int, help="fix the scale instead of selecting it")
    p.add_argument("--J-payoff", dest="J_payoff", type=int, help="payoff J (defaults to the density J)")
    p.add_argument("--out", help="output path (file or directory)")
    p.add_argument("--trace-out", dest="trace_out", help="trace CSV written on non-convergence")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="swift", description="SWIFT option pricing harness")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("price", "price vanilla options"),
        ("select", "run parameter selection and print the trace"),
        ("dump-coeffs", "write coefficient and price-error CSVs"),
    ]:
        _add_common(sub.add_parser(name, help=text))
    t = sub.add_parser("table", help="reproduce a benchmark table as CSV")
    _add_common(t)
    t.add_argument("--which", required=True, choices=["1", "2", "3"])
    return parser


def resolve(args) -> dict:
    """Merge defaults, the config file and explicit flags (in that order)."""
    cfg = dict(DEFAULTS)
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: invalid JSON ({exc})")
        except OSError as exc:
            raise ConfigError(f"{args.config}: {exc.strerror}")
        if not isinstance(data, dict):
            raise ConfigError(f"{args.config}: top level must be a JSON object")
        for key, value in data.items():
            if key not in CONFIG_KEYS:
                raise ConfigError(f"unknown config key {key!r}")
            cfg[key] = value
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    return cfg


def _enum(enum_cls, key, value):
    try:
        return enum_cls(value)
    except ValueError:
        raise ConfigError(f"key {key!r}: expected one of {_enum_names(enum_cls)}, got {value!r}")


def _number(cfg, key, kind=float):
    value = cfg.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"key {key!r} must be a number, got {value!r}")
    return kind(value)


def _model(cfg):
    spec = cfg.get("model")
    if spec is None:
        raise ConfigError("key 'model' is required (--model path or inline object)")
    try:
        return model_from_dict(spec) if isinstance(spec, dict) else load_model(spec)
    except OSError as exc:
        raise ConfigError(f"key 'model': cannot read {spec!r} ({exc.strerror})")
    except ModelSpecError as exc:
        raise ConfigError(str(exc))


def tolerance_config(cfg) -> ToleranceConfig:
    try:
        return ToleranceConfig(
            eps_m=_number(cfg, "eps_m"),
            eps_f=_number(cfg, "eps_f"),
            L=_number(cfg, "L"),
            scale_rule=_enum(ScaleRule, "scale_rule", cfg["scale_rule"]),
            j_rule=_enum(JRule, "j_rule", cfg["j_rule"]),
            refine_rule=_enum(RefineRule, "refine", cfg["refine"]),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc))


def contracts(cfg):
    strikes = cfg.get("strikes")
    if not strikes:
        raise ConfigError("key 'strikes' is required (--strikes K1,K2,...)")
    if not isinstance(strikes, list):
        raise ConfigError("key 'strikes' must be a list of numbers")
    style = _enum(OptionStyle, "style", cfg["style"])
    try:
        return [
            VanillaContract(_number(cfg, "forward"), float(K), _number(cfg, "maturity"),
                            _number(cfg, "discount"), style)
            for K in strikes
        ]
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"key 'strikes': {exc}")


def _select(cf, cfg, tol, cache):
    m = cfg.get("m")
    if m is None:
        m = select_scale(cf, cf.maturity, tol)
    g0 = grid_from_halfwidth(initial_halfwidth(cf, tol), int(m), tol)
    g, trace = refine(cf, g0, tol, cache)
    if cfg.get("J_payoff"):
        g = SwiftGrid(g.m, g.kappa, g.J_density, int(cfg["J_payoff"]), g.c)
    return g, trace


def _fail_selection(trace, cfg):
    path = cfg["trace_out"]
    trace.write_csv(path)
    last = trace.last
    print(
        f"error: eps_f did not reach {cfg['eps_f']:g} (last eps_f={last.eps_f:.6g} at "
        f"m={last.m}, kappa={last.kappa}); trace written to {path}",
        file=sys.stderr,
    )
    return EXIT_SELECTION


def cmd_price(cfg) -> int:
    model = _model(cfg)
    cts = contracts(cfg)
    tol = tolerance_config(cfg)
    cf = make_cf(model, cts[0].maturity)
    cache = CfEvaluationCache(cf)
    g, trace = _select(cf, cfg, tol, cache)
    if not trace.converged:
        return _fail_selection(trace, cfg)
    dv = _enum(DensityVariant, "density", cfg["density"])
    pv = _enum(PayoffVariant, "payoff", cfg["payoff"])
    for ct, r in zip(cts, swift_prices(cf, cts, g, dv, pv, cache)):
        flag = " NEGATIVE_PUT" if r.negative_put else ""
        print(
            f"strike={ct.strike:.10g} {ct.style.value} price={r.price:.15g} m={g.m} "
            f"kappa={g.kappa} log2J={g.log2_J} eps_f={trace.last.eps_f:.3e} "
            f"cf_evals={r.cf_evaluations}{flag}"
        )
    return 0


def cmd_select(cfg) -> int:
    model = _model(cfg)
    tol = tolerance_config(cfg)
    cf = make_cf(model, _number(cfg, "maturity"))
    g, trace = _select(cf, cfg, tol, CfEvaluationCache(cf))
    print("iter,m,kappa,log2J,eps_f")
    for i, r in enumerate(trace.records):
        print(f"{i},{r.m},{r.kappa},{r.log2J},{r.eps_f:.17g}")
    if cfg.get("out"):
        trace.write_csv(cfg["out"])
    if not trace.converged:
        return _fail_selection(trace, cfg)
    print(f"selected m={g.m} kappa={g.kappa} log2J={g.log2_J} c={g.c:.10g}")
    return 0


def cmd_table(args) -> int:
    which = args.which
    out = args.out or f"table{which}.csv"
    if which == "2":
        # the config file holds the parameter sets, not run settings
        try:
            tables.write_table2(out, args.config)
        except tables.ExternalParametersRequired as exc:
            raise ConfigError(str(exc))
        except (OSError, ValueError, KeyError) as exc:
            raise ConfigError(f"table 2 config: {exc}")
    else:
        cfg = resolve(args)
        if which == "1":
            tables.write_table1(out, eps_f=_number(cfg, "eps_f"))
        else:
            # the trapezoid rule reuses the selection's CF evaluations
            dv = _enum(DensityVariant, "density", args.density or "trapezoid")
            pv = _enum(PayoffVariant, "payoff", cfg["payoff"])
            tables.write_table3(out, dv=dv, pv=pv)
    print(f"wrote {out}")
    return 0


def cmd_dump(cfg) -> int:
    model = _model(cfg)
    cts = contracts(cfg)
    tol = tolerance_config(cfg)
    cf = make_cf(model, cts[0].maturity)
    g, trace = _select(cf, cfg, tol, CfEvaluationCache(cf))
    if not trace.converged:
        return _fail_selection(trace, cfg)
    out = cfg.get("out") or "coeff_dump"
    ref = (lambda ct: reference_price(model, ct)) if isinstance(model, HestonParams) else None
    paths = tables.dump_coefficients(
        cf, cts[0], g, out,
        strikes=[ct.strike for ct in cts] if len(cts) > 1 else None,
        reference=ref,
    )
    print(f"m={g.m} kappa={g.kappa} log2J={g.log2_J} J_payoff={g.J_payoff}: wrote {len(paths)} files to {out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "table":
            return cmd_table(args)
        cfg = resolve(args)
        if args.command == "price":
            return cmd_price(cfg)
        if args.command == "select":
            return cmd_select(cfg)
        return cmd_dump(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SelectionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SELECTION


if __name__ == "__main__":
    sys.exit(main())
