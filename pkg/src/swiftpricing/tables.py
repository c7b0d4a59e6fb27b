"""Benchmark tables and coefficient dumps, written as CSV."""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import replace

import numpy as np

from .density import CfEvaluationCache, DensityVariant, SwiftGrid, density_coeffs
from .models import HestonParams, OptionStyle, VanillaContract, heston_cf, make_cf, model_from_dict
from .paramselect import (
    RefineRule,
    ToleranceConfig,
    grid_from_halfwidth,
    initial_halfwidth,
    refine,
)
from .payoff import PayoffVariant, payoff_coeffs, payoff_oracle
from .pricer import error_metrics, reference_price, swift_prices

# short-maturity model used for the eps_f iteration study
SHORT_PARAMS = HestonParams(kappa=4.0, theta=0.25, sigma=1.0, rho=-0.5, v0=0.01)
SHORT_T = 0.01

CORNER1_PARAMS = HestonParams(kappa=0.1, theta=0.25, sigma=3.0, rho=0.95, v0=1e-4)
CORNER2_PARAMS = HestonParams(kappa=0.01, theta=1.0, sigma=3.0, rho=-0.95, v0=1e-4)
CORNER_T = 10.0

TABLE3_FORWARD = 100.0
TABLE3_STRIKES = (100.0001, 101.0, 110.0, 200.0, 1000.0, 10000.0)
# put prices for the strikes above (the call prices follow by parity)
TABLE3_REFERENCE_PUTS = (
    3.032277336306425,
    3.2085075362598046,
    10.087170493728104,
    100.00002701432814,
    900.0000000000015,
    9900.0,
)
# (m, L, eps_f)
TABLE3_SETTINGS = (
    (9, 8.0, 1e-8),
    (9, 8.0, 1e-4),
    (8, 8.0, 1e-4),
    (8, 8.0, 1e-6),
    (8, 8.0, 1e-8),
    (7, 8.0, 1e-8),
    (7, 8.0, 1e-6),
    (6, 8.0, 1e-6),
    (5, 8.0, 1e-6),
)

# density label -> rule, in the Euler-Maclaurin naming of the payoff variants
TABLE2_DENSITIES = {
    "SEM0": DensityVariant.MIDPOINT_VIETA,
    "FEM0": DensityVariant.TRAPEZOID,
    "FEM1": DensityVariant.TRAPEZOID_D1,
}
TABLE2_PAYOFFS = ("SEM0", "FEM0", "FEM1")


class ExternalParametersRequired(ValueError):
    pass


def fmt(v) -> str:
    return f"{float(v):.17g}"


# ---------------------------------------------------------------------- Table 1

def table1_rows(eps_f: float = 1e-8, max_m: int = 22, L: float = 4.0, m0: int = 8):
    """Yield (rule, iter, m, kappa, log2J, eps_f) for ROMO then LEITAO."""
    cf = heston_cf(SHORT_PARAMS, SHORT_T)
    base = ToleranceConfig(eps_f=eps_f, L=L, max_m=max_m)
    c0 = initial_halfwidth(cf, base)
    for rule in (RefineRule.ROMO, RefineRule.LEITAO):
        cfg = replace(base, refine_rule=rule)
        _, trace = refine(cf, grid_from_halfwidth(c0, m0, cfg), cfg)
        for i, r in enumerate(trace.records):
            yield rule.value, i, r.m, r.kappa, r.log2J, r.eps_f


def write_table1(path, **kw):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["rule", "iter", "m", "kappa", "log2J", "eps_f"])
        for rule, i, m, kappa, l2, eps in table1_rows(**kw):
            w.writerow([rule, i, m, kappa, l2, fmt(eps)])


# ---------------------------------------------------------------------- Table 3

def table3_row(m: int, L: float, eps_f: float, dv: DensityVariant = DensityVariant.TRAPEZOID,
               pv: PayoffVariant = PayoffVariant.SEM0):
    """Grid and signed call-price errors for one setting of the corner-case table."""
    cf = heston_cf(CORNER2_PARAMS, CORNER_T)
    cfg = ToleranceConfig(eps_f=eps_f, L=L)
    cache = CfEvaluationCache(cf)
    g, trace = refine(cf, grid_from_halfwidth(initial_halfwidth(cf, cfg), m, cfg), cfg, cache)
    contracts = [
        VanillaContract(TABLE3_FORWARD, K, CORNER_T, style=OptionStyle.CALL) for K in TABLE3_STRIKES
    ]
    results = swift_prices(cf, contracts, g, dv, pv, cache)
    ref_calls = [p + TABLE3_FORWARD - K for p, K in zip(TABLE3_REFERENCE_PUTS, TABLE3_STRIKES)]
    errors = [r.price - ref for r, ref in zip(results, ref_calls)]
    return g, trace, errors


def write_table3(path, settings=TABLE3_SETTINGS, dv=DensityVariant.TRAPEZOID, pv=PayoffVariant.SEM0):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["m", "L", "eps_f", "log2J"] + [f"err_{K:.10g}" for K in TABLE3_STRIKES])
        for m, L, eps in settings:
            g, _, errors = table3_row(m, L, eps, dv, pv)
            w.writerow([m, fmt(L), fmt(eps), g.log2_J] + [fmt(e) for e in errors])
            fh.flush()


# ---------------------------------------------------------------------- Table 2

_SET_KEYS = {"name", "model", "maturity", "forward", "strikes", "m", "J", "L"}


def load_table2_config(path):
    """Read the parameter sets: {"sets": [{name, model, maturity, forward, strikes, m, J, L}]}."""
    if path is None:
        raise ExternalParametersRequired(
            "external parameters required: table 2 needs --config with the Heston parameter sets"
        )
    with open(path) as fh:
        spec = json.load(fh)
    sets = spec.get("sets") if isinstance(spec, dict) else None
    if not isinstance(sets, list) or not sets:
        raise ExternalParametersRequired("external parameters required: key 'sets' must be a non-empty list")
    for s in sets:
        for key in s:
            if key not in _SET_KEYS:
                raise ValueError(f"unknown key {key!r} in table 2 set")
        for key in _SET_KEYS - {"L"}:
            if key not in s:
                raise ValueError(f"missing key {key!r} in table 2 set")
    return sets


def table2_rows(sets):
    """Yield (set, density, payoff, rmse, mae) over OTM options of each set."""
    for s in sets:
        model = model_from_dict(s["model"])
        T = float(s["maturity"])
        F = float(s["forward"])
        cf = make_cf(model, T)
        cfg = ToleranceConfig(L=float(s.get("L", 8.0)))
        c = initial_halfwidth(cf, cfg)
        g0 = grid_from_halfwidth(c, int(s["m"]), cfg)
        g = SwiftGrid(g0.m, g0.kappa, int(s["J"]), int(s["J"]), c)
        contracts = [
            VanillaContract(F, float(K), T, style=OptionStyle.PUT if K < F else OptionStyle.CALL)
            for K in s["strikes"]
        ]
        if not isinstance(model, HestonParams):
            raise ValueError("table 2 sets must use the heston model")
        refs = [reference_price(model, ct) for ct in contracts]
        cache = CfEvaluationCache(cf)
        for dname, dv in TABLE2_DENSITIES.items():
            for pname in TABLE2_PAYOFFS:
                res = swift_prices(cf, contracts, g, dv, PayoffVariant[pname], cache)
                rep = error_metrics([r.price for r in res], refs)
                yield s["name"], dname, pname, rep.rmse, rep.mae


def write_table2(path, config_path):
    sets = load_table2_config(config_path)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["set", "density", "payoff", "rmse", "mae"])
        for name, d, p, rmse, mae in table2_rows(sets):
            w.writerow([name, d, p, fmt(rmse), fmt(mae)])


# -------------------------------------------------------------- coefficient dumps

def density_reference_J(J: int) -> int:
    """J of the high-resolution trapezoid coefficients that serve as density oracle."""
    return max(2**14, 64 * J)


def dump_coefficients(cf, contract: VanillaContract, g: SwiftGrid, out_dir,
                      density_variants=tuple(DensityVariant),
                      payoff_variants=tuple(PayoffVariant),
                      strikes=None, reference=None):
    """Write c_{m,k}, V_{m,k} and (optionally) price-error CSVs into ``out_dir``.

    ``reference`` maps a contract to its reference price; price files are
    written only when both ``strikes`` and ``reference`` are given.
    Returns the list of written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    written = []
    cache = CfEvaluationCache(cf)
    ref_grid = replace(g, J_density=density_reference_J(g.J_density))
    c_ref = density_coeffs(cf, ref_grid, DensityVariant.TRAPEZOID, cache).values
    for dv in density_variants:
        vals = density_coeffs(cf, g, dv, cache).values
        path = os.path.join(out_dir, f"density_{dv.value}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "c_mk", "error_vs_oracle"])
            for k, v, r in zip(g.indices, vals, c_ref):
                w.writerow([int(k), fmt(v), fmt(v - r)])
        written.append(path)

    v_ref = np.array([payoff_oracle(contract, g, int(k)) for k in g.indices])
    for pv in payoff_variants:
        if pv is PayoffVariant.VIETA_STRIKE:
            continue  # strike-centered: not comparable with the forward-centered oracle
        vals = payoff_coeffs(contract, g, pv).values
        path = os.path.join(out_dir, f"payoff_{pv.value}.csv")
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["k", "V_mk", "variant", "error_vs_oracle"])
            for k, v, r in zip(g.indices, vals, v_ref):
                w.writerow([int(k), fmt(v), pv.value, fmt(v - r)])
        written.append(path)

    if strikes is not None and reference is not None:
        contracts = [
            replace(contract, strike=float(K),
                    style=OptionStyle.PUT if K < contract.forward else OptionStyle.CALL)
            for K in strikes
        ]
        refs = [reference(ct) for ct in contracts]
        for dv in density_variants:
            for pv in payoff_variants:
                res = swift_prices(cf, contracts, g, dv, pv, cache)
                path = os.path.join(out_dir, f"prices_{dv.value}_{pv.value}.csv")
                with open(path, "w", newline="") as fh:
                    w = csv.writer(fh)
                    w.writerow(["strike", "price", "reference", "error"])
                    for ct, r, ref in zip(contracts, res, refs):
                        w.writerow([fmt(ct.strike), fmt(r.price), fmt(ref), fmt(r.price - ref)])
                written.append(path)
    return written
