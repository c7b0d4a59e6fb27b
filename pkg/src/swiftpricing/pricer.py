"""Prices from coefficient vectors, the COS baseline and the reference oracle."""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import ndtr

from .density import (
    CfEvaluationCache,
    CoefficientVector,
    DensityVariant,
    SwiftGrid,
    density_coeffs,
    density_sum_residual,
)
from .models import CharacteristicFunction, HestonParams, OptionStyle, VanillaContract
from .payoff import PayoffVariant, payoff_coeffs

NEGATIVE_PRICE_TOL = 1e-8


@dataclass(frozen=True)
class PriceResult:
    price: float
    grid: SwiftGrid | None
    density_variant: DensityVariant | None
    payoff_variant: PayoffVariant | None
    eps_f: float | None = None
    cf_evaluations: int | None = None
    # put below -1e-8 F: the truncation range is too narrow
    negative_put: bool = False


@dataclass(frozen=True)
class ErrorReport:
    errors: np.ndarray
    rmse: float
    mae: float


def _from_put(put: float, contract: VanillaContract) -> float:
    if contract.style is OptionStyle.PUT:
        return put
    return put + contract.discount * (contract.forward - contract.strike)


def swift_price(
    cf: CharacteristicFunction,
    contract: VanillaContract,
    g: SwiftGrid,
    dv: DensityVariant = DensityVariant.MIDPOINT_VIETA,
    pv: PayoffVariant = PayoffVariant.SEM0,
    cache: CfEvaluationCache | None = None,
    density: CoefficientVector | None = None,
    n_direct: int | None = None,
) -> PriceResult:
    """B * sum_k c_{m,k} V_{m,k} for the put; calls follow by parity.

    ``density`` lets a strike loop reuse forward-centered coefficients.
    It is ignored for VIETA_STRIKE, whose density is shifted per strike.
    """
    if cache is None:
        cache = CfEvaluationCache(cf)
    if pv is PayoffVariant.VIETA_STRIKE:
        dens = density_coeffs(cf, g, dv, cache, x=contract.log_moneyness)
    else:
        dens = density if density is not None else density_coeffs(cf, g, dv, cache)
    if dens.kappa != g.kappa or dens.m != g.m:
        raise ValueError("density coefficients do not match the grid")
    pay = payoff_coeffs(contract, g, pv, n_direct=n_direct)
    put = contract.discount * math.fsum(dens.values * pay.values)
    return PriceResult(
        price=_from_put(put, contract),
        grid=g,
        density_variant=dv,
        payoff_variant=pv,
        eps_f=density_sum_residual(dens),
        cf_evaluations=cache.evaluations,
        negative_put=put < -NEGATIVE_PRICE_TOL * contract.forward,
    )


def swift_prices(
    cf: CharacteristicFunction,
    contracts,
    g: SwiftGrid,
    dv: DensityVariant = DensityVariant.MIDPOINT_VIETA,
    pv: PayoffVariant = PayoffVariant.SEM0,
    cache: CfEvaluationCache | None = None,
    n_direct: int | None = None,
) -> list[PriceResult]:
    """Price several contracts on one grid, computing the density once."""
    cache = cache if cache is not None else CfEvaluationCache(cf)
    dens = None if pv is PayoffVariant.VIETA_STRIKE else density_coeffs(cf, g, dv, cache)
    return [swift_price(cf, ct, g, dv, pv, cache, dens, n_direct) for ct in contracts]


# ------------------------------------------------------------------ COS method

def cos_price(cf: CharacteristicFunction, contract: VanillaContract, M: int, L: float) -> PriceResult:
    """COS price with M terms on [c1 - L w, c1 + L w], w = sqrt(c2 + sqrt c4)."""
    if M < 2:
        raise ValueError("COS needs M >= 2")
    c1, c2, c4 = cf.cumulants
    half = L * math.sqrt(abs(c2) + math.sqrt(abs(c4)))
    a, b = c1 - half, c1 + half
    x = contract.log_moneyness
    d = min(-x, b)
    put = 0.0
    if d > a:
        k = np.arange(M)
        u = k * np.pi / (b - a)
        # chi = int_a^d e^y cos(u (y - a)) dy, psi = int_a^d cos(u (y - a)) dy
        ud = u * (d - a)
        chi = (np.exp(d) * (np.cos(ud) + u * np.sin(ud)) - math.exp(a)) / (1 + u * u)
        psi = np.empty(M)
        psi[0] = d - a
        psi[1:] = np.sin(ud[1:]) / u[1:]
        V = 2.0 / (b - a) * contract.forward * (math.exp(-x) * psi - chi)
        # E[e^{i u X}] = fhat(-u) = conj(fhat(u))
        terms = np.real(np.conj(cf(u)) * np.exp(-1j * u * a)) * V
        terms[0] *= 0.5
        put = contract.discount * math.fsum(terms)
    return PriceResult(
        price=_from_put(put, contract),
        grid=None,
        density_variant=None,
        payoff_variant=None,
        negative_put=put < -NEGATIVE_PRICE_TOL * contract.forward,
    )


# ----------------------------------------------------------- reference oracle

_LEWIS_EDGES = np.concatenate([[0.0], np.geomspace(0.1, 1e6, 201)])


def _heston_psi_scalar(u: complex, p: HestonParams, T: float) -> complex:
    # Plain scalar transcription of the rotation-free Heston form. It shares
    # no code with models.heston_psi, which keeps the oracle independent.
    s2 = p.sigma * p.sigma
    xi = p.kappa - p.rho * p.sigma * 1j * u
    d = cmath.sqrt(xi * xi + s2 * (u * u + 1j * u))
    g = (xi - d) / (xi + d)
    e = cmath.exp(-d * T)
    A = p.kappa * p.theta / s2 * ((xi - d) * T - 2 * cmath.log((1 - g * e) / (1 - g)))
    B = (xi - d) / s2 * (1 - e) / (1 - g * e)
    return cmath.exp(A + p.v0 * B)


def reference_price(p: HestonParams, contract: VanillaContract, tol: float = 1e-10) -> float:
    """Heston price by adaptive quadrature of the Lewis single-integral formula.

        C = F - sqrt(F K) / pi * int_0^inf Re[e^{i u k} psi(u - i/2)] / (u^2 + 1/4) du

    with k = ln(F/K), then discounted; puts follow by parity. The integral is
    split on a log-spaced partition of [0, 1e6] so every piece is resolved
    by Gauss-Kronrod. Warns with the achieved error if it exceeds ``tol``.
    """
    F, K, T = contract.forward, contract.strike, contract.maturity
    k = math.log(F / K)

    def f(u):
        return (cmath.exp(1j * u * k) * _heston_psi_scalar(u - 0.5j, p, T)).real / (u * u + 0.25)

    pieces, err = [], 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for lo, hi in zip(_LEWIS_EDGES[:-1], _LEWIS_EDGES[1:]):
            v, e = integrate.quad(f, lo, hi, epsabs=1e-15, epsrel=1e-13, limit=500)
            pieces.append(v)
            err += e
    scale = math.sqrt(F * K) / math.pi
    call = F - scale * math.fsum(pieces)
    achieved = scale * err
    if achieved > tol:
        warnings.warn(f"reference_price: achieved tolerance {achieved:.3g} > {tol:.3g}", RuntimeWarning)
    B = contract.discount
    if contract.style is OptionStyle.CALL:
        return B * call
    return B * (call - (F - K))


def black_price(contract: VanillaContract, vol: float) -> float:
    """Black (1976) price on the forward."""
    F, K, B = contract.forward, contract.strike, contract.discount
    s = vol * math.sqrt(contract.maturity)
    d1 = (math.log(F / K) + 0.5 * s * s) / s
    d2 = d1 - s
    if contract.style is OptionStyle.CALL:
        return B * (F * ndtr(d1) - K * ndtr(d2))
    return B * (K * ndtr(-d2) - F * ndtr(-d1))


def error_metrics(computed, reference) -> ErrorReport:
    """Signed errors, RMSE and MAE (the maximum absolute error)."""
    c = np.asarray(computed, dtype=float)
    r = np.asarray(reference, dtype=float)
    if c.shape != r.shape:
        raise ValueError("computed and reference must have equal length")
    if c.size == 0:
        raise ValueError("error_metrics needs at least one price")
    e = c - r
    return ErrorReport(errors=e, rmse=float(np.sqrt(np.mean(e * e))), mae=float(np.max(np.abs(e))))
