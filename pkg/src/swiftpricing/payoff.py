"""Put payoff coefficients V_{m,k} for k = 1-kappa .. kappa.

Forward-centered variants integrate, on y in [-c, -x] with x = ln(F/K),

    V_{m,k} = F 2^{m/2} int (e^{-x} - e^y) S(2^m y - k) dy

where S is one of the sinc approximations. Cosine kernels are integrated in
closed form (``payoff_primitive``) and summed over the frequency nodes with
one FFT. DIRECT_* variants apply a composite rule to the exact sinc kernel.
"""
from __future__ import annotations

import enum
import math
import warnings

import numpy as np
from scipy import integrate

from .density import CoefficientVector, SwiftGrid
from .models import VanillaContract
from .numerics import QuadratureRule, fft_forward, frequency_grid


class PayoffVariant(enum.Enum):
    VIETA_STRIKE = "vieta_strike"
    VIETA_FORWARD = "vieta_forward"
    SEM0 = "sem0"
    FEM0 = "fem0"
    FEM1 = "fem1"
    DIRECT_MIDPOINT = "direct_midpoint"
    DIRECT_TRAPEZOID = "direct_trapezoid"
    DIRECT_SIMPSON = "direct_simpson"
    DIRECT_BOOLE = "direct_boole"

    @property
    def is_direct(self) -> bool:
        return self.name.startswith("DIRECT_")


def _segment_exp(a, lo, hi):
    # int_lo^hi e^{i a y} dy, finite as a -> 0
    h = hi - lo
    return np.exp(0.5j * a * (hi + lo)) * h * np.sinc(a * h / (2 * np.pi))


def payoff_primitive(a, shift, y_lo: float, y_hi: float, x: float):
    """Closed-form kernel integrals over [y_lo, y_hi].

    Returns ``(cos_part, sin_part)`` with

        cos_part = int (e^{-x} - e^y) cos(a y + shift) dy
        sin_part = int (a y + shift) (e^{-x} - e^y) sin(a y + shift) dy

    ``a`` and ``shift`` broadcast. Every term stays finite at a = 0.
    """
    if y_lo > y_hi:
        raise ValueError("y_lo must not exceed y_hi")
    a = np.asarray(a, dtype=float)
    b = np.asarray(shift, dtype=float)
    lo, hi = float(y_lo), float(y_hi)
    ex = math.exp(-x)
    lam = 1.0 + 1j * a
    e_hi, e_lo = np.exp(lam * hi), np.exp(lam * lo)
    E0 = _segment_exp(a, lo, hi)
    rot = np.exp(1j * b)
    G = rot * (ex * E0 - (e_hi - e_lo) / lam)
    # a * int y e^{i a y} dy, rewritten without division by a
    aE1 = -1j * (hi * np.exp(1j * a * hi) - lo * np.exp(1j * a * lo)) + 1j * E0

    def prim(y, ey):
        return (a * y + b) * ey / lam - a * ey / (lam * lam)

    H = rot * (ex * (b * E0 + aE1) - (prim(hi, e_hi) - prim(lo, e_lo)))
    return np.real(G), np.imag(H)


def _kernel_integrals(a, lo, hi, x):
    # complex int (e^{-x} - e^y) e^{i a y} dy for the FFT assembly
    lam = 1.0 + 1j * a
    return math.exp(-x) * _segment_exp(a, lo, hi) - (np.exp(lam * hi) - np.exp(lam * lo)) / lam


def _cosine_expansion(m, J, k, lo, hi, x, rule):
    """sum_j w_j int (e^{-x} - e^y) cos(pi s_j (2^m y - k)) dy over the rule nodes."""
    grid = frequency_grid(J, rule)
    N = 2 * J
    G = grid.weights * _kernel_integrals(2.0**m * grid.nodes, lo, hi, x)
    a = np.zeros(N, dtype=np.complex128)
    if rule is QuadratureRule.MIDPOINT:
        a[:J] = G
        s = np.exp(-1j * np.pi * k / N) * fft_forward(a)[k % N]
    else:
        a[: J + 1] = G
        s = fft_forward(a)[k % N]
    return np.real(s)


def _correction(m, k, lo, hi, x):
    # int (2^m y - k)(e^{-x} - e^y) sin(pi (2^m y - k)) dy, times pi
    _, sin_part = payoff_primitive(math.pi * 2.0**m, -math.pi * k, lo, hi, x)
    return sin_part


def default_direct_nodes(variant: PayoffVariant, J: int) -> int:
    if variant in (PayoffVariant.DIRECT_MIDPOINT, PayoffVariant.DIRECT_TRAPEZOID):
        return 2 * J
    if variant is PayoffVariant.DIRECT_SIMPSON:
        return 2 * J + 1
    return 4 * math.ceil(J / 2) + 1


def _composite(variant, lo, hi, n):
    if variant is PayoffVariant.DIRECT_MIDPOINT:
        h = (hi - lo) / n
        return lo + (np.arange(n) + 0.5) * h, np.full(n, h)
    if variant is PayoffVariant.DIRECT_TRAPEZOID:
        if n < 2:
            raise ValueError("DIRECT_TRAPEZOID needs n_direct >= 2")
        y = np.linspace(lo, hi, n)
        w = np.full(n, (hi - lo) / (n - 1))
        w[0] *= 0.5
        w[-1] *= 0.5
        return y, w
    if variant is PayoffVariant.DIRECT_SIMPSON:
        if n < 3 or n % 2 == 0:
            raise ValueError("DIRECT_SIMPSON needs an odd n_direct >= 3")
        y = np.linspace(lo, hi, n)
        w = np.where(np.arange(n) % 2 == 1, 4.0, 2.0)
        w[0] = w[-1] = 1.0
        return y, w * (hi - lo) / (n - 1) / 3
    if n < 5 or n % 4 != 1:
        raise ValueError("DIRECT_BOOLE needs n_direct = 1 (mod 4)")
    y = np.linspace(lo, hi, n)
    w = np.tile([14.0, 32.0, 12.0, 32.0], (n - 1) // 4)
    w = np.append(w, 7.0)
    w[0] = 7.0
    return y, w * 2 * (hi - lo) / (n - 1) / 45


def _direct(variant, m, k, lo, hi, x, n):
    y, w = _composite(variant, lo, hi, n)
    payoff = (math.exp(-x) - np.exp(y)) * w
    out = np.empty(k.size)
    step = max(1, 2**22 // max(n, 1))
    for s in range(0, k.size, step):
        kk = k[s : s + step]
        out[s : s + step] = np.sinc(2.0**m * y[None, :] - kk[:, None]) @ payoff
    return out


def payoff_coeffs(
    contract: VanillaContract,
    g: SwiftGrid,
    v: PayoffVariant = PayoffVariant.SEM0,
    n_direct: int | None = None,
) -> CoefficientVector:
    """Put payoff coefficients; calls are obtained from puts by parity.

    VIETA_STRIKE is strike-centered (pair it with density coefficients of
    X + x); every other variant is forward-centered. An empty put region
    (x >= c) yields zeros.
    """
    m, J, kappa = g.m, g.J_payoff, g.kappa
    k = g.indices
    c = g.c
    x = contract.log_moneyness
    scale = 2.0 ** (m / 2)

    if v is PayoffVariant.VIETA_STRIKE:
        lo, hi = -c, 0.0
        vals = contract.strike * scale / J * _cosine_expansion(m, J, k, lo, hi, 0.0, QuadratureRule.MIDPOINT)
        return CoefficientVector(m, vals)

    if x >= c:
        return CoefficientVector(m, np.zeros(2 * kappa))
    lo, hi = -c, -x
    F = contract.forward

    if v.is_direct:
        n = default_direct_nodes(v, J) if n_direct is None else int(n_direct)
        return CoefficientVector(m, F * scale * _direct(v, m, k, lo, hi, x, n))

    if v in (PayoffVariant.VIETA_FORWARD, PayoffVariant.SEM0):
        vals = _cosine_expansion(m, J, k, lo, hi, x, QuadratureRule.MIDPOINT) / J
        if v is PayoffVariant.SEM0:
            vals = vals - _correction(m, k, lo, hi, x) / (24.0 * J * J)
    else:
        vals = _cosine_expansion(m, J, k, lo, hi, x, QuadratureRule.TRAPEZOID) / J
        if v is PayoffVariant.FEM1:
            vals = vals + _correction(m, k, lo, hi, x) / (12.0 * J * J)
    return CoefficientVector(m, F * scale * vals)


def payoff_oracle(
    contract: VanillaContract, g: SwiftGrid, k: int, tol: float = 1e-13
) -> float:
    """V_{m,k} by adaptive quadrature of the exact truncated sinc integral.

    The interval is split at the zeros of sinc(2^m y - k) so each piece is
    smooth and non-oscillating. ``tol`` is absolute on V_{m,k}. Emits a
    RuntimeWarning naming the achieved error estimate if it exceeds both
    ``tol`` and the floating-point floor of the summed pieces.
    """
    x = contract.log_moneyness
    if x >= g.c:
        return 0.0
    lo, hi = -g.c, -x
    m = g.m
    ex = math.exp(-x)
    scale = 2.0**m

    def f(y):
        return (ex - math.exp(y)) * np.sinc(scale * y - k)

    n_lo = math.ceil(scale * lo - k)
    n_hi = math.floor(scale * hi - k)
    cuts = [lo] + [(k + n) / scale for n in range(n_lo, n_hi + 1)] + [hi]
    cuts = sorted(set(cuts))
    outer = contract.forward * 2.0 ** (m / 2)
    err = 0.0
    pieces = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        for a, b in zip(cuts[:-1], cuts[1:]):
            if b <= a:
                continue
            val, e = integrate.quad(f, a, b, epsabs=tol / (outer * len(cuts)), epsrel=0.0, limit=200)
            pieces.append(val)
            err += e
    value = outer * math.fsum(pieces)
    achieved = outer * err
    # quad cannot certify below the roundoff floor of the pieces themselves
    floor = 64 * np.finfo(float).eps * outer * sum(abs(q) for q in pieces)
    if achieved > max(tol, floor):
        warnings.warn(f"payoff_oracle: achieved tolerance {achieved:.3g} > requested {tol:.3g}", RuntimeWarning)
    return value
