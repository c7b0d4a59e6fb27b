"""Density coefficients c_{m,k} = <f, phi_{m,k}> for k = 1-kappa .. kappa.

By Parseval,

    c_{m,k} = 2^{m/2} / pi * int_0^pi Re{ fhat(2^m t) e^{i t k} } dt,

and each variant is a quadrature of this integral. The discrete sums are
evaluated with one length-2J FFT per rule.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .models import CharacteristicFunction
from .numerics import QuadratureRule, fft_forward, frequency_grid, is_power_of_two


class AccuracyWarning(UserWarning):
    """Grid choice that is valid but known to degrade accuracy."""


@dataclass(frozen=True)
class SwiftGrid:
    m: int
    kappa: int
    J_density: int
    J_payoff: int
    c: float

    def __post_init__(self):
        if self.m < 0:
            raise ValueError("scale m must be >= 0")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if not (is_power_of_two(self.J_density) and is_power_of_two(self.J_payoff)):
            raise ValueError("J values must be powers of two")
        if not self.c > 0:
            raise ValueError("half-width c must be positive")

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1 - self.kappa, self.kappa + 1)

    @property
    def log2_J(self) -> int:
        return self.J_density.bit_length() - 1


@dataclass(frozen=True)
class CoefficientVector:
    m: int
    values: np.ndarray

    def __post_init__(self):
        n = len(self.values)
        if n == 0 or n % 2:
            raise ValueError("coefficient vector must hold 2*kappa values")
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite coefficient")

    @property
    def kappa(self) -> int:
        return len(self.values) // 2

    @property
    def indices(self) -> np.ndarray:
        return np.arange(1 - self.kappa, self.kappa + 1)


class DensityVariant(enum.Enum):
    MIDPOINT_VIETA = "midpoint"
    TRAPEZOID = "trapezoid"
    TRAPEZOID_D1 = "trapezoid_d1"
    SIMPSON = "simpson"


def _trailing_zeros(n: np.ndarray) -> np.ndarray:
    low = n & -n
    return np.round(np.log2(low.astype(float))).astype(np.int64)


class CfEvaluationCache:
    """fhat values keyed by their exact node.

    Every node used here is pi times a dyadic rational, so a node is stored
    as the reduced pair (odd numerator n, exponent e) meaning pi * n / 2^e.
    Trapezoid nodes at J are a subset of those at 2J, which is what makes
    J doubling cost exactly J new evaluations. fhat(0) = 1 is never
    evaluated or counted.

    Not thread-safe; one cache per pricing session.
    """

    def __init__(self, cf: CharacteristicFunction):
        self.cf = cf
        self.evaluations = 0
        self._store: dict[int, tuple[np.ndarray, np.ndarray]] = {}

    def __len__(self):
        return sum(len(k) for k, _ in self._store.values())

    def lookup(self, numerators: np.ndarray, exponent: int) -> np.ndarray:
        """fhat(pi * numerators / 2^exponent), evaluating only unseen nodes."""
        num = np.asarray(numerators, dtype=np.int64)
        out = np.ones(num.shape, dtype=np.complex128)
        nz = np.flatnonzero(num)
        if nz.size == 0:
            return out
        tz = _trailing_zeros(num[nz])
        odd = num[nz] >> tz
        exps = exponent - tz
        for e in np.unique(exps):
            sel = exps == e
            wanted = odd[sel]
            keys, vals = self._store.get(int(e), (np.empty(0, np.int64), np.empty(0, np.complex128)))
            pos = np.searchsorted(keys, wanted)
            hit = pos < keys.size
            hit[hit] = keys[pos[hit]] == wanted[hit]
            if not hit.all():
                new = np.unique(wanted[~hit])
                w = np.pi * np.ldexp(new.astype(float), -int(e))
                new_vals = np.asarray(self.cf(w), dtype=np.complex128)
                self.evaluations += new.size
                keys = np.concatenate([keys, new])
                vals = np.concatenate([vals, new_vals])
                order = np.argsort(keys, kind="stable")
                keys, vals = keys[order], vals[order]
                self._store[int(e)] = (keys, vals)
                pos = np.searchsorted(keys, wanted)
            out[nz[sel]] = vals[pos]
        return out

    def on_grid(self, m: int, J: int, rule: QuadratureRule) -> np.ndarray:
        """fhat(2^m * node) for the nodes of ``frequency_grid(J, rule)``."""
        grid = frequency_grid(J, rule)
        exponent = grid.denominator.bit_length() - 1 - m
        return self.lookup(grid.numerators, exponent)


def _check_cache(cf, cache):
    if cache is None:
        return CfEvaluationCache(cf)
    if cache.cf is not cf:
        raise ValueError("cache belongs to a different characteristic function")
    return cache


def _shift(values, omega, x):
    return values if x == 0.0 else values * np.exp(-1j * omega * x)


def _midpoint(cache, m, J, k, x):
    N = 2 * J
    grid = frequency_grid(J, QuadratureRule.MIDPOINT)
    f = _shift(cache.on_grid(m, J, QuadratureRule.MIDPOINT), grid.nodes * 2.0**m, x)
    a = np.zeros(N, dtype=np.complex128)
    a[:J] = f
    # sum_j f_j e^{i pi (j - 1/2) k / J} = e^{i pi k / 2J} sum_j' f_{j'+1} e^{2 pi i j' k / N}
    s = np.conj(fft_forward(np.conj(a)))[k % N]
    return np.real(np.exp(1j * np.pi * k / N) * s)


def _trapezoid(cache, m, J, k, x):
    N = 2 * J
    grid = frequency_grid(J, QuadratureRule.TRAPEZOID)
    f = _shift(cache.on_grid(m, J, QuadratureRule.TRAPEZOID), grid.nodes * 2.0**m, x)
    a = np.zeros(N, dtype=np.complex128)
    a[: J + 1] = grid.weights * f
    return np.real(fft_forward(np.conj(a))[k % N])


def density_coeffs(
    cf: CharacteristicFunction,
    g: SwiftGrid,
    v: DensityVariant = DensityVariant.TRAPEZOID,
    cache: CfEvaluationCache | None = None,
    x: float = 0.0,
) -> CoefficientVector:
    """c_{m,k} of the density of X + x (x = 0 gives the forward-centered density).

    A non-zero ``x`` multiplies fhat by exp(-i w x); the cache always holds
    the unshifted values.
    """
    cache = _check_cache(cf, cache)
    m, J = g.m, g.J_density
    if g.kappa > J:
        warnings.warn(
            f"kappa={g.kappa} exceeds J={J}: coefficients near k=kappa lose accuracy",
            AccuracyWarning,
            stacklevel=2,
        )
    k = g.indices
    scale = 2.0 ** (m / 2) / J
    if v is DensityVariant.MIDPOINT_VIETA:
        vals = scale * _midpoint(cache, m, J, k, x)
    elif v is DensityVariant.SIMPSON:
        vals = scale * (
            (2.0 / 3.0) * _midpoint(cache, m, J, k, x) + (1.0 / 3.0) * _trapezoid(cache, m, J, k, x)
        )
    else:
        vals = scale * _trapezoid(cache, m, J, k, x)
        if v is DensityVariant.TRAPEZOID_D1:
            vals = vals + _trapezoid_end_correction(cf, cache, m, J, k, x)
    return CoefficientVector(m, vals)


def _trapezoid_end_correction(cf, cache, m, J, k, x):
    # Euler-Maclaurin term -(h^2/12)(H'(pi) - H'(0)) of the Parseval integrand
    top = 2.0**m * math.pi
    f_top = cache.lookup(np.array([1]), -m)[0]
    d_top = complex(cf.derivative(top))
    d_zero = complex(cf.derivative(0.0))
    if x != 0.0:
        shift = np.exp(-1j * top * x)
        d_top = (d_top - 1j * x * f_top) * shift
        f_top = f_top * shift
        d_zero = d_zero - 1j * x
    sign = np.where(k % 2 == 0, 1.0, -1.0)
    bracket = 1j * math.pi * k * (f_top * sign - 1.0) + top * (d_top * sign - d_zero)
    return -(2.0 ** (m / 2)) / (12.0 * J * J) * np.real(bracket)


def density_sum_residual(coeffs: CoefficientVector, ends: str = "half") -> float:
    """eps_f = |1 - 2^{-m/2} sum_k c_{m,k}|.

    With ``ends="half"`` (default) the two boundary coefficients enter with
    weight 1/2, i.e. the trapezoidal integral of the reconstructed density
    over the truncation interval. ``ends="plain"`` is the unweighted sum.
    """
    c = coeffs.values
    if ends == "half":
        total = c.sum() - 0.5 * (c[0] + c[-1])
    elif ends == "plain":
        total = c.sum()
    else:
        raise ValueError(f"ends must be 'half' or 'plain', got {ends!r}")
    return abs(1.0 - 2.0 ** (-coeffs.m / 2) * total)


def double_J(cache: CfEvaluationCache, cf: CharacteristicFunction, g: SwiftGrid) -> SwiftGrid:
    """Same grid with J_density doubled.

    Under the trapezoid rules the next ``density_coeffs`` call evaluates
    only the J new odd-index nodes; mid-point nodes at J and 2J are
    disjoint, so that rule pays 2J.
    """
    _check_cache(cf, cache)
    return replace(g, J_density=2 * g.J_density)
