"""Finite cosine-sum approximations of sinc(x) = sin(pi x)/(pi x).

All of them discretize sinc(x) = (1/pi) int_0^pi cos(t x) dt:

* VIETA_MIDPOINT: mid-point rule, identical to the truncated Vieta product.
* TRAPEZOID: trapezoidal rule on the nodes pi j / J.
* MIDPOINT_D1 / TRAPEZOID_D1: the above plus the first Euler-Maclaurin
  derivative term.
* SIMPSON: composite Simpson on 2J intervals, i.e. 2/3 mid-point + 1/3
  trapezoid at the same J.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .numerics import QuadratureRule, frequency_grid

# First Euler-Maclaurin constant of the mid-point expansion; the trapezoid
# analogue is A1 = 2 * B1.
B1 = 1.0 / 24.0
A1 = 2.0 * B1
# b_k < RATIO * b_{k-1} for the higher mid-point constants
RATIO = 0.08


class SincKind(enum.Enum):
    VIETA_MIDPOINT = "vieta_midpoint"
    TRAPEZOID = "trapezoid"
    MIDPOINT_D1 = "midpoint_d1"
    TRAPEZOID_D1 = "trapezoid_d1"
    SIMPSON = "simpson"


@dataclass(frozen=True)
class SincVariant:
    kind: SincKind
    J: int

    def __post_init__(self):
        if self.J < 1:
            raise ValueError("J must be >= 1")


def _cosine_sum(x: np.ndarray, rule: QuadratureRule, J: int) -> np.ndarray:
    grid = frequency_grid(J, rule)
    # np.sum over the contiguous last axis is pairwise
    terms = np.cos(np.multiply.outer(x, grid.nodes)) * grid.weights
    return terms.sum(axis=-1) / J


def sinc_approx(x, v: SincVariant):
    """Evaluate the chosen approximation of sinc at ``x`` (scalar or array)."""
    xa = np.asarray(x, dtype=float)
    J = v.J
    k = v.kind
    if k is SincKind.SIMPSON:
        out = (2.0 / 3.0) * _cosine_sum(xa, QuadratureRule.MIDPOINT, J) + (
            1.0 / 3.0
        ) * _cosine_sum(xa, QuadratureRule.TRAPEZOID, J)
    elif k in (SincKind.VIETA_MIDPOINT, SincKind.MIDPOINT_D1):
        out = _cosine_sum(xa, QuadratureRule.MIDPOINT, J)
        if k is SincKind.MIDPOINT_D1:
            out = out - np.pi * xa / (24.0 * J * J) * np.sin(np.pi * xa)
    else:
        out = _cosine_sum(xa, QuadratureRule.TRAPEZOID, J)
        if k is SincKind.TRAPEZOID_D1:
            out = out + np.pi * xa / (12.0 * J * J) * np.sin(np.pi * xa)
    return out if np.ndim(x) else float(out)


def sinc_error_bound(x: float, J: int, trapezoid: bool = False) -> float:
    """Upper bound on |sinc(x) - mid-point sum| from the Euler-Maclaurin series.

    b1 pi |x| / J^2 / (1 - 0.08 pi^2 x^2 / J^2). With ``trapezoid=True`` the
    leading constant is a1 = 2 b1, which bounds the trapezoidal sum instead.
    The geometric series only converges for J > pi sqrt(0.08) |x|; any
    J >= ceil(|x|) satisfies this.
    """
    if J < 1:
        raise ValueError("J must be >= 1")
    ax = abs(float(x))
    r = RATIO * (math.pi * ax / J) ** 2
    if r >= 1.0:
        raise ValueError(
            f"bound diverges: need J > pi*sqrt(0.08)*|x| = {math.pi * math.sqrt(RATIO) * ax:.6g}, got J={J}"
        )
    lead = A1 if trapezoid else B1
    return lead * math.pi * ax / (J * J) / (1.0 - r)
