"""Radix-2 FFT and the cosine-sum frequency grids.

The transform convention is the unnormalized forward DFT

    out[n] = sum_j seq[j] * exp(-2j*pi*j*n/N)

Callers that need sums of the form ``sum_j a_j exp(+i*pi*j*k/J)`` use
``conj(fft_forward(conj(a)))`` and read bin ``k mod 2J``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@lru_cache(maxsize=32)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    idx = np.arange(n, dtype=np.int64)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    rev.setflags(write=False)
    return rev


@lru_cache(maxsize=32)
def _twiddles(n: int) -> np.ndarray:
    # exp(-2i pi j / n) for j < n/2, computed directly (no recurrence drift)
    w = np.exp(-2j * np.pi * np.arange(n // 2) / n)
    w.setflags(write=False)
    return w


def fft_forward(seq) -> np.ndarray:
    """Forward DFT of a power-of-two length sequence.

    Iterative decimation-in-time radix-2 transform. Each butterfly stage is
    vectorized over all blocks; the only temporaries are one half-length
    product per stage.

    Raises
    ------
    ValueError
        If the length is not a power of two.
    """
    a = np.array(seq, dtype=np.complex128)
    if a.ndim != 1:
        raise ValueError("fft_forward expects a one-dimensional sequence")
    n = a.shape[0]
    if not is_power_of_two(n):
        raise ValueError(f"FFT length must be a power of two, got {n}")
    if n == 1:
        return a
    a = a[_bit_reversal(n)]
    w_all = _twiddles(n)
    size = 2
    while size <= n:
        half = size // 2
        w = w_all[:: n // size]
        blocks = a.reshape(-1, size)
        t = blocks[:, half:] * w
        blocks[:, half:] = blocks[:, :half] - t
        blocks[:, :half] += t
        size *= 2
    return a


class QuadratureRule(enum.Enum):
    MIDPOINT = "midpoint"
    TRAPEZOID = "trapezoid"


@dataclass(frozen=True)
class FrequencyGrid:
    """Nodes and weights of a J-point rule on [0, pi].

    ``numerators``/``denominator`` give each node exactly as a multiple of
    pi: node_j = pi * numerators[j] / denominator.
    """

    J: int
    rule: QuadratureRule
    numerators: np.ndarray
    denominator: int
    weights: np.ndarray

    @property
    def nodes(self) -> np.ndarray:
        return np.pi * self.numerators / self.denominator


def frequency_grid(J: int, rule: QuadratureRule) -> FrequencyGrid:
    if J < 1:
        raise ValueError("J must be a positive integer")
    if rule is QuadratureRule.MIDPOINT:
        num = 2 * np.arange(1, J + 1, dtype=np.int64) - 1
        return FrequencyGrid(J, rule, num, 2 * J, np.ones(J))
    num = np.arange(J + 1, dtype=np.int64)
    w = np.ones(J + 1)
    w[0] = w[-1] = 0.5
    return FrequencyGrid(J, rule, num, J, w)
