import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from swiftpricing.numerics import (
    QuadratureRule,
    fft_forward,
    frequency_grid,
    is_power_of_two,
)


def naive_dft(a):
    n = len(a)
    j = np.arange(n)
    return np.exp(-2j * np.pi * np.outer(j, j) / n) @ a


def test_impulse_gives_ones():
    a = np.zeros(16)
    a[0] = 1.0
    np.testing.assert_allclose(fft_forward(a), np.ones(16), atol=1e-15)


def test_constant_sequence():
    out = fft_forward(np.ones(8))
    np.testing.assert_allclose(out, [8, 0, 0, 0, 0, 0, 0, 0], atol=1e-14)


@pytest.mark.parametrize("log2n", range(0, 11))
def test_matches_naive_dft(log2n):
    rng = np.random.default_rng(log2n)
    n = 2**log2n
    a = rng.normal(size=n) + 1j * rng.normal(size=n)
    ref = naive_dft(a)
    err = np.max(np.abs(fft_forward(a) - ref)) / np.max(np.abs(ref))
    assert err <= 1e-12


def test_matches_numpy_large():
    rng = np.random.default_rng(7)
    a = rng.normal(size=2**16) + 1j * rng.normal(size=2**16)
    ref = np.fft.fft(a)
    assert np.max(np.abs(fft_forward(a) - ref)) / np.max(np.abs(ref)) < 1e-13


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 8),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False),
    st.integers(0, 2**31),
)
def test_linearity(log2n, a, b, seed):
    rng = np.random.default_rng(seed)
    n = 2**log2n
    x = rng.normal(size=n) + 1j * rng.normal(size=n)
    y = rng.normal(size=n) + 1j * rng.normal(size=n)
    lhs = fft_forward(a * x + b * y)
    rhs = a * fft_forward(x) + b * fft_forward(y)
    scale = max(1.0, np.max(np.abs(rhs)))
    assert np.max(np.abs(lhs - rhs)) <= 1e-12 * scale


def test_conjugate_symmetry_for_real_input():
    x = np.random.default_rng(3).normal(size=64)
    out = fft_forward(x)
    n = np.arange(1, 64)
    np.testing.assert_allclose(out[n], np.conj(out[64 - n]), atol=1e-12)


@pytest.mark.parametrize("n", [0, 3, 6, 12, 100])
def test_rejects_non_power_of_two(n):
    with pytest.raises(ValueError, match="power of two"):
        fft_forward(np.ones(n))


def test_input_not_modified():
    a = np.arange(8, dtype=complex)
    b = a.copy()
    fft_forward(a)
    np.testing.assert_array_equal(a, b)


@pytest.mark.parametrize("n, expected", [(1, True), (2, True), (1024, True), (0, False), (6, False)])
def test_is_power_of_two(n, expected):
    assert is_power_of_two(n) is expected


def test_frequency_grids():
    mid = frequency_grid(4, QuadratureRule.MIDPOINT)
    np.testing.assert_allclose(mid.nodes, np.pi * np.array([1, 3, 5, 7]) / 8)
    assert mid.weights.sum() == 4
    trap = frequency_grid(4, QuadratureRule.TRAPEZOID)
    np.testing.assert_allclose(trap.nodes, np.pi * np.arange(5) / 4)
    assert trap.weights[0] == trap.weights[-1] == 0.5
    assert trap.weights.sum() == 4
