"""Characteristic functions of the centered log-forward X = ln(F_T / F).

Throughout the package the transform convention is

    fhat(w) = E[exp(-i w X)] = psi(-w)

where psi is the usual characteristic function E[exp(i u X)]. Both models
are martingale-normalized, E[exp(X)] = 1.
"""
from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp


@dataclass(frozen=True)
class HestonParams:
    kappa: float
    theta: float
    sigma: float
    rho: float
    v0: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")
        if self.v0 < 0 or self.theta < 0 or self.kappa < 0:
            raise ValueError("kappa, theta and v0 must be non-negative")
        if not -1 < self.rho < 1:
            raise ValueError(f"rho must lie in (-1, 1), got {self.rho}")


class OptionStyle(enum.Enum):
    PUT = "put"
    CALL = "call"


@dataclass(frozen=True)
class VanillaContract:
    forward: float
    strike: float
    maturity: float
    discount: float = 1.0
    style: OptionStyle = OptionStyle.PUT

    def __post_init__(self):
        if not (self.forward > 0 and self.strike > 0 and self.maturity > 0):
            raise ValueError("forward, strike and maturity must be positive")
        if not 0 < self.discount <= 1:
            raise ValueError(f"discount must lie in (0, 1], got {self.discount}")

    @property
    def log_moneyness(self) -> float:
        return math.log(self.forward / self.strike)


def _central_difference(f, w, h):
    # 4th-order central difference
    return (f(w - 2 * h) - 8 * f(w - h) + 8 * f(w + h) - f(w + 2 * h)) / (12 * h)


@dataclass(frozen=True)
class CharacteristicFunction:
    """Immutable, vectorized fhat together with the metadata pricing needs.

    ``decay_order`` is nu in |fhat(w)| <= C exp(-d |w|^nu).
    """

    evaluate: Callable[[np.ndarray], np.ndarray]
    cumulants: tuple
    maturity: float
    decay_order: float
    decay_known: bool = True
    analytic_derivative: Optional[Callable[[np.ndarray], np.ndarray]] = field(default=None, repr=False)

    def __call__(self, w):
        return self.evaluate(w)

    def derivative(self, w):
        if self.analytic_derivative is not None:
            return self.analytic_derivative(np.asarray(w, dtype=float))
        w = np.asarray(w, dtype=float)
        h = np.maximum(1e-5, 1e-7 * np.abs(w))
        return _central_difference(self.evaluate, w, h)


def cf_derivative(cf: CharacteristicFunction, w):
    """fhat'(w); analytic when the model provides it, else 4th-order differences."""
    return cf.derivative(w)


def _symmetric(evaluate_nonneg):
    # fhat(-w) = conj(fhat(w)) for a real density; evaluating on |w| makes it exact
    def evaluate(w):
        w = np.asarray(w, dtype=float)
        v = evaluate_nonneg(np.abs(w))
        return np.where(w < 0, np.conj(v), v)

    return evaluate


# ---------------------------------------------------------------- Black-Scholes

def bs_cf(vol: float, T: float) -> CharacteristicFunction:
    if not (vol > 0 and T > 0):
        raise ValueError("vol and T must be positive")
    var = vol * vol * T

    def evaluate(w):
        w = np.asarray(w, dtype=float)
        return np.exp(-0.5 * var * (w * w - 1j * w))

    def derivative(w):
        return evaluate(w) * (-0.5 * var * (2 * w - 1j))

    return CharacteristicFunction(
        evaluate=evaluate,
        cumulants=(-0.5 * var, var, 0.0),
        maturity=T,
        decay_order=2.0,
        analytic_derivative=derivative,
    )


# ---------------------------------------------------------------------- Heston

def heston_psi(u, p: HestonParams, T: float) -> np.ndarray:
    """psi(u) = E[exp(i u X)] for complex u, in the rotation-count-free form.

    Uses the root with Re(d) >= 0 and g = (xi - d)/(xi + d), so the complex
    logarithm never crosses its branch cut. The factors (xi - d)/sigma^2 and
    log(...)/sigma^2 are evaluated without cancellation, which keeps the
    sigma -> 0 limit stable.
    """
    u = np.asarray(u, dtype=np.complex128)
    s2 = p.sigma * p.sigma
    iu = 1j * u
    xi = p.kappa - p.rho * p.sigma * iu
    b = u * u + iu
    d = np.sqrt(xi * xi + s2 * b)
    s = xi + d
    # psi(0) = 1; masking it here also keeps 0/0 out of the unused branch
    zero = (s == 0) | (u == 0)
    s = np.where(zero, 1.0, s)
    q = -b / s  # (xi - d) / sigma^2
    g = s2 * q / s
    e = np.exp(-d * T)
    one_minus_ge = 1 - g * e
    B = q * (1 - e) / one_minus_ge
    # log((1 - g e)/(1 - g)) / sigma^2 = log1p(z)/z * z/sigma^2
    z_over_s2 = q * (1 - e) / (s * (1 - g))
    z = s2 * z_over_s2
    small = np.abs(z) < 1e-8
    z_safe = np.where(small, 1.0, z)
    ratio = np.where(small, 1 - z / 2 + z * z / 3, np.log1p(z_safe) / z_safe)
    A = p.kappa * p.theta * (q * T - 2 * ratio * z_over_s2)
    out = np.exp(A + p.v0 * B)
    return np.where(zero, 1.0 + 0j, out)


def heston_dpsi(u, p: HestonParams, T: float) -> np.ndarray:
    """d psi / du, differentiating the same cancellation-free expressions."""
    u = np.asarray(u, dtype=np.complex128)
    s2 = p.sigma * p.sigma
    iu = 1j * u
    xi = p.kappa - p.rho * p.sigma * iu
    dxi = -1j * p.rho * p.sigma
    b = u * u + iu
    db = 2 * u + 1j
    d = np.sqrt(xi * xi + s2 * b)
    d = np.where(d == 0, 1e-300, d)
    dd = (xi * dxi + 0.5 * s2 * db) / d
    s = xi + d
    ds = dxi + dd
    q = -b / s
    dq = -(db * s - b * ds) / (s * s)
    g_s2 = q / s  # g / sigma^2
    dg_s2 = dq / s - q * ds / (s * s)
    g = s2 * g_s2
    e = np.exp(-d * T)
    de = -T * dd * e
    one_ge = 1 - g * e
    dB = (dq * (1 - e) - q * de) / one_ge + q * (1 - e) * s2 * (dg_s2 * e + g_s2 * de) / one_ge**2
    # derivative of log((1 - g e)/(1 - g)) / sigma^2
    dlog = -(dg_s2 * e + g_s2 * de) / one_ge + dg_s2 / (1 - g)
    dA = p.kappa * p.theta * (dq * T - 2 * dlog)
    return heston_psi(u, p, T) * (dA + p.v0 * dB)


def heston_cumulants(p: HestonParams, T: float) -> tuple:
    """(c1, c2, c4) of X = ln(F_T/F).

    log E[exp(sX)] = A(T; s) + v0 B(T; s) with B, A solving the Heston
    Riccati equations. Expanding B = sum_n b_n s^n gives a triangular system
    of linear ODEs for b_1..b_4 (and a_n' = kappa theta b_n); the cumulants
    are n! (a_n + v0 b_n). Integrating the series ODE avoids the
    1/kappa^k cancellations of the closed forms, so kappa = 0 needs no
    special case.
    """
    k, th, sg, r = p.kappa, p.theta, p.sigma, p.rho
    s2 = sg * sg

    def rhs(_, y):
        b1, b2, b3, b4 = y[:4]
        return [
            -0.5 - k * b1,
            0.5 + r * sg * b1 - k * b2 + 0.5 * s2 * b1 * b1,
            r * sg * b2 - k * b3 + s2 * b1 * b2,
            r * sg * b3 - k * b4 + 0.5 * s2 * (2 * b1 * b3 + b2 * b2),
            k * th * b1,
            k * th * b2,
            k * th * b3,
            k * th * b4,
        ]

    sol = solve_ivp(rhs, (0.0, T), np.zeros(8), method="DOP853", rtol=1e-13, atol=1e-16)
    if not sol.success:
        raise RuntimeError(f"cumulant ODE failed: {sol.message}")
    y = sol.y[:, -1]
    c1 = y[4] + p.v0 * y[0]
    c2 = 2 * (y[5] + p.v0 * y[1])
    c4 = 24 * (y[7] + p.v0 * y[3])
    return (float(c1), float(c2), float(c4))


def heston_cf(p: HestonParams, T: float) -> CharacteristicFunction:
    if not T > 0:
        raise ValueError("T must be positive")
    evaluate = _symmetric(lambda w: heston_psi(-w, p, T))

    def derivative(w):
        # fhat'(w) = -psi'(-w); conjugate symmetry gives fhat'(-w) = -conj(fhat'(w))
        w = np.asarray(w, dtype=float)
        v = -heston_dpsi(-np.abs(w), p, T)
        return np.where(w < 0, -np.conj(v), v)

    return CharacteristicFunction(
        evaluate=evaluate,
        cumulants=heston_cumulants(p, T),
        maturity=T,
        decay_order=1.0,
        analytic_derivative=derivative,
    )


# ---------------------------------------------------------- JSON model schema

_MODEL_KEYS = {
    "heston": ("kappa", "theta", "sigma", "rho", "v0"),
    "bs": ("vol",),
}


class ModelSpecError(ValueError):
    pass


def model_from_dict(spec: dict):
    """Parse {"model": "heston", ...} or {"model": "bs", "vol": ...}.

    Returns ``HestonParams`` or the Black-Scholes volatility (float).
    """
    if not isinstance(spec, dict):
        raise ModelSpecError("model specification must be a JSON object")
    kind = spec.get("model")
    if kind not in _MODEL_KEYS:
        raise ModelSpecError(f"key 'model': expected one of {sorted(_MODEL_KEYS)}, got {kind!r}")
    allowed = set(_MODEL_KEYS[kind]) | {"model"}
    for key in spec:
        if key not in allowed:
            raise ModelSpecError(f"unknown key {key!r} for model {kind!r}")
    values = {}
    for key in _MODEL_KEYS[kind]:
        if key not in spec:
            raise ModelSpecError(f"missing key {key!r} for model {kind!r}")
        v = spec[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ModelSpecError(f"key {key!r} must be a number, got {v!r}")
        values[key] = float(v)
    if kind == "bs":
        if values["vol"] <= 0:
            raise ModelSpecError("key 'vol' must be positive")
        return values["vol"]
    try:
        return HestonParams(**values)
    except ValueError as exc:
        raise ModelSpecError(str(exc)) from None


def load_model(path) -> object:
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelSpecError(f"{path}: invalid JSON ({exc})") from None
    return model_from_dict(spec)


def make_cf(model, T: float) -> CharacteristicFunction:
    if isinstance(model, HestonParams):
        return heston_cf(model, T)
    return bs_cf(float(model), T)


def model_to_dict(model) -> dict:
    if isinstance(model, HestonParams):
        return {"model": "heston", "kappa": model.kappa, "theta": model.theta,
                "sigma": model.sigma, "rho": model.rho, "v0": model.v0}
    return {"model": "bs", "vol": float(model)}
