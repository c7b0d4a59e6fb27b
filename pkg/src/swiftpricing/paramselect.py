"""Choice of the SWIFT discretization (m, kappa, J, c).

The pipeline is: scale m from the decay of fhat, an initial half-width c
from the cumulants, (kappa, J) from (c, m), and an optional refinement
loop driven by the density-sum residual eps_f.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .density import (
    CfEvaluationCache,
    DensityVariant,
    SwiftGrid,
    density_coeffs,
    density_sum_residual,
)
from .models import CharacteristicFunction


class ScaleRule(enum.Enum):
    MAREE = "maree"
    LEITAO = "leitao"


class JRule(enum.Enum):
    PI_KAPPA = "pi_kappa"
    KAPPA = "kappa"
    KAPPA_PLUS1 = "kappa_plus1"


class RefineRule(enum.Enum):
    ROMO = "romo"
    LEITAO = "leitao"
    NONE = "none"


class SelectionError(RuntimeError):
    """Raised when the scale search hits its cap."""


@dataclass(frozen=True)
class ToleranceConfig:
    eps_m: float = 1e-8
    eps_f: float = 1e-8
    L: float = 8.0
    scale_rule: ScaleRule = ScaleRule.LEITAO
    j_rule: JRule = JRule.PI_KAPPA
    refine_rule: RefineRule = RefineRule.LEITAO
    # c <- growth * c per LEITAO step
    growth: float = 2.0 ** 0.25
    max_m: int = 25
    max_kappa: int = 2**20
    max_iter: int = 500
    residual_variant: DensityVariant = DensityVariant.TRAPEZOID

    def __post_init__(self):
        if not (self.eps_m > 0 and self.eps_f > 0):
            raise ValueError("tolerances must be positive")
        if self.L < 0:
            raise ValueError("L must be non-negative")
        if not self.growth > 1:
            raise ValueError("growth factor must exceed 1")


@dataclass(frozen=True)
class TraceRecord:
    m: int
    kappa: int
    log2J: int
    eps_f: float


@dataclass
class SelectionTrace:
    records: list = field(default_factory=list)
    converged: bool = False

    def append(self, g: SwiftGrid, eps_f: float):
        self.records.append(TraceRecord(g.m, g.kappa, g.log2_J, eps_f))

    @property
    def last(self) -> TraceRecord:
        return self.records[-1]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["iter", "m", "kappa", "log2J", "eps_f"])
            for i, r in enumerate(self.records):
                w.writerow([i, r.m, r.kappa, r.log2J, f"{r.eps_f:.17g}"])


def scale_residual(cf: CharacteristicFunction, m: int, T: float, rule: ScaleRule) -> float:
    """eps_m at scale m."""
    w = math.ldexp(math.pi, m)
    tail = float(np.abs(cf(-w)) + np.abs(cf(w)))
    if rule is ScaleRule.LEITAO:
        return tail / (2 * math.pi)
    nu = cf.decay_order
    return w ** (1 - nu) / (2 * math.pi * nu * T) * tail


def select_scale(cf: CharacteristicFunction, T: float, cfg: ToleranceConfig, m_start: int = 0) -> int:
    """Smallest m >= m_start with eps_m(m) <= cfg.eps_m."""
    eps = math.inf
    for m in range(m_start, cfg.max_m + 1):
        eps = scale_residual(cf, m, T, cfg.scale_rule)
        if eps <= cfg.eps_m:
            return m
    raise SelectionError(
        f"scale search reached m={cfg.max_m} with eps_m={eps:.3e} > {cfg.eps_m:.3e}"
    )


def initial_halfwidth(cf: CharacteristicFunction, cfg: ToleranceConfig) -> float:
    """c = |c1| + L sqrt(|c2| + sqrt|c4|)."""
    c1, c2, c4 = cf.cumulants
    return abs(c1) + cfg.L * math.sqrt(abs(c2) + math.sqrt(abs(c4)))


def log2_J(kappa: int, rule: JRule) -> int:
    if rule is JRule.PI_KAPPA:
        return math.ceil(math.log2(math.pi * kappa))
    base = (kappa - 1).bit_length()  # exact ceil(log2 kappa)
    return base + 1 if rule is JRule.KAPPA_PLUS1 else base


def grid_from_halfwidth(
    c: float, m: int, cfg: ToleranceConfig, J_payoff: int | None = None
) -> SwiftGrid:
    """kappa = ceil(2^m c) with J from ``cfg.j_rule``; J_payoff defaults to J."""
    if not c > 0:
        raise ValueError("half-width c must be positive")
    kappa = max(1, math.ceil(math.ldexp(c, m)))
    J = 2 ** log2_J(kappa, cfg.j_rule)
    return SwiftGrid(m=m, kappa=kappa, J_density=J, J_payoff=J_payoff or J, c=c)


def _residual(cf, g, cfg, cache):
    coeffs = density_coeffs(cf, g, cfg.residual_variant, cache)
    return density_sum_residual(coeffs)


def refine(
    cf: CharacteristicFunction,
    g0: SwiftGrid,
    cfg: ToleranceConfig,
    cache: CfEvaluationCache | None = None,
) -> tuple[SwiftGrid, SelectionTrace]:
    """Iterate until eps_f <= cfg.eps_f.

    ROMO keeps c and raises m; LEITAO keeps m and grows c. When a cap is
    hit the grid with the smallest eps_f is returned and the trace's
    ``converged`` flag stays False.
    """
    cache = cache if cache is not None else CfEvaluationCache(cf)
    trace = SelectionTrace()
    g = g0
    best, best_eps = g0, math.inf
    for _ in range(cfg.max_iter):
        eps = _residual(cf, g, cfg, cache)
        trace.append(g, eps)
        if eps < best_eps:
            best, best_eps = g, eps
        if eps <= cfg.eps_f:
            trace.converged = True
            return g, trace
        if cfg.refine_rule is RefineRule.NONE:
            break
        if cfg.refine_rule is RefineRule.ROMO:
            if g.m + 1 > cfg.max_m:
                break
            nxt = grid_from_halfwidth(g0.c, g.m + 1, cfg)
        else:
            nxt = grid_from_halfwidth(g.c * cfg.growth, g.m, cfg)
        if nxt.kappa > cfg.max_kappa:
            break
        g = nxt
    return best, trace


def select_grid(
    cf: CharacteristicFunction,
    cfg: ToleranceConfig,
    m: int | None = None,
    cache: CfEvaluationCache | None = None,
) -> tuple[SwiftGrid, SelectionTrace]:
    """Full selection: scale (unless ``m`` is given), initial width, refinement."""
    if m is None:
        m = select_scale(cf, cf.maturity, cfg)
    g0 = grid_from_halfwidth(initial_halfwidth(cf, cfg), m, cfg)
    return refine(cf, g0, cfg, cache)
