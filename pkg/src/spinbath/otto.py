"""Quantum Otto cycle with a spin-ensemble working medium.

Strokes: hot isochore at beta_h (state rho_1 w.r.t. H), adiabat H -> lam*H,
cold isochore at beta_c (state rho_2 w.r.t. lam*H), adiabat back. Because
rho_2 is thermal with respect to lam*H its energy under H is E(lam*beta_c).
Work is negative when extracted.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np
from scipy.optimize import bisect

from .angular_momentum import EnsembleSpec
from .equilibrium import (
    _ladder,
    _sector_weights,
    block_energy_slope,
    steady_energy,
    steady_entropy,
    thermal_energy,
    thermal_entropy,
)
from .errors import DomainError

BETA_L_START = 1e-3
BETA_L_DOUBLINGS = 60
BETA_L_TOL = 1e-10


@dataclass(frozen=True)
class CycleSpec:
    """Engine mode requires lam*beta_c >= beta_h; refrigerator mode the reverse.

    Equality is accepted: it is the zero-work degenerate cycle.
    """

    spec: EnsembleSpec
    beta0: float
    beta_h: float
    beta_c: float
    lam: float
    refrigerator: bool = False

    def __post_init__(self):
        if math.isnan(self.beta0):
            raise DomainError("beta0 is NaN")
        if not (math.isfinite(self.beta_h) and self.beta_h >= 0):
            raise DomainError(f"beta_h must be finite and >= 0, got {self.beta_h!r}")
        if not (math.isfinite(self.beta_c) and self.beta_c > self.beta_h):
            raise DomainError(f"beta_c must be finite and > beta_h, got {self.beta_c!r}")
        if not 0 < self.lam <= 1:
            raise DomainError(f"lam must lie in (0, 1], got {self.lam!r}")
        cold = self.lam * self.beta_c
        if not self.refrigerator and cold < self.beta_h:
            raise DomainError("engine mode needs lam*beta_c >= beta_h")
        if self.refrigerator and cold > self.beta_h:
            raise DomainError("refrigerator mode needs lam*beta_c <= beta_h")


@dataclass(frozen=True)
class CycleReport:
    work_coh: float
    work_inc: float
    Q_h: float
    Q_c: float
    efficiency: float
    enhancement_ratio: float
    amplified: bool
    collective: bool

    @property
    def work(self) -> float:
        return self.work_coh if self.collective else self.work_inc


def _energies(cycle: CycleSpec, collective: bool):
    spec, cold = cycle.spec, cycle.lam * cycle.beta_c
    if collective:
        return steady_energy(spec, cycle.beta0, cycle.beta_h), steady_energy(spec, cycle.beta0, cold)
    return thermal_energy(spec, cycle.beta_h), thermal_energy(spec, cold)


def _work(e1, e2, lam):
    return -(1 - lam) * (e1 - e2)


def cycle_work(cycle: CycleSpec, collective: bool = True) -> CycleReport:
    """Works for both couplings; heats and efficiency for the selected one."""
    e1c, e2c = _energies(cycle, True)
    e1i, e2i = _energies(cycle, False)
    w_coh = _work(e1c, e2c, cycle.lam)
    w_inc = _work(e1i, e2i, cycle.lam)
    e1, e2 = (e1c, e2c) if collective else (e1i, e2i)
    q_h = e1 - e2
    q_c = cycle.lam * (e2 - e1)
    ratio = w_coh / w_inc if w_inc != 0 else math.nan
    return CycleReport(
        work_coh=w_coh,
        work_inc=w_inc,
        Q_h=q_h,
        Q_c=q_c,
        efficiency=1 - cycle.lam,
        enhancement_ratio=ratio,
        amplified=amplification_condition(cycle),
        collective=collective,
    )


def entropy_differences(cycle: CycleSpec):
    """(S_inf(beta_h) - S_inf(lam beta_c), S_th(beta_h) - S_th(lam beta_c))."""
    spec, cold = cycle.spec, cycle.lam * cycle.beta_c
    coh = steady_entropy(spec, cycle.beta0, cycle.beta_h) - steady_entropy(spec, cycle.beta0, cold)
    inc = thermal_entropy(spec, cycle.beta_h) - thermal_entropy(spec, cold)
    return coh, inc


def amplification_condition(cycle: CycleSpec) -> bool:
    """True when the collective cycle moves more free energy than the independent one."""
    coh, inc = entropy_differences(cycle)
    return bool(coh > inc)


def cycle_free_energy(cycle: CycleSpec):
    """(dF_coh, dF_inc) per cycle; undefined for an infinitely hot bath."""
    if cycle.beta_h == 0:
        raise DomainError("cycle free energy is undefined at beta_h = 0")
    coh, inc = entropy_differences(cycle)
    pref = 1 / cycle.beta_c - 1 / cycle.beta_h
    return pref * coh, pref * inc


def gap_slope(spec: EnsembleSpec, beta0: float, beta: float) -> float:
    """d/d beta [E_th(beta) - E_inf(beta)]."""
    two_j, _ = _ladder(spec)
    w = _sector_weights(spec, beta0)
    single = spec.n * float(block_energy_slope(spec.two_s, beta, spec.omega))
    return single - float(np.dot(w, block_energy_slope(two_j, beta, spec.omega)))


def gap_slope_at_zero(spec: EnsembleSpec, beta0: float) -> float:
    """(omega^2/3) sum_J l_J p_J [J(J+1) - n s(s+1)]."""
    two_j, _ = _ladder(spec)
    w = _sector_weights(spec, beta0)
    jj = two_j / 2 * (two_j / 2 + 1)
    return spec.omega**2 / 3 * float(np.dot(w, jj - spec.n * spec.s * (spec.s + 1)))


def beta_l(spec: EnsembleSpec, beta0: float) -> float:
    """Positive root of gap_slope, where E_th - E_inf is largest."""
    if spec.n < 2:
        raise DomainError("no enhancement regime for a single spin")
    if not gap_slope_at_zero(spec, beta0) > 0:
        raise DomainError(
            "sum_J l_J p_J [J(J+1) - n s(s+1)] <= 0: the gap E_th - E_inf does not grow near beta = 0"
        )
    lo, hi = 0.0, BETA_L_START
    for _ in range(BETA_L_DOUBLINGS):
        if gap_slope(spec, beta0, hi) <= 0:
            break
        lo, hi = hi, 2 * hi
    else:
        raise DomainError("no sign change of the gap slope found in the scan range")
    return float(bisect(lambda b: gap_slope(spec, beta0, b), lo, hi, xtol=BETA_L_TOL))


def work_difference(spec: EnsembleSpec, beta0: float, beta_h: float, cold: float, lam: float) -> float:
    """|W_coh| - |W_inc| for hot inverse temperature beta_h and lam*beta_c = cold."""
    w_coh = _work(steady_energy(spec, beta0, beta_h), steady_energy(spec, beta0, cold), lam)
    w_inc = _work(thermal_energy(spec, beta_h), thermal_energy(spec, cold), lam)
    return abs(w_coh) - abs(w_inc)


def sweep(spec: EnsembleSpec, beta0: float, beta_h: float, lam: float, beta_c_grid) -> list[dict]:
    """Rows over beta_c: lam*beta_c, W_coh, W_inc, normalized difference, ratio."""
    rows = []
    scale = (1 - lam) * spec.omega * spec.ns
    for beta_c in beta_c_grid:
        cold = lam * float(beta_c)
        w_coh = _work(steady_energy(spec, beta0, beta_h), steady_energy(spec, beta0, cold), lam)
        w_inc = _work(thermal_energy(spec, beta_h), thermal_energy(spec, cold), lam)
        rows.append(
            {
                "lam_beta_c": cold,
                "W_coh": w_coh,
                "W_inc": w_inc,
                "diff_norm": (abs(w_coh) - abs(w_inc)) / scale if scale else math.nan,
                "ratio": w_coh / w_inc if w_inc else math.nan,
            }
        )
    return rows
