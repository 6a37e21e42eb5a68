"""Seeded property suite behind the ``validate`` subcommand.

Every check returns a CheckResult with the worst margin or residual seen, so
a failing run says by how much it failed.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from . import equilibrium as eq
from .angular_momentum import EnsembleSpec, multiplicity_table
from .dynamics import BlockState, block_rhs, rates_from_bath
from .equilibrium import BathSpec
from .otto import CycleSpec, cycle_work


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    metric: float
    detail: str = ""


SMALL_SPECS = [EnsembleSpec(n, ts) for n in (2, 3, 4, 6) for ts in (1, 2, 3)]


def _signed_beta(rng, lo=0.05, hi=4.0):
    return float(rng.uniform(lo, hi) * rng.choice([-1, 1]))


def check_dimension_identity(rng) -> CheckResult:
    bad = 0
    for n in range(1, 9):
        for ts in range(1, 5):
            try:
                multiplicity_table(EnsembleSpec(n, ts)).check()
            except AssertionError:
                bad += 1
    return CheckResult("dimension_identity", bad == 0, float(bad), "n<=8, 2s<=4")


def check_normalization(rng) -> CheckResult:
    worst = 0.0
    for spec in SMALL_SPECS:
        for _ in range(5):
            beta0 = float(rng.uniform(-50, 50))
            worst = max(worst, abs(eq.thermal_weights(spec, beta0).normalization() - 1))
    return CheckResult("weight_normalization", worst < 1e-12, worst)


def check_energy_ordering(rng) -> CheckResult:
    worst = math.inf
    for spec in SMALL_SPECS:
        for _ in range(10):
            beta_B = _signed_beta(rng)
            beta0 = _signed_beta(rng, 0.05, 6.0)
            if abs(abs(beta0) - abs(beta_B)) < 0.05:
                continue
            gap = eq.steady_energy(spec, beta0, beta_B) - eq.thermal_energy(spec, beta_B)
            # above the thermal energy iff |beta0| < |beta_B| (for beta_B > 0)
            expect = 1 if abs(beta0) < abs(beta_B) else -1
            if beta_B < 0:
                expect = -expect
            worst = min(worst, expect * gap)
    return CheckResult("energy_ordering", worst > 1e-10, worst, "min signed margin")


def check_entropy_monotone(rng) -> CheckResult:
    worst = math.inf
    for spec in SMALL_SPECS:
        beta_B = _signed_beta(rng)
        grid = np.linspace(0.05, 5.0, 25)
        s = np.array([eq.steady_entropy(spec, b, beta_B) for b in grid])
        worst = min(worst, float(np.min(s[:-1] - s[1:])))
        s_neg = np.array([eq.steady_entropy(spec, -b, beta_B) for b in grid])
        worst = min(worst, float(np.min(s_neg[:-1] - s_neg[1:])))
    return CheckResult("entropy_monotone_in_beta0", worst > 0, worst)


def check_entropy_mitigation(rng) -> CheckResult:
    worst = math.inf
    for spec in SMALL_SPECS:
        for _ in range(8):
            beta_B, beta0 = _signed_beta(rng), _signed_beta(rng, 0.05, 6.0)
            if abs(abs(beta0) - abs(beta_B)) < 0.05:
                continue
            s0 = eq.thermal_entropy(spec, beta0)
            coll = abs(eq.steady_entropy(spec, beta0, beta_B) - s0)
            ind = abs(eq.thermal_entropy(spec, beta_B) - s0)
            worst = min(worst, ind - coll)
    return CheckResult("entropy_change_mitigation", worst > 0, worst)


def check_free_energy_mitigation(rng) -> CheckResult:
    worst = math.inf
    for spec in SMALL_SPECS:
        for _ in range(8):
            beta_B, beta0 = _signed_beta(rng), _signed_beta(rng, 0.05, 6.0)
            if abs(abs(beta0) - abs(beta_B)) < 0.05:
                continue
            coll = abs(eq.free_energy_variation(spec, beta0, beta_B, True))
            ind = abs(eq.free_energy_variation(spec, beta0, beta_B, False))
            worst = min(worst, ind - coll)
    return CheckResult("free_energy_mitigation", worst > 0, worst)


def check_evenness(rng) -> CheckResult:
    worst = 0.0
    for spec in SMALL_SPECS:
        beta_B, beta0 = _signed_beta(rng), _signed_beta(rng)
        for f in (eq.steady_energy, eq.steady_entropy):
            worst = max(worst, abs(f(spec, beta0, beta_B) - f(spec, -beta0, beta_B)))
    return CheckResult("beta0_evenness", worst < 1e-12, worst)


def check_apparent_temperature(rng) -> CheckResult:
    worst = 0.0
    for k in range(100):
        spec = SMALL_SPECS[k % len(SMALL_SPECS)]
        beta_B, beta0 = _signed_beta(rng), _signed_beta(rng)
        t = float(eq.apparent_temperature_steady(spec, beta0, beta_B))
        worst = max(worst, abs(t * beta_B - 1))
    return CheckResult("apparent_temperature_identity", worst < 1e-10, worst)


def check_first_law(rng) -> CheckResult:
    worst = 0.0
    for _ in range(40):
        spec = SMALL_SPECS[int(rng.integers(len(SMALL_SPECS)))]
        beta_h = float(rng.uniform(0, 1))
        lam = float(rng.uniform(0.2, 1))
        beta_c = float(rng.uniform(beta_h / lam, beta_h / lam + 4)) + 1e-6
        cyc = CycleSpec(spec, _signed_beta(rng), beta_h, beta_c, lam)
        for collective in (True, False):
            rep = cycle_work(cyc, collective)
            worst = max(worst, abs(rep.Q_h + rep.Q_c + rep.work))
    return CheckResult("otto_first_law", worst < 1e-12, worst)


def check_block_fixed_point(rng) -> CheckResult:
    worst = 0.0
    for two_j in range(1, 11):
        beta_B = _signed_beta(rng)
        rates = rates_from_bath(BathSpec(beta_B))
        m = np.arange(-two_j, two_j + 1, 2) / 2
        pops = np.exp(-beta_B * m)
        block = BlockState(two_j, 1.0, np.diag(pops / pops.sum()).astype(complex))
        worst = max(worst, float(np.max(np.abs(block_rhs(block, rates)))))
    return CheckResult("block_gibbs_stationary", worst < 1e-12, worst)


def check_local_nonthermal(rng) -> CheckResult:
    worst = math.inf
    for n, ts in ((2, 2), (3, 2), (2, 3)):
        spec = EnsembleSpec(n, ts)
        pops = eq.local_populations_dicke(spec, float(rng.uniform(0.2, 3)))
        worst = min(worst, max(abs(v) for v in eq.gibbs_ratio_defects(pops).values()))
    return CheckResult("local_state_nonthermal", worst > 1e-10, worst)


def check_mirror_relation(rng) -> CheckResult:
    worst = 0.0
    for spec in SMALL_SPECS:
        b = float(rng.uniform(0.1, 4))
        lhs = eq.entropy_production(spec, math.inf, -b)
        rhs = 2 * spec.omega * b * spec.ns + eq.entropy_production(spec, math.inf, b)
        worst = max(worst, abs(lhs - rhs))
    return CheckResult("entropy_production_mirror", worst < 1e-9, worst)


ALL_CHECKS = [
    check_dimension_identity,
    check_normalization,
    check_energy_ordering,
    check_entropy_monotone,
    check_entropy_mitigation,
    check_free_energy_mitigation,
    check_evenness,
    check_apparent_temperature,
    check_first_law,
    check_block_fixed_point,
    check_local_nonthermal,
    check_mirror_relation,
]


def run_suite(seed: int = 0) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(rng) for check in ALL_CHECKS]
