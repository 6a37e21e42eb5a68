"""Closed-form steady-state thermodynamics under collective dissipation.

Conventions: hbar = k_B = 1, energies are measured from the ground state
(so they lie in [0, 2*omega*n*s]), entropies are in nats, and an inverse
temperature enters only through x = omega * beta. ``beta0 = +-inf`` is a
valid initial temperature (all weight in the symmetric J = ns sector);
bath inverse temperatures must be finite.

Sector quantities are indexed by twice the total spin, ``two_j``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.special import gammaln, logsumexp

from ._special import langevin, langevin_prime, log_sinhc
from .angular_momentum import EnsembleSpec, multiplicity_table
from .errors import DomainError, UndefinedTemperatureError


@dataclass(frozen=True)
class BathSpec:
    """Bath with signed inverse temperature and an overall rate scale."""

    beta_B: float
    gamma: float = 1.0

    def __post_init__(self):
        if math.isnan(self.beta_B):
            raise DomainError("beta_B is NaN")
        if not self.gamma > 0:
            raise DomainError(f"gamma must be positive, got {self.gamma!r}")


@dataclass(frozen=True)
class ThermalWeights:
    spec: EnsembleSpec
    beta0: float
    log_p: dict

    def p(self, two_j: int) -> float:
        return math.exp(self.log_p[two_j])

    def normalization(self) -> float:
        """sum_J l_J p_J, which must equal 1."""
        table = multiplicity_table(self.spec)
        terms = [
            math.log(table.l[tj]) + lp for tj, lp in self.log_p.items() if table.l[tj] > 0
        ]
        return float(np.exp(logsumexp(terms)))


@dataclass(frozen=True)
class SteadyStateSummary:
    energy: float
    entropy: float
    free_energy_variation: float
    entropy_production: float
    apparent_temperature: float


def _finite_beta(beta, name="beta_B"):
    beta = float(beta)
    if not math.isfinite(beta):
        raise DomainError(f"{name} must be finite, got {beta!r}")
    return beta


# ---------------------------------------------------------------------------
# single-block functions


def log_partition_block(two_j, beta, omega=1.0):
    """ln Z_J(beta) with Z_J = sum_{m=-J}^{J} exp(-m omega beta)."""
    two_j = np.asarray(two_j)
    y = 0.5 * omega * np.asarray(beta, dtype=float)
    out = np.log(two_j + 1.0) + log_sinhc((two_j + 1) * y) - log_sinhc(y)
    return out[()] if out.ndim == 0 else out


def block_energy(two_j, beta, omega=1.0):
    """e_J(beta) = omega <J_z> in the Gibbs state of one spin-J block."""
    two_j = np.asarray(two_j)
    y = 0.5 * omega * np.asarray(beta, dtype=float)
    out = 0.5 * omega * (langevin(y) - (two_j + 1) * langevin((two_j + 1) * y))
    return out[()] if out.ndim == 0 else out


def block_energy_slope(two_j, beta, omega=1.0):
    """d e_J / d beta (always <= 0)."""
    two_j = np.asarray(two_j)
    y = 0.5 * omega * np.asarray(beta, dtype=float)
    out = 0.25 * omega**2 * (langevin_prime(y) - (two_j + 1) ** 2 * langevin_prime((two_j + 1) * y))
    return out[()] if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# sector weights


@lru_cache(maxsize=256)
def _ladder(spec: EnsembleSpec):
    table = multiplicity_table(spec)
    two_j = np.array(list(spec.two_j_values))
    with np.errstate(divide="ignore"):
        log_l = np.array([math.log(table.l[tj]) if table.l[tj] else -np.inf for tj in two_j])
    two_j.setflags(write=False)
    log_l.setflags(write=False)
    return two_j, log_l


def _log_p(spec: EnsembleSpec, beta0: float) -> np.ndarray:
    two_j, _ = _ladder(spec)
    beta0 = float(beta0)
    if math.isnan(beta0):
        raise DomainError("beta0 is NaN")
    if math.isinf(beta0):
        out = np.full(two_j.shape, -np.inf)
        out[-1] = 0.0
        return out
    omega = spec.omega
    return log_partition_block(two_j, beta0, omega) - spec.n * log_partition_block(spec.two_s, beta0, omega)


def _log_sector_weights(spec, beta0):
    """ln(l_J p_J); the sector weights sum to one."""
    _, log_l = _ladder(spec)
    return log_l + _log_p(spec, beta0)


def _sector_weights(spec, beta0):
    return np.exp(_log_sector_weights(spec, beta0))


def thermal_weights(spec: EnsembleSpec, beta0: float) -> ThermalWeights:
    two_j, _ = _ladder(spec)
    log_p = _log_p(spec, beta0)
    return ThermalWeights(spec, float(beta0), {int(tj): float(lp) for tj, lp in zip(two_j, log_p)})


# ---------------------------------------------------------------------------
# energy


def steady_energy(spec: EnsembleSpec, beta0: float, beta_B: float) -> float:
    """Energy of the collective steady state reached from a Gibbs state at beta0."""
    beta_B = _finite_beta(beta_B)
    two_j, _ = _ladder(spec)
    w = _sector_weights(spec, beta0)
    e = block_energy(two_j, beta_B, spec.omega)
    return float(np.dot(w, e) + spec.omega * spec.ns)


def thermal_energy(spec: EnsembleSpec, beta_B: float) -> float:
    """n times the single-spin Gibbs energy (independent dissipation)."""
    beta_B = float(beta_B)
    if math.isinf(beta_B):
        return 0.0 if beta_B > 0 else 2 * spec.omega * spec.ns
    per_spin = float(block_energy(spec.two_s, beta_B, spec.omega)) + spec.omega * spec.s
    return spec.n * per_spin


def dicke_energy(spec: EnsembleSpec, beta_B: float) -> float:
    """Steady energy for beta0 = +-inf (symmetric sector only)."""
    beta_B = _finite_beta(beta_B)
    return float(block_energy(spec.two_ns, beta_B, spec.omega)) + spec.omega * spec.ns


def energy_derivative(spec: EnsembleSpec, beta0: float, beta_B: float) -> float:
    """d E_inf / d beta0 from the symmetric pair sum over J > J'."""
    beta0 = _finite_beta(beta0, "beta0")
    beta_B = _finite_beta(beta_B)
    two_j, _ = _ladder(spec)
    w = _sector_weights(spec, beta0)
    e0 = block_energy(two_j, beta0, spec.omega)
    eB = block_energy(two_j, beta_B, spec.omega)
    total = 0.0
    for a in range(1, len(two_j)):
        b = slice(0, a)
        total += w[a] * np.sum(w[b] * (e0[a] - e0[b]) * (eB[a] - eB[b]))
    return -float(total)


def energy_derivative_sign(spec: EnsembleSpec, beta0: float, beta_B: float) -> int:
    return int(np.sign(energy_derivative(spec, beta0, beta_B)))


# ---------------------------------------------------------------------------
# entropy


def _block_entropy(two_j, beta_B, omega):
    return log_partition_block(two_j, beta_B, omega) + beta_B * block_energy(two_j, beta_B, omega)


def steady_entropy(spec: EnsembleSpec, beta0: float, beta_B: float) -> float:
    beta_B = _finite_beta(beta_B)
    two_j, _ = _ladder(spec)
    log_w = _log_sector_weights(spec, beta0)
    log_p = _log_p(spec, beta0)
    keep = np.isfinite(log_w)
    w = np.exp(log_w[keep])
    s_block = _block_entropy(two_j[keep], beta_B, spec.omega)
    return float(np.dot(w, s_block - log_p[keep]))


def thermal_entropy(spec: EnsembleSpec, beta_B: float) -> float:
    beta_B = float(beta_B)
    if math.isinf(beta_B):
        return 0.0
    return spec.n * float(_block_entropy(spec.two_s, beta_B, spec.omega))


def dicke_entropy(spec: EnsembleSpec, beta_B: float) -> float:
    beta_B = _finite_beta(beta_B)
    return float(_block_entropy(spec.two_ns, beta_B, spec.omega))


# ---------------------------------------------------------------------------
# free energy and entropy production


def _initial_energy_entropy(spec, beta0):
    return thermal_energy(spec, beta0), thermal_entropy(spec, beta0)


def _final_energy_entropy(spec, beta0, beta_B, collective):
    if collective:
        return steady_energy(spec, beta0, beta_B), steady_entropy(spec, beta0, beta_B)
    return thermal_energy(spec, beta_B), thermal_entropy(spec, beta_B)


def entropy_production(spec: EnsembleSpec, beta0: float, beta_B: float, collective: bool = True) -> float:
    """-beta_B times the free-energy variation of the relaxation.

    Evaluated as -beta_B*dE + dS, which stays finite at beta_B = 0.
    """
    beta_B = _finite_beta(beta_B)
    e0, s0 = _initial_energy_entropy(spec, beta0)
    e1, s1 = _final_energy_entropy(spec, beta0, beta_B, collective)
    return -beta_B * (e1 - e0) + (s1 - s0)


def free_energy_variation(spec: EnsembleSpec, beta0: float, beta_B: float, collective: bool = True) -> float:
    """F[final] - F[rho_th(beta0)] with F = E - S/beta_B."""
    beta_B = _finite_beta(beta_B)
    if beta_B == 0:
        raise DomainError("free energy is undefined at beta_B = 0")
    e0, s0 = _initial_energy_entropy(spec, beta0)
    e1, s1 = _final_energy_entropy(spec, beta0, beta_B, collective)
    return (e1 - e0) - (s1 - s0) / beta_B


# ---------------------------------------------------------------------------
# local state


def _log_binom(a, b):
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def local_populations_dicke(spec: EnsembleSpec, beta_B: float) -> dict:
    """Single-spin populations p_Loc(m1), keyed by 2*m1, for beta0 = +-inf.

    The J = ns irrep is the symmetric subspace of 2ns spin-1/2 factors, so the
    first spin sees a hypergeometric share of each Dicke level. For s = 1/2 this
    reduces to the K/I counting ratio; for s >= 1 the Dicke states are not
    uniform superpositions of local configurations.
    """
    beta_B = _finite_beta(beta_B)
    N, t = spec.two_ns, spec.two_s
    x = spec.omega * beta_B
    k = np.arange(N + 1)  # excitations above the ground state, m = k - ns
    log_pi = -x * k - logsumexp(-x * k)
    pops = {}
    for k1 in range(t + 1):
        kk = k[(k >= k1) & (k - k1 <= N - t)]
        terms = log_pi[kk] + _log_binom(t, k1) + _log_binom(N - t, kk - k1) - _log_binom(N, kk)
        pops[2 * k1 - t] = float(np.exp(logsumexp(terms)))
    return pops


def gibbs_ratio_defects(pops: dict) -> dict:
    """p(m+1) p(m-1) - p(m)^2 for each interior m (keyed by 2m); zero iff Gibbs."""
    keys = sorted(pops)
    return {
        keys[k]: pops[keys[k + 1]] * pops[keys[k - 1]] - pops[keys[k]] ** 2
        for k in range(1, len(keys) - 1)
    }


def local_inverse_temperature(spec: EnsembleSpec, beta0: float, beta_B: float) -> float:
    """Inverse temperature of the (two-level) single-spin state, s = 1/2 only."""
    if spec.two_s != 1:
        raise DomainError("the single-spin state is not a Gibbs state for s >= 1")
    excited = steady_energy(spec, beta0, beta_B) / (spec.n * spec.omega)
    if not 0 < excited < 1:
        raise DomainError(f"excited population {excited!r} outside (0, 1)")
    return (math.log1p(-excited) - math.log(excited)) / spec.omega


# ---------------------------------------------------------------------------
# apparent temperatures


def _ladder_factors(two_j, two_m):
    """(J+m)(J-m+1) and (J-m)(J+m+1) as exact ints."""
    up = (two_j + two_m) // 2
    down = (two_j - two_m) // 2
    return up * (down + 1), down * (up + 1)


def _temperature_from_logs(log_minus_plus, log_plus_minus, omega):
    if log_plus_minus == -np.inf:
        raise UndefinedTemperatureError("dark state: <J+ J-> vanishes")
    log_ratio = log_minus_plus - log_plus_minus
    if log_ratio == 0:
        return math.inf
    return float(omega / log_ratio)


def apparent_temperature_steady(spec: EnsembleSpec, beta0: float, beta_B: float) -> float:
    """omega / ln(<J- J+> / <J+ J->) evaluated on the collective steady state."""
    beta_B = _finite_beta(beta_B)
    if beta_B == 0:
        return math.inf
    two_j, _ = _ladder(spec)
    log_w = _log_sector_weights(spec, beta0)
    x = spec.omega * beta_B
    pm_terms, mp_terms = [], []
    for tj, lw in zip(two_j, log_w):
        if not np.isfinite(lw):
            continue
        tm = np.arange(-tj, tj + 1, 2)
        a, b = _ladder_factors(tj, tm)
        log_q = -x * tm / 2 - float(log_partition_block(tj, beta_B, spec.omega))
        with np.errstate(divide="ignore"):
            pm_terms.append(lw + log_q + np.log(a.astype(float)))
            mp_terms.append(lw + log_q + np.log(b.astype(float)))
    log_pm = logsumexp(np.concatenate(pm_terms))
    log_mp = logsumexp(np.concatenate(mp_terms))
    return _temperature_from_logs(log_mp, log_pm, spec.omega)


def apparent_temperature_dephased(spec: EnsembleSpec, beta_B: float) -> float:
    """Apparent temperature of the beta0 = +-inf steady state with local-basis
    coherences removed."""
    beta_B = _finite_beta(beta_B)
    if spec.n == 1:
        return math.inf if beta_B == 0 else 1.0 / beta_B
    if beta_B == 0:
        return math.inf
    table = multiplicity_table(spec)
    x = spec.omega * beta_B
    pm_terms, mp_terms = [], []
    for tm in spec.two_m_values:
        # traces of J+J- and J-J+ over the J_z = m eigenspace, exact
        a_m = b_m = 0
        for tj in range(abs(tm), spec.two_ns + 1, 2):
            a, b = _ladder_factors(tj, tm)
            a_m += table.l[tj] * a
            b_m += table.l[tj] * b
        base = -x * tm / 2 - math.log(table.I[tm])
        pm_terms.append(base + math.log(a_m) if a_m else -np.inf)
        mp_terms.append(base + math.log(b_m) if b_m else -np.inf)
    return _temperature_from_logs(logsumexp(mp_terms), logsumexp(pm_terms), spec.omega)


def steady_state_summary(spec: EnsembleSpec, beta0: float, beta_B: float) -> SteadyStateSummary:
    """Collect the steady-state observables; the free-energy variation is NaN at beta_B = 0."""
    beta_B = _finite_beta(beta_B)
    dF = math.nan if beta_B == 0 else free_energy_variation(spec, beta0, beta_B)
    return SteadyStateSummary(
        energy=steady_energy(spec, beta0, beta_B),
        entropy=steady_entropy(spec, beta0, beta_B),
        free_energy_variation=dF,
        entropy_production=entropy_production(spec, beta0, beta_B),
        apparent_temperature=apparent_temperature_steady(spec, beta0, beta_B),
    )
