"""Block-by-block integration of the collective master equation.

Within one (J, i) block the generator only couples rho[m, m'] to
rho[m+1, m'+1] and rho[m-1, m'-1], so each diagonal of the block matrix is an
independent tridiagonal chain. Degenerate i-blocks with identical data are
folded into one block carrying ``copies`` = l_J.

Matrix index k corresponds to m = -J + k (k = 0 is the ground level).
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .angular_momentum import EnsembleSpec
from .equilibrium import BathSpec, _ladder, _log_sector_weights, log_partition_block
from .errors import DomainError, StepSizeError
from . import angular_momentum


@dataclass(frozen=True)
class DissipatorRates:
    """G_down = G(omega) drives emission (J-), G_up = G(-omega) absorption (J+)."""

    G_down: float
    G_up: float

    def __post_init__(self):
        if self.G_down < 0 or self.G_up < 0:
            raise DomainError("rates must be non-negative")


def rates_from_bath(bath: BathSpec, omega: float = 1.0) -> DissipatorRates:
    """Rates with G_up/G_down = exp(-omega beta_B); the larger one equals gamma."""
    beta_B = float(bath.beta_B)
    if not math.isfinite(beta_B):
        raise DomainError("dynamics needs a finite bath inverse temperature")
    x = omega * beta_B
    if x >= 0:
        return DissipatorRates(bath.gamma, bath.gamma * math.exp(-x))
    return DissipatorRates(bath.gamma * math.exp(x), bath.gamma)


@dataclass
class BlockState:
    two_j: int
    weight: float
    rho: np.ndarray
    copies: int = 1

    @property
    def dim(self) -> int:
        return self.two_j + 1


@dataclass
class EnsembleState:
    spec: EnsembleSpec
    blocks: list = field(default_factory=list)

    def total_weight(self) -> float:
        return float(sum(np.trace(b.rho).real for b in self.blocks))

    def energy(self) -> float:
        """omega <J_z> + omega n s."""
        spec = self.spec
        total = 0.0
        for b in self.blocks:
            m = np.arange(b.dim) - b.two_j / 2
            total += float(np.dot(m, np.diag(b.rho).real))
        return spec.omega * (total + spec.ns)

    def entropy(self) -> float:
        total = 0.0
        for b in self.blocks:
            lam = np.clip(np.linalg.eigvalsh(b.rho), 0.0, None)
            lam = lam[lam > 0]
            total -= float(np.sum(lam * np.log(lam)))
            w = float(np.trace(b.rho).real)
            if b.copies > 1 and w > 0:
                total += w * math.log(b.copies)
        return total

    def apparent_temperature(self) -> float:
        plus_minus = minus_plus = 0.0
        for b in self.blocks:
            a, bb = _ladder_products(b.two_j)
            pops = np.diag(b.rho).real
            plus_minus += float(np.dot(a, pops))
            minus_plus += float(np.dot(bb, pops))
        if plus_minus <= 0:
            return math.nan
        ratio = minus_plus / plus_minus
        return math.inf if ratio == 1 else self.spec.omega / math.log(ratio)


def _ladder_products(two_j: int):
    """Arrays (J+m)(J-m+1) and (J-m)(J+m+1) over m = -J..J."""
    k = np.arange(two_j + 1, dtype=float)
    up = k  # J + m
    down = two_j - k  # J - m
    return up * (down + 1), down * (up + 1)


def block_rhs(block: BlockState, rates: DissipatorRates) -> np.ndarray:
    """d rho / dt for one block, term by term from the population/coherence equations."""
    rho = np.asarray(block.rho)
    a, b = _ladder_products(block.two_j)
    gd, gu = rates.G_down, rates.G_up
    damping = 0.5 * gd * (a[:, None] + a[None, :]) + 0.5 * gu * (b[:, None] + b[None, :])
    out = -damping * rho
    # feeding from the level above: G(omega) sqrt(b_m b_m') rho[m+1, m'+1]
    out[:-1, :-1] += gd * np.sqrt(np.outer(b[:-1], b[:-1])) * rho[1:, 1:]
    # feeding from the level below: G(-omega) sqrt(a_m a_m') rho[m-1, m'-1]
    out[1:, 1:] += gu * np.sqrt(np.outer(a[1:], a[1:])) * rho[:-1, :-1]
    return out


def _diagonal_generator(two_j: int, offset: int, rates: DissipatorRates) -> np.ndarray:
    """Tridiagonal generator acting on (rho[k, k+offset])_k."""
    a, b = _ladder_products(two_j)
    d = two_j + 1 - offset
    k = np.arange(d)
    kp = k + offset
    gen = np.zeros((d, d))
    gen[k, k] = -(0.5 * rates.G_down * (a[k] + a[kp]) + 0.5 * rates.G_up * (b[k] + b[kp]))
    if d > 1:
        gen[k[:-1], k[:-1] + 1] = rates.G_down * np.sqrt(b[k[:-1]] * b[kp[:-1]])
        gen[k[1:], k[1:] - 1] = rates.G_up * np.sqrt(a[k[1:]] * a[kp[1:]])
    return gen


def _rk4_propagator(gen: np.ndarray, h: float) -> np.ndarray:
    """One classic RK4 step of y' = gen y, as a matrix."""
    hg = h * gen
    eye = np.eye(len(gen))
    hg2 = hg @ hg
    return eye + hg + hg2 / 2 + hg2 @ hg / 6 + hg2 @ hg2 / 24


def rk4_step(f, y, h):
    """Generic classic RK4 step for y' = f(y)."""
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


class _BlockPropagator:
    def __init__(self, two_j, rates, h):
        self.two_j = two_j
        self.steps = [_rk4_propagator(_diagonal_generator(two_j, q, rates), h) for q in range(two_j + 1)]
        self._cache = {}

    def advance(self, rho, n_steps):
        if n_steps not in self._cache:
            self._cache[n_steps] = [np.linalg.matrix_power(p, n_steps) for p in self.steps]
        out = np.zeros_like(rho, dtype=complex)
        d = self.two_j + 1
        for q, u in enumerate(self._cache[n_steps]):
            k = np.arange(d - q)
            out[k, k + q] = u @ rho[k, k + q]
            if q:
                out[k + q, k] = np.conj(out[k, k + q])
        return out


def default_dt(spec: EnsembleSpec, gamma: float) -> float:
    return 0.01 / (gamma * (spec.two_ns + 1) ** 2)


@dataclass
class Trajectory:
    times: np.ndarray
    states: list

    def energies(self) -> np.ndarray:
        return np.array([s.energy() for s in self.states])

    def entropies(self) -> np.ndarray:
        return np.array([s.entropy() for s in self.states])

    def apparent_temperatures(self) -> np.ndarray:
        return np.array([s.apparent_temperature() for s in self.states])

    @property
    def final(self) -> EnsembleState:
        return self.states[-1]


def _advance_state(state, props, n_steps):
    blocks = []
    for b in state.blocks:
        rho = props[b.two_j].advance(b.rho, n_steps)
        blocks.append(BlockState(b.two_j, b.weight, rho, b.copies))
    return EnsembleState(state.spec, blocks)


def evolve(
    state: EnsembleState,
    rates: DissipatorRates,
    t_final: float,
    dt: float | None = None,
    sample_every: float | None = None,
    tol: float = 1e-9,
    check: bool = True,
) -> Trajectory:
    """Fixed-step RK4 trajectory sampled every ``sample_every`` time units.

    When ``check`` is set the final state is recomputed with dt/2; a
    disagreement above ``tol`` raises StepSizeError.
    """
    if not t_final > 0:
        raise DomainError("t_final must be positive")
    gamma = max(rates.G_down, rates.G_up, 1e-300)
    if dt is None:
        dt = default_dt(state.spec, gamma)
    if not dt > 0:
        raise DomainError("dt must be positive")
    n_steps = max(1, math.ceil(t_final / dt - 1e-9))
    h = t_final / n_steps
    if sample_every is None:
        sample_every = t_final / 100
    stride = min(n_steps, max(1, round(sample_every / h)))

    two_js = {b.two_j for b in state.blocks}
    props = {tj: _BlockPropagator(tj, rates, h) for tj in two_js}

    marks = list(range(0, n_steps + 1, stride))
    if marks[-1] != n_steps:
        marks.append(n_steps)
    states = [state]
    current = state
    for prev, nxt in zip(marks, marks[1:]):
        current = _advance_state(current, props, nxt - prev)
        states.append(current)

    if check:
        half = {tj: _BlockPropagator(tj, rates, h / 2) for tj in two_js}
        fine = _advance_state(state, half, 2 * n_steps)
        err = max(
            (float(np.max(np.abs(a.rho - b.rho))) for a, b in zip(current.blocks, fine.blocks)),
            default=0.0,
        )
        if not err <= tol:
            raise StepSizeError(
                f"step-halving disagreement {err:.3e} exceeds {tol:.1e}; rerun with dt <= {h / 2:.3e}"
            )
    return Trajectory(np.array(marks) * h, states)


def initial_thermal_blocks(spec: EnsembleSpec, beta0: float) -> EnsembleState:
    """Gibbs state at beta0 folded into one weighted block per total spin J."""
    beta0 = float(beta0)
    if math.isinf(beta0):
        rho = np.zeros((spec.two_ns + 1, spec.two_ns + 1), dtype=complex)
        k = 0 if beta0 > 0 else spec.two_ns
        rho[k, k] = 1.0
        return EnsembleState(spec, [BlockState(spec.two_ns, 1.0, rho, 1)])
    table = angular_momentum.multiplicity_table(spec)
    two_j, _ = _ladder(spec)
    log_w = _log_sector_weights(spec, beta0)
    x = spec.omega * beta0
    blocks = []
    for tj, lw in zip(two_j, log_w):
        w = math.exp(lw) if np.isfinite(lw) else 0.0
        if w <= 0:
            continue
        m = np.arange(-tj, tj + 1, 2) / 2
        pops = np.exp(-x * m - float(log_partition_block(int(tj), beta0, spec.omega)))
        blocks.append(BlockState(int(tj), w, np.diag(w * pops).astype(complex), table.l[int(tj)]))
    return EnsembleState(spec, blocks)


def steady_blocks(spec: EnsembleSpec, beta0: float, beta_B: float) -> EnsembleState:
    """Analytic fixed point: each block relaxed to its Gibbs state at beta_B."""
    start = initial_thermal_blocks(spec, beta0)
    x = spec.omega * beta_B
    blocks = []
    for b in start.blocks:
        m = np.arange(-b.two_j, b.two_j + 1, 2) / 2
        pops = np.exp(-x * m - float(log_partition_block(b.two_j, beta_B, spec.omega)))
        blocks.append(BlockState(b.two_j, b.weight, np.diag(b.weight * pops).astype(complex), b.copies))
    return EnsembleState(spec, blocks)
