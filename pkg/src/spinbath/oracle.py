"""Brute-force Lindblad evolution in the full (2s+1)^n local basis.

Ground truth for small instances. The local basis is ordered with spin 1 as
the most significant Kronecker factor and, within each spin, m increasing
from -s. Superoperators act on row-major vectorized density matrices:
vec(A rho B) = kron(A, B.T) vec(rho).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
import math
import warnings

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import expm_multiply

from .angular_momentum import EnsembleSpec
from .dynamics import DissipatorRates
from .equilibrium import SteadyStateSummary, steady_energy
from .errors import ConvergenceError, DomainError, ResourceLimitError, UndefinedTemperatureError

DIM_CAP = 4096
MODES = ("collective", "independent")


@dataclass
class FullState:
    spec: EnsembleSpec
    rho: np.ndarray

    def check(self, tol=1e-10):
        rho = self.rho
        assert np.max(np.abs(rho - rho.conj().T)) < 1e2 * tol, "not Hermitian"
        assert abs(np.trace(rho) - 1) < tol, "trace != 1"


@dataclass
class NoiseSpec:
    """Per-spin detunings delta_k and exchange couplings Omega[(k, l)]."""

    delta: tuple
    Omega: dict = field(default_factory=dict)

    def __post_init__(self):
        self.delta = tuple(float(d) for d in self.delta)
        sym = {}
        for (k, l), val in self.Omega.items():
            if k == l:
                if val != 0:
                    raise DomainError("Omega must have zero diagonal")
                continue
            key = (max(k, l), min(k, l))
            if key in sym and sym[key] != val:
                raise DomainError(f"Omega not symmetric at {key}")
            sym[key] = float(val)
        self.Omega = sym

    @classmethod
    def uniform(cls, n: int, delta: float, omega: float) -> "NoiseSpec":
        """Alternating detunings +-delta and all-to-all coupling omega."""
        dets = [delta * (-1) ** k for k in range(n)]
        return cls(dets, {(k, l): omega for k in range(n) for l in range(k)})

    def strength(self) -> float:
        vals = [abs(d) for d in self.delta] + [abs(v) for v in self.Omega.values()]
        return max(vals, default=0.0)


# ---------------------------------------------------------------------------
# operators


def _check_dim(spec: EnsembleSpec, cap: int = DIM_CAP) -> int:
    dim = spec.dimension
    if dim > cap:
        raise ResourceLimitError(f"Hilbert-space dimension {dim} exceeds cap {cap}")
    return dim


def spin_matrices(two_s: int):
    """(j+, j-, jz) for a single spin s = two_s/2, basis m = -s..s."""
    s = two_s / 2
    m = np.arange(two_s + 1) - s
    jp = np.zeros((two_s + 1, two_s + 1))
    for k in range(two_s):
        jp[k + 1, k] = math.sqrt(s * (s + 1) - m[k] * (m[k] + 1))
    return jp, jp.T.copy(), np.diag(m)


def _lift(op, k, n, d):
    left = sp.identity(d**k, format="csr")
    right = sp.identity(d ** (n - k - 1), format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(op)), right, format="csr")


@lru_cache(maxsize=32)
def local_ops(spec: EnsembleSpec, cap: int = DIM_CAP):
    """Lists [j+_k], [j-_k], [jz_k] as sparse matrices on the full space."""
    _check_dim(spec, cap)
    jp, jm, jz = spin_matrices(spec.two_s)
    d = spec.two_s + 1
    n = spec.n
    return (
        [_lift(jp, k, n, d) for k in range(n)],
        [_lift(jm, k, n, d) for k in range(n)],
        [_lift(jz, k, n, d) for k in range(n)],
    )


@lru_cache(maxsize=32)
def build_collective_ops(spec: EnsembleSpec, cap: int = DIM_CAP):
    """Dense (J+, J-, Jz) as sums of lifted local operators."""
    plus, minus, z = local_ops(spec, cap)
    return (
        sum(plus).toarray(),
        sum(minus).toarray(),
        sum(z).toarray(),
    )


def thermal_state(spec: EnsembleSpec, beta0: float, cap: int = DIM_CAP) -> FullState:
    """Product Gibbs state at beta0; +-inf gives the ground or top product state."""
    _check_dim(spec, cap)
    d = spec.two_s + 1
    beta0 = float(beta0)
    if math.isinf(beta0):
        single = np.zeros(d)
        single[0 if beta0 > 0 else -1] = 1.0
    else:
        m = np.arange(d) - spec.s
        logw = -spec.omega * beta0 * m
        single = np.exp(logw - logw.max())
        single /= single.sum()
    diag = single
    for _ in range(spec.n - 1):
        diag = np.kron(diag, single)
    return FullState(spec, np.diag(diag).astype(complex))


# ---------------------------------------------------------------------------
# generator


def _jumps(spec, rates, mode):
    if mode == "collective":
        jp, jm, _ = build_collective_ops(spec)
        return [(rates.G_down, jm), (rates.G_up, jp)]
    if mode == "independent":
        plus, minus, _ = local_ops(spec)
        out = []
        for k in range(spec.n):
            out += [(rates.G_down, minus[k].toarray()), (rates.G_up, plus[k].toarray())]
        return out
    raise DomainError(f"unknown mode {mode!r}; expected one of {MODES}")


def noise_hamiltonian(spec: EnsembleSpec, noise: NoiseSpec) -> np.ndarray:
    """H_inh + H_int in units of hbar."""
    if len(noise.delta) != spec.n:
        raise DomainError(f"need {spec.n} detunings, got {len(noise.delta)}")
    plus, minus, z = local_ops(spec)
    h = sp.csr_matrix((spec.dimension, spec.dimension))
    for k, dk in enumerate(noise.delta):
        h = h + dk * z[k]
    for (k, l), val in noise.Omega.items():
        if not (0 <= l < k < spec.n):
            raise DomainError(f"coupling index {(k, l)} out of range")
        h = h + val * (plus[k] @ minus[l] + minus[k] @ plus[l])
    return h.toarray()


def full_rhs(state: FullState, rates: DissipatorRates, mode: str = "collective", noise: NoiseSpec | None = None):
    """Lindblad derivative in matrix form (interaction picture, no Lamb shift)."""
    rho = state.rho
    out = np.zeros_like(rho, dtype=complex)
    for g, a in _jumps(state.spec, rates, mode):
        if g == 0:
            continue
        ad = a.conj().T
        ada = ad @ a
        out += g * (a @ rho @ ad - 0.5 * (ada @ rho + rho @ ada))
    if noise is not None:
        h = noise_hamiltonian(state.spec, noise)
        out += -1j * (h @ rho - rho @ h)
    return out


def liouvillian(spec: EnsembleSpec, rates: DissipatorRates, mode: str = "collective", noise: NoiseSpec | None = None):
    """Sparse superoperator L with d vec(rho)/dt = L vec(rho)."""
    dim = spec.dimension
    eye = sp.identity(dim, format="csr")
    L = sp.csr_matrix((dim * dim, dim * dim), dtype=complex)
    for g, a in _jumps(spec, rates, mode):
        if g == 0:
            continue
        a = sp.csr_matrix(a)
        ad = a.conj().T.tocsr()
        ada = (ad @ a).tocsr()
        L = L + g * (sp.kron(a, a.conj()) - 0.5 * sp.kron(ada, eye) - 0.5 * sp.kron(eye, ada.T))
    if noise is not None:
        h = sp.csr_matrix(noise_hamiltonian(spec, noise))
        L = L - 1j * (sp.kron(h, eye) - sp.kron(eye, h.T))
    return L.tocsr()


def steady_state(
    spec: EnsembleSpec,
    beta0: float,
    rates: DissipatorRates,
    mode: str = "collective",
    noise: NoiseSpec | None = None,
    tol: float = 1e-10,
    t_max: float | None = None,
    cap: int = DIM_CAP,
) -> FullState:
    """Integrate from the Gibbs state at beta0 until max|d rho/dt| < tol."""
    start = thermal_state(spec, beta0, cap)
    gamma = max(rates.G_down, rates.G_up)
    if gamma <= 0:
        return start
    if t_max is None:
        t_max = 5000.0 / gamma
    L = liouvillian(spec, rates, mode, noise)
    vec = start.rho.reshape(-1)
    chunk = 10.0 / gamma
    t = 0.0
    residual = float(np.max(np.abs(L @ vec)))
    while residual >= tol:
        if t >= t_max:
            raise ConvergenceError(f"no steady state by t = {t:.3g}; residual {residual:.3e}", residual)
        vec = expm_multiply(L * chunk, vec)
        t += chunk
        residual = float(np.max(np.abs(L @ vec)))
    rho = vec.reshape(start.rho.shape)
    rho = 0.5 * (rho + rho.conj().T)
    return FullState(spec, rho / np.trace(rho).real)


# ---------------------------------------------------------------------------
# state manipulation and observables


def dephase_local(state: FullState) -> FullState:
    """Drop every off-diagonal element in the local product basis."""
    return FullState(state.spec, np.diag(np.diag(state.rho)).astype(complex))


def partial_trace_first(state: FullState) -> np.ndarray:
    """Reduced state of spin 1 (trace over spins 2..n)."""
    d = state.spec.two_s + 1
    rest = state.spec.dimension // d
    return np.einsum("ajbj->ab", state.rho.reshape(d, rest, d, rest))


@lru_cache(maxsize=32)
def _casimir_projectors(spec: EnsembleSpec, cluster_tol: float = 1e-8):
    jp, jm, jz = build_collective_ops(spec)
    casimir = jp @ jm + jz @ jz - jz
    vals, vecs = np.linalg.eigh(casimir)
    groups = []
    start = 0
    for k in range(1, len(vals) + 1):
        if k == len(vals) or vals[k] - vals[k - 1] > cluster_tol:
            lam = float(np.mean(vals[start:k]))
            two_j = int(round(math.sqrt(1 + 4 * lam) - 1))
            groups.append((two_j, vecs[:, start:k]))
            start = k
    return groups


def sector_weights(state: FullState) -> dict:
    """Map 2J -> Tr(P_J rho) = l_J p_J over numerically found eigenspaces of J^2."""
    out = {}
    for two_j, v in _casimir_projectors(state.spec):
        out[two_j] = float(np.real(np.einsum("ia,ij,ja->", v.conj(), state.rho, v)))
    return out


def energy(state: FullState) -> float:
    _, _, jz = build_collective_ops(state.spec)
    spec = state.spec
    return spec.omega * (float(np.real(np.trace(jz @ state.rho))) + spec.ns)


def von_neumann_entropy(state: FullState) -> float:
    lam = np.linalg.eigvalsh(state.rho)
    if lam.min() < -1e-9:
        raise DomainError(f"state has eigenvalue {lam.min():.3e} below -1e-9")
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log(lam)))


def apparent_temperature(state: FullState) -> float:
    jp, jm, _ = build_collective_ops(state.spec)
    pm = float(np.real(np.trace(jp @ jm @ state.rho)))
    mp = float(np.real(np.trace(jm @ jp @ state.rho)))
    if pm <= 1e-300:
        raise UndefinedTemperatureError("dark state: <J+ J-> vanishes")
    ratio = mp / pm
    return math.inf if ratio == 1 else state.spec.omega / math.log(ratio)


def observables(state: FullState, initial: FullState | None = None, beta_B: float | None = None) -> SteadyStateSummary:
    """Energy, entropy and apparent temperature of ``state``.

    The free-energy variation and entropy production need the initial state and
    the bath temperature; they are NaN otherwise. The apparent temperature is
    NaN on a dark state.
    """
    e1 = energy(state)
    s1 = von_neumann_entropy(state)
    try:
        temp = apparent_temperature(state)
    except UndefinedTemperatureError:
        temp = math.nan
    dF = sigma = math.nan
    if initial is not None and beta_B is not None:
        de = e1 - energy(initial)
        ds = s1 - von_neumann_entropy(initial)
        sigma = -beta_B * de + ds
        if beta_B != 0:
            dF = de - ds / beta_B
    return SteadyStateSummary(e1, s1, dF, sigma, temp)


# ---------------------------------------------------------------------------
# noisy transient


@dataclass
class TransientReport:
    times: np.ndarray
    energies: np.ndarray
    target: float
    band: float
    min_deviation: float
    entry_time: float | None
    exit_time: float | None
    window: float
    warnings: list


def noisy_transient_check(
    spec: EnsembleSpec,
    beta0: float,
    rates: DissipatorRates,
    noise: NoiseSpec | None,
    t_probe: float,
    band: float | None = None,
    samples: int = 2001,
) -> TransientReport:
    """Track |E(t) - E_inf| on [0, t_probe] with Hamiltonian noise switched on.

    ``window`` is the time from first entry into the band until the energy
    leaves it again (or t_probe). ``exit_time`` is None when it never leaves.
    """
    notes = []
    gamma = max(rates.G_down, rates.G_up)
    if noise is not None and noise.strength() > 0.1 * gamma:
        msg = f"noise strength {noise.strength():.3g} is not small compared with gamma = {gamma:.3g}"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)
    if rates.G_up <= 0 or rates.G_down <= 0:
        raise DomainError("transient check needs both rates positive")
    beta_B = math.log(rates.G_down / rates.G_up) / spec.omega
    target = steady_energy(spec, beta0, beta_B)
    if band is None:
        band = 1e-3 * spec.omega * spec.ns
    start = thermal_state(spec, beta0)
    L = liouvillian(spec, rates, "collective", noise)
    _, _, jz = build_collective_ops(spec)
    traj = expm_multiply(L, start.rho.reshape(-1), start=0.0, stop=t_probe, num=samples, endpoint=True)
    times = np.linspace(0.0, t_probe, samples)
    jz_vec = jz.T.reshape(-1)  # Tr(jz rho) = sum_ij jz_ji rho_ij
    energies = spec.omega * (np.real(traj @ jz_vec) + spec.ns)
    dev = np.abs(energies - target)
    inside = dev < band
    entry = exit_ = None
    window = 0.0
    if inside.any():
        k0 = int(np.argmax(inside))
        entry = float(times[k0])
        out = np.nonzero(~inside[k0:])[0]
        if out.size:
            exit_ = float(times[k0 + out[0]])
            window = exit_ - entry
        else:
            window = float(t_probe - entry)
    return TransientReport(times, energies, target, band, float(dev.min()), entry, exit_, window, notes)
