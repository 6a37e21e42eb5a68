"""Exact combinatorics for the addition of n spins s.

Half-integers are stored as twice their value (``two_s``, ``two_j``, ``two_m``)
so every key is an exact int. Level counts and multiplicities are Python ints
and never overflow.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
import math

from .errors import DomainError, ResourceLimitError

#: Largest n*(2s+1) accepted by :func:`level_counts`.
MAX_TABLE_SIZE = 200_000


def parse_spin(value) -> int:
    """Return twice the spin for inputs like ``"3/2"``, ``1.5``, ``Fraction(1, 2)``."""
    if isinstance(value, str):
        value = value.strip()
        try:
            frac = Fraction(value)
        except ValueError as exc:
            raise DomainError(f"cannot parse spin {value!r}") from exc
    else:
        frac = Fraction(value).limit_denominator(1000)
    two_s = 2 * frac
    if two_s.denominator != 1 or two_s <= 0:
        raise DomainError(f"spin must be a positive half-integer, got {value!r}")
    return int(two_s)


def format_half(two_x: int) -> str:
    """Render a twice-value integer as ``"3/2"`` or ``"2"``."""
    if two_x % 2 == 0:
        return str(two_x // 2)
    return f"{two_x}/2"


@dataclass(frozen=True)
class EnsembleSpec:
    """n spins of size s = two_s/2 with Bohr frequency omega (hbar = 1)."""

    n: int
    two_s: int
    omega: float = 1.0

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise DomainError(f"n must be a positive integer, got {self.n!r}")
        if not isinstance(self.two_s, int) or self.two_s < 1:
            raise DomainError(f"two_s must be a positive integer, got {self.two_s!r}")
        if not (self.omega > 0 and math.isfinite(self.omega)):
            raise DomainError(f"omega must be positive and finite, got {self.omega!r}")

    @classmethod
    def from_spin(cls, n: int, s, omega: float = 1.0) -> "EnsembleSpec":
        return cls(n, parse_spin(s), omega)

    @property
    def s(self) -> float:
        return self.two_s / 2

    @property
    def two_ns(self) -> int:
        return self.n * self.two_s

    @property
    def ns(self) -> float:
        return self.two_ns / 2

    @property
    def two_j0(self) -> int:
        return self.two_ns % 2

    @property
    def two_j_values(self) -> range:
        """Total-spin ladder J_0, J_0+1, ..., ns (twice values)."""
        return range(self.two_j0, self.two_ns + 1, 2)

    @property
    def two_m_values(self) -> range:
        return range(-self.two_ns, self.two_ns + 1, 2)

    @property
    def dimension(self) -> int:
        return (self.two_s + 1) ** self.n


def _counts(n: int, two_s: int) -> dict[int, int]:
    # Iterated convolution of n copies of the all-ones vector of length 2s+1.
    width = two_s + 1
    counts = [1]
    for _ in range(n):
        prefix = [0]
        for c in counts:
            prefix.append(prefix[-1] + c)
        size = len(counts) + width - 1
        counts = [
            prefix[min(k + 1, len(counts))] - prefix[max(0, k - width + 1)]
            for k in range(size)
        ]
    two_ns = n * two_s
    return {two_m: c for two_m, c in zip(range(-two_ns, two_ns + 1, 2), counts)}


def level_counts(spec: EnsembleSpec) -> dict[int, int]:
    """Map 2m -> I_m, the number of local basis states with total J_z = m."""
    if spec.n * (spec.two_s + 1) > MAX_TABLE_SIZE:
        raise ResourceLimitError(
            f"n*(2s+1) = {spec.n * (spec.two_s + 1)} exceeds cap {MAX_TABLE_SIZE}"
        )
    return _counts(spec.n, spec.two_s)


def multiplicities(spec: EnsembleSpec) -> dict[int, int]:
    """Map 2J -> l_J, the number of spin-J irreps in the n-fold product."""
    counts = level_counts(spec)
    mult = {}
    for two_j in spec.two_j_values:
        l_j = counts[two_j] - counts.get(two_j + 2, 0)
        if l_j < 0:
            raise ArithmeticError(f"negative multiplicity at 2J={two_j}: {l_j}")
        mult[two_j] = l_j
    return mult


def neighbor_counts(spec: EnsembleSpec) -> dict[int, int]:
    """Level counts K_m of the remaining n-1 spins, keyed by 2m."""
    if spec.n < 2:
        raise DomainError("neighbor counts need at least two spins")
    return level_counts(EnsembleSpec(spec.n - 1, spec.two_s, spec.omega))


@dataclass(frozen=True)
class MultiplicityTable:
    spec: EnsembleSpec
    I: dict
    l: dict
    K: dict | None

    def check(self) -> None:
        """Raise AssertionError if any structural identity fails."""
        spec = self.spec
        for two_m, c in self.I.items():
            assert self.I[-two_m] == c, f"I_m asymmetric at 2m={two_m}"
        total = sum(l_j * (two_j + 1) for two_j, l_j in self.l.items())
        assert total == (spec.two_s + 1) ** spec.n, "collective basis incomplete"
        for two_m in spec.two_m_values:
            tail = sum(self.l[tj] for tj in spec.two_j_values if tj >= abs(two_m))
            assert tail == self.I[two_m], f"I_m != sum l_J at 2m={two_m}"
        assert self.l[spec.two_ns] == 1
        if spec.n >= 2:
            assert self.l[spec.two_ns - 2] == spec.n - 1


@lru_cache(maxsize=256)
def multiplicity_table(spec: EnsembleSpec) -> MultiplicityTable:
    counts = level_counts(spec)
    mult = multiplicities(spec)
    K = neighbor_counts(spec) if spec.n >= 2 else None
    return MultiplicityTable(spec, counts, mult, K)
