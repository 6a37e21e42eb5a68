from fractions import Fraction
from itertools import product
from math import factorial

import pytest
from hypothesis import given, settings, strategies as st

from spinbath.angular_momentum import (
    EnsembleSpec,
    format_half,
    level_counts,
    multiplicities,
    multiplicity_table,
    neighbor_counts,
    parse_spin,
)
from spinbath.errors import DomainError, ResourceLimitError
import spinbath.angular_momentum as am


def brute_counts(n, two_s):
    """I_m by enumerating every tuple of local 2m values."""
    out = {}
    for combo in product(range(-two_s, two_s + 1, 2), repeat=n):
        out[sum(combo)] = out.get(sum(combo), 0) + 1
    return out


def test_two_spin_half_counts():
    assert level_counts(EnsembleSpec(2, 1)) == {-2: 1, 0: 2, 2: 1}


def test_four_spin_half_counts_binomial():
    counts = level_counts(EnsembleSpec(4, 1))
    assert counts == {-4: 1, -2: 4, 0: 6, 2: 4, 4: 1}


def test_three_spin_one_matches_enumeration():
    counts = level_counts(EnsembleSpec(3, 2))
    assert counts == brute_counts(3, 2)
    assert counts[0] == 7


@pytest.mark.parametrize("n,two_s", [(1, 1), (2, 3), (4, 2), (5, 1), (3, 4)])
def test_counts_match_enumeration(n, two_s):
    assert level_counts(EnsembleSpec(n, two_s)) == brute_counts(n, two_s)


def test_multiplicity_examples():
    assert multiplicities(EnsembleSpec(2, 1)) == {0: 1, 2: 1}
    assert multiplicities(EnsembleSpec(4, 1)) == {0: 2, 2: 3, 4: 1}
    assert multiplicities(EnsembleSpec(3, 1)) == {1: 2, 3: 1}


def test_single_spin_one_has_empty_singlet():
    # one spin-1 is a single J=1 irrep; the ladder still lists J=0 with l=0
    assert multiplicities(EnsembleSpec(1, 2)) == {0: 0, 2: 1}


def test_neighbor_counts():
    assert neighbor_counts(EnsembleSpec(2, 1)) == {-1: 1, 1: 1}
    assert neighbor_counts(EnsembleSpec(4, 1)) == brute_counts(3, 1)
    assert neighbor_counts(EnsembleSpec(4, 1)) == {-3: 1, -1: 3, 1: 3, 3: 1}
    assert neighbor_counts(EnsembleSpec(2, 2)) == {-2: 1, 0: 1, 2: 1}
    with pytest.raises(DomainError):
        neighbor_counts(EnsembleSpec(1, 1))


def test_resource_cap(monkeypatch):
    monkeypatch.setattr(am, "MAX_TABLE_SIZE", 10)
    with pytest.raises(ResourceLimitError):
        level_counts(EnsembleSpec(6, 1))


def test_large_ensemble_exact_integers():
    counts = level_counts(EnsembleSpec(200, 1))
    # central binomial coefficient exceeds 64 bits and must be exact
    assert counts[0] == factorial(200) // factorial(100) ** 2
    assert counts[0] > 2**64


@pytest.mark.parametrize(
    "value,expected", [("1/2", 1), ("3/2", 3), ("1", 2), (1.5, 3), (Fraction(9, 2), 9), (" 2 ", 4)]
)
def test_parse_spin(value, expected):
    assert parse_spin(value) == expected


@pytest.mark.parametrize("value", ["1/3", "0", "-1/2", "abc", 0.7])
def test_parse_spin_rejects(value):
    with pytest.raises(DomainError):
        parse_spin(value)


def test_format_half():
    assert format_half(3) == "3/2"
    assert format_half(4) == "2"


def test_spec_validation():
    with pytest.raises(DomainError):
        EnsembleSpec(0, 1)
    with pytest.raises(DomainError):
        EnsembleSpec(2, 0)
    with pytest.raises(DomainError):
        EnsembleSpec(2, 1, omega=-1.0)
    spec = EnsembleSpec.from_spin(3, "1/2")
    assert spec.two_j0 == 1
    assert list(spec.two_j_values) == [1, 3]
    assert spec.dimension == 8


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), two_s=st.integers(1, 4))
def test_table_invariants(n, two_s):
    table = multiplicity_table(EnsembleSpec(n, two_s))
    table.check()
    assert sum(l * (tj + 1) for tj, l in table.l.items()) == (two_s + 1) ** n
    for tm, c in table.I.items():
        assert table.I[-tm] == c


@pytest.mark.parametrize("n", range(2, 21, 2))
def test_spin_half_closed_form(n):
    l = multiplicities(EnsembleSpec(n, 1))
    for tj, val in l.items():
        j2 = tj // 2
        expected = (tj + 1) * factorial(n) // (factorial(n // 2 + j2 + 1) * factorial(n // 2 - j2))
        assert val == expected


@pytest.mark.parametrize("n,two_s", [(2, 2), (3, 2), (2, 3), (5, 4)])
def test_top_counts_not_geometric(n, two_s):
    spec = EnsembleSpec(n, two_s)
    I = level_counts(spec)
    top = spec.two_ns
    assert (I[top], I[top - 2], I[top - 4]) == (1, n, n * (n + 1) // 2)
    assert I[top] * I[top - 4] != I[top - 2] ** 2
