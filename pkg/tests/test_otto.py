import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import spinbath.equilibrium as eq
from spinbath import otto
from spinbath.angular_momentum import EnsembleSpec
from spinbath.errors import DomainError

INF = math.inf


def cyc(n=4, two_s=1, beta0=INF, beta_h=0.0, beta_c=1.0, lam=0.5, **kw):
    return otto.CycleSpec(EnsembleSpec(n, two_s), beta0, beta_h, beta_c, lam, **kw)


def test_validation():
    with pytest.raises(DomainError):
        cyc(beta_h=-0.1)
    with pytest.raises(DomainError):
        cyc(beta_h=1.0, beta_c=1.0)
    with pytest.raises(DomainError):
        cyc(lam=0.0)
    with pytest.raises(DomainError):
        cyc(lam=1.2)
    with pytest.raises(DomainError):
        cyc(beta_h=0.6, beta_c=1.0, lam=0.5)
    with pytest.raises(DomainError):
        cyc(beta0=math.nan)
    cyc(beta_h=0.5, beta_c=1.0, lam=0.5)
    cyc(beta_h=0.6, beta_c=1.0, lam=0.5, refrigerator=True)
    with pytest.raises(DomainError):
        cyc(beta_h=0.2, beta_c=1.0, lam=0.5, refrigerator=True)


def test_degenerate_cycle_has_zero_work():
    for collective in (True, False):
        rep = otto.cycle_work(cyc(beta0=0.5, beta_h=0.5, beta_c=1.0, lam=0.5), collective)
        assert rep.work_coh == 0.0 and rep.work_inc == 0.0
        assert rep.Q_h == 0.0 and rep.Q_c == 0.0
        assert not rep.amplified


def test_unit_compression_has_zero_work():
    rep = otto.cycle_work(cyc(beta_h=0.3, beta_c=2.0, lam=1.0))
    assert rep.work_coh == 0.0 and rep.work_inc == 0.0


def test_work_signs_and_values():
    c = cyc(n=3, beta_h=0.2, beta_c=3.0, lam=0.4)
    rep = otto.cycle_work(c)
    spec = c.spec
    e1 = eq.steady_energy(spec, INF, 0.2)
    e2 = eq.steady_energy(spec, INF, 1.2)
    assert rep.work_coh == pytest.approx(-0.6 * (e1 - e2), rel=1e-14)
    assert rep.work_coh < 0 and rep.work_inc < 0
    assert rep.work == rep.work_coh
    assert otto.cycle_work(c, collective=False).work == rep.work_inc


@pytest.mark.parametrize("n,two_s", [(4, 1), (4, 3), (100, 1)])
def test_ratio_limit(n, two_s):
    spec = EnsembleSpec(n, two_s)
    rep = otto.cycle_work(otto.CycleSpec(spec, INF, 0.0, 1e-3 / 0.5, 0.5))
    assert rep.enhancement_ratio == pytest.approx((spec.ns + 1) / (spec.s + 1), rel=5e-3)


@settings(max_examples=60, deadline=None)
@given(
    n=st.integers(1, 12),
    two_s=st.integers(1, 4),
    beta0=st.one_of(st.just(INF), st.floats(-5, 5)),
    beta_h=st.floats(0, 2),
    gap=st.floats(0.01, 5),
    lam=st.floats(0.05, 1.0),
    collective=st.booleans(),
)
def test_first_law_and_efficiency(n, two_s, beta0, beta_h, gap, lam, collective):
    beta_c = (beta_h + gap) / lam
    rep = otto.cycle_work(otto.CycleSpec(EnsembleSpec(n, two_s), beta0, beta_h, beta_c, lam), collective)
    assert abs(rep.Q_h + rep.Q_c + rep.work) < 1e-12
    assert rep.efficiency == 1 - lam
    if rep.Q_h > 1e-12:
        assert -rep.work / rep.Q_h == pytest.approx(1 - lam, rel=1e-9)


@pytest.mark.parametrize("n,two_s", [(2, 1), (4, 1), (4, 3), (7, 2)])
def test_beta_l_is_sign_flip(n, two_s):
    spec = EnsembleSpec(n, two_s)
    b = otto.beta_l(spec, INF)
    assert b > 0
    assert otto.gap_slope(spec, INF, b * (1 - 1e-6)) > 0
    assert otto.gap_slope(spec, INF, b * (1 + 1e-6)) < 0


def test_beta_l_reference_value():
    # sign-scan oracle: the first sign change on a fine grid
    spec = EnsembleSpec(4, 1)
    grid = np.linspace(0.01, 5, 5000)
    slopes = np.array([otto.gap_slope(spec, INF, b) for b in grid])
    k = int(np.argmax(slopes <= 0))
    assert grid[k - 1] < otto.beta_l(spec, INF) <= grid[k]


@pytest.mark.parametrize("n,two_s", [(3, 1), (4, 3)])
def test_gap_slope_at_zero(n, two_s):
    spec = EnsembleSpec(n, two_s)
    h = 1e-4
    fd = (otto.gap_slope(spec, INF, h) + otto.gap_slope(spec, INF, -h)) / 2
    assert otto.gap_slope_at_zero(spec, INF) == pytest.approx(fd, rel=1e-6)
    assert otto.gap_slope_at_zero(spec, INF) > 0


def test_beta_l_domain_errors():
    with pytest.raises(DomainError):
        otto.beta_l(EnsembleSpec(1, 1), INF)
    # a maximally mixed start puts no extra weight on large J
    assert otto.gap_slope_at_zero(EnsembleSpec(4, 1), 0.0) == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(DomainError):
        otto.beta_l(EnsembleSpec(4, 1), 0.0)


def test_amplification_condition():
    assert not otto.amplification_condition(cyc(beta_h=0.5, beta_c=1.0, lam=0.5))
    assert otto.amplification_condition(cyc(beta_h=0.01, beta_c=0.1, lam=0.5))


@pytest.mark.parametrize("beta_h,beta_c", [(0.05, 0.4), (0.3, 4.0), (1.0, 6.0), (0.5, 1.5)])
def test_amplification_matches_free_energy(beta_h, beta_c):
    c = cyc(n=5, beta_h=beta_h, beta_c=beta_c, lam=0.5)
    f_coh, f_inc = otto.cycle_free_energy(c)
    assert otto.amplification_condition(c) == (abs(f_coh) > abs(f_inc))
    with pytest.raises(DomainError):
        otto.cycle_free_energy(cyc(beta_h=0.0))


def test_sweep_rows():
    spec = EnsembleSpec(4, 1)
    rows = otto.sweep(spec, INF, 0.0, 0.5, [1e-6, 1.0, 2.0])
    assert set(rows[0]) == {"lam_beta_c", "W_coh", "W_inc", "diff_norm", "ratio"}
    assert abs(rows[0]["diff_norm"]) < 1e-6
    assert rows[1]["lam_beta_c"] == 0.5


def test_sweep_maximum_at_beta_l():
    spec = EnsembleSpec(6, 1)
    grid = np.linspace(0.01, 8, 800)
    rows = otto.sweep(spec, INF, 0.0, 0.5, grid)
    k = int(np.argmax([r["diff_norm"] for r in rows]))
    assert abs(rows[k]["lam_beta_c"] - otto.beta_l(spec, INF)) <= 0.5 * (grid[1] - grid[0])


@pytest.mark.parametrize("n,two_s", [(2, 1), (4, 1), (3, 3), (10, 2)])
def test_enhancement_everywhere_for_infinite_hot_bath(n, two_s):
    spec = EnsembleSpec(n, two_s)
    for cold in np.geomspace(1e-2, 30, 40):
        assert otto.work_difference(spec, INF, 0.0, cold, 0.5) > 0


def test_enhancement_grows_with_n():
    vals = []
    for n in (2, 6, 9, 100):
        spec = EnsembleSpec(n, 1)
        b = otto.beta_l(spec, INF)
        vals.append(otto.work_difference(spec, INF, 0.0, b, 0.5) / (0.5 * spec.ns))
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_threshold_in_ns_for_hot_bath():
    grid = np.linspace(0.6, 12, 200)
    big = [otto.work_difference(EnsembleSpec(100, 1), INF, 0.5, c, 0.5) for c in grid]
    small = [otto.work_difference(EnsembleSpec(2, 1), INF, 0.5, c, 0.5) for c in grid]
    assert max(big) < 0
    assert max(small) > 0
