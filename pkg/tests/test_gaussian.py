from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from iprw.gaussian import (
    NearSingularError,
    fdd_sample,
    integrate_rl,
    rl_covariance,
    rl_cross_covariance,
    sample_bm,
)
from iprw.stats import jackknife_covariance, jackknife_variance


def test_rl_covariance_brownian():
    assert rl_covariance(0, 0.3, 0.8) == 0.3
    assert rl_covariance(0, 2.0, 1.5) == 1.5


def test_rl_covariance_examples():
    assert rl_covariance(1, 1.0, 1.0) == pytest.approx(1 / 3, rel=1e-15)
    assert rl_covariance(1, 0.5, 1.0) == pytest.approx(5 / 48, rel=1e-15)


@pytest.mark.parametrize("q, r, u, v", [(1, 1, 0.5, 1.0), (2, 3, 1.7, 0.4), (0, 2, 1.0, 1.0), (3, 1, 0.25, 2.0)])
def test_rl_cross_covariance_quadrature(q, r, u, v):
    val, _ = integrate.quad(lambda y: (u - y) ** q * (v - y) ** r, 0, min(u, v), epsabs=1e-14)
    assert rl_cross_covariance(q, r, u, v) == pytest.approx(val, rel=1e-12)


@pytest.mark.parametrize("q", range(6))
@pytest.mark.parametrize("u", [0.1, 0.5, 1.0, 1.5, 2.0])
def test_rl_variance_closed_form(q, u):
    assert rl_covariance(q, u, u) == pytest.approx(u ** (2 * q + 1) / (2 * q + 1), rel=1e-13)


@settings(max_examples=100, deadline=None)
@given(q=st.integers(0, 5), u=st.floats(0, 3), v=st.floats(0, 3))
def test_rl_covariance_symmetric(q, u, v):
    assert rl_covariance(q, u, v) == pytest.approx(rl_covariance(q, v, u), rel=1e-12, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(q=st.integers(0, 4), u=st.lists(st.floats(0.05, 2), min_size=2, max_size=5, unique=True))
def test_rl_covariance_psd(q, u):
    C = np.array([[rl_covariance(q, a, b) for b in u] for a in u])
    assert np.min(np.linalg.eigvalsh(C)) >= -1e-10 * np.max(np.abs(C))


def test_rl_rejects_negative():
    with pytest.raises(ValueError):
        rl_covariance(-1, 1.0, 1.0)
    with pytest.raises(ValueError):
        rl_covariance(1, -1.0, 1.0)


def test_sample_bm_moments():
    bm = sample_bm(1e-2, 100, 10**4, 3)
    assert np.all(bm.paths[:, 0] == 0)
    var = jackknife_variance(bm.column(1.0))
    assert var.within(1.0, 3)
    cov = jackknife_covariance(bm.column(0.5), bm.column(1.0))
    assert cov.within(0.5, 3)
    m = bm.paths.mean(axis=0)
    se = bm.paths.std(axis=0, ddof=1) / math.sqrt(10**4)
    assert np.all(np.abs(m[1:]) <= 4.5 * se[1:])


def test_integrate_rl_zero_path():
    bm = sample_bm(0.1, 10, 3, 0)
    zero = type(bm)(bm.step, 0, np.zeros_like(bm.paths))
    assert np.all(integrate_rl(zero, 1).paths == 0)


def test_integrate_rl_b1():
    bm = sample_bm(1e-3, 1000, 10**4, 5)
    b1 = integrate_rl(bm, 1)
    assert jackknife_variance(b1.column(1.0)).within(1 / 3, 3)
    assert jackknife_covariance(b1.column(0.5), b1.column(1.0)).within(5 / 48, 3)


def test_integrate_rl_refinement():
    bm = sample_bm(5e-3, 200, 10**4, 9)
    fine = integrate_rl(bm, 2)
    coarse = integrate_rl(type(bm)(1e-2, 0, bm.paths[:, ::2]), 2)
    v_fine = np.var(fine.paths[:, -1], ddof=1)
    v_coarse = np.var(coarse.paths[:, -1], ddof=1)
    assert abs(v_coarse / v_fine - 1) < 0.01


@pytest.mark.parametrize("q", [1, 2])
def test_pathwise_vs_exact_fdd(q):
    u = [0.25, 0.5, 1.0]
    paths = integrate_rl(sample_bm(1e-3, 1000, 10**4, 13), q)
    exact = fdd_sample(q, u, 10**4, 14)
    for a in range(3):
        for b in range(a, 3):
            e1 = jackknife_covariance(paths.column(u[a]), paths.column(u[b]))
            e2 = jackknife_covariance(exact[:, a], exact[:, b])
            assert abs(e1.point - e2.point) <= 3 * math.hypot(e1.se, e2.se)


def test_fdd_scalar_and_zero():
    x = fdd_sample(1, [1.0], 10**4, 1)
    assert jackknife_variance(x[:, 0]).within(1 / 3, 3)
    y = fdd_sample(2, [0.0, 0.5], 100, 2)
    assert np.all(y[:, 0] == 0.0)


def test_fdd_brownian_covariance():
    x = fdd_sample(0, [0.5, 1.0], 10**4, 3)
    assert jackknife_covariance(x[:, 0], x[:, 1]).within(0.5, 3)


def test_fdd_duplicate_points():
    with pytest.raises(NearSingularError):
        fdd_sample(1, [0.5, 0.5], 10, 0)


def test_column_off_grid():
    bm = sample_bm(0.1, 10, 2, 0)
    with pytest.raises(ValueError):
        bm.column(0.55)
