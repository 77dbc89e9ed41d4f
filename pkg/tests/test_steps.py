from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iprw.steps import (
    InfiniteMomentError,
    JointStepModel,
    StepLaw,
    flt_scale,
    lorden_constant,
    moments,
    rate_constant_bV,
    renewal_constant_bU,
    sample_step,
    variance_constant,
)

EXP1 = StepLaw.exponential(1.0)


def test_sample_step_degenerate_pair():
    model = JointStepModel.independent(StepLaw.deterministic(1.0), StepLaw.deterministic(2.0))
    assert sample_step(model, np.random.default_rng(0)) == (1.0, 2.0)


def test_sample_step_equal_coupling():
    xi, eta = sample_step(JointStepModel.equal(EXP1), np.random.default_rng(1))
    assert xi == eta


def test_independent_exponential_mean():
    model = JointStepModel.independent(EXP1, EXP1)
    x, e = model.sample_pairs(np.random.default_rng(2), 10**6)
    assert abs(x.mean() - 1) < 0.01
    assert abs(np.corrcoef(x, e)[0, 1]) < 0.01


def test_moments_exponential():
    mom = moments(JointStepModel.equal(EXP1))
    assert (mom.m, mom.m2, mom.s2) == (1.0, 2.0, 1.0)
    assert mom.lattice is None


def test_moments_deterministic():
    mom = moments(JointStepModel.equal(StepLaw.deterministic(2.5)))
    assert mom.m == 2.5 and mom.s2 == 0.0 and mom.lattice == 2.5


def test_moments_pareto_eta():
    mom = moments(JointStepModel.independent(EXP1, StepLaw.pareto(0.6, 1.0)))
    assert math.isinf(mom.eta_mean)
    assert mom.eta_half_finite
    assert mom.eta_alpha < 0.6
    mom = moments(JointStepModel.independent(EXP1, StepLaw.pareto(0.4, 1.0)))
    assert not mom.eta_half_finite


@pytest.mark.parametrize(
    "model, expected",
    [
        (JointStepModel.equal(EXP1), 0.0),
        (JointStepModel.independent(StepLaw.gamma(2, 1), StepLaw.deterministic(1)), 0.25),
        (JointStepModel.independent(StepLaw.deterministic(1), StepLaw.deterministic(0.5)), 0.0),
    ],
)
def test_rate_constant(model, expected):
    assert rate_constant_bV(moments(model)) == pytest.approx(expected, abs=1e-15)


def test_rate_constant_equal_is_bU_minus_one():
    for law in (EXP1, StepLaw.gamma(3, 2), StepLaw.uniform(0.5, 1.5)):
        mom = moments(JointStepModel.equal(law))
        assert rate_constant_bV(mom) == pytest.approx(renewal_constant_bU(mom) - 1, abs=1e-14)


def test_rate_constant_needs_finite_eta_mean():
    mom = moments(JointStepModel.independent(EXP1, StepLaw.pareto(0.6, 1)))
    with pytest.raises(InfiniteMomentError):
        rate_constant_bV(mom)


def test_lorden_constant_exponential():
    assert lorden_constant(moments(JointStepModel.equal(EXP1))) == 2.0


@pytest.mark.parametrize(
    "j, rate, expected", [(1, 1.0, 1.0), (2, 1.0, 1 / 3), (1, 2.0, 2.0)]
)
def test_variance_constant_examples(j, rate, expected):
    mom = moments(JointStepModel.equal(StepLaw.exponential(rate)))
    assert variance_constant(j, mom) == pytest.approx(expected, rel=1e-14)


def test_variance_constant_large_j_log_space():
    mom = moments(JointStepModel.equal(StepLaw.gamma(2.0, 1.6)))
    for j in (21, 25, 40):
        exact = Fraction(mom.s2) / ((2 * j - 1) * math.factorial(j - 1) ** 2 * Fraction(mom.m) ** (2 * j + 1))
        assert variance_constant(j, mom) == pytest.approx(float(exact), rel=1e-11)


@pytest.mark.parametrize(
    "j, law, t, expected",
    [
        (1, EXP1, 100.0, 10.0),
        (2, EXP1, 1.0, 1.0),
        (2, StepLaw.gamma(4.0, 2.0), 4.0, math.sqrt(2)),  # m = 2, s2 = 1
    ],
)
def test_flt_scale_examples(j, law, t, expected):
    assert flt_scale(j, t, moments(JointStepModel.equal(law))) == pytest.approx(expected, rel=1e-14)


def test_flt_scale_large_j_continuous():
    mom = moments(JointStepModel.equal(StepLaw.gamma(2.0, 1.5)))
    direct = math.sqrt(mom.m ** (-41) * mom.s2 * 3.0**39) / math.factorial(19)
    assert flt_scale(20, 3.0, mom) == pytest.approx(direct, rel=1e-13)
    for j in (21, 30):
        logv = 0.5 * ((-2 * j - 1) * math.log(mom.m) + math.log(mom.s2) + (2 * j - 1) * math.log(3.0))
        assert flt_scale(j, 3.0, mom) == pytest.approx(math.exp(logv) / math.factorial(j - 1), rel=1e-11)


def test_flt_scale_rejects_degenerate():
    with pytest.raises(InfiniteMomentError):
        flt_scale(1, 1.0, moments(JointStepModel.equal(StepLaw.deterministic(1))))


@settings(max_examples=60, deadline=None)
@given(m=st.floats(0.05, 20), s2=st.floats(1e-3, 50))
def test_variance_constant_ratio_identity(m, s2):
    mom = moments(JointStepModel.equal(StepLaw.exponential(1.0)))
    mom = type(mom)(m, s2 + m * m, s2, mom.eta_mean, True, math.inf, None)
    for j in range(1, 11):
        ratio = variance_constant(j + 1, mom) / variance_constant(j, mom)
        assert ratio == pytest.approx((2 * j - 1) / ((2 * j + 1) * j * j * m * m), rel=1e-12)


LAWS = [
    StepLaw.exponential(2.0),
    StepLaw.gamma(2.0, 1.0),
    StepLaw.uniform(0.5, 1.5),
    StepLaw.lognormal(0.1, 0.4),
    StepLaw.pareto(5.0, 1.0),
    StepLaw.deterministic(0.7),
    StepLaw.discrete([(1, 0.25), (2, 0.5), (4, 0.25)]),
]


@pytest.mark.parametrize("law", LAWS, ids=str)
def test_monte_carlo_moments(law):
    x = law.sample(np.random.default_rng(11), 10**6)
    n = len(x)
    se_mean = math.sqrt(law.variance() / n)
    assert abs(x.mean() - law.mean()) <= 4 * se_mean + 1e-12
    mu4 = np.mean((x - x.mean()) ** 4)
    se_var = math.sqrt(max(mu4 - law.variance() ** 2, 0.0) / n)
    assert abs(x.var(ddof=1) - law.variance()) <= 4 * se_var + 1e-12
    assert law.variance() == pytest.approx(law.second_moment() - law.mean() ** 2, abs=1e-12)


@pytest.mark.parametrize("law", LAWS, ids=str)
def test_quantile_inverts_cdf(law):
    u = np.random.default_rng(3).random(200)
    q = law.quantile(u)
    assert np.all(q > 0)
    assert np.all(law.cdf(q) >= u - 1e-9)


def test_equal_coupling_bit_exact():
    x, e = JointStepModel.equal(StepLaw.gamma(2, 1)).sample_pairs(np.random.default_rng(4), 5000)
    assert x is e or np.array_equal(x, e)


def test_comonotone_rank_order():
    model = JointStepModel.comonotone(StepLaw.uniform(0.5, 1.5), StepLaw.exponential(2.0))
    x, e = model.sample_pairs(np.random.default_rng(5), 5000)
    assert np.array_equal(np.argsort(x, kind="stable"), np.argsort(e, kind="stable"))


@pytest.mark.parametrize(
    "family, params",
    [
        ("exponential", (-1.0,)),
        ("gamma", (2.0, 0.0)),
        ("uniform", (-0.1, 1.0)),
        ("uniform", (1.0, 1.0)),
        ("pareto", (0.0, 1.0)),
        ("deterministic", (0.0,)),
        ("exponential", (math.inf,)),
    ],
)
def test_invalid_parameters(family, params):
    with pytest.raises(ValueError):
        StepLaw(family, params)


@pytest.mark.parametrize(
    "support",
    [
        [(1, 0.5), (2, 0.4)],
        [(2, 0.5), (1, 0.5)],
        [(0, 0.5), (1, 0.5)],
        [],
    ],
)
def test_invalid_discrete(support):
    with pytest.raises(ValueError):
        StepLaw.discrete(support)


def test_lattice_span():
    assert StepLaw.discrete([(2, 0.5), (6, 0.5)]).lattice_span == 2.0
    assert StepLaw.discrete([(0.5, 0.5), (1.25, 0.5)]).lattice_span is None
    assert EXP1.lattice_span is None


def test_equal_coupling_requires_same_law():
    with pytest.raises(ValueError):
        JointStepModel("equal", EXP1, StepLaw.exponential(2.0))


positive = st.floats(0.1, 10, allow_nan=False)
law_strategy = st.one_of(
    positive.map(StepLaw.exponential),
    st.tuples(positive, positive).map(lambda p: StepLaw.gamma(*p)),
    st.tuples(st.floats(0, 5), positive).map(lambda p: StepLaw.uniform(p[0], p[0] + p[1])),
    st.tuples(positive, positive).map(lambda p: StepLaw.pareto(*p)),
    positive.map(StepLaw.deterministic),
)


@settings(max_examples=80, deadline=None)
@given(xi=law_strategy, eta=law_strategy, coupling=st.sampled_from(["independent", "comonotone", "equal"]))
def test_model_dict_round_trip(xi, eta, coupling):
    model = JointStepModel.equal(xi) if coupling == "equal" else JointStepModel(coupling, xi, eta)
    assert JointStepModel.from_dict(model.to_dict()) == model


@settings(max_examples=50, deadline=None)
@given(law=law_strategy, seed=st.integers(0, 2**32))
def test_samples_positive(law, seed):
    assert np.all(law.sample(np.random.default_rng(seed), 500) > 0)
