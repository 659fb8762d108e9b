"""Conjugate component models against closed forms, quadrature, and each other."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relquery import components as cm
from relquery.clusterstats import cluster_stats_for
from relquery.errors import SchemaError

from oracles import integrate_density, nig_marginal_by_grid

FAMILIES = {
    "bernoulli": (cm.BetaBernoulli(1.0, 1.0), lambda rng: int(rng.integers(0, 2))),
    "multinomial": (cm.DirichletMultinomial(0.7, 4), lambda rng: int(rng.integers(0, 4))),
    "normal": (cm.NormalInverseGamma(0.5, 2.0, 3.0, 1.5), lambda rng: float(rng.normal())),
    "poisson": (cm.GammaPoisson(2.0, 0.5), lambda rng: int(rng.poisson(3.0))),
}


def incorporate_all(hyper, values):
    stats = cm.empty_stats(hyper)
    for x in values:
        stats = cm.incorporate_value(stats, x)
    return stats


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def test_beta_bernoulli_marginal_two_heads():
    # integral of theta^2 over [0,1] is 1/3
    hyper = cm.BetaBernoulli(1.0, 1.0)
    stats = incorporate_all(hyper, [1, 1])
    assert cm.log_marginal(stats, hyper) == pytest.approx(math.log(1.0 / 3.0), abs=1e-12)
    # fine-grid quadrature over theta agrees
    thetas = np.linspace(0.0, 1.0, 200001)
    quad = np.trapezoid(thetas**2, thetas)
    assert cm.log_marginal(stats, hyper) == pytest.approx(math.log(quad), abs=1e-8)


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_empty_marginal_is_zero(family):
    hyper, _ = FAMILIES[family]
    assert cm.log_marginal(cm.empty_stats(hyper), hyper) == 0.0


def test_beta_bernoulli_predictive_closed_forms():
    hyper = cm.BetaBernoulli(1.0, 1.0)
    one = incorporate_all(hyper, [1])
    assert cm.log_predictive(1, one, hyper) == pytest.approx(math.log(2.0 / 3.0), abs=1e-12)
    assert cm.log_predictive(1, cm.empty_stats(hyper), hyper) == pytest.approx(
        math.log(0.5), abs=1e-12)


def test_dirichlet_symmetric_predictive():
    hyper = cm.DirichletMultinomial(1.0, 3)
    for symbol in range(3):
        assert cm.log_predictive(symbol, cm.empty_stats(hyper), hyper) == pytest.approx(
            math.log(1.0 / 3.0), abs=1e-12)


def test_nig_single_point_matches_grid_integration():
    hyper = cm.NormalInverseGamma(m=0.5, r=2.0, s=3.0, nu=1.5)
    for x in (-1.0, 0.5, 2.5):
        stats = incorporate_all(hyper, [x])
        grid = nig_marginal_by_grid([x], hyper.m, hyper.r, hyper.s, hyper.nu)
        assert cm.log_marginal(stats, hyper) == pytest.approx(math.log(grid), abs=5e-4)


def test_nig_two_points_match_grid_integration():
    hyper = cm.NormalInverseGamma(m=0.0, r=1.0, s=2.0, nu=2.0)
    xs = [0.4, -1.1]
    stats = incorporate_all(hyper, xs)
    grid = nig_marginal_by_grid(xs, hyper.m, hyper.r, hyper.s, hyper.nu)
    assert cm.log_marginal(stats, hyper) == pytest.approx(math.log(grid), abs=5e-4)


# ---------------------------------------------------------------------------
# Properties: chain rule, normalization, exchangeability, round trips
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_chain_rule_randomized(family):
    hyper, draw = FAMILIES[family]
    rng = np.random.Generator(np.random.Philox(7))
    for _ in range(1000):
        length = int(rng.integers(1, 7))
        values = [draw(rng) for _ in range(length)]
        total = 0.0
        stats = cm.empty_stats(hyper)
        for x in values:
            total += cm.log_predictive(x, stats, hyper)
            stats = cm.incorporate_value(stats, x)
        assert cm.log_marginal(stats, hyper) == pytest.approx(total, abs=1e-8)


@pytest.mark.parametrize(
    "hyper,domain",
    [
        (cm.BetaBernoulli(2.5, 0.7), range(2)),
        (cm.DirichletMultinomial(0.3, 5), range(5)),
    ],
)
def test_discrete_predictive_normalization(hyper, domain):
    stats = incorporate_all(hyper, [d for d in domain][:2])
    total = sum(math.exp(cm.log_predictive(x, stats, hyper)) for x in domain)
    assert total == pytest.approx(1.0, abs=1e-10)


def test_normal_predictive_normalizes_by_quadrature():
    hyper = cm.NormalInverseGamma(m=1.0, r=0.5, s=2.0, nu=1.0)
    for data in ([], [0.3, 2.0]):
        stats = incorporate_all(hyper, data)
        total = integrate_density(
            lambda x: math.exp(cm.log_predictive(x, stats, hyper)),
            loc=1.0, scale=3.0)
        assert total == pytest.approx(1.0, abs=1e-4)


def test_poisson_predictive_normalizes_by_summation():
    hyper = cm.GammaPoisson(2.0, 0.25)
    stats = incorporate_all(hyper, [3, 9, 1])
    total = sum(math.exp(cm.log_predictive(x, stats, hyper)) for x in range(4000))
    assert total == pytest.approx(1.0, abs=1e-4)


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_exchangeability(family):
    hyper, draw = FAMILIES[family]
    rng = np.random.Generator(np.random.Philox(21))
    values = [draw(rng) for _ in range(8)]
    forward = cm.log_marginal(incorporate_all(hyper, values), hyper)
    backward = cm.log_marginal(incorporate_all(hyper, values[::-1]), hyper)
    assert forward == pytest.approx(backward, rel=1e-9, abs=1e-12)


@pytest.mark.parametrize("family", sorted(FAMILIES))
def test_incorporate_unincorporate_round_trip(family):
    hyper, draw = FAMILIES[family]
    rng = np.random.Generator(np.random.Philox(33))
    base = incorporate_all(hyper, [draw(rng) for _ in range(5)])
    x = draw(rng)
    restored = cm.unincorporate_value(cm.incorporate_value(base, x), x)
    if family in ("bernoulli", "multinomial"):
        assert restored == base
    else:
        for field in ("n", "sum_x"):
            assert getattr(restored, field) == pytest.approx(getattr(base, field), rel=1e-9)


def test_incorporate_then_unincorporate_empty():
    hyper = cm.BetaBernoulli(1, 1)
    stats = cm.incorporate_value(cm.empty_stats(hyper), 1)
    assert cm.unincorporate_value(stats, 1) == cm.empty_stats(hyper)


def test_normal_order_independent_stats():
    hyper = cm.NormalInverseGamma()
    a = incorporate_all(hyper, [2.0, 4.0])
    b = incorporate_all(hyper, [4.0, 2.0])
    assert a == b


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------

def test_family_mismatch_raises():
    with pytest.raises(TypeError):
        cm.log_marginal(cm.BernoulliStats(), cm.GammaPoisson())


def test_unincorporate_from_empty_raises():
    hyper = cm.BetaBernoulli(1, 1)
    with pytest.raises(ValueError):
        cm.unincorporate_value(cm.empty_stats(hyper), 1)


def test_out_of_domain_values_raise():
    with pytest.raises(SchemaError):
        cm.log_predictive(-1, cm.empty_stats(cm.GammaPoisson()), cm.GammaPoisson())
    with pytest.raises(SchemaError):
        cm.log_predictive(2, cm.empty_stats(cm.BetaBernoulli()), cm.BetaBernoulli())
    with pytest.raises(SchemaError):
        cm.log_predictive(float("inf"), cm.empty_stats(cm.NormalInverseGamma()),
                          cm.NormalInverseGamma())


def test_bad_hyperparameters_raise():
    with pytest.raises(ValueError):
        cm.BetaBernoulli(0.0, 1.0)
    with pytest.raises(ValueError):
        cm.NormalInverseGamma(nu=-1.0)


# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

def test_default_hypers_are_data_scaled():
    from relquery.table import StatType

    nig = cm.default_hyper(StatType("numerical"), [1.0, 3.0, 5.0])
    assert nig.m == pytest.approx(3.0)
    assert nig.s == pytest.approx(np.var([1.0, 3.0, 5.0]))
    poisson = cm.default_hyper(StatType("count"), [2, 4])
    assert poisson.rate == pytest.approx(1.0 / 3.0)
    cat = cm.default_hyper(StatType("categorical", arity=4))
    assert cat.alpha == pytest.approx(0.25)


# ---------------------------------------------------------------------------
# Vectorized cluster stats agree with the scalar components exactly
# ---------------------------------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.data())
def test_cluster_stats_match_scalar_components(data):
    family = data.draw(st.sampled_from(sorted(FAMILIES)), label="family")
    hyper, draw = FAMILIES[family]
    rng = np.random.Generator(np.random.Philox(data.draw(st.integers(0, 2**31), label="seed")))
    n = data.draw(st.integers(2, 12), label="n")
    k = data.draw(st.integers(1, 4), label="k")
    z = np.array([int(rng.integers(0, k)) for _ in range(n)])
    mask = np.array([rng.random() < 0.8 for _ in range(n)])
    values = np.array([float(draw(rng)) for _ in range(n)])
    vec = cluster_stats_for(hyper, values, mask, z, k)
    x_new = float(draw(rng))
    pred = vec.predictive_vec(x_new)
    marg = vec.marginal_vec()
    for y in range(k):
        stats = cm.empty_stats(hyper)
        for r in range(n):
            if mask[r] and z[r] == y:
                stats = cm.incorporate_value(stats, values[r])
        assert marg[y] == pytest.approx(cm.log_marginal(stats, hyper), rel=1e-10, abs=1e-10)
        assert pred[y] == pytest.approx(
            cm.log_predictive(x_new, stats, hyper), rel=1e-9, abs=1e-9)
    assert vec.prior_predictive(x_new) == pytest.approx(
        cm.log_predictive(x_new, cm.empty_stats(hyper), hyper), rel=1e-12, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.data())
def test_batched_predictive_matches_per_column_sum(data):
    from relquery.clusterstats import batched_predictive

    rng = np.random.Generator(np.random.Philox(data.draw(st.integers(0, 2**31), label="seed")))
    k = data.draw(st.integers(1, 5), label="k")
    n = 3 * k
    pairs = []
    for _ in range(data.draw(st.integers(2, 7), label="cols")):
        family = data.draw(st.sampled_from(sorted(FAMILIES)))
        hyper, draw = FAMILIES[family]
        z = np.array([int(rng.integers(0, k)) for _ in range(n)])
        mask = np.array([rng.random() < 0.8 for _ in range(n)])
        values = np.array([float(draw(rng)) for _ in range(n)])
        stats = cluster_stats_for(hyper, values, mask, z, k)
        pairs.append((stats, float(draw(rng))))
    fused = batched_predictive(pairs)
    start = np.zeros(k)
    for stats, x in pairs:
        start = start + stats.predictive_vec(x)
    assert np.allclose(fused, start, rtol=1e-10, atol=1e-12)
