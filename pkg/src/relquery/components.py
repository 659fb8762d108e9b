"""Collapsed conjugate component models.

Four prior/likelihood pairs, one per statistical type:

* Beta-Bernoulli for binary columns
* Dirichlet-Multinomial for categorical columns
* Normal-Inverse-Gamma-Normal for real-valued columns
* Gamma-Poisson for count columns

Each family exposes a marginal likelihood of its incorporated data with the
distributional parameters integrated out, a one-step posterior predictive,
and O(1) incremental sufficient statistics.  Everything is computed in the
log domain; an unlogged probability never appears inside inference.

The Normal-Inverse-Gamma parameterization is (m, r, s, nu): precision
rho ~ Gamma(nu/2, s/2), mean | rho ~ Normal(m, 1/(r*rho)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import SchemaError
from .table import BINARY, CATEGORICAL, COUNT, NUMERICAL, StatType

LOG2 = math.log(2.0)
LOGPI = math.log(math.pi)
LOG2PI = math.log(2.0 * math.pi)


def _betaln(a, b):
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


# ---------------------------------------------------------------------------
# Hyperparameters
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BetaBernoulli:
    a: float = 1.0
    b: float = 1.0
    family = "bernoulli"

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ValueError("Beta hyperparameters must be strictly positive")


@dataclass(frozen=True)
class DirichletMultinomial:
    alpha: float  # symmetric concentration per symbol
    arity: int
    family = "multinomial"

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("Dirichlet concentration must be strictly positive")
        if self.arity < 2:
            raise ValueError("arity must be >= 2")


@dataclass(frozen=True)
class NormalInverseGamma:
    m: float = 0.0
    r: float = 1.0
    s: float = 1.0
    nu: float = 1.0
    family = "normal"

    def __post_init__(self):
        if self.r <= 0 or self.s <= 0 or self.nu <= 0:
            raise ValueError("r, s, nu must be strictly positive")
        if not math.isfinite(self.m):
            raise ValueError("m must be finite")


@dataclass(frozen=True)
class GammaPoisson:
    shape: float = 1.0
    rate: float = 1.0
    family = "poisson"

    def __post_init__(self):
        if self.shape <= 0 or self.rate <= 0:
            raise ValueError("Gamma hyperparameters must be strictly positive")


# ---------------------------------------------------------------------------
# Sufficient statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BernoulliStats:
    n: int = 0
    heads: int = 0
    family = "bernoulli"


@dataclass(frozen=True)
class MultinomialStats:
    counts: tuple = ()
    family = "multinomial"

    @property
    def n(self):
        return sum(self.counts)


@dataclass(frozen=True)
class NormalStats:
    n: int = 0
    sum_x: float = 0.0
    sum_xx: float = 0.0
    family = "normal"


@dataclass(frozen=True)
class PoissonStats:
    n: int = 0
    sum_x: int = 0
    sum_log_fact: float = 0.0
    family = "poisson"


def empty_stats(hyper):
    if hyper.family == "bernoulli":
        return BernoulliStats()
    if hyper.family == "multinomial":
        return MultinomialStats(counts=(0,) * hyper.arity)
    if hyper.family == "normal":
        return NormalStats()
    if hyper.family == "poisson":
        return PoissonStats()
    raise TypeError(f"unknown family: {hyper.family!r}")


def _check_family(stats, hyper):
    if stats.family != hyper.family:
        raise TypeError(f"family mismatch: stats={stats.family}, hyper={hyper.family}")


def _check_value(x, family, hyper=None):
    if family == "bernoulli":
        if x not in (0, 1):
            raise SchemaError(f"binary value must be 0 or 1: {x!r}")
        return int(x)
    if family == "multinomial":
        xi = int(x)
        if xi != x or not (0 <= xi < hyper.arity):
            raise SchemaError(f"categorical code out of range: {x!r}")
        return xi
    if family == "normal":
        xf = float(x)
        if not math.isfinite(xf):
            raise SchemaError(f"numerical value must be finite: {x!r}")
        return xf
    if family == "poisson":
        xi = int(x)
        if xi != x or xi < 0:
            raise SchemaError(f"count value must be a non-negative integer: {x!r}")
        return xi
    raise TypeError(f"unknown family: {family!r}")


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def incorporate_value(stats, x, hyper=None):
    """Return stats with one observation added."""
    if stats.family == "bernoulli":
        x = _check_value(x, "bernoulli")
        return BernoulliStats(stats.n + 1, stats.heads + x)
    if stats.family == "multinomial":
        arity = len(stats.counts)
        xi = int(x)
        if xi != x or not (0 <= xi < arity):
            raise SchemaError(f"categorical code out of range: {x!r}")
        counts = list(stats.counts)
        counts[xi] += 1
        return MultinomialStats(tuple(counts))
    if stats.family == "normal":
        x = _check_value(x, "normal")
        return NormalStats(stats.n + 1, stats.sum_x + x, stats.sum_xx + x * x)
    if stats.family == "poisson":
        x = _check_value(x, "poisson")
        return PoissonStats(stats.n + 1, stats.sum_x + x, stats.sum_log_fact + math.lgamma(x + 1))
    raise TypeError(f"unknown family: {stats.family!r}")


def unincorporate_value(stats, x, hyper=None):
    """Return stats with one previously incorporated observation removed."""
    if stats.family == "bernoulli":
        x = _check_value(x, "bernoulli")
        if stats.n < 1 or stats.heads - x < 0:
            raise ValueError("cannot unincorporate from empty or inconsistent stats")
        return BernoulliStats(stats.n - 1, stats.heads - x)
    if stats.family == "multinomial":
        xi = int(x)
        if stats.counts[xi] < 1:
            raise ValueError("cannot unincorporate a symbol with zero count")
        counts = list(stats.counts)
        counts[xi] -= 1
        return MultinomialStats(tuple(counts))
    if stats.family == "normal":
        if stats.n < 1:
            raise ValueError("cannot unincorporate from empty stats")
        x = _check_value(x, "normal")
        return NormalStats(stats.n - 1, stats.sum_x - x, stats.sum_xx - x * x)
    if stats.family == "poisson":
        if stats.n < 1:
            raise ValueError("cannot unincorporate from empty stats")
        x = _check_value(x, "poisson")
        return PoissonStats(stats.n - 1, stats.sum_x - x, stats.sum_log_fact - math.lgamma(x + 1))
    raise TypeError(f"unknown family: {stats.family!r}")


def nig_log_z(r, s, nu):
    return ((nu + 1.0) / 2.0) * LOG2 + 0.5 * LOGPI - 0.5 * math.log(r) \
        - (nu / 2.0) * math.log(s) + math.lgamma(nu / 2.0)


def nig_posterior(hyper: NormalInverseGamma, n, sum_x, sum_xx):
    rn = hyper.r + n
    nun = hyper.nu + n
    mn = (hyper.r * hyper.m + sum_x) / rn
    sn = hyper.s + sum_xx + hyper.r * hyper.m * hyper.m - rn * mn * mn
    # sn > 0 analytically; guard against catastrophic cancellation
    return rn, nun, mn, max(sn, 1e-300)


def log_marginal(stats, hyper):
    """log of the marginal likelihood of the incorporated data under the prior.

    log_marginal(empty) == 0 for every family.
    """
    _check_family(stats, hyper)
    if stats.family == "bernoulli":
        return _betaln(hyper.a + stats.heads, hyper.b + stats.n - stats.heads) \
            - _betaln(hyper.a, hyper.b)
    if stats.family == "multinomial":
        if len(stats.counts) != hyper.arity:
            raise TypeError("stats arity does not match hyper arity")
        A = hyper.alpha * hyper.arity
        n = stats.n
        out = math.lgamma(A) - math.lgamma(A + n)
        for c in stats.counts:
            out += math.lgamma(hyper.alpha + c) - math.lgamma(hyper.alpha)
        return out
    if stats.family == "normal":
        if stats.n == 0:
            return 0.0
        rn, nun, _, sn = nig_posterior(hyper, stats.n, stats.sum_x, stats.sum_xx)
        return -(stats.n / 2.0) * LOG2PI + nig_log_z(rn, sn, nun) \
            - nig_log_z(hyper.r, hyper.s, hyper.nu)
    if stats.family == "poisson":
        return math.lgamma(hyper.shape + stats.sum_x) - math.lgamma(hyper.shape) \
            + hyper.shape * math.log(hyper.rate) \
            - (hyper.shape + stats.sum_x) * math.log(hyper.rate + stats.n) \
            - stats.sum_log_fact
    raise TypeError(f"unknown family: {stats.family!r}")


def log_predictive(x, stats, hyper):
    """log p(x | incorporated data); equals log_marginal(stats+x) - log_marginal(stats)."""
    _check_family(stats, hyper)
    _check_value(x, stats.family, hyper)
    return log_marginal(incorporate_value(stats, x), hyper) - log_marginal(stats, hyper)


# ---------------------------------------------------------------------------
# Data-scaled defaults
# ---------------------------------------------------------------------------

def default_hyper(stat_type: StatType, present_values=()):
    """Default hyperparameters; location/scale families adapt to column data."""
    values = list(present_values)
    if stat_type.kind == BINARY:
        return BetaBernoulli(1.0, 1.0)
    if stat_type.kind == CATEGORICAL:
        return DirichletMultinomial(alpha=1.0 / stat_type.arity, arity=stat_type.arity)
    if stat_type.kind == NUMERICAL:
        if values:
            m = sum(values) / len(values)
            var = sum((v - m) ** 2 for v in values) / len(values)
        else:
            m, var = 0.0, 1.0
        return NormalInverseGamma(m=m, r=1.0, s=var if var > 0 else 1.0, nu=1.0)
    if stat_type.kind == COUNT:
        mean = (sum(values) / len(values)) if values else 1.0
        return GammaPoisson(shape=1.0, rate=1.0 / mean if mean > 0 else 1.0)
    raise SchemaError(f"no component family for {stat_type.kind!r}")


def family_for(stat_type: StatType) -> str:
    return {
        BINARY: "bernoulli",
        CATEGORICAL: "multinomial",
        NUMERICAL: "normal",
        COUNT: "poisson",
    }[stat_type.kind]
