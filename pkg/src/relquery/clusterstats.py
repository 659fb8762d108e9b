"""Per-cluster sufficient statistics for one column, vectorized over clusters.

The Gibbs kernels score every candidate cluster for a row at once, so each
(block, column) pair keeps its statistics as arrays indexed by cluster.
Semantics match the scalar forms in ``components`` exactly; the test suite
pins the two implementations against each other.

Counts live in float64 arrays (exact for the integer magnitudes handled
here); cluster removal shifts indices down, mirroring the dense labels the
block keeps for its row partition.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import gammaln

from . import components as cm

LOGPI = math.log(math.pi)
LOG2PI = math.log(2.0 * math.pi)


def _nig_log_z(r, s, nu):
    return ((nu + 1.0) / 2.0) * cm.LOG2 + 0.5 * LOGPI - 0.5 * np.log(r) \
        - (nu / 2.0) * np.log(s) + gammaln(nu / 2.0)


class ColumnClusterStats:
    """Shared array plumbing; subclasses add the family math."""

    fields = ()

    def __init__(self, hyper, arrays):
        self.hyper = hyper
        for name, arr in zip(self.fields, arrays):
            setattr(self, name, arr)

    @property
    def n_clusters(self):
        return len(getattr(self, self.fields[0]))

    @classmethod
    def empty(cls, hyper, n_clusters):
        return cls(hyper, [np.zeros(cls._shape(hyper, n_clusters, f)) for f in cls.fields])

    @staticmethod
    def _shape(hyper, n_clusters, field):
        return n_clusters

    def copy(self):
        return type(self)(self.hyper, [np.array(getattr(self, f)) for f in self.fields])

    def add_cluster(self):
        for f in self.fields:
            arr = getattr(self, f)
            pad = np.zeros((1,) + arr.shape[1:])
            setattr(self, f, np.concatenate([arr, pad]))

    def remove_cluster(self, y):
        for f in self.fields:
            setattr(self, f, np.delete(getattr(self, f), y, axis=0))

    def snapshot(self, y):
        return tuple(np.array(getattr(self, f)[y]) for f in self.fields)

    def restore(self, y, snap):
        for f, value in zip(self.fields, snap):
            getattr(self, f)[y] = value

    def marginal_sum(self, hyper=None):
        return float(np.sum(self.marginal_vec(hyper)))

    # family hooks ------------------------------------------------------
    def incorporate(self, y, x):
        raise NotImplementedError

    def unincorporate(self, y, x):
        raise NotImplementedError

    def predictive_vec(self, x):
        raise NotImplementedError

    def prior_predictive(self, x):
        return float(cm.log_predictive(x, cm.empty_stats(self.hyper), self.hyper))

    def marginal_vec(self, hyper=None):
        raise NotImplementedError

    def grid_logp(self, dim, grid):
        """Summed cluster marginals for each value of one hyperparameter
        dimension; the generic path loops, families override with
        broadcasting where it pays off."""
        from dataclasses import replace

        return np.array([
            float(np.sum(self.marginal_vec(replace(self.hyper, **{dim: float(g)}))))
            for g in grid
        ])

    def stats_for(self, y):
        raise NotImplementedError


class BernoulliClusterStats(ColumnClusterStats):
    fields = ("n", "heads")

    @classmethod
    def from_grouped(cls, values, mask, z, n_clusters, hyper):
        idx = z[mask]
        xs = values[mask]
        n = np.bincount(idx, minlength=n_clusters).astype(float)
        heads = np.bincount(idx, weights=xs, minlength=n_clusters)
        return cls(hyper, [n, heads])

    def incorporate(self, y, x):
        self.n[y] += 1
        self.heads[y] += x

    def unincorporate(self, y, x):
        self.n[y] -= 1
        self.heads[y] -= x

    def predictive_vec(self, x):
        denom = self.hyper.a + self.hyper.b + self.n
        num = (self.hyper.a + self.heads) if x else (self.hyper.b + self.n - self.heads)
        return np.log(num) - np.log(denom)

    def marginal_vec(self, hyper=None):
        h = hyper or self.hyper
        tails = self.n - self.heads
        return (
            gammaln(h.a + self.heads) + gammaln(h.b + tails) - gammaln(h.a + h.b + self.n)
            - (gammaln(h.a) + gammaln(h.b) - gammaln(h.a + h.b))
        )

    def prior_predictive(self, x):
        h = self.hyper
        return math.log((h.a if x else h.b) / (h.a + h.b))

    def grid_logp(self, dim, grid):
        g = np.asarray(grid)[:, None]
        a = g if dim == "a" else self.hyper.a
        b = g if dim == "b" else self.hyper.b
        tails = self.n - self.heads
        per = (gammaln(a + self.heads) + gammaln(b + tails) - gammaln(a + b + self.n)
               - (gammaln(a) + gammaln(b) - gammaln(a + b)))
        return per.sum(axis=1)

    def stats_for(self, y):
        return cm.BernoulliStats(int(self.n[y]), int(self.heads[y]))


class MultinomialClusterStats(ColumnClusterStats):
    fields = ("n", "counts")

    @staticmethod
    def _shape(hyper, n_clusters, field):
        return (n_clusters, hyper.arity) if field == "counts" else n_clusters

    @classmethod
    def from_grouped(cls, values, mask, z, n_clusters, hyper):
        idx = z[mask]
        xs = values[mask].astype(int)
        n = np.bincount(idx, minlength=n_clusters).astype(float)
        counts = np.zeros((n_clusters, hyper.arity))
        np.add.at(counts, (idx, xs), 1.0)
        return cls(hyper, [n, counts])

    def incorporate(self, y, x):
        self.n[y] += 1
        self.counts[y, int(x)] += 1

    def unincorporate(self, y, x):
        self.n[y] -= 1
        self.counts[y, int(x)] -= 1

    def predictive_vec(self, x):
        h = self.hyper
        return np.log(h.alpha + self.counts[:, int(x)]) - np.log(h.alpha * h.arity + self.n)

    def marginal_vec(self, hyper=None):
        h = hyper or self.hyper
        A = h.alpha * h.arity
        return (
            gammaln(A) - gammaln(A + self.n)
            + np.sum(gammaln(h.alpha + self.counts), axis=1)
            - h.arity * gammaln(h.alpha)
        )

    def prior_predictive(self, x):
        return -math.log(self.hyper.arity)

    def grid_logp(self, dim, grid):
        assert dim == "alpha"
        arity = self.hyper.arity
        alpha = np.asarray(grid)[:, None]
        big_a = alpha * arity
        per = (gammaln(big_a) - gammaln(big_a + self.n)
               + gammaln(alpha[:, :, None] + self.counts[None, :, :]).sum(axis=2)
               - arity * gammaln(alpha))
        return per.sum(axis=1)

    def stats_for(self, y):
        return cm.MultinomialStats(tuple(int(c) for c in self.counts[y]))


class NormalClusterStats(ColumnClusterStats):
    fields = ("n", "sum_x", "sum_xx")

    @classmethod
    def from_grouped(cls, values, mask, z, n_clusters, hyper):
        idx = z[mask]
        xs = values[mask]
        n = np.bincount(idx, minlength=n_clusters).astype(float)
        sum_x = np.bincount(idx, weights=xs, minlength=n_clusters)
        sum_xx = np.bincount(idx, weights=xs * xs, minlength=n_clusters)
        return cls(hyper, [n, sum_x, sum_xx])

    def incorporate(self, y, x):
        self.n[y] += 1
        self.sum_x[y] += x
        self.sum_xx[y] += x * x

    def unincorporate(self, y, x):
        self.n[y] -= 1
        self.sum_x[y] -= x
        self.sum_xx[y] -= x * x

    def _posterior(self, hyper=None):
        h = hyper or self.hyper
        rn = h.r + self.n
        nun = h.nu + self.n
        mn = (h.r * h.m + self.sum_x) / rn
        sn = h.s + self.sum_xx + h.r * h.m * h.m - rn * mn * mn
        return rn, nun, mn, np.maximum(sn, 1e-300)

    def predictive_vec(self, x):
        rn, nun, mn, sn = self._posterior()
        r2 = rn + 1.0
        m2 = (rn * mn + x) / r2
        s2 = np.maximum(sn + x * x + rn * mn * mn - r2 * m2 * m2, 1e-300)
        # fused _nig_log_z(r2, s2, nun+1) - _nig_log_z(rn, sn, nun)
        return (0.5 * (cm.LOG2 - LOG2PI)
                + 0.5 * (np.log(rn) - np.log(r2))
                + (nun / 2.0) * np.log(sn) - ((nun + 1.0) / 2.0) * np.log(s2)
                + gammaln((nun + 1.0) / 2.0) - gammaln(nun / 2.0))

    def prior_predictive(self, x):
        h = self.hyper
        r2 = h.r + 1.0
        m2 = (h.r * h.m + x) / r2
        s2 = max(h.s + x * x + h.r * h.m * h.m - r2 * m2 * m2, 1e-300)
        return (0.5 * (cm.LOG2 - LOG2PI)
                + 0.5 * (math.log(h.r) - math.log(r2))
                + (h.nu / 2.0) * math.log(h.s) - ((h.nu + 1.0) / 2.0) * math.log(s2)
                + math.lgamma((h.nu + 1.0) / 2.0) - math.lgamma(h.nu / 2.0))

    def grid_logp(self, dim, grid):
        import types

        fields = {"m": self.hyper.m, "r": self.hyper.r, "s": self.hyper.s,
                  "nu": self.hyper.nu}
        fields[dim] = np.asarray(grid)[:, None]
        probe = types.SimpleNamespace(family="normal", **fields)
        return self.marginal_vec(probe).sum(axis=1)

    def marginal_vec(self, hyper=None):
        h = hyper or self.hyper
        rn, nun, _, sn = self._posterior(h)
        return -(self.n / 2.0) * LOG2PI + _nig_log_z(rn, sn, nun) \
            - _nig_log_z(h.r, h.s, h.nu)

    def stats_for(self, y):
        return cm.NormalStats(int(self.n[y]), float(self.sum_x[y]), float(self.sum_xx[y]))


class PoissonClusterStats(ColumnClusterStats):
    fields = ("n", "sum_x", "sum_log_fact")

    @classmethod
    def from_grouped(cls, values, mask, z, n_clusters, hyper):
        idx = z[mask]
        xs = values[mask]
        n = np.bincount(idx, minlength=n_clusters).astype(float)
        sum_x = np.bincount(idx, weights=xs, minlength=n_clusters)
        slf = np.bincount(idx, weights=gammaln(xs + 1.0), minlength=n_clusters)
        return cls(hyper, [n, sum_x, slf])

    def incorporate(self, y, x):
        self.n[y] += 1
        self.sum_x[y] += x
        self.sum_log_fact[y] += math.lgamma(x + 1)

    def unincorporate(self, y, x):
        self.n[y] -= 1
        self.sum_x[y] -= x
        self.sum_log_fact[y] -= math.lgamma(x + 1)

    def predictive_vec(self, x):
        h = self.hyper
        a = h.shape + self.sum_x
        return gammaln(a + x) - gammaln(a) - math.lgamma(x + 1) \
            + a * np.log(h.rate + self.n) - (a + x) * np.log(h.rate + self.n + 1.0)

    def marginal_vec(self, hyper=None):
        h = hyper or self.hyper
        return gammaln(h.shape + self.sum_x) - gammaln(h.shape) \
            + h.shape * math.log(h.rate) \
            - (h.shape + self.sum_x) * np.log(h.rate + self.n) \
            - self.sum_log_fact

    def prior_predictive(self, x):
        h = self.hyper
        return (math.lgamma(h.shape + x) - math.lgamma(h.shape) - math.lgamma(x + 1)
                + h.shape * math.log(h.rate) - (h.shape + x) * math.log(h.rate + 1.0))

    def grid_logp(self, dim, grid):
        import types

        fields = {"shape": self.hyper.shape, "rate": self.hyper.rate}
        fields[dim] = np.asarray(grid)[:, None]
        probe = types.SimpleNamespace(family="poisson", **fields)
        h = probe
        per = (gammaln(h.shape + self.sum_x) - gammaln(h.shape)
               + h.shape * np.log(h.rate)
               - (h.shape + self.sum_x) * np.log(h.rate + self.n)
               - self.sum_log_fact)
        return per.sum(axis=1)

    def stats_for(self, y):
        return cm.PoissonStats(int(self.n[y]), int(self.sum_x[y]), float(self.sum_log_fact[y]))


def _batch_bernoulli(group):
    n = np.stack([st.n for st, _ in group])
    heads = np.stack([st.heads for st, _ in group])
    a = np.array([[st.hyper.a] for st, _ in group])
    b = np.array([[st.hyper.b] for st, _ in group])
    xs = np.array([[x] for _, x in group])
    num = np.where(xs >= 0.5, a + heads, b + n - heads)
    return (np.log(num) - np.log(a + b + n)).sum(axis=0)


def _batch_multinomial(group):
    sel = np.stack([st.counts[:, int(x)] for st, x in group])
    n = np.stack([st.n for st, _ in group])
    alpha = np.array([[st.hyper.alpha] for st, _ in group])
    total = np.array([[st.hyper.alpha * st.hyper.arity] for st, _ in group])
    return (np.log(alpha + sel) - np.log(total + n)).sum(axis=0)


def _batch_normal(group):
    n = np.stack([st.n for st, _ in group])
    sum_x = np.stack([st.sum_x for st, _ in group])
    sum_xx = np.stack([st.sum_xx for st, _ in group])
    m = np.array([[st.hyper.m] for st, _ in group])
    r = np.array([[st.hyper.r] for st, _ in group])
    s = np.array([[st.hyper.s] for st, _ in group])
    nu = np.array([[st.hyper.nu] for st, _ in group])
    x = np.array([[x] for _, x in group])
    rn = r + n
    nun = nu + n
    mn = (r * m + sum_x) / rn
    sn = np.maximum(s + sum_xx + r * m * m - rn * mn * mn, 1e-300)
    r2 = rn + 1.0
    m2 = (rn * mn + x) / r2
    s2 = np.maximum(sn + x * x + rn * mn * mn - r2 * m2 * m2, 1e-300)
    per = (0.5 * (cm.LOG2 - LOG2PI)
           + 0.5 * (np.log(rn) - np.log(r2))
           + (nun / 2.0) * np.log(sn) - ((nun + 1.0) / 2.0) * np.log(s2)
           + gammaln((nun + 1.0) / 2.0) - gammaln(nun / 2.0))
    return per.sum(axis=0)


def _batch_poisson(group):
    sum_x = np.stack([st.sum_x for st, _ in group])
    n = np.stack([st.n for st, _ in group])
    shape = np.array([[st.hyper.shape] for st, _ in group])
    rate = np.array([[st.hyper.rate] for st, _ in group])
    x = np.array([[x] for _, x in group])
    lgx = np.array([[math.lgamma(x + 1)] for _, x in group])
    a = shape + sum_x
    per = (gammaln(a + x) - gammaln(a) - lgx
           + a * np.log(rate + n) - (a + x) * np.log(rate + n + 1.0))
    return per.sum(axis=0)


_BATCHERS = {}


def batched_predictive(pairs):
    """Sum of predictive_vec(x) over (stats, x) pairs, with same-family
    columns fused into one vectorized computation."""
    if len(pairs) == 1:
        st, x = pairs[0]
        return st.predictive_vec(x)
    groups = {}
    for st, x in pairs:
        groups.setdefault(type(st), []).append((st, x))
    total = None
    for cls, group in groups.items():
        if len(group) == 1:
            part = group[0][0].predictive_vec(group[0][1])
        else:
            part = _BATCHERS[cls](group)
        total = part if total is None else total + part
    return total


_BY_FAMILY = {
    "bernoulli": BernoulliClusterStats,
    "multinomial": MultinomialClusterStats,
    "normal": NormalClusterStats,
    "poisson": PoissonClusterStats,
}

_BATCHERS.update({
    BernoulliClusterStats: _batch_bernoulli,
    MultinomialClusterStats: _batch_multinomial,
    NormalClusterStats: _batch_normal,
    PoissonClusterStats: _batch_poisson,
})


def cluster_stats_for(hyper, values, mask, z, n_clusters):
    """Build the array form of a column's per-cluster statistics."""
    return _BY_FAMILY[hyper.family].from_grouped(values, mask, np.asarray(z), n_clusters, hyper)


def empty_cluster_stats(hyper, n_clusters):
    return _BY_FAMILY[hyper.family].empty(hyper, n_clusters)
