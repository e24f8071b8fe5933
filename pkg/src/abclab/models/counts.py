"""Count-data models: Poisson, geometric, and two Bernoulli toys.

All four use the sum ``S`` of the sample as summary. It is sufficient within
each model, and the exact hooks follow from the conditional law of the
sample given ``S``:

- Poisson: multinomial ``M(S; 1/n, ..., 1/n)``, so
  ``g(y) = S! / (n**S prod y_i!)``.
- geometric: uniform over compositions of ``S`` into ``n`` parts, so
  ``g(y) = S! (n-1)! / (n+S-1)!``.
- Bernoulli: uniform over arrangements, ``g(y) = 1 / C(n, S)``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import betaln, gammaln

from abclab.errors import UndefinedValueError
from abclab.models.base import ModelSpec
from abclab.streams import RandomStream, sample_exponential


def _open_unit(stream: RandomStream, size: int) -> np.ndarray:
    """Uniform draws on the open interval (0, 1)."""
    k = stream.generator.integers(0, 2**53, size=size)
    return (k + 0.5) / 2.0**53


def _sum_stat(s) -> np.ndarray | float:
    arr = np.asarray(s, dtype=float)
    if arr.ndim >= 1 and arr.shape[-1] == 1:
        arr = arr[..., 0]
    return float(arr) if arr.ndim == 0 else arr


def _n_and_sum(y):
    y = np.asarray(y)
    return y.shape[-1], y.sum(axis=-1).astype(float)


def _sum_summary(y):
    return np.asarray(y).sum(axis=1, keepdims=True).astype(float)


def _sum_log_factorials(y):
    return gammaln(np.asarray(y, dtype=float) + 1.0).sum(axis=-1)


# -- Poisson, lambda ~ Exp(1) ------------------------------------------------


def _poisson_sampler(stream, size):
    return sample_exponential(stream, 1.0, size=(size, 1))


def _poisson_logpdf(theta):
    lam = theta[:, 0]
    return np.where(lam > 0, -lam, -np.inf)


def _poisson_simulator(theta, n, stream):
    return stream.generator.poisson(theta[:, :1], size=(theta.shape[0], n))


def _poisson_log_marginal_summary(s, n):
    S = _sum_stat(s)
    return S * np.log(n) - (S + 1.0) * np.log(n + 1.0)


def _poisson_paper_log_marginal_summary(s, n):
    S = _sum_stat(s)
    if np.any(np.asarray(S) == 0):
        raise UndefinedValueError("the printed Poisson marginal (1/S)(1 + 1/n)^-S is undefined at S = 0")
    return -np.log(S) - S * np.log1p(1.0 / n)


def _poisson_log_evidence(y):
    n, S = _n_and_sum(y)
    return gammaln(S + 1.0) - (S + 1.0) * np.log(n + 1.0) - _sum_log_factorials(y)


def _poisson_log_g(y):
    n, S = _n_and_sum(y)
    return gammaln(S + 1.0) - S * np.log(n) - _sum_log_factorials(y)


def poisson_model() -> ModelSpec:
    """Poisson ``P(lambda)`` sample with an ``Exp(1)`` prior on ``lambda``."""
    return ModelSpec(
        name="poisson",
        n_params=1,
        sampler=_poisson_sampler,
        logpdf=_poisson_logpdf,
        simulator=_poisson_simulator,
        summarizer=_sum_summary,
        summary_names=("sum",),
        discrete_summary=True,
        integer_data=True,
        log_marginal_summary=_poisson_log_marginal_summary,
        log_evidence=_poisson_log_evidence,
        log_g_factor=_poisson_log_g,
        paper_log_marginal_summary=_poisson_paper_log_marginal_summary,
    )


# -- geometric, p ~ U(0, 1) --------------------------------------------------


def _unit_sampler(stream, size):
    return _open_unit(stream, size)[:, None]


def _unit_logpdf(theta):
    p = theta[:, 0]
    return np.where((p > 0) & (p < 1), 0.0, -np.inf)


def _geometric_simulator(theta, n, stream):
    # numpy counts trials to the first success; shift to support {0, 1, ...}
    return stream.generator.geometric(theta[:, :1], size=(theta.shape[0], n)) - 1


def _geometric_log_marginal_summary(s, n):
    S = _sum_stat(s)
    return np.log(n) - np.log(S + n + 1.0) - np.log(S + n)


def _geometric_log_evidence(y):
    n, S = _n_and_sum(y)
    return betaln(n + 1.0, S + 1.0)


def _geometric_log_g(y):
    n, S = _n_and_sum(y)
    return gammaln(S + 1.0) + gammaln(n) - gammaln(n + S)


def geometric_model() -> ModelSpec:
    """Geometric ``G(p)`` sample on ``{0, 1, ...}`` with a uniform prior on ``p``."""
    return ModelSpec(
        name="geometric",
        n_params=1,
        sampler=_unit_sampler,
        logpdf=_unit_logpdf,
        simulator=_geometric_simulator,
        summarizer=_sum_summary,
        summary_names=("sum",),
        discrete_summary=True,
        integer_data=True,
        log_marginal_summary=_geometric_log_marginal_summary,
        log_evidence=_geometric_log_evidence,
        log_g_factor=_geometric_log_g,
        # the printed negative-binomial marginal agrees with quadrature
        paper_log_marginal_summary=_geometric_log_marginal_summary,
    )


# -- Bernoulli toys ----------------------------------------------------------


def _log_binom(n, S):
    return gammaln(n + 1.0) - gammaln(S + 1.0) - gammaln(n - S + 1.0)


def _bernoulli_simulator(theta, n, stream):
    u = stream.generator.random(size=(theta.shape[0], n))
    return (u < theta[:, :1]).astype(np.int64)


def bernoulli_model() -> ModelSpec:
    """Bernoulli sample with a uniform prior on the success probability."""

    def log_marginal_summary(s, n):
        S = _sum_stat(s)
        return _log_binom(n, S) + betaln(S + 1.0, n - S + 1.0)

    def log_evidence(y):
        n, S = _n_and_sum(y)
        return betaln(S + 1.0, n - S + 1.0)

    def log_g(y):
        n, S = _n_and_sum(y)
        return -_log_binom(n, S)

    return ModelSpec(
        name="bernoulli",
        n_params=1,
        sampler=_unit_sampler,
        logpdf=_unit_logpdf,
        simulator=_bernoulli_simulator,
        summarizer=_sum_summary,
        summary_names=("sum",),
        discrete_summary=True,
        integer_data=True,
        log_marginal_summary=log_marginal_summary,
        log_evidence=log_evidence,
        log_g_factor=log_g,
    )


def fixed_coin_model(prob: float = 0.5) -> ModelSpec:
    """Bernoulli sample with a known success probability (no parameters)."""
    log_p, log_q = np.log(prob), np.log1p(-prob)

    def sampler(stream, size):
        return np.empty((size, 0))

    def logpdf(theta):
        return np.zeros(theta.shape[0])

    def simulator(theta, n, stream):
        u = stream.generator.random(size=(theta.shape[0], n))
        return (u < prob).astype(np.int64)

    def log_evidence(y):
        n, S = _n_and_sum(y)
        return S * log_p + (n - S) * log_q

    def log_marginal_summary(s, n):
        S = _sum_stat(s)
        return _log_binom(n, S) + S * log_p + (n - S) * log_q

    def log_g(y):
        n, S = _n_and_sum(y)
        return -_log_binom(n, S)

    return ModelSpec(
        name=f"coin({prob:g})",
        n_params=0,
        sampler=sampler,
        logpdf=logpdf,
        simulator=simulator,
        summarizer=_sum_summary,
        summary_names=("sum",),
        discrete_summary=True,
        integer_data=True,
        log_marginal_summary=log_marginal_summary,
        log_evidence=log_evidence,
        log_g_factor=log_g,
    )
