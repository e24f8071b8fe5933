"""Normal sample with known variance and a conjugate normal prior on the mean.

Two such models differing only in the known standard deviation share the
sample mean as sufficient statistic. Writing ``S2 = sum (y_i - ybar)**2``:

    log w(y)   = -(n/2) log 2pi - n log s - (1/2) log(1 + n a^2/s^2)
                 - S2 / (2 s^2) - n ybar^2 / (2 (s^2 + n a^2))
    log m(ybar) = log N(ybar; 0, a^2 + s^2/n)
    log g(y)   = -((n-1)/2) log(2 pi s^2) - (1/2) log n - S2 / (2 s^2)

``g`` is the density of ``u = (y_1 - ybar, ..., y_{n-1} - ybar)`` given
``ybar`` divided by ``n``, the Jacobian of ``y -> (u, ybar)``, so that the
factorisation ``w = g * m`` holds for densities with respect to ``dy``.
"""

from __future__ import annotations

import numpy as np

from abclab.models.base import ModelSpec
from abclab.streams import sample_normal

_LOG_2PI = np.log(2.0 * np.pi)


def _mean_and_spread(y):
    y = np.asarray(y, dtype=float)
    ybar = y.mean(axis=-1)
    s2 = ((y - ybar[..., None]) ** 2).sum(axis=-1)
    return y.shape[-1], ybar, s2


def _mean_stat(s):
    arr = np.asarray(s, dtype=float)
    if arr.ndim >= 1 and arr.shape[-1] == 1:
        arr = arr[..., 0]
    return float(arr) if arr.ndim == 0 else arr


def normal_model(sigma: float, a: float, name: str | None = None) -> ModelSpec:
    """``N(mu, sigma^2)`` sample with prior ``mu ~ N(0, a^2)``."""
    if not (sigma > 0 and a > 0):
        raise ValueError("sigma and a must be positive")
    sigma, a = float(sigma), float(a)

    def sampler(stream, size):
        return sample_normal(stream, 0.0, a, size=(size, 1))

    def logpdf(theta):
        mu = theta[:, 0]
        return -0.5 * _LOG_2PI - np.log(a) - 0.5 * (mu / a) ** 2

    def simulator(theta, n, stream):
        return theta[:, :1] + sample_normal(stream, 0.0, sigma, size=(theta.shape[0], n))

    def summarizer(y):
        return np.asarray(y, dtype=float).mean(axis=1, keepdims=True)

    def log_evidence(y):
        n, ybar, s2 = _mean_and_spread(y)
        return (
            -0.5 * n * _LOG_2PI
            - n * np.log(sigma)
            - 0.5 * np.log1p(n * a * a / (sigma * sigma))
            - s2 / (2.0 * sigma * sigma)
            - n * ybar**2 / (2.0 * (sigma * sigma + n * a * a))
        )

    def log_marginal_summary(s, n):
        ybar = _mean_stat(s)
        v = a * a + sigma * sigma / n
        return -0.5 * (_LOG_2PI + np.log(v)) - ybar**2 / (2.0 * v)

    def paper_log_marginal_summary(s, n):
        # printed form: precision term n * sigma^-1 where the integral gives n * sigma^-2
        ybar = _mean_stat(s)
        v = a * a + sigma * sigma / n
        return (
            -0.5 * _LOG_2PI
            - np.log(a)
            + 0.5 * np.log(n)
            - np.log(sigma)
            - ybar**2 / (2.0 * v)
            - 0.5 * np.log(n / sigma + 1.0 / (a * a))
        )

    def log_g_factor(y):
        n, _, s2 = _mean_and_spread(y)
        return (
            -0.5 * (n - 1) * (_LOG_2PI + 2.0 * np.log(sigma))
            - 0.5 * np.log(n)
            - s2 / (2.0 * sigma * sigma)
        )

    return ModelSpec(
        name=name or f"normal(sigma={sigma:g})",
        n_params=1,
        sampler=sampler,
        logpdf=logpdf,
        simulator=simulator,
        summarizer=summarizer,
        summary_names=("mean",),
        discrete_summary=False,
        integer_data=False,
        log_marginal_summary=log_marginal_summary,
        log_evidence=log_evidence,
        log_g_factor=log_g_factor,
        paper_log_marginal_summary=paper_log_marginal_summary,
    )


def normal_pair(sigma1: float, sigma2: float, a: float) -> tuple[ModelSpec, ModelSpec]:
    """The two known-variance normal models compared through the sample mean."""
    return (
        normal_model(sigma1, a, name=f"normal(sigma={sigma1:g})"),
        normal_model(sigma2, a, name=f"normal(sigma={sigma2:g})"),
    )


def log_discrepancy(y, sigma1: float, sigma2: float):
    """``log g1(y) / g2(y)`` in the reparameterised form.

    Equals ``(n-1) log(sigma2/sigma1) + (sigma2^-2 - sigma1^-2)/2 * Q`` with
    ``Q = sum_{i<n} u_i^2 + (sum_{i<n} u_i)^2`` and ``u_i = y_i - ybar``,
    which is the full spread ``S2``; computed from ``u`` directly here.
    """
    y = np.asarray(y, dtype=float)
    n = y.shape[-1]
    u = y[..., :-1] - y.mean(axis=-1, keepdims=True)
    q = (u**2).sum(axis=-1) + u.sum(axis=-1) ** 2
    return (n - 1) * np.log(sigma2 / sigma1) + 0.5 * (sigma2**-2 - sigma1**-2) * q
