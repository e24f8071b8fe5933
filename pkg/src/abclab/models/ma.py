"""Moving-average MA(q) series, q in {1, 2}, with known innovation scale.

``y_t = e_t + theta_1 e_{t-1} + theta_2 e_{t-2}`` with ``e_t ~ N(0, s^2)``.
The prior is uniform over the invertibility region: ``(-1, 1)`` for MA(1)
and the triangle ``theta_2 > -1, theta_1 + theta_2 > -1, theta_1 - theta_2 < 1``
for MA(2), whose area is 4.

Summaries are empirical autocovariances ``(1/n) sum_t y_t y_{t+k}`` for lags
``0..L``; the series has known zero mean, so no centring is applied and
``E[acov_k] = (n - k) / n * gamma_k`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from abclab.models.base import ModelSpec
from abclab.quadrature import integrate_log, integrate_log_2d

_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class MaSpec:
    order: int
    innovation_sd: float = 1.0

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"MA order must be 1 or 2, got {self.order}")
        if not self.innovation_sd > 0:
            raise ValueError("innovation_sd must be positive")


def in_invertibility_region(theta) -> np.ndarray:
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    if theta.shape[1] == 1:
        return np.abs(theta[:, 0]) < 1
    t1, t2 = theta[:, 0], theta[:, 1]
    return (t2 > -1) & (t2 < 1) & (t1 + t2 > -1) & (t1 - t2 < 1)


def theoretical_autocovariances(theta, innovation_sd: float = 1.0) -> np.ndarray:
    """``gamma_0..gamma_q`` of the MA process."""
    coef = np.concatenate([[1.0], np.asarray(theta, dtype=float)])
    q = coef.size - 1
    s2 = innovation_sd**2
    return np.array([s2 * np.dot(coef[: q + 1 - k], coef[k:]) for k in range(q + 1)])


def autocovariances(y, max_lag: int) -> np.ndarray:
    """Uncentred ``1/n``-normalised autocovariances for lags ``0..max_lag``."""
    y = np.atleast_2d(np.asarray(y, dtype=float))
    n = y.shape[1]
    return np.stack(
        [(y[:, : n - k] * y[:, k:]).sum(axis=1) / n for k in range(max_lag + 1)], axis=1
    )


def simulate_ma(theta, n: int, innovation_sd: float, stream) -> np.ndarray:
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    m, q = theta.shape
    e = stream.generator.normal(0.0, innovation_sd, size=(m, n + q))
    y = e[:, q:].copy()
    for j in range(1, q + 1):
        y += theta[:, j - 1 : j] * e[:, q - j : n + q - j]
    return y


def log_likelihood(theta, y, innovation_sd: float = 1.0) -> np.ndarray:
    """Exact Gaussian log-likelihood of one series at many parameter points.

    ``theta`` is ``(K, q)``. The banded covariance is factorised by a
    Cholesky recursion that keeps only the last ``q`` rows, vectorised over
    the ``K`` points.
    """
    theta = np.atleast_2d(np.asarray(theta, dtype=float))
    y = np.asarray(y, dtype=float)
    K, q = theta.shape
    n = y.size
    s2 = innovation_sd**2
    gamma = [s2 * (1.0 + (theta**2).sum(axis=1))]
    if q >= 1:
        gamma.append(s2 * (theta[:, 0] + (theta[:, 0] * theta[:, 1] if q == 2 else 0.0)))
    if q == 2:
        gamma.append(s2 * theta[:, 1])

    # rows[-d] holds row t-d of L as {column offset j: L[t-d, t-d-j]}
    rows: list[dict[int, np.ndarray]] = []
    z_hist: list[np.ndarray] = []
    quad = np.zeros(K)
    logdet = np.zeros(K)
    for t in range(n):
        row: dict[int, np.ndarray] = {}
        for j in range(min(q, t), 0, -1):
            c = t - j
            prow = rows[-j]
            acc = gamma[j].copy()
            # sum over columns l in [max(0, t-q), c) of L[t, l] L[c, l]
            for l in range(max(0, t - q), c):
                acc -= row[t - l] * prow[c - l]
            row[j] = acc / prow[0]
        diag2 = gamma[0] - sum(row[j] ** 2 for j in row)
        row[0] = np.sqrt(diag2)
        zt = y[t] - sum(row[j] * z_hist[-j] for j in range(1, min(q, t) + 1))
        zt = zt / row[0]
        quad += zt * zt
        logdet += np.log(row[0])
        rows.append(row)
        z_hist.append(zt)
        if len(rows) > q:
            rows.pop(0)
            z_hist.pop(0)
    return -0.5 * quad - logdet - 0.5 * n * _LOG_2PI


def _triangle_inner(t2):
    r = 1.0 + np.asarray(t2)
    return -r, r


def ma_model(spec: MaSpec, summary_lags: int | None = None, rel_tol: float = 1e-7) -> ModelSpec:
    """MA(q) model; the summary holds autocovariances for lags 0..``summary_lags``.

    ``summary_lags`` defaults to the order. When comparing MA(1) with MA(2),
    the concatenated summary of both models covers lags 0..2.
    """
    q, sd = spec.order, float(spec.innovation_sd)
    lags = q if summary_lags is None else int(summary_lags)
    log_prior_density = -math.log(2.0) if q == 1 else -math.log(4.0)

    def sampler(stream, size):
        rng = stream.generator
        if q == 1:
            return rng.uniform(-1.0, 1.0, size=(size, 1))
        # theta_2 has density (1 + t) / 2 on (-1, 1); theta_1 | theta_2 uniform
        t2 = 2.0 * np.sqrt(rng.random(size)) - 1.0
        half = 1.0 + t2
        t1 = (2.0 * rng.random(size) - 1.0) * half
        return np.stack([t1, t2], axis=1)

    def logpdf(theta):
        return np.where(in_invertibility_region(theta), log_prior_density, -np.inf)

    def simulator(theta, n, stream):
        return simulate_ma(theta, n, sd, stream)

    def summarizer(y):
        return autocovariances(y, lags)

    def log_evidence(y):
        y = np.asarray(y, dtype=float)
        if q == 1:
            f = lambda t: log_likelihood(t[:, None], y, sd) + log_prior_density
            return integrate_log(f, (-1.0, 1.0), rel_tol, vectorized=True, initial_panels=16)

        def f2(t1, t2):
            out = np.empty(t1.size)
            step = 65536
            for s in range(0, t1.size, step):
                th = np.stack([t1[s : s + step], t2[s : s + step]], axis=1)
                out[s : s + step] = log_likelihood(th, y, sd)
            return out + log_prior_density

        return integrate_log_2d(f2, (-1.0, 1.0), _triangle_inner, rel_tol)

    return ModelSpec(
        name=f"MA({q})",
        n_params=q,
        sampler=sampler,
        logpdf=logpdf,
        simulator=simulator,
        summarizer=summarizer,
        summary_names=tuple(f"acov{k}" for k in range(lags + 1)),
        discrete_summary=False,
        integer_data=False,
        log_evidence=log_evidence,
        evidence_provenance="quadrature",
    )
