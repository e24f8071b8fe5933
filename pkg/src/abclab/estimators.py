"""Frequency estimators of posterior model probabilities and Bayes factors."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from abclab.errors import EstimationError

PROVENANCES = ("abc", "closed-form", "quadrature", "enumeration")


@dataclass(frozen=True)
class BayesFactorEstimate:
    """A Bayes factor on the log scale with its Monte Carlo standard error.

    ``infinite`` flags an ABC estimate where one model received no
    acceptances; ``log_bf`` is then a signed infinity.
    """

    log_bf: float
    mc_standard_error: float = 0.0
    provenance: str = "closed-form"
    infinite: bool = False

    @property
    def bf(self) -> float:
        return math.exp(self.log_bf)

    def within(self, other: float, k: float = 3.0) -> bool:
        """Whether ``other`` lies within ``k`` standard errors of this estimate."""
        if self.infinite or not math.isfinite(other):
            return False
        return abs(self.log_bf - other) <= k * self.mc_standard_error


@dataclass(frozen=True)
class ModelProbabilities:
    probs: np.ndarray
    standard_errors: np.ndarray
    n_accepted: int
    zero_count: bool


def accept_counts(source) -> np.ndarray:
    """Per-model acceptance counts of a run, a sweep row, or a plain sequence."""
    counts = getattr(source, "accept_counts", source)
    return np.asarray(counts, dtype=np.int64)


def _prior(model_prior, m):
    if model_prior is None:
        return np.full(m, 1.0 / m)
    w = np.asarray(model_prior, dtype=float)
    if w.shape != (m,) or np.any(w < 0) or not w.sum() > 0:
        raise ValueError(f"model prior must be {m} nonnegative weights, got {model_prior!r}")
    return w / w.sum()


def estimate_posterior_probs(source, model_prior=None, proposal_prior=None) -> ModelProbabilities:
    """Acceptance frequencies as estimates of ``P(M = m | y)``.

    When the model indices were proposed from the target prior (the usual
    ABC model-choice setup) this is the plain frequency. If they were
    proposed from ``proposal_prior`` instead, counts are reweighted by
    ``model_prior / proposal_prior``.
    """
    counts = accept_counts(source)
    total = int(counts.sum())
    if total == 0:
        raise EstimationError("no accepted particles; cannot estimate model probabilities")
    if proposal_prior is None:
        probs = counts / total
    else:
        weights = counts * _prior(model_prior, counts.size) / _prior(proposal_prior, counts.size)
        probs = weights / weights.sum()
    se = np.sqrt(probs * (1.0 - probs) / total)
    return ModelProbabilities(probs, se, total, bool(np.any(counts == 0)))


def estimate_bayes_factor(source, i: int, j: int, model_prior=None) -> BayesFactorEstimate:
    """ABC estimate of ``B_ij`` from acceptance counts.

    ``log B_ij = log(prior_j / prior_i) + log(a_i / a_j)`` with delta-method
    standard error ``sqrt(1/a_i + 1/a_j)``; that is the variance of
    ``log a_i - log a_j`` under both multinomial (fixed accepts) and
    Poisson (fixed proposals) sampling of the counts.
    """
    counts = accept_counts(source)
    if not (0 <= i < counts.size and 0 <= j < counts.size):
        raise IndexError(f"model indices ({i}, {j}) outside {counts.size} models")
    prior = _prior(model_prior, counts.size)
    a_i, a_j = int(counts[i]), int(counts[j])
    offset = math.log(prior[j]) - math.log(prior[i])
    if a_i == 0 and a_j == 0:
        raise EstimationError(f"models {i} and {j} both have zero acceptances")
    if a_i == 0 or a_j == 0:
        return BayesFactorEstimate(
            -math.inf if a_i == 0 else math.inf, math.inf, "abc", infinite=True
        )
    log_bf = offset + math.log(a_i) - math.log(a_j)
    return BayesFactorEstimate(log_bf, math.sqrt(1.0 / a_i + 1.0 / a_j), "abc")
