"""Summaries that are sufficient across a pair of models, not just within each.

For the Poisson/geometric pair, ``(S, P)`` with ``P = prod y_i!`` completes
``S``; ``P`` is kept on the log scale to avoid overflow. For the normal pair
the completion is ``(ybar, S2)`` with ``S2 = sum (y_i - ybar)^2``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaln

from abclab.errors import DomainError

PAIRS = ("poisson-geometric", "normal-pair")


def _count_pair(y):
    y = np.asarray(y)
    # sorting fixes the summation order, so permuted samples give identical floats
    logfact = np.sort(gammaln(y.astype(float) + 1.0), axis=-1)
    return np.stack([y.sum(axis=-1).astype(float), logfact.sum(axis=-1)], axis=-1)


def _normal_pair(y):
    y = np.asarray(y, dtype=float)
    ybar = y.mean(axis=-1)
    s2 = ((y - ybar[..., None]) ** 2).sum(axis=-1)
    return np.stack([ybar, s2], axis=-1)


_SUMMARIES = {"poisson-geometric": _count_pair, "normal-pair": _normal_pair}
_NAMES = {"poisson-geometric": ("sum", "log_prod_factorial"), "normal-pair": ("mean", "spread")}


def cross_model_summarizer(pair: str):
    """Vectorised summary function for ``pair`` (rows are datasets)."""
    try:
        return _SUMMARIES[pair]
    except KeyError:
        raise DomainError(f"unknown model pair {pair!r}; expected one of {PAIRS}") from None


def cross_model_summary_names(pair: str) -> tuple[str, ...]:
    cross_model_summarizer(pair)
    return _NAMES[pair]


def cross_model_summary(pair: str, y) -> np.ndarray:
    """``(S, sum log y_i!)`` for the count pair, ``(ybar, S2)`` for the normal pair."""
    return cross_model_summarizer(pair)(y)
