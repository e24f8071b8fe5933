"""Distances between simulated and observed summaries."""

from __future__ import annotations

import logging

import numpy as np

from abclab.errors import ConfigurationError

log = logging.getLogger(__name__)

DISTANCES = ("euclidean", "scaled")


def mad_scale(summaries) -> np.ndarray:
    """Per-column median absolute deviation, used to scale distances.

    Columns with zero MAD fall back to their standard deviation, then to 1.
    """
    s = np.atleast_2d(np.asarray(summaries, dtype=float))
    mad = np.median(np.abs(s - np.median(s, axis=0)), axis=0)
    sd = s.std(axis=0)
    scale = np.where(mad > 0, mad, np.where(sd > 0, sd, 1.0))
    log.info("MAD distance scale: %s", np.array2string(scale, precision=17))
    return scale


def check_scale(scale, dim: int) -> np.ndarray:
    scale = np.asarray(scale, dtype=float).reshape(-1)
    if scale.size != dim:
        raise ConfigurationError(f"scale vector has length {scale.size}, summary has {dim}")
    if np.any(~(scale > 0)) or np.any(~np.isfinite(scale)):
        raise ConfigurationError("scale vector must be strictly positive and finite")
    return scale


def distance(summaries, observed, scale=None) -> np.ndarray:
    """Euclidean distance of each row of ``summaries`` to ``observed``.

    With ``scale``, coordinates are divided by the scale vector first.
    """
    s = np.atleast_2d(np.asarray(summaries, dtype=float))
    obs = np.asarray(observed, dtype=float).reshape(-1)
    if s.shape[1] != obs.size:
        raise ConfigurationError(
            f"observed summary has length {obs.size}, simulated summaries have {s.shape[1]}"
        )
    diff = s - obs
    if scale is not None:
        diff = diff / check_scale(scale, obs.size)
    if diff.shape[1] == 1:
        return np.abs(diff[:, 0])
    return np.sqrt((diff * diff).sum(axis=1))
