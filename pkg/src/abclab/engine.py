"""ABC rejection sampling for one model and for model choice.

Both samplers propose in blocks drawn from indexed substreams and scan the
blocks in index order, so a run with the same root seed is identical for
any worker count. In fixed-tolerance mode the run stops at the ``N``-th
acceptance exactly as a sequential loop would, and ``total_draws`` counts
the proposals up to and including that one.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from abclab.distances import DISTANCES, check_scale, distance, mad_scale
from abclab.errors import ConfigurationError
from abclab.models.base import ModelSpec, concat_summary
from abclab.parallel import ordered_map
from abclab.streams import RandomStream
from abclab.table import block_sizes, simulate_block, threshold

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class AbcConfig:
    """Tolerance, distance and budget of an ABC run.

    Set exactly one of ``epsilon`` (fixed tolerance, ``inf`` accepts every
    proposal) or ``quantile`` (keep that fraction of ``max_draws`` proposals).
    ``distance="scaled"`` divides each summary coordinate by ``scale``; in
    quantile mode a missing scale is estimated by MAD from the proposals.
    """

    n_accept: int = 1000
    epsilon: float | None = None
    quantile: float | None = None
    distance: str = "euclidean"
    scale: tuple[float, ...] | None = None
    max_draws: int = 10**7
    batch_size: int = 2**14
    workers: int = 1
    keep_data: bool = False

    def __post_init__(self):
        if self.n_accept < 1:
            raise ConfigurationError("n_accept must be at least 1")
        if (self.epsilon is None) == (self.quantile is None):
            raise ConfigurationError("set exactly one of epsilon or quantile")
        if self.epsilon is not None and not self.epsilon >= 0:
            raise ConfigurationError(f"epsilon must be >= 0, got {self.epsilon}")
        if self.quantile is not None and not 0 < self.quantile <= 1:
            raise ConfigurationError(f"quantile must lie in (0, 1], got {self.quantile}")
        if self.distance not in DISTANCES:
            raise ConfigurationError(f"distance must be one of {DISTANCES}, got {self.distance!r}")
        if self.scale is not None:
            object.__setattr__(self, "scale", tuple(float(s) for s in self.scale))
            if any(not s > 0 for s in self.scale):
                raise ConfigurationError("scale vector must be strictly positive")
        if self.max_draws < 1 or self.batch_size < 1 or self.workers < 1:
            raise ConfigurationError("max_draws, batch_size and workers must be positive")


@dataclass(frozen=True)
class Particle:
    model_index: int
    parameter: np.ndarray
    summary: np.ndarray
    distance: float


@dataclass(frozen=True)
class AbcRun:
    """Accepted particles (stored column-wise) and run bookkeeping."""

    model_index: np.ndarray
    parameters: np.ndarray
    summaries: np.ndarray
    distances: np.ndarray
    total_draws: int
    observed_summary: np.ndarray
    config: AbcConfig
    epsilon: float
    draw_counts: np.ndarray
    accept_counts: np.ndarray
    truncated: bool = False
    scale: np.ndarray | None = None
    data: np.ndarray | None = None
    model_names: tuple[str, ...] = ()

    @property
    def n_accepted(self) -> int:
        return int(self.model_index.size)

    @property
    def particles(self) -> list[Particle]:
        return [
            Particle(int(m), p, s, float(d))
            for m, p, s, d in zip(self.model_index, self.parameters, self.summaries, self.distances)
        ]


def _resolve_scale(config: AbcConfig, dim: int):
    if config.distance == "euclidean":
        return None
    if config.scale is None:
        return None
    return check_scale(config.scale, dim)


def _run(models, prior, n, summary, discrete, observed, config, stream):
    observed = np.asarray(observed, dtype=float).reshape(-1)
    if config.epsilon == 0 and not discrete:
        raise ConfigurationError("epsilon = 0 requires integer-valued summaries")
    scale = _resolve_scale(config, observed.size)
    if config.distance == "scaled" and scale is None and config.quantile is None:
        raise ConfigurationError("scaled distance in fixed-epsilon mode needs an explicit scale")
    m = len(models)
    sizes = block_sizes(config.max_draws, config.batch_size)

    def run_block(b):
        return simulate_block(
            models, prior, n, summary, stream.child(b), sizes[b], keep_data=config.keep_data
        )

    if config.quantile is not None:
        return _run_quantile(models, observed, config, scale, sizes, run_block)

    eps = float(config.epsilon)
    need = config.n_accept
    kept = []
    draw_counts = np.zeros(m, dtype=np.int64)
    drawn = 0
    b = 0
    done = False
    while not done and b < len(sizes):
        wave = range(b, min(b + config.workers, len(sizes)))
        for blk in ordered_map(run_block, wave, config.workers):
            d = distance(blk.summaries, observed, scale)
            hits = np.flatnonzero(d <= eps)
            if hits.size >= need:
                stop = int(hits[need - 1]) + 1
                hits = hits[:need]
                done = True
            else:
                stop = d.size
            draw_counts += np.bincount(blk.model_index[:stop], minlength=m)
            drawn += stop
            need -= hits.size
            kept.append((blk, hits, d))
            if done:
                break
        b += config.workers

    idx = np.concatenate([blk.model_index[h] for blk, h, _ in kept])
    run = AbcRun(
        model_index=idx,
        parameters=np.concatenate([blk.parameters[h] for blk, h, _ in kept]),
        summaries=np.concatenate([blk.summaries[h] for blk, h, _ in kept]),
        distances=np.concatenate([d[h] for _, h, d in kept]),
        total_draws=drawn,
        observed_summary=observed,
        config=config,
        epsilon=eps,
        draw_counts=draw_counts,
        accept_counts=np.bincount(idx, minlength=m),
        truncated=not done,
        scale=scale,
        data=np.concatenate([blk.data[h] for blk, h, _ in kept]) if config.keep_data else None,
        model_names=tuple(mod.name for mod in models),
    )
    if run.truncated:
        log.warning(
            "ABC run truncated: %d of %d acceptances after %d draws",
            run.n_accepted, config.n_accept, drawn,
        )
    return run


def _run_quantile(models, observed, config, scale, sizes, run_block):
    blocks = list(ordered_map(run_block, range(len(sizes)), config.workers))
    summaries = np.concatenate([blk.summaries for blk in blocks])
    model_index = np.concatenate([blk.model_index for blk in blocks])
    if config.distance == "scaled" and scale is None:
        scale = mad_scale(summaries)
    d = distance(summaries, observed, scale)
    eps = threshold(d, config.quantile)
    keep = np.flatnonzero(d <= eps)
    m = len(models)
    idx = model_index[keep]
    data = np.concatenate([blk.data for blk in blocks])[keep] if config.keep_data else None
    return AbcRun(
        model_index=idx,
        parameters=np.concatenate([blk.parameters for blk in blocks])[keep],
        summaries=summaries[keep],
        distances=d[keep],
        total_draws=int(d.size),
        observed_summary=observed,
        config=config,
        epsilon=eps,
        draw_counts=np.bincount(model_index, minlength=m),
        accept_counts=np.bincount(idx, minlength=m),
        scale=scale,
        data=data,
        model_names=tuple(mod.name for mod in models),
    )


def abc_sample(
    model: ModelSpec, observed, n: int, config: AbcConfig, stream: RandomStream
) -> AbcRun:
    """Rejection ABC for a single model.

    ``observed`` is the observed summary vector. Accepted parameters are
    draws from the ABC posterior at the run's tolerance.
    """
    obs = np.asarray(observed, dtype=float).reshape(-1)
    if obs.size != model.summary_dim:
        raise ConfigurationError(
            f"observed summary has length {obs.size}; {model.name} produces {model.summary_dim}"
        )
    if n < 1:
        raise ConfigurationError("dataset size must be at least 1")
    return _run([model], np.ones(1), n, model.summarizer, model.discrete_summary, obs, config, stream)


def abc_model_choice(
    models: Sequence[ModelSpec],
    model_prior,
    observed_data,
    config: AbcConfig,
    stream: RandomStream,
    *,
    summary: Callable | None = None,
    discrete_summary: bool | None = None,
) -> AbcRun:
    """ABC model-choice sampler.

    The model index is drawn from ``model_prior``, then the model's parameter
    from its prior, then a pseudo-dataset of the observed size. Acceptance
    uses the duplicate-free concatenation of all models' summaries unless a
    cross-model ``summary`` is supplied.
    """
    models = list(models)
    if len(models) < 2:
        raise ConfigurationError("model choice needs at least two models")
    prior = np.full(len(models), 1.0 / len(models)) if model_prior is None else np.asarray(model_prior, float)
    if prior.shape != (len(models),) or np.any(prior < 0) or not prior.sum() > 0:
        raise ConfigurationError(f"model prior must be {len(models)} nonnegative weights")
    prior = prior / prior.sum()
    y = np.asarray(observed_data)
    if summary is None:
        concat = concat_summary(models)
        summary, discrete = concat, concat.discrete
    else:
        discrete = bool(discrete_summary)
    observed = np.asarray(summary(y[None, :]), dtype=float)[0]
    return _run(models, prior, y.shape[-1], summary, discrete, observed, config, stream)


def realised_acceptance_rate(run: AbcRun) -> float:
    return run.n_accepted / run.total_draws if run.total_draws else math.nan
