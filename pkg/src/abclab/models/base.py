"""The model abstraction shared by the ABC engine and the oracles.

Datasets are plain numpy arrays: one dataset is a vector of length ``n``, a
batch of datasets is an ``(m, n)`` array. Integer dtype marks count data.
Parameters follow the same convention (``(k,)`` or ``(m, k)``), and so do
summaries (``(p,)`` or ``(m, p)``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from abclab.errors import CapabilityError
from abclab.streams import RandomStream


@dataclass(frozen=True)
class ModelSpec:
    """Prior, simulator and summary map of one model, plus exact hooks.

    The batch callables receive and return 2-D arrays:

    - ``sampler(stream, size) -> (size, k)`` prior draws
    - ``logpdf(theta (m, k)) -> (m,)`` prior log-density
    - ``simulator(theta (m, k), n, stream) -> (m, n)`` datasets
    - ``summarizer(y (m, n)) -> (m, p)`` summary statistics

    Exact hooks are optional. ``log_marginal_summary(s, n)`` is the log prior
    predictive density of the summary, ``log_evidence(y)`` the log marginal
    likelihood of the full data and ``log_g_factor(y)`` the parameter-free
    factor with ``log_evidence = log_g_factor + log_marginal_summary``.
    ``paper_log_marginal_summary`` keeps a published closed form that
    disagrees with the quadrature oracle, for side-by-side reporting.
    """

    name: str
    n_params: int
    sampler: Callable
    logpdf: Callable
    simulator: Callable
    summarizer: Callable
    summary_names: tuple[str, ...]
    discrete_summary: bool = False
    integer_data: bool = False
    log_marginal_summary: Optional[Callable] = None
    log_evidence: Optional[Callable] = None
    log_g_factor: Optional[Callable] = None
    paper_log_marginal_summary: Optional[Callable] = None
    evidence_provenance: str = "closed-form"

    @property
    def summary_dim(self) -> int:
        return len(self.summary_names)

    def prior_sample(self, stream: RandomStream, size: int | None = None) -> np.ndarray:
        draws = np.asarray(self.sampler(stream, 1 if size is None else size), dtype=float)
        return draws[0] if size is None else draws

    def prior_logpdf(self, theta) -> np.ndarray | float:
        theta = np.asarray(theta, dtype=float)
        out = self.logpdf(np.atleast_2d(theta))
        return float(out[0]) if theta.ndim <= 1 else out

    def simulate(self, theta, n: int, stream: RandomStream) -> np.ndarray:
        theta = np.asarray(theta, dtype=float)
        if n < 1:
            raise ValueError(f"dataset size must be at least 1, got {n}")
        data = self.simulator(np.atleast_2d(theta), int(n), stream)
        return data[0] if theta.ndim <= 1 else data

    def summary(self, y) -> np.ndarray:
        y = np.asarray(y)
        out = np.asarray(self.summarizer(np.atleast_2d(y)), dtype=float)
        return out[0] if y.ndim == 1 else out

    def require(self, *hooks: str) -> None:
        missing = [h for h in hooks if getattr(self, h) is None]
        if missing:
            raise CapabilityError(f"model {self.name!r} has no {', '.join(missing)} hook")


@dataclass(frozen=True)
class ConcatSummary:
    """Concatenation of several models' summaries, duplicates dropped by name.

    Each component is computed by the first model that declares it, so a
    dataset simulated from any model gets every model's statistics.
    """

    names: tuple[str, ...]
    discrete: bool
    _sources: tuple[tuple[int, tuple[int, ...]], ...]
    _models: tuple[ModelSpec, ...]

    def __call__(self, y) -> np.ndarray:
        y = np.asarray(y)
        batch = np.atleast_2d(y)
        parts = []
        for model_idx, cols in self._sources:
            out = np.asarray(self._models[model_idx].summarizer(batch), dtype=float)
            parts.append(out[:, list(cols)])
        result = np.concatenate(parts, axis=1)
        return result[0] if y.ndim == 1 else result


def concat_summary(models: Sequence[ModelSpec]) -> ConcatSummary:
    seen: list[str] = []
    sources = []
    for i, model in enumerate(models):
        cols = []
        for j, name in enumerate(model.summary_names):
            if name not in seen:
                seen.append(name)
                cols.append(j)
        if cols:
            sources.append((i, tuple(cols)))
    return ConcatSummary(
        names=tuple(seen),
        discrete=all(m.discrete_summary for m in models),
        _sources=tuple(sources),
        _models=tuple(models),
    )
