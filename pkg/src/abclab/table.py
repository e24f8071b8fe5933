"""Reference tables drawn from the joint prior, and tolerance sweeps over them.

A table is generated in fixed-size blocks; block ``b`` draws from substream
``b`` of the caller's stream. The table is therefore identical for any
number of workers, and rows come out in block order without re-sorting.

CSV layout (one header row, LF line endings, shortest round-trip floats)::

    model_index,param_1,...,param_k,summary_1,...,summary_p,distance

Parameters of models with fewer than ``k`` parameters are padded with
``nan``; ``distance`` is ``nan`` when no observed summary was given.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from abclab.distances import distance as compute_distance
from abclab.errors import ConfigurationError
from abclab.models.base import ModelSpec, concat_summary
from abclab.parallel import ordered_map
from abclab.streams import RandomStream, sample_categorical

DEFAULT_BLOCK = 2**16


@dataclass(frozen=True)
class Block:
    model_index: np.ndarray
    parameters: np.ndarray
    summaries: np.ndarray
    data: np.ndarray | None = None


def simulate_block(
    models: Sequence[ModelSpec],
    model_prior,
    n: int,
    summary: Callable,
    stream: RandomStream,
    size: int,
    keep_data: bool = False,
) -> Block:
    """Draw ``size`` rows ``(m, theta, eta(z))`` from the joint prior."""
    k_max = max(m.n_params for m in models)
    if len(models) == 1:
        idx = np.zeros(size, dtype=np.int64)
    else:
        idx = sample_categorical(stream, model_prior, size=size).astype(np.int64)
    params = np.full((size, k_max), np.nan)
    summaries = None
    data = None
    for m, model in enumerate(models):
        rows = np.flatnonzero(idx == m)
        if rows.size == 0:
            continue
        theta = np.asarray(model.sampler(stream, rows.size), dtype=float)
        z = model.simulator(theta, n, stream)
        s = np.asarray(summary(z), dtype=float)
        if summaries is None:
            summaries = np.empty((size, s.shape[1]))
        params[rows, : model.n_params] = theta
        summaries[rows] = s
        if keep_data:
            if data is None:
                data = np.empty((size, n), dtype=z.dtype)
            elif data.dtype != z.dtype:
                data = data.astype(np.result_type(data.dtype, z.dtype))
            data[rows] = z
    if summaries is None:
        summaries = np.empty((0, 0))
    return Block(idx, params, summaries, data)


def block_sizes(total: int, block: int) -> list[int]:
    full, rest = divmod(total, block)
    return [block] * full + ([rest] if rest else [])


@dataclass(frozen=True)
class ReferenceTable:
    model_index: np.ndarray
    parameters: np.ndarray
    summaries: np.ndarray
    model_names: tuple[str, ...] = ()
    summary_names: tuple[str, ...] = ()
    model_prior: tuple[float, ...] = ()

    def __len__(self) -> int:
        return int(self.model_index.size)

    @property
    def n_models(self) -> int:
        return len(self.model_names) if self.model_names else int(self.model_index.max()) + 1

    def distances(self, observed, scale=None) -> np.ndarray:
        return compute_distance(self.summaries, observed, scale)

    def to_csv(self, path, distances=None) -> None:
        d = np.full(len(self), np.nan) if distances is None else np.asarray(distances, float)
        k, p = self.parameters.shape[1], self.summaries.shape[1]
        header = (
            ["model_index"]
            + [f"param_{i + 1}" for i in range(k)]
            + [f"summary_{i + 1}" for i in range(p)]
            + ["distance"]
        )
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for r in range(len(self)):
                writer.writerow(
                    [int(self.model_index[r])]
                    + [repr(float(v)) for v in self.parameters[r]]
                    + [repr(float(v)) for v in self.summaries[r]]
                    + [repr(float(d[r]))]
                )

    @classmethod
    def from_csv(cls, path) -> tuple["ReferenceTable", np.ndarray]:
        """Load a table written by :meth:`to_csv`; returns ``(table, distances)``."""
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        k = sum(h.startswith("param_") for h in header)
        p = sum(h.startswith("summary_") for h in header)
        if header != (
            ["model_index"]
            + [f"param_{i + 1}" for i in range(k)]
            + [f"summary_{i + 1}" for i in range(p)]
            + ["distance"]
        ):
            raise ConfigurationError(f"{path}: not a reference-table CSV header: {header}")
        values = np.array([[float(v) for v in row[1:]] for row in rows]).reshape(len(rows), k + p + 1)
        idx = np.array([int(row[0]) for row in rows], dtype=np.int64)
        table = cls(idx, values[:, :k], values[:, k : k + p])
        return table, values[:, -1]


def build_reference_table(
    models: Sequence[ModelSpec],
    model_prior,
    n: int,
    T: int,
    stream: RandomStream,
    *,
    summary: Callable | None = None,
    summary_names: Sequence[str] | None = None,
    workers: int = 1,
    block_size: int = DEFAULT_BLOCK,
) -> ReferenceTable:
    """``T`` rows ``(m, theta_m, eta(z))`` simulated from the joint prior.

    ``summary`` defaults to the duplicate-free concatenation of every model's
    summary statistic.
    """
    if T < 1:
        raise ValueError(f"table size must be at least 1, got {T}")
    models = list(models)
    prior = np.full(len(models), 1.0 / len(models)) if model_prior is None else np.asarray(model_prior, float)
    prior = prior / prior.sum()
    if summary is None:
        concat = concat_summary(models)
        summary, summary_names = concat, concat.names
    sizes = block_sizes(T, block_size)

    def run(b):
        return simulate_block(models, prior, n, summary, stream.child(b), sizes[b])

    blocks = list(ordered_map(run, range(len(sizes)), workers))
    return ReferenceTable(
        model_index=np.concatenate([blk.model_index for blk in blocks]),
        parameters=np.concatenate([blk.parameters for blk in blocks]),
        summaries=np.concatenate([blk.summaries for blk in blocks]),
        model_names=tuple(m.name for m in models),
        summary_names=tuple(summary_names or ()),
        model_prior=tuple(float(w) for w in prior),
    )


@dataclass(frozen=True)
class SweepRow:
    quantile: float
    epsilon: float
    accept_counts: np.ndarray
    n_accepted: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_accepted", int(np.sum(self.accept_counts)))


def quantile_rank(q: float, T: int) -> int:
    """``k = ceil(q T)``, guarded against ``q T`` landing a hair above an integer."""
    return max(1, math.ceil(round(q * T, 9)))


def threshold(distances, q: float) -> float:
    """Lower empirical quantile: the ``ceil(q T)``-th smallest distance."""
    d = np.asarray(distances, dtype=float)
    k = quantile_rank(q, d.size)
    return float(np.partition(d, k - 1)[k - 1])


def tolerance_sweep(
    table: ReferenceTable,
    observed,
    quantiles: Sequence[float],
    *,
    scale=None,
    distances=None,
) -> list[SweepRow]:
    """Accept counts per model at each acceptance quantile.

    All rows tied with the realised tolerance are accepted, so the counts
    are independent of row order.
    """
    qs = [float(q) for q in quantiles]
    if not qs or any(not 0 < q <= 1 for q in qs):
        raise ConfigurationError(f"quantiles must lie in (0, 1], got {qs}")
    if any(b >= a for a, b in zip(qs, qs[1:])):
        raise ConfigurationError(f"quantiles must be strictly decreasing, got {qs}")
    d = table.distances(observed, scale) if distances is None else np.asarray(distances, float)
    m = table.n_models
    out = []
    for q in qs:
        eps = threshold(d, q)
        mask = d <= eps
        counts = np.bincount(table.model_index[mask], minlength=m)
        out.append(SweepRow(q, eps, counts))
    return out
