"""Potts-type Gibbs random fields on small graphs.

``f(y | theta) = exp(theta * eta(y)) / Z_theta`` where ``eta`` counts the
monochromatic edges of the neighbourhood graph. The normalising constant is
obtained by enumerating all ``q**n`` configurations once and storing the
histogram ``c_k = #{y : eta(y) = k}``; then ``Z_theta = sum_k c_k e^{theta k}``.

Structures that are disjoint unions of simple paths (chains, lag-``d``
chains) are sampled exactly. For a homogeneous open path the backward
transfer messages are constant, so the field is a Markov chain started
uniformly that repeats the previous state with probability
``e^theta / (e^theta + q - 1)`` and otherwise moves uniformly to another
state. Other graphs fall back to single-site Gibbs sweeps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from abclab.models.base import ModelSpec
from abclab.quadrature import integrate_log
from abclab.streams import logsumexp

ENUMERATION_BUDGET = 2**20


@dataclass(frozen=True)
class GrfSpec:
    state_count: int
    n_sites: int
    edges: tuple[tuple[int, int], ...]
    theta_max: float = 2.0
    label: str = "grf"

    def __post_init__(self):
        if self.state_count < 2:
            raise ValueError("state_count must be at least 2")
        if not self.theta_max > 0:
            raise ValueError("theta_max must be positive")
        seen = set()
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self edge at site {i}")
            if not (0 <= i < self.n_sites and 0 <= j < self.n_sites):
                raise ValueError(f"edge ({i}, {j}) outside {self.n_sites} sites")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)


def chain_edges(n: int, lag: int = 1) -> tuple[tuple[int, int], ...]:
    """Edges ``(i, i + lag)`` of a sequence of ``n`` sites."""
    return tuple((i, i + lag) for i in range(n - lag))


def lattice_edges(rows: int, cols: int) -> tuple[tuple[int, int], ...]:
    """4-neighbour edges of a ``rows x cols`` lattice, row-major sites."""
    edges = []
    for r in range(rows):
        for c in range(cols):
            s = r * cols + c
            if c + 1 < cols:
                edges.append((s, s + 1))
            if r + 1 < rows:
                edges.append((s, s + cols))
    return tuple(edges)


def chain_spec(n: int, lag: int = 1, state_count: int = 2, theta_max: float = 2.0) -> GrfSpec:
    return GrfSpec(state_count, n, chain_edges(n, lag), theta_max, label=f"chain{lag}")


def edge_statistic(y, edges) -> np.ndarray:
    """Number of monochromatic edges per row of ``y``."""
    y = np.atleast_2d(np.asarray(y))
    if not edges:
        return np.zeros(y.shape[0])
    e = np.asarray(edges)
    return (y[:, e[:, 0]] == y[:, e[:, 1]]).sum(axis=1).astype(float)


def path_components(n_sites: int, edges) -> list[list[int]] | None:
    """Ordered site lists if the graph is a disjoint union of paths, else None."""
    adj = [[] for _ in range(n_sites)]
    for i, j in edges:
        adj[i].append(j)
        adj[j].append(i)
    if any(len(a) > 2 for a in adj):
        return None
    visited = [False] * n_sites
    paths = []
    for start in range(n_sites):
        if visited[start] or len(adj[start]) == 2:
            continue
        path, prev, cur = [], -1, start
        while cur != -1:
            visited[cur] = True
            path.append(cur)
            nxt = [v for v in adj[cur] if v != prev]
            prev, cur = cur, (nxt[0] if nxt else -1)
        paths.append(path)
    # sites left unvisited lie on cycles
    if not all(visited):
        return None
    return paths


def enumerate_statistic_counts(spec: GrfSpec, budget: int = ENUMERATION_BUDGET) -> np.ndarray:
    """Histogram ``c_k`` of the edge statistic over all configurations."""
    q, n = spec.state_count, spec.n_sites
    total = q**n
    if total > budget:
        raise OverflowError(f"{q}^{n} configurations exceed the enumeration budget {budget}")
    counts = np.zeros(len(spec.edges) + 1, dtype=np.int64)
    powers = q ** np.arange(n, dtype=np.int64)
    chunk = 2**16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        configs = (idx[:, None] // powers[None, :]) % q
        eta = edge_statistic(configs, spec.edges).astype(np.int64)
        counts += np.bincount(eta, minlength=counts.size)
    return counts


def log_partition(theta, log_counts: np.ndarray) -> np.ndarray:
    """``log Z_theta`` from the log statistic histogram, vectorised in theta."""
    theta = np.asarray(theta, dtype=float)
    k = np.arange(log_counts.size)
    return logsumexp(log_counts[None, :] + theta.reshape(-1, 1) * k[None, :], axis=1).reshape(
        theta.shape
    )


def _sample_paths(theta, n, q, paths, stream):
    m = theta.shape[0]
    rng = stream.generator
    e = np.exp(theta[:, 0])
    stay_prob = e / (e + q - 1)
    y = np.empty((m, n), dtype=np.int64)
    for path in paths:
        prev = rng.integers(0, q, size=m)
        y[:, path[0]] = prev
        for site in path[1:]:
            stay = rng.random(m) < stay_prob
            other = (prev + 1 + rng.integers(0, q - 1, size=m)) % q
            prev = np.where(stay, prev, other)
            y[:, site] = prev
    return y


def _sample_gibbs(theta, n, q, edges, sweeps, stream):
    m = theta.shape[0]
    rng = stream.generator
    neighbours = [[] for _ in range(n)]
    for i, j in edges:
        neighbours[i].append(j)
        neighbours[j].append(i)
    y = rng.integers(0, q, size=(m, n))
    states = np.arange(q)
    th = theta[:, :1]
    for _ in range(sweeps):
        for site in range(n):
            nb = neighbours[site]
            if nb:
                agree = (y[:, nb][:, :, None] == states[None, None, :]).sum(axis=1)
            else:
                agree = np.zeros((m, q))
            logits = th * agree
            logits -= logits.max(axis=1, keepdims=True)
            cdf = np.cumsum(np.exp(logits), axis=1)
            u = rng.random(m) * cdf[:, -1]
            y[:, site] = np.minimum((cdf < u[:, None]).sum(axis=1), q - 1)
    return y


def grf_model(
    spec: GrfSpec,
    name: str | None = None,
    *,
    burn_in: int = 500,
    budget: int = ENUMERATION_BUDGET,
) -> ModelSpec:
    """Potts model on ``spec`` with prior ``theta ~ U(0, theta_max)``.

    Exact hooks are attached only when the configuration count fits the
    enumeration budget; otherwise the model is ABC-only.
    """
    q, n, tmax = spec.state_count, spec.n_sites, float(spec.theta_max)
    edges = spec.edges
    paths = path_components(n, edges)
    name = name or spec.label

    def sampler(stream, size):
        return stream.generator.uniform(0.0, tmax, size=(size, 1))

    def logpdf(theta):
        t = theta[:, 0]
        return np.where((t >= 0) & (t <= tmax), -math.log(tmax), -np.inf)

    def simulator(theta, n_req, stream):
        if n_req != n:
            raise ValueError(f"{name} is defined on {n} sites, requested {n_req}")
        if paths is not None:
            return _sample_paths(theta, n, q, paths, stream)
        return _sample_gibbs(theta, n, q, edges, burn_in, stream)

    def summarizer(y):
        return edge_statistic(y, edges)[:, None]

    hooks = {}
    if q**n <= budget:
        with np.errstate(divide="ignore"):
            log_counts = np.log(enumerate_statistic_counts(spec, budget).astype(float))
        cache: dict[int, float] = {}

        def log_prior_predictive(eta: int) -> float:
            # log of  int_0^tmax (1/tmax) exp(theta * eta - log Z_theta) dtheta
            if eta not in cache:
                f = lambda t: eta * t - log_partition(t, log_counts)
                cache[eta] = integrate_log(f, (0.0, tmax), vectorized=True) - math.log(tmax)
            return cache[eta]

        def _eta_values(s):
            arr = np.asarray(s, dtype=float)
            if arr.ndim >= 1 and arr.shape[-1] == 1:
                arr = arr[..., 0]
            return arr

        def log_marginal_summary(s, n_req):
            eta = _eta_values(s)
            flat = [log_counts[int(k)] + log_prior_predictive(int(k)) for k in np.ravel(eta)]
            out = np.asarray(flat).reshape(np.shape(eta))
            return float(out) if out.ndim == 0 else out

        def log_evidence(y):
            eta = edge_statistic(y, edges)
            out = np.array([log_prior_predictive(int(k)) for k in eta])
            return float(out[0]) if np.ndim(y) == 1 else out

        def log_g_factor(y):
            eta = edge_statistic(y, edges).astype(int)
            out = -log_counts[eta]
            return float(out[0]) if np.ndim(y) == 1 else out

        hooks = dict(
            log_marginal_summary=log_marginal_summary,
            log_evidence=log_evidence,
            log_g_factor=log_g_factor,
        )

    return ModelSpec(
        name=name,
        n_params=1,
        sampler=sampler,
        logpdf=logpdf,
        simulator=simulator,
        summarizer=summarizer,
        summary_names=(f"edges:{name}",),
        discrete_summary=True,
        integer_data=True,
        evidence_provenance="enumeration",
        **hooks,
    )
