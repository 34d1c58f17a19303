"""Exact inference for zero-field ferromagnetic Ising models with one coupling.

A model is a graph plus a coupling ``lam > 0`` on every edge; its density is
``exp(lam * agree(x)) / Z`` with ``agree(x) = sum over edges of x_i x_j``.
Everything here is brute force over the ``2**p`` spin configurations, which
is the point: these routines are the oracle the closed-form bounds are
checked against.  All logarithms are natural.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.special import expit

from .errors import ArgumentError, CapacityError, DimensionError, ParseError
from .graph import Graph
from .seeding import MASK64, uniforms

DEFAULT_MAX_P = 24
DEFAULT_MAX_SAMPLE_P = 20
CHUNK_BITS = 16

EXACT_GENERATOR = "splitmix64-invcdf-v1"
GIBBS_GENERATOR = "pcg64-gibbs-systematic-v1"


def max_enum_p() -> int:
    """Enumeration cap; ``ISING_LB_MAX_P`` overrides the default of 24."""
    return int(os.environ.get("ISING_LB_MAX_P", DEFAULT_MAX_P))


def max_sample_p() -> int:
    env = os.environ.get("ISING_LB_MAX_P")
    return int(env) if env is not None else DEFAULT_MAX_SAMPLE_P


@dataclass(frozen=True)
class IsingModel:
    graph: Graph
    lam: float

    def __post_init__(self):
        lam = float(self.lam)
        if not (lam > 0 and math.isfinite(lam)):
            raise ArgumentError(f"coupling must be positive and finite, got {self.lam!r}")
        object.__setattr__(self, "lam", lam)

    @property
    def p(self) -> int:
        return self.graph.num_vertices


@dataclass(frozen=True, eq=False)
class ExactInference:
    log_partition: float
    correlations: np.ndarray

    def corr(self, s: int, t: int) -> float:
        return float(self.correlations[s, t])


@dataclass(frozen=True, eq=False)
class SampleSet:
    """``n`` spin vectors in {+1, -1}^p with the seed and generator that made them."""

    samples: np.ndarray
    seed: int = 0
    generator: str = "unknown"

    def __post_init__(self):
        arr = np.asarray(self.samples, dtype=np.int8)
        if arr.ndim != 2:
            raise DimensionError("samples must be a 2-d array")
        if arr.size and not np.all(np.abs(arr) == 1):
            raise ArgumentError("sample entries must be +1 or -1")
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)

    @property
    def num_samples(self) -> int:
        return self.samples.shape[0]

    @property
    def p(self) -> int:
        return self.samples.shape[1]

    def to_text(self) -> str:
        lines = [f"{self.num_samples} {self.p} {self.seed} {self.generator}"]
        lines.extend(" ".join(str(int(v)) for v in row) for row in self.samples)
        return "\n".join(lines) + "\n"


def parse_samples(text: str) -> SampleSet:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty sample file", 1)
    head = lines[0].split()
    if len(head) != 4:
        raise ParseError("header must be 'n p seed generator-id'", 1)
    try:
        n, p, seed = int(head[0]), int(head[1]), int(head[2])
    except ValueError:
        raise ParseError("non-integer field in header", 1) from None
    if len(lines) - 1 != n:
        raise ParseError(f"header promises {n} samples, found {len(lines) - 1}", 1)
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        try:
            row = [int(v) for v in ln.split()]
        except ValueError:
            raise ParseError("non-integer spin", i) from None
        if len(row) != p or any(v not in (1, -1) for v in row):
            raise ParseError(f"expected {p} entries of +1/-1", i)
        rows.append(row)
    return SampleSet(np.array(rows, dtype=np.int8).reshape(n, p), seed=seed, generator=head[3])


def read_samples(path) -> SampleSet:
    return parse_samples(Path(path).read_text(encoding="utf-8"))


def write_samples(s: SampleSet, path) -> None:
    Path(path).write_text(s.to_text(), encoding="utf-8")


def _check_cap(p: int, cap: int) -> None:
    if p > cap:
        raise CapacityError(f"p={p} exceeds the enumeration cap of {cap} (set ISING_LB_MAX_P)")


def _spins(idx: np.ndarray, p: int) -> np.ndarray:
    """Spin vectors for state indices: bit i of the index set means x_i = -1."""
    bits = (idx[:, None] >> np.arange(p, dtype=np.int64)) & 1
    return 1.0 - 2.0 * bits


def _edge_arrays(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    if not g.edges:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    e = np.asarray(g.edges, dtype=np.int64)
    return e[:, 0], e[:, 1]


def _agree(x: np.ndarray, eu: np.ndarray, ev: np.ndarray) -> np.ndarray:
    if eu.size == 0:
        return np.zeros(x.shape[0])
    return np.einsum("ij,ij->i", x[:, eu], x[:, ev])


def _half_space_chunks(p: int):
    """Spin chunks covering every state with x_{p-1} = +1.

    Zero-field models are invariant under a global flip, so the half space
    carries all the information; chunk boundaries are fixed so reductions
    are reproducible.
    """
    half = 1 << (p - 1)
    step = 1 << CHUNK_BITS
    for start in range(0, half, step):
        idx = np.arange(start, min(start + step, half), dtype=np.int64)
        yield _spins(idx, p)


def infer_exact(m: IsingModel) -> ExactInference:
    """Log partition function and all pair correlations by enumeration."""
    p = m.p
    _check_cap(p, max_enum_p())
    eu, ev = _edge_arrays(m.graph)
    top = float(m.graph.num_edges)  # agree(x) <= |E|, so exp never overflows
    total = 0.0
    moments = np.zeros((p, p))
    for x in _half_space_chunks(p):
        w = np.exp(m.lam * (_agree(x, eu, ev) - top))
        total += w.sum()
        moments += x.T @ (x * w[:, None])
    corr = moments / total
    np.fill_diagonal(corr, 1.0)
    corr = np.clip((corr + corr.T) / 2.0, -1.0, 1.0)
    corr.setflags(write=False)
    log_z = m.lam * top + math.log(total) + math.log(2.0)
    return ExactInference(log_partition=log_z, correlations=corr)


def _check_pair(m1: IsingModel, m2: IsingModel) -> None:
    if m1.p != m2.p:
        raise DimensionError(f"models have {m1.p} and {m2.p} vertices")


def kl_exact(m1: IsingModel, m2: IsingModel) -> float:
    """KL divergence D(f_1 || f_2) in nats by enumeration of every state."""
    _check_pair(m1, m2)
    _check_cap(m1.p, max_enum_p())
    e1, e2 = _edge_arrays(m1.graph), _edge_arrays(m2.graph)
    top1, top2 = float(m1.graph.num_edges), float(m2.graph.num_edges)
    z1 = z2 = 0.0
    cross = 0.0
    for x in _half_space_chunks(m1.p):
        a1 = _agree(x, *e1)
        a2 = _agree(x, *e2)
        w1 = np.exp(m1.lam * (a1 - top1))
        z1 += w1.sum()
        z2 += np.exp(m2.lam * (a2 - top2)).sum()
        cross += np.dot(w1, m1.lam * a1 - m2.lam * a2)
    log_z1 = m1.lam * top1 + math.log(z1)
    log_z2 = m2.lam * top2 + math.log(z2)
    return float(max(cross / z1 - log_z1 + log_z2, 0.0))


def symmetric_kl_edge_form(m1: IsingModel, m2: IsingModel,
                           inf1: ExactInference | None = None,
                           inf2: ExactInference | None = None) -> float:
    """Symmetric KL written as correlation gaps over the differing edges.

    Equals ``kl_exact(m1, m2) + kl_exact(m2, m1)`` when both models share
    the coupling.
    """
    _check_pair(m1, m2)
    if m1.lam != m2.lam:
        raise ArgumentError("the edge form needs a common coupling")
    c1 = (inf1 or infer_exact(m1)).correlations
    c2 = (inf2 or infer_exact(m2)).correlations
    e1, e2 = m1.graph.edge_set, m2.graph.edge_set
    total = sum(c1[s, t] - c2[s, t] for s, t in e1 - e2)
    total += sum(c2[s, t] - c1[s, t] for s, t in e2 - e1)
    return m1.lam * float(total)


class ExactSampler:
    """Inverse-CDF sampler over the full state table of one model."""

    def __init__(self, m: IsingModel):
        p = m.p
        _check_cap(p, max_sample_p())
        self.model = m
        eu, ev = _edge_arrays(m.graph)
        idx = np.arange(1 << p, dtype=np.int64)
        logw = m.lam * (_agree(_spins(idx, p), eu, ev) - m.graph.num_edges)
        w = np.exp(logw)
        cdf = np.cumsum(w)
        self._cdf = cdf / cdf[-1]
        self._cdf[-1] = 1.0

    def draw(self, n: int, seed: int) -> SampleSet:
        if n < 0:
            raise ArgumentError("sample count must be non-negative")
        p = self.model.p
        u = uniforms(seed, n)
        idx = np.searchsorted(self._cdf, u, side="right")
        idx = np.minimum(idx, len(self._cdf) - 1).astype(np.int64)
        x = _spins(idx, p).astype(np.int8).reshape(n, p)
        return SampleSet(x, seed=seed & MASK64, generator=EXACT_GENERATOR)


def sample_exact(m: IsingModel, n: int, seed: int) -> SampleSet:
    """``n`` i.i.d. draws; sample ``i`` depends only on ``(seed, i)``."""
    return ExactSampler(m).draw(n, seed)


def gibbs_sample(m: IsingModel, n: int, burn_in: int = 1000, thinning: int = 10,
                 seed: int = 0, chains: int = 64) -> SampleSet:
    """Single-site Gibbs sampling with a systematic scan ``0..p-1``.

    ``chains`` independent chains advance together; after ``burn_in`` sweeps
    every chain contributes one sample each ``thinning`` sweeps.  Output is
    ordered by round, then chain.
    """
    if burn_in < 1 or thinning < 1:
        raise ArgumentError("burn_in and thinning must be at least 1")
    if n < 0 or chains < 1:
        raise ArgumentError("n must be non-negative and chains positive")
    p = m.p
    rng = np.random.Generator(np.random.PCG64(seed & MASK64))
    k = max(1, min(chains, n))
    adj = np.zeros((p, p))
    for u, v in m.graph.edges:
        adj[u, v] = adj[v, u] = 1.0
    x = np.where(rng.random((k, p)) < 0.5, 1.0, -1.0)

    def sweep():
        draws = rng.random((k, p))
        for i in range(p):
            prob = expit(2.0 * m.lam * (x @ adj[:, i]))
            x[:, i] = np.where(draws[:, i] < prob, 1.0, -1.0)

    for _ in range(burn_in):
        sweep()
    rounds = -(-n // k)
    out = np.empty((rounds * k, p), dtype=np.int8)
    for r in range(rounds):
        for _ in range(thinning):
            sweep()
        out[r * k:(r + 1) * k] = x
    return SampleSet(out[:n], seed=seed & MASK64, generator=GIBBS_GENERATOR)


def agreement(g: Graph, s: SampleSet) -> np.ndarray:
    """``agree(x)`` for every sample."""
    if g.num_vertices != s.p:
        raise DimensionError(f"graph has {g.num_vertices} vertices, samples have {s.p}")
    eu, ev = _edge_arrays(g)
    return _agree(s.samples.astype(np.float64), eu, ev)


def log_likelihood(m: IsingModel, s: SampleSet, inference: ExactInference | None = None) -> float:
    """Sum of ``log f(x)`` over the samples."""
    a = agreement(m.graph, s)
    log_z = (inference or infer_exact(m)).log_partition
    return m.lam * float(a.sum()) - s.num_samples * log_z


def empirical_correlations(s: SampleSet) -> np.ndarray:
    x = s.samples.astype(np.float64)
    return x.T @ x / max(s.num_samples, 1)
