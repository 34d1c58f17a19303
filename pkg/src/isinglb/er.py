"""Dense Erdős–Rényi quantities: entropy, concentration constants, n1/n2 bounds.

Entropies are in bits; coupling terms are in nats, mixed exactly as the
closed forms mix them.  Unspecified ``O(1/p)`` slack terms are taken to be
zero and every result carries ``asymptotic_slack_dropped = True``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from enum import Enum

import numpy as np

from .bounds import log_cosh
from .errors import ArgumentError, HypothesisViolation
from .graph import Graph

P_AVG_MAX = 1.0 / 90.0


class Regime(str, Enum):
    HIGH_LAMBDA = "HIGH_LAMBDA"
    LOW_LAMBDA = "LOW_LAMBDA"


def binary_entropy(q: float) -> float:
    """``H(q)`` in bits, with ``0 log 0 = 0``."""
    q = float(q)
    if not 0.0 <= q <= 1.0:
        raise ArgumentError(f"q must lie in [0, 1], got {q!r}")
    if q in (0.0, 1.0):
        return 0.0
    return -(q * math.log2(q) + (1.0 - q) * math.log2(1.0 - q))


@dataclass(frozen=True)
class ERParams:
    p: int
    c: float
    lam: float
    p_avg_target: float = P_AVG_MAX
    epsilon: float = 0.5

    def __post_init__(self):
        if int(self.p) < 3:
            raise ArgumentError("p must be at least 3")
        if not 0.0 < self.c / self.p < 1.0:
            raise ArgumentError(f"edge probability c/p = {self.c / self.p:.6g} must lie in (0, 1)")
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise ArgumentError("lambda must be positive")
        if not 0.0 <= self.p_avg_target:
            raise ArgumentError("p_avg_target must be non-negative")
        if not 0.0 < self.epsilon < 1.0:
            raise ArgumentError("epsilon must lie in (0, 1)")

    @property
    def dense(self) -> bool:
        """``c >= p^(3/4)``, the finite-p reading of the dense-regime hypothesis."""
        return self.c >= self.p ** 0.75

    @property
    def gamma(self) -> float:
        return self.c ** 2 / (6.0 * self.p)


def er_concentration_constants(params: ERParams) -> tuple[float, float]:
    """``b_p = (p/3) exp(-p/36)`` and ``r_c = 2 exp(-c^2 eps^2 / 36)``."""
    p, c, eps = params.p, params.c, params.epsilon
    b_p = math.exp(math.log(p / 3.0) - p / 36.0)
    r_c = math.exp(math.log(2.0) - c * c * eps * eps / 36.0)
    return b_p, r_c


@dataclass
class ERQuantities:
    entropy_bits: float
    gamma: float
    b_p: float
    r_c: float
    n1: float
    log_n1: float
    n2: float
    lower_bound: float
    log_lower_bound: float
    regime: Regime
    dominant_denominator_term: str
    denominator_log_terms: dict = field(default_factory=dict)
    dense: bool = True
    asymptotic_slack_dropped: bool = True
    units: dict = field(default_factory=lambda: {"entropy": "bits", "lambda_terms": "nats"})

    def to_dict(self) -> dict:
        d = asdict(self)
        d["regime"] = self.regime.value
        return d


def _logsumexp(values: list[float]) -> float:
    top = max(values)
    return top + math.log(sum(math.exp(v - top) for v in values))


def er_lower_bound(params: ERParams) -> ERQuantities:
    """``n >= max(n1, n2)`` for ``G(p, c/p)`` at target average error ``p_avg_target``."""
    if params.p_avg_target > P_AVG_MAX:
        raise HypothesisViolation(f"p_avg_target = {params.p_avg_target} exceeds 1/90")
    p, c, lam, pavg = params.p, params.c, params.lam, params.p_avg_target
    h = binary_entropy(c / p)
    gamma = params.gamma
    b_p, r_c = er_concentration_constants(params)

    # log of each denominator term of n1
    log_cosh_pow = gamma * log_cosh(2.0 * lam)
    log_one_plus = log_cosh_pow + math.log1p(math.exp(-log_cosh_pow))
    den = {
        "degree-concentration": math.log(4.0 * lam * p / 3.0) - p / 36.0,
        "typicality": math.log(4.0) - p ** 1.5 / 144.0,
        "path-correlation": math.log(4.0 * lam / 9.0) - log_one_plus,
    }
    log_den = _logsumexp(list(den.values()))
    numerator = h * (3.0 / 80.0) * (1.0 - 80.0 * pavg)
    log_n1 = math.log(numerator) - log_den if numerator > 0 else -math.inf
    n1 = math.exp(log_n1) if log_n1 < 700 else math.inf
    n2 = (p / 4.0) * h * (1.0 - 3.0 * pavg)
    log_n2 = math.log(n2) if n2 > 0 else -math.inf
    log_lb = max(log_n1, log_n2)
    return ERQuantities(
        entropy_bits=h, gamma=gamma, b_p=b_p, r_c=r_c,
        n1=n1, log_n1=log_n1, n2=n2,
        lower_bound=max(n1, n2), log_lower_bound=log_lb,
        regime=er_regime(params),
        dominant_denominator_term=max(den, key=den.get),
        denominator_log_terms=den,
        dense=params.dense,
    )


def er_regime(params: ERParams) -> Regime:
    """HIGH_LAMBDA iff ``lam >= sqrt(p) / c`` (the boundary itself counts as high)."""
    return Regime.HIGH_LAMBDA if params.lam >= math.sqrt(params.p) / params.c else Regime.LOW_LAMBDA


REGIME_SCALE = {
    Regime.HIGH_LAMBDA: "exponential via n1",
    Regime.LOW_LAMBDA: "c log p from prior work",
}


def sample_er_graph(p: int, c: float, seed: int) -> Graph:
    """``G(p, c/p)``: each pair, in lexicographic order, kept with probability ``c/p``."""
    p = int(p)
    q = c / p
    if not 0.0 <= q < 1.0:
        raise ArgumentError(f"edge probability c/p = {q:.6g} must lie in [0, 1)")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    iu, ju = np.triu_indices(p, k=1)
    keep = rng.random(iu.size) < q
    return Graph(p, tuple(zip(iu[keep].tolist(), ju[keep].tolist())))


@dataclass
class ERDiagnostics:
    p_used: int
    part_size: int
    leftover_vertices: int
    average_degree: float
    typical: bool
    epsilon: float
    gamma: float
    mean_common: float
    expected_common: float
    histogram: dict
    m_AC: int
    pairs: int
    fraction_at_least_gamma: float
    path_count_threshold: float
    fraction_above_path_threshold: float
    half_pairs_threshold: float
    m_AC_above_half: bool

    def to_dict(self) -> dict:
        return asdict(self)


def er_structure_diagnostics(g: Graph, c: float, gamma_override: float | None = None,
                             epsilon: float = 0.5) -> ERDiagnostics:
    """Count common neighbours in B for every (a, c) in A x C.

    The vertex set is split into consecutive thirds A, B, C; if ``p`` is not
    a multiple of 3 the last ``p mod 3`` vertices are left out.
    """
    p = g.num_vertices
    third = p // 3
    if third < 1:
        raise ArgumentError("need at least 3 vertices")
    adj = np.zeros((p, p), dtype=np.int64)
    for u, v in g.edges:
        adj[u, v] = adj[v, u] = 1
    A = slice(0, third)
    B = slice(third, 2 * third)
    C = slice(2 * third, 3 * third)
    common = adj[A, B] @ adj[B, C]
    gamma = c * c / (6.0 * p) if gamma_override is None else float(gamma_override)
    avg_deg = 2.0 * g.num_edges / p
    values, counts = np.unique(common, return_counts=True)
    count_thr = c * c / (3.0 * p) - math.sqrt(4.0 * p * math.log(p))
    m_ac = int(np.count_nonzero(common >= gamma))
    return ERDiagnostics(
        p_used=3 * third,
        part_size=third,
        leftover_vertices=p - 3 * third,
        average_degree=avg_deg,
        typical=abs(avg_deg - c) <= c * epsilon,
        epsilon=epsilon,
        gamma=gamma,
        mean_common=float(common.mean()),
        expected_common=third * (c / p) ** 2,
        histogram={int(k): int(n) for k, n in zip(values, counts)},
        m_AC=m_ac,
        pairs=third * third,
        fraction_at_least_gamma=m_ac / (third * third),
        path_count_threshold=count_thr,
        fraction_above_path_threshold=float(np.mean(common > count_thr)),
        half_pairs_threshold=0.5 * third * third,
        m_AC_above_half=m_ac > 0.5 * third * third,
    )
