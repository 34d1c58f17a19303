"""Closed-form correlation, KL and sample-complexity threshold calculators.

The connectivity bounds all reduce to one quantity: for internally disjoint
paths of lengths ``l_1, l_2, ...`` between two vertices, the ratio
``P(x_a = x_b) / P(x_a != x_b)`` is at least
``R = prod (1 + t**l_i) / (1 - t**l_i)`` with ``t = tanh(lam)``.  Since
``(1 + y) / (1 - y) = exp(2 atanh y)`` we carry ``log R`` around, which keeps
``cosh(2 lam) ** k``-sized terms finite long after they overflow a double.

Threshold calculators return a :class:`BoundReport` holding every term of
the theorem's ``max{.,.}``; terms too large for a double keep their log.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Iterable

from .errors import ArgumentError

LOG2 = math.log(2.0)
_EXP_LIMIT = 700.0


def _positive(name: str, value) -> float:
    v = float(value)
    if not (v > 0 and math.isfinite(v)):
        raise ArgumentError(f"{name} must be positive and finite, got {value!r}")
    return v


def _check_delta(delta) -> float:
    d = float(delta)
    if not 0.0 <= d < 1.0:
        raise ArgumentError(f"delta must lie in [0, 1), got {delta!r}")
    return d


def log_cosh(x: float) -> float:
    x = abs(x)
    return x + math.log1p(math.exp(-2.0 * x)) - LOG2


def log_path_ratio(lam: float, groups: Iterable[tuple[float, float]]) -> float:
    """``log R`` for groups of ``(path_length, path_count)``."""
    t = math.tanh(lam)
    total = 0.0
    for length, count in groups:
        if count == 0:
            continue
        y = t ** length
        total += 2.0 * count * (math.atanh(y) if y < 1.0 else math.inf)
    return total


def _two_over_one_plus_exp(log_r: float) -> float:
    """``2 / (1 + exp(log_r))`` without overflow."""
    if log_r > 0:
        e = math.exp(-log_r) if log_r < _EXP_LIMIT else 0.0
        return 2.0 * e / (1.0 + e)
    return 2.0 / (1.0 + math.exp(log_r))


def corr_lower_bound_ld(lam, l, d) -> float:
    """Lower bound on ``E[x_a x_b]`` for a pair joined by ``d`` disjoint paths of length <= ``l``.

    Equal to ``1 - 2 / (1 + ((1 + t^l) / (1 - t^l))^d)``, evaluated as
    ``tanh(d * atanh(t^l))``.
    """
    lam = _positive("lambda", lam)
    if int(l) < 1 or int(d) < 1:
        raise ArgumentError("l and d must be positive integers")
    y = math.tanh(lam) ** int(l)
    if y >= 1.0:
        return 1.0 - _two_over_one_plus_exp(math.inf)
    return math.tanh(int(d) * math.atanh(y))


def kl_upper_bound_paths(lam, groups, sym_diff_size: int = 1) -> float:
    """``2 lam |E delta E'| / (1 + R)`` for an arbitrary mix of path groups."""
    lam = _positive("lambda", lam)
    if sym_diff_size < 0:
        raise ArgumentError("sym_diff_size must be non-negative")
    return sym_diff_size * lam * _two_over_one_plus_exp(log_path_ratio(lam, groups))


def kl_upper_bound_ld(lam, l, d, sym_diff_size) -> float:
    """KL bound when every differing pair is (l, d)-connected in the other graph."""
    lam = _positive("lambda", lam)
    if int(l) < 1 or int(d) < 1:
        raise ArgumentError("l and d must be positive integers")
    if int(sym_diff_size) < 0:
        raise ArgumentError("sym_diff_size must be non-negative")
    return kl_upper_bound_paths(lam, [(int(l), int(d))], int(sym_diff_size))


def kl_upper_bound_hamming1(lam) -> float:
    """KL bound for two models whose graphs differ in a single edge: ``lam * tanh(lam)``."""
    lam = _positive("lambda", lam)
    return lam * math.tanh(lam)


@dataclass(frozen=True)
class FanoThreshold:
    value: float
    vacuous: bool

    def __float__(self):
        return self.value


def _log_size(class_size=None, log_class_size=None) -> float:
    if log_class_size is not None:
        v = float(log_class_size)
        if not v > 0:
            raise ArgumentError("log class size must be positive")
        return v
    if class_size is None or int(class_size) < 2:
        raise ArgumentError(f"class size must be at least 2, got {class_size!r}")
    return math.log(int(class_size))


def fano_counting_threshold(class_size=None, p: int = 1, delta=0.0, *,
                            log_class_size=None) -> FanoThreshold:
    """Sample count below which any estimator has ``p_max >= delta`` (counting argument).

    ``class_size`` may be an arbitrarily large int; pass ``log_class_size``
    (natural log) instead when even that is impractical.
    """
    lg = _log_size(class_size, log_class_size)
    delta = _check_delta(delta)
    if int(p) < 1:
        raise ArgumentError("p must be positive")
    value = lg / int(p) * ((1.0 - delta) - LOG2 / lg)
    return FanoThreshold(value, value <= 0)


@dataclass(frozen=True)
class FanoInputs:
    hypothesis_count: int
    rho: float
    delta: float = 0.0

    def __post_init__(self):
        if int(self.hypothesis_count) < 2:
            raise ArgumentError("need at least two hypotheses")
        if not float(self.rho) > 0:
            raise ArgumentError("KL radius must be positive")
        _check_delta(self.delta)


def fano_single_center_threshold(inputs: FanoInputs) -> FanoThreshold:
    """``(log|T| / rho) * ((1 - delta) - log 2 / log|T|)`` for a family inside one KL ball."""
    lg = math.log(inputs.hypothesis_count)
    value = lg / inputs.rho * ((1.0 - inputs.delta) - LOG2 / lg)
    return FanoThreshold(value, value <= 0)


def fano_floor(n, rho, hypothesis_count) -> float:
    """Error floor ``1 - (n rho + log 2) / log|T|`` for a uniform prior on one KL ball."""
    if int(hypothesis_count) < 2:
        raise ArgumentError("need at least two hypotheses")
    return 1.0 - (n * rho + LOG2) / math.log(hypothesis_count)


def fano_crossing(rho, hypothesis_count, floor) -> float:
    """The (real) sample size at which :func:`fano_floor` equals ``floor``."""
    lg = math.log(hypothesis_count)
    return ((1.0 - floor) * lg - LOG2) / rho


@dataclass
class Term:
    name: str
    value: float
    log_value: float | None
    overflow: bool = False


@dataclass
class BoundReport:
    theorem: str
    inputs: dict
    terms: list[Term] = field(default_factory=list)
    winning_term: str = ""
    n_threshold: float = 0.0
    log_n_threshold: float | None = None
    overflow: bool = False
    extras: dict = field(default_factory=dict)

    def term(self, name: str) -> Term:
        for t in self.terms:
            if t.name == name:
                return t
        raise KeyError(name)

    def to_dict(self) -> dict:
        return asdict(self)


def _term(name: str, log_coeff: float, log_factor: float) -> Term:
    """Term ``exp(log_coeff) * log_factor`` where ``log_factor`` is a plain log value."""
    if log_factor <= 0:
        value = math.exp(log_coeff) * log_factor if log_coeff < _EXP_LIMIT else -math.inf
        return Term(name, value, None, overflow=not math.isfinite(value))
    lv = log_coeff + math.log(log_factor)
    if lv < _EXP_LIMIT:
        return Term(name, math.exp(log_coeff) * log_factor, lv)
    return Term(name, math.inf, lv, overflow=True)


def _finish(theorem: str, inputs: dict, delta: float, terms: list[Term], **extras) -> BoundReport:
    def key(t: Term):
        if t.log_value is not None:
            return (1, t.log_value)
        return (0, t.value)

    win = max(terms, key=key)
    scale = 1.0 - delta
    if win.overflow:
        log_thr = math.log(scale) + win.log_value if scale > 0 else None
        thr = math.inf if scale > 0 else 0.0
    else:
        thr = scale * max(t.value for t in terms)
        log_thr = math.log(thr) if thr > 0 else None
    return BoundReport(theorem, inputs, terms, win.name, thr, log_thr, win.overflow, dict(extras))


def _hamming_term(log_size: float, lam: float) -> Term:
    # log_size / (lam tanh lam)
    return _term("hamming-term", -math.log(lam * math.tanh(lam)), log_size)


def _connectivity_term(log_r: float, lam: float, log_size: float) -> Term:
    # (1 + R) / (2 lam) * log_size
    log_one_plus_r = log_r + math.log1p(math.exp(-log_r)) if log_r > 0 else math.log1p(math.exp(log_r))
    return _term("connectivity-term", log_one_plus_r - math.log(2.0 * lam), log_size)


def threshold_path_restricted(p, eta, lam, delta) -> BoundReport:
    """Graphs with at most ``eta`` paths between any two vertices."""
    lam = _positive("lambda", lam)
    delta = _check_delta(delta)
    p, eta = int(p), int(eta)
    if eta < 1:
        raise ArgumentError("eta must be at least 1")
    if 2 * (eta + 1) > p:
        raise ArgumentError(f"construction needs eta + 1 <= p/2 (eta={eta}, p={p})")
    log_r = (eta - 1) * log_cosh(2.0 * lam)
    terms = [
        _hamming_term(math.log(p / 2.0), lam),
        _connectivity_term(log_r, lam, math.log(p / (2.0 * (eta + 1)))),
    ]
    return _finish("path-restricted", {"p": p, "eta": eta, "lambda": lam, "delta": delta}, delta, terms)


def t_nu(p, eta, gamma, nu) -> float:
    return (p ** (1.0 - nu) - (eta + 1)) / gamma


def d_nu(p, g, d, nu) -> float:
    return min(d, p ** (1.0 - nu) / g)


def _check_nu(nu) -> float:
    nu = float(nu)
    if not 0.0 < nu < 1.0:
        raise ArgumentError(f"nu must lie in (0, 1), got {nu!r}")
    return nu


def threshold_path_length(p, eta, gamma, nu, lam, delta) -> BoundReport:
    """Graphs with at most ``eta`` paths of length <= ``gamma`` between any two vertices."""
    lam = _positive("lambda", lam)
    delta = _check_delta(delta)
    nu = _check_nu(nu)
    p, eta, gamma = int(p), int(eta), int(gamma)
    if eta < 1 or gamma < 1:
        raise ArgumentError("eta and gamma must be at least 1")
    t = t_nu(p, eta, gamma, nu)
    if t < 1:
        raise ArgumentError(f"t_nu = (p^(1-nu) - (eta+1)) / gamma = {t:.6g} must be >= 1")
    log_r = (eta - 1) * log_cosh(2.0 * lam) + log_path_ratio(lam, [(gamma + 1, t)])
    terms = [
        _hamming_term(math.log(p / 2.0), lam),
        _connectivity_term(log_r, lam, nu * math.log(p)),
    ]
    inputs = {"p": p, "eta": eta, "gamma": gamma, "nu": nu, "lambda": lam, "delta": delta}
    return _finish("path-length", inputs, delta, terms, t_nu=t)


def threshold_girth(p, g, d, nu, lam, delta) -> BoundReport:
    """Graphs with girth at least ``g`` and maximum degree ``d``."""
    lam = _positive("lambda", lam)
    delta = _check_delta(delta)
    nu = _check_nu(nu)
    p, g, d = int(p), int(g), int(d)
    if g < 3:
        raise ArgumentError("girth must be at least 3")
    if d < 1:
        raise ArgumentError("d must be at least 1")
    dn = d_nu(p, g, d, nu)
    if dn < 1:
        raise ArgumentError(f"d_nu = min(d, p^(1-nu)/g) = {dn:.6g} must be >= 1")
    log_r = log_path_ratio(lam, [(g - 1, dn)])
    terms = [
        _hamming_term(math.log(p / 2.0), lam),
        _connectivity_term(log_r, lam, nu * math.log(p)),
    ]
    inputs = {"p": p, "g": g, "d": d, "nu": nu, "lambda": lam, "delta": delta}
    return _finish("girth", inputs, delta, terms, d_nu=dn)


def threshold_dregular(p, d, lam, delta) -> BoundReport:
    """Approximately ``d``-regular graphs (all degrees ``d`` or ``d - 1``)."""
    lam = _positive("lambda", lam)
    delta = _check_delta(delta)
    p, d = int(p), int(d)
    if d < 2:
        raise ArgumentError("d must be at least 2")
    log_size = math.log(p * d / 4.0)
    terms = [
        _hamming_term(log_size, lam),
        _term("connectivity-term", lam * d - lam - math.log(2.0 * lam * d), log_size),
    ]
    return _finish("dregular", {"p": p, "d": d, "lambda": lam, "delta": delta}, delta, terms)


def threshold_edge_bounded(p, k, lam, delta) -> BoundReport:
    """Graphs whose edge count lies in ``[k/2, k]``."""
    lam = _positive("lambda", lam)
    delta = _check_delta(delta)
    p, k = int(p), int(k)
    if k < 9:
        raise ArgumentError(f"k must be at least 9, got {k}")
    root = math.sqrt(2.0 * k)
    log_size = math.log(k / 2.0)
    terms = [
        _hamming_term(log_size, lam),
        _term("connectivity-term", lam * (root - 1.0) - math.log(2.0 * lam) - lam - math.log(root + 1.0), log_size),
    ]
    return _finish("edge-bounded", {"p": p, "k": k, "lambda": lam, "delta": delta}, delta, terms)


def clique_kl_bound(lam, d) -> float:
    """KL bound for a ``(d+1)``-clique losing one edge: ``2 lam d e^lam / e^(lam d)``."""
    lam = _positive("lambda", lam)
    return math.exp(math.log(2.0 * lam * d) + lam - lam * d)


def edge_bounded_kl_bound(lam, k) -> float:
    """``2 lam e^lam (sqrt(2k) + 1) / e^(lam (sqrt(2k) - 1))``."""
    lam = _positive("lambda", lam)
    root = math.sqrt(2.0 * k)
    return math.exp(math.log(2.0 * lam * (root + 1.0)) + lam - lam * (root - 1.0))
