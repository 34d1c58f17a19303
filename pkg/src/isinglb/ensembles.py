"""Hard-instance families: a center graph, its single-edge deletions, and a KL radius.

Every family is built from disjoint copies of a small block laid out on
consecutive vertex ranges starting at 0.  Inside a block the two endpoints
``s, t`` come first, then common neighbours, then path interiors.  Vertices
that do not fit a whole block stay isolated and are counted in
``leftover_vertices``.

Two kinds of family exist for the path/girth classes: CONNECTIVITY deletes
the ``(s, t)`` edge of one block (so the deleted pair stays well connected),
HAMMING1 deletes any one block edge.  The d-regular and edge-bounded
families are always single-edge deletions from cliques.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from pathlib import Path

from . import bounds
from .errors import ArgumentError, BudgetExceeded
from .graph import (DEFAULT_SEARCH_BUDGET, Graph, count_simple_paths, girth,
                    hamming_distance, max_disjoint_paths, read_graph,
                    verify_certificate, write_graph)
from .ising import IsingModel, kl_exact

KL_TOLERANCE = 1e-9
_FLOOR_EPS = 1e-9


class ClassTag(str, Enum):
    PATH_RESTRICTED = "PATH_RESTRICTED"
    PATH_LENGTH = "PATH_LENGTH"
    GIRTH = "GIRTH"
    DREGULAR = "DREGULAR"
    EDGE_BOUNDED = "EDGE_BOUNDED"


class EnsembleKind(str, Enum):
    CONNECTIVITY = "CONNECTIVITY"
    HAMMING1 = "HAMMING1"


@dataclass(frozen=True, eq=False)
class HardEnsemble:
    center: Graph
    members: tuple[Graph, ...]
    rho: float
    lam: float
    class_tag: ClassTag
    kind: EnsembleKind
    params: dict
    blocks: tuple[tuple[int, ...], ...] = ()
    removed: tuple[tuple[int, int], ...] = ()
    leftover_vertices: int = 0

    @property
    def p(self) -> int:
        return self.center.num_vertices

    @property
    def size(self) -> int:
        return len(self.members)

    def manifest(self) -> dict:
        return {
            "class_tag": self.class_tag.value,
            "kind": self.kind.value,
            "params": self.params,
            "rho": self.rho,
            "lambda": self.lam,
            "counts": {
                "members": len(self.members),
                "center_edges": self.center.num_edges,
                "leftover_vertices": self.leftover_vertices,
            },
            "blocks": [list(b) for b in self.blocks],
            "removed_edges": [list(e) for e in self.removed],
        }


def _floor(x: float) -> int:
    return int(math.floor(x + _FLOOR_EPS))


def _kind(kind) -> EnsembleKind:
    try:
        return EnsembleKind(kind.value if isinstance(kind, EnsembleKind) else str(kind).upper())
    except ValueError:
        raise ArgumentError(f"unknown ensemble kind {kind!r}") from None


def _assemble(p, blocks, block_edges, kind, connectivity_pairs, rho, lam, tag, params):
    edges = [e for be in block_edges for e in be]
    center = Graph(p, tuple(edges))
    if kind is EnsembleKind.CONNECTIVITY:
        removed = [tuple(sorted(pair)) for pair in connectivity_pairs]
    else:
        removed = [e for be in block_edges for e in sorted(be)]
    members = tuple(center.with_edges(remove=[e]) for e in removed)
    used = sum(len(b) for b in blocks)
    return HardEnsemble(center, members, float(rho), float(lam), tag, kind, params,
                        tuple(tuple(b) for b in blocks), tuple(removed), p - used)


def _theta_block(base: int, commons: int, path_count: int, path_interior: int):
    """Vertices and edges of an s-t block: direct edge, common neighbours, long paths."""
    s, t = base, base + 1
    verts = [s, t]
    edges = [(s, t)]
    nxt = base + 2
    for _ in range(commons):
        edges += [(s, nxt), (t, nxt)]
        verts.append(nxt)
        nxt += 1
    for _ in range(path_count):
        chain = [s] + list(range(nxt, nxt + path_interior)) + [t]
        verts.extend(chain[1:-1])
        edges += list(zip(chain, chain[1:]))
        nxt += path_interior
    return verts, edges


def _positive_lambda(lam) -> float:
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise ArgumentError(f"lambda must be positive, got {lam!r}")
    return lam


def build_path_restricted(p, eta, kind=EnsembleKind.CONNECTIVITY, lam=1.0) -> HardEnsemble:
    p, eta, kind, lam = int(p), int(eta), _kind(kind), _positive_lambda(lam)
    if eta < 1:
        raise ArgumentError("eta must be at least 1")
    alpha = p // (eta + 1)
    if alpha < 1:
        raise ArgumentError(f"need alpha = floor(p / (eta + 1)) >= 1 (p={p}, eta={eta})")
    blocks, block_edges = [], []
    for i in range(alpha):
        v, e = _theta_block(i * (eta + 1), eta - 1, 0, 0)
        blocks.append(v)
        block_edges.append(e)
    rho = certified_rho(ClassTag.PATH_RESTRICTED, kind, {"eta": eta}, lam)
    params = {"p": p, "eta": eta, "alpha": alpha}
    return _assemble(p, blocks, block_edges, kind, [b[:2] for b in blocks], rho, lam,
                     ClassTag.PATH_RESTRICTED, params)


def build_path_length(p, eta, gamma, nu, kind=EnsembleKind.CONNECTIVITY, lam=1.0) -> HardEnsemble:
    p, eta, gamma, kind, lam = int(p), int(eta), int(gamma), _kind(kind), _positive_lambda(lam)
    nu = float(nu)
    if not 0 < nu < 1:
        raise ArgumentError("nu must lie in (0, 1)")
    if eta < 1 or gamma < 1:
        raise ArgumentError("eta and gamma must be at least 1")
    t = bounds.t_nu(p, eta, gamma, nu)
    k = _floor(t)
    alpha = _floor(p ** nu)
    if k < 1:
        raise ArgumentError(f"t_nu = {t:.6g} < 1: no room for the long paths")
    block_size = k * gamma + eta + 1
    if alpha < 1 or alpha * block_size > p:
        raise ArgumentError(f"alpha * (k*gamma + eta + 1) = {alpha} * {block_size} exceeds p = {p}")
    blocks, block_edges = [], []
    for i in range(alpha):
        v, e = _theta_block(i * block_size, eta - 1, k, gamma)
        blocks.append(v)
        block_edges.append(e)
    params = {"p": p, "eta": eta, "gamma": gamma, "nu": nu, "alpha": alpha, "k": k, "t_nu": t}
    rho = certified_rho(ClassTag.PATH_LENGTH, kind, params, lam)
    return _assemble(p, blocks, block_edges, kind, [b[:2] for b in blocks], rho, lam,
                     ClassTag.PATH_LENGTH, params)


def build_girth(p, g, d, nu, kind=EnsembleKind.CONNECTIVITY, lam=1.0) -> HardEnsemble:
    """Blocks of ``k`` disjoint ``(g-1)``-paths plus the direct ``(s, t)`` edge.

    For HAMMING1 the block keeps its direct edge in every member that loses
    a path edge, so ``k`` is capped at ``d - 1`` to respect the degree bound.
    """
    p, g, d, kind, lam = int(p), int(g), int(d), _kind(kind), _positive_lambda(lam)
    nu = float(nu)
    if not 0 < nu < 1:
        raise ArgumentError("nu must lie in (0, 1)")
    if g < 3 or d < 1:
        raise ArgumentError("need g >= 3 and d >= 1")
    dn = bounds.d_nu(p, g, d, nu)
    k = _floor(dn)
    if kind is EnsembleKind.HAMMING1:
        k = min(k, d - 1)
    if k < 1:
        raise ArgumentError(f"path count k = {k} < 1 (d_nu = {dn:.6g})")
    alpha = _floor(p ** nu)
    block_size = k * (g - 2) + 2
    if alpha < 1 or alpha * block_size > p:
        raise ArgumentError(f"alpha * (k*(g-2) + 2) = {alpha} * {block_size} exceeds p = {p}")
    blocks, block_edges = [], []
    for i in range(alpha):
        v, e = _theta_block(i * block_size, 0, k, g - 2)
        blocks.append(v)
        block_edges.append(e)
    params = {"p": p, "g": g, "d": d, "nu": nu, "alpha": alpha, "k": k, "d_nu": dn}
    rho = certified_rho(ClassTag.GIRTH, kind, params, lam)
    return _assemble(p, blocks, block_edges, kind, [b[:2] for b in blocks], rho, lam,
                     ClassTag.GIRTH, params)


def build_dregular(p, d, lam=1.0) -> HardEnsemble:
    p, d, lam = int(p), int(d), _positive_lambda(lam)
    if d < 2:
        raise ArgumentError("d must be at least 2")
    if d + 1 > p:
        raise ArgumentError(f"d + 1 = {d + 1} exceeds p = {p}")
    groups = p // (d + 1)
    blocks = [list(range(i * (d + 1), (i + 1) * (d + 1))) for i in range(groups)]
    block_edges = [list(combinations(b, 2)) for b in blocks]
    params = {"p": p, "d": d, "groups": groups}
    rho = certified_rho(ClassTag.DREGULAR, EnsembleKind.HAMMING1, params, lam)
    return _assemble(p, blocks, block_edges, EnsembleKind.HAMMING1, [], rho, lam,
                     ClassTag.DREGULAR, params)


def clique_order(k: int) -> int:
    """Largest ``m`` with ``m (m - 1) / 2 <= k``."""
    m = 1
    while (m + 1) * m // 2 <= k:
        m += 1
    return m


def build_edge_bounded(p, k, lam=1.0) -> HardEnsemble:
    p, k, lam = int(p), int(k), _positive_lambda(lam)
    if k < 9:
        raise ArgumentError(f"k must be at least 9, got {k}")
    m = clique_order(k)
    if m > p:
        raise ArgumentError(f"clique order m = {m} exceeds p = {p}")
    blocks = [list(range(m))]
    block_edges = [list(combinations(range(m), 2))]
    params = {"p": p, "k": k, "m": m}
    rho = certified_rho(ClassTag.EDGE_BOUNDED, EnsembleKind.HAMMING1, params, lam)
    return _assemble(p, blocks, block_edges, EnsembleKind.HAMMING1, [], rho, lam,
                     ClassTag.EDGE_BOUNDED, params)


def certified_rho(tag: ClassTag, kind: EnsembleKind, params: dict, lam: float) -> float:
    """KL radius the construction certifies, from the closed-form bounds."""
    hamming = bounds.kl_upper_bound_hamming1(lam)
    if tag is ClassTag.DREGULAR:
        return min(bounds.clique_kl_bound(lam, params["d"]), hamming)
    if tag is ClassTag.EDGE_BOUNDED:
        return min(bounds.edge_bounded_kl_bound(lam, params["k"]), hamming)
    if kind is EnsembleKind.HAMMING1:
        return hamming
    if tag is ClassTag.PATH_RESTRICTED:
        groups = [(2, params["eta"] - 1)]
    elif tag is ClassTag.PATH_LENGTH:
        groups = [(2, params["eta"] - 1), (params["gamma"] + 1, params["k"])]
    else:
        groups = [(params["g"] - 1, params["k"])]
    return bounds.kl_upper_bound_paths(lam, groups)


def expected_size(tag: ClassTag, kind: EnsembleKind, params: dict) -> int:
    """Member count stated for each construction."""
    if tag is ClassTag.DREGULAR:
        return params["groups"] * math.comb(params["d"] + 1, 2)
    if tag is ClassTag.EDGE_BOUNDED:
        return math.comb(params["m"], 2)
    alpha = params["alpha"]
    if kind is EnsembleKind.CONNECTIVITY:
        return alpha
    if tag is ClassTag.PATH_RESTRICTED:
        return alpha * (2 * params["eta"] - 1)
    if tag is ClassTag.PATH_LENGTH:
        return alpha * (params["k"] * (params["gamma"] + 1) + 2 * params["eta"] - 1)
    return alpha * (params["k"] * (params["g"] - 1) + 1)


def connectivity_requirement(e: HardEnsemble) -> tuple[int, int] | None:
    """``(l, d)`` the deleted pair must satisfy in a CONNECTIVITY member."""
    if e.kind is not EnsembleKind.CONNECTIVITY:
        return None
    q = e.params
    if e.class_tag is ClassTag.PATH_RESTRICTED:
        return (2, q["eta"] - 1)
    if e.class_tag is ClassTag.PATH_LENGTH:
        return (q["gamma"] + 1, q["eta"] - 1 + q["k"])
    if e.class_tag is ClassTag.GIRTH:
        return (q["g"] - 1, q["k"])
    return None


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)
    checks: list[str] = field(default_factory=list)
    kl_to_center: list[float] | None = None

    @property
    def ok(self) -> bool:
        return not self.violations

    @property
    def max_kl(self) -> float | None:
        return max(self.kl_to_center) if self.kl_to_center else None

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": self.violations, "checks": self.checks,
                "kl_to_center": self.kl_to_center, "max_kl": self.max_kl}


def _components(g: Graph) -> list[list[int]]:
    seen, comps = set(), []
    for v in range(g.num_vertices):
        if v in seen or not g.adjacency[v]:
            continue
        stack, comp = [v], []
        seen.add(v)
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in g.adjacency[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def class_violations(e: HardEnsemble, g: Graph) -> list[str]:
    """Reasons ``g`` falls outside the graph class the ensemble targets."""
    q, out = e.params, []
    tag = e.class_tag
    if tag in (ClassTag.PATH_RESTRICTED, ClassTag.PATH_LENGTH):
        limit = q["eta"]
        max_len = q["gamma"] if tag is ClassTag.PATH_LENGTH else math.inf
        for comp in _components(g):
            for a, b in combinations(comp, 2):
                c = count_simple_paths(g, a, b, max_len)
                if c > limit:
                    out.append(f"pair ({a}, {b}) has {c} paths > eta = {limit}")
    elif tag is ClassTag.GIRTH:
        gi = girth(g)
        if gi < q["g"]:
            out.append(f"girth {gi} < {q['g']}")
        if max(g.degrees()) > q["d"]:
            out.append(f"max degree {max(g.degrees())} > {q['d']}")
    elif tag is ClassTag.DREGULAR:
        bad = sorted({x for x in g.degrees() if x and x not in (q["d"] - 1, q["d"])})
        if bad:
            out.append(f"degrees {bad} outside {{{q['d'] - 1}, {q['d']}}}")
    elif tag is ClassTag.EDGE_BOUNDED:
        if not q["k"] / 2 <= g.num_edges <= q["k"]:
            out.append(f"edge count {g.num_edges} outside [{q['k'] / 2}, {q['k']}]")
    return out


def validate_ensemble(e: HardEnsemble, kl_max_p: int = 12,
                      budget: int = DEFAULT_SEARCH_BUDGET) -> ValidationReport:
    """Mechanically re-check every structural claim the construction makes.

    Exact KL from each member to the center is only computed when
    ``p <= kl_max_p``.
    """
    rep = ValidationReport()
    v = rep.violations

    rep.checks.append("distinct")
    if len(set(e.members)) != len(e.members):
        v.append("distinctness: duplicated member graph")
    if e.center in set(e.members):
        v.append("distinctness: a member equals the center")

    rep.checks.append("count")
    want = expected_size(e.class_tag, e.kind, e.params)
    if len(e.members) != want:
        v.append(f"count: {len(e.members)} members, construction gives {want}")

    rep.checks.append("rho-formula")
    rho_formula = certified_rho(e.class_tag, e.kind, e.params, e.lam)
    if not math.isclose(e.rho, rho_formula, rel_tol=1e-12, abs_tol=1e-300):
        v.append(f"rho-formula: stored rho {e.rho!r} != certified {rho_formula!r}")

    rep.checks.append("structure")
    need = connectivity_requirement(e)
    for i, m in enumerate(e.members):
        if m.num_vertices != e.p:
            v.append(f"structure: member {i} has {m.num_vertices} vertices")
            continue
        diff = e.center.edge_set ^ m.edge_set
        if len(diff) != 1 or not diff <= e.center.edge_set:
            v.append(f"structure: member {i} is not the center minus one edge")
            continue
        if need is not None:
            (s, t), = diff
            if not any(s in b[:2] and t in b[:2] for b in e.blocks):
                v.append(f"structure: member {i} deletes ({s}, {t}), not a block's main edge")
            l, d = need
            if d >= 1:
                try:
                    found, cert = max_disjoint_paths(m, s, t, l, budget=budget)
                except BudgetExceeded as exc:
                    v.append(f"connectivity: member {i}: {exc}")
                    continue
                if found < d or not verify_certificate(m, cert, l, d):
                    v.append(f"connectivity: member {i} pair ({s}, {t}) is ({l}, {found})- not ({l}, {d})-connected")

    rep.checks.append("class-membership")
    for i, m in enumerate(e.members):
        for reason in class_violations(e, m):
            v.append(f"class: member {i}: {reason}")

    if e.p <= kl_max_p:
        rep.checks.append("kl-dominance")
        center = IsingModel(e.center, e.lam)
        rep.kl_to_center = []
        for i, m in enumerate(e.members):
            kl = kl_exact(IsingModel(m, e.lam), center)
            rep.kl_to_center.append(kl)
            if kl > e.rho + KL_TOLERANCE:
                v.append(f"kl-dominance: member {i} has KL {kl:.12g} > rho {e.rho:.12g}")
    return rep


def save_ensemble(e: HardEnsemble, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_graph(e.center, out / "center.edgelist")
    for i, m in enumerate(e.members):
        write_graph(m, out / f"member_{i}.edgelist")
    (out / "manifest.json").write_text(json.dumps(e.manifest(), indent=2, sort_keys=True) + "\n",
                                       encoding="utf-8")
    return out


def load_ensemble(in_dir) -> HardEnsemble:
    src = Path(in_dir)
    man = json.loads((src / "manifest.json").read_text(encoding="utf-8"))
    count = man["counts"]["members"]
    members = tuple(read_graph(src / f"member_{i}.edgelist") for i in range(count))
    return HardEnsemble(
        center=read_graph(src / "center.edgelist"),
        members=members,
        rho=float(man["rho"]),
        lam=float(man["lambda"]),
        class_tag=ClassTag(man["class_tag"]),
        kind=EnsembleKind(man["kind"]),
        params=man["params"],
        blocks=tuple(tuple(b) for b in man.get("blocks", [])),
        removed=tuple(tuple(r) for r in man.get("removed_edges", [])),
        leftover_vertices=man["counts"].get("leftover_vertices", 0),
    )


def build(class_name: str, **kw) -> HardEnsemble:
    """Dispatch on a class name such as ``"dregular"`` or ``"path-length"``."""
    builders = {
        "path-restricted": build_path_restricted,
        "path-length": build_path_length,
        "girth": build_girth,
        "dregular": build_dregular,
        "edge-bounded": build_edge_bounded,
    }
    key = class_name.lower().replace("_", "-")
    if key not in builders:
        raise ArgumentError(f"unknown class {class_name!r}; choose from {sorted(builders)}")
    return builders[key](**kw)
