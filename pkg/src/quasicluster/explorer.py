"""Breadth-first enumeration of quasi-exchange graphs and related checks."""

from __future__ import annotations

import hashlib
import json
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from math import lcm
from typing import Callable, Optional

from . import __version__
from .gluing import AntiSelfToCurve, Kind, canonical_label, classify_flip
from .laurent import LaurentPoly, VarRegistry, eval_exact, parse
from .seed import ClusterKey, Seed, cluster_key, initial_seed, mutate
from .surface import SurfaceSignature, count_quasi_arcs_closed_form, rank

__all__ = [
    "ExchangeGraph",
    "BudgetExceeded",
    "explore",
    "verify_structure",
    "expansions_in",
    "monomial_rank_check",
    "export",
    "import_graph",
    "short_hash",
    "exact_rank",
]

DEFAULT_MAX_SEEDS = 100_000


class BudgetExceeded(RuntimeError):
    def __init__(self, graph: "ExchangeGraph"):
        super().__init__(f"seed budget of {graph.stats.get('max_seeds')} exceeded")
        self.graph = graph


@dataclass
class ExchangeGraph:
    vertices: dict[ClusterKey, Seed]
    edges: list[tuple[ClusterKey, ClusterKey, str]]
    catalogue: dict[str, LaurentPoly]
    stats: dict = field(default_factory=dict)
    arcs_only: bool = False
    partial: bool = False
    labels: dict[ClusterKey, bytes] = field(default_factory=dict, repr=False)
    registry: Optional[VarRegistry] = None

    def neighbours(self, key: ClusterKey) -> list[tuple[str, ClusterKey]]:
        return sorted((t, k2) for k1, k2, t in self.edges if k1 == key)

    def degrees(self) -> dict[ClusterKey, int]:
        deg = {k: 0 for k in self.vertices}
        for k1, _, _ in self.edges:
            deg[k1] += 1
        return deg

    def undirected_edges(self) -> list[tuple[ClusterKey, ClusterKey, str]]:
        return sorted((a, b, t) for a, b, t in self.edges if a < b)


def _allowed(seed: Seed, arcs_only: bool) -> list[str]:
    T = seed.triangulation
    out = []
    for t in sorted(seed.vars, key=lambda l: seed.vars[l].serialize()):
        if arcs_only and isinstance(classify_flip(T, t), AntiSelfToCurve):
            continue
        out.append(t)
    return out


def _to_arcs(seed: Seed, namer) -> Seed:
    for t in sorted(seed.triangulation.one_sided()):
        seed = mutate(seed, t, namer=namer)
    return seed


def explore(
    S0: Seed,
    max_seeds: int = DEFAULT_MAX_SEEDS,
    arcs_only: bool = False,
    namer: Optional[Callable] = None,
    threads: int = 1,
    cross_check: bool = True,
    reuse_reverse: bool = True,
) -> ExchangeGraph:
    """Enumerate every seed reachable from S0, deduplicated by cluster key.

    Raises BudgetExceeded (carrying the partial graph) when more than
    ``max_seeds`` distinct seeds would be needed.
    """
    if max_seeds < 1:
        raise ValueError("max_seeds must be at least 1")
    if arcs_only:
        S0 = _to_arcs(S0, namer)
    k0 = S0.key
    vertices = {k0: S0}
    labels = {k0: canonical_label(S0.triangulation)} if cross_check else {}
    edges: list[tuple[ClusterKey, ClusterKey, str]] = []
    known: dict[ClusterKey, dict[str, ClusterKey]] = {}
    stats = Counter()
    frontier = [k0]
    pool = ThreadPoolExecutor(threads) if threads > 1 else None

    def expand(key):
        seed = vertices[key]
        done = known.get(key, {})
        out = []
        for t in _allowed(seed, arcs_only):
            text = seed.vars[t].serialize()
            if reuse_reverse and text in done:
                out.append((t, None, done[text]))
            else:
                out.append((t, mutate(seed, t, namer=namer), None))
        return key, out

    def graph(partial: bool) -> ExchangeGraph:
        cat = {}
        for s in vertices.values():
            for p in s.vars.values():
                cat.setdefault(p.serialize(), p)
        cat = dict(sorted(cat.items()))
        st = dict(stats)
        st.update(
            vertices=len(vertices),
            edges=len({frozenset((a, b)) for a, b, _ in edges}),
            variables=len(cat),
            positive=all(c > 0 for p in cat.values() for c in p.terms.values()),
            max_seeds=max_seeds,
        )
        return ExchangeGraph(
            dict(sorted(vertices.items())),
            sorted(edges),
            cat,
            st,
            arcs_only=arcs_only,
            partial=partial,
            labels=labels,
            registry=S0.registry,
        )

    try:
        while frontier:
            frontier.sort()
            # expand the whole level before merging so that the reverse-edge
            # cache looks the same whatever the scheduling
            jobs = list(pool.map(expand, frontier) if pool else map(expand, frontier))
            nxt = []
            for key, results in jobs:
                for t, child, target in results:
                    if child is None:
                        edges.append((key, target, t))
                        stats["reused_edges"] += 1
                        continue
                    k2 = child.key
                    new_label = next(l for l in child.vars if l not in vertices[key].vars)
                    if k2 not in vertices:
                        if len(vertices) >= max_seeds:
                            edges_partial = graph(True)
                            raise BudgetExceeded(edges_partial)
                        vertices[k2] = child
                        if cross_check:
                            labels[k2] = canonical_label(child.triangulation)
                        nxt.append(k2)
                    elif cross_check:
                        lab = canonical_label(child.triangulation)
                        if lab != labels[k2]:
                            stats["key_collisions"] += 1
                    edges.append((key, k2, t))
                    known.setdefault(k2, {})[child.vars[new_label].serialize()] = key
            frontier = nxt
    finally:
        if pool:
            pool.shutdown()
    stats.setdefault("key_collisions", 0)
    stats.setdefault("reused_edges", 0)
    return graph(False)


# ---- structure --------------------------------------------------------------


def verify_structure(G: ExchangeGraph, s: SurfaceSignature) -> dict:
    n = rank(s)
    deg = G.degrees()
    hist = Counter(deg.values())
    failures = []
    report = {
        "vertices": len(G.vertices),
        "edges": len(G.undirected_edges()),
        "variables": len(G.catalogue),
        "rank": n,
        "degrees": {str(k): v for k, v in sorted(hist.items())},
        "regular": len(hist) == 1,
        "degree": next(iter(hist)) if len(hist) == 1 else None,
        "partial": G.partial,
    }
    by_vertex: dict[ClusterKey, list[ClusterKey]] = {k: [] for k in G.vertices}
    for a, b, _ in G.edges:
        by_vertex[a].append(b)
    for k, nb in by_vertex.items():
        if k in nb:
            failures.append(f"self-loop at {short_hash(k)}")
        if len(set(nb)) != len(nb):
            failures.append(f"repeated neighbour at {short_hash(k)}")
    edge_set = {(a, b) for a, b, _ in G.edges}
    if any((b, a) not in edge_set for a, b in edge_set):
        failures.append("edge set is not symmetric")
    if not G.arcs_only:
        if not (report["regular"] and report["degree"] == n):
            failures.append(f"quasi-exchange graph is not {n}-regular")
    else:
        drops = 0
        for k, seed in G.vertices.items():
            want = n - len(seed.triangulation.anti_self_folded_inner())
            if deg[k] != want:
                failures.append(f"degree {deg[k]} at {short_hash(k)}, expected {want}")
            drops += want < n
        report["degree_drops"] = drops
        if not s.orientable and drops == 0:
            failures.append("no degree drop found on a non-orientable surface")
        if s.orientable and not (report["regular"] and report["degree"] == n):
            failures.append(f"exchange graph is not {n}-regular")
    closed = count_quasi_arcs_closed_form(s)
    report["closed_form"] = list(closed) if closed else None
    if closed and not G.partial:
        want = closed[1] if G.arcs_only else closed[0]
        report["catalogue_matches_closed_form"] = len(G.catalogue) == want
        if len(G.catalogue) != want:
            failures.append(f"catalogue has {len(G.catalogue)} variables, closed form gives {want}")
    else:
        report["catalogue_matches_closed_form"] = None
    if G.stats.get("key_collisions"):
        failures.append(f"{G.stats['key_collisions']} cluster-key collisions")
    report["positive"] = bool(G.stats.get("positive", True))
    report["failures"] = failures
    return report


# ---- re-expansion -------------------------------------------------------------


def expansions_in(G: ExchangeGraph, target_key: ClusterKey) -> dict[str, LaurentPoly]:
    """Express every catalogue variable in the quasi-cluster ``target_key``.

    Keys of the result are the catalogue serializations; values live in a
    registry whose generators are the target's element labels and boundary
    segments.
    """
    if target_key not in G.vertices:
        raise KeyError("target seed is not a vertex of the graph")
    start = G.vertices[target_key]
    fresh = initial_seed(start.triangulation)
    out: dict[str, LaurentPoly] = {}
    for label, p in start.vars.items():
        out[p.serialize()] = fresh.vars[label]
    seen = {target_key}
    frontier = [(start, fresh)]
    while frontier:
        nxt = []
        for old, new in sorted(frontier, key=lambda pair: pair[0].key):
            for t in _allowed(old, G.arcs_only):
                o2 = mutate(old, t)
                label = [l for l in o2.vars if l not in old.vars][0]
                if o2.key in seen:
                    continue
                n2 = mutate(new, t, label=label)
                seen.add(o2.key)
                out.setdefault(o2.vars[label].serialize(), n2.vars[label])
                nxt.append((o2, n2))
        frontier = nxt
    missing = set(G.catalogue) - set(out)
    if missing:
        raise RuntimeError(f"{len(missing)} catalogue variables were not re-expanded")
    return dict(sorted(out.items()))


# ---- linear independence --------------------------------------------------------


def exact_rank(rows: list[list[int]]) -> int:
    """Rank of an integer matrix by fraction-free (Bareiss) elimination."""
    M = [list(r) for r in rows]
    if not M:
        return 0
    nrows, ncols = len(M), len(M[0])
    r, prev = 0, 1
    for c in range(ncols):
        piv = next((i for i in range(r, nrows) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        p = M[r][c]
        for i in range(r + 1, nrows):
            a = M[i][c]
            row_i, row_r = M[i], M[r]
            for j in range(c + 1, ncols):
                row_i[j] = (row_i[j] * p - a * row_r[j]) // prev
            row_i[c] = 0
        prev = p
        r += 1
        if r == nrows:
            break
    return r


def enumerate_monomials(G: ExchangeGraph, max_degree: int) -> list[tuple[tuple[str, int], ...]]:
    """Quasi-cluster monomials of total degree at most ``max_degree``."""
    seen = set()
    for seed in G.vertices.values():
        cluster = sorted(p.serialize() for p in seed.vars.values())
        for deg in range(max_degree + 1):
            for combo in combinations_with_replacement(cluster, deg):
                seen.add(tuple(sorted(Counter(combo).items())))
    return sorted(seen, key=lambda m: (sum(e for _, e in m), m))


def monomial_rank_check(
    G: ExchangeGraph,
    max_degree: int,
    trials: int | None = None,
    rng_seed: int = 0,
    oversample: int = 3,
    duplicate: bool = False,
) -> dict:
    """Random-evaluation test that quasi-cluster monomials are independent.

    With ``duplicate`` a copy of one column is appended; the check must then
    report a rank deficiency.
    """
    if G.partial:
        raise ValueError("rank check needs a complete exploration")
    monos = enumerate_monomials(G, max_degree)
    columns = list(monos)
    if duplicate and columns:
        columns.append(columns[len(columns) // 2])
    n = len(columns)
    trials = trials if trials is not None else oversample * n
    rng = random.Random(rng_seed)
    reg = G.registry
    rows = []
    for _ in range(trials):
        point = {name: Fraction(rng.randint(1, 997), rng.randint(1, 997)) for name in reg.names}
        val = {text: eval_exact(p, point) for text, p in G.catalogue.items()}
        row = []
        for mono in columns:
            v = Fraction(1)
            for text, e in mono:
                v *= val[text] ** e
            row.append(v)
        scale = lcm(*(x.denominator for x in row))
        rows.append([int(x * scale) for x in row])
    r = exact_rank(rows)
    return {
        "max_degree": max_degree,
        "monomials": len(monos),
        "columns": n,
        "trials": trials,
        "rank": r,
        "full_rank": r == n,
        "duplicate_injected": duplicate,
        "rng_seed": rng_seed,
    }


# ---- export -------------------------------------------------------------------


def short_hash(key: ClusterKey) -> str:
    return hashlib.sha1("\n".join(key).encode()).hexdigest()[:10]


def export(G: ExchangeGraph, fmt: str = "json", seeds: bool = False) -> bytes:
    if fmt == "dot":
        lines = ["graph exchange {"]
        lines.append(f'  label="quasicluster {__version__}{" partial" if G.partial else ""}";')
        for k in G.vertices:
            lines.append(f'  "{short_hash(k)}";')
        for a, b, t in G.undirected_edges():
            lines.append(f'  "{short_hash(a)}" -- "{short_hash(b)}" [label="{t}"];')
        lines.append("}")
        return ("\n".join(lines) + "\n").encode()
    if fmt != "json":
        raise ValueError(f"unsupported graph format {fmt!r}")
    keys = list(G.vertices)
    index = {k: i for i, k in enumerate(keys)}
    verts = []
    for k in keys:
        entry = {"id": short_hash(k), "key": list(k)}
        if seeds:
            entry["seed"] = G.vertices[k].to_dict()
        verts.append(entry)
    doc = {
        "version": __version__,
        "partial": G.partial,
        "arcs_only": G.arcs_only,
        "registry": list(G.registry.names),
        "vertices": verts,
        "edges": [[index[a], index[b], t] for a, b, t in G.edges if b in index],
        "catalogue": list(G.catalogue),
        "stats": {k: G.stats[k] for k in sorted(G.stats)},
    }
    return (json.dumps(doc, sort_keys=True, indent=1) + "\n").encode()


def import_graph(data: bytes | str) -> ExchangeGraph:
    doc = json.loads(data)
    reg = VarRegistry(doc["registry"])
    keys = [tuple(v["key"]) for v in doc["vertices"]]
    vertices = {}
    for k, v in zip(keys, doc["vertices"]):
        if "seed" in v:
            vertices[k] = Seed.from_dict(v["seed"], reg)
        else:
            vertices[k] = None
    edges = sorted((keys[a], keys[b], t) for a, b, t in doc["edges"])
    catalogue = {text: parse(text, reg) for text in doc["catalogue"]}
    return ExchangeGraph(
        vertices,
        edges,
        catalogue,
        dict(doc["stats"]),
        arcs_only=doc["arcs_only"],
        partial=doc["partial"],
        registry=reg,
    )
