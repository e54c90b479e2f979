import json
from fractions import Fraction
import random

import pytest

from quasicluster.explorer import (
    BudgetExceeded,
    exact_rank,
    expansions_in,
    explore,
    export,
    import_graph,
    monomial_rank_check,
    verify_structure,
)
from quasicluster.gluing import initial_triangulation
from quasicluster.laurent import eval_exact
from quasicluster.seed import initial_seed, mutate, preset_seed
from quasicluster.surface import annulus, count_quasi_arcs_closed_form, disc, moebius


def graph(s, arcs_only=False, **kw):
    S, namer = preset_seed(s)
    return explore(S, namer=namer, arcs_only=arcs_only, **kw)


def test_m2_quasi():
    G = graph(moebius(2))
    r = verify_structure(G, moebius(2))
    assert (r["vertices"], r["edges"], r["variables"]) == (6, 6, 6)
    assert r["regular"] and r["degree"] == 2 and not r["failures"]


def test_m2_arcs_only_not_regular():
    G = graph(moebius(2), arcs_only=True)
    r = verify_structure(G, moebius(2))
    assert not r["regular"]
    assert r["degrees"] == {"1": 2, "2": 2}
    assert not r["failures"]


def test_m3_counts():
    assert len(graph(moebius(3)).vertices) == 22
    assert len(graph(moebius(3)).catalogue) == 13
    assert len(graph(moebius(3), arcs_only=True).vertices) == 16


def test_disc_six():
    G = graph(disc(6))
    r = verify_structure(G, disc(6))
    assert r["vertices"] == 14 and r["regular"] and r["degree"] == 3


@pytest.mark.parametrize("n", range(1, 5))
def test_arcs_catalogue_drops_one_curve(n):
    q, a = graph(moebius(n)), graph(moebius(n), arcs_only=True)
    assert set(a.catalogue) < set(q.catalogue)
    assert len(q.catalogue) - len(a.catalogue) == 1
    assert (len(q.catalogue), len(a.catalogue)) == count_quasi_arcs_closed_form(moebius(n))


def test_edges_are_mutations():
    G = graph(moebius(3))
    for k1, k2, t in G.edges:
        assert mutate(G.vertices[k1], t).key == k2


def test_budget():
    with pytest.raises(BudgetExceeded) as err:
        graph(annulus(1, 1), max_seeds=40)
    G = err.value.graph
    assert G.partial and len(G.vertices) == 40
    assert json.loads(export(G))["partial"] is True
    with pytest.raises(ValueError):
        graph(moebius(2), max_seeds=0)


def test_expansions_at_initial_seed_are_generators():
    S, namer = preset_seed(moebius(2))
    G = explore(S, namer=namer)
    ex = expansions_in(G, S.key)
    for label, p in S.vars.items():
        assert ex[p.serialize()].serialize() == p.serialize()


def test_expansions_consistent_between_targets():
    G = graph(moebius(3))
    keys = list(G.vertices)
    rnd = random.Random(5)
    point = {n: Fraction(rnd.randint(1, 50), rnd.randint(1, 50)) for n in G.registry.names}
    truth = {text: eval_exact(p, point) for text, p in G.catalogue.items()}
    for key in (keys[3], keys[-1]):
        B = G.vertices[key]
        ex = expansions_in(G, key)
        values = {**{l: eval_exact(p, point) for l, p in B.vars.items()}, **{b: point[b] for b in B.boundary_vars}}
        for text, p in ex.items():
            assert eval_exact(p, values) == truth[text]


def test_export_roundtrip_and_dot():
    G = graph(moebius(2))
    dot = export(G, "dot").decode()
    assert dot.count(" -- ") == 6
    assert dot.count(";") - dot.count(" -- ") - 1 == 6  # node lines plus the label line
    H = import_graph(export(G, seeds=True))
    assert list(H.vertices) == list(G.vertices)
    assert set(H.catalogue) == set(G.catalogue)
    with pytest.raises(ValueError):
        export(G, "svg")


def test_thread_count_does_not_change_output():
    a = export(graph(moebius(4), threads=1), seeds=True)
    b = export(graph(moebius(4), threads=4), seeds=True)
    assert a == b


def test_exact_rank():
    assert exact_rank([[1, 2], [2, 4]]) == 1
    assert exact_rank([[0, 0], [0, 0]]) == 0
    assert exact_rank([[1, 2, 3], [4, 5, 6], [7, 8, 10]]) == 3
    assert exact_rank([]) == 0


def test_rank_check_m2_degree_one():
    r = monomial_rank_check(graph(moebius(2)), 1, rng_seed=3)
    # the constant, six variables, and no mixed monomial of degree 1
    assert r["monomials"] == 7 and r["full_rank"]


def test_rank_check_disc4():
    r = monomial_rank_check(graph(disc(4)), 2, rng_seed=3)
    assert r["monomials"] == 5 and r["full_rank"]


def test_rank_check_duplicate_is_caught():
    r = monomial_rank_check(graph(moebius(2)), 2, rng_seed=3, duplicate=True)
    assert not r["full_rank"] and r["rank"] == r["columns"] - 1


def test_rank_check_rejects_partial():
    with pytest.raises(BudgetExceeded) as err:
        graph(annulus(1, 1), max_seeds=5)
    with pytest.raises(ValueError):
        monomial_rank_check(err.value.graph, 1)
