import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasicluster.cover import (
    CoverError,
    base_name,
    build_double_cover,
    exchange_matrix,
    exchange_matrix_rule,
    lift_name,
    lifted_seeds,
    matrix_mutation,
    orbit_mutate,
    project_pi,
    validate_cover,
)
from quasicluster.explorer import explore
from quasicluster.gluing import flip, initial_triangulation
from quasicluster.laurent import LaurentPoly
from quasicluster.seed import initial_seed, mutate, preset_seed
from quasicluster.surface import annulus, disc, moebius, rank


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_moebius_cover_is_annulus(n):
    s = moebius(n)
    C = build_double_cover(s, initial_triangulation(s))
    assert C.total_signature == annulus(n, n)
    assert validate_cover(C) == []
    assert rank(C.total_signature) == 2 * rank(s)
    assert len(C.total.arcs()) == 2 * len(C.base.arcs())


def test_m1_cover_has_two_arcs():
    C = build_double_cover(moebius(1), initial_triangulation(moebius(1)))
    assert len(C.total.arcs()) == 2


def test_deck_map():
    C = build_double_cover(moebius(3), initial_triangulation(moebius(3)))
    for a, b in C.tau.items():
        assert C.tau[b] == a and a != b
    for label, (a, b) in C.lift.items():
        assert base_name(a) == base_name(b) == label
        assert C.tau[a] == b


def test_errors():
    with pytest.raises(CoverError):
        build_double_cover(disc(5), initial_triangulation(disc(5)))
    S, _ = preset_seed(moebius(2))
    with pytest.raises(CoverError):
        build_double_cover(moebius(2), S.triangulation)


def test_m1_counterexample():
    s = moebius(1)
    T = initial_triangulation(s)
    C, bs, ts = lifted_seeds(s, T)
    rep = orbit_mutate(C, T.arcs()[0], bs, ts).report
    assert rep["mutable"] is False
    assert rep["commute"] is False
    assert rep["ok"] is False


def m2_cases():
    s = moebius(2)
    G = explore(initial_seed(initial_triangulation(s)), arcs_only=True)
    for seed in G.vertices.values():
        T = seed.triangulation
        for t in T.arcs():
            if T.is_mutable(t):
                yield T, t


def test_m2_orbit_everywhere():
    cases = list(m2_cases())
    assert cases
    for T, t in cases:
        C, bs, ts = lifted_seeds(moebius(2), T)
        rep = orbit_mutate(C, t, bs, ts).report
        assert rep["ok"], rep
        rule = exchange_matrix_rule(C, bs, t)
        assert rule["ok"], rule


def test_trivial_cover_gives_ptolemy():
    T = initial_triangulation(disc(6))
    C = build_double_cover(disc(6), T, allow_trivial=True)
    for t in T.arcs():
        rule = exchange_matrix_rule(C, initial_seed(T), t)
        assert rule["ok"]
        assert rule["rhs_matrix"] == rule["rhs_exchange"]
        assert len(rule["rhs_matrix"].split(" + ")) == 2


def test_exchange_matrix_is_skew():
    C = build_double_cover(moebius(3), initial_triangulation(moebius(3)))
    labels, B = exchange_matrix(C.total)
    assert np.array_equal(B, -B.T)
    assert np.abs(B).max() <= 2
    _, Bn = exchange_matrix(C.total, orientation=-1)
    assert np.array_equal(Bn, -B)


def test_matrix_mutation_involution():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.integers(-2, 3, size=(5, 5))
        B = np.triu(A, 1) - np.triu(A, 1).T
        for k in range(5):
            assert np.array_equal(matrix_mutation(matrix_mutation(B, k), k), B)


def test_projection_of_generators():
    s = moebius(2)
    C, bs, ts = lifted_seeds(s, initial_triangulation(s))
    for label in bs.vars:
        for sheet in (0, 1):
            assert project_pi(ts.vars[lift_name(label, sheet)], bs.registry) == bs.vars[label]


@given(st.integers(0, 2**32))
def test_projection_is_ring_map(seed):
    s = moebius(2)
    C, bs, ts = lifted_seeds(s, initial_triangulation(s))
    reg = ts.registry
    rnd = random.Random(seed)

    def rand_poly():
        width = len(reg.names)
        return LaurentPoly(reg, {tuple(rnd.randint(-2, 2) for _ in range(width)): rnd.randint(-5, 5) for _ in range(3)})

    p, q = rand_poly(), rand_poly()
    pi = lambda x: project_pi(x, bs.registry)  # noqa: E731
    assert pi(p * q) == pi(p) * pi(q)
    assert pi(p + q) == pi(p) + pi(q)


@given(st.integers(0, 2**32))
def test_random_m3_paths(seed):
    s = moebius(3)
    rnd = random.Random(seed)
    C, bs, ts = lifted_seeds(s, initial_triangulation(s))
    for _ in range(10):
        T = bs.triangulation
        t = rnd.choice(sorted(a for a in T.arcs() if T.is_mutable(a)))
        rule = exchange_matrix_rule(C, bs, t)
        assert rule["ok"] and rule["well_defined"] and rule["orientation_independent"]
        res = orbit_mutate(C, t, bs, ts)
        assert res.report["ok"], res.report
        bs, ts = res.base, res.total


def test_rule_rejects_non_mutable():
    s = moebius(2)
    for T, _ in m2_cases():
        bad = [t for t in T.arcs() if not T.is_mutable(t)]
        if bad:
            C, bs, _ = lifted_seeds(s, T)
            with pytest.raises(CoverError):
                exchange_matrix_rule(C, bs, bad[0])
            return
    pytest.fail("no triangulation of M2 with an anti-self-folded face")
