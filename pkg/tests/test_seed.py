import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from quasicluster.gluing import initial_triangulation
from quasicluster.laurent import NonExactDivision, parse
from quasicluster.seed import (
    Namer,
    Seed,
    cluster_key,
    exchange_rhs,
    initial_seed,
    mutate,
    preset_seed,
)
from quasicluster.surface import annulus, disc, moebius

TOP = "1*c_a^-1*d^2*y*z + 1*c_a^-1*y^2 + 2*c_a^-1*y*z + 1*c_a^-1*z^2"


@pytest.fixture
def m2():
    S, namer = preset_seed(moebius(2))
    return S, namer


def test_initial_seeds():
    S = initial_seed(initial_triangulation(disc(4)))
    assert len(S.vars) == 1 and len(S.boundary_vars) == 4
    assert all(S.vars[t] == S.registry.gen(t) for t in S.vars)
    S = initial_seed(initial_triangulation(moebius(1)))
    assert len(S.vars) == 1 and len(S.boundary_vars) == 1


def test_m2_preset(m2):
    S, _ = m2
    assert set(S.vars) == {"c_a", "d"}
    assert set(S.boundary_vars) == {"y", "z"}
    assert S.vars["c_a"].serialize() == "1*c_a"


def test_m2_golden_chain(m2):
    S, namer = m2
    S1 = mutate(S, "c_a", namer=namer)
    assert S1.vars["c_b"].serialize() == TOP
    S2 = mutate(S1, "d", namer=namer)
    b = parse("1*c_a^-1*d*y*z + 1*c_a^-1*d^-1*y^2 + 2*c_a^-1*d^-1*y*z + 1*c_a^-1*d^-1*z^2", S.registry)
    assert S2.vars["b"] == b
    assert S2.trace == ("c_a", "d")


def test_m2_case_two_returns_d(m2):
    S, namer = m2
    # reach {a, c_a}: flipping the one-sided curve d gives the arc a = c_a / d
    S1 = mutate(S, "d", namer=namer)
    assert S1.vars["a"] == parse("1*c_a*d^-1", S.registry)
    S2 = mutate(S1, "a", namer=namer)
    assert S2.vars["d"] == S.registry.gen("d")
    assert S2.key == S.key


def test_non_exact_division_propagates(m2):
    S, _ = m2
    broken = Seed(S.triangulation, {**S.vars, "c_a": S.vars["c_a"] + S.vars["d"]}, S.boundary_vars)
    with pytest.raises(NonExactDivision):
        mutate(broken, "c_a")


def test_six_distinct_keys(m2):
    S, namer = m2
    keys, todo = {S.key}, [S]
    while todo:
        cur = todo.pop()
        for t in cur.vars:
            nxt = mutate(cur, t, namer=namer)
            if nxt.key not in keys:
                keys.add(nxt.key)
                todo.append(nxt)
    assert len(keys) == 6


def test_key_independent_of_labels(m2):
    S, namer = m2
    a = mutate(mutate(S, "c_a", namer=namer), "d", namer=namer)
    b = mutate(mutate(S, "c_a", label="zz1"), "d", label="zz2")
    assert cluster_key(a) == cluster_key(b)
    assert set(a.vars) != set(b.vars)


def test_seed_json_roundtrip(m2):
    S, namer = m2
    S1 = mutate(S, "c_a", namer=namer)
    T = Seed.from_dict(S1.to_dict(), S.registry)
    assert T.vars == S1.vars and T.key == S1.key and T.trace == S1.trace


def test_namer_skips_used_labels(m2):
    S, _ = m2
    n = Namer({"c_a": S.vars["c_a"]})
    assert n(S.vars["c_a"], S.triangulation) is None


SURFACES = [disc(5), disc(7), moebius(1), moebius(2), moebius(3), moebius(4), annulus(1, 1), annulus(1, 2)]


@given(st.sampled_from(SURFACES), st.integers(0, 2**32))
def test_random_walk_properties(s, rng_seed):
    rnd = random.Random(rng_seed)
    S = initial_seed(initial_triangulation(s))
    for _ in range(12):
        t = rnd.choice(sorted(S.vars))
        S2 = mutate(S, t)
        (t2,) = set(S2.vars) - set(S.vars)
        # involution on variables
        back = mutate(S2, t2, label=t)
        assert back.vars == S.vars
        # the relation reads the same from both sides
        assert S.vars[t] * S2.vars[t2] == exchange_rhs(S, t) == exchange_rhs(S2, t2)
        assert all(c > 0 for p in S2.vars.values() for c in p.terms.values())
        S = S2
