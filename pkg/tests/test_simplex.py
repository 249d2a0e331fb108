from itertools import product
from math import comb

import pytest
from hypothesis import given

from conftest import composable_simplex, simplex_maps
from theta_kit.errors import CompositionError, MalformedError
from theta_kit.simplex import (
    SimplexMap, classify_simplex, compose_simplex, edge, enum_hom_simplex, factorize_simplex,
    hom_count_simplex, identity_simplex, vertex,
)


def brute_hom(a, b):
    return [v for v in product(range(b + 1), repeat=a + 1) if all(x <= y for x, y in zip(v, v[1:]))]


def test_compose_examples():
    f = SimplexMap(1, 2, (0, 2))
    assert compose_simplex(identity_simplex(2), f) == f
    g = SimplexMap(2, 1, (0, 1, 1))
    assert compose_simplex(g, f) == SimplexMap(1, 1, (0, 1))


def test_compose_rejects_mismatch():
    with pytest.raises(CompositionError):
        compose_simplex(identity_simplex(3), identity_simplex(2))


def test_malformed_values_rejected():
    with pytest.raises(MalformedError):
        SimplexMap(1, 2, (2, 1))
    with pytest.raises(MalformedError):
        SimplexMap(1, 2, (0, 3))


def test_composites_are_monotone_exhaustively():
    for a, b, c in product(range(5), repeat=3):
        for f in enum_hom_simplex(a, b):
            for g in enum_hom_simplex(b, c):
                h = compose_simplex(g, f)
                assert h.values == tuple(g(f(i)) for i in range(a + 1))


@pytest.mark.parametrize("values, tgt, inert, active", [
    ((1, 2), 2, True, False),
    ((0, 2), 2, False, True),
    ((0, 0, 1), 1, False, True),
    ((0, 1), 1, True, True),
])
def test_classify_examples(values, tgt, inert, active):
    kind = classify_simplex(SimplexMap(len(values) - 1, tgt, values))
    assert (kind.inert, kind.active) == (inert, active)


def test_factorize_degenerate_edge():
    active, inert = factorize_simplex(SimplexMap(1, 2, (1, 1)))
    assert active == SimplexMap(1, 0, (0, 0))
    assert inert == SimplexMap(0, 2, (1,))


def test_factorization_unique_by_search():
    for a, b in product(range(6), repeat=2):
        found = {}
        for mid in range(b + 1):
            actives = [g for g in enum_hom_simplex(a, mid) if classify_simplex(g).active]
            inerts = [g for g in enum_hom_simplex(mid, b) if classify_simplex(g).inert]
            for act in actives:
                for ine in inerts:
                    found.setdefault(compose_simplex(ine, act), []).append((act, ine))
        for f in enum_hom_simplex(a, b):
            assert found[f] == [factorize_simplex(f)]


@pytest.mark.parametrize("a, b, count", [(0, 0, 1), (1, 1, 3), (2, 1, 4)])
def test_hom_examples(a, b, count):
    assert len(enum_hom_simplex(a, b)) == count


def test_hom_counts_match_binomial_and_listing():
    for a, b in product(range(7), repeat=2):
        listed = enum_hom_simplex(a, b)
        assert len(listed) == hom_count_simplex(a, b) == comb(a + b + 1, a + 1)
        assert sorted(f.values for f in listed) == brute_hom(a, b)


def test_vertex_and_edge_maps():
    assert vertex(3, 2) == SimplexMap(0, 3, (2,))
    assert edge(3, 2) == SimplexMap(1, 3, (1, 2))


@given(composable_simplex())
def test_composition_associative(chain):
    f, g, h = chain
    assert compose_simplex(h, compose_simplex(g, f)) == compose_simplex(compose_simplex(h, g), f)


@given(simplex_maps())
def test_units(f):
    assert compose_simplex(identity_simplex(f.tgt), f) == f
    assert compose_simplex(f, identity_simplex(f.src)) == f


@given(composable_simplex(length=2))
def test_classes_closed_under_composition(chain):
    f, g = chain
    h = classify_simplex(compose_simplex(g, f))
    kf, kg = classify_simplex(f), classify_simplex(g)
    if kf.inert and kg.inert:
        assert h.inert
    if kf.active and kg.active:
        assert h.active


@given(simplex_maps())
def test_inert_and_active_means_identity(f):
    k = classify_simplex(f)
    assert (k.inert and k.active) == (f == identity_simplex(f.src) and f.src == f.tgt)


@given(simplex_maps())
def test_factorization_recomposes(f):
    active, inert = factorize_simplex(f)
    assert classify_simplex(active).active and classify_simplex(inert).inert
    assert compose_simplex(inert, active) == f


@given(simplex_maps())
def test_json_roundtrip(f):
    assert SimplexMap.from_json(f.to_json()) == f
