from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from conftest import as_path, path_element
from theta_kit.monad import free_globular, free_value, mult, unit
from theta_kit.oracles import (
    Path, UnionFind, chain_poset, corpus, enumerate_graphs, free_2cat_rewrite,
    free_category_paths, nerve, promote, term_shape_of_shape, terminal_category,
)
from theta_kit.presheaf import (
    GlobularSet, cell_diagram, enumerate_globular_sets, finite_limit, graph, is_segal,
    one_cell_per_dim, segal_extend, validate,
)
from theta_kit.theta import POINT, Theta, enum_theta_objects_window

ARROW = graph(["a", "b"], {"f": ("a", "b")})
LOOP = graph(["v"], {"e": ("v", "v")})
GRAPHS_3 = enumerate_graphs(3, 3)
TWO_LOOPS = GlobularSet(2, (("x",), ("f",), ("a", "b")), ({}, {"f": "x"}, {"a": "f", "b": "f"}),
                        ({}, {"f": "x"}, {"a": "f", "b": "f"}), name="two-loops")
WINDOW = enum_theta_objects_window(2, (2, 2))


# -- free categories -------------------------------------------------------------------------

def test_paths_of_an_arrow():
    assert set(free_category_paths(ARROW, 3).morphisms) == {Path("a", ()), Path("b", ()), Path("a", ("f",))}


def test_paths_of_a_loop():
    assert len(free_category_paths(LOOP, 3).morphisms) == 4


def test_small_graph_counts():
    assert len(enumerate_graphs(1, 1)) == 3
    assert len(enumerate_graphs(2, 1)) == 6


@pytest.mark.parametrize("X", GRAPHS_3[::5], ids=lambda x: x.name)
def test_concatenation_is_associative_and_unital(X):
    cat = free_category_paths(X, 4)
    paths = cat.morphisms
    for p in paths:
        assert cat.concat(cat.identity(p.start), p) == p
        assert cat.concat(p, cat.identity(cat.target(p))) == p
    for p, q, r in product(paths, repeat=3):
        pq, qr = cat.concat(p, q), cat.concat(q, r)
        left = cat.concat(pq, r) if pq is not None else None
        right = cat.concat(p, qr) if qr is not None else None
        if len(p) + len(q) + len(r) <= 4 and cat.target(p) == q.start and cat.target(q) == r.start:
            assert left == right == Path(p.start, p.edges + q.edges + r.edges)


@pytest.mark.parametrize("X", GRAPHS_3, ids=lambda x: x.name)
def test_paths_are_the_free_value(X):
    cat = free_category_paths(X, 4)
    value = free_value(X, 1, 9).all()
    to_path = {e: as_path(e) for e in value}
    assert len(set(to_path.values())) == len(value)
    assert set(to_path.values()) == set(cat.morphisms)
    for e in X.cells[1]:
        assert to_path[unit(X, 1, e)] == Path(X.source[1][e], (e,))


@pytest.mark.parametrize("X", GRAPHS_3[::4], ids=lambda x: x.name)
def test_concatenation_is_the_multiplication(X):
    cat = free_category_paths(X, 4)
    TX = free_globular(X, 9)
    for p, q in product(cat.morphisms, repeat=2):
        pq = cat.concat(p, q)
        if pq is None:
            continue
        outer = path_element(TX, (Theta(0), (p.start,)), (path_element(X, p.start, p.edges),
                                                          path_element(X, q.start, q.edges)))
        assert as_path(mult(X, 1, outer)) == pq


# -- free 2-categories by rewriting ---------------------------------------------------------------

def window_counts(X) -> dict:
    return {term_shape_of_shape(J): len(finite_limit(cell_diagram(X, J))) for J in WINDOW}


def rewrite_counts(X) -> dict:
    counts = free_2cat_rewrite(X, 7).shape_counts(2)
    return {term_shape_of_shape(J): counts.get(term_shape_of_shape(J), 0) for J in WINDOW}


def test_terminal_window_has_thirteen_classes():
    X = one_cell_per_dim(2)
    counts = rewrite_counts(X)
    assert sum(counts.values()) == 13
    assert counts == window_counts(X)
    assert len(free_value(X, 2, 13, shapes=WINDOW)) == 13


@pytest.mark.parametrize("X", [TWO_LOOPS] + enumerate_globular_sets(2, 2)[::6], ids=lambda x: x.name)
def test_rewrite_counts_match_free_values(X):
    result = free_2cat_rewrite(X, 7)
    assert result.shape_consistent()
    assert rewrite_counts(X) == window_counts(X)


def test_interchange_identifies_both_readings():
    result = free_2cat_rewrite(TWO_LOOPS, 7)
    ids = result.table.ids
    a, b = ids[("g", "a")], ids[("g", "b")]
    aa, bb = ids[("c", 1, a, a)], ids[("c", 1, b, b)]
    ab = ids[("c", 0, a, b)]
    horizontal_first = ids[("c", 1, ab, ab)]
    vertical_first = ids[("c", 0, aa, bb)]
    rep = {t: r for r, members in result.classes.items() for t in members}
    assert rep[horizontal_first] == rep[vertical_first]


def test_distinct_generators_stay_apart():
    result = free_2cat_rewrite(TWO_LOOPS, 7)
    ids = result.table.ids
    rep = {t: r for r, members in result.classes.items() for t in members}
    assert rep[ids[("g", "a")]] != rep[ids[("g", "b")]]


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_classes_are_closed_under_contexts(data):
    result = free_2cat_rewrite(TWO_LOOPS, 7)
    table = result.table
    rep = {t: r for r, members in result.classes.items() for t in members}
    multi = [m for m in result.classes.values() if len(m) > 1]
    members = data.draw(st.sampled_from(multi))
    s, t = data.draw(st.sampled_from(members)), data.draw(st.sampled_from(members))
    u = data.draw(st.integers(0, len(table.terms) - 1))
    contexts = [lambda x: ("i", x)] + [lambda x, k=k: ("c", k, x, u) for k in range(2)] + \
               [lambda x, k=k: ("c", k, u, x) for k in range(2)]
    for ctx in contexts:
        left, right = table.ids.get(ctx(s)), table.ids.get(ctx(t))
        if left is not None and right is not None:
            assert rep[left] == rep[right]


def test_union_find():
    uf = UnionFind(4)
    assert uf.union(0, 2) and not uf.union(2, 0)
    uf.union(3, 2)
    assert uf.find(3) == uf.find(0) != uf.find(1)


# -- strict categories and nerves ------------------------------------------------------------------

@pytest.mark.parametrize("P", corpus(), ids=lambda p: p.name)
def test_corpus_categories_are_strict(P):
    assert P.validate() == []


def test_nerve_of_the_terminal_category_is_a_point():
    F = nerve(terminal_category(2), 7)
    assert all(len(F.value(o)) == 1 for o in F.support)


def test_nerve_of_an_arrow_is_composable_chains():
    F = nerve(chain_poset(1), 9)
    G = segal_extend(free_globular(ARROW, 9), 9)
    for m in range(5):
        obj = Theta(1, (POINT,) * m)
        assert len(F.value(obj)) == len(G.value(obj)) == m + 2


@pytest.mark.parametrize("P", corpus(), ids=lambda p: p.name)
def test_nerves_are_valid_segal_presheaves(P):
    F = nerve(P, 5)
    assert validate(F).ok
    assert is_segal(F).ok


def test_promotion_adds_identities_only():
    P = promote(chain_poset(2))
    assert P.level == 2 and len(P.cells[2]) == len(P.cells[1])
    assert all(P.source[2][x] == P.target[2][x] for x in P.cells[2])
