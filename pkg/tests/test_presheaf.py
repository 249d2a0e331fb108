from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from theta_kit.errors import SupportError
from theta_kit.globular import active_fiber, gamma_embed
from theta_kit.oracles import free_category_paths
from theta_kit.presheaf import (
    Diagram, FinPresheaf, Functor, GlobularCategory, GlobularSet, ProductCategory,
    SimplexCategory, ThetaCategory, cell_diagram, constant_presheaf, enumerate_globular_sets,
    finite_limit, graph, is_reduced, is_segal, left_kan_inert, one_cell_per_dim,
    pullback_of_coproducts, representable, restrict_along, segal_extend, validate,
)
from theta_kit.simplex import enum_hom_simplex
from theta_kit.theta import (
    POINT, Theta, act_out, enum_active_hom, enum_theta_hom, enum_theta_objects, functor_iota, globe,
)


def interval(m: int) -> Theta:
    return Theta(1, (POINT,) * m)


LOOP = graph(["v"], {"e": ("v", "v")})
ARROW = graph(["a", "b"], {"f": ("a", "b")})
TWO_PATHS = graph(["a", "b", "c"], {"f": ("a", "b"), "g": ("b", "c"), "h": ("a", "c")})
SETS_2 = enumerate_globular_sets(2, 2)


# -- validation and restriction ----------------------------------------------------------

def test_constant_presheaf_is_valid():
    F = constant_presheaf(ThetaCategory(2, 5), ["*"])
    assert validate(F).ok


def test_representable_is_valid():
    idx = ThetaCategory(2, 5)
    for J in idx.objects():
        assert validate(representable(idx, J)).ok


def test_corrupted_composition_is_flagged():
    idx = SimplexCategory(2)
    F = representable(idx, 2).materialize()
    maps = {f: dict(F.act(f)) for f in idx.arrows()}
    [d0] = [f for f in enum_hom_simplex(1, 2) if f.values == (1, 2)]
    table = maps[d0]
    x = next(iter(table))
    others = [y for y in F.value(1) if y != table[x]]
    table[x] = others[0]
    broken = FinPresheaf.from_tables(idx, idx.objects(), {o: F.value(o) for o in idx.objects()}, maps)
    report = validate(broken)
    assert not report.ok
    assert {v["kind"] for v in report.violations} == {"composition"}


def test_unsupported_value_raises():
    F = constant_presheaf(ThetaCategory(2, 3), ["*"])
    with pytest.raises(SupportError):
        F.value(globe(2, 2))


def test_restrict_along_identity():
    idx = ThetaCategory(2, 5)
    F = representable(idx, globe(2, 2))
    ident = Functor(idx, idx, lambda a: a, lambda f: f, "id")
    G = restrict_along(ident, F)
    for f in idx.arrows():
        assert G.act(f) == F.act(f)


def test_restrict_along_gamma_gives_cell_values():
    theta = ThetaCategory(2, 5, inert_only=True)
    F = representable(theta, Theta(2, (globe(1, 1), Theta(1))))
    gamma = Functor(GlobularCategory(2), theta, lambda k: globe(k, 2), lambda g: gamma_embed(g, 2), "gamma")
    G = restrict_along(gamma, F)
    assert validate(G).ok
    assert [len(G.value(k)) for k in range(3)] == [3, 3, 1]


def test_restrict_representable_along_iota():
    low, high = ThetaCategory(1, 7), ThetaCategory(2, 7)
    iota = Functor(low, high, functor_iota, functor_iota, "iota")
    for J in low.objects():
        G = restrict_along(iota, representable(high, functor_iota(J)))
        for I in low.objects():
            assert set(G.value(I)) == {functor_iota(x) for x in enum_theta_hom(I, J)}


def test_restrict_rejects_uncovered_support():
    theta = ThetaCategory(2, 3)
    gamma = Functor(GlobularCategory(2), theta, lambda k: globe(k, 2), lambda g: gamma_embed(g, 2))
    with pytest.raises(SupportError):
        restrict_along(gamma, constant_presheaf(theta, ["*"]), support=[0, 1, 2])


# -- finite limits ---------------------------------------------------------------------

def test_limit_of_a_point_diagram():
    assert len(finite_limit(Diagram(("x",), {"x": (1, 2, 3)}, []))) == 3


def test_empty_limit_is_a_point():
    assert finite_limit(Diagram((), {}, [])).families == ((),)


def test_pullback_over_a_point():
    d = Diagram(("a", "b", "u"), {"a": (0, 1), "b": (0, 1), "u": ("*",)},
                [("a", "u", {0: "*", 1: "*"}), ("b", "u", {0: "*", 1: "*"})])
    assert len(finite_limit(d)) == 4


def test_cell_limit_of_representable():
    idx = ThetaCategory(2, 5)
    C2 = globe(2, 2)
    F = representable(idx, C2)
    assert len(finite_limit(cell_diagram(F, C2))) == len(enum_theta_hom(C2, C2))


@st.composite
def random_diagrams(draw):
    n = draw(st.integers(1, 4))
    sets = {i: tuple(range(draw(st.integers(0, 3)))) for i in range(n)}
    edges = []
    for s in range(n):
        for t in range(s + 1, n):
            if sets[t] and draw(st.booleans()):
                edges.append((s, t, {x: draw(st.sampled_from(sets[t])) for x in sets[s]}))
    return Diagram(tuple(range(n)), sets, edges)


@given(random_diagrams())
def test_limit_matches_brute_force(d):
    brute = {fam for fam in product(*(d.sets[n] for n in d.nodes))
             if all(m[fam[s]] == fam[t] for s, t, m in d.edges)}
    found = finite_limit(d).families
    assert len(found) == len(set(found)) and set(found) == brute


@st.composite
def coproduct_data(draw):
    B = list(range(draw(st.integers(1, 3))))
    U = {b: list(range(draw(st.integers(1, 2)))) for b in B}
    A = list(range(draw(st.integers(0, 3))))
    C = list(range(draw(st.integers(0, 3))))
    f = {a: draw(st.sampled_from(B)) for a in A}
    g = {c: draw(st.sampled_from(B)) for c in C}
    X = {a: list(range(draw(st.integers(0, 2)))) for a in A}
    Y = {c: list(range(draw(st.integers(0, 2)))) for c in C}
    phi = {a: {x: draw(st.sampled_from(U[f[a]])) for x in X[a]} for a in A}
    psi = {c: {y: draw(st.sampled_from(U[g[c]])) for y in Y[c]} for c in C}
    return f, g, X, Y, phi, psi


@given(coproduct_data())
def test_pullbacks_distribute_over_coproducts(data):
    assert pullback_of_coproducts(*data)


# -- Segal extension -------------------------------------------------------------------

def test_extension_of_the_point_is_a_point():
    point = GlobularSet(2, (("*",), ("*",), ("*",)), ({}, {"*": "*"}, {"*": "*"}),
                        ({}, {"*": "*"}, {"*": "*"}))
    F = segal_extend(point, 7)
    assert all(len(F.value(obj)) == 1 for obj in F.support)


def test_extension_at_two_is_composable_pairs():
    F = segal_extend(TWO_PATHS, 5)
    pairs = [(e1, e2) for e1 in TWO_PATHS.cells[1] for e2 in TWO_PATHS.cells[1]
             if TWO_PATHS.target[1][e1] == TWO_PATHS.source[1][e2]]
    assert len(F.value(interval(2))) == len(pairs) == 1


@pytest.mark.parametrize("g", [LOOP, ARROW, TWO_PATHS], ids=["loop", "arrow", "two-paths"])
def test_extension_matches_paths(g):
    F = segal_extend(g, 7)
    paths = free_category_paths(g, 3).morphisms
    for m in range(4):
        assert len(F.value(interval(m))) == sum(1 for p in paths if len(p) == m)


@pytest.mark.parametrize("X", SETS_2[::7], ids=lambda x: x.name)
def test_extension_restricts_back(X):
    F = segal_extend(X, 5)
    assert validate(F).ok
    for k in range(3):
        assert sorted(fam[-1] for fam in F.value(globe(k, 2))) == sorted(X.cells[k])


# -- Segal and reduced checks -------------------------------------------------------------

@pytest.mark.parametrize("X", SETS_2[::5], ids=lambda x: x.name)
def test_extension_is_segal(X):
    assert is_segal(segal_extend(X, 7)).ok


def test_representables_are_segal():
    idx = ThetaCategory(2, 5)
    for J in idx.objects():
        assert is_segal(representable(idx, J)).ok


def test_corrupted_value_fails_where_corrupted():
    idx = ThetaCategory(2, 5)
    F = representable(idx, globe(2, 2)).materialize()
    bad = Theta(2, (Theta(1), Theta(1)))
    sets = {o: F.value(o) for o in idx.objects()}
    maps = {f: dict(F.act(f)) for f in idx.arrows()}
    extra = "extra"
    sets[bad] = sets[bad] + (extra,)
    for f in idx.arrows():
        if f.tgt == bad:
            maps[f][extra] = maps[f][sets[bad][0]]
    report = is_segal(FinPresheaf.from_tables(idx, idx.objects(), sets, maps), check_active=False)
    assert not report.ok
    assert {x["object"] for x in report.failures} == {repr(bad)}


def test_theta_presheaves_are_reduced():
    report = is_reduced(representable(ThetaCategory(2, 5), globe(1, 2)))
    assert report.ok and report.checked == 0


def test_constant_on_product_is_reduced():
    idx = ProductCategory([SimplexCategory(1), SimplexCategory(1)])
    assert is_reduced(constant_presheaf(idx, ["a", "b"])).ok


def test_non_constant_zero_slice_is_flagged():
    idx = ProductCategory([SimplexCategory(1), SimplexCategory(1)])

    def value(obj):
        return ("a", "b") if obj[1] == 1 else ("a",)

    def action(f):
        # the second coordinate acts through the retraction onto "a" unless it is an identity
        keep = f[1] == idx.factors[1].identity(idx.tgt(f)[1])
        return {x: x if keep else "a" for x in value(idx.tgt(f))}

    F = FinPresheaf(idx, idx.objects(), value, action)
    assert validate(F).ok
    report = is_reduced(F)
    assert not report.ok and all(x["slot"] == 0 for x in report.failures)


# -- the inert left Kan extension ----------------------------------------------------------

def test_lan_at_a_point():
    F = left_kan_inert(segal_extend(ARROW, 7), 7)
    values = F.value(Theta(1))
    assert len({a for a, _ in values}) == 1 and len(values) == 2


def test_lan_of_a_graph_at_an_edge_is_paths():
    for g in (LOOP, ARROW, TWO_PATHS):
        F = left_kan_inert(segal_extend(g, 7), 7)
        values = F.value(interval(1))
        assert len(act_out(interval(1), 7)) == 4
        assert len(values) == len(free_category_paths(g, 3).morphisms)


@pytest.mark.parametrize("X", [one_cell_per_dim(2)] + SETS_2[10:50:13], ids=lambda x: x.name)
def test_lan_is_a_segal_presheaf(X):
    F = left_kan_inert(segal_extend(X, 5), 5)
    assert validate(F).ok
    assert is_segal(F).ok


def test_lan_truncation_is_coherent():
    X = one_cell_per_dim(2)
    big, small = left_kan_inert(segal_extend(X, 7), 7), left_kan_inert(segal_extend(X, 5), 5)
    for obj in enum_theta_objects(2, 5):
        kept = {x for x in big.value(obj) if big.grade(obj, x) <= 5}
        assert kept == set(small.value(obj))


# -- limits over the fibration of an active map ----------------------------------------------

def fibration_limit_agrees(X: GlobularSet, f) -> bool:
    fib = active_fiber(f)
    target = fib.target
    nodes = fib.objects
    sets = {x: X.cells[target.dims[fib.image_of(x)]] for x in nodes}
    edges = []
    for x in nodes:
        for y in nodes:
            if x != y and fib.leq(x, y):
                ex, ey = fib.image_of(x), fib.image_of(y)
                g = target.arrow(ex, ey)
                edges.append((y, x, X.act_table(g)))
    pulled = set(finite_limit(Diagram(nodes, sets, edges)).families)
    direct = finite_limit(cell_diagram(X, f.tgt)).families
    moved = {tuple(fam[fib.image_of(x)] for x in nodes) for fam in direct}
    return len(moved) == len(direct) and moved == pulled


@pytest.mark.parametrize("X", [one_cell_per_dim(2)] + SETS_2[::11], ids=lambda x: x.name)
def test_limits_reindex_along_active_fibrations(X):
    objs = enum_theta_objects(2, 5)
    for I in objs:
        for J in objs:
            for f in enum_active_hom(I, J):
                assert fibration_limit_agrees(X, f)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SETS_2))
def test_json_roundtrip_of_extensions(X):
    F = segal_extend(X, 3).materialize()
    data = F.to_json()
    loaded = FinPresheaf.from_json(data)
    assert validate(loaded).ok
    assert {k: len(v) for k, v in loaded.to_json()["sets"].items()} == \
        {k: len(v) for k, v in data["sets"].items()}
    assert loaded.to_json() == data
