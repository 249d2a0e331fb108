from itertools import product

import pytest
from hypothesis import given, strategies as st

from conftest import THETA2_SMALL
from theta_kit.errors import CompositionError, MalformedError
from theta_kit.globular import (
    SOURCE, TARGET, GlobArrow, active_fiber, all_glob_arrows, alpha_arrow, alpha_object,
    beta_arrow, beta_object, cells_of, check_cofinal_via_initial, comma_under, compose_glob,
    enum_glob_hom, family_grade, gamma_embed, generator, glob_identity, lambda_poset,
    mobius_weights, nerve_contractibility, poset_homology, product_compose, word_of,
)
from theta_kit.oracles import UnionFind
from theta_kit.theta import (
    POINT, Theta, ThetaMap, compose_theta, enum_active_hom, enum_inert_hom, enum_theta_objects,
    globe, identity, is_inert,
)

C1_2, C2 = globe(1, 2), globe(2, 2)
W = Theta(2, (globe(1, 1), Theta(1)))  # [2]([1],[0])
ALL_ACTIVE_2 = [f for I in enum_theta_objects(2, 5) for J in enum_theta_objects(2, 5)
                for f in enum_active_hom(I, J)]
GLOBE_ACTIVE_3 = [f for k in range(4) for J in enum_theta_objects(3, 5)
                  for f in enum_active_hom(globe(k, 3), J)]


# -- the presentation and its normal form ---------------------------------------------

def word_classes(j: int, k: int) -> list[set[tuple[str, ...]]]:
    """Congruence classes of words C_j -> C_k, lowest letter first.

    The relations let the letter at level i > j + 1 flip whenever any letter sits
    below it, applied anywhere inside a word.
    """
    words = list(product((SOURCE, TARGET), repeat=k - j))
    pos_of = {w: i for i, w in enumerate(words)}
    uf = UnionFind(len(words))
    for w in words:
        for pos in range(1, len(w)):
            flipped = w[:pos] + ((TARGET if w[pos] == SOURCE else SOURCE),) + w[pos + 1:]
            uf.union(pos_of[w], pos_of[flipped])
    classes: dict = {}
    for w in words:
        classes.setdefault(uf.find(pos_of[w]), set()).add(w)
    return list(classes.values())


@pytest.mark.parametrize("j, k", [(j, k) for k in range(5) for j in range(k + 1)])
def test_normal_form_matches_congruence_closure(j, k):
    classes = word_classes(j, k)
    homs = enum_glob_hom(j, k)
    assert len(classes) == len(homs) == (1 if j == k else 2)
    for g in homs:
        [cls] = [c for c in classes if word_of(g) in c]
        assert all(w[:1] == word_of(g)[:1] for w in cls)


def test_hom_sets_empty_downwards():
    assert enum_glob_hom(3, 1) == ()


@pytest.mark.parametrize("i, j, k", [(i, j, k) for k in range(5) for j in range(k + 1) for i in range(j + 1)])
def test_composition_agrees_with_word_concatenation(i, j, k):
    for f in enum_glob_hom(i, j):
        for g in enum_glob_hom(j, k):
            gf = compose_glob(g, f)
            joined = word_of(f) + word_of(g)
            [cls] = [c for c in word_classes(i, k) if joined in c]
            assert word_of(gf) in cls


def test_composition_rejects_mismatch():
    with pytest.raises(CompositionError):
        compose_glob(generator(3, SOURCE), generator(1, SOURCE))


def test_malformed_arrows():
    for bad in [(2, 1, SOURCE), (1, 1, SOURCE), (0, 1, None), (0, 1, "x")]:
        with pytest.raises(MalformedError):
            GlobArrow(*bad)


def test_arrow_json_roundtrip():
    for g in all_glob_arrows(3):
        assert GlobArrow.from_json(g.to_json()) == g


# -- gamma ----------------------------------------------------------------------------

def test_gamma_on_objects_and_generators():
    assert gamma_embed(0, 2) is Theta(2)
    d1 = gamma_embed(generator(1, SOURCE), 1)
    assert d1 == ThetaMap(Theta(1), Theta(1, (POINT,)), (0,), ())
    assert gamma_embed(generator(1, TARGET), 1).phi == (1,)


@pytest.mark.parametrize("level", [1, 2, 3])
def test_gamma_fully_faithful_onto_inert(level):
    for j in range(level + 1):
        for k in range(level + 1):
            inert = set(enum_inert_hom(globe(j, level), globe(k, level)))
            image = {gamma_embed(g, level) for g in enum_glob_hom(j, k)}
            assert image == inert
            assert len(image) == len(enum_glob_hom(j, k))


@pytest.mark.parametrize("level", [2, 3])
def test_gamma_functorial(level):
    arrows = all_glob_arrows(level)
    for f in arrows:
        assert is_inert(gamma_embed(f, level))
        for g in arrows:
            if g.src == f.tgt:
                assert gamma_embed(compose_glob(g, f), level) == \
                    compose_theta(gamma_embed(g, level), gamma_embed(f, level))
    for k in range(level + 1):
        assert gamma_embed(glob_identity(k), level) == identity(globe(k, level))


# -- cell categories --------------------------------------------------------------------

def test_cell_counts_of_examples():
    assert len(cells_of(Theta(2))) == 1 and not cells_of(Theta(2)).arrows
    two = cells_of(C2)
    assert sorted(two.dims) == [0, 0, 1, 1, 2]
    cat = cells_of(W)
    assert len(cat) == 7 and sorted(cat.dims) == [0, 0, 0, 1, 1, 1, 2]


@pytest.mark.parametrize("k", range(4))
def test_globe_has_2k_plus_1_cells(k):
    assert len(cells_of(globe(k, 3))) == 2 * k + 1


@pytest.mark.parametrize("obj", THETA2_SMALL, ids=repr)
def test_cell_category_invariants(obj):
    cat = cells_of(obj)
    assert len(set(cat.cells)) == len(cat)
    for (a, b), g in cat.arrows.items():
        assert compose_theta(cat.cells[b], gamma_embed(g, obj.level)) == cat.cells[a]
        assert g.src == cat.dims[a] and g.tgt == cat.dims[b]
    # closed under composition, no loops
    for (a, b), g in cat.arrows.items():
        assert a != b
        for (b2, c), h in cat.arrows.items():
            if b2 == b:
                assert cat.arrows[(a, c)] == compose_glob(h, g)
    # every inert globe map appears
    for k in range(obj.level + 1):
        for c in enum_inert_hom(globe(k, obj.level), obj):
            assert c in cat.index


@pytest.mark.parametrize("obj", THETA2_SMALL, ids=repr)
def test_cell_categories_contractible(obj):
    assert nerve_contractibility(cells_of(obj)).contractible


def test_homology_detects_a_circle():
    # two minima below two maxima: the nerve is a circle
    less = [frozenset({2, 3}), frozenset({2, 3}), frozenset(), frozenset()]
    report = poset_homology(4, less)
    assert report.betti[:2] == (1, 1) and not report.contractible


def test_homology_of_two_points():
    report = poset_homology(2, [frozenset(), frozenset()])
    assert report.betti[0] == 2 and not report.contractible


@pytest.mark.parametrize("obj", THETA2_SMALL, ids=repr)
def test_mobius_weights_sum_to_one(obj):
    assert sum(mobius_weights(cells_of(obj))) == 1


# -- the fibration over an active map -----------------------------------------------------

def test_identity_fiber():
    I = W
    fib = active_fiber(identity(I))
    for a, cat in enumerate(fib.fibers):
        assert cat.base == globe(fib.base.dims[a], 2)
    assert set(fib.image) == set(range(len(fib.target)))
    tops = [fib.image_of((a, cat.dims.index(fib.base.dims[a]))) for a, cat in enumerate(fib.fibers)]
    assert tops == list(range(len(fib.base)))


def test_globe_into_whiskered_pair():
    J = Theta(2, (Theta(1, (POINT, POINT)),))
    [f] = enum_active_hom(C2, J)
    fib = active_fiber(f)
    for a, d in enumerate(fib.base.dims):
        if d == 2:
            assert fib.fibers[a].base == J
        if d == 0:
            assert fib.fibers[a].base == Theta(2)


@pytest.mark.parametrize("f", ALL_ACTIVE_2, ids=repr)
def test_fiber_structure(f):
    fib = active_fiber(f)
    assert len(fib.objects) == sum(len(c) for c in fib.fibers)
    for a, (fa, ia) in enumerate(fib.factors):
        assert compose_theta(ia, fa) == compose_theta(f, fib.base.cells[a])
        assert fib.fibers[a].base == fa.tgt
    # transitions compose
    for (a, b) in fib.base.arrows:
        for (b2, c) in fib.base.arrows:
            if b2 == b:
                assert compose_theta(fib.transitions[(b, c)], fib.transitions[(a, b)]) == \
                    fib.transitions[(a, c)]
    # the grade identity behind family_grade
    sizes = [len(c) for c in fib.fibers]
    assert family_grade(fib.base, sizes) == len(fib.target)


def test_active_fiber_rejects_inert():
    with pytest.raises(ValueError):
        active_fiber(gamma_embed(generator(1, SOURCE), 2))


def test_identity_commas_start_at_the_cell():
    I = W
    cert = check_cofinal_via_initial(identity(I))
    assert cert.ok
    fib = active_fiber(identity(I))
    for e, x in cert.initial.items():
        assert fib.image_of(x) == e


@pytest.mark.parametrize("f", ALL_ACTIVE_2 + GLOBE_ACTIVE_3, ids=repr)
def test_commas_are_contractible(f):
    assert check_cofinal_via_initial(f).weakly_contractible


def test_degenerate_collapse_comma_is_a_zigzag():
    f = enum_active_hom(Theta(2, (Theta(1), Theta(1))), Theta(2))[0]
    fib = active_fiber(f)
    comma = comma_under(fib, 0)
    assert len(comma) == 5
    cert = check_cofinal_via_initial(f)
    assert not cert.ok and cert.weakly_contractible
    assert [x["comma_size"] for x in cert.failures] == [5]


@pytest.mark.parametrize("obj", THETA2_SMALL, ids=repr)
def test_identity_certificates(obj):
    assert check_cofinal_via_initial(identity(obj)).ok


# -- Lambda ----------------------------------------------------------------------------

def test_lambda_zero_is_a_point():
    lam = lambda_poset(0)
    assert lam.elements == ((0, 0),)
    assert lam.homology().contractible


def test_lambda_two():
    lam = lambda_poset(2)
    assert len(lam.elements) == 5
    assert lam.homology().contractible
    assert lam.reverses_order()
    assert all(r.contractible for r in lam.comma_reports())


@pytest.mark.parametrize("j, level", [(j, level) for j in range(4) for level in (1, 2, 3)])
def test_lambda_commas(j, level):
    lam = lambda_poset(j, level)
    assert len(set(lam.inclusion)) == len(lam.elements)
    assert all(r.contractible for r in lam.comma_reports())


# -- alpha and beta ----------------------------------------------------------------------

def test_alpha_objects():
    assert alpha_object(0) == (0, 0)
    assert [alpha_object(i) for i in range(1, 4)] == [(1, 0), (1, 1), (1, 2)]
    assert all(beta_object((0, i)) == 0 for i in range(4))


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_beta_alpha_is_identity(n):
    arrows = all_glob_arrows(n + 1)
    for g in arrows:
        a, b = alpha_arrow(g)
        assert (a.src, b.src) == alpha_object(g.src) and (a.tgt, b.tgt) == alpha_object(g.tgt)
        assert beta_arrow((a, b)) == g


def test_alpha_depends_on_the_representing_word():
    # s_2 s_1 = t_2 s_1, but the letterwise images differ in the second factor
    lower, up_s, up_t = generator(1, SOURCE), generator(2, SOURCE), generator(2, TARGET)
    assert compose_glob(up_s, lower) == compose_glob(up_t, lower)
    via_s = product_compose(alpha_arrow(up_s), alpha_arrow(lower))
    via_t = product_compose(alpha_arrow(up_t), alpha_arrow(lower))
    assert via_s != via_t
    assert alpha_arrow(compose_glob(up_s, lower)) == via_s
    assert beta_arrow(via_s) == beta_arrow(via_t)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_beta_functorial(n):
    pairs = [(f, g) for f in all_glob_arrows(1) for g in all_glob_arrows(n)]
    for x in pairs:
        for y in pairs:
            if (y[0].src, y[1].src) == (x[0].tgt, x[1].tgt):
                assert beta_arrow(product_compose(y, x)) == compose_glob(beta_arrow(y), beta_arrow(x))


@given(st.integers(0, 3), st.integers(0, 3))
def test_glob_hom_sizes(j, k):
    assert len(enum_glob_hom(j, k)) == (0 if j > k else 1 if j == k else 2)
