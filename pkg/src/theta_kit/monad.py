"""The free monad T_n on globular sets and the iterated formula for T_{1,n}.

An element of T_nX(C_k) is a pair ``(J, fam)``: a pasting shape J in
Theta_k together with a compatible labeling ``fam`` of the cells of J by
elements of X (indexed in the order of ``cells_of(J)``).  Its grade is the
cell count of J.

Multiplication flattens a shape whose cells are labeled by shapes: the
labels determine a compatible family of active maps out of globes, which
glue to a single active map out of J; the new labeling is read off through
the comma categories of the fibration G/f.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from .errors import GradeBoundError, MalformedError
from .globular import (
    GlobArrow, active_fiber, cells_of, check_cofinal_via_initial,
)
from .presheaf import (
    FinPresheaf, GlobularSet, ProductCategory, cell_diagram, element_key, finite_limit,
    left_kan_inert, segal_extend,
)
from .theta import (
    POINT_MAP, Theta, ThetaMap, act_out, act_pullback, column_inclusion, compose_theta,
    enum_active_hom, enum_theta_objects, factorize_theta, functor_sigma, globe,
    globe_active, identity, iota_to, uniota,
)


@dataclass
class FreeValue:
    """Graded elements of T_nX(C_k): grade -> tuple of (J, fam)."""

    k: int
    bound: int
    entries: dict = field(default_factory=dict)

    def all(self) -> tuple:
        return tuple(e for g in sorted(self.entries) for e in self.entries[g])

    def __len__(self):
        return sum(len(v) for v in self.entries.values())

    def counts(self) -> dict:
        return {g: len(v) for g, v in sorted(self.entries.items())}

    def to_json(self) -> dict:
        from .theta import encode_theta
        return {"k": self.k, "bound": self.bound,
                "grades": {str(g): [{"shape": encode_theta(J), "labels": [element_key(x) for x in fam]}
                                    for J, fam in v] for g, v in sorted(self.entries.items())}}


def _check_globe_source(J: Theta, k: int):
    if len(enum_active_hom(globe(k, k), J)) != 1:
        raise AssertionError(f"{J!r} does not admit exactly one active map from C_{k}")


def free_value(X: GlobularSet, k: int, bound: int, shapes: Sequence[Theta] | None = None,
               check_unique: bool = False) -> FreeValue:
    """Elements of T_nX(C_k) of grade <= bound by the direct formula:
    one summand per J in Theta_k, holding the cell families of X over J."""
    if not 0 <= k <= X.level:
        raise ValueError(f"k must lie in [0, {X.level}]")
    entries: dict = {}
    for J in (enum_theta_objects(k, bound) if shapes is None else shapes):
        if check_unique:
            _check_globe_source(J, k)
        fams = finite_limit(cell_diagram(X, J)).families
        if fams:
            entries.setdefault(J.cells, []).extend((J, fam) for fam in fams)
    return FreeValue(k, bound, {g: tuple(v) for g, v in sorted(entries.items())})


def free_value_via_kan(X: GlobularSet, k: int, bound: int) -> FreeValue:
    """The same value computed as (i_! of the Segal extension of X) at C_k."""
    n = X.level
    L = left_kan_inert(segal_extend(X, bound), bound)
    entries: dict = {}
    for a, fam in L.value(globe(k, n)):
        J = uniota(a.tgt, k)
        src_cells, tgt_cells = cells_of(J), cells_of(a.tgt)
        relabeled = tuple(fam[tgt_cells.index[iota_to(c, n)]] for c in src_cells.cells)
        entries.setdefault(J.cells, []).append((J, relabeled))
    return FreeValue(k, bound, {g: tuple(sorted(v, key=_entry_key)) for g, v in sorted(entries.items())})


def _entry_key(entry):
    J, fam = entry
    return (J.sort_key, element_key(fam))


def same_value(a: FreeValue, b: FreeValue) -> bool:
    if a.counts() != b.counts():
        return False
    return all(set(a.entries[g]) == set(b.entries[g]) for g in a.entries)


# -- structure maps ---------------------------------------------------------------

def boundary_family(X: GlobularSet, k: int, x) -> tuple:
    """The labeling of cells_of(C_k) induced by a k-cell x."""
    cells = cells_of(globe(k, k))
    top = len(cells) - 1
    return tuple(X.act(cells.arrow(i, top), x) for i in range(len(cells)))


def unit(X: GlobularSet, k: int, x, bound: int | None = None):
    """eta: X(C_k) -> T_nX(C_k), landing in the summand of the globe itself."""
    J = globe(k, k)
    if bound is not None and J.cells > bound:
        raise GradeBoundError(f"the unit needs grade {J.cells} > {bound}")
    return (J, boundary_family(X, k, x))


def free_act(X: GlobularSet, g: GlobArrow, element):
    """T_nX(g): T_nX(C_k) -> T_nX(C_j) for g: C_j -> C_k."""
    J, fam = element
    k, j = g.tgt, g.src
    if g.is_identity:
        return element
    from .globular import gamma_embed
    a = globe_active(J, k)
    a2, i2 = factorize_theta(compose_theta(a, gamma_embed(g, k)))
    J2 = uniota(a2.tgt, j)
    tcells = cells_of(J)
    new_cells = cells_of(J2)
    return (J2, tuple(fam[tcells.index[compose_theta(i2, iota_to(c, k))]] for c in new_cells.cells))


def free_globular(X: GlobularSet, bound: int, name: str = "") -> GlobularSet:
    """T_nX truncated at the given grade, as a globular set."""
    cells = tuple(free_value(X, k, bound).all() for k in range(X.level + 1))
    src = ({},) + tuple({e: free_act(X, GlobArrow(k - 1, k, "s"), e) for e in cells[k]}
                        for k in range(1, X.level + 1))
    tgt = ({},) + tuple({e: free_act(X, GlobArrow(k - 1, k, "t"), e) for e in cells[k]}
                        for k in range(1, X.level + 1))
    return GlobularSet(X.level, cells, src, tgt, name=name or f"T({X.name})")


def free_map(h: Callable, element):
    """T(h) for a map of globular sets given elementwise."""
    J, fam = element
    return (J, tuple(h(x) for x in fam))


# -- gluing active maps -------------------------------------------------------------

@dataclass
class SubstFamily:
    """For each cell a of J, an active map out of the globe C_{dim a} (at J's level)."""

    base: Theta
    assignment: tuple

    def incompatibilities(self) -> list:
        cells = cells_of(self.base)
        level = self.base.level
        from .globular import gamma_embed
        bad = []
        for (a, b), g in cells.arrows.items():
            if act_pullback(gamma_embed(g, level), self.assignment[b]) != self.assignment[a]:
                bad.append((a, b))
        return bad


def glue(base: Theta, assignment: Sequence[ThetaMap]) -> ThetaMap:
    """The unique active f: base -> K with f o a = i_a o assignment[a] for every cell a.

    Built column by column: every cell of column r carries an outer length
    p_r, and position j of those outer maps is a compatible family over the
    cells of the r-th child, glued one level down.
    """
    level = base.level
    if level == 0:
        return POINT_MAP
    cells = cells_of(base)
    m = base.arity
    if m == 0:
        return identity(base)
    lengths, rows, kids = [], [], []
    for r in range(1, m + 1):
        child = base.children[r - 1]
        col = column_inclusion(base, r)
        ccells = cells_of(child)
        maps = [assignment[cells.index[compose_theta(col, functor_sigma(c))]]
                for c in ccells.cells]
        ps = {f.tgt.arity for f in maps}
        if len(ps) != 1:
            raise MalformedError(f"column {r} mixes outer lengths {sorted(ps)}")
        p = ps.pop()
        lengths.append(p)
        row = []
        for j in range(1, p + 1):
            sub = glue(child, [f.psi[0][j - 1] for f in maps])
            row.append(sub)
            kids.append(sub.tgt)
        rows.append(tuple(row))
    phi = [0]
    for p in lengths:
        phi.append(phi[-1] + p)
    return ThetaMap(base, Theta(level, kids), tuple(phi), tuple(rows))


def subst(family: SubstFamily, check: bool = True) -> ThetaMap:
    """The active map out of family.base whose pullbacks along the cells are the family."""
    out = glue(family.base, family.assignment)
    if check:
        cells = cells_of(family.base)
        for a, c in enumerate(cells.cells):
            if act_pullback(c, out) != family.assignment[a]:
                raise AssertionError(f"glued map does not restrict to the family at cell {a}")
    return out


def conservative_budget(family: SubstFamily) -> int:
    return sum(f.tgt.cells for f in family.assignment)


def subst_search(family: SubstFamily, bound: int | None = None) -> ThetaMap:
    """Find the glued map by exhaustive search over active maps out of the base."""
    bound = conservative_budget(family) if bound is None else bound
    cells = cells_of(family.base)
    hits = [a for a in act_out(family.base, bound).all()
            if all(act_pullback(c, a) == family.assignment[i] for i, c in enumerate(cells.cells))]
    if not hits:
        raise GradeBoundError(f"no active map within {bound} cells restricts to the family")
    if len(hits) > 1:
        raise AssertionError(f"{len(hits)} active maps restrict to the same family")
    return hits[0]


def restriction_family(a: ThetaMap) -> SubstFamily:
    cells = cells_of(a.src)
    return SubstFamily(a.src, tuple(act_pullback(c, a) for c in cells.cells))


# -- multiplication ----------------------------------------------------------------

def mult(X: GlobularSet, k: int, element):
    """mu: T_n(T_nX)(C_k) -> T_nX(C_k).

    ``element`` is (J, fam) where fam[a] = (K_a, y_a) is an element of
    T_nX(C_{dim a}).
    """
    J, fam = element
    cells = cells_of(J)
    assignment = tuple(globe_active(iota_to(K, k), d) for d, (K, _) in zip(cells.dims, fam))
    f = glue(J, assignment)
    fib, cert = _certified_fiber(f)
    flat_target = f.tgt
    labels = []
    for e in range(len(fib.target)):
        alpha, c = cert.representatives[e]
        K, y = fam[alpha]
        d = cells.dims[alpha]
        fiber_cells = fib.fibers[alpha]
        own = cells_of(K)
        label = y[own.index[uniota(fiber_cells.cells[c], d)]]
        arrow = fib.target.arrow(e, fib.image[fib.objects.index((alpha, c))])
        labels.append(X.act(arrow, label))
    return (flat_target, tuple(labels))


@lru_cache(maxsize=4096)
def _certified_fiber(f: ThetaMap):
    fib = active_fiber(f)
    return fib, check_cofinal_via_initial(f, fib)


def join_element(X: GlobularSet, k: int, element):
    """Alias of mult kept for symmetry with free_map."""
    return mult(X, k, element)


def check_unit_laws(X: GlobularSet, k: int, element) -> tuple[bool, bool]:
    """(mu o eta_T = id, mu o T(eta) = id) at one element of T_nX(C_k)."""
    TX_unit = unit_in_free(X, k, element)
    left = mult(X, k, TX_unit) == element
    J, fam = element
    cells = cells_of(J)
    lifted = (J, tuple(unit(X, d, x) for d, x in zip(cells.dims, fam)))
    right = mult(X, k, lifted) == element
    return left, right


def unit_in_free(X: GlobularSet, k: int, element):
    """eta_{TX} applied to an element of T_nX(C_k)."""
    cells = cells_of(globe(k, k))
    top = len(cells) - 1
    return (globe(k, k), tuple(free_act(X, cells.arrow(i, top), element) for i in range(len(cells))))


def check_associativity(X: GlobularSet, k: int, element) -> bool:
    """mu o T(mu) = mu o mu_T at an element of T_nT_nT_nX(C_k)."""
    J, fam = element
    cells = cells_of(J)
    inner = (J, tuple(mult(X, d, e) for d, e in zip(cells.dims, fam)))
    left = mult(X, k, inner)
    TX = _LazyFree(X)
    right = mult(X, k, mult(TX, k, element))
    return left == right


class _LazyFree:
    """T_nX seen as a globular set without materializing its cells."""

    def __init__(self, X: GlobularSet):
        self.X = X
        self.level = X.level

    def act(self, g: GlobArrow, element):
        return free_act(self.X, g, element)


# -- T_{1,n} ------------------------------------------------------------------------

@dataclass
class IteratedValue:
    """Graded elements of T_{1,n}X at ([0], C_0) or ([1], C_k)."""

    slot: tuple
    bound: int
    entries: dict = field(default_factory=dict)

    def all(self) -> tuple:
        return tuple(e for g in sorted(self.entries) for e in self.entries[g])

    def __len__(self):
        return sum(len(v) for v in self.entries.values())

    def counts(self) -> dict:
        return {g: len(v) for g, v in sorted(self.entries.items())}


def product_slices(Y: FinPresheaf, n: int) -> tuple[tuple, GlobularSet, dict, dict]:
    """From a presheaf on G_1 x G_n: the base Y(C_0, C_0), the globular set
    Y(C_1, -) and the two endpoint maps Y(C_1, C_d) -> Y(C_0, C_0)."""
    base = Y.value((0, 0))
    cells = tuple(Y.value((1, d)) for d in range(n + 1))
    src = ({},) + tuple(Y.act((GlobArrow(1, 1), GlobArrow(d - 1, d, "s"))) for d in range(1, n + 1))
    tgt = ({},) + tuple(Y.act((GlobArrow(1, 1), GlobArrow(d - 1, d, "t"))) for d in range(1, n + 1))
    tilde = GlobularSet(n, cells, src, tgt, name="tilde")
    start, end = {}, {}
    for d in range(n + 1):
        down = GlobArrow(0, 0) if d == 0 else GlobArrow(0, d, "s")
        start.update({x: Y.apply((GlobArrow(0, 1, "s"), down), x) for x in cells[d]})
        end.update({x: Y.apply((GlobArrow(0, 1, "t"), down), x) for x in cells[d]})
    return base, tilde, start, end


def iterated_free_value(Y: FinPresheaf, k: int, bound: int, slot: int = 1) -> IteratedValue:
    """T_{1,n}Y at ([0], C_0) (slot 0) or ([1], C_k) (slot 1), up to grade bound.

    At ([1], C_k) an element is (j, chain) or, for j = 0, (0, b) with b in
    the base; a chain is j elements of F_n(Y(C_1,-))(C_k) whose end matches
    the start of the next.  The grade of a chain is j + 1 + the sum of the
    grades of its entries.
    """
    if not isinstance(Y.index, ProductCategory):
        raise ValueError("expects a presheaf on G_1 x G_n")
    n = Y.index.factors[1].level
    base, tilde, start, end = product_slices(Y, n)
    if slot == 0:
        return IteratedValue((0, 0), bound, {1: tuple((0, b) for b in base)} if bound >= 1 else {})
    entries: dict = {1: [(0, b) for b in base]} if bound >= 1 else {}
    pieces = free_value(tilde, k, max(bound - 2, 0)).all() if bound >= 3 else ()

    def endpoint(element, table):
        J, fam = element
        return table[fam[0]]

    by_start: dict = {}
    for p in pieces:
        by_start.setdefault(endpoint(p, start), []).append(p)

    def grow(chain, grade):
        j = len(chain)
        entries.setdefault(grade, []).append((j, tuple(chain)))
        last = endpoint(chain[-1], end)
        for p in by_start.get(last, ()):
            g2 = grade + 1 + p[0].cells
            if g2 <= bound:
                grow(chain + [p], g2)

    for p in pieces:
        g = 2 + p[0].cells
        if g <= bound:
            grow([p], g)
    return IteratedValue((1, k), bound, {g: tuple(v) for g, v in sorted(entries.items())})


def chain_of(X: GlobularSet, element) -> tuple:
    """Split an element ([j](L_1..L_j), fam) of T_{n+1}X(C_k) into its columns.

    Returns (0, fam[0]) for j = 0, else (j, ((L_r, fam_r), ...)) with fam_r
    the labeling of the cells of L_r read through column r.
    """
    I, fam = element
    if I.arity == 0:
        return (0, fam[0])
    cells = cells_of(I)
    out = []
    for r in range(1, I.arity + 1):
        L = I.children[r - 1]
        col = column_inclusion(I, r)
        out.append((L, tuple(fam[cells.index[compose_theta(col, functor_sigma(c))]]
                             for c in cells_of(L).cells)))
    return (I.arity, tuple(out))


def grade_of_chain(entry) -> int:
    j, chain = entry
    if j == 0:
        return 1
    return j + 1 + sum(L.cells for L, _ in chain)
