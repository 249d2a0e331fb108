"""Brute-force reference constructions: free categories as paths, free
2-categories by congruence closure over bounded terms, finite strict
n-categories and their nerves."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .errors import MalformedError
from .globular import cells_of
from .presheaf import FinPresheaf, GlobularSet, ThetaCategory, cell_diagram, finite_limit
from .theta import (
    Theta, column_inclusion, compose_theta, factorize_theta, functor_sigma, iota_to, uniota,
)


# -- free categories on graphs --------------------------------------------------------

@dataclass(frozen=True, order=True)
class Path:
    start: object
    edges: tuple

    def __len__(self):
        return len(self.edges)


@dataclass
class PathCategory:
    graph: GlobularSet
    bound: int
    morphisms: tuple

    def source(self, p: Path):
        return p.start

    def target(self, p: Path):
        return self.graph.target[1][p.edges[-1]] if p.edges else p.start

    def concat(self, p: Path, q: Path) -> Path | None:
        """p followed by q, or None when not composable or beyond the bound."""
        if self.target(p) != q.start or len(p) + len(q) > self.bound:
            return None
        return Path(p.start, p.edges + q.edges)

    def identity(self, v) -> Path:
        return Path(v, ())


def free_category_paths(graph: GlobularSet, bound: int) -> PathCategory:
    if graph.level != 1:
        raise ValueError("expects a graph (a level-1 globular set)")
    out = [Path(v, ()) for v in graph.cells[0]]
    frontier = list(out)
    for _ in range(bound):
        nxt = []
        for p in frontier:
            end = graph.target[1][p.edges[-1]] if p.edges else p.start
            for e in graph.cells[1]:
                if graph.source[1][e] == end:
                    nxt.append(Path(p.start, p.edges + (e,)))
        out.extend(nxt)
        frontier = nxt
    return PathCategory(graph, bound, tuple(out))


def enumerate_graphs(max_vertices: int, max_edges: int) -> list[GlobularSet]:
    """Graphs with at most the given numbers of vertices and edges, up to isomorphism."""
    from itertools import combinations_with_replacement, permutations

    seen, out = set(), []
    for nv in range(max_vertices + 1):
        verts = tuple(f"v{i}" for i in range(nv))
        pairs = [(s, t) for s in range(nv) for t in range(nv)]
        for ne in range(max_edges + 1):
            if nv == 0 and ne:
                continue
            for multiset in combinations_with_replacement(pairs, ne):
                key = min(tuple(sorted((perm[s], perm[t]) for s, t in multiset))
                          for perm in permutations(range(nv)))
                if (nv, key) in seen:
                    continue
                seen.add((nv, key))
                edges = {f"e{i}": (verts[s], verts[t]) for i, (s, t) in enumerate(key)}
                g = GlobularSet(1, (verts, tuple(edges)),
                                ({}, {e: st[0] for e, st in edges.items()}),
                                ({}, {e: st[1] for e, st in edges.items()}), name=f"graph{len(out)}")
                out.append(g)
    return out


# -- union-find ---------------------------------------------------------------------

class UnionFind:
    def __init__(self, n: int = 0):
        self.parent = list(range(n))

    def add(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


# -- free strict 2-categories by rewriting -----------------------------------------------

@dataclass
class TermTable:
    """Interned pasting terms over a globular set of level <= 2.

    A term is ('g', cell), ('i', t) for an identity on t, or ('c', k, a, b)
    for the composite of a then b along dimension k.
    """

    X: GlobularSet
    terms: list = field(default_factory=list)
    ids: dict = field(default_factory=dict)
    dim: list = field(default_factory=list)
    size: list = field(default_factory=list)
    src: list = field(default_factory=list)  # boundary data, see _boundary
    tgt: list = field(default_factory=list)
    shape: list = field(default_factory=list)

    def intern(self, term) -> int:
        found = self.ids.get(term)
        if found is not None:
            return found
        tid = len(self.terms)
        self.terms.append(term)
        self.ids[term] = tid
        d, s, t, sz, sh = self._describe(term)
        self.dim.append(d)
        self.src.append(s)
        self.tgt.append(t)
        self.size.append(sz)
        self.shape.append(sh)
        return tid

    def _describe(self, term):
        X = self.X
        if term[0] == "g":
            cell = term[1]
            d = next(k for k in range(X.level + 1) if cell in X.cells[k])
            if d == 0:
                return 0, cell, cell, 1, None
            if d == 1:
                return 1, X.source[1][cell], X.target[1][cell], 1, ((cell,), X.source[1][cell])
            return 2, ((X.source[2][cell],), X.source[1][X.source[2][cell]]), \
                ((X.target[2][cell],), X.source[1][X.target[2][cell]]), 1, (1,)
        if term[0] == "i":
            t = term[1]
            d = self.dim[t] + 1
            if d == 1:
                return 1, self.src[t], self.tgt[t], self.size[t] + 1, ((), self.src[t])
            return 2, self.shape[t], self.shape[t], self.size[t] + 1, (0,) * len(self.shape[t][0])
        _, k, a, b = term
        d = self.dim[a]
        sz = self.size[a] + self.size[b] + 1
        if d == 1:
            path = (self.shape[a][0] + self.shape[b][0], self.shape[a][1])
            return 1, self.src[a], self.tgt[b], sz, path
        if k == 1:
            return 2, self.src[a], self.tgt[b], sz, tuple(x + y for x, y in zip(self.shape[a], self.shape[b]))
        s = (self.src[a][0] + self.src[b][0], self.src[a][1])
        t = (self.tgt[a][0] + self.tgt[b][0], self.tgt[a][1])
        return 2, s, t, sz, self.shape[a] + self.shape[b]

    def endpoints(self, tid: int):
        """0-dimensional source and target."""
        d = self.dim[tid]
        if d == 0:
            return self.terms[tid][1], self.terms[tid][1]
        if d == 1:
            return self.src[tid], self.tgt[tid]
        path, start = self.src[tid]
        end = self.X.target[1][path[-1]] if path else start
        return start, end

    def composable(self, k: int, a: int, b: int) -> bool:
        d = self.dim[a]
        if d != self.dim[b] or k >= d:
            return False
        if k == 0:
            return self.endpoints(a)[1] == self.endpoints(b)[0]
        return self.tgt[a] == self.src[b]


def generate_terms(X: GlobularSet, node_bound: int) -> TermTable:
    if X.level > 2:
        raise ValueError("term rewriting is limited to dimension <= 2")
    table = TermTable(X)
    by_size: dict = defaultdict(list)
    for d in range(X.level + 1):
        for cell in X.cells[d]:
            by_size[1].append(table.intern(("g", cell)))
    for n in range(2, node_bound + 1):
        for t in by_size[n - 1]:
            if table.dim[t] < X.level:
                by_size[n].append(table.intern(("i", t)))
        for sa in range(1, n - 1):
            sb = n - 1 - sa
            for a in by_size[sa]:
                da = table.dim[a]
                if da == 0:
                    continue
                for b in by_size[sb]:
                    if table.dim[b] != da:
                        continue
                    for k in range(da):
                        if table.composable(k, a, b):
                            by_size[n].append(table.intern(("c", k, a, b)))
    return table


@dataclass
class RewriteResult:
    table: TermTable
    classes: dict  # representative -> sorted member ids
    node_bound: int

    def classes_of_dim(self, d: int) -> list:
        return [rep for rep in sorted(self.classes) if self.table.dim[rep] == d]

    def shape_counts(self, d: int = 2) -> dict:
        counts: dict = defaultdict(int)
        for rep in self.classes_of_dim(d):
            counts[self.table.shape[rep]] += 1
        return dict(counts)

    def shape_consistent(self) -> bool:
        return all(len({self.table.shape[t] for t in members}) == 1
                   for members in self.classes.values())


def free_2cat_rewrite(X: GlobularSet, node_bound: int = 7) -> RewriteResult:
    """Quotient all boundary-valid terms of at most node_bound nodes by the
    strict 2-category axioms: associativity, units, functoriality of
    identities, and middle interchange, closed under congruence."""
    table = generate_terms(X, node_bound)
    terms = table.terms
    uf = UnionFind(len(terms))

    def sig_of(t):
        term = terms[t]
        if term[0] == "g":
            return term
        if term[0] == "i":
            return ("i", uf.find(term[1]))
        return ("c", term[1], uf.find(term[2]), uf.find(term[3]))

    while True:
        changed = False
        sig: dict = {}
        for t in range(len(terms)):
            key = sig_of(t)
            other = sig.get(key)
            if other is None:
                sig[key] = t
            elif uf.union(other, t):
                changed = True
        members: dict = defaultdict(list)
        for t in range(len(terms)):
            members[uf.find(t)].append(t)

        def in_class(x, pred):
            return [u for u in members[uf.find(x)] if pred(terms[u])]

        def look(*key):
            if key[0] == "i":
                return sig.get(("i", uf.find(key[1])))
            return sig.get(("c", key[1], uf.find(key[2]), uf.find(key[3])))

        def is_identity_for(x, k) -> bool:
            # x is an iterated identity on a k-cell
            for u in members[uf.find(x)]:
                term = terms[u]
                if term[0] == "i":
                    inner = term[1]
                    if table.dim[inner] == k or (table.dim[inner] > k and is_identity_for(inner, k)):
                        return True
            return False

        for t, term in enumerate(terms):
            if term[0] == "c":
                _, k, x, y = term
                if is_identity_for(x, k):
                    changed |= uf.union(t, y)
                if is_identity_for(y, k):
                    changed |= uf.union(t, x)
                # associativity, both directions
                for u in in_class(x, lambda s: s[0] == "c" and s[1] == k):
                    _, _, a, b = terms[u]
                    v = look("c", k, b, y)
                    w = look("c", k, a, v) if v is not None else None
                    if w is not None:
                        changed |= uf.union(t, w)
                for u in in_class(y, lambda s: s[0] == "c" and s[1] == k):
                    _, _, b, c = terms[u]
                    v = look("c", k, x, b)
                    w = look("c", k, v, c) if v is not None else None
                    if w is not None:
                        changed |= uf.union(t, w)
                # identities preserve composites
                for u in in_class(x, lambda s: s[0] == "i"):
                    for v in in_class(y, lambda s: s[0] == "i"):
                        a, b = terms[u][1], terms[v][1]
                        if k < table.dim[a]:
                            inner = look("c", k, a, b)
                            w = look("i", inner) if inner is not None else None
                            if w is not None:
                                changed |= uf.union(t, w)
                # interchange, both directions
                other = 0 if k == 1 else 1
                if table.dim[t] == 2:
                    for u in in_class(x, lambda s: s[0] == "c" and s[1] == other):
                        for v in in_class(y, lambda s: s[0] == "c" and s[1] == other):
                            a, b = terms[u][2], terms[u][3]
                            c, d = terms[v][2], terms[v][3]
                            left = look("c", k, a, c)
                            right = look("c", k, b, d)
                            if left is not None and right is not None:
                                w = look("c", other, left, right)
                                if w is not None:
                                    changed |= uf.union(t, w)
            elif term[0] == "i":
                for u in in_class(term[1], lambda s: s[0] == "c"):
                    _, k, a, b = terms[u]
                    ia, ib = look("i", a), look("i", b)
                    if ia is not None and ib is not None:
                        w = look("c", k, ia, ib)
                        if w is not None:
                            changed |= uf.union(t, w)
        if not changed:
            break
    classes: dict = defaultdict(list)
    for t in range(len(terms)):
        classes[uf.find(t)].append(t)
    return RewriteResult(table, {rep: sorted(v) for rep, v in classes.items()}, node_bound)


def term_shape_of_shape(J: Theta) -> tuple:
    """Column heights of a Theta_2 shape, the invariant classifying 2-cell terms."""
    return tuple(c.arity for c in J.children)


# -- finite strict n-categories ----------------------------------------------------------

@dataclass
class StrictNCat:
    """A finite strict n-category given by complete tables.

    ``comp[(k, a, b)]`` is the composite of a then b along dimension k,
    defined when the k-dimensional target of a is the k-dimensional source
    of b.  ``unit[d]`` maps d-cells to their identity (d+1)-cells.
    """

    level: int
    cells: tuple
    source: tuple
    target: tuple
    unit: tuple
    comp: dict
    name: str = ""

    def dim(self, x) -> int:
        for d, cs in enumerate(self.cells):
            if x in cs:
                return d
        raise KeyError(x)

    def boundary(self, x, k: int, polarity: str):
        d = self.dim(x)
        if k == d:
            return x
        for i in range(d, k + 1, -1):
            x = self.source[i][x]
        return (self.source if polarity == "s" else self.target)[k + 1][x]

    def ident(self, x, d: int):
        while self.dim(x) < d:
            x = self.unit[self.dim(x)][x]
        return x

    def compose(self, k: int, a, b):
        try:
            return self.comp[(k, a, b)]
        except KeyError:
            raise MalformedError(f"{a!r} and {b!r} are not composable along {k}") from None

    def composable(self, k: int, a, b) -> bool:
        d = self.dim(a)
        return d == self.dim(b) and k < d and self.boundary(a, k, "t") == self.boundary(b, k, "s")

    def globular(self) -> GlobularSet:
        return GlobularSet(self.level, self.cells, self.source, self.target, name=self.name)

    def validate(self) -> list:
        problems = list(self.globular().validate())
        L = self.level
        for d in range(L):
            for x in self.cells[d]:
                u = self.unit[d].get(x)
                if u is None or self.source[d + 1][u] != x or self.target[d + 1][u] != x:
                    problems.append(f"bad identity on {x!r}")
        for d in range(1, L + 1):
            cs = self.cells[d]
            for k in range(d):
                for a in cs:
                    for b in cs:
                        present = (k, a, b) in self.comp
                        if present != self.composable(k, a, b):
                            problems.append(f"composite table wrong at {(k, a, b)!r}")
                            continue
                        if not present:
                            continue
                        c = self.comp[(k, a, b)]
                        if k == d - 1:
                            ok = self.source[d][c] == self.source[d][a] and self.target[d][c] == self.target[d][b]
                        else:
                            ok = (self.source[d][c] == self.compose(k, self.source[d][a], self.source[d][b])
                                  and self.target[d][c] == self.compose(k, self.target[d][a], self.target[d][b]))
                        if not ok:
                            problems.append(f"boundary of composite {(k, a, b)!r}")
                for a in cs:
                    left = self.ident(self.boundary(a, k, "s"), d)
                    right = self.ident(self.boundary(a, k, "t"), d)
                    if self.comp.get((k, left, a)) != a or self.comp.get((k, a, right)) != a:
                        problems.append(f"unit law fails for {a!r} along {k}")
                for a, b, c in product(cs, repeat=3):
                    ab = self.comp.get((k, a, b))
                    bc = self.comp.get((k, b, c))
                    if ab is None or bc is None:
                        continue
                    if self.comp.get((k, ab, c)) != self.comp.get((k, a, bc)):
                        problems.append(f"associativity fails at {(k, a, b, c)!r}")
            for k in range(d):
                for l in range(k + 1, d):
                    for a, b, c, e in product(cs, repeat=4):
                        ab, ce = self.comp.get((k, a, b)), self.comp.get((k, c, e))
                        ac, be = self.comp.get((l, a, c)), self.comp.get((l, b, e))
                        if None in (ab, ce, ac, be):
                            continue
                        if self.comp.get((l, ab, ce)) != self.comp.get((k, ac, be)):
                            problems.append(f"interchange fails at {(a, b, c, e)!r}")
            if d < L:
                for k in range(d):
                    for a in cs:
                        for b in cs:
                            ab = self.comp.get((k, a, b))
                            if ab is None:
                                continue
                            if self.unit[d][ab] != self.comp.get((k, self.unit[d][a], self.unit[d][b])):
                                problems.append(f"identity does not preserve {(k, a, b)!r}")
        return problems


def strict_from_generators(level: int, cells, source, target, unit, comp: dict,
                           name: str = "") -> StrictNCat:
    """Fill in every composite that involves an identity, then validate.

    ``comp`` lists only the composites of non-identity cells.
    """
    cat = StrictNCat(level, tuple(tuple(c) for c in cells), tuple(source), tuple(target),
                     tuple(unit), dict(comp), name)
    units_of = {}
    for d in range(level):
        for x, u in cat.unit[d].items():
            units_of[u] = x
    changed = True
    while changed:
        changed = False
        for d in range(1, level + 1):
            for k in range(d):
                for a in cat.cells[d]:
                    for b in cat.cells[d]:
                        key = (k, a, b)
                        if key in cat.comp or not cat.composable(k, a, b):
                            continue
                        val = _fill(cat, units_of, k, a, b)
                        if val is not None:
                            cat.comp[key] = val
                            changed = True
    problems = cat.validate()
    if problems:
        raise MalformedError(f"{name or 'category'} violates the strict laws: {problems[:3]}")
    return cat


def _base_of_identity(units_of: dict, x):
    """(cell, levels) with x the iterated identity on cell."""
    levels = 0
    while x in units_of:
        x = units_of[x]
        levels += 1
    return x, levels


def _fill(cat: StrictNCat, units_of: dict, k: int, a, b):
    d = cat.dim(a)
    base_a, la = _base_of_identity(units_of, a)
    if la and d - la <= k:
        return b
    base_b, lb = _base_of_identity(units_of, b)
    if lb and d - lb <= k:
        return a
    if a in units_of and b in units_of and k < d - 1:
        inner = cat.comp.get((k, units_of[a], units_of[b]))
        if inner is not None:
            return cat.unit[d - 1][inner]
    return None


def promote(cat: StrictNCat) -> StrictNCat:
    """The same category with one more dimension of identity cells only."""
    top = cat.level
    new = tuple(("id", x) for x in cat.cells[top])
    unit = cat.unit + ({x: ("id", x) for x in cat.cells[top]},)
    tops = {("id", x): x for x in cat.cells[top]}
    src, tgt = cat.source + (tops,), cat.target + (tops,)
    comp = dict(cat.comp)
    for (k, a, b), c in cat.comp.items():
        comp[(k, ("id", a), ("id", b))] = ("id", c)
    for x in cat.cells[top]:
        comp[(top, ("id", x), ("id", x))] = ("id", x)
    return StrictNCat(top + 1, cat.cells + (new,), src, tgt, unit, comp, name=cat.name)


# -- evaluation of pasting diagrams and nerves -------------------------------------------

def evaluate(P: StrictNCat, J: Theta, labels: Sequence, shift: int = 0):
    """The composite in P of a J-shaped labeled pasting diagram.

    ``labels`` follows the order of cells_of(J); a cell of dimension e of J
    is labeled by a cell of dimension e + shift of P.  The result has
    dimension J.level + shift.
    """
    cells = cells_of(J)
    if J.level == 0:
        return labels[0]
    if J.arity == 0:
        return P.ident(labels[0], J.level + shift)
    columns = []
    for r in range(1, J.arity + 1):
        child = J.children[r - 1]
        col = column_inclusion(J, r)
        sub = [labels[cells.index[compose_theta(col, functor_sigma(c))]] for c in cells_of(child).cells]
        columns.append(evaluate(P, child, sub, shift + 1))
    out = columns[0]
    for c in columns[1:]:
        out = P.compose(shift, out, c)
    return out


def nerve(P: StrictNCat, bound: int) -> FinPresheaf:
    """Theta_n-shaped labelings of P: value at I is the set of cell families
    of P over I, and a morphism relabels each cell by evaluating the pasting
    diagram it picks out."""
    n = P.level
    X = P.globular()
    index = ThetaCategory(n, bound)

    def value(obj):
        return finite_limit(cell_diagram(X, obj)).families

    def action(f):
        src_cells, tgt_cells = cells_of(f.src), cells_of(f.tgt)
        plan = []
        for d, c in zip(src_cells.dims, src_cells.cells):
            a, i = factorize_theta(compose_theta(f, c))
            J = uniota(a.tgt, d)
            positions = [tgt_cells.index[compose_theta(i, iota_to(cc, n))] for cc in cells_of(J).cells]
            plan.append((J, positions))
        return lambda fam: tuple(evaluate(P, J, [fam[p] for p in pos]) for J, pos in plan)

    return FinPresheaf(index, index.objects(), value, action, name=f"nerve({P.name})")


# -- a small corpus ----------------------------------------------------------------------

def terminal_category(level: int) -> StrictNCat:
    cells = tuple((f"c{d}",) for d in range(level + 1))
    src = ({},) + tuple({f"c{d}": f"c{d - 1}"} for d in range(1, level + 1))
    unit = tuple({f"c{d}": f"c{d + 1}"} for d in range(level))
    comp = {(k, f"c{d}", f"c{d}"): f"c{d}" for d in range(1, level + 1) for k in range(d)}
    return StrictNCat(level, cells, src, src, unit, comp, name="terminal")


def walking_two_globe() -> StrictNCat:
    """x, y; f, g: x -> y; alpha: f => g, with all identities."""
    cells = (("x", "y"), ("f", "g", "1x", "1y"), ("alpha", "1f", "1g", "11x", "11y"))
    src = ({}, {"f": "x", "g": "x", "1x": "x", "1y": "y"},
           {"alpha": "f", "1f": "f", "1g": "g", "11x": "1x", "11y": "1y"})
    tgt = ({}, {"f": "y", "g": "y", "1x": "x", "1y": "y"},
           {"alpha": "g", "1f": "f", "1g": "g", "11x": "1x", "11y": "1y"})
    unit = ({"x": "1x", "y": "1y"}, {"f": "1f", "g": "1g", "1x": "11x", "1y": "11y"})
    return strict_from_generators(2, cells, src, tgt, unit, {}, name="two-globe")


def chain_poset(length: int) -> StrictNCat:
    """The poset 0 < 1 < ... < length as a category."""
    objs = tuple(range(length + 1))
    arrows = tuple((i, j) for i in objs for j in objs if i <= j)
    src = ({}, {a: a[0] for a in arrows})
    tgt = ({}, {a: a[1] for a in arrows})
    unit = ({i: (i, i) for i in objs},)
    comp = {(0, (i, j), (j, l)): (i, l) for i, j in arrows for j2, l in arrows if j == j2}
    return strict_from_generators(1, (objs, arrows), src, tgt, unit, comp, name=f"chain{length}")


def cyclic_group_two() -> StrictNCat:
    """Z/2 as a one-object category."""
    cells = (("*",), ("e", "z"))
    src = ({}, {"e": "*", "z": "*"})
    unit = ({"*": "e"},)
    comp = {(0, "z", "z"): "e"}
    return strict_from_generators(1, cells, src, src, unit, comp, name="Z/2")


def eckmann_hilton_two() -> StrictNCat:
    """One object, one 1-cell, and Z/2 worth of 2-cells (both compositions agree)."""
    cells = (("*",), ("1",), ("e", "z"))
    src = ({}, {"1": "*"}, {"e": "1", "z": "1"})
    unit = ({"*": "1"}, {"1": "e"})
    comp = {(0, "z", "z"): "e", (1, "z", "z"): "e"}
    return strict_from_generators(2, cells, src, src, unit, comp, name="EH(Z/2)")


def corpus() -> list[StrictNCat]:
    return [terminal_category(2), walking_two_globe(), promote(chain_poset(2)),
            promote(cyclic_group_two()), eckmann_hilton_two()]
