"""Finite set-valued presheaves on small index categories, finite limits,
Segal extension and the inert left Kan extension.

A presheaf here is contravariant: ``act(f)`` for ``f: a -> b`` is a dict
sending elements of ``F(b)`` to elements of ``F(a)``.  Values and actions
are computed lazily and cached; evaluating outside the declared support
raises :class:`SupportError` instead of silently returning an empty set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from graphlib import TopologicalSorter
from itertools import product
from typing import Any, Callable, Iterable, Sequence

from .errors import MalformedError, SupportError
from .globular import (
    CellCategory, GlobArrow, active_fiber, cells_of, compose_glob,
    enum_glob_hom, family_grade, gamma_embed, glob_identity,
)
from .simplex import (
    SimplexMap, compose_simplex, enum_hom_simplex, identity_simplex,
)
from .theta import (
    Theta, ThetaMap, act_out, compose_theta, decode_morphism_full, decode_theta,
    encode_morphism_full, encode_theta, enum_active_hom, enum_inert_hom, enum_theta_hom,
    enum_theta_objects, factorize_theta, globe, identity,
)


# -- element encoding -------------------------------------------------------------

class OpaqueId(str):
    """An element id read back from a dump; it renders as the element it names."""

    __slots__ = ()


def to_plain(x) -> Any:
    """A JSON-compatible rendering of an element, used for keys and ordering."""
    if isinstance(x, OpaqueId):
        try:
            return json.loads(x)
        except ValueError:
            return str(x)
    if isinstance(x, Theta):
        return {"theta": encode_theta(x)}
    if isinstance(x, ThetaMap):
        return {"map": encode_morphism_full(x)}
    if isinstance(x, (SimplexMap, GlobArrow)):
        return x.to_json()
    if isinstance(x, tuple):
        return [to_plain(v) for v in x]
    if isinstance(x, (str, int)) or x is None:
        return x
    raise TypeError(f"cannot encode element {x!r}")


def element_key(x) -> str:
    return json.dumps(to_plain(x), sort_keys=True, separators=(",", ":"))


def sorted_elements(xs: Iterable) -> tuple:
    return tuple(sorted(set(xs), key=element_key))


# -- index categories ----------------------------------------------------------------

class IndexCategory:
    """A finite fragment of a category: objects, hom-sets, composition."""

    tag = "abstract"

    def objects(self) -> tuple:
        raise NotImplementedError

    def hom(self, a, b) -> tuple:
        raise NotImplementedError

    def compose(self, g, f):
        raise NotImplementedError

    def identity(self, a):
        raise NotImplementedError

    def src(self, f):
        return f.src

    def tgt(self, f):
        return f.tgt

    def params(self) -> dict:
        return {}

    def to_json(self) -> dict:
        return {"tag": self.tag, **self.params()}

    def obj_key(self, a) -> str:
        return json.dumps(self.encode_obj(a), separators=(",", ":"))

    def map_key(self, f) -> str:
        return json.dumps(self.encode_map(f), sort_keys=True, separators=(",", ":"))

    def encode_obj(self, a):
        raise NotImplementedError

    def decode_obj(self, data):
        raise NotImplementedError

    def encode_map(self, f):
        raise NotImplementedError

    def decode_map(self, data):
        raise NotImplementedError

    def arrows(self, objs: Sequence | None = None) -> Iterable:
        objs = self.objects() if objs is None else objs
        for a in objs:
            for b in objs:
                yield from self.hom(a, b)


class SimplexCategory(IndexCategory):
    tag = "simplex"

    def __init__(self, max_n: int):
        self.max_n = max_n

    def objects(self):
        return tuple(range(self.max_n + 1))

    def hom(self, a, b):
        return enum_hom_simplex(a, b)

    def compose(self, g, f):
        return compose_simplex(g, f)

    def identity(self, a):
        return identity_simplex(a)

    def params(self):
        return {"max_n": self.max_n}

    def encode_obj(self, a):
        return a

    def decode_obj(self, data):
        return int(data)

    def encode_map(self, f):
        return f.to_json()

    def decode_map(self, data):
        return SimplexMap.from_json(data)


class GlobularCategory(IndexCategory):
    tag = "globular"

    def __init__(self, level: int):
        self.level = level

    def objects(self):
        return tuple(range(self.level + 1))

    def hom(self, a, b):
        return enum_glob_hom(a, b)

    def compose(self, g, f):
        return compose_glob(g, f)

    def identity(self, a):
        return glob_identity(a)

    def params(self):
        return {"level": self.level}

    def encode_obj(self, a):
        return a

    def decode_obj(self, data):
        return int(data)

    def encode_map(self, f):
        return f.to_json()

    def decode_map(self, data):
        return GlobArrow.from_json(data)


class ThetaCategory(IndexCategory):
    """Theta_n (or its inert subcategory) restricted to objects of at most max_cells cells."""

    tag = "theta"

    def __init__(self, level: int, max_cells: int, inert_only: bool = False):
        self.level = level
        self.max_cells = max_cells
        self.inert_only = inert_only

    def objects(self):
        return enum_theta_objects(self.level, self.max_cells)

    def hom(self, a, b):
        return enum_inert_hom(a, b) if self.inert_only else enum_theta_hom(a, b)

    def compose(self, g, f):
        return compose_theta(g, f)

    def identity(self, a):
        return identity(a)

    def params(self):
        return {"level": self.level, "max_cells": self.max_cells, "inert_only": self.inert_only}

    def encode_obj(self, a):
        return encode_theta(a)

    def decode_obj(self, data):
        return decode_theta(data, self.level)

    def encode_map(self, f):
        return encode_morphism_full(f)

    def decode_map(self, data):
        return decode_morphism_full(data, self.level)


class ProductCategory(IndexCategory):
    """A finite product; objects and morphisms are tuples."""

    tag = "product"

    def __init__(self, factors: Sequence[IndexCategory], object_filter: Callable | None = None):
        self.factors = tuple(factors)
        self.object_filter = object_filter

    def objects(self):
        objs = product(*(c.objects() for c in self.factors))
        return tuple(o for o in objs if self.object_filter is None or self.object_filter(o))

    def hom(self, a, b):
        return tuple(product(*(c.hom(x, y) for c, x, y in zip(self.factors, a, b))))

    def compose(self, g, f):
        return tuple(c.compose(x, y) for c, x, y in zip(self.factors, g, f))

    def identity(self, a):
        return tuple(c.identity(x) for c, x in zip(self.factors, a))

    def src(self, f):
        return tuple(c.src(x) for c, x in zip(self.factors, f))

    def tgt(self, f):
        return tuple(c.tgt(x) for c, x in zip(self.factors, f))

    def params(self):
        return {"factors": [c.to_json() for c in self.factors]}

    def encode_obj(self, a):
        return [c.encode_obj(x) for c, x in zip(self.factors, a)]

    def decode_obj(self, data):
        return tuple(c.decode_obj(x) for c, x in zip(self.factors, data))

    def encode_map(self, f):
        return [c.encode_map(x) for c, x in zip(self.factors, f)]

    def decode_map(self, data):
        return tuple(c.decode_map(x) for c, x in zip(self.factors, data))


def category_from_json(data: dict) -> IndexCategory:
    tag = data.get("tag")
    if tag == "simplex":
        return SimplexCategory(int(data["max_n"]))
    if tag == "globular":
        return GlobularCategory(int(data["level"]))
    if tag == "theta":
        return ThetaCategory(int(data["level"]), int(data["max_cells"]),
                             bool(data.get("inert_only", False)))
    if tag == "product":
        return ProductCategory([category_from_json(c) for c in data["factors"]])
    raise MalformedError(f"unknown index category {data!r}")


@dataclass
class Functor:
    source: IndexCategory
    target: IndexCategory
    on_obj: Callable
    on_map: Callable
    name: str = ""

    def __call__(self, x, is_map: bool = False):
        return self.on_map(x) if is_map else self.on_obj(x)


# -- presheaves ------------------------------------------------------------------------

class FinPresheaf:
    """A presheaf of finite sets on the full subcategory spanned by ``support``.

    ``grade`` optionally assigns a size grade to every element; graded
    presheaves are truncations that keep exactly the elements of grade <= bound.
    """

    def __init__(self, index: IndexCategory, support: Sequence, value_fn: Callable,
                 action_fn: Callable, name: str = "", grade: Callable | None = None,
                 bound: int | None = None):
        self.index = index
        self.support = tuple(support)
        self._support_set = set(self.support)
        self._value_fn = value_fn
        self._action_fn = action_fn
        self._values: dict = {}
        self._actions: dict = {}
        self.name = name
        self.grade = grade
        self.bound = bound

    def supports(self, obj) -> bool:
        return obj in self._support_set

    def value(self, obj) -> tuple:
        found = self._values.get(obj)
        if found is None:
            if obj not in self._support_set:
                raise SupportError(f"{self.name or 'presheaf'} is not supported at {obj!r}")
            found = tuple(self._value_fn(obj))
            self._values[obj] = found
        return found

    def act(self, f) -> dict:
        """The map F(tgt f) -> F(src f) as a dict."""
        found = self._actions.get(f)
        if found is None:
            a, b = self.index.src(f), self.index.tgt(f)
            for obj in (a, b):
                if obj not in self._support_set:
                    raise SupportError(f"{self.name or 'presheaf'} is not supported at {obj!r}")
            found = self._action_fn(f)
            if not isinstance(found, dict):
                found = {x: found(x) for x in self.value(b)}
            self._actions[f] = found
        return found

    def apply(self, f, x):
        return self.act(f)[x]

    def materialize(self) -> "FinPresheaf":
        """A table-backed copy with every value and every action computed."""
        sets = {obj: self.value(obj) for obj in self.support}
        maps = {f: dict(self.act(f)) for f in self.index.arrows(self.support)}
        return FinPresheaf.from_tables(self.index, self.support, sets, maps,
                                       name=self.name, grade=self.grade, bound=self.bound)

    @classmethod
    def from_tables(cls, index: IndexCategory, support: Sequence, sets: dict, maps: dict,
                    name: str = "", grade: Callable | None = None,
                    bound: int | None = None) -> "FinPresheaf":
        def action(f):
            if f not in maps:
                raise SupportError(f"no action recorded for {f!r}")
            return maps[f]
        return cls(index, support, lambda o: sets[o], action, name, grade, bound)

    def to_json(self) -> dict:
        idx = self.index
        sets, maps = {}, {}
        for obj in self.support:
            sets[idx.obj_key(obj)] = [element_key(x) for x in self.value(obj)]
        for f in idx.arrows(self.support):
            table = self.act(f)
            maps[idx.map_key(f)] = {element_key(x): element_key(y)
                                    for x, y in sorted(table.items(), key=lambda kv: element_key(kv[0]))}
        return {"index": idx.to_json(), "support": [idx.obj_key(o) for o in self.support],
                "sets": sets, "maps": dict(sorted(maps.items()))}

    @classmethod
    def from_json(cls, data: dict) -> "FinPresheaf":
        """Element ids become opaque strings that dump back to the same document."""
        try:
            index = category_from_json(data["index"])
            support = [index.decode_obj(json.loads(k)) for k in data["support"]]
            sets = {index.decode_obj(json.loads(k)): tuple(OpaqueId(x) for x in v)
                    for k, v in data["sets"].items()}
            maps = {index.decode_map(json.loads(k)): {OpaqueId(x): OpaqueId(y) for x, y in v.items()}
                    for k, v in data["maps"].items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedError(f"malformed presheaf document: {exc}") from exc
        return cls.from_tables(index, support, sets, maps, name="loaded")


def constant_presheaf(index: IndexCategory, elements: Sequence, support: Sequence | None = None,
                      name: str = "constant") -> FinPresheaf:
    elements = tuple(elements)
    support = index.objects() if support is None else support
    return FinPresheaf(index, support, lambda o: elements, lambda f: {x: x for x in elements}, name)


def representable(index: IndexCategory, target, support: Sequence | None = None) -> FinPresheaf:
    """hom(-, target) with action by precomposition."""
    support = index.objects() if support is None else support
    return FinPresheaf(index, support, lambda o: index.hom(o, target),
                       lambda f: (lambda x: index.compose(x, f)), name=f"hom(-,{target!r})")


@dataclass
class ValidationReport:
    ok: bool
    violations: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "violations": self.violations}


def validate(F: FinPresheaf, objects: Sequence | None = None, max_violations: int = 20
             ) -> ValidationReport:
    """Exhaustive functoriality check on the supported fragment."""
    idx = F.index
    objs = F.support if objects is None else tuple(objects)
    out = []
    homs = {(a, b): idx.hom(a, b) for a in objs for b in objs}
    for a in objs:
        vals = F.value(a)
        table = F.act(idx.identity(a))
        if any(table.get(x) != x for x in vals):
            out.append({"kind": "identity", "object": repr(a)})
    for (a, b), fs in homs.items():
        target_vals = set(F.value(a))
        for f in fs:
            table = F.act(f)
            if set(table) != set(F.value(b)) or not set(table.values()) <= target_vals:
                out.append({"kind": "domain", "morphism": repr(f)})
    for a in objs:
        for b in objs:
            for c in objs:
                for f in homs[(a, b)]:
                    tf = F.act(f)
                    for g in homs[(b, c)]:
                        tg = F.act(g)
                        tgf = F.act(idx.compose(g, f))
                        for x in F.value(c):
                            if tf.get(tg.get(x)) != tgf.get(x):
                                out.append({"kind": "composition", "f": repr(f), "g": repr(g),
                                            "element": element_key(x)})
                                break
                        if len(out) >= max_violations:
                            return ValidationReport(False, out)
    return ValidationReport(not out, out)


def restrict_along(u: Functor, F: FinPresheaf, support: Sequence | None = None) -> FinPresheaf:
    """u^*F: a -> F(u a)."""
    if support is None:
        support = [a for a in u.source.objects() if F.supports(u.on_obj(a))]
    else:
        for a in support:
            if not F.supports(u.on_obj(a)):
                raise SupportError(f"{u.name or 'functor'} sends {a!r} outside the support")
    grade = None
    if F.grade is not None:
        grade = lambda a, x: F.grade(u.on_obj(a), x)  # noqa: E731
    return FinPresheaf(u.source, support, lambda a: F.value(u.on_obj(a)),
                       lambda f: F.act(u.on_map(f)), name=f"{u.name}*{F.name}",
                       grade=grade, bound=F.bound)


# -- finite limits ------------------------------------------------------------------------

@dataclass
class Diagram:
    """A finite diagram of finite sets; edge maps are dicts between node sets."""

    nodes: tuple
    sets: dict
    edges: list  # (source node, target node, dict)


@dataclass
class ConeSet:
    nodes: tuple
    families: tuple

    def __len__(self):
        return len(self.families)

    def __iter__(self):
        return iter(self.families)


def finite_limit(diagram: Diagram) -> ConeSet:
    """All compatible families, one element per node.

    Nodes that receive an edge from an earlier node are forced rather than
    enumerated, so the search only branches over the "top" nodes.
    """
    nodes = diagram.nodes
    incoming: dict = {n: [] for n in nodes}
    for s, t, m in diagram.edges:
        incoming[t].append((s, m))
    order = list(TopologicalSorter({n: [s for s, _ in incoming[n]] for n in nodes}).static_order())
    pos = {n: i for i, n in enumerate(nodes)}
    families = []
    fam: list = [None] * len(nodes)

    def rec(i: int):
        if i == len(order):
            families.append(tuple(fam))
            return
        node = order[i]
        inc = incoming[node]
        if inc:
            s0, m0 = inc[0]
            v = m0.get(fam[pos[s0]])
            if v is None:
                return
            for s, m in inc[1:]:
                if m.get(fam[pos[s]]) != v:
                    return
            fam[pos[node]] = v
            rec(i + 1)
        else:
            for v in diagram.sets[node]:
                fam[pos[node]] = v
                rec(i + 1)

    rec(0)
    return ConeSet(nodes, tuple(families))


# -- globular sets ---------------------------------------------------------------------

@dataclass(eq=False)
class GlobularSet:
    """A presheaf of finite sets on G_n given by its source and target maps.

    ``source[k]`` and ``target[k]`` (k >= 1) map X(C_k) to X(C_{k-1}).
    """

    level: int
    cells: tuple  # cells[k] is the tuple of k-dimensional elements
    source: tuple  # source[0] is an empty dict
    target: tuple
    name: str = ""

    def __post_init__(self):
        self.cells = tuple(tuple(c) for c in self.cells)
        if len(self.cells) != self.level + 1:
            raise MalformedError("need one cell set per dimension")
        self._act_cache: dict = {}

    def value(self, k: int) -> tuple:
        return self.cells[k]

    def act(self, g: GlobArrow, x):
        if g.is_identity:
            return x
        for i in range(g.tgt, g.src + 1, -1):
            x = self.source[i][x]
        return (self.source if g.polarity == "s" else self.target)[g.src + 1][x]

    def act_table(self, g: GlobArrow) -> dict:
        found = self._act_cache.get(g)
        if found is None:
            found = {x: self.act(g, x) for x in self.cells[g.tgt]}
            self._act_cache[g] = found
        return found

    def validate(self) -> list:
        problems = []
        for k in range(1, self.level + 1):
            for x in self.cells[k]:
                for table in (self.source[k], self.target[k]):
                    if table.get(x) not in set(self.cells[k - 1]):
                        problems.append(f"boundary of {x!r} is not a {k - 1}-cell")
        for k in range(2, self.level + 1):
            for x in self.cells[k]:
                for lower in (self.source[k - 1], self.target[k - 1]):
                    if lower[self.source[k][x]] != lower[self.target[k][x]]:
                        problems.append(f"globular relation fails at {x!r}")
        return problems

    def shift(self) -> "GlobularSet":
        """X(C_{.+1}) as a globular set of one level lower."""
        if self.level < 1:
            raise ValueError("cannot shift a level-0 globular set")
        return GlobularSet(self.level - 1, self.cells[1:], ({},) + self.source[2:],
                           ({},) + self.target[2:], name=f"shift({self.name})")

    def truncate(self, level: int) -> "GlobularSet":
        return GlobularSet(level, self.cells[:level + 1], self.source[:level + 1],
                           self.target[:level + 1], name=self.name)

    def as_presheaf(self) -> FinPresheaf:
        return FinPresheaf(GlobularCategory(self.level), range(self.level + 1),
                           lambda k: self.cells[k], lambda g: self.act_table(g), name=self.name)

    @classmethod
    def from_presheaf(cls, F: FinPresheaf, level: int) -> "GlobularSet":
        cells = tuple(F.value(k) for k in range(level + 1))
        src = ({},) + tuple(F.act(GlobArrow(k - 1, k, "s")) for k in range(1, level + 1))
        tgt = ({},) + tuple(F.act(GlobArrow(k - 1, k, "t")) for k in range(1, level + 1))
        return cls(level, cells, src, tgt, name=F.name)

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "cells": [[element_key(x) for x in c] for c in self.cells],
            "source": [{element_key(x): element_key(y) for x, y in self.source[k].items()}
                       for k in range(1, self.level + 1)],
            "target": [{element_key(x): element_key(y) for x, y in self.target[k].items()}
                       for k in range(1, self.level + 1)],
        }

    @classmethod
    def from_json(cls, data: dict) -> "GlobularSet":
        """Accepts the output of to_json as well as plain string/int ids."""
        try:
            level = int(data["level"])
            cells = tuple(tuple(_plain_id(x) for x in c) for c in data["cells"])
            src = ({},) + tuple({_plain_id(k): _plain_id(v) for k, v in m.items()}
                                for m in data["source"])
            tgt = ({},) + tuple({_plain_id(k): _plain_id(v) for k, v in m.items()}
                                for m in data["target"])
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedError(f"malformed globular set: {exc}") from exc
        gs = cls(level, cells, src, tgt, name="loaded")
        problems = gs.validate()
        if problems:
            raise MalformedError("; ".join(problems))
        return gs


def _plain_id(x):
    if isinstance(x, str):
        try:
            v = json.loads(x)
        except ValueError:
            return x
        return _tupleize(v)
    return _tupleize(x)


def _tupleize(v):
    if isinstance(v, list):
        return tuple(_tupleize(u) for u in v)
    return v


def one_cell_per_dim(level: int) -> GlobularSet:
    """The terminal globular set."""
    cells = tuple((f"c{k}",) for k in range(level + 1))
    src = ({},) + tuple({f"c{k}": f"c{k - 1}"} for k in range(1, level + 1))
    return GlobularSet(level, cells, src, src, name="terminal")


def graph(vertices: Sequence, edges: dict) -> GlobularSet:
    """A level-1 globular set; ``edges`` maps edge name to (source, target)."""
    names = tuple(edges)
    return GlobularSet(1, (tuple(vertices), names), ({}, {e: edges[e][0] for e in names}),
                       ({}, {e: edges[e][1] for e in names}), name="graph")


def enumerate_globular_sets(level: int, max_per_dim: int) -> list[GlobularSet]:
    """All globular sets with at most max_per_dim elements per dimension, up to isomorphism.

    Elements are named ``(k, i)``.  The canonical representative of an
    isomorphism class is the lexicographically least table under relabeling.
    """
    from itertools import permutations

    out = {}

    def extend(k, cells, src, tgt):
        if k > level:
            gs = GlobularSet(level, cells, src, tgt)
            key = _canonical_key(gs, permutations)
            out.setdefault(key, gs)
            return
        for size in range(max_per_dim + 1):
            names = tuple((k, i) for i in range(size))
            if k == 0:
                extend(1, (names,), ({},), ({},))
                continue
            lower = cells[k - 1]
            choices = list(product(lower, repeat=2 * size))
            for ch in choices:
                s = {names[i]: ch[2 * i] for i in range(size)}
                t = {names[i]: ch[2 * i + 1] for i in range(size)}
                if k >= 2 and any(src[k - 1][s[x]] != src[k - 1][t[x]]
                                  or tgt[k - 1][s[x]] != tgt[k - 1][t[x]] for x in names):
                    continue
                extend(k + 1, cells + (names,), src + (s,), tgt + (t,))

    extend(0, (), (), ())
    return [out[k] for k in sorted(out)]


def _canonical_key(gs: GlobularSet, permutations) -> tuple:
    best = None
    per_dim = [list(permutations(range(len(c)))) for c in gs.cells]
    for perms in product(*per_dim):
        rename = {}
        for k, perm in enumerate(perms):
            for i, x in enumerate(gs.cells[k]):
                rename[x] = perm[i]
        key = tuple(len(c) for c in gs.cells) + tuple(
            tuple(sorted((rename[x], rename[gs.source[k][x]], rename[gs.target[k][x]])
                         for x in gs.cells[k]))
            for k in range(1, gs.level + 1))
        if best is None or key < best:
            best = key
    return best


# -- Segal extension ----------------------------------------------------------------------

def cell_diagram(X, obj: Theta, cells: CellCategory | None = None) -> Diagram:
    """The diagram over (G_n/obj)^op of X on the cells of obj.

    X is a GlobularSet (indexed by dimension) or a presheaf on Theta_n whose
    values at globes are used.
    """
    cells = cells or cells_of(obj)
    if isinstance(X, GlobularSet):
        sets = {i: X.cells[d] for i, d in enumerate(cells.dims)}
        edges = [(b, a, X.act_table(g)) for (a, b), g in cells.arrows.items()]
    else:
        level = obj.level
        sets = {i: X.value(globe(d, level)) for i, d in enumerate(cells.dims)}
        edges = [(b, a, X.act(gamma_embed(g, level))) for (a, b), g in cells.arrows.items()]
    return Diagram(tuple(range(len(cells))), sets, edges)


def segal_extend(X: GlobularSet, bound: int) -> FinPresheaf:
    """Right Kan extension along gamma_n: F(I) = cell families of X over I.

    Defined on the inert subcategory; an inert f: I' -> I acts by reindexing
    each cell c of I' to the cell f o c of I.
    """
    level = X.level
    index = ThetaCategory(level, bound, inert_only=True)

    def value(obj):
        return finite_limit(cell_diagram(X, obj)).families

    def action(f):
        src_cells, tgt_cells = cells_of(f.src), cells_of(f.tgt)
        positions = [tgt_cells.index[compose_theta(f, c)] for c in src_cells.cells]
        return lambda fam: tuple(fam[p] for p in positions)

    return FinPresheaf(index, index.objects(), value, action, name=f"segal({X.name})")


# -- Segal and reduced checks ---------------------------------------------------------

@dataclass
class CheckReport:
    ok: bool
    checked: int = 0
    failures: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {"ok": self.ok, "checked": self.checked, "failures": self.failures}


def _segal_map_failures(F: FinPresheaf, obj: Theta) -> list:
    cells = cells_of(obj)
    limit = finite_limit(cell_diagram(F, obj, cells))
    families = set(limit.families)
    if F.grade is not None and F.bound is not None:
        level = obj.level
        families = {fam for fam in families
                    if family_grade(cells, [F.grade(globe(d, level), x)
                                            for d, x in zip(cells.dims, fam)]) <= F.bound}
    tables = [F.act(c) for c in cells.cells]
    seen = {}
    out = []
    for x in F.value(obj):
        if any(x not in t for t in tables):
            out.append({"object": repr(obj), "kind": "restriction undefined", "element": element_key(x)})
            continue
        fam = tuple(t[x] for t in tables)
        if fam in seen:
            out.append({"object": repr(obj), "kind": "not injective",
                        "elements": [element_key(seen[fam]), element_key(x)]})
        seen[fam] = x
        if fam not in families:
            out.append({"object": repr(obj), "kind": "not a cone", "element": element_key(x)})
    missing = families - set(seen)
    if missing:
        out.append({"object": repr(obj), "kind": "not surjective", "missing": len(missing)})
    return out


def _active_decomposition_failures(F: FinPresheaf, f: ThetaMap) -> list:
    """F(J) -> lim over cells a of I of F(J_a), through the inert parts i_a."""
    fib = active_fiber(f)
    nodes = tuple(range(len(fib.base)))
    sets = {a: F.value(fib.factors[a][0].tgt) for a in nodes}
    edges = [(b, a, F.act(fib.transitions[(a, b)])) for (a, b) in fib.base.arrows]
    limit = set(finite_limit(Diagram(nodes, sets, edges)).families)
    tables = [F.act(i) for _, i in fib.factors]
    image = {}
    for x in F.value(f.tgt):
        fam = tuple(t[x] for t in tables)
        if fam in image:
            return [{"map": repr(f), "kind": "not injective"}]
        image[fam] = x
    if set(image) != limit:
        return [{"map": repr(f), "kind": "not surjective" if set(image) < limit else "not a cone"}]
    return []


def is_segal(F: FinPresheaf, bound: int | None = None, check_active: bool = True) -> CheckReport:
    """Check the Segal map at every supported object of at most ``bound`` cells.

    For graded presheaves only limit families of total grade <= F.bound are
    expected.  When ``check_active`` is set and an ungraded F is defined on
    active maps, the decomposition F(J) = lim F(J_a) is also checked for
    every active f: I -> J between supported objects.
    """
    objs = [o for o in F.support if bound is None or o.cells <= bound]
    failures, checked = [], 0
    for obj in objs:
        try:
            failures.extend(_segal_map_failures(F, obj))
        except SupportError as exc:
            failures.append({"object": repr(obj), "kind": "support", "detail": str(exc)})
        checked += 1
    if check_active and F.grade is None and not getattr(F.index, "inert_only", True):
        for I in objs:
            for J in objs:
                for f in enum_active_hom(I, J):
                    failures.extend(_active_decomposition_failures(F, f))
                    checked += 1
    return CheckReport(not failures, checked, failures)


def is_reduced(F: FinPresheaf) -> CheckReport:
    """Constancy of the [0]-slices of a presheaf on a product category.

    For every slot l holding an ordinal-like factor (simplex or globular),
    whenever the l-th coordinate is the bottom object, every morphism that is
    the identity in slots <= l must act bijectively.  A presheaf on a single
    Theta_n is reduced with respect to (Set, Set) without conditions.
    """
    idx = F.index
    if not isinstance(idx, ProductCategory):
        return CheckReport(True, 0, [])
    failures, checked = [], 0
    for slot, factor in enumerate(idx.factors):
        if not isinstance(factor, (SimplexCategory, GlobularCategory)):
            continue
        objs = [o for o in F.support if o[slot] == 0]
        for a in objs:
            for b in objs:
                if a[:slot + 1] != b[:slot + 1]:
                    continue
                for f in idx.hom(a, b):
                    if any(f[i] != idx.factors[i].identity(a[i]) for i in range(slot + 1)):
                        continue
                    table = F.act(f)
                    checked += 1
                    if len(set(table.values())) != len(table) or len(table) != len(F.value(a)):
                        failures.append({"slot": slot, "morphism": idx.map_key(f)})
    return CheckReport(not failures, checked, failures)


# -- the inert left Kan extension ---------------------------------------------------------

def left_kan_inert(F: FinPresheaf, bound: int) -> FinPresheaf:
    """i_!F on Theta_n, truncated to summands whose active map has a target of <= bound cells.

    An element of the value at I is a pair (a, x) with a: I -> J active and
    x in F(J); its grade is the cell count of J.  A morphism g: I' -> I acts
    by factoring a o g = i' o a' and sending (a, x) to (a', F(i')(x)).
    """
    level = F.index.level
    index = ThetaCategory(level, bound)

    def value(obj):
        out = []
        for a in act_out(obj, bound).all():
            out.extend((a, x) for x in F.value(a.tgt))
        return out

    def action(g):
        def move(pair):
            a, x = pair
            a2, i2 = factorize_theta(compose_theta(a, g))
            return (a2, F.apply(i2, x))
        return move

    return FinPresheaf(index, index.objects(), value, action, name=f"lan({F.name})",
                       grade=lambda obj, pair: pair[0].tgt.cells, bound=bound)


# -- distributivity of pullbacks over coproducts ------------------------------------------

def pullback_of_coproducts(f: dict, g: dict, X: dict, Y: dict, phi: dict, psi: dict) -> bool:
    """Whether the canonical map

        coprod over (a, c) in A x_B C of X_a x_{U_b} Y_c
          -> (coprod X_a) x_{coprod U_b} (coprod Y_c)

    is a bijection.  ``f: A -> B`` and ``g: C -> B`` are dicts, ``X[a]`` and
    ``Y[c]`` are element lists, and ``phi[a]``, ``psi[c]`` map those elements
    into the fibre U_{f(a)} resp. U_{g(c)} (tagged by b in the total space).
    """
    left = set()
    for a, b in f.items():
        for c, b2 in g.items():
            if b != b2:
                continue
            for x in X[a]:
                for y in Y[c]:
                    if phi[a][x] == psi[c][y]:
                        left.add(((a, x), (c, y)))
    right = set()
    for a in f:
        for x in X[a]:
            u = (f[a], phi[a][x])
            for c in g:
                for y in Y[c]:
                    if (g[c], psi[c][y]) == u:
                        right.add(((a, x), (c, y)))
    return left == right
