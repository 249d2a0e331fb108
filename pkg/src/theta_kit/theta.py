"""Joyal's categories Theta_n in their inductive wreath-product form.

An object of level n > 0 is ``[m](I_1, ..., I_m)`` with each ``I_i`` of
level n - 1; level 0 has the single object ``*``.  A morphism is an outer
monotone map ``phi: [m] -> [m']`` together with, for every ``0 < i <= m``
and ``phi(i-1) < j <= phi(i)``, a morphism ``psi[i][j]: I_i -> J_j`` one
level down.

Objects are hash-consed: structurally equal trees are the same Python
object, so equality of objects is identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement, product
from typing import Iterator, Sequence

from .errors import CompositionError, MalformedError
from .simplex import Kind, SimplexMap, is_active_values, is_inert_values


class Theta:
    """An object of Theta_n, i.e. a pasting diagram shape."""

    __slots__ = ("level", "children", "cells", "sort_key", "_hash", "__weakref__")
    _interned: dict = {}

    def __new__(cls, level: int, children: Sequence["Theta"] = ()):
        children = tuple(children)
        key = (level, children)
        found = cls._interned.get(key)
        if found is not None:
            return found
        if level < 0:
            raise MalformedError("level must be non-negative")
        if level == 0 and children:
            raise MalformedError("the level-0 object has no children")
        for c in children:
            if not isinstance(c, Theta) or c.level != level - 1:
                raise MalformedError(f"child {c!r} does not have level {level - 1}")
        obj = object.__new__(cls)
        obj.level = level
        obj.children = children
        if level == 0:
            obj.cells = 1
        else:
            obj.cells = len(children) + 1 + sum(c.cells for c in children)
        obj.sort_key = (obj.cells, len(children), tuple(c.sort_key for c in children))
        obj._hash = hash((level, tuple(c._hash for c in children)))
        return cls._interned.setdefault(key, obj)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other

    def __lt__(self, other):
        return (self.level, self.sort_key) < (other.level, other.sort_key)

    def __reduce__(self):
        return (Theta, (self.level, self.children))

    @property
    def arity(self) -> int:
        return len(self.children)

    def __repr__(self):
        if self.level == 0:
            return "*"
        m = len(self.children)
        if self.level == 1:
            return f"[{m}]"
        return f"[{m}](" + ",".join(repr(c) for c in self.children) + ")"


POINT = Theta(0)


def point(level: int) -> Theta:
    """The object [0]() of the given level (the point * at level 0)."""
    return Theta(level)


class ThetaMap:
    """A morphism of Theta_n in wreath form."""

    __slots__ = ("src", "tgt", "phi", "psi", "_hash", "_kind", "_key")

    def __init__(self, src: Theta, tgt: Theta, phi: Sequence[int] = (),
                 psi: Sequence[Sequence["ThetaMap"]] = (), check: bool = True):
        self.src = src
        self.tgt = tgt
        self.phi = tuple(phi)
        self.psi = tuple(tuple(row) for row in psi)
        if check:
            self._validate()
        self._hash = None
        self._kind = None
        self._key = None

    def _validate(self):
        src, tgt, phi, psi = self.src, self.tgt, self.phi, self.psi
        if src.level != tgt.level:
            raise MalformedError("source and target live on different levels")
        if src.level == 0:
            if phi or psi:
                raise MalformedError("the level-0 morphism carries no data")
            return
        m, mt = src.arity, tgt.arity
        if len(phi) != m + 1:
            raise MalformedError(f"outer map needs {m + 1} values, got {phi}")
        prev = 0
        for v in phi:
            if not prev <= v <= mt:
                raise MalformedError(f"outer map {phi} is not monotone into [{mt}]")
            prev = v
        if len(psi) != m:
            raise MalformedError("jagged matrix has the wrong number of rows")
        for i in range(1, m + 1):
            row = psi[i - 1]
            lo, hi = phi[i - 1], phi[i]
            if len(row) != hi - lo:
                raise MalformedError(f"row {i} must have {hi - lo} entries")
            for j, entry in zip(range(lo + 1, hi + 1), row):
                if not isinstance(entry, ThetaMap):
                    raise MalformedError(f"entry ({i},{j}) is not a morphism")
                if entry.src is not src.children[i - 1] or entry.tgt is not tgt.children[j - 1]:
                    raise MalformedError(f"entry ({i},{j}) has mismatched endpoints")

    @property
    def level(self) -> int:
        return self.src.level

    @property
    def outer(self) -> SimplexMap:
        return SimplexMap(self.src.arity, self.tgt.arity, self.phi)

    def component(self, i: int, j: int) -> "ThetaMap":
        """psi_ij for 1 <= i <= m and phi(i-1) < j <= phi(i)."""
        lo = self.phi[i - 1]
        if not lo < j <= self.phi[i]:
            raise IndexError(f"({i},{j}) is outside the jagged range")
        return self.psi[i - 1][j - lo - 1]

    def entries(self) -> Iterator[tuple[int, int, "ThetaMap"]]:
        for i, row in enumerate(self.psi, start=1):
            lo = self.phi[i - 1]
            for off, entry in enumerate(row):
                yield i, lo + off + 1, entry

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.src, self.tgt, self.phi, self.psi))
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, ThetaMap):
            return NotImplemented
        return (self.src is other.src and self.tgt is other.tgt
                and self.phi == other.phi and self.psi == other.psi)

    @property
    def sort_key(self):
        if self._key is None:
            self._key = (self.src.sort_key, self.tgt.sort_key, self.phi,
                         tuple(tuple(e.sort_key for e in row) for row in self.psi))
        return self._key

    def __lt__(self, other):
        return self.sort_key < other.sort_key

    def __reduce__(self):
        return (ThetaMap, (self.src, self.tgt, self.phi, self.psi, False))

    def __repr__(self):
        if self.level == 0:
            return "!"
        inner = ";".join(",".join(repr(e) for e in row) for row in self.psi)
        return f"<{''.join(map(str, self.phi))}|{inner}>"


POINT_MAP = ThetaMap(POINT, POINT)


# -- basic structure ----------------------------------------------------------

@lru_cache(maxsize=None)
def identity(obj: Theta) -> ThetaMap:
    if obj.level == 0:
        return POINT_MAP
    m = obj.arity
    return ThetaMap(obj, obj, tuple(range(m + 1)),
                    tuple((identity(c),) for c in obj.children), check=False)


def compose_theta(g: ThetaMap, f: ThetaMap) -> ThetaMap:
    """The composite g o f.

    The component at (i, j) is g_lj o f_il for the unique l with
    f.phi(i-1) < l <= f.phi(i) and g.phi(l-1) < j <= g.phi(l).
    """
    if f.tgt is not g.src:
        raise CompositionError(f"cannot compose {g!r} after {f!r}: {f.tgt!r} != {g.src!r}")
    return _compose(g, f)


def _compose(g: ThetaMap, f: ThetaMap) -> ThetaMap:
    if f.src.level == 0:
        return POINT_MAP
    gphi, fphi = g.phi, f.phi
    rows = []
    for i, frow in enumerate(f.psi, start=1):
        row = []
        lo = fphi[i - 1]
        for off, fl in enumerate(frow):
            l = lo + off + 1
            for gl in g.psi[l - 1]:
                row.append(_compose(gl, fl))
        rows.append(tuple(row))
    return ThetaMap(f.src, g.tgt, tuple(gphi[v] for v in fphi), tuple(rows), check=False)


def is_inert(f: ThetaMap) -> bool:
    return classify_theta(f).inert


def is_active(f: ThetaMap) -> bool:
    return classify_theta(f).active


def classify_theta(f: ThetaMap) -> Kind:
    if f._kind is None:
        if f.level == 0:
            f._kind = Kind(True, True)
        else:
            inert = is_inert_values(f.phi)
            active = is_active_values(f.phi, f.tgt.arity)
            for row in f.psi:
                for e in row:
                    k = classify_theta(e)
                    inert = inert and k.inert
                    active = active and k.active
            f._kind = Kind(inert, active)
    return f._kind


@lru_cache(maxsize=None)
def factorize_theta(f: ThetaMap) -> tuple[ThetaMap, ThetaMap]:
    """The unique factorization f = inert o active, returned as (active, inert)."""
    if f.level == 0:
        return POINT_MAP, POINT_MAP
    phi = f.phi
    lo, hi = phi[0], phi[-1]
    mids, act_rows, inert_parts = [], [], []
    for row in f.psi:
        act_row = []
        for e in row:
            a, i = factorize_theta(e)
            act_row.append(a)
            inert_parts.append(i)
            mids.append(a.tgt)
        act_rows.append(tuple(act_row))
    mid = Theta(f.level, mids)
    active = ThetaMap(f.src, mid, tuple(v - lo for v in phi), tuple(act_rows), check=False)
    inert = ThetaMap(mid, f.tgt, tuple(range(lo, hi + 1)),
                     tuple((i,) for i in inert_parts), check=False)
    return active, inert


# -- enumeration ----------------------------------------------------------------

def _sequences(pool: Sequence[Theta], m: int, budget: int):
    """Sequences of m objects from pool whose cell counts sum to at most budget."""
    if m == 0:
        yield ()
        return
    for first in pool:
        rest = budget - first.cells
        if rest < m - 1:
            break
        for tail in _sequences(pool, m - 1, rest):
            yield (first,) + tail


@lru_cache(maxsize=None)
def enum_theta_objects(level: int, max_cells: int) -> tuple[Theta, ...]:
    """All objects of Theta_level with at most max_cells cells, in canonical order."""
    if level < 0:
        raise ValueError("level must be non-negative")
    if max_cells < 1:
        return ()
    if level == 0:
        return (POINT,)
    out = []
    m = 0
    while m + 1 <= max_cells:
        budget = max_cells - m - 1
        pool = enum_theta_objects(level - 1, budget) if m else ()
        for kids in _sequences(pool, m, budget):
            out.append(Theta(level, kids))
        m += 1
    out.sort(key=lambda o: o.sort_key)
    return tuple(out)


@lru_cache(maxsize=None)
def count_theta_objects(level: int, max_cells: int) -> int:
    """Number of objects with at most max_cells cells, by a generating-function count."""
    return sum(_exact_counts(level, max_cells))


@lru_cache(maxsize=None)
def _exact_counts(level: int, max_cells: int) -> tuple[int, ...]:
    # entry s = number of objects with exactly s cells
    counts = [0] * (max_cells + 1)
    if max_cells < 1:
        return tuple(counts)
    if level == 0:
        counts[1] = 1
        return tuple(counts)
    child = _exact_counts(level - 1, max_cells)
    power = [0] * (max_cells + 1)
    power[0] = 1  # generating function of sequences of length m, starting at m = 0
    m = 0
    while m + 1 <= max_cells:
        for s, c in enumerate(power):
            if c and s + m + 1 <= max_cells:
                counts[s + m + 1] += c
        nxt = [0] * (max_cells + 1)
        for s, c in enumerate(power):
            if c:
                for t, d in enumerate(child):
                    if d and s + t <= max_cells:
                        nxt[s + t] += c * d
        power = nxt
        m += 1
    return tuple(counts)


@lru_cache(maxsize=None)
def enum_theta_objects_window(level: int, arities: tuple[int, ...]) -> tuple[Theta, ...]:
    """Objects whose arity at nesting depth d is at most arities[d]."""
    if len(arities) < level:
        raise ValueError("need one arity bound per level")
    if level == 0:
        return (POINT,)
    pool = enum_theta_objects_window(level - 1, arities[1:])
    out = [Theta(level, kids) for m in range(arities[0] + 1) for kids in product(pool, repeat=m)]
    out.sort(key=lambda o: o.sort_key)
    return tuple(out)


def in_window(obj: Theta, arities: Sequence[int]) -> bool:
    if obj.level == 0:
        return True
    return obj.arity <= arities[0] and all(in_window(c, arities[1:]) for c in obj.children)


def _hom_generic(src: Theta, tgt: Theta, outer_maps, sub) -> tuple[ThetaMap, ...]:
    m = src.arity
    out = []
    for phi in outer_maps:
        slots = []
        for i in range(1, m + 1):
            for j in range(phi[i - 1] + 1, phi[i] + 1):
                slots.append((i, sub(src.children[i - 1], tgt.children[j - 1])))
        for choice in product(*(s[1] for s in slots)):
            rows = [[] for _ in range(m)]
            for (i, _), e in zip(slots, choice):
                rows[i - 1].append(e)
            out.append(ThetaMap(src, tgt, phi, tuple(tuple(r) for r in rows), check=False))
    return tuple(out)


def _check_levels(src: Theta, tgt: Theta):
    if src.level != tgt.level:
        raise ValueError(f"{src!r} and {tgt!r} live on different levels")


@lru_cache(maxsize=None)
def enum_theta_hom(src: Theta, tgt: Theta) -> tuple[ThetaMap, ...]:
    """All morphisms src -> tgt, in a deterministic order."""
    _check_levels(src, tgt)
    if src.level == 0:
        return (POINT_MAP,)
    outers = combinations_with_replacement(range(tgt.arity + 1), src.arity + 1)
    return _hom_generic(src, tgt, outers, enum_theta_hom)


@lru_cache(maxsize=None)
def enum_active_hom(src: Theta, tgt: Theta) -> tuple[ThetaMap, ...]:
    _check_levels(src, tgt)
    if src.level == 0:
        return (POINT_MAP,)
    m, mt = src.arity, tgt.arity
    if m == 0:
        outers = [(0,)] if mt == 0 else []
    else:
        outers = [(0,) + mid + (mt,)
                  for mid in combinations_with_replacement(range(mt + 1), m - 1)]
    return _hom_generic(src, tgt, outers, enum_active_hom)


@lru_cache(maxsize=None)
def enum_inert_hom(src: Theta, tgt: Theta) -> tuple[ThetaMap, ...]:
    _check_levels(src, tgt)
    if src.level == 0:
        return (POINT_MAP,)
    m, mt = src.arity, tgt.arity
    outers = [tuple(range(a, a + m + 1)) for a in range(mt - m + 1)]
    return _hom_generic(src, tgt, outers, enum_inert_hom)


@lru_cache(maxsize=None)
def hom_count(src: Theta, tgt: Theta) -> int:
    """|hom(src, tgt)| by the recursive product formula, without listing maps."""
    if src.level == 0:
        return 1
    m = src.arity
    total = 0
    for phi in combinations_with_replacement(range(tgt.arity + 1), m + 1):
        term = 1
        for i in range(1, m + 1):
            for j in range(phi[i - 1] + 1, phi[i] + 1):
                term *= hom_count(src.children[i - 1], tgt.children[j - 1])
        total += term
    return total


# -- distinguished objects and maps --------------------------------------------

@lru_cache(maxsize=None)
def globe(k: int, level: int) -> Theta:
    """The k-cell C_k as an object of Theta_level: k nested [1]'s around a point."""
    if not 0 <= k <= level:
        raise ValueError(f"no {k}-cell in level {level}")
    if k == 0:
        return Theta(level)
    return Theta(level, (globe(k - 1, level - 1),))


def globe_dim(obj: Theta) -> int | None:
    """k if obj is the globe C_k, otherwise None."""
    k = 0
    while obj.level > 0 and obj.arity == 1:
        obj = obj.children[0]
        k += 1
    return k if obj.arity == 0 else None


def globe_active(tgt: Theta, k: int | None = None) -> ThetaMap:
    """The unique active map C_k -> tgt (tgt must lie in the image of iota_k)."""
    level = tgt.level
    if k is None:
        k = level
    if level == 0:
        return POINT_MAP
    if k == 0:
        if tgt.arity != 0:
            raise ValueError(f"no active map from a point to {tgt!r}")
        return identity(tgt)
    m = tgt.arity
    row = tuple(globe_active(c, k - 1) for c in tgt.children)
    return ThetaMap(globe(k, level), tgt, (0, m), (row,), check=False)


def terminal_map(obj: Theta) -> ThetaMap:
    """The unique map obj -> [0]() (which is terminal in Theta_n, n >= 1)."""
    if obj.level == 0:
        return POINT_MAP
    return ThetaMap(obj, Theta(obj.level), (0,) * (obj.arity + 1),
                    ((),) * obj.arity, check=False)


def column_inclusion(obj: Theta, r: int) -> ThetaMap:
    """The inert inclusion [1](I_r) -> [m](I_1, ..., I_m) of the r-th column."""
    col = obj.children[r - 1]
    return ThetaMap(Theta(obj.level, (col,)), obj, (r - 1, r), ((identity(col),),), check=False)


def vertex_inclusion(obj: Theta, r: int) -> ThetaMap:
    """The inert inclusion [0]() -> obj of the r-th vertex."""
    return ThetaMap(Theta(obj.level), obj, (r,), (), check=False)


# -- structural functors ---------------------------------------------------------

def functor_iota(x):
    """iota_n: Theta_{n-1} -> Theta_n on an object or a morphism."""
    if isinstance(x, Theta):
        return _iota_obj(x)
    return _iota_map(x)


@lru_cache(maxsize=None)
def _iota_obj(obj: Theta) -> Theta:
    if obj.level == 0:
        return Theta(1)
    return Theta(obj.level + 1, tuple(_iota_obj(c) for c in obj.children))


@lru_cache(maxsize=None)
def _iota_map(f: ThetaMap) -> ThetaMap:
    if f.level == 0:
        return ThetaMap(Theta(1), Theta(1), (0,), (), check=False)
    return ThetaMap(_iota_obj(f.src), _iota_obj(f.tgt), f.phi,
                    tuple(tuple(_iota_map(e) for e in row) for row in f.psi), check=False)


def iota_to(x, level: int):
    """The composite iota_k^level applied to an object or morphism of level k."""
    cur = x.level
    if level < cur:
        raise ValueError("iota only raises the level")
    for _ in range(level - cur):
        x = functor_iota(x)
    return x


def uniota(x, level: int):
    """Inverse of iota_to on its image: bring x down to the given level."""
    if isinstance(x, Theta):
        return _uniota_obj(x, level)
    return _uniota_map(x, level)


def _uniota_obj(obj: Theta, level: int) -> Theta:
    if obj.level == level:
        return obj
    if level == 0:
        if obj.arity != 0:
            raise ValueError(f"{obj!r} is not in the image of iota")
        return POINT
    if level > obj.level:
        raise ValueError("uniota only lowers the level")
    return Theta(level, tuple(_uniota_obj(c, level - 1) for c in obj.children))


def _uniota_map(f: ThetaMap, level: int) -> ThetaMap:
    if f.level == level:
        return f
    src, tgt = _uniota_obj(f.src, level), _uniota_obj(f.tgt, level)
    if level == 0:
        return POINT_MAP
    return ThetaMap(src, tgt, f.phi,
                    tuple(tuple(_uniota_map(e, level - 1) for e in row) for row in f.psi),
                    check=False)


def functor_sigma(x):
    """sigma_k = [1](-): Theta_{k-1} -> Theta_k on an object or a morphism."""
    if isinstance(x, Theta):
        return Theta(x.level + 1, (x,))
    return ThetaMap(functor_sigma(x.src), functor_sigma(x.tgt), (0, 1), ((x,),), check=False)


def functor_tau(a, x):
    """tau_{1,n}: Delta x Theta_n -> Theta_{n+1}.

    On objects ``([m], I) -> [m](I, ..., I)``; on a pair ``(phi, f)`` every
    entry of the jagged matrix is f.
    """
    if isinstance(x, Theta):
        return Theta(x.level + 1, (x,) * a)
    phi: SimplexMap = a
    f: ThetaMap = x
    rows = tuple((f,) * (phi.values[i] - phi.values[i - 1]) for i in range(1, phi.src + 1))
    return ThetaMap(functor_tau(phi.src, f.src), functor_tau(phi.tgt, f.tgt),
                    phi.values, rows, check=False)


def tau_iterated(outer: Sequence, x):
    """tau_{k,n}: Delta^k x Theta_n -> Theta_{n+k}, built by iterating tau_{1,-}.

    ``outer`` is a sequence of k ordinals (for objects) or k simplex maps (for
    morphisms); the first entry is the outermost.
    """
    if not outer:
        return x
    return functor_tau(outer[0], tau_iterated(outer[1:], x))


# -- active maps ----------------------------------------------------------------

@dataclass
class GradedActiveSet:
    """Active maps out of ``source`` graded by the cell count of their target."""

    source: Theta
    bound: int
    entries: dict[int, tuple[ThetaMap, ...]] = field(default_factory=dict)

    def all(self) -> tuple[ThetaMap, ...]:
        return tuple(a for g in sorted(self.entries) for a in self.entries[g])

    def __len__(self):
        return sum(len(v) for v in self.entries.values())

    def restrict(self, bound: int) -> "GradedActiveSet":
        return GradedActiveSet(self.source, bound,
                               {g: v for g, v in self.entries.items() if g <= bound})


@lru_cache(maxsize=None)
def act_out(source: Theta, max_cells: int) -> GradedActiveSet:
    """All active maps out of source whose target has at most max_cells cells."""
    entries: dict[int, list] = {}
    for tgt in enum_theta_objects(source.level, max_cells):
        maps = enum_active_hom(source, tgt)
        if maps:
            entries.setdefault(tgt.cells, []).extend(maps)
    return GradedActiveSet(source, max_cells, {g: tuple(v) for g, v in sorted(entries.items())})


def act_pullback(f: ThetaMap, a: ThetaMap) -> ThetaMap:
    """f^*: Act(I) -> Act(I') for f: I' -> I; the active part of a o f."""
    if a.src is not f.tgt:
        raise CompositionError(f"{a!r} does not start where {f!r} ends")
    return factorize_theta(_compose(a, f))[0]


# -- JSON encoding ----------------------------------------------------------------

def encode_theta(obj: Theta):
    """Nested lists: '*' for the level-0 point, a list of children otherwise."""
    if obj.level == 0:
        return "*"
    return [encode_theta(c) for c in obj.children]


def infer_level(data) -> int | None:
    """Nesting depth of an encoded object, or None when it is ambiguous."""
    if data == "*":
        return 0
    if not isinstance(data, list):
        raise MalformedError(f"cannot decode {data!r} as an object")
    levels = {infer_level(c) for c in data}
    levels.discard(None)
    if len(levels) > 1:
        raise MalformedError(f"children of {data!r} have different depths")
    if not levels:
        return None
    return levels.pop() + 1


def decode_theta(data, level: int | None = None) -> Theta:
    if level is None:
        level = infer_level(data)
        if level is None:
            raise MalformedError(f"level of {data!r} is ambiguous; pass it explicitly")
    if level == 0:
        if data != "*":
            raise MalformedError(f"expected '*' at level 0, got {data!r}")
        return POINT
    if not isinstance(data, list):
        raise MalformedError(f"expected a list at level {level}, got {data!r}")
    return Theta(level, tuple(decode_theta(c, level - 1) for c in data))


def encode_map(f: ThetaMap):
    if f.level == 0:
        return "*"
    return {"phi": {"src": f.src.arity, "tgt": f.tgt.arity, "values": list(f.phi)},
            "psi": [[encode_map(e) for e in row] for row in f.psi]}


def decode_map(data, src: Theta, tgt: Theta) -> ThetaMap:
    if src.level == 0:
        if data != "*":
            raise MalformedError("expected '*' for a level-0 morphism")
        return POINT_MAP
    phi = tuple(int(v) for v in data["phi"]["values"])
    rows = []
    for i, row in enumerate(data["psi"], start=1):
        lo = phi[i - 1]
        rows.append(tuple(decode_map(e, src.children[i - 1], tgt.children[lo + off])
                          for off, e in enumerate(row)))
    return ThetaMap(src, tgt, phi, tuple(rows))


def encode_morphism_full(f: ThetaMap) -> dict:
    return {"src": encode_theta(f.src), "tgt": encode_theta(f.tgt), "map": encode_map(f)}


def decode_morphism_full(data, level: int) -> ThetaMap:
    src = decode_theta(data["src"], level)
    tgt = decode_theta(data["tgt"], level)
    return decode_map(data["map"], src, tgt)
