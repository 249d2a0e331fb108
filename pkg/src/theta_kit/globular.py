"""The globular category G_n, cell categories G_n/I and their certificates.

G_n has objects C_0, ..., C_n generated by s_i, t_i: C_{i-1} -> C_i subject
to the globular relations.  Every hom-set C_j -> C_k with j < k has exactly
two elements, distinguished by the first (lowest) generator of any word
representing them, so arrows are stored in that normal form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import invariant_factors

from .errors import CompositionError, MalformedError
from .theta import (
    Theta, ThetaMap, compose_theta, encode_map, encode_theta, enum_inert_hom,
    factorize_theta, functor_sigma, globe, identity, is_active,
)

SOURCE, TARGET = "s", "t"


@dataclass(frozen=True, order=True)
class GlobArrow:
    """Normal form of an arrow C_src -> C_tgt; polarity is None for identities."""

    src: int
    tgt: int
    polarity: str | None = None

    def __post_init__(self):
        if self.src > self.tgt or self.src < 0:
            raise MalformedError(f"no arrow C_{self.src} -> C_{self.tgt}")
        if (self.src == self.tgt) != (self.polarity is None):
            raise MalformedError("identities have no polarity and only identities lack one")
        if self.polarity not in (None, SOURCE, TARGET):
            raise MalformedError(f"unknown polarity {self.polarity!r}")

    @property
    def is_identity(self) -> bool:
        return self.polarity is None

    def __repr__(self):
        if self.polarity is None:
            return f"id{self.src}"
        return f"{self.polarity}{self.src}>{self.tgt}"

    def key(self) -> str:
        return repr(self)

    def to_json(self):
        return {"src": self.src, "tgt": self.tgt, "polarity": self.polarity}

    @classmethod
    def from_json(cls, data) -> "GlobArrow":
        return cls(int(data["src"]), int(data["tgt"]), data.get("polarity"))


def glob_identity(k: int) -> GlobArrow:
    return GlobArrow(k, k)


def generator(i: int, polarity: str) -> GlobArrow:
    """s_i or t_i : C_{i-1} -> C_i."""
    return GlobArrow(i - 1, i, polarity)


def compose_glob(g: GlobArrow, f: GlobArrow) -> GlobArrow:
    """g o f; the polarity of a composite is that of its first generator."""
    if f.tgt != g.src:
        raise CompositionError(f"cannot compose {g!r} after {f!r}")
    if f.is_identity:
        return g
    if g.is_identity:
        return f
    return GlobArrow(f.src, g.tgt, f.polarity)


def enum_glob_hom(j: int, k: int) -> tuple[GlobArrow, ...]:
    if j > k:
        return ()
    if j == k:
        return (glob_identity(j),)
    return (GlobArrow(j, k, SOURCE), GlobArrow(j, k, TARGET))


def word_of(arrow: GlobArrow) -> tuple[str, ...]:
    """A representing word, lowest generator first, higher letters taken to be s."""
    if arrow.is_identity:
        return ()
    return (arrow.polarity,) + (SOURCE,) * (arrow.tgt - arrow.src - 1)


# -- the embedding gamma_n : G_n -> Theta_{n,i} ----------------------------------------

@lru_cache(maxsize=None)
def _gamma_generator(i: int, polarity: str, level: int) -> ThetaMap:
    if i == 1:
        return ThetaMap(globe(0, level), globe(1, level), (0,) if polarity == SOURCE else (1,), ())
    return functor_sigma(_gamma_generator(i - 1, polarity, level - 1))


def gamma_embed(x, level: int):
    """gamma_n on an object index k (giving C_k) or on a GlobArrow."""
    if isinstance(x, int):
        return globe(x, level)
    return _gamma_arrow(x, level)


@lru_cache(maxsize=None)
def _gamma_arrow(arrow: GlobArrow, level: int) -> ThetaMap:
    if arrow.tgt > level:
        raise ValueError(f"{arrow!r} does not live in G_{level}")
    out = identity(globe(arrow.src, level))
    for offset, letter in enumerate(word_of(arrow)):
        out = compose_theta(_gamma_generator(arrow.src + offset + 1, letter, level), out)
    return out


# -- finite posets and their nerves ------------------------------------------------

@dataclass
class HomologyReport:
    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]
    chain_counts: tuple[int, ...]

    @property
    def contractible(self) -> bool:
        return (bool(self.betti) and self.betti[0] == 1 and all(b == 0 for b in self.betti[1:])
                and not any(self.torsion))


def _chains(n: int, above: Sequence[frozenset], max_dim: int) -> list[list[tuple[int, ...]]]:
    levels = [[(x,) for x in range(n)]]
    for _ in range(max_dim + 1):
        nxt = [c + (y,) for c in levels[-1] for y in sorted(above[c[-1]])]
        if not nxt:
            break
        levels.append(nxt)
    return levels


def poset_homology(n: int, less: Sequence[frozenset], max_dim: int = 3) -> HomologyReport:
    """Integral homology of the nerve of a finite poset in degrees <= max_dim.

    ``less[x]`` is the set of elements strictly above x.
    """
    chains = _chains(n, less, max_dim)
    index = [{c: i for i, c in enumerate(level)} for level in chains]
    ranks, factors = [], []
    # boundary d_q : C_q -> C_{q-1}, q >= 1
    for q in range(1, len(chains)):
        rows, cols = len(chains[q - 1]), len(chains[q])
        mat = [[0] * cols for _ in range(rows)]
        for col, c in enumerate(chains[q]):
            for i in range(len(c)):
                mat[index[q - 1][c[:i] + c[i + 1:]]][col] += (-1) ** i
        inv = [abs(int(v)) for v in invariant_factors(Matrix(mat), domain=ZZ)] if rows and cols else []
        nonzero = [v for v in inv if v != 0]
        ranks.append(len(nonzero))
        factors.append(tuple(v for v in nonzero if v != 1))
    betti, torsion = [], []
    for q in range(min(max_dim, len(chains) - 1) + 1):
        dim_c = len(chains[q])
        rank_out = ranks[q - 1] if q >= 1 else 0
        rank_in = ranks[q] if q < len(ranks) else 0
        betti.append(dim_c - rank_out - rank_in)
        torsion.append(factors[q] if q < len(factors) else ())
    for q in range(len(betti), max_dim + 1):
        betti.append(0)
        torsion.append(())
    return HomologyReport(tuple(betti), tuple(torsion), tuple(len(c) for c in chains))


# -- cell categories ------------------------------------------------------------------

@dataclass(eq=False)
class CellCategory:
    """G_n/I: the inert maps from globes into I and the globular arrows between them."""

    base: Theta
    cells: tuple[ThetaMap, ...]
    dims: tuple[int, ...]
    index: dict = field(repr=False)
    arrows: dict = field(repr=False)  # (a, b) -> GlobArrow with cells[b] o gamma(arrow) == cells[a]
    above: tuple[frozenset, ...] = field(repr=False)  # strictly greater cells

    def __len__(self):
        return len(self.cells)

    def leq(self, a: int, b: int) -> bool:
        return a == b or b in self.above[a]

    def arrow(self, a: int, b: int) -> GlobArrow | None:
        if a == b:
            return glob_identity(self.dims[a])
        return self.arrows.get((a, b))

    def homology(self, max_dim: int = 3) -> HomologyReport:
        return poset_homology(len(self.cells), self.above, max_dim)

    def to_json(self) -> dict:
        return {
            "base": encode_theta(self.base),
            "cells": [{"dim": d, "map": encode_map(c)} for d, c in zip(self.dims, self.cells)],
            "arrows": [{"from": a, "to": b, "arrow": g.key()}
                       for (a, b), g in sorted(self.arrows.items())],
        }


@lru_cache(maxsize=None)
def cells_of(obj: Theta) -> CellCategory:
    level = obj.level
    cells, dims = [], []
    for k in range(level + 1):
        for c in enum_inert_hom(globe(k, level), obj):
            cells.append(c)
            dims.append(k)
    index = {c: i for i, c in enumerate(cells)}
    arrows = {}
    for b, cb in enumerate(cells):
        for d in range(dims[b]):
            for pol in (SOURCE, TARGET):
                g = GlobArrow(d, dims[b], pol)
                a = index[compose_theta(cb, gamma_embed(g, level))]
                if (a, b) in arrows:
                    raise AssertionError(f"two arrows between cells {a} and {b} of {obj!r}")
                arrows[(a, b)] = g
    above = [set() for _ in cells]
    for a, b in arrows:
        above[a].add(b)
    return CellCategory(obj, tuple(cells), tuple(dims), index, arrows,
                        tuple(frozenset(s) for s in above))


def nerve_contractibility(cat: CellCategory, max_dim: int = 3) -> HomologyReport:
    """Homology of the nerve of a cell category; trivial homology stands in for
    weak contractibility of these finite, loop-free categories."""
    return cat.homology(max_dim)


def mobius_weights(cat: CellCategory) -> tuple[int, ...]:
    """w(b) = sum over a >= b of mu(b, a) for the cell poset.

    For an active map I -> K pulled back to K_a along each cell a of I,
    |cells(K)| = sum_a w(a) |cells(K_a)|.
    """
    weights = []
    for b in range(len(cat.cells)):
        mu = {b: 1}
        # a chain-compatible order: fewer elements above means later
        for a in sorted(cat.above[b], key=lambda x: -len(cat.above[x])):
            mu[a] = -sum(v for c, v in mu.items() if cat.leq(c, a))
        weights.append(sum(mu.values()))
    return tuple(weights)


def family_grade(cat: CellCategory, component_grades: Sequence[int]) -> int:
    """Cell count of the target glued from per-cell targets of the given sizes."""
    return sum(w * g for w, g in zip(mobius_weights(cat), component_grades))


# -- the fibration G_n/f for an active f --------------------------------------------

@dataclass(eq=False)
class ActiveFiberCategory:
    f: ThetaMap
    base: CellCategory
    target: CellCategory
    factors: tuple[tuple[ThetaMap, ThetaMap], ...]  # (f_a, i_a) for each base cell a
    fibers: tuple[CellCategory, ...]
    transitions: dict  # (a, b) -> inert J_a -> J_b for each base arrow a <= b
    objects: tuple[tuple[int, int], ...]
    image: tuple[int, ...]

    def leq(self, x: tuple[int, int], y: tuple[int, int]) -> bool:
        (a, c), (b, d) = x, y
        if not self.base.leq(a, b):
            return False
        moved = compose_theta(self.transitions[(a, b)], self.fibers[a].cells[c])
        return self.fibers[b].leq(self.fibers[b].index[moved], d)

    def image_of(self, x: tuple[int, int]) -> int:
        return self.image[self.objects.index(x)]


def active_fiber(f: ThetaMap) -> ActiveFiberCategory:
    if not is_active(f):
        raise ValueError(f"{f!r} is not active")
    base, target = cells_of(f.src), cells_of(f.tgt)
    factors = tuple(factorize_theta(compose_theta(f, a)) for a in base.cells)
    fibers = tuple(cells_of(fa.tgt) for fa, _ in factors)
    transitions = {}
    level = f.level
    for a in range(len(base)):
        transitions[(a, a)] = identity(factors[a][0].tgt)
    for (a, b), g in base.arrows.items():
        fa, ia = factors[a]
        fb, ib = factors[b]
        act, inert = factorize_theta(compose_theta(fb, gamma_embed(g, level)))
        if act != fa or compose_theta(ib, inert) != ia:
            raise AssertionError(f"transition {a}->{b} does not recover the factorization")
        transitions[(a, b)] = inert
    objects, image = [], []
    for a, cat in enumerate(fibers):
        ia = factors[a][1]
        for c, cell in enumerate(cat.cells):
            objects.append((a, c))
            image.append(target.index[compose_theta(ia, cell)])
    return ActiveFiberCategory(f, base, target, factors, fibers, transitions,
                               tuple(objects), tuple(image))


@dataclass
class CofinalityCertificate:
    """Per target cell e: the initial object of (G_n/f)_{e/} when one exists,
    otherwise a minimal representative together with the comma's homology."""

    f: ThetaMap
    initial: dict  # target cell index -> initial object of the comma category
    representatives: dict  # target cell index -> some object of the comma category
    failures: list  # cells whose comma category has no initial object
    contractible: dict  # target cell index -> homology-trivial comma category

    @property
    def ok(self) -> bool:
        return not self.failures

    @property
    def weakly_contractible(self) -> bool:
        return all(self.contractible.values())

    def to_json(self) -> dict:
        return {
            "initial": {str(e): list(x) for e, x in sorted(self.initial.items())},
            "failures": self.failures,
            "weakly_contractible": self.weakly_contractible,
        }


def comma_under(fib: ActiveFiberCategory, e: int) -> list[tuple[int, int]]:
    """Objects x of G_n/f with an arrow e -> image(x) in G_n/J."""
    return [x for x, img in zip(fib.objects, fib.image) if fib.target.leq(e, img)]


def check_cofinal_via_initial(f: ThetaMap, fiber: ActiveFiberCategory | None = None
                              ) -> CofinalityCertificate:
    """For each cell e of the target, look for an initial object of (G_n/f)_{e/}.

    Comma categories lacking one are still tested for trivial nerve homology,
    which is the property cofinality actually requires.
    """
    fib = fiber or active_fiber(f)
    initial, reps, failures, contractible = {}, {}, [], {}
    for e in range(len(fib.target)):
        comma = comma_under(fib, e)
        found = [x for x in comma if all(fib.leq(x, y) for y in comma)]
        if len(found) == 1:
            initial[e] = reps[e] = found[0]
            contractible[e] = True
            continue
        pos = {x: i for i, x in enumerate(comma)}
        above = [frozenset(pos[y] for y in comma if y != x and fib.leq(x, y)) for x in comma]
        contractible[e] = poset_homology(len(comma), above).contractible
        minimal = [x for x in comma if not any(y != x and fib.leq(y, x) for y in comma)]
        if minimal:
            reps[e] = minimal[0]
        failures.append({"cell": e, "comma_size": len(comma),
                         "minimal": [list(x) for x in minimal],
                         "contractible": contractible[e]})
    return CofinalityCertificate(f, initial, reps, failures, contractible)


# -- Lambda_j ------------------------------------------------------------------------

@dataclass
class LambdaPoset:
    """Pairs (a, b) with 0 <= a <= b <= j, b - a <= 1, ordered by
    (a, b) <= (a', b') iff a <= a' <= b' <= b, with its map into G_n/I for
    I = [j](C_{n-1}, ..., C_{n-1})."""

    j: int
    level: int
    base: Theta
    elements: tuple[tuple[int, int], ...]
    inclusion: tuple[int, ...]

    def leq(self, p, q) -> bool:
        (a, b), (a2, b2) = p, q
        return a <= a2 <= b2 <= b

    def strictly_above(self) -> tuple[frozenset, ...]:
        n = len(self.elements)
        return tuple(frozenset(y for y in range(n) if y != x
                               and self.leq(self.elements[x], self.elements[y]))
                     for x in range(n))

    def homology(self, max_dim: int = 3) -> HomologyReport:
        return poset_homology(len(self.elements), self.strictly_above(), max_dim)

    def reverses_order(self) -> bool:
        cells = cells_of(self.base)
        return all(cells.leq(self.inclusion[y], self.inclusion[x])
                   for x, p in enumerate(self.elements) for y, q in enumerate(self.elements)
                   if self.leq(p, q))

    def comma_reports(self, max_dim: int = 3) -> list[HomologyReport]:
        """For each cell x of I, homology of {p : x <= u(p)} (induced order)."""
        cells = cells_of(self.base)
        out = []
        for x in range(len(cells)):
            members = [i for i, c in enumerate(self.inclusion) if cells.leq(x, c)]
            pos = {m: k for k, m in enumerate(members)}
            above = tuple(frozenset(pos[y] for y in members if y != m
                                    and self.leq(self.elements[m], self.elements[y]))
                          for m in members)
            out.append(poset_homology(len(members), above, max_dim))
        return out


def lambda_poset(j: int, level: int = 2) -> LambdaPoset:
    if level < 1:
        raise ValueError("Lambda_j needs level >= 1")
    top = globe(level - 1, level - 1)
    base = Theta(level, (top,) * j)
    cells = cells_of(base)
    elements = tuple([(a, a) for a in range(j + 1)] + [(a, a + 1) for a in range(j)])
    inclusion = []
    for a, b in elements:
        if a == b:
            inclusion.append(cells.index[ThetaMap(Theta(level), base, (a,), ())])
        else:
            cell = ThetaMap(globe(level, level), base, (a, b), ((identity(top),),))
            inclusion.append(cells.index[cell])
    return LambdaPoset(j, level, base, elements, tuple(inclusion))


# -- comparison functors alpha_n, beta_n ----------------------------------------------

def alpha_object(i: int) -> tuple[int, int]:
    """alpha_n(C_i) in G_1 x G_n."""
    return (0, 0) if i == 0 else (1, i - 1)


def alpha_arrow(g: GlobArrow) -> tuple[GlobArrow, GlobArrow]:
    """alpha_n on the representing word of g.

    s_1, t_1 go to the first factor; s_i, t_i for i > 1 go to s_{i-1},
    t_{i-1} on the second factor.
    """
    s0, s1 = alpha_object(g.src)
    t0, t1 = alpha_object(g.tgt)
    if g.is_identity:
        return glob_identity(s0), glob_identity(s1)
    if g.src >= 1:
        return glob_identity(1), GlobArrow(g.src - 1, g.tgt - 1, g.polarity)
    first = GlobArrow(0, 1, g.polarity)
    second = glob_identity(0) if t1 == 0 else GlobArrow(0, t1, SOURCE)
    return first, second


def beta_object(obj: tuple[int, int]) -> int:
    a, i = obj
    return 0 if a == 0 else i + 1


def beta_arrow(pair: tuple[GlobArrow, GlobArrow]) -> GlobArrow:
    f, g = pair
    src, tgt = beta_object((f.src, g.src)), beta_object((f.tgt, g.tgt))
    if f.tgt == 0:
        return glob_identity(0)
    if f.src == 0:
        return GlobArrow(0, tgt, f.polarity)
    if g.is_identity:
        return glob_identity(src)
    return GlobArrow(g.src + 1, g.tgt + 1, g.polarity)


def gamma_1n_object(i: int, n: int) -> tuple[int, Theta]:
    """(gamma_1 x gamma_n)(alpha_n(C_i)) as an object of Delta x Theta_n."""
    a, k = alpha_object(i)
    return a, globe(k, n)


def all_glob_arrows(level: int) -> list[GlobArrow]:
    return [g for j in range(level + 1) for k in range(j, level + 1) for g in enum_glob_hom(j, k)]


def product_compose(g: tuple[GlobArrow, GlobArrow], f: tuple[GlobArrow, GlobArrow]):
    return compose_glob(g[0], f[0]), compose_glob(g[1], f[1])


def globe_pairs(level: int) -> list[tuple[int, int]]:
    return [(a, b) for a, b in combinations(range(level + 1), 2)]
