"""The simplex category: finite ordinals [n] = {0 < 1 < ... < n} and monotone maps.

Objects are plain non-negative integers.  A map is stored densely as the
tuple of its values, which makes composition and classification direct.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb
from typing import NamedTuple

from .errors import CompositionError, MalformedError


class Kind(NamedTuple):
    inert: bool
    active: bool


@dataclass(frozen=True)
class SimplexMap:
    src: int
    tgt: int
    values: tuple[int, ...]

    def __post_init__(self):
        if self.src < 0 or self.tgt < 0:
            raise MalformedError(f"negative ordinal in {self!r}")
        if len(self.values) != self.src + 1:
            raise MalformedError(f"{self!r} needs {self.src + 1} values")
        prev = 0
        for v in self.values:
            if not prev <= v <= self.tgt:
                raise MalformedError(f"{self!r} is not a monotone map into [{self.tgt}]")
            prev = v

    def __call__(self, i: int) -> int:
        return self.values[i]

    def __repr__(self):
        return f"[{self.src}]->[{self.tgt}]{self.values}"

    def to_json(self) -> dict:
        return {"src": self.src, "tgt": self.tgt, "values": list(self.values)}

    @classmethod
    def from_json(cls, data) -> "SimplexMap":
        return cls(int(data["src"]), int(data["tgt"]), tuple(int(v) for v in data["values"]))


def identity_simplex(n: int) -> SimplexMap:
    return SimplexMap(n, n, tuple(range(n + 1)))


def compose_simplex(g: SimplexMap, f: SimplexMap) -> SimplexMap:
    """The composite g o f (first f, then g)."""
    if f.tgt != g.src:
        raise CompositionError(f"cannot compose {g!r} after {f!r}")
    return SimplexMap(f.src, g.tgt, tuple(g.values[v] for v in f.values))


def is_inert_values(values) -> bool:
    a = values[0]
    return all(v == a + i for i, v in enumerate(values))


def is_active_values(values, tgt: int) -> bool:
    return values[0] == 0 and values[-1] == tgt


def classify_simplex(f: SimplexMap) -> Kind:
    return Kind(is_inert_values(f.values), is_active_values(f.values, f.tgt))


def factorize_simplex(f: SimplexMap) -> tuple[SimplexMap, SimplexMap]:
    """Split f as inert o active; returns the pair (active, inert)."""
    lo, hi = f.values[0], f.values[-1]
    active = SimplexMap(f.src, hi - lo, tuple(v - lo for v in f.values))
    inert = SimplexMap(hi - lo, f.tgt, tuple(range(lo, hi + 1)))
    return active, inert


@lru_cache(maxsize=None)
def enum_hom_simplex(a: int, b: int) -> tuple[SimplexMap, ...]:
    """All monotone maps [a] -> [b], in lexicographic order of their values."""
    return tuple(SimplexMap(a, b, vals)
                 for vals in combinations_with_replacement(range(b + 1), a + 1))


def hom_count_simplex(a: int, b: int) -> int:
    return comb(a + b + 1, a + 1)


def face(n: int, i: int) -> SimplexMap:
    """The coface d_i : [n-1] -> [n] skipping i."""
    return SimplexMap(n - 1, n, tuple(v if v < i else v + 1 for v in range(n)))


def vertex(n: int, i: int) -> SimplexMap:
    """The map [0] -> [n] picking out i."""
    return SimplexMap(0, n, (i,))


def edge(n: int, r: int) -> SimplexMap:
    """The inert inclusion [1] -> [n] of the edge (r-1, r), for 1 <= r <= n."""
    return SimplexMap(1, n, (r - 1, r))


def spine_active(n: int) -> SimplexMap:
    """The active map [1] -> [n]."""
    return SimplexMap(1, n, (0, n))
