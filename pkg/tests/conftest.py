from hypothesis import strategies as st

from theta_kit.globular import cells_of
from theta_kit.oracles import Path
from theta_kit.simplex import SimplexMap, enum_hom_simplex
from theta_kit.theta import (
    POINT, Theta, column_inclusion, enum_theta_hom, enum_theta_objects, vertex_inclusion,
)

THETA2_SMALL = enum_theta_objects(2, 7)
THETA1_SMALL = enum_theta_objects(1, 9)


@st.composite
def simplex_maps(draw, max_n: int = 5):
    a = draw(st.integers(0, max_n))
    b = draw(st.integers(0, max_n))
    return draw(st.sampled_from(enum_hom_simplex(a, b)))


@st.composite
def composable_simplex(draw, length: int = 3, max_n: int = 4):
    objs = [draw(st.integers(0, max_n)) for _ in range(length + 1)]
    return [draw(st.sampled_from(enum_hom_simplex(objs[i], objs[i + 1]))) for i in range(length)]


@st.composite
def theta_chain(draw, objects=THETA2_SMALL, length: int = 2):
    """A composable chain f_1, ..., f_length (f_1 first) between small Theta objects."""
    maps = []
    src = draw(st.sampled_from(objects))
    for _ in range(length):
        tgt = draw(st.sampled_from(objects))
        homs = enum_theta_hom(src, tgt)
        if not homs:
            tgt = src
            homs = enum_theta_hom(src, tgt)
        maps.append(draw(st.sampled_from(homs)))
        src = tgt
    return maps


def as_path(element) -> Path:
    """Read an element of T_1X(C_1) as a path of X."""
    J, fam = element
    cells = cells_of(J)
    start = fam[cells.index[vertex_inclusion(J, 0)]]
    return Path(start, tuple(fam[cells.index[column_inclusion(J, r)]] for r in range(1, J.arity + 1)))


def path_element(X, start, edges) -> tuple:
    """The element of T_1X(C_1) spelling out a path of the level-1 globular set X."""
    J = Theta(1, (POINT,) * len(edges))
    cells = cells_of(J)
    fam = [None] * len(cells)
    fam[cells.index[vertex_inclusion(J, 0)]] = here = start
    for r, e in enumerate(edges, 1):
        fam[cells.index[column_inclusion(J, r)]] = e
        here = X.target[1][e]
        fam[cells.index[vertex_inclusion(J, r)]] = here
    return J, tuple(fam)


__all__ = ["as_path", "path_element", "SimplexMap", "simplex_maps", "composable_simplex", "theta_chain",
           "THETA1_SMALL", "THETA2_SMALL"]
