"""Comparison of Theta_{n+1}-models with Delta x Theta_n-models.

Pulling back along tau: ([m], I) -> [m](I, ..., I) turns a reduced Segal
presheaf on Theta_{n+1} into one on Delta x Theta_n.  This module checks
the transferred Segal conditions, reconstructs a Theta_{n+1}-presheaf from
a Delta x Theta_n one, verifies both roundtrips with explicit witnesses,
and compares F_{n+1}X(C_k) with the iterated formula for F_{1,n} through
an explicit grade-preserving bijection.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

from .errors import MalformedError, SupportError
from .globular import alpha_object, beta_arrow, beta_object
from .monad import chain_of, free_value, iterated_free_value
from .presheaf import (
    CheckReport, Diagram, FinPresheaf, Functor, GlobularCategory, GlobularSet, ProductCategory,
    SimplexCategory, ThetaCategory, element_key, finite_limit, is_reduced, is_segal,
    restrict_along, validate,
)
from .simplex import SimplexMap, edge, identity_simplex, vertex
from .theta import (
    POINT, POINT_MAP, Theta, ThetaMap, column_inclusion, functor_tau, identity, in_window,
    terminal_map, vertex_inclusion,
)


# -- transport along beta ----------------------------------------------------------------

def beta_functor(n: int) -> Functor:
    """beta_n: G_1 x G_n -> G_{n+1}."""
    source = ProductCategory([GlobularCategory(1), GlobularCategory(n)])
    return Functor(source, GlobularCategory(n + 1), beta_object, beta_arrow, name="beta")


@dataclass
class ComparisonInstance:
    n: int
    X: GlobularSet
    bound: int
    transported: FinPresheaf = field(repr=False)

    def constancy_failures(self) -> list:
        base = set(self.X.cells[0])
        return [i for i in range(self.n + 1) if set(self.transported.value((0, i))) != base]


def comparison_instance(X: GlobularSet, bound: int) -> ComparisonInstance:
    if X.level < 1:
        raise ValueError("needs a globular set of level >= 1")
    n = X.level - 1
    Y = restrict_along(beta_functor(n), X.as_presheaf())
    inst = ComparisonInstance(n, X, bound, Y)
    if inst.constancy_failures():
        raise MalformedError("transported presheaf is not constant on (C_0, -)")
    return inst


# -- pulling back along tau ------------------------------------------------------------

def tau_support(n: int, bound: int) -> ProductCategory:
    """Delta x Theta_n restricted to pairs whose tau-image has <= bound cells."""
    fits = lambda o: functor_tau(o[0], o[1]).cells <= bound  # noqa: E731
    return ProductCategory([SimplexCategory(bound - 1), ThetaCategory(n, bound)], object_filter=fits)


def tau_functor(n: int, bound: int) -> Functor:
    index = tau_support(n, bound)
    return Functor(index, ThetaCategory(n + 1, bound), lambda o: functor_tau(o[0], o[1]),
                   lambda f: functor_tau(f[0], f[1]), name="tau")


def tau_pullback(F: FinPresheaf, bound: int | None = None) -> FinPresheaf:
    """tau*F on Delta x Theta_n, supported where tau lands inside the support of F."""
    level = F.index.level
    if level < 1:
        raise ValueError("tau pulls back from Theta_{n+1} with n >= 0")
    bound = bound if bound is not None else max(o.cells for o in F.support)
    u = tau_functor(level - 1, bound)
    support = [o for o in u.source.objects() if F.supports(u.on_obj(o))]
    missing = [o for o in u.source.objects() if not F.supports(u.on_obj(o))]
    if missing:
        raise SupportError(f"tau sends {missing[0]!r} outside the support of {F.name}")
    return restrict_along(u, F, support)


def _double_simplex(bound: int) -> ProductCategory:
    """Pairs (a, b) with both [b] and [a]([b], ..., [b]) of at most bound cells."""
    def fits(o):
        inner = functor_tau(o[1], POINT)
        return inner.cells <= bound and functor_tau(o[0], inner).cells <= bound
    return ProductCategory([SimplexCategory(bound - 1), SimplexCategory(bound - 1)], object_filter=fits)


def tau_iterated_pullback_direct(F: FinPresheaf, bound: int) -> FinPresheaf:
    """Pullback of a Theta_2-presheaf along tau_{2,0} written out in one step.

    Objects of Delta x Delta are pairs (a, b) standing for [a]([b], ..., [b]).
    """
    index = _double_simplex(bound)

    def on_obj(o):
        return Theta(2, (Theta(1, (POINT,) * o[1]),) * o[0])

    def on_map(f):
        outer, inner = f
        rows = tuple((POINT_MAP,) * (inner.values[i] - inner.values[i - 1]) for i in range(1, inner.src + 1))
        g = ThetaMap(Theta(1, (POINT,) * inner.src), Theta(1, (POINT,) * inner.tgt),
                     inner.values, rows, check=False)
        return ThetaMap(on_obj((outer.src, inner.src)), on_obj((outer.tgt, inner.tgt)), outer.values,
                        tuple((g,) * (outer.values[i] - outer.values[i - 1]) for i in range(1, outer.src + 1)),
                        check=False)

    u = Functor(index, F.index, on_obj, on_map, name="tau20")
    return restrict_along(u, F, index.objects())


def tau_iterated_pullback_steps(F: FinPresheaf, bound: int) -> FinPresheaf:
    """The same pullback as two single steps: along tau_{1,1}, then id x tau_{1,0}."""
    first = tau_pullback(F, bound)
    index = _double_simplex(bound)
    u = Functor(index, first.index, lambda o: (o[0], functor_tau(o[1], POINT)),
                lambda f: (f[0], functor_tau(f[1], POINT_MAP)), name="id x tau10")
    return restrict_along(u, first, index.objects())


def same_presheaf_data(F: FinPresheaf, G: FinPresheaf) -> bool:
    """Exact equality of supports, values and action tables."""
    if list(F.support) != list(G.support) or F.index.objects() != G.index.objects():
        return False
    for o in F.support:
        if list(F.value(o)) != list(G.value(o)):
            return False
    for f in F.index.arrows(F.support):
        if F.act(f) != G.act(f):
            return False
    return True


# -- Segal transfer -----------------------------------------------------------------------

@dataclass
class TransferReport:
    constancy: CheckReport
    fiber_products: CheckReport
    slice: CheckReport

    @property
    def ok(self) -> bool:
        return self.constancy.ok and self.fiber_products.ok and self.slice.ok

    def to_json(self) -> dict:
        return {"ok": self.ok, "constancy": self.constancy.to_json(),
                "fiber_products": self.fiber_products.to_json(), "slice": self.slice.to_json()}


def check_constancy(Y: FinPresheaf) -> CheckReport:
    """Every map ([0], I') -> ([0], I) with identity outer part acts bijectively."""
    fails, checked = [], 0
    objs = [o for o in Y.support if o[0] == 0]
    for a in objs:
        for b in objs:
            for f in Y.index.hom(a, b):
                checked += 1
                table = Y.act(f)
                if len(set(table.values())) != len(table) or len(table) != len(Y.value(a)):
                    fails.append({"morphism": Y.index.map_key(f)})
    return CheckReport(not fails, checked, fails)


def spine_diagram(Y: FinPresheaf, m: int, I: Theta) -> tuple[Diagram, list]:
    """The iterated fiber product Y([1],I) x_{Y([0],I)} ... x_{Y([0],I)} Y([1],I).

    Nodes 0..m are the vertices, nodes m+1..2m the edges.  Returns the
    diagram and the restriction maps from Y([m], I) to every node.
    """
    ident = identity(I)
    nodes = tuple(range(2 * m + 1))
    sets = {v: Y.value((0, I)) for v in range(m + 1)}
    sets.update({m + r: Y.value((1, I)) for r in range(1, m + 1)})
    edges = []
    for r in range(1, m + 1):
        edges.append((m + r, r - 1, Y.act((vertex(1, 0), ident))))
        edges.append((m + r, r, Y.act((vertex(1, 1), ident))))
    restrictions = [Y.act((vertex(m, v), ident)) for v in range(m + 1)]
    restrictions += [Y.act((edge(m, r), ident)) for r in range(1, m + 1)]
    return Diagram(nodes, sets, edges), restrictions


def check_fiber_products(Y: FinPresheaf) -> CheckReport:
    fails, checked = [], 0
    for m, I in Y.support:
        if m < 2:
            continue
        diagram, restrictions = spine_diagram(Y, m, I)
        limit = set(finite_limit(diagram).families)
        if Y.grade is not None and Y.bound is not None:
            # glued size: edges counted once, shared inner vertices subtracted
            limit = {fam for fam in limit
                     if sum(Y.grade((1, I), fam[m + r]) for r in range(1, m + 1))
                     - sum(Y.grade((0, I), fam[v]) for v in range(1, m)) <= Y.bound}
        image = {}
        checked += 1
        for x in Y.value((m, I)):
            image.setdefault(tuple(t[x] for t in restrictions), []).append(x)
        if set(image) != limit or any(len(v) > 1 for v in image.values()):
            fails.append({"object": [m, repr(I)],
                          "kind": "not injective" if any(len(v) > 1 for v in image.values())
                          else "not surjective" if set(image) < limit else "not a cone"})
    return CheckReport(not fails, checked, fails)


def one_slice(Y: FinPresheaf) -> FinPresheaf:
    """Y([1], -) as a presheaf on Theta_n."""
    theta = Y.index.factors[1]
    one = identity_simplex(1)
    objs = [I for a, I in Y.support if a == 1]
    grade = None if Y.grade is None else (lambda I, x: Y.grade((1, I), x))
    return FinPresheaf(theta, objs, lambda I: Y.value((1, I)), lambda f: Y.act((one, f)),
                       name=f"{Y.name}[1]", grade=grade, bound=Y.bound)


def segal_transfer_check(F: FinPresheaf, bound: int | None = None) -> TransferReport:
    """Conditions (1)-(3) for tau*F: constancy of the [0]-slice, the Delta-direction
    Segal maps, and Segal-ness of the [1]-slice."""
    Y = tau_pullback(F, bound)
    return transfer_conditions(Y)


def transfer_conditions(Y: FinPresheaf) -> TransferReport:
    slice_ = one_slice(Y)
    seg = is_segal(slice_)
    red = is_reduced(slice_)
    both = CheckReport(seg.ok and red.ok, seg.checked + red.checked, seg.failures + red.failures)
    return TransferReport(check_constancy(Y), check_fiber_products(Y), both)


# -- the unit comparison ------------------------------------------------------------------

@dataclass
class ComparisonReport:
    k: int
    grades: dict
    witness: list
    problems: list

    @property
    def ok(self) -> bool:
        return not self.problems and all(g["bijection"] for g in self.grades.values())

    def to_json(self) -> dict:
        return {"k": self.k,
                "grades": {str(s): dict(v) for s, v in sorted(self.grades.items())},
                "witness": self.witness, "ok": self.ok, "problems": self.problems}


def _chain_in_window(entry, window) -> bool:
    j, chain = entry
    if j == 0:
        return True
    return j <= window[0] and all(in_window(L, window[1:]) for L, _ in chain)


def unit_comparison(inst: ComparisonInstance, k: int, bound: int | None = None,
                    window: tuple | None = None) -> ComparisonReport:
    """Compare F_{n+1}X(C_k) with the iterated formula at alpha(C_k).

    Side A is free_value over Theta_{n+1}; side B is iterated_free_value of
    the beta-transported presheaf.  The map A -> B splits a shape
    [j](L_1, ..., L_j) into its columns.  ``window`` optionally restricts
    both sides to shapes whose arities are bounded level by level.
    """
    n = inst.n
    if not 0 <= k <= n + 1:
        raise ValueError(f"k must lie in [0, {n + 1}]")
    bound = inst.bound if bound is None else bound
    lhs = free_value(inst.X, k, bound)
    slot, dim = alpha_object(k)
    rhs = iterated_free_value(inst.transported, dim, bound, slot=slot)
    lhs_items = [(J.cells, (J, fam)) for J, fam in lhs.all()]
    rhs_items = [(g, e) for g in rhs.entries for e in rhs.entries[g]]
    if window is not None:
        lhs_items = [(g, e) for g, e in lhs_items if in_window(e[0], window)]
        rhs_items = [(g, e) for g, e in rhs_items if _chain_in_window(e, window)]
    rhs_grade = {e: g for g, e in rhs_items}
    grades: dict = {}
    witness, problems, hit = [], [], {}
    for g, a in lhs_items:
        b = chain_of(inst.X, a)
        witness.append([element_key(a), element_key(b)])
        row = grades.setdefault(g, {"lhs": 0, "rhs": 0, "bijection": True})
        row["lhs"] += 1
        if rhs_grade.get(b) != g:
            problems.append({"grade": g, "element": element_key(a), "image": element_key(b),
                             "kind": "image missing or grade changed"})
            row["bijection"] = False
        elif b in hit:
            problems.append({"grade": g, "element": element_key(a), "kind": "not injective"})
            row["bijection"] = False
        hit[b] = a
    for g, e in rhs_items:
        row = grades.setdefault(g, {"lhs": 0, "rhs": 0, "bijection": True})
        row["rhs"] += 1
        if e not in hit:
            problems.append({"grade": g, "image": element_key(e), "kind": "not surjective"})
            row["bijection"] = False
    for row in grades.values():
        row["bijection"] = row["bijection"] and row["lhs"] == row["rhs"]
    witness.sort()
    return ComparisonReport(k, dict(sorted(grades.items())), witness, problems)


# -- reconstruction -----------------------------------------------------------------------

class Reconstruction:
    """X(I) for I = [m](I_1, ..., I_m): vertex labels v_0..v_m in Y([0], pt) and
    column labels y_r in Y([1], I_r) with matching endpoints."""

    def __init__(self, Y: FinPresheaf, bound: int):
        if not isinstance(Y.index, ProductCategory):
            raise ValueError("expects a presheaf on Delta x Theta_n")
        self.Y = Y
        self.n = Y.index.factors[1].level
        self.bound = bound
        self.pt = Theta(self.n)
        self._endpoint = lru_cache(maxsize=None)(self._endpoint_table)
        self._segal_inverse = lru_cache(maxsize=None)(self._segal_inverse_table)
        self._constancy = lru_cache(maxsize=None)(self._constancy_inverse)

    def _constancy_inverse(self, I: Theta) -> dict:
        """Y([0], I) -> Y([0], pt), inverse to restriction along I -> pt."""
        table = self.Y.act((identity_simplex(0), terminal_map(I)))
        inv = {v: k for k, v in table.items()}
        if len(inv) != len(table) or len(inv) != len(self.Y.value((0, I))):
            raise MalformedError(f"Y([0], -) is not constant at {I!r}")
        return inv

    def _endpoint_table(self, I: Theta, which: int) -> dict:
        inv = self._constancy(I)
        restrict = self.Y.act((vertex(1, which), identity(I)))
        return {y: inv[restrict[y]] for y in self.Y.value((1, I))}

    def _segal_inverse_table(self, p: int, I: Theta) -> dict:
        ident = identity(I)
        tables = [self.Y.act((edge(p, r), ident)) for r in range(1, p + 1)]
        out = {}
        for w in self.Y.value((p, I)):
            key = tuple(t[w] for t in tables)
            if key in out:
                raise MalformedError(f"Segal map of Y at ([{p}], {I!r}) is not injective")
            out[key] = w
        return out

    def value(self, obj: Theta) -> list:
        Y, m = self.Y, obj.arity
        base = Y.value((0, self.pt))
        if m == 0:
            return [((v,), ()) for v in base]
        out = []

        def rec(r, verts, cols):
            if r > m:
                out.append((tuple(verts), tuple(cols)))
                return
            I = obj.children[r - 1]
            starts, ends = self._endpoint(I, 0), self._endpoint(I, 1)
            for y in Y.value((1, I)):
                if starts[y] == verts[-1]:
                    rec(r + 1, verts + [ends[y]], cols + [y])

        for v in base:
            rec(1, [v], [])
        return out

    def act(self, f: ThetaMap):
        Y = self.Y
        plan = []
        for i in range(1, f.src.arity + 1):
            lo, hi = f.phi[i - 1], f.phi[i]
            p, I = hi - lo, f.src.children[i - 1]
            if p == 0:
                plan.append(("degenerate", hi, Y.act((SimplexMap(1, 0, (0, 0)), terminal_map(I)))))
            elif p == 1:
                plan.append(("column", hi, Y.act((identity_simplex(1), f.psi[i - 1][0]))))
            else:
                moves = [Y.act((identity_simplex(1), f.psi[i - 1][j])) for j in range(p)]
                plan.append(("glue", lo, moves, self._segal_inverse(p, I),
                             Y.act((SimplexMap(1, p, (0, p)), identity(I)))))

        def move(elem):
            verts, cols = elem
            new_verts = tuple(verts[a] for a in f.phi)
            new_cols = []
            for step in plan:
                if step[0] == "degenerate":
                    new_cols.append(step[2][verts[step[1]]])
                elif step[0] == "column":
                    new_cols.append(step[2][cols[step[1] - 1]])
                else:
                    _, lo, moves, inverse, long_edge = step
                    key = tuple(mv[cols[lo + j]] for j, mv in enumerate(moves))
                    new_cols.append(long_edge[inverse[key]])
            return new_verts, tuple(new_cols)

        return move

    def presheaf(self) -> FinPresheaf:
        index = ThetaCategory(self.n + 1, self.bound)
        return FinPresheaf(index, index.objects(), self.value, self.act,
                           name=f"reconstruct({self.Y.name})")


def reconstruct_needs(bound: int) -> int:
    """Largest tau-cell count of a ([p], J) pair used when reconstructing up to ``bound``.

    A source column [1](J) has J.cells <= bound - 2, and it spreads over at
    most p <= (bound - 1) // 2 target columns.
    """
    return max([bound] + [p + 1 + p * (bound - 2) for p in range(2, (bound - 1) // 2 + 1)])


def reconstruct(Y: FinPresheaf, bound: int) -> FinPresheaf:
    return Reconstruction(Y, bound).presheaf()


@dataclass
class RoundtripReport:
    direction: str
    ok: bool
    checked_objects: int
    checked_maps: int
    witness: dict
    problems: list

    def to_json(self) -> dict:
        return {"direction": self.direction, "ok": self.ok, "objects": self.checked_objects,
                "maps": self.checked_maps, "witness": self.witness, "problems": self.problems}


def _witness_check(direction, src: FinPresheaf, tgt: FinPresheaf, objects, maps, comp) -> RoundtripReport:
    witness, problems = {}, []
    for o in objects:
        key = src.index.obj_key(o)
        img = {x: comp(o, x) for x in src.value(o)}
        targets = set(tgt.value(o))
        if len(set(img.values())) != len(img) or set(img.values()) != targets:
            problems.append({"object": key, "kind": "not a bijection",
                             "sizes": [len(img), len(targets)]})
        witness[key] = sorted([element_key(x), element_key(y)] for x, y in img.items())
    for f in maps:
        a = src.index.src(f)
        there = src.act(f)
        back = tgt.act(f)
        for x in src.value(src.index.tgt(f)):
            if comp(a, there[x]) != back[comp(src.index.tgt(f), x)]:
                problems.append({"morphism": src.index.map_key(f), "element": element_key(x)})
                break
    return RoundtripReport(direction, not problems, len(objects), len(maps), witness, problems)


def roundtrip_from_theta(F: FinPresheaf, bound: int, support_bound: int | None = None) -> RoundtripReport:
    """reconstruct(tau*F) = F on Theta_{n+1} objects of <= bound cells."""
    support_bound = support_bound or reconstruct_needs(bound)
    Y = tau_pullback(F, support_bound)
    R = reconstruct(Y, bound)
    objects = [o for o in R.support if F.supports(o)]

    def comp(I, x):
        verts = tuple(F.apply(vertex_inclusion(I, r), x) for r in range(I.arity + 1))
        cols = tuple(F.apply(column_inclusion(I, r), x) for r in range(1, I.arity + 1))
        return verts, cols

    maps = list(R.index.arrows(objects))
    report = _witness_check("theta", F, R, objects, maps, comp)
    validity = validate(R, objects)
    if not validity.ok:
        report.ok = False
        report.problems.extend(validity.violations)
    return report


def roundtrip_from_product(Y: FinPresheaf, bound: int, support_bound: int | None = None) -> RoundtripReport:
    """tau*(reconstruct Y) = Y on pairs whose tau-image has <= bound cells.

    Y must be supported far enough for reconstruction (see reconstruct_needs).
    """
    R = reconstruct(Y, bound)
    Y2 = tau_pullback(R, bound)
    objects = list(Y2.support)
    rec = Reconstruction(Y, bound)

    def comp(o, y):
        m, I = o
        ident = identity(I)
        inv = rec._constancy(I)
        verts = tuple(inv[Y.apply((vertex(m, r), ident), y)] for r in range(m + 1))
        cols = tuple(Y.apply((edge(m, r), ident), y) for r in range(1, m + 1))
        return verts, cols

    maps = list(Y2.index.arrows(objects))
    return _witness_check("product", Y, Y2, objects, maps, comp)
