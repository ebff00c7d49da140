"""Finite abelian groups in invariant-factor form.

A group is a chain Z/d1 x ... x Z/dr with d1 | d2 | ... and every di >= 2
(the empty chain is the trivial group).  Elements are coordinate vectors
reduced mod the respective factors.  On top of the raw arithmetic this
module decides subgroup membership exactly, finds the minimal multiple of
an element lying in a given subgroup together with a canonical relation
witnessing it, and computes invariant-factor presentations of subgroups
generated by concrete points of a black-box ambient group.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Sequence, TypeVar

from mwlab.arith import divisors
from mwlab.errors import InputError, ResourceLimitError
from mwlab.intlinalg import IntMatrix, invert_unimodular, smith_normal_form, solve_mod

DEFAULT_SUBGROUP_CAP = 10**7

T = TypeVar("T", bound=Hashable)


@dataclass(frozen=True)
class Element:
    """Coordinates of a group element, one slot per invariant factor."""

    coords: tuple[int, ...]


@dataclass(frozen=True)
class FiniteAbelianGroup:
    """Z/d1 x ... x Z/dr with d1 | d2 | ... and each di >= 2."""

    invariant_factors: tuple[int, ...]

    def __post_init__(self) -> None:
        factors = tuple(int(d) for d in self.invariant_factors)
        object.__setattr__(self, "invariant_factors", factors)
        for d in factors:
            if d < 2:
                raise InputError("invariant factors must be >= 2")
        for a, b in zip(factors, factors[1:]):
            if b % a:
                raise InputError("invariant factors must form a divisibility chain")

    @property
    def rank(self) -> int:
        return len(self.invariant_factors)

    def order(self) -> int:
        return math.prod(self.invariant_factors)

    def exponent(self) -> int:
        return self.invariant_factors[-1] if self.invariant_factors else 1

    def zero(self) -> Element:
        return Element((0,) * self.rank)

    def element(self, coords: Sequence[int]) -> Element:
        """Build an element, canonically reducing each coordinate."""
        if len(coords) != self.rank:
            raise InputError(
                f"expected {self.rank} coordinates, got {len(coords)}"
            )
        return Element(tuple(c % d for c, d in zip(coords, self.invariant_factors)))

    def check(self, x: Element) -> None:
        if len(x.coords) != self.rank:
            raise InputError("element has the wrong number of coordinates")
        for c, d in zip(x.coords, self.invariant_factors):
            if not 0 <= c < d:
                raise InputError(f"coordinate {c} out of range for Z/{d}")

    def add(self, x: Element, y: Element) -> Element:
        return Element(
            tuple((a + b) % d for a, b, d in zip(x.coords, y.coords, self.invariant_factors))
        )

    def neg(self, x: Element) -> Element:
        return Element(tuple((-a) % d for a, d in zip(x.coords, self.invariant_factors)))

    def scale(self, n: int, x: Element) -> Element:
        return Element(tuple((n * a) % d for a, d in zip(x.coords, self.invariant_factors)))

    def combine(self, coeffs: Sequence[int], xs: Sequence[Element]) -> Element:
        acc = self.zero()
        for c, x in zip(coeffs, xs):
            acc = self.add(acc, self.scale(c, x))
        return acc

    def elements(self):
        """Iterate over the whole group (small groups / test oracles only)."""
        import itertools

        for coords in itertools.product(*(range(d) for d in self.invariant_factors)):
            yield Element(coords)


def element_order(group: FiniteAbelianGroup, x: Element) -> int:
    """Smallest n >= 1 with n*x = 0; divides the exponent of the group."""
    group.check(x)
    order = 1
    for c, d in zip(x.coords, group.invariant_factors):
        order = math.lcm(order, d // math.gcd(c, d))
    return order


def subgroup_membership(
    group: FiniteAbelianGroup, x: Element, gens: Sequence[Element]
) -> list[int] | None:
    """Coefficients c with sum c_j*gens[j] = x, or None when x is outside
    the subgroup generated by gens.  The coefficient vector is the
    canonical solve_mod solution, so repeated calls agree exactly."""
    group.check(x)
    for g in gens:
        group.check(g)
    columns = [g.coords for g in gens]
    a = IntMatrix.from_rows(
        [[col[i] for col in columns] for i in range(group.rank)], cols=len(gens)
    )
    return solve_mod(a, list(x.coords), list(group.invariant_factors))


def minimal_multiple_in_subgroup(
    group: FiniteAbelianGroup, x: Element, gens: Sequence[Element]
) -> tuple[int, list[int]]:
    """Minimal alpha >= 1 with alpha*x in <gens>, plus a canonical relation.

    The returned relation c satisfies alpha*x + sum c_j*gens[j] = 0 in the
    group.  alpha always divides the order of x, and the set of multiples
    landing in the subgroup is exactly the multiples of alpha, so the
    search walks the sorted divisors of ord(x) and stops at the first hit.
    """
    group.check(x)
    ord_x = element_order(group, x)
    for alpha in divisors(ord_x):
        target = group.neg(group.scale(alpha, x))
        relation = subgroup_membership(group, target, gens)
        if relation is not None:
            return alpha, relation
    raise AssertionError("unreachable: ord(x)*x = 0 lies in every subgroup")


@dataclass(frozen=True)
class Presentation:
    """Invariant-factor presentation of a subgroup generated by points.

    ``point_coords[j]`` is the coordinate vector of input point j in
    ``group``; ``basis_exprs[i]`` expresses the i-th presentation
    generator as an integer combination of the input points, so the
    presentation can be expanded back into the ambient group.
    """

    group: FiniteAbelianGroup
    point_coords: tuple[Element, ...]
    basis_exprs: tuple[tuple[int, ...], ...]


def _bbox_scale(add: Callable[[T, T], T], zero: T, n: int, x: T) -> T:
    """n*x in a black-box group by double-and-add (n >= 0)."""
    acc, base = zero, x
    while n:
        if n & 1:
            acc = add(acc, base)
        base = add(base, base)
        n >>= 1
    return acc


def _bbox_order(add: Callable[[T, T], T], zero: T, x: T, exponent_bound: int) -> int:
    for d in divisors(exponent_bound):
        if _bbox_scale(add, zero, d, x) == zero:
            return d
    raise InputError("element order does not divide the stated exponent bound")


def _closure(
    add: Callable[[T, T], T], zero: T, points: Sequence[T], cap: int
) -> set[T]:
    """BFS closure of the subgroup generated by ``points``."""
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for elem in frontier:
            for p in points:
                cand = add(elem, p)
                if cand not in seen:
                    seen.add(cand)
                    if len(seen) > cap:
                        raise ResourceLimitError(
                            f"subgroup size exceeds the configured cap of {cap}"
                        )
                    nxt.append(cand)
        frontier = nxt
    return seen


def _relation_lattice_by_bfs(
    add: Callable[[T, T], T], zero: T, points: Sequence[T], cap: int
) -> list[list[int]]:
    """Full relation lattice of ``points`` from a spanning-tree traversal.

    Walk the Cayley graph of the generated subgroup; every non-tree edge
    closes a cycle whose label is a relation, and together these generate
    the kernel of Z^k -> G.
    """
    k = len(points)
    reps: dict[T, tuple[int, ...]] = {zero: (0,) * k}
    frontier = [zero]
    relations: list[list[int]] = []
    while frontier:
        nxt = []
        for elem in frontier:
            rep = reps[elem]
            for i, p in enumerate(points):
                cand = add(elem, p)
                stepped = list(rep)
                stepped[i] += 1
                known = reps.get(cand)
                if known is None:
                    reps[cand] = tuple(stepped)
                    if len(reps) > cap:
                        raise ResourceLimitError(
                            f"subgroup size exceeds the configured cap of {cap}"
                        )
                    nxt.append(cand)
                else:
                    rel = [s - w for s, w in zip(stepped, known)]
                    if any(rel):
                        relations.append(rel)
        frontier = nxt
    return relations


def presentation_from_points(
    points: Sequence[T],
    *,
    add: Callable[[T, T], T],
    zero: T,
    exponent_bound: int,
    cap: int = DEFAULT_SUBGROUP_CAP,
) -> Presentation:
    """Present the subgroup generated by concrete points of a black-box
    finite abelian group in invariant-factor coordinates.

    The relation lattice is first assembled cheaply from element orders
    and pairwise minimal-multiple relations; if the quotient it presents
    is larger than the actual subgroup (detected against a brute-force
    closure, always run below the cap), the full lattice is recomputed
    from a spanning-tree traversal.  Smith normal form of the relation
    matrix then yields the invariant factors and the coordinates of every
    input point.

    Args:
        points: generators, as hashable ambient elements.
        add: the ambient group operation.
        zero: the ambient identity.
        exponent_bound: any multiple of the ambient exponent (element
            orders are found among its divisors).
        cap: resource cap on the subgroup size.
    """
    k = len(points)
    if k == 0:
        return Presentation(FiniteAbelianGroup(()), (), ())

    orders = [_bbox_order(add, zero, p, exponent_bound) for p in points]
    relations: list[list[int]] = []
    for i, o in enumerate(orders):
        row = [0] * k
        row[i] = o
        relations.append(row)
    # Pairwise discrete relations: the minimal multiple of p_i inside <p_j>.
    dlogs: list[dict[T, int] | None] = [None] * k
    for j, p in enumerate(points):
        table: dict[T, int] = {}
        acc = zero
        for n in range(orders[j]):
            table.setdefault(acc, n)
            acc = add(acc, p)
        dlogs[j] = table
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            table = dlogs[j]
            assert table is not None
            for alpha in divisors(orders[i]):
                hit = table.get(_bbox_scale(add, zero, alpha, points[i]))
                if hit is not None:
                    row = [0] * k
                    row[i] = alpha
                    row[j] = -hit
                    relations.append(row)
                    break

    subgroup_size = len(_closure(add, zero, points, cap))
    snf = smith_normal_form(IntMatrix.from_rows(relations, cols=k))
    if math.prod(snf.invariant_factors()) != subgroup_size or len(
        snf.invariant_factors()
    ) != k:
        # Orders + pairwise relations missed a genuinely multi-way
        # relation; fall back to the full lattice.
        relations = [r for r in relations] + _relation_lattice_by_bfs(
            add, zero, points, cap
        )
        snf = smith_normal_form(IntMatrix.from_rows(relations, cols=k))
        assert math.prod(snf.invariant_factors()) == subgroup_size

    diag = snf.D.diagonal()
    kept = [i for i, d in enumerate(diag) if d >= 2]
    group = FiniteAbelianGroup(tuple(diag[i] for i in kept))
    v = snf.V
    point_coords = tuple(
        group.element([v.entry(j, i) for i in kept]) for j in range(k)
    )
    w = invert_unimodular(v)
    basis_exprs = tuple(tuple(w.entry(i, j) for j in range(k)) for i in kept)
    return Presentation(group, point_coords, basis_exprs)
