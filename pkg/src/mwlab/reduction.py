"""Global modules with reduction maps to finite groups.

A :class:`GlobalModule` is a finitely generated abelian group
Z^rank (+) torsion together with, for every good place v, a reduction
homomorphism into a concrete finite group.  Two realizations are
provided:

* elliptic -- the free generators and torsion generators are rational
  points of a curve over Q, and reduction is reduction of points mod p;
* synthetic -- explicit per-place tables of generator images inside a
  declared finite abelian group, used to build controlled test scenarios
  (including deliberate violations of the torsion-injectivity axiom).

On top of ``reduce`` the module offers the two executable axioms of the
framework: exact order-divisibility scans over places, and the
torsion-injectivity check.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from mwlab.abelian import (
    Element,
    FiniteAbelianGroup,
    Presentation,
    element_order,
    presentation_from_points,
)
from mwlab.arith import is_prime, primes_upto, valuation
from mwlab.elliptic import (
    DEFAULT_COUNT_CAP,
    INFINITY,
    CurvePoint,
    Place,
    WeierstrassCurve,
    group_order,
    place_of,
    point_order,
    reduce_curve,
    reduce_point,
    validate_torsion_claims,
)
from mwlab.abelian import DEFAULT_SUBGROUP_CAP
from mwlab.errors import InputError
from mwlab.intlinalg import IntMatrix, kernel_basis

DEFAULT_INDEPENDENCE_BOX = 20


def l_valuation(order: int, l: int) -> int:
    """Exact exponent k with l**k || order."""
    if order < 1:
        raise InputError("orders are positive")
    return valuation(order, l)


@dataclass(frozen=True)
class GlobalPoint:
    """Integer coordinates over the declared generators of a module."""

    free: tuple[int, ...]
    torsion: tuple[int, ...] = ()


@dataclass(frozen=True)
class ExperimentSpec:
    """Bookkeeping for an experiment: the dimension parameter d of the
    realization, the number of points e, an optional prime l, and the
    formal twist index n (recorded in reports, no computational effect)."""

    dimension: int
    num_points: int
    l: int | None = None
    twist_index: int = 0

    def __post_init__(self) -> None:
        if self.l is not None and not is_prime(self.l):
            raise InputError(f"l must be prime, got {self.l}")

    @property
    def is_counterexample_candidate(self) -> bool:
        return self.num_points == self.dimension + 1


@dataclass
class LocalData:
    """Everything the module knows about one good place."""

    place: int
    presentation: Presentation
    concrete_order: int | None = None
    curve: WeierstrassCurve | None = None
    images: tuple = ()


class _EllipticRealization:
    """Global module realized by rational points of a curve over Q."""

    dimension = 2

    def __init__(
        self,
        curve: WeierstrassCurve,
        free_points: Sequence[CurvePoint],
        torsion_claims: Sequence[tuple[CurvePoint, int]],
        count_cap: int,
        subgroup_cap: int,
    ) -> None:
        if curve.p is not None:
            raise InputError("the global curve must be defined over Q")
        for pt in free_points:
            curve.require_on_curve(pt)
            if pt.is_infinity:
                raise InputError("free generators must be affine points")
        validate_torsion_claims(curve, torsion_claims)
        self.curve = curve
        self.free_points = tuple(free_points)
        self.torsion_claims = tuple(torsion_claims)
        self.count_cap = count_cap
        self.subgroup_cap = subgroup_cap

    def torsion_orders(self) -> tuple[int, ...]:
        return tuple(order for _, order in self.torsion_claims)

    def place(self, p: int) -> Place:
        return place_of(self.curve, p)

    def good_places(self, bound: int) -> list[int]:
        return [p for p in primes_upto(bound) if self.place(p).is_good]

    def local(self, p: int, torsion_group: FiniteAbelianGroup) -> LocalData:
        curve_p = reduce_curve(self.curve, p)
        images = tuple(
            reduce_point(self.curve, pt, p)
            for pt in self.free_points + tuple(pt for pt, _ in self.torsion_claims)
        )
        order = group_order(curve_p, self.count_cap)
        pres = presentation_from_points(
            images,
            add=curve_p._add_unchecked,
            zero=INFINITY,
            exponent_bound=order,
            cap=self.subgroup_cap,
        )
        return LocalData(p, pres, order, curve_p, images)

    def raw_reduce(self, local: LocalData, point: GlobalPoint) -> CurvePoint:
        curve_p = local.curve
        assert curve_p is not None
        acc = INFINITY
        for coeff, img in zip(point.free + point.torsion, local.images):
            if coeff:
                acc = curve_p._add_unchecked(acc, curve_p.scalar_mul(coeff, img))
        return acc

    def raw_order(self, local: LocalData, point: GlobalPoint) -> int:
        curve_p = local.curve
        assert curve_p is not None
        return point_order(curve_p, self.raw_reduce(local, point), local.concrete_order)

    def torsion_image_order(self, p: int, torsion_group: FiniteAbelianGroup) -> int:
        curve_p = reduce_curve(self.curve, p)
        images = [reduce_point(self.curve, pt, p) for pt, _ in self.torsion_claims]
        pres = presentation_from_points(
            images,
            add=curve_p._add_unchecked,
            zero=INFINITY,
            exponent_bound=torsion_group.exponent() if images else 1,
            cap=self.subgroup_cap,
        )
        return pres.group.order()

    def independence_relation(
        self, box: int, screen_count: int = 2
    ) -> tuple[int, ...] | None:
        """Search for a nonzero relation sum c_i * P_i = O with |c_i| <= box.

        Candidates are screened at a few good places first (a rational
        relation must reduce to one everywhere), and only the survivors
        are confirmed by exact rational arithmetic, so the final answer
        is exact.
        """
        points = self.free_points
        if not points:
            return None
        screens = []
        p = 5
        while len(screens) < screen_count:
            if is_prime(p) and self.place(p).is_good:
                screens.append(p)
            p += 1
        coeff_range = range(-box, box + 1)
        tables = []
        for p in screens:
            curve_p = reduce_curve(self.curve, p)
            per_point = []
            for pt in points:
                img = reduce_point(self.curve, pt, p)
                per_point.append({c: curve_p.scalar_mul(c, img) for c in coeff_range})
            tables.append((curve_p, per_point))

        def survives(coeffs: tuple[int, ...]) -> bool:
            for curve_p, per_point in tables:
                acc = INFINITY
                for c, table in zip(coeffs, per_point):
                    acc = curve_p._add_unchecked(acc, table[c])
                if not acc.is_infinity:
                    return False
            return True

        for coeffs in itertools.product(coeff_range, repeat=len(points)):
            if not any(coeffs):
                continue
            if not survives(coeffs):
                continue
            acc = INFINITY
            for c, pt in zip(coeffs, points):
                acc = self.curve._add_unchecked(acc, self.curve.scalar_mul(c, pt))
            if acc.is_infinity:
                return coeffs
        return None


@dataclass(frozen=True)
class SyntheticPlace:
    """Declared reduction data at one place of a synthetic realization."""

    p: int
    group: FiniteAbelianGroup
    free_images: tuple[Element, ...]
    torsion_images: tuple[Element, ...]


class _SyntheticRealization:
    """Global module realized by explicit per-place image tables."""

    def __init__(
        self,
        rank: int,
        dimension: int,
        places: Sequence[SyntheticPlace],
        subgroup_cap: int,
    ) -> None:
        self.rank = rank
        self.dimension = dimension
        self.tables = {}
        for entry in places:
            if not is_prime(entry.p) or entry.p <= 3:
                raise InputError("synthetic places must be primes greater than 3")
            if len(entry.free_images) != rank:
                raise InputError("one free-generator image per declared generator")
            for img in entry.free_images + entry.torsion_images:
                entry.group.check(img)
            self.tables[entry.p] = entry
        self.subgroup_cap = subgroup_cap

    def place(self, p: int) -> Place:
        if not is_prime(p):
            raise InputError(f"{p} is not prime")
        if p <= 3:
            return Place(p, "excluded")
        return Place(p, "good" if p in self.tables else "bad")

    def good_places(self, bound: int) -> list[int]:
        return sorted(p for p in self.tables if p <= bound)

    def local(self, p: int, torsion_group: FiniteAbelianGroup) -> LocalData:
        entry = self.tables[p]
        if len(entry.torsion_images) != torsion_group.rank:
            raise InputError("one torsion image per torsion generator")
        pres = Presentation(
            entry.group, entry.free_images + entry.torsion_images, ()
        )
        return LocalData(p, pres, entry.group.order())

    def raw_reduce(self, local: LocalData, point: GlobalPoint) -> Element:
        group = local.presentation.group
        return group.combine(
            point.free + point.torsion, local.presentation.point_coords
        )

    def raw_order(self, local: LocalData, point: GlobalPoint) -> int:
        group = local.presentation.group
        return element_order(group, self.raw_reduce(local, point))

    def torsion_image_order(self, p: int, torsion_group: FiniteAbelianGroup) -> int:
        entry = self.tables[p]
        pres = presentation_from_points(
            entry.torsion_images,
            add=entry.group.add,
            zero=entry.group.zero(),
            exponent_bound=entry.group.exponent(),
            cap=self.subgroup_cap,
        )
        return pres.group.order()

    def independence_relation(self, box: int) -> tuple[int, ...] | None:
        # Synthetic tables declare their generators independent; the
        # rational-arithmetic oracle has nothing to examine here.
        return None


class GlobalModule:
    """Z^rank (+) torsion with reduction maps r_v into finite groups."""

    def __init__(
        self,
        realization,
        torsion_group: FiniteAbelianGroup,
        name: str = "module",
        independence_box: int = DEFAULT_INDEPENDENCE_BOX,
    ) -> None:
        self.realization = realization
        self.torsion = torsion_group
        self.name = name
        self.independence_box = independence_box
        self._locals: dict[int, LocalData] = {}
        self._independence: tuple[bool, tuple[int, ...] | None] | None = None

    # -- construction helpers -------------------------------------------

    @classmethod
    def from_curve(
        cls,
        curve: WeierstrassCurve,
        free_points: Sequence[CurvePoint],
        torsion_claims: Sequence[tuple[CurvePoint, int]] = (),
        name: str = "module",
        independence_box: int = DEFAULT_INDEPENDENCE_BOX,
        count_cap: int = DEFAULT_COUNT_CAP,
        subgroup_cap: int = DEFAULT_SUBGROUP_CAP,
    ) -> "GlobalModule":
        torsion_group = FiniteAbelianGroup(
            tuple(order for _, order in torsion_claims)
        )
        realization = _EllipticRealization(
            curve, free_points, torsion_claims, count_cap, subgroup_cap
        )
        return cls(realization, torsion_group, name, independence_box)

    @classmethod
    def synthetic(
        cls,
        rank: int,
        places: Sequence[SyntheticPlace],
        torsion_group: FiniteAbelianGroup = FiniteAbelianGroup(()),
        dimension: int = 2,
        name: str = "synthetic",
        subgroup_cap: int = DEFAULT_SUBGROUP_CAP,
    ) -> "GlobalModule":
        realization = _SyntheticRealization(rank, dimension, places, subgroup_cap)
        return cls(realization, torsion_group, name)

    # -- basic structure --------------------------------------------------

    @property
    def rank(self) -> int:
        if isinstance(self.realization, _EllipticRealization):
            return len(self.realization.free_points)
        return self.realization.rank

    @property
    def dimension(self) -> int:
        return self.realization.dimension

    def zero_point(self) -> GlobalPoint:
        return GlobalPoint((0,) * self.rank, (0,) * self.torsion.rank)

    def make_point(
        self, free: Sequence[int], torsion: Sequence[int] = ()
    ) -> GlobalPoint:
        if len(free) != self.rank:
            raise InputError(f"expected {self.rank} free coordinates")
        tors = tuple(torsion) if torsion else (0,) * self.torsion.rank
        return GlobalPoint(
            tuple(int(c) for c in free), self.torsion.element(tors).coords
        )

    def check_point(self, point: GlobalPoint) -> None:
        if len(point.free) != self.rank:
            raise InputError("point has the wrong number of free coordinates")
        self.torsion.check(Element(point.torsion))

    def add_points(self, a: GlobalPoint, b: GlobalPoint) -> GlobalPoint:
        free = tuple(x + y for x, y in zip(a.free, b.free))
        tors = self.torsion.add(Element(a.torsion), Element(b.torsion)).coords
        return GlobalPoint(free, tors)

    def neg_point(self, a: GlobalPoint) -> GlobalPoint:
        return GlobalPoint(
            tuple(-x for x in a.free), self.torsion.neg(Element(a.torsion)).coords
        )

    def scale_point(self, n: int, a: GlobalPoint) -> GlobalPoint:
        return GlobalPoint(
            tuple(n * x for x in a.free),
            self.torsion.scale(n, Element(a.torsion)).coords,
        )

    # -- places and reduction ---------------------------------------------

    def place(self, p: int) -> Place:
        return self.realization.place(p)

    def good_places(self, bound: int) -> list[int]:
        return self.realization.good_places(bound)

    def local(self, p: int) -> LocalData:
        if p not in self._locals:
            if not self.place(p).is_good:
                raise InputError(f"place {p} is not good for this module")
            self._locals[p] = self.realization.local(p, self.torsion)
        return self._locals[p]

    def reduce(self, point: GlobalPoint, p: int) -> Element:
        """r_v(point) in the presented local group."""
        self.check_point(point)
        local = self.local(p)
        return local.presentation.group.combine(
            point.free + point.torsion, local.presentation.point_coords
        )

    def reduce_raw(self, point: GlobalPoint, p: int):
        """r_v(point) as a concrete element (curve point or table element)."""
        self.check_point(point)
        return self.realization.raw_reduce(self.local(p), point)

    def ord_v(self, point: GlobalPoint, p: int) -> int:
        """Order of the reduced point in B_v."""
        self.check_point(point)
        return self.realization.raw_order(self.local(p), point)

    # -- axioms -------------------------------------------------------------

    def independence_relation(self) -> tuple[int, ...] | None:
        """Cached bounded-box relation search over the free generators."""
        if self._independence is None:
            rel = self.realization.independence_relation(self.independence_box)
            self._independence = (rel is None, rel)
        return self._independence[1]

    def validate_independence(self) -> None:
        rel = self.independence_relation()
        if rel is not None:
            raise InputError(
                f"declared free generators admit the small relation {rel}"
            )


def points_dependence_relation(
    points: Sequence[GlobalPoint],
) -> tuple[int, ...] | None:
    """A nonzero integer vector c with sum c_i * free_i = 0, if one exists."""
    if not points:
        return None
    width = len(points[0].free)
    matrix = IntMatrix.from_rows(
        [[pt.free[r] for pt in points] for r in range(width)], cols=len(points)
    )
    basis = kernel_basis(matrix)
    return tuple(basis[0]) if basis else None


def scan_divisibility(
    module: GlobalModule,
    points: Sequence[GlobalPoint],
    l: int,
    pattern: Sequence[int],
    place_bound: int,
) -> list[int]:
    """All good places v <= bound realizing an exact l-divisibility pattern.

    At a returned place, for every i: if pattern[i] = k > 0 then l**k
    exactly divides ord_v(points[i]); if pattern[i] = 0 then l does not
    divide ord_v(points[i]).  The scan is exhaustive over good places up
    to the bound; an empty result is a finding, not an error.
    """
    if not is_prime(l):
        raise InputError(f"l must be prime, got {l}")
    if len(points) != len(pattern):
        raise InputError("one pattern entry per point")
    if any(k < 0 for k in pattern):
        raise InputError("pattern entries are nonnegative")
    module.validate_independence()
    if points_dependence_relation(points) is not None:
        raise InputError("scanned points must be independent over Z")
    hits = []
    for p in module.good_places(place_bound):
        ok = True
        for point, k in zip(points, pattern):
            v = l_valuation(module.ord_v(point, p), l)
            if v != k:
                ok = False
                break
        if ok:
            hits.append(p)
    return hits


def torsion_injectivity_check(module: GlobalModule, p: int) -> bool:
    """Does the torsion subgroup inject into B_v at this good place?

    Decided exactly: the image of the torsion subgroup is generated by
    the images of its generators, so injectivity holds iff that image has
    the full torsion order.
    """
    if not module.place(p).is_good:
        raise InputError(f"place {p} is not good for this module")
    target = module.torsion.order()
    if target == 1:
        return True
    image = module.realization.torsion_image_order(p, module.torsion)
    return image == target
