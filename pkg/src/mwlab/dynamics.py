"""Forward orbits of endomorphisms, globally and modulo a place.

Endomorphisms are Z-linear on coordinates: multiplication by an integer m
(acting on free and torsion parts alike), or an integer matrix acting on
the free coordinates (torsion fixed).  Either way the action commutes
with every reduction map by linearity, which is exactly what the orbit
experiments need.

``orbit_mod_v`` computes the full eventually-periodic orbit of a reduced
point with cycle detection and the first step at which the orbit meets
the reduced lattice.  ``global_orbit_intersection`` searches the global
orbit up to a step bound with exact membership tests.  The experiment
harness runs both sides and renders a verdict: CONSISTENT when the local
and global findings corroborate each other, INCONCLUSIVE when every
scanned place hits but the bounded global search found nothing (finite
scanning cannot settle that direction), and INCONSISTENT-ANOMALY when the
records contradict the orbit principle outright.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from mwlab.abelian import Element, subgroup_membership
from mwlab.errors import InputError
from mwlab.intlinalg import IntMatrix, solve_mod
from mwlab.reduction import GlobalModule, GlobalPoint, torsion_injectivity_check


@dataclass(frozen=True)
class EndoMap:
    """A Z-linear endomorphism of a global module."""

    multiplier: int | None = None
    matrix: tuple[tuple[int, ...], ...] | None = None

    @classmethod
    def multiplication(cls, m: int) -> "EndoMap":
        if abs(m) < 2:
            raise InputError("multiplication maps need |m| >= 2")
        return cls(multiplier=m)

    @classmethod
    def linear(cls, rows: Sequence[Sequence[int]]) -> "EndoMap":
        mat = tuple(tuple(int(x) for x in row) for row in rows)
        if any(len(row) != len(mat) for row in mat):
            raise InputError("coordinate action must be a square matrix")
        return cls(matrix=mat)

    def apply(self, module: GlobalModule, point: GlobalPoint) -> GlobalPoint:
        if self.multiplier is not None:
            return module.scale_point(self.multiplier, point)
        assert self.matrix is not None
        if len(self.matrix) != module.rank:
            raise InputError("matrix size must match the module rank")
        free = tuple(
            sum(row[j] * point.free[j] for j in range(module.rank))
            for row in self.matrix
        )
        # The induced map on torsion for a pure free-coordinate matrix is
        # the identity.
        return GlobalPoint(free, point.torsion)

    def describe(self) -> dict:
        if self.multiplier is not None:
            return {"multiplier": self.multiplier}
        assert self.matrix is not None
        return {"matrix": [list(r) for r in self.matrix]}


@dataclass(frozen=True)
class OrbitModV:
    """An eventually periodic orbit in B_v.

    ``visited`` lists the tail followed by one full cycle, in step order;
    ``first_hit`` is the least step whose element lies in the reduced
    lattice, or None when the whole eventual orbit misses it.
    """

    place: int
    preperiod: int
    cycle: int
    visited: tuple[Element, ...]
    first_hit: int | None

    def element_at(self, n: int) -> Element:
        """Orbit element at step n, folding n into the cycle."""
        if n < len(self.visited):
            return self.visited[n]
        return self.visited[self.preperiod + (n - self.preperiod) % self.cycle]

    def to_dict(self) -> dict:
        return {
            "place": self.place,
            "preperiod": self.preperiod,
            "cycle": self.cycle,
            "first_hit": self.first_hit,
            "visited": [list(e.coords) for e in self.visited],
        }


def orbit_mod_v(
    module: GlobalModule,
    phi: EndoMap,
    point: GlobalPoint,
    lattice_gens: Sequence[GlobalPoint],
    p: int,
) -> OrbitModV:
    """The orbit of r_v(point) under phi, with cycle detection and the
    first step meeting the subgroup generated by the reduced lattice
    generators.

    Orbit states are tracked on coordinates modulo the local exponent, so
    the iteration is exact and guaranteed to close up; membership of each
    visited element is decided by subgroup_membership (memoised across
    the orbit).
    """
    module.check_point(point)
    local = module.local(p)
    group = local.presentation.group
    coords = local.presentation.point_coords
    rank = module.rank
    exponent = group.exponent()
    gens = [module.reduce(g, p) for g in lattice_gens]

    def state_to_element(free: tuple[int, ...], tors: tuple[int, ...]) -> Element:
        return group.combine(free + tors, coords)

    def step(
        free: tuple[int, ...], tors: tuple[int, ...]
    ) -> tuple[tuple[int, ...], tuple[int, ...]]:
        if phi.multiplier is not None:
            m = phi.multiplier
            return (
                tuple(m * f % exponent for f in free),
                module.torsion.scale(m, Element(tors)).coords,
            )
        assert phi.matrix is not None
        if len(phi.matrix) != rank:
            raise InputError("matrix size must match the module rank")
        new_free = tuple(
            sum(row[j] * free[j] for j in range(rank)) % exponent
            for row in phi.matrix
        )
        return new_free, tors

    state = (tuple(f % exponent for f in point.free), point.torsion)
    seen: dict[tuple, int] = {}
    visited: list[Element] = []
    while state not in seen:
        seen[state] = len(visited)
        visited.append(state_to_element(*state))
        state = step(*state)
    preperiod = seen[state]
    cycle = len(visited) - preperiod

    first_hit = None
    membership_memo: dict[Element, bool] = {}
    for n, elem in enumerate(visited):
        hit = membership_memo.get(elem)
        if hit is None:
            hit = subgroup_membership(group, elem, gens) is not None
            membership_memo[elem] = hit
        if hit:
            first_hit = n
            break
    return OrbitModV(p, preperiod, cycle, tuple(visited), first_hit)


@dataclass(frozen=True)
class GlobalOrbitResult:
    """Outcome of the bounded global orbit search."""

    step: int | None
    coefficients: tuple[int, ...] | None
    searched_bound: int

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "coefficients": list(self.coefficients)
            if self.coefficients is not None
            else None,
            "searched_bound": self.searched_bound,
        }


def lattice_membership_global(
    module: GlobalModule, point: GlobalPoint, lattice_gens: Sequence[GlobalPoint]
) -> tuple[int, ...] | None:
    """Exact membership of a point in the submodule generated by
    ``lattice_gens``: free coordinates over Z, torsion coordinates modulo
    the invariant factors, solved as one congruence system."""
    rank = module.rank
    trank = module.torsion.rank
    rows = []
    rhs = []
    moduli = []
    for r in range(rank):
        rows.append([g.free[r] for g in lattice_gens])
        rhs.append(point.free[r])
        moduli.append(0)
    for r in range(trank):
        rows.append([g.torsion[r] for g in lattice_gens])
        rhs.append(point.torsion[r])
        moduli.append(module.torsion.invariant_factors[r])
    a = IntMatrix.from_rows(rows, cols=len(lattice_gens))
    solution = solve_mod(a, rhs, moduli)
    return tuple(solution) if solution is not None else None


def global_orbit_intersection(
    module: GlobalModule,
    phi: EndoMap,
    point: GlobalPoint,
    lattice_gens: Sequence[GlobalPoint],
    step_bound: int,
) -> GlobalOrbitResult:
    """Least n <= step_bound with phi^n(point) in the submodule generated
    by ``lattice_gens``, together with witnessing coefficients."""
    module.check_point(point)
    for g in lattice_gens:
        module.check_point(g)
    current = point
    for n in range(step_bound + 1):
        coeffs = lattice_membership_global(module, current, lattice_gens)
        if coeffs is not None:
            return GlobalOrbitResult(n, coeffs, step_bound)
        current = phi.apply(module, current)
    return GlobalOrbitResult(None, None, step_bound)


@dataclass(frozen=True)
class DynamicsReport:
    """Complete transcript of one local-to-global orbit experiment."""

    verdict: str
    global_result: GlobalOrbitResult
    orbits: tuple[OrbitModV, ...]
    place_bound: int
    step_bound: int
    precondition_failures: tuple[int, ...]
    notes: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "global": self.global_result.to_dict(),
            "orbits": [o.to_dict() for o in self.orbits],
            "place_bound": self.place_bound,
            "step_bound": self.step_bound,
            "precondition_failures": list(self.precondition_failures),
            "notes": list(self.notes),
        }


VERDICT_CONSISTENT = "CONSISTENT"
VERDICT_INCONCLUSIVE = "INCONCLUSIVE-AT-BOUNDS"
VERDICT_ANOMALY = "INCONSISTENT-ANOMALY"
VERDICT_PRECONDITION = "PRECONDITION-VIOLATED"


def dynamical_lgp_experiment(
    module: GlobalModule,
    phi: EndoMap,
    point: GlobalPoint,
    lattice_gens: Sequence[GlobalPoint],
    place_bound: int,
    step_bound: int,
    spot_checks: int = 10,
) -> DynamicsReport:
    """Run the orbit principle empirically and grade the outcome.

    The torsion-injectivity axiom is spot-checked at the first few
    scanned places before anything else; a violation is flagged in place
    of a verdict.  Otherwise the harness compares the bounded global
    search against the per-place orbits:

    * a global hit must reduce to a hit at the same step everywhere
      (failure there is an anomaly that would contradict the principle);
    * a global miss is corroborated by any place whose whole orbit
      misses; if every scanned place hits while the global search missed,
      the outcome is inconclusive at these bounds, never an anomaly.
    """
    places = module.good_places(place_bound)
    failures = tuple(
        p for p in places[:spot_checks] if not torsion_injectivity_check(module, p)
    )
    if failures:
        return DynamicsReport(
            VERDICT_PRECONDITION,
            GlobalOrbitResult(None, None, 0),
            (),
            place_bound,
            step_bound,
            failures,
            ("torsion fails to inject at the listed places; orbit comparison skipped",),
        )

    global_result = global_orbit_intersection(
        module, phi, point, lattice_gens, step_bound
    )
    orbits = tuple(
        orbit_mod_v(module, phi, point, lattice_gens, p) for p in places
    )

    notes: list[str] = []
    if global_result.step is not None:
        n = global_result.step
        # first_hit <= n already certifies a compatible local hit; otherwise
        # re-check membership at step n folded into the cycle.
        bad = [
            o.place
            for o in orbits
            if not (o.first_hit is not None and o.first_hit <= n)
            and not _hits_at(module, o, lattice_gens, n)
        ]
        if bad:
            notes.append(
                f"global hit at step {n} fails to reduce at places {bad}"
            )
            verdict = VERDICT_ANOMALY
        else:
            verdict = VERDICT_CONSISTENT
    else:
        missing = [o.place for o in orbits if o.first_hit is None]
        if missing:
            notes.append(
                f"place {missing[0]} misses over its whole orbit, matching the global miss"
            )
            verdict = VERDICT_CONSISTENT
        elif orbits:
            notes.append(
                "every scanned place hits but the bounded global search found nothing"
            )
            verdict = VERDICT_INCONCLUSIVE
        else:
            notes.append("no good places were scanned")
            verdict = VERDICT_INCONCLUSIVE
    return DynamicsReport(
        verdict,
        global_result,
        orbits,
        place_bound,
        step_bound,
        (),
        tuple(notes),
    )


def _hits_at(
    module: GlobalModule,
    orbit: OrbitModV,
    lattice_gens: Sequence[GlobalPoint],
    n: int,
) -> bool:
    local = module.local(orbit.place)
    group = local.presentation.group
    gens = [module.reduce(g, orbit.place) for g in lattice_gens]
    return subgroup_membership(group, orbit.element_at(n), gens) is not None
