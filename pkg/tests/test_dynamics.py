import random

import pytest

from mwlab.abelian import FiniteAbelianGroup
from mwlab.dynamics import (
    VERDICT_ANOMALY,
    VERDICT_CONSISTENT,
    VERDICT_INCONCLUSIVE,
    VERDICT_PRECONDITION,
    EndoMap,
    dynamical_lgp_experiment,
    global_orbit_intersection,
    lattice_membership_global,
    orbit_mod_v,
)
from mwlab.errors import InputError
from mwlab.reduction import GlobalModule, SyntheticPlace


def cyclic_module(n, image=1, p=5):
    group = FiniteAbelianGroup((n,))
    return GlobalModule.synthetic(
        1, [SyntheticPlace(p, group, (group.element([image]),), ())], name=f"Z{n}"
    )


def gens(module):
    return [
        module.make_point([1 if i == j else 0 for j in range(module.rank)])
        for i in range(module.rank)
    ]


class TestEndoMap:
    def test_multiplier_bound(self):
        with pytest.raises(InputError):
            EndoMap.multiplication(1)
        with pytest.raises(InputError):
            EndoMap.multiplication(-1)
        EndoMap.multiplication(-2)

    def test_matrix_must_be_square(self):
        with pytest.raises(InputError):
            EndoMap.linear([[1, 0]])

    def test_matrix_size_checked_against_module(self, rank3_module):
        phi = EndoMap.linear([[0, 1], [1, 0]])
        with pytest.raises(InputError):
            phi.apply(rank3_module, rank3_module.zero_point())

    def test_apply_multiplication(self, rank3_module):
        phi = EndoMap.multiplication(-3)
        p = rank3_module.make_point([1, 2, 0])
        assert phi.apply(rank3_module, p).free == (-3, -6, 0)

    def test_apply_matrix(self, rank3_module):
        phi = EndoMap.linear([[0, 1, 0], [1, 0, 0], [0, 0, 2]])
        p = rank3_module.make_point([1, 2, 3])
        assert phi.apply(rank3_module, p).free == (2, 1, 6)

    def test_commutes_with_reduction(self, rank3_module):
        m = rank3_module
        rng = random.Random(41)
        for phi in (EndoMap.multiplication(2), EndoMap.linear([[1, 1, 0], [0, 1, 0], [2, 0, 1]])):
            for p in (7, 11, 13):
                group = m.local(p).presentation.group
                for _ in range(4):
                    a = m.make_point([rng.randint(-4, 4) for _ in range(3)])
                    b = m.make_point([rng.randint(-4, 4) for _ in range(3)])
                    # Linearity: reduction of phi of a sum splits.
                    lhs = m.reduce(phi.apply(m, m.add_points(a, b)), p)
                    rhs = group.add(
                        m.reduce(phi.apply(m, a), p), m.reduce(phi.apply(m, b), p)
                    )
                    assert lhs == rhs


class TestOrbitModV:
    def test_cycle_without_hit(self):
        m = cyclic_module(5)
        orbit = orbit_mod_v(m, EndoMap.multiplication(2), gens(m)[0], [], 5)
        assert orbit.preperiod == 0
        assert orbit.cycle == 4
        assert [e.coords[0] for e in orbit.visited] == [1, 2, 4, 3]
        assert orbit.first_hit is None

    def test_tail_into_fixed_point(self):
        m = cyclic_module(8)
        orbit = orbit_mod_v(m, EndoMap.multiplication(2), gens(m)[0], [], 5)
        assert [e.coords[0] for e in orbit.visited] == [1, 2, 4, 0]
        assert orbit.preperiod == 3
        assert orbit.cycle == 1
        assert orbit.first_hit == 3

    def test_whole_group_lattice_hits_immediately(self):
        m = cyclic_module(8)
        orbit = orbit_mod_v(m, EndoMap.multiplication(2), gens(m)[0], gens(m), 5)
        assert orbit.first_hit == 0

    def test_structural_invariants_random(self):
        rng = random.Random(43)
        for _ in range(40):
            n = rng.randint(2, 60)
            image = rng.randrange(n)
            m = cyclic_module(n, image=image)
            mult = rng.choice([2, 3, 5, -2])
            start = m.make_point([rng.randint(-10, 10)])
            orbit = orbit_mod_v(m, EndoMap.multiplication(mult), start, [], 5)
            group = m.local(5).presentation.group
            assert orbit.preperiod + orbit.cycle == len(orbit.visited)
            assert len(orbit.visited) <= group.order()
            # Cycle closure: the step after the last visited state returns
            # to the start of the cycle.
            closing = group.scale(mult, orbit.visited[-1])
            assert closing == orbit.visited[orbit.preperiod]

    def test_element_at_folds_into_cycle(self):
        m = cyclic_module(5)
        orbit = orbit_mod_v(m, EndoMap.multiplication(2), gens(m)[0], [], 5)
        assert orbit.element_at(0) == orbit.visited[0]
        assert orbit.element_at(5) == orbit.visited[1]  # 2^5 = 32 = 2 mod 5

    def test_orbit_matches_reduced_global_orbit(self, rank3_module):
        m = rank3_module
        phi = EndoMap.multiplication(2)
        p1 = gens(m)[0]
        for p in (7, 11, 13):
            orbit = orbit_mod_v(m, phi, p1, [], p)
            current = p1
            for n in range(8):
                assert orbit.element_at(n) == m.reduce(current, p)
                current = phi.apply(m, current)

    def test_bad_place_rejected(self, rank3_module):
        with pytest.raises(InputError):
            orbit_mod_v(
                rank3_module, EndoMap.multiplication(2), gens(rank3_module)[0], [], 4
            )


class TestGlobalOrbit:
    def test_hit_after_two_steps(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        result = global_orbit_intersection(
            m, EndoMap.multiplication(2), p1, [m.scale_point(4, p1)], 10
        )
        assert result.step == 2
        assert result.coefficients == (1,)

    def test_member_at_step_zero(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        result = global_orbit_intersection(
            m, EndoMap.multiplication(2), p1, [p1], 10
        )
        assert result.step == 0

    def test_never_hits_odd_multiple(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        result = global_orbit_intersection(
            m, EndoMap.multiplication(2), p1, [m.scale_point(3, p1)], 40
        )
        assert result.step is None
        assert result.searched_bound == 40

    def test_membership_handles_torsion(self, tors6_module):
        m = tors6_module
        t = m.make_point([], [2])
        assert lattice_membership_global(m, t, [m.make_point([], [1])]) is not None
        assert lattice_membership_global(m, m.make_point([], [1]), [t]) is None


class TestExperimentHarness:
    def test_hit_fixture_consistent(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        report = dynamical_lgp_experiment(
            m, EndoMap.multiplication(2), p1, [m.scale_point(2, p1)], 60, 16
        )
        assert report.verdict == VERDICT_CONSISTENT
        assert report.global_result.step == 1
        assert all(o.first_hit is not None and o.first_hit <= 1 for o in report.orbits)

    def test_miss_fixture_consistent_with_witness(self, rank3_module):
        m = rank3_module
        p1, p2, _ = gens(m)
        report = dynamical_lgp_experiment(
            m, EndoMap.multiplication(2), p1, [p2], 60, 32
        )
        assert report.verdict == VERDICT_CONSISTENT
        assert report.global_result.step is None
        missing = [o.place for o in report.orbits if o.first_hit is None]
        assert 19 in missing  # development-pinned witness place

    def test_precondition_gate(self, bad_torsion_module):
        m = bad_torsion_module
        report = dynamical_lgp_experiment(
            m, EndoMap.multiplication(2), m.make_point([1], [1]), [], 100, 8
        )
        assert report.verdict == VERDICT_PRECONDITION
        assert report.precondition_failures == (5,)
        assert report.orbits == ()

    def test_inconclusive_when_all_places_hit_but_global_misses(self):
        # At the only scanned place the image of the generator is torsion
        # of order 2, so the doubling orbit falls into the trivial lattice
        # locally, while globally 2^n * gen never lies in <0> = 0.
        group = FiniteAbelianGroup((2,))
        m = GlobalModule.synthetic(
            1, [SyntheticPlace(5, group, (group.element([1]),), ())]
        )
        report = dynamical_lgp_experiment(
            m, EndoMap.multiplication(2), gens(m)[0], [], 10, 8
        )
        assert report.global_result.step is None
        assert all(o.first_hit is not None for o in report.orbits)
        assert report.verdict == VERDICT_INCONCLUSIVE

    def test_report_dict_shape(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        report = dynamical_lgp_experiment(
            m, EndoMap.multiplication(2), p1, [m.scale_point(2, p1)], 30, 8
        )
        data = report.to_dict()
        assert data["verdict"] == VERDICT_CONSISTENT
        assert data["global"]["step"] == 1
        assert len(data["orbits"]) == len(m.good_places(30))
