import random

import pytest

from mwlab.abelian import FiniteAbelianGroup
from mwlab.arith import primes_upto
from mwlab.elliptic import point_order, reduce_curve, reduce_point
from mwlab.errors import FixtureError, InputError
from mwlab.fixtures import curve_fixture_from_dict, load_module, module_from_dict
from mwlab.reduction import (
    ExperimentSpec,
    GlobalModule,
    GlobalPoint,
    SyntheticPlace,
    l_valuation,
    points_dependence_relation,
    scan_divisibility,
    torsion_injectivity_check,
)


def gens(module):
    return [
        module.make_point([1 if i == j else 0 for j in range(module.rank)])
        for i in range(module.rank)
    ]


class TestExperimentSpec:
    def test_candidate_rule(self):
        assert ExperimentSpec(2, 3).is_counterexample_candidate
        assert not ExperimentSpec(2, 2).is_counterexample_candidate

    def test_prime_l(self):
        ExperimentSpec(2, 3, l=5)
        with pytest.raises(InputError):
            ExperimentSpec(2, 3, l=6)


class TestReduce:
    def test_generator_maps_to_its_image(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        local = m.local(7)
        assert m.reduce(p1, 7) == local.presentation.point_coords[0]

    def test_zero_maps_to_identity(self, rank3_module):
        m = rank3_module
        assert m.reduce(m.zero_point(), 7) == m.local(7).presentation.group.zero()

    def test_combination_matches_direct_curve_computation(self, rank3_module):
        m = rank3_module
        p1, p2, _ = gens(m)
        combo = m.add_points(m.scale_point(2, p1), m.neg_point(p2))
        raw = m.reduce_raw(combo, 7)
        curve7 = m.local(7).curve
        direct = curve7.sub(
            curve7.scalar_mul(2, m.reduce_raw(p1, 7)), m.reduce_raw(p2, 7)
        )
        assert raw == direct
        # The presentation-coordinates path agrees with the raw path.
        pres = m.local(7).presentation
        expected = pres.group.combine([2, -1, 0], pres.point_coords)
        assert m.reduce(combo, 7) == expected

    def test_bad_place_rejected(self, rank3_module):
        with pytest.raises(InputError):
            rank3_module.reduce(rank3_module.zero_point(), 5077)
        with pytest.raises(InputError):
            rank3_module.reduce(rank3_module.zero_point(), 3)

    def test_homomorphism_at_twenty_places(self, rank3_module):
        m = rank3_module
        rng = random.Random(23)
        places = m.good_places(120)[:20]
        for p in places:
            group = m.local(p).presentation.group
            for _ in range(3):
                a = m.make_point([rng.randint(-5, 5) for _ in range(3)])
                b = m.make_point([rng.randint(-5, 5) for _ in range(3)])
                assert m.reduce(m.add_points(a, b), p) == group.add(
                    m.reduce(a, p), m.reduce(b, p)
                )


class TestOrders:
    def test_p1_order_five_at_five(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        assert m.ord_v(p1, 5) == 5
        assert l_valuation(m.ord_v(p1, 5), 5) == 1

    def test_zero_point_order_one(self, rank3_module):
        m = rank3_module
        assert m.ord_v(m.zero_point(), 5) == 1
        assert l_valuation(1, 3) == 0

    def test_lagrange_on_scans(self, rank3_module):
        m = rank3_module
        rng = random.Random(29)
        for p in m.good_places(60):
            n = m.local(p).concrete_order
            for _ in range(3):
                point = m.make_point([rng.randint(-4, 4) for _ in range(3)])
                assert n % m.ord_v(point, p) == 0

    def test_order_matches_element_order_in_presentation(self, rank3_module):
        from mwlab.abelian import element_order

        m = rank3_module
        rng = random.Random(31)
        for p in (5, 7, 11, 13):
            pres = m.local(p).presentation
            for _ in range(4):
                point = m.make_point([rng.randint(-3, 3) for _ in range(3)])
                assert m.ord_v(point, p) == element_order(
                    pres.group, m.reduce(point, p)
                )


class TestIndependenceOracle:
    def test_rank3_generators_pass(self, rank3_module):
        assert rank3_module.independence_relation() is None
        rank3_module.validate_independence()

    def test_duplicate_points_detected_by_coordinate_check(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        rel = points_dependence_relation([p1, p1])
        assert rel is not None
        assert rel[0] * 1 + rel[1] * 1 == 0 and any(rel)

    def test_dependent_curve_points_found_by_box_search(self):
        fixture = curve_fixture_from_dict(
            {
                "curve": {"a1": 0, "a2": 0, "a3": 1, "a4": -7, "a6": 6},
                "points": [{"x": 1, "y": 0}, {"x": 1, "y": 0}],
            }
        )
        m = GlobalModule.from_curve(fixture.curve, fixture.free_points, ())
        assert m.independence_relation() is not None
        with pytest.raises(InputError):
            m.validate_independence()


class TestScanDivisibility:
    def test_l5_pattern1_includes_place_5(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        assert scan_divisibility(m, [p1], 5, [1], 10) == [5]

    def test_all_zero_pattern_means_odd_orders(self, rank3_module):
        m = rank3_module
        pts = gens(m)
        hits = scan_divisibility(m, pts, 2, [0, 0, 0], 60)
        for p in hits:
            assert all(m.ord_v(pt, p) % 2 == 1 for pt in pts)
        # And every non-hit violates the pattern.
        for p in m.good_places(60):
            if p not in hits:
                assert any(m.ord_v(pt, p) % 2 == 0 for pt in pts)

    def test_development_pinned_witnesses(self, rank3_module):
        m = rank3_module
        p1, p2, _ = gens(m)
        assert scan_divisibility(m, [p1, p2], 3, [1, 0], 300) == [163, 193]
        assert scan_divisibility(m, [p1, p2], 5, [1, 1], 300) == [5, 23, 67, 71, 229, 239]

    def test_returned_places_reverify_independently(self, rank3_module):
        m = rank3_module
        p1, p2, _ = gens(m)
        for p in scan_divisibility(m, [p1, p2], 3, [1, 0], 300):
            curve_p = reduce_curve(m.realization.curve, p)
            for point, k in (((1, 0, 0), 1), ((0, 1, 0), 0)):
                raw = m.reduce_raw(m.make_point(point), p)
                order = point_order(curve_p, raw)
                assert l_valuation(order, 3) == k

    def test_non_prime_l_rejected(self, rank3_module):
        with pytest.raises(InputError):
            scan_divisibility(rank3_module, gens(rank3_module), 6, [0, 0, 0], 10)

    def test_pattern_length_mismatch(self, rank3_module):
        with pytest.raises(InputError):
            scan_divisibility(rank3_module, gens(rank3_module), 3, [1], 10)

    def test_dependent_points_rejected(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        with pytest.raises(InputError):
            scan_divisibility(m, [p1, p1], 3, [1, 1], 10)

    def test_empty_result_is_data(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        # No place has ord divisible by 3^9 below a tiny bound.
        assert scan_divisibility(m, [p1], 3, [9], 30) == []


class TestTorsionInjectivity:
    def test_tors6_injects_at_good_places(self, tors6_module):
        m = tors6_module
        assert m.rank == 0
        assert m.torsion.invariant_factors == (6,)
        for p in m.good_places(200):
            assert torsion_injectivity_check(m, p)

    def test_trivial_torsion_always_injects(self, rank3_module):
        for p in rank3_module.good_places(30):
            assert torsion_injectivity_check(rank3_module, p)

    def test_synthetic_violation_detected(self, bad_torsion_module):
        m = bad_torsion_module
        assert not torsion_injectivity_check(m, 5)
        assert torsion_injectivity_check(m, 7)

    def test_image_order_six_at_five(self, tors6_module):
        m = tors6_module
        # #E(F_5) = 6 for y^2 = x^3 + 1: the torsion fills the whole group.
        local = m.local(5)
        assert local.concrete_order == 6
        assert torsion_injectivity_check(m, 5)


class TestSyntheticRealization:
    def test_tables_route(self, bad_torsion_module):
        m = bad_torsion_module
        point = m.make_point([3], [1])
        elem = m.reduce(point, 7)
        group = m.local(7).presentation.group
        # 3*gen + torsion image = 3*1 + 7 = 10 in Z/14.
        assert elem == group.element([10])
        assert m.ord_v(point, 7) == 7
        assert m.good_places(100) == [5, 7]
        assert m.place(11).status == "bad"
        assert m.place(3).status == "excluded"

    def test_validation(self):
        group = FiniteAbelianGroup((4,))
        with pytest.raises(InputError):
            GlobalModule.synthetic(
                1, [SyntheticPlace(4, group, (group.element([1]),), ())]
            )
        with pytest.raises(InputError):
            GlobalModule.synthetic(2, [SyntheticPlace(5, group, (group.element([1]),), ())])


class TestFixtureParsing:
    def test_torsion_claim_verified_on_load(self):
        with pytest.raises(FixtureError):
            module_from_dict(
                {
                    "curve": {"a1": 0, "a2": 0, "a3": 0, "a4": 0, "a6": 1},
                    "points": [{"x": 2, "y": 3, "order": 5}],
                }
            )

    def test_rational_coordinates(self):
        fixture = curve_fixture_from_dict(
            {
                "curve": {"a1": 0, "a2": 0, "a3": 1, "a4": -7, "a6": 6},
                "points": [{"x": "66/169", "y": "3056/2197"}],
            }
        )
        assert fixture.curve.is_on_curve(fixture.free_points[0])

    def test_missing_file(self):
        from mwlab.fixtures import load_curve_fixture

        with pytest.raises(FixtureError):
            load_curve_fixture("/nonexistent/path.json")

    def test_point_coordinate_validation(self, rank3_module):
        with pytest.raises(InputError):
            rank3_module.make_point([1, 2])
        with pytest.raises(InputError):
            rank3_module.check_point(GlobalPoint((1, 2, 3), (4,)))
