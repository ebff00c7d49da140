import math
import random
from itertools import product

import pytest

from mwlab.abelian import FiniteAbelianGroup
from mwlab.errors import CertificateError, InputError
from mwlab.intlinalg import IntMatrix
from mwlab.localglobal import (
    FixingMatrixCertificate,
    MethodFailure,
    build_counterexample,
    decide_local_membership_exact,
    find_fixing_matrix,
    find_local_obstruction,
    fixing_matrix_for_elements,
    global_membership,
    local_membership_exact,
)


def brute_force_membership(group, elements):
    """Exhaustive oracle: is there an integer matrix with exact trace 0
    fixing the vector?  Entries only matter modulo the exponent, and any
    trace divisible by the exponent lifts to an exact-trace-zero integer
    matrix, so scanning residue matrices with trace = 0 (mod exponent) is
    a complete search."""
    e = len(elements)
    exponent = group.exponent()
    for flat in product(range(exponent), repeat=e * e):
        trace = sum(flat[i * e + i] for i in range(e))
        if trace % exponent:
            continue
        rows = [flat[i * e : (i + 1) * e] for i in range(e)]
        if all(group.combine(rows[i], elements) == elements[i] for i in range(e)):
            return True
    return False


def random_instance(rng, max_order=200):
    while True:
        rank = rng.randint(1, 3)
        factors = []
        d = rng.randint(2, 13)
        total = 1
        for _ in range(rank):
            factors.append(d)
            total *= d
            d *= rng.choice([1, 1, 1, 2, 3])
        if total <= max_order:
            group = FiniteAbelianGroup(tuple(factors))
            e = rng.choice([2, 3, 4])
            elements = [
                group.element([rng.randrange(f) for f in group.invariant_factors])
                for _ in range(e)
            ]
            return group, elements


def gens(module):
    return [
        module.make_point([1 if i == j else 0 for j in range(module.rank)])
        for i in range(module.rank)
    ]


class TestFixingMatrixCore:
    def test_mod5_worked_example(self):
        group = FiniteAbelianGroup((5,))
        elements = [group.element([c]) for c in (1, 2, 3)]
        cert = fixing_matrix_for_elements(group, elements)
        assert isinstance(cert, FixingMatrixCertificate)
        assert cert.alphas == (1, 1, 1)
        assert sum(a * alpha for a, alpha in zip(cert.bezout, cert.alphas)) == 3
        assert cert.matrix.trace() == 0
        cert.verify()
        # Existence cross-checked by enumerating all trace-zero matrices.
        assert brute_force_membership(group, elements)

    def test_zero_vector_certificate(self):
        group = FiniteAbelianGroup((5,))
        elements = [group.zero()] * 3
        cert = fixing_matrix_for_elements(group, elements)
        assert isinstance(cert, FixingMatrixCertificate)
        assert cert.alphas == (1, 1, 1)
        cert.verify()

    def test_z4_instance_succeeds_with_unit_gcd(self):
        # alpha_1 = 2 (2*1 = 2 lies in <2>) but alpha_2 = 1 because <1> is
        # everything, so the gcd is 1 and the construction goes through.
        group = FiniteAbelianGroup((4,))
        elements = [group.element([1]), group.element([2])]
        cert = fixing_matrix_for_elements(group, elements)
        assert isinstance(cert, FixingMatrixCertificate)
        assert cert.alphas == (2, 1)
        cert.verify()
        member, witness = local_membership_exact(group, elements)
        assert member and witness is not None
        assert brute_force_membership(group, elements)

    def test_method_failure_klein_four(self):
        # Basis of Z/2 x Z/2: every alpha is 2, so the gcd step blocks.
        group = FiniteAbelianGroup((2, 2))
        elements = [group.element([1, 0]), group.element([0, 1])]
        outcome = fixing_matrix_for_elements(group, elements)
        assert isinstance(outcome, MethodFailure)
        assert outcome.gcd == 2
        assert outcome.alphas == (2, 2)
        # gcd 2 divides e = 2, so membership nevertheless holds (witness
        # diag(1, -1)); the method, not the fact, failed.
        member, witness = local_membership_exact(group, elements)
        assert member and witness is not None
        assert brute_force_membership(group, elements)

    def test_method_failure_three_torsion_is_genuine_obstruction(self):
        # Basis of Z/3 x Z/3: gcd(alpha) = 3 does not divide e = 2 and the
        # membership genuinely fails.
        group = FiniteAbelianGroup((3, 3))
        elements = [group.element([1, 0]), group.element([0, 1])]
        outcome = fixing_matrix_for_elements(group, elements)
        assert isinstance(outcome, MethodFailure)
        assert outcome.gcd == 3
        member, witness = local_membership_exact(group, elements)
        assert member is False and witness is None
        assert not brute_force_membership(group, elements)

    def test_trivial_group(self):
        group = FiniteAbelianGroup(())
        elements = [group.zero(), group.zero()]
        cert = fixing_matrix_for_elements(group, elements)
        assert isinstance(cert, FixingMatrixCertificate)
        cert.verify()
        member, witness = local_membership_exact(group, elements)
        assert member and witness.entries == (0, 0, 0, 0)

    def test_method_success_implies_oracle_on_random_instances(self):
        rng = random.Random(20260811)
        successes = failures = 0
        for _ in range(500):
            group, elements = random_instance(rng)
            outcome = fixing_matrix_for_elements(group, elements)
            member, witness = local_membership_exact(group, elements)
            if isinstance(outcome, FixingMatrixCertificate):
                successes += 1
                outcome.verify()
                assert member, (group, elements)
            else:
                failures += 1
                # The trace argument localises exactly: membership holds
                # iff gcd(alpha) divides e.
                assert member == (len(elements) % outcome.gcd == 0)
            if member:
                assert witness is not None
                assert witness.trace() == 0
        assert successes >= 100  # the generator must exercise both paths
        assert failures >= 5

    def test_oracle_agrees_with_enumeration_on_small_groups(self):
        rng = random.Random(5)
        for _ in range(40):
            group, elements = random_instance(rng, max_order=9)
            elements = elements[:2]
            member, _ = local_membership_exact(group, elements)
            assert member == brute_force_membership(group, elements)

    def test_trace_identity(self):
        rng = random.Random(6)
        for _ in range(80):
            group, elements = random_instance(rng, max_order=100)
            outcome = fixing_matrix_for_elements(group, elements)
            if isinstance(outcome, FixingMatrixCertificate):
                e = len(elements)
                assert sum(1 - a * al for a, al in zip(outcome.bezout, outcome.alphas)) == 0
                assert sum(a * al for a, al in zip(outcome.bezout, outcome.alphas)) == e


class TestCertificateSerialization:
    def test_roundtrip(self):
        group = FiniteAbelianGroup((5,))
        cert = fixing_matrix_for_elements(group, [group.element([c]) for c in (1, 2, 3)])
        data = cert.to_dict()
        rebuilt = FixingMatrixCertificate.from_dict(data)
        rebuilt.verify()
        assert rebuilt == cert
        assert all(entry["ok"] for entry in data["transcript"])

    def test_tampering_detected(self):
        group = FiniteAbelianGroup((5,))
        cert = fixing_matrix_for_elements(group, [group.element([c]) for c in (1, 2, 3)])
        data = cert.to_dict()
        data["matrix"][0][1] += 1
        tampered = FixingMatrixCertificate.from_dict(data)
        with pytest.raises(CertificateError):
            tampered.verify()
        data["matrix"][0][1] -= 1
        data["alphas"][0] = 5
        tampered = FixingMatrixCertificate.from_dict(data)
        with pytest.raises(CertificateError):
            tampered.verify()


class TestLattice:
    def test_build_and_tagging(self, rank3_module):
        lattice = build_counterexample(rank3_module, gens(rank3_module))
        assert lattice.tagged  # e = 3 = dimension + 1
        assert lattice.num_points == 3
        two = build_counterexample(rank3_module, gens(rank3_module)[:2])
        assert not two.tagged

    def test_too_few_points(self, rank3_module):
        with pytest.raises(InputError):
            build_counterexample(rank3_module, gens(rank3_module)[:1])

    def test_duplicate_points_report_dependence(self, rank3_module):
        p1 = gens(rank3_module)[0]
        lattice = build_counterexample(rank3_module, [p1, p1])
        rel = lattice.independence_relation()
        assert rel is not None and any(rel)

    def test_global_membership_false_for_independent_points(self, rank3_module):
        lattice = build_counterexample(rank3_module, gens(rank3_module))
        verdict = global_membership(lattice)
        assert verdict.member is False
        assert "identity" in verdict.reason

    def test_global_membership_true_for_repeated_point(self, rank3_module):
        p1 = gens(rank3_module)[0]
        lattice = build_counterexample(rank3_module, [p1, p1])
        verdict = global_membership(lattice)
        assert verdict.member is True
        w = verdict.witness
        assert w is not None and w.trace() == 0
        # The witness fixes the vector over the free coordinates.
        for i in range(2):
            combo = [0, 0, 0]
            for j, pt in enumerate(lattice.points):
                for r in range(3):
                    combo[r] += w.entry(i, j) * pt.free[r]
            assert tuple(combo) == lattice.points[i].free

    def test_global_membership_zero_vector(self, rank3_module):
        z = rank3_module.zero_point()
        lattice = build_counterexample(rank3_module, [z, z])
        verdict = global_membership(lattice)
        assert verdict.member is True
        assert verdict.witness.entries == (0, 0, 0, 0)


class TestLocalCertificatesOnCurve:
    def test_certificates_at_small_places(self, rank3_module):
        lattice = build_counterexample(rank3_module, gens(rank3_module))
        for p in rank3_module.good_places(60):
            cert = find_fixing_matrix(lattice, p)
            assert isinstance(cert, FixingMatrixCertificate), (p, cert)
            assert cert.place == p
            assert math.gcd(*cert.alphas) == 1
            assert sum(a * al for a, al in zip(cert.bezout, cert.alphas)) == 3
            cert.verify()
            member, witness = decide_local_membership_exact(lattice, p)
            assert member and witness is not None

    def test_determinism(self, rank3_module):
        lattice = build_counterexample(rank3_module, gens(rank3_module))
        assert find_fixing_matrix(lattice, 11) == find_fixing_matrix(lattice, 11)

    def test_bad_place_rejected(self, rank3_module):
        lattice = build_counterexample(rank3_module, gens(rank3_module))
        with pytest.raises(InputError):
            find_fixing_matrix(lattice, 5077)


class TestObstruction:
    def test_pinned_witness_for_p3_versus_p1(self, rank3_module):
        m = rank3_module
        p1, _, p3 = gens(m)
        result = find_local_obstruction(m, p3, [p1], 100)
        assert result.place == 5

    def test_all_small_witnesses(self, rank3_module):
        from mwlab.abelian import subgroup_membership

        m = rank3_module
        p1, _, p3 = gens(m)
        witnesses = []
        for p in m.good_places(60):
            local = m.local(p)
            if (
                subgroup_membership(
                    local.presentation.group, m.reduce(p3, p), [m.reduce(p1, p)]
                )
                is None
            ):
                witnesses.append(p)
        assert witnesses == [5, 13, 23, 41, 53]

    def test_member_point_never_obstructed(self, rank3_module):
        m = rank3_module
        p1 = gens(m)[0]
        result = find_local_obstruction(m, m.scale_point(2, p1), [p1], 300)
        assert result.place is None
        assert result.searched_bound == 300

    def test_torsion_point_obstructed_where_it_injects(self, tors6_module):
        m = tors6_module
        t = m.make_point([], [1])
        result = find_local_obstruction(m, t, [], 50)
        assert result.place == 5
