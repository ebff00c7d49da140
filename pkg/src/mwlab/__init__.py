"""mwlab: a desk-scale laboratory for local-to-global questions about
finitely generated abelian groups equipped with reduction maps to finite
groups.

The package is organised bottom-up:

* :mod:`mwlab.intlinalg` -- exact integer linear algebra (extended gcd,
  Smith normal form, linear congruence solving).
* :mod:`mwlab.abelian` -- finite abelian groups in invariant-factor form,
  subgroup membership, minimal-multiple relations, presentations.
* :mod:`mwlab.elliptic` -- elliptic curves over Q and prime fields:
  group law, reduction at good primes, naive point counting.
* :mod:`mwlab.reduction` -- global modules (free part + torsion) with a
  family of reduction homomorphisms, order scans, axiom checks.
* :mod:`mwlab.localglobal` -- trace-zero lattices, fixing-matrix
  certificates, exact local membership oracles, obstruction search.
* :mod:`mwlab.dynamics` -- forward orbits of endomorphisms globally and
  modulo a place, plus the consistency harness for the orbit principle.
* :mod:`mwlab.cli` -- command-line front end producing JSON reports.

Everything computes with exact integers; no floating point is used
anywhere in the package.
"""

from mwlab.errors import (
    CertificateError,
    FixtureError,
    InputError,
    ResourceLimitError,
)
from mwlab.intlinalg import IntMatrix, SnfDecomposition, ext_gcd, smith_normal_form, solve_mod
from mwlab.abelian import (
    Element,
    FiniteAbelianGroup,
    Presentation,
    element_order,
    minimal_multiple_in_subgroup,
    presentation_from_points,
    subgroup_membership,
)
from mwlab.elliptic import (
    INFINITY,
    CurvePoint,
    Place,
    WeierstrassCurve,
    group_order,
    place_of,
    point_order,
    reduce_curve,
    reduce_point,
    torsion_fixture_check,
)
from mwlab.reduction import (
    ExperimentSpec,
    GlobalModule,
    GlobalPoint,
    l_valuation,
    scan_divisibility,
    torsion_injectivity_check,
)
from mwlab.localglobal import (
    FixingMatrixCertificate,
    MethodFailure,
    ObstructionResult,
    TraceZeroLattice,
    build_counterexample,
    decide_local_membership_exact,
    find_fixing_matrix,
    find_local_obstruction,
    fixing_matrix_for_elements,
    global_membership,
    local_membership_exact,
)
from mwlab.dynamics import (
    EndoMap,
    OrbitModV,
    dynamical_lgp_experiment,
    global_orbit_intersection,
    orbit_mod_v,
)

__version__ = "0.1.0"

__all__ = [
    "CertificateError",
    "CurvePoint",
    "Element",
    "EndoMap",
    "ExperimentSpec",
    "FiniteAbelianGroup",
    "FixingMatrixCertificate",
    "FixtureError",
    "GlobalModule",
    "GlobalPoint",
    "INFINITY",
    "InputError",
    "IntMatrix",
    "MethodFailure",
    "ObstructionResult",
    "OrbitModV",
    "Place",
    "Presentation",
    "ResourceLimitError",
    "SnfDecomposition",
    "TraceZeroLattice",
    "WeierstrassCurve",
    "build_counterexample",
    "decide_local_membership_exact",
    "dynamical_lgp_experiment",
    "element_order",
    "ext_gcd",
    "find_fixing_matrix",
    "find_local_obstruction",
    "fixing_matrix_for_elements",
    "global_membership",
    "global_orbit_intersection",
    "group_order",
    "l_valuation",
    "local_membership_exact",
    "minimal_multiple_in_subgroup",
    "orbit_mod_v",
    "place_of",
    "point_order",
    "presentation_from_points",
    "reduce_curve",
    "reduce_point",
    "scan_divisibility",
    "smith_normal_form",
    "solve_mod",
    "subgroup_membership",
    "torsion_fixture_check",
    "torsion_injectivity_check",
]
