"""Command-line front end.

Subcommands:

* ``counterexample`` -- build the trace-zero lattice over a module's
  declared generators, decide global membership, and construct a
  fixing-matrix certificate at every good place up to the bound.
* ``dynamics`` -- run the local/global orbit experiment described by an
  experiment fixture.
* ``scan-orders`` -- exhaustive scan for places realizing an exact
  l-divisibility pattern of reduced orders.
* ``axioms`` -- check torsion injectivity and generator independence.
* ``verify-report`` -- re-validate a previously written report from its
  recorded data alone.

Exit codes: 0 = all checks passed; 1 = a mathematical expectation was
violated (an anomaly worth investigating); 2 = usage or input error.

Reports are deterministic: identical config and seed produce
byte-identical JSON apart from the timing block, regardless of the
parallelism degree (place records are always merged in ascending order).
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

from mwlab.abelian import element_order
from mwlab.arith import is_prime, valuation
from mwlab.dynamics import (
    VERDICT_ANOMALY,
    EndoMap,
    dynamical_lgp_experiment,
)
from mwlab.errors import CertificateError, FixtureError, InputError, ResourceLimitError
from mwlab.fixtures import (
    experiment_from_dict,
    load_experiment,
    load_module,
    module_from_dict,
    _read_json,
)
from mwlab.localglobal import (
    FixingMatrixCertificate,
    build_counterexample,
    decide_local_membership_exact,
    find_fixing_matrix,
    global_membership,
)
from mwlab.reduction import (
    ExperimentSpec,
    GlobalModule,
    scan_divisibility,
    torsion_injectivity_check,
)
from mwlab.report import (
    load_report,
    make_report,
    report_to_json,
    verify_report,
    write_report,
)

EXIT_OK = 0
EXIT_ANOMALY = 1
EXIT_USAGE = 2


def module_generators(module: GlobalModule):
    return [
        module.make_point([1 if i == j else 0 for j in range(module.rank)])
        for i in range(module.rank)
    ]


def _certificate_record(lattice, place: int) -> dict[str, Any]:
    outcome = find_fixing_matrix(lattice, place)
    member, witness = decide_local_membership_exact(lattice, place)
    group = lattice.module.local(place).presentation.group
    points = [list(lattice.module.reduce(pt, place).coords) for pt in lattice.points]
    record: dict[str, Any] = {
        "place": place,
        "group": list(group.invariant_factors),
        "points": points,
        "certificate": None,
        "method_failure": None,
        "oracle": {
            "member": member,
            "witness": witness.to_rows() if witness is not None else None,
        },
    }
    if isinstance(outcome, FixingMatrixCertificate):
        record["certificate"] = outcome.to_dict()
    else:
        record["method_failure"] = outcome.to_dict()
    return record


def _counterexample_worker(payload) -> list[dict[str, Any]]:
    module_data, base_dir, places = payload
    module = module_from_dict(module_data, base_dir=base_dir)
    lattice = build_counterexample(module, module_generators(module))
    return [_certificate_record(lattice, p) for p in places]


def _chunks(items: Sequence, n: int) -> list[list]:
    n = max(1, n)
    size = (len(items) + n - 1) // n
    return [list(items[i : i + size]) for i in range(0, len(items), size)]


def run_counterexample(args) -> tuple[int, dict[str, Any]]:
    started = time.monotonic()
    fixture_path = Path(args.fixture)
    module_data = _read_json(fixture_path)
    module = module_from_dict(module_data, base_dir=fixture_path.parent)
    module.validate_independence()
    generators = module_generators(module)
    lattice = build_counterexample(module, generators)
    verdict_global = global_membership(lattice)
    places = module.good_places(args.place_bound)

    jobs = max(1, min(args.jobs, len(places) or 1))
    if jobs > 1:
        payloads = [
            (module_data, str(fixture_path.parent), chunk)
            for chunk in _chunks(places, jobs)
        ]
        records: list[dict[str, Any]] = []
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for part in pool.map(_counterexample_worker, payloads):
                records.extend(part)
    else:
        records = [_certificate_record(lattice, p) for p in places]
    records.sort(key=lambda r: r["place"])

    certificates = sum(1 for r in records if r["certificate"] is not None)
    failures = sum(1 for r in records if r["method_failure"] is not None)
    oracle_disagreements = sum(
        1
        for r in records
        if r["certificate"] is not None and not r["oracle"]["member"]
    )
    anomaly = lattice.tagged and (failures > 0 or oracle_disagreements > 0)
    if lattice.tagged:
        status = "anomaly" if anomaly else "ok"
    else:
        status = "informational"
    summary = (
        f"local membership at {certificates}/{len(places)} places, "
        f"global non-membership: "
        f"{'CONFIRMED' if not verdict_global.member else 'REFUTED'}"
    )
    spec = ExperimentSpec(
        module.dimension,
        lattice.num_points,
        l=args.l,
        twist_index=int(module_data.get("twist_index", 0)),
    )
    body = {
        "experiment": {
            "dimension": spec.dimension,
            "num_points": spec.num_points,
            "tagged": lattice.tagged,
            "twist_index": spec.twist_index,
        },
        "independence": {"relation": None},
        "global": verdict_global.to_dict(),
        "records": records,
        "verdict": {
            "status": status,
            "summary": summary,
            "places_scanned": len(places),
            "certificates": certificates,
            "method_failures": failures,
            "oracle_disagreements": oracle_disagreements,
        },
    }
    config = {
        "fixture": str(args.fixture),
        "place_bound": args.place_bound,
        "seed": args.seed,
    }
    report = make_report(
        "counterexample", config, body, int((time.monotonic() - started) * 1000)
    )
    print(summary)
    if not lattice.tagged:
        print(
            f"note: e = {lattice.num_points} != d + 1 = {module.dimension + 1}; "
            "verdict is informational"
        )
    return (EXIT_ANOMALY if anomaly else EXIT_OK), report


def run_dynamics(args) -> tuple[int, dict[str, Any]]:
    started = time.monotonic()
    fixture_path = Path(args.fixture)
    fixture_data = _read_json(fixture_path)
    fixture = experiment_from_dict(fixture_data, base_dir=fixture_path.parent)
    place_bound = args.place_bound or fixture.place_bound
    step_bound = args.step_bound or fixture.step_bound
    outcome = dynamical_lgp_experiment(
        fixture.module,
        fixture.phi,
        fixture.point,
        fixture.lattice_gens,
        place_bound,
        step_bound,
    )
    body = {
        "experiment_report": outcome.to_dict(),
        "phi": fixture.phi.describe(),
        "verdict": {"status": outcome.verdict},
    }
    config = {
        "fixture": str(args.fixture),
        "place_bound": place_bound,
        "step_bound": step_bound,
        "seed": args.seed,
    }
    report = make_report(
        "dynamics", config, body, int((time.monotonic() - started) * 1000)
    )
    print(f"dynamics verdict: {outcome.verdict}")
    if outcome.global_result.step is not None:
        print(f"global orbit meets the lattice at step {outcome.global_result.step}")
    else:
        print(
            f"global orbit misses the lattice up to step {step_bound}; "
            f"{sum(1 for o in outcome.orbits if o.first_hit is None)} of "
            f"{len(outcome.orbits)} scanned places miss locally"
        )
    return (EXIT_ANOMALY if outcome.verdict == VERDICT_ANOMALY else EXIT_OK), report


def run_scan(args) -> tuple[int, dict[str, Any]]:
    started = time.monotonic()
    if args.l is None or args.pattern is None:
        raise InputError("scan-orders requires --l and --pattern")
    pattern = [int(k) for k in args.pattern.split(",")]
    module = load_module(args.fixture)
    points = module_generators(module)
    hits = scan_divisibility(module, points, args.l, pattern, args.place_bound)

    records = []
    anomalies = []
    for p in hits:
        orders = [module.ord_v(pt, p) for pt in points]
        vals = [valuation(o, args.l) for o in orders]
        # Independent re-verification through the presentation route.
        pres = module.local(p).presentation
        recheck = [
            element_order(pres.group, module.reduce(pt, p)) for pt in points
        ]
        if recheck != orders or vals != pattern:
            anomalies.append(p)
        records.append({"place": p, "orders": orders, "valuations": vals})
    body = {
        "records": records,
        "verdict": {
            "hits": hits,
            "places_scanned": len(module.good_places(args.place_bound)),
            "reverified": not anomalies,
            "anomalies": anomalies,
        },
    }
    config = {
        "fixture": str(args.fixture),
        "place_bound": args.place_bound,
        "l": args.l,
        "pattern": pattern,
        "seed": args.seed,
    }
    report = make_report(
        "scan-orders", config, body, int((time.monotonic() - started) * 1000)
    )
    print(
        f"scan l={args.l} pattern={pattern}: {len(hits)} matching places "
        f"up to {args.place_bound}: {hits[:12]}{' ...' if len(hits) > 12 else ''}"
    )
    return (EXIT_ANOMALY if anomalies else EXIT_OK), report


def run_axioms(args) -> tuple[int, dict[str, Any]]:
    started = time.monotonic()
    module = load_module(args.fixture)
    rng = random.Random(args.seed)
    places = module.good_places(args.place_bound)
    records = []
    injectivity_failures = []
    torsion_order = module.torsion.order()
    for p in places:
        ok = torsion_injectivity_check(module, p)
        image = (
            module.realization.torsion_image_order(p, module.torsion)
            if torsion_order > 1
            else 1
        )
        records.append(
            {
                "kind": "torsion_injectivity",
                "place": p,
                "torsion_order": torsion_order,
                "image_order": image,
                "injective": ok,
            }
        )
        if not ok:
            injectivity_failures.append(p)

    relation = module.independence_relation()
    homomorphism_failures = []
    if module.rank:
        sample_places = places[:: max(1, len(places) // 10)][:10]
        for p in sample_places:
            group = module.local(p).presentation.group
            trials_ok = True
            for _ in range(5):
                a = module.make_point([rng.randint(-6, 6) for _ in range(module.rank)])
                b = module.make_point([rng.randint(-6, 6) for _ in range(module.rank)])
                lhs = module.reduce(module.add_points(a, b), p)
                rhs = group.add(module.reduce(a, p), module.reduce(b, p))
                if lhs != rhs:
                    trials_ok = False
            records.append({"kind": "homomorphism", "place": p, "ok": trials_ok})
            if not trials_ok:
                homomorphism_failures.append(p)

    anomaly = bool(injectivity_failures or homomorphism_failures or relation)
    body = {
        "records": records,
        "independence": {"relation": list(relation) if relation else None},
        "verdict": {
            "status": "anomaly" if anomaly else "ok",
            "injectivity_failures": injectivity_failures,
            "homomorphism_failures": homomorphism_failures,
            "places_scanned": len(places),
        },
    }
    config = {
        "fixture": str(args.fixture),
        "place_bound": args.place_bound,
        "seed": args.seed,
    }
    report = make_report(
        "axioms", config, body, int((time.monotonic() - started) * 1000)
    )
    print(
        f"axioms: {len(places)} places scanned, "
        f"{len(injectivity_failures)} injectivity failures"
        + (f" at {injectivity_failures}" if injectivity_failures else "")
    )
    return (EXIT_ANOMALY if anomaly else EXIT_OK), report


def run_verify_report(args) -> tuple[int, dict[str, Any] | None]:
    try:
        report = load_report(args.report)
    except (OSError, json.JSONDecodeError) as exc:
        raise FixtureError(f"cannot read report {args.report}: {exc}") from exc
    problems = verify_report(report)
    if problems:
        for problem in problems:
            print(f"FAIL: {problem}")
        print(f"verify-report: {len(problems)} problem(s) found")
        return EXIT_ANOMALY, None
    print("verify-report: all recorded claims re-validated")
    return EXIT_OK, None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwlab",
        description="local-to-global experiments on Mordell-Weil type groups",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fixture=True):
        if fixture:
            p.add_argument("--fixture", required=True, help="fixture file (JSON)")
        p.add_argument("--place-bound", type=int, default=None, help="scan places up to this bound")
        p.add_argument("--step-bound", type=int, default=None, help="orbit search depth")
        p.add_argument("--l", type=int, default=None, help="the prime l for order scans")
        p.add_argument("--pattern", default=None, help="comma-separated exact l-valuations")
        p.add_argument("--out", default=None, help="write the JSON report here")
        p.add_argument("--jobs", type=int, default=os.cpu_count() or 1,
                       help="parallel workers for place-level scans")
        p.add_argument("--seed", type=int, default=0, help="seed for randomized spot checks")

    common(sub.add_parser("counterexample", help="certificates at every good place"))
    common(sub.add_parser("dynamics", help="orbit local-to-global experiment"))
    common(sub.add_parser("scan-orders", help="order divisibility scan"))
    common(sub.add_parser("axioms", help="torsion injectivity and independence checks"))
    verify = sub.add_parser("verify-report", help="re-validate a serialized report")
    verify.add_argument("report", help="path to a previously written report")
    verify.add_argument("--out", default=None, help=argparse.SUPPRESS)
    return parser


_DEFAULT_PLACE_BOUNDS = {
    "counterexample": 1000,
    "dynamics": None,  # fixture decides
    "scan-orders": 1000,
    "axioms": 1000,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "verify-report":
            code, report = run_verify_report(args)
        else:
            if args.place_bound is None:
                args.place_bound = _DEFAULT_PLACE_BOUNDS[args.command]
            if args.command == "counterexample":
                code, report = run_counterexample(args)
            elif args.command == "dynamics":
                code, report = run_dynamics(args)
            elif args.command == "scan-orders":
                code, report = run_scan(args)
            else:
                code, report = run_axioms(args)
        if report is not None and args.out:
            write_report(report, args.out)
            print(f"report written to {args.out}")
        return code
    except (InputError, FixtureError, ResourceLimitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CertificateError as exc:
        print(f"anomaly: {exc}", file=sys.stderr)
        return EXIT_ANOMALY


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
