"""Machine-readable reports and their offline re-validation.

Every CLI run emits one JSON report: tool version, schema version, a
config echo, per-place records, and a verdict block.  Records carry
enough finite data (group invariant factors, point coordinates,
certificates, orbit transcripts) that every mathematical claim can be
re-checked from the report alone -- ``verify_report`` does exactly that,
with no recomputation of any scan and no access to the original fixtures.

Timing is recorded as integer milliseconds and is the only field allowed
to differ between two runs of the same configuration.
"""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any

from mwlab.abelian import FiniteAbelianGroup
from mwlab.arith import is_prime, valuation
from mwlab.errors import CertificateError
from mwlab.intlinalg import IntMatrix
from mwlab.localglobal import FixingMatrixCertificate

SCHEMA_VERSION = 1
TOOL_NAME = "mwlab"


def make_report(
    command: str,
    config: dict[str, Any],
    body: dict[str, Any],
    elapsed_ms: int,
) -> dict[str, Any]:
    from mwlab import __version__

    report = {
        "schema": SCHEMA_VERSION,
        "tool": {"name": TOOL_NAME, "version": __version__},
        "command": command,
        "config": config,
        "timing": {"elapsed_ms": elapsed_ms},
    }
    report.update(body)
    return report


def report_to_json(report: dict[str, Any]) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: dict[str, Any], path: str | Path) -> None:
    Path(path).write_text(report_to_json(report))


def load_report(path: str | Path) -> dict[str, Any]:
    return json.loads(Path(path).read_text())


def _verify_matrix_fixes(group_factors, point_rows, matrix_rows) -> bool:
    group = FiniteAbelianGroup(tuple(group_factors))
    pts = [group.element(tuple(c)) for c in point_rows]
    e = len(pts)
    matrix = IntMatrix.from_rows(matrix_rows, cols=e)
    if matrix.trace() != 0:
        return False
    return all(group.combine(matrix.row(i), pts) == pts[i] for i in range(e))


def _verify_counterexample(report: dict[str, Any], problems: list[str]) -> None:
    tagged = report.get("experiment", {}).get("tagged", False)
    expected_failures = 0
    expected_certificates = 0
    for record in report.get("records", []):
        place = record.get("place")
        cert_data = record.get("certificate")
        oracle = record.get("oracle", {})
        if cert_data is not None:
            expected_certificates += 1
            try:
                cert = FixingMatrixCertificate.from_dict(cert_data)
                cert.verify()
            except (CertificateError, KeyError, ValueError) as exc:
                problems.append(f"place {place}: certificate invalid: {exc}")
                continue
            if cert_data.get("place") != place:
                problems.append(f"place {place}: certificate carries wrong place")
            if record.get("group") != cert_data.get("group") or record.get(
                "points"
            ) != cert_data.get("points"):
                problems.append(f"place {place}: record/certificate data mismatch")
            if not oracle.get("member", False):
                problems.append(
                    f"place {place}: certificate exists but oracle recorded non-membership"
                )
        else:
            failure = record.get("method_failure")
            if failure is None:
                problems.append(f"place {place}: neither certificate nor failure")
                continue
            expected_failures += 1
            if math.gcd(*failure.get("alphas", [0])) != failure.get("gcd"):
                problems.append(f"place {place}: method failure gcd inconsistent")
            if failure.get("gcd", 1) <= 1:
                problems.append(f"place {place}: method failure with unit gcd")
        witness = oracle.get("witness")
        if oracle.get("member") and witness is not None:
            if not _verify_matrix_fixes(
                record.get("group", []), record.get("points", []), witness
            ):
                problems.append(f"place {place}: oracle witness fails to re-verify")
    verdict = report.get("verdict", {})
    if verdict.get("method_failures") != expected_failures:
        problems.append("verdict method_failures count disagrees with records")
    if verdict.get("certificates") != expected_certificates:
        problems.append("verdict certificate count disagrees with records")
    if tagged and expected_failures and verdict.get("status") != "anomaly":
        problems.append("tagged candidate with method failures must be an anomaly")
    member = report.get("global", {}).get("member")
    witness = report.get("global", {}).get("witness")
    if member and witness is None:
        problems.append("global membership claimed without a witness")
    if member and witness is not None:
        matrix = IntMatrix.from_rows(witness, cols=len(witness))
        if matrix.trace() != 0:
            problems.append("global witness does not have trace zero")


def _verify_scan(report: dict[str, Any], problems: list[str]) -> None:
    config = report.get("config", {})
    l = config.get("l")
    pattern = config.get("pattern", [])
    if not (isinstance(l, int) and is_prime(l)):
        problems.append(f"scan used non-prime l = {l}")
        return
    for record in report.get("records", []):
        orders = record.get("orders", [])
        vals = record.get("valuations", [])
        if len(orders) != len(pattern) or len(vals) != len(pattern):
            problems.append(f"place {record.get('place')}: record shape mismatch")
            continue
        for order, v, k in zip(orders, vals, pattern):
            if valuation(order, l) != v:
                problems.append(
                    f"place {record.get('place')}: recorded valuation inconsistent"
                )
            if v != k:
                problems.append(
                    f"place {record.get('place')}: pattern not satisfied by records"
                )
    hits = [r.get("place") for r in report.get("records", [])]
    if report.get("verdict", {}).get("hits") != hits:
        problems.append("verdict hit list disagrees with records")


def _verify_axioms(report: dict[str, Any], problems: list[str]) -> None:
    failures = []
    for record in report.get("records", []):
        if record.get("kind") != "torsion_injectivity":
            continue
        consistent = record.get("injective") == (
            record.get("image_order") == record.get("torsion_order")
        )
        if not consistent:
            problems.append(
                f"place {record.get('place')}: injectivity flag inconsistent"
            )
        if not record.get("injective"):
            failures.append(record.get("place"))
    if report.get("verdict", {}).get("injectivity_failures") != failures:
        problems.append("verdict failure list disagrees with records")


def _verify_dynamics(report: dict[str, Any], problems: list[str]) -> None:
    body = report.get("experiment_report", {})
    orbits = body.get("orbits", [])
    for orbit in orbits:
        visited = orbit.get("visited", [])
        if orbit.get("preperiod", 0) + orbit.get("cycle", 0) != len(visited):
            problems.append(
                f"place {orbit.get('place')}: orbit shape inconsistent"
            )
    step = body.get("global", {}).get("step")
    verdict = body.get("verdict")
    if body.get("precondition_failures"):
        if verdict != "PRECONDITION-VIOLATED":
            problems.append("precondition failures recorded without the matching verdict")
        return
    hits = [o.get("first_hit") for o in orbits]
    if step is not None:
        compatible = all(h is not None and h <= step for h in hits)
        # A hit later than the global step can still be compatible via the
        # cycle; the harness records that case as CONSISTENT, so only the
        # plainly impossible combination is flagged here.
        if verdict == "CONSISTENT" and any(h is None for h in hits):
            problems.append("global hit recorded alongside a place whose orbit misses")
        if verdict == "INCONSISTENT-ANOMALY" and compatible:
            problems.append("anomaly verdict but every place hit compatibly")
    else:
        if any(h is None for h in hits):
            if verdict != "CONSISTENT":
                problems.append("a miss witness exists; verdict should be CONSISTENT")
        elif orbits and verdict == "CONSISTENT":
            problems.append("all places hit and global missed; CONSISTENT is unsupported")


def verify_report(report: dict[str, Any]) -> list[str]:
    """Re-validate a serialized report; returns a list of problems."""
    problems: list[str] = []
    if report.get("schema") != SCHEMA_VERSION:
        problems.append(f"unsupported schema version {report.get('schema')!r}")
        return problems
    command = report.get("command")
    if command == "counterexample":
        _verify_counterexample(report, problems)
    elif command == "scan-orders":
        _verify_scan(report, problems)
    elif command == "axioms":
        _verify_axioms(report, problems)
    elif command == "dynamics":
        _verify_dynamics(report, problems)
    else:
        problems.append(f"unknown command {command!r}")
    return problems
