"""Fixture file parsing: curves, modules, and experiment descriptions.

All fixture files are JSON.  Exact rationals are written either as
integers or as "num/den" strings; see README for the complete grammar.

Three document kinds exist:

* curve fixture -- a curve over Q with its distinguished points.  Points
  carrying an "order" are torsion claims (verified exactly on load);
  points without one are declared free generators.
* module description -- either a reference to (or inline copy of) a curve
  fixture, or a synthetic per-place image table, plus caps and bounds.
* experiment description -- a module plus an endomorphism, a start point,
  lattice generators, and default bounds, consumed by the dynamics CLI.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any

from mwlab.abelian import DEFAULT_SUBGROUP_CAP, FiniteAbelianGroup
from mwlab.dynamics import EndoMap
from mwlab.elliptic import DEFAULT_COUNT_CAP, CurvePoint, WeierstrassCurve
from mwlab.errors import FixtureError
from mwlab.reduction import (
    DEFAULT_INDEPENDENCE_BOX,
    GlobalModule,
    GlobalPoint,
    SyntheticPlace,
)


def parse_rational(value: Any) -> Fraction:
    """An exact rational from an int or a 'num/den' string."""
    if isinstance(value, bool):
        raise FixtureError(f"not a rational: {value!r}")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError) as exc:
            raise FixtureError(f"not a rational: {value!r}") from exc
    raise FixtureError(f"not a rational: {value!r}")


@dataclass(frozen=True)
class CurveFixture:
    name: str
    curve: WeierstrassCurve
    free_points: tuple[CurvePoint, ...]
    torsion_claims: tuple[tuple[CurvePoint, int], ...]


def _require(data: dict, key: str, context: str) -> Any:
    if key not in data:
        raise FixtureError(f"{context}: missing required key {key!r}")
    return data[key]


def curve_fixture_from_dict(data: dict) -> CurveFixture:
    coeffs = _require(data, "curve", "curve fixture")
    curve = WeierstrassCurve(
        *(int(_require(coeffs, k, "curve coefficients")) for k in ("a1", "a2", "a3", "a4", "a6"))
    )
    free: list[CurvePoint] = []
    torsion: list[tuple[CurvePoint, int]] = []
    for entry in data.get("points", []):
        pt = curve.point(
            parse_rational(_require(entry, "x", "point")),
            parse_rational(_require(entry, "y", "point")),
        )
        if "order" in entry:
            torsion.append((pt, int(entry["order"])))
        else:
            free.append(pt)
    return CurveFixture(
        str(data.get("name", "curve")), curve, tuple(free), tuple(torsion)
    )


def load_curve_fixture(path: str | Path) -> CurveFixture:
    return curve_fixture_from_dict(_read_json(path))


def _read_json(path: str | Path) -> dict:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError as exc:
        raise FixtureError(f"fixture file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise FixtureError(f"fixture file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise FixtureError(f"fixture file {path} must hold a JSON object")
    return data


def module_from_dict(data: dict, base_dir: str | Path | None = None) -> GlobalModule:
    """Build a GlobalModule from a module description.

    Elliptic realizations reference a curve fixture by path (resolved
    relative to ``base_dir``) or inline it under "curve"/"points";
    synthetic realizations declare per-place image tables.
    """
    name = str(data.get("name", "module"))
    if "synthetic" in data:
        synth = data["synthetic"]
        group_cache: dict[tuple[int, ...], FiniteAbelianGroup] = {}

        def group_of(factors) -> FiniteAbelianGroup:
            key = tuple(int(d) for d in factors)
            if key not in group_cache:
                group_cache[key] = FiniteAbelianGroup(key)
            return group_cache[key]

        rank = int(_require(synth, "rank", "synthetic realization"))
        torsion = FiniteAbelianGroup(tuple(int(d) for d in synth.get("torsion", [])))
        places = []
        for entry in _require(synth, "places", "synthetic realization"):
            group = group_of(_require(entry, "group", "synthetic place"))
            places.append(
                SyntheticPlace(
                    int(_require(entry, "p", "synthetic place")),
                    group,
                    tuple(group.element(c) for c in entry.get("free_images", [])),
                    tuple(group.element(c) for c in entry.get("torsion_images", [])),
                )
            )
        return GlobalModule.synthetic(
            rank,
            places,
            torsion,
            dimension=int(synth.get("dimension", 2)),
            name=name,
            subgroup_cap=int(data.get("subgroup_cap", DEFAULT_SUBGROUP_CAP)),
        )

    if "curve_fixture" in data:
        ref = Path(data["curve_fixture"])
        if base_dir is not None and not ref.is_absolute():
            ref = Path(base_dir) / ref
        fixture = load_curve_fixture(ref)
    else:
        fixture = curve_fixture_from_dict(data)
    return GlobalModule.from_curve(
        fixture.curve,
        fixture.free_points,
        fixture.torsion_claims,
        name=name if name != "module" else fixture.name,
        independence_box=int(data.get("independence_box", DEFAULT_INDEPENDENCE_BOX)),
        count_cap=int(data.get("count_cap", DEFAULT_COUNT_CAP)),
        subgroup_cap=int(data.get("subgroup_cap", DEFAULT_SUBGROUP_CAP)),
    )


def load_module(path: str | Path) -> GlobalModule:
    path = Path(path)
    return module_from_dict(_read_json(path), base_dir=path.parent)


def global_point_from_dict(module: GlobalModule, data: dict) -> GlobalPoint:
    return module.make_point(
        [int(c) for c in data.get("free", [])],
        [int(c) for c in data.get("torsion", [])],
    )


@dataclass(frozen=True)
class ExperimentFixture:
    name: str
    module: GlobalModule
    phi: EndoMap
    point: GlobalPoint
    lattice_gens: tuple[GlobalPoint, ...]
    place_bound: int
    step_bound: int


def experiment_from_dict(
    data: dict, base_dir: str | Path | None = None
) -> ExperimentFixture:
    module_ref = _require(data, "module", "experiment")
    if isinstance(module_ref, str):
        ref = Path(module_ref)
        if base_dir is not None and not ref.is_absolute():
            ref = Path(base_dir) / ref
        module = load_module(ref)
    else:
        module = module_from_dict(module_ref, base_dir=base_dir)
    phi_spec = _require(data, "phi", "experiment")
    if isinstance(phi_spec, int):
        phi = EndoMap.multiplication(phi_spec)
    elif isinstance(phi_spec, dict) and "matrix" in phi_spec:
        phi = EndoMap.linear(phi_spec["matrix"])
    else:
        raise FixtureError("phi must be an integer or {'matrix': [[...]]}")
    point = global_point_from_dict(module, _require(data, "point", "experiment"))
    gens = tuple(
        global_point_from_dict(module, entry)
        for entry in _require(data, "lattice", "experiment")
    )
    return ExperimentFixture(
        str(data.get("name", "experiment")),
        module,
        phi,
        point,
        gens,
        int(data.get("place_bound", 100)),
        int(data.get("step_bound", 32)),
    )


def load_experiment(path: str | Path) -> ExperimentFixture:
    path = Path(path)
    return experiment_from_dict(_read_json(path), base_dir=path.parent)
