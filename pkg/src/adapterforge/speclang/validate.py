"""Semantic validation beyond what the parser rejects.

Violations are data. An empty result means the spec is clean; the
checks cover concept path depth, list nesting, default literal typing
and range, and unit tags on non-numeric parameters.
"""

from __future__ import annotations

from .errors import (
    V_CONCEPT_DEPTH,
    V_DEFAULT_RANGE,
    V_DEFAULT_TYPE,
    V_LIST_DEPTH,
    V_UNIT_TYPE,
    Violation,
)
from .model import ComponentSpec, ConceptId, OperationSig, ProjectSpec, SemType

MAX_CONCEPT_SEGMENTS = 8
MAX_LIST_NESTING = 3


def validate(spec: ComponentSpec | ProjectSpec) -> list[Violation]:
    if isinstance(spec, ProjectSpec):
        return [
            v
            for demand in spec.demands
            for v in _check_concept(demand, f"{spec.name}.demand")
        ]
    out: list[Violation] = []
    for iface in spec.provided + spec.required:
        for op in iface.operations:
            out.extend(_check_op(op, f"{spec.name}.{iface.name}"))
    return out


def _check_op(op: OperationSig, scope: str) -> list[Violation]:
    loc = f"{scope}.{op.name}"
    out = _check_concept(op.concept, loc)
    out.extend(_check_type(op.returns, loc))
    for p in op.params:
        ploc = f"{loc}.{p.name}"
        out.extend(_check_type(p.ty, ploc))
        if p.concept is not None:
            out.extend(_check_concept(p.concept, ploc))
        if p.unit is not None and not p.ty.is_numeric:
            out.append(
                Violation(V_UNIT_TYPE, ploc, f"unit {p.unit!r} on non-numeric type {p.ty}")
            )
        if p.default is not None:
            if not p.default.matches_type(p.ty):
                out.append(
                    Violation(
                        V_DEFAULT_TYPE,
                        ploc,
                        f"default {p.default.canonical_text()} does not fit type {p.ty}",
                    )
                )
            elif not p.default.in_range(p.ty):
                out.append(
                    Violation(
                        V_DEFAULT_RANGE,
                        ploc,
                        f"default {p.default.canonical_text()} out of range for {p.ty}",
                    )
                )
    return out


def _check_concept(concept: ConceptId, loc: str) -> list[Violation]:
    if len(concept.segments) > MAX_CONCEPT_SEGMENTS:
        return [
            Violation(
                V_CONCEPT_DEPTH,
                loc,
                f"concept {concept} has {len(concept.segments)} segments (max {MAX_CONCEPT_SEGMENTS})",
            )
        ]
    return []


def _check_type(ty: SemType, loc: str) -> list[Violation]:
    depth = ty.nesting_depth()
    if depth > MAX_LIST_NESTING:
        return [Violation(V_LIST_DEPTH, loc, f"type {ty} nests {depth} lists (max {MAX_LIST_NESTING})")]
    return []
