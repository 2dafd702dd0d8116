"""Report rendering and the structured round-trip format.

Human output is line-oriented: one verdict line per connection with
the literal EXACT / ADAPTABLE / INCOMPATIBLE token, mismatch detail
indented beneath. Structured output is canonical JSON that re-parses
to an equal value, so CI can archive and diff results.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Any

from . import canonjson
from .adapters import emit_descriptor, parse_descriptor
from .analyser import (
    ConnectionVerdict,
    Demand,
    MatchReport,
    Mismatch,
    OperationMatch,
    OperationShape,
)
from .conversions import ConversionRule, TypePort
from .linkage import (
    Integration,
    StepRecord,
    WorkflowResult,
)
from .speclang import (
    ConceptId,
    Connection,
    Literal,
    parse_component,
    parse_project,
    serialize,
)
from .speclang.parser import parse_type

HUMAN = "human"
STRUCTURED = "structured"


def _score_text(score: Fraction | None) -> str:
    if score is None:
        return "-"
    return f"{float(score):.3f}"


def render_match_report(report: MatchReport, format: str = HUMAN) -> str:
    if format == STRUCTURED:
        return canonjson.dumps(match_report_to_json(report))
    lines = [f"project {report.project}"]
    for verdict in report.verdicts:
        lines.append(
            f"connection {verdict.connection.label()}: {verdict.status}"
            f" score {_score_text(verdict.score)}"
        )
        if verdict.reason:
            lines.append(f"  reason: {verdict.reason}")
        for mismatch in verdict.mismatches:
            lines.append(f"  {mismatch.describe()}")
    for demand in report.demand:
        lines.append(f"demand {demand.concept} ({demand.origin})")
    return "\n".join(lines) + "\n"


def render_workflow(result: WorkflowResult, format: str = HUMAN) -> str:
    if format == STRUCTURED:
        return canonjson.dumps(workflow_result_to_json(result))
    lines = [f"project {result.final_report.project}"]
    for verdict in result.final_report.verdicts:
        lines.append(
            f"connection {verdict.connection.label()}: {verdict.status}"
            f" score {_score_text(verdict.score)}"
        )
    for integration in result.integrations:
        lines.append(
            f"integrated {integration.component} ({integration.source}"
            f" {integration.fingerprint[:12]}) for {integration.connection}"
        )
    for demand in result.unresolved:
        lines.append(f"unresolved demand {demand.concept} ({demand.origin})")
    for note in result.diagnostics:
        lines.append(f"note: {note}")
    lines.append(f"outcome {result.outcome}")
    return "\n".join(lines) + "\n"


# --- JSON encoding ---


def _concept_text(concept: ConceptId) -> str:
    return str(concept)


def _concept(text: str) -> ConceptId:
    return ConceptId(tuple(text.split(".")))


def _port_json(port: TypePort | None) -> Any:
    if port is None:
        return None
    doc: dict[str, Any] = {"type": str(port.ty)}
    if port.unit:
        doc["unit"] = port.unit
    return doc


def _port_from(doc: Any) -> TypePort | None:
    if doc is None:
        return None
    return TypePort(parse_type(doc["type"]), doc.get("unit"))


def _rule_json(rule: ConversionRule | None) -> Any:
    if rule is None:
        return None
    doc: dict[str, Any] = {"kind": rule.kind}
    if rule.factor is not None:
        doc["factor"] = canonjson.fraction_to_text(rule.factor)
    return doc


def _rule_from(doc: Any) -> ConversionRule | None:
    if doc is None:
        return None
    factor = canonjson.fraction_from_text(doc["factor"]) if "factor" in doc else None
    return ConversionRule(doc["kind"], factor)


def mismatch_to_json(m: Mismatch) -> dict:
    doc: dict[str, Any] = {"kind": m.kind, "location": list(m.location)}
    if m.renamed_from is not None:
        doc["renamed_from"] = m.renamed_from
        doc["renamed_to"] = m.renamed_to
    if m.order is not None:
        doc["order"] = list(m.order)
    if m.slot is not None:
        doc["slot"] = m.slot
    if m.from_port is not None:
        doc["from"] = _port_json(m.from_port)
        doc["to"] = _port_json(m.to_port)
    if m.rule is not None:
        doc["rule"] = _rule_json(m.rule)
    if m.fill_value is not None:
        doc["fill"] = {"kind": m.fill_value.kind, "value": m.fill_value.value}
    if m.hops is not None:
        doc["hops"] = m.hops
    if m.concept is not None:
        doc["concept"] = _concept_text(m.concept)
    return doc


def mismatch_from_json(doc: dict) -> Mismatch:
    fill = None
    if "fill" in doc:
        value = doc["fill"]["value"]
        if doc["fill"]["kind"] == "float":
            value = float(value)
        fill = Literal(doc["fill"]["kind"], value)
    return Mismatch(
        kind=doc["kind"],
        location=tuple(doc["location"]),  # type: ignore[arg-type]
        renamed_from=doc.get("renamed_from"),
        renamed_to=doc.get("renamed_to"),
        order=tuple(doc["order"]) if "order" in doc else None,
        slot=doc.get("slot"),
        from_port=_port_from(doc.get("from")),
        to_port=_port_from(doc.get("to")),
        rule=_rule_from(doc.get("rule")),
        fill_value=fill,
        hops=doc.get("hops"),
        concept=_concept(doc["concept"]) if "concept" in doc else None,
    )


def _shape_json(shape: OperationShape | None) -> Any:
    if shape is None:
        return None
    return {
        "params": [
            {"type": str(ty), **({"unit": unit} if unit else {}), "concept": _concept_text(c)}
            for ty, unit, c in shape.params
        ],
        "returns": str(shape.returns),
    }


def _shape_from(doc: Any) -> OperationShape | None:
    if doc is None:
        return None
    return OperationShape(
        params=tuple(
            (parse_type(p["type"]), p.get("unit"), _concept(p["concept"]))
            for p in doc["params"]
        ),
        returns=parse_type(doc["returns"]),
    )


def demand_to_json(demand: Demand) -> dict:
    return {
        "concept": _concept_text(demand.concept),
        "origin": demand.origin,
        "shape": _shape_json(demand.shape),
    }


def demand_from_json(doc: dict) -> Demand:
    return Demand(
        concept=_concept(doc["concept"]),
        shape=_shape_from(doc["shape"]),
        origin=doc["origin"],
    )


def _op_match_json(match: OperationMatch) -> dict:
    return {
        "required": match.required_name,
        "provided": match.provided_name,
        "score": canonjson.fraction_to_text(match.score),
        "mismatches": [mismatch_to_json(m) for m in match.mismatches],
    }


def _op_match_from(doc: dict) -> OperationMatch:
    return OperationMatch(
        required_name=doc["required"],
        provided_name=doc["provided"],
        score=canonjson.fraction_from_text(doc["score"]),
        mismatches=tuple(mismatch_from_json(m) for m in doc["mismatches"]),
    )


def _verdict_json(verdict: ConnectionVerdict) -> dict:
    conn = verdict.connection
    return {
        "connection": {
            "consumer": [conn.consumer_component, conn.consumer_interface],
            "provider": [conn.provider_component, conn.provider_interface],
        },
        "status": verdict.status,
        "score": canonjson.fraction_to_text(verdict.score) if verdict.score is not None else None,
        "reason": verdict.reason,
        "op_matches": [_op_match_json(m) for m in verdict.op_matches],
        "mismatches": [mismatch_to_json(m) for m in verdict.mismatches],
    }


def _verdict_from(doc: dict) -> ConnectionVerdict:
    conn_doc = doc["connection"]
    return ConnectionVerdict(
        connection=Connection(
            consumer_component=conn_doc["consumer"][0],
            consumer_interface=conn_doc["consumer"][1],
            provider_component=conn_doc["provider"][0],
            provider_interface=conn_doc["provider"][1],
        ),
        status=doc["status"],
        op_matches=tuple(_op_match_from(m) for m in doc["op_matches"]),
        mismatches=tuple(mismatch_from_json(m) for m in doc["mismatches"]),
        score=canonjson.fraction_from_text(doc["score"]) if doc["score"] is not None else None,
        reason=doc["reason"],
    )


def match_report_to_json(report: MatchReport) -> dict:
    return {
        "format": "report/1",
        "project": report.project,
        "verdicts": [_verdict_json(v) for v in report.verdicts],
        "demand": [demand_to_json(d) for d in report.demand],
    }


def match_report_from_json(doc: dict) -> MatchReport:
    return MatchReport(
        project=doc["project"],
        verdicts=tuple(_verdict_from(v) for v in doc["verdicts"]),
        demand=tuple(demand_from_json(d) for d in doc["demand"]),
    )


def workflow_result_to_json(result: WorkflowResult) -> dict:
    return {
        "format": "workflow/1",
        "outcome": result.outcome,
        "integrations": [
            {
                "connection": i.connection,
                "source": i.source,
                "fingerprint": i.fingerprint,
                "component": i.component,
            }
            for i in result.integrations
        ],
        "unresolved": [demand_to_json(d) for d in result.unresolved],
        "final_report": match_report_to_json(result.final_report),
        "steps": [
            {"step": s.step, "action": s.action, "detail": s.detail, "at": s.at}
            for s in result.steps
        ],
        "adapted_project": serialize(result.adapted_project),
        "added_components": [serialize(c) for c in result.added_components],
        "generated_adapters": [emit_descriptor(a) for a in result.generated_adapters],
        "diagnostics": list(result.diagnostics),
    }


def workflow_result_from_json(doc: dict) -> WorkflowResult:
    return WorkflowResult(
        outcome=doc["outcome"],
        integrations=tuple(
            Integration(
                connection=i["connection"],
                source=i["source"],
                fingerprint=i["fingerprint"],
                component=i["component"],
            )
            for i in doc["integrations"]
        ),
        unresolved=tuple(demand_from_json(d) for d in doc["unresolved"]),
        final_report=match_report_from_json(doc["final_report"]),
        steps=tuple(
            StepRecord(step=s["step"], action=s["action"], detail=s["detail"], at=s["at"])
            for s in doc["steps"]
        ),
        adapted_project=parse_project(doc["adapted_project"]),
        added_components=tuple(parse_component(c) for c in doc["added_components"]),
        generated_adapters=tuple(
            parse_descriptor(t) for t in doc["generated_adapters"]
        ),
        diagnostics=tuple(doc["diagnostics"]),
    )
