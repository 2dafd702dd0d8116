"""Connection analysis: signature matching, mismatch classification,
verdicts, and demand computation.

Matching is concept-first. Two operations are candidates for each
other only when their concepts are equal or related by ancestry, and
parameters align only through equal effective concepts, never through
names or positions. Structure then classifies the residue into
mismatches, and a fixed penalty table turns the mismatch list into an
exact rational score. Inside one concept group every injective slot
assignment is tried, so the reported alignment is the best-scoring one
and ties resolve deterministically.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, replace
from fractions import Fraction

from .aslt import Aslt, resolve_components
from .conversions import (
    CONCEPT_DISTANCE,
    DEFAULT_CONFIG,
    DEFAULT_FILL,
    MISSING_OPERATION,
    PARAM_PERMUTATION,
    RENAME,
    TYPE_CONVERSION,
    ConversionRule,
    ConversionTable,
    MatchConfig,
    TypePort,
)
from .speclang import (
    PROVIDED,
    REQUIRED,
    ComponentSpec,
    ConceptId,
    Connection,
    InterfaceSpec,
    Literal,
    OperationSig,
    ProjectSpec,
    SemType,
)
from .speclang.errors import AdapterForgeError

E_UNRESOLVED = "E_UNRESOLVED"

EXACT = "EXACT"
ADAPTABLE = "ADAPTABLE"
INCOMPATIBLE = "INCOMPATIBLE"

# Slot index standing for the return value in conversion mismatches.
RETURN_SLOT = -1


class AnalysisError(AdapterForgeError):
    pass


@dataclass(frozen=True)
class Mismatch:
    """One classified divergence; the payload fields used depend on kind."""

    kind: str
    location: tuple[str, str] = ("", "")  # (connection label, operation)
    renamed_from: str | None = None
    renamed_to: str | None = None
    order: tuple[int, ...] | None = None  # consumer indices in provider slot order
    slot: int | None = None  # provider slot, RETURN_SLOT for returns
    from_port: TypePort | None = None
    to_port: TypePort | None = None
    rule: ConversionRule | None = None
    fill_value: Literal | None = None
    hops: int | None = None
    concept: ConceptId | None = None

    def __post_init__(self) -> None:
        if self.kind == PARAM_PERMUTATION:
            assert self.order is not None
            n = len(self.order)
            if sorted(self.order) != list(range(n)):
                raise ValueError(f"{self.order} is not a permutation of 0..{n - 1}")
            if self.order == tuple(range(n)):
                raise ValueError("identity permutation is not a mismatch")
        if self.kind == CONCEPT_DISTANCE and (self.hops is None or self.hops < 1):
            raise ValueError("concept distance needs hop count >= 1")

    def describe(self) -> str:
        if self.kind == RENAME:
            return f"RENAME {self.renamed_from} -> {self.renamed_to}"
        if self.kind == PARAM_PERMUTATION:
            return f"PARAM_PERMUTATION ({', '.join(map(str, self.order or ()))})"
        if self.kind == TYPE_CONVERSION:
            where = "return" if self.slot == RETURN_SLOT else f"slot {self.slot}"
            return f"TYPE_CONVERSION {where} {self.from_port} -> {self.to_port} [{self.rule}]"
        if self.kind == DEFAULT_FILL:
            value = self.fill_value.canonical_text() if self.fill_value else "?"
            return f"DEFAULT_FILL slot {self.slot} = {value}"
        if self.kind == MISSING_OPERATION:
            return f"MISSING_OPERATION {self.location[1]} @concept {self.concept}"
        if self.kind == CONCEPT_DISTANCE:
            return f"CONCEPT_DISTANCE {self.hops} hop(s) to {self.concept}"
        return self.kind


def score_mismatches(mismatches: tuple[Mismatch, ...], config: MatchConfig) -> Fraction:
    """1 minus the summed penalties; exact arithmetic throughout."""
    total = Fraction(0)
    for m in mismatches:
        total += config.penalty(m.kind, m.hops or 1)
    return 1 - total


@dataclass(frozen=True)
class OperationMatch:
    required_name: str
    provided_name: str
    mismatches: tuple[Mismatch, ...]
    score: Fraction


@dataclass(frozen=True)
class OperationShape:
    """Name-free signature: (type, unit, concept) per slot plus return."""

    params: tuple[tuple[SemType, str | None, ConceptId], ...]
    returns: SemType


def shape_of(op: OperationSig) -> OperationShape:
    return OperationShape(
        params=tuple(
            (p.ty, p.unit, p.effective_concept(op.concept)) for p in op.params
        ),
        returns=op.returns,
    )


def shape_as_operation(concept: ConceptId, shape: OperationShape) -> OperationSig:
    """Rebuild a nameless signature so shapes can run through matching."""
    from .speclang import ParamSig

    params = tuple(
        ParamSig(name=f"p{i}", ty=ty, concept=c, unit=unit)
        for i, (ty, unit, c) in enumerate(shape.params)
    )
    return OperationSig(
        name=concept.segments[-1], params=params, returns=shape.returns, concept=concept
    )


@dataclass(frozen=True)
class Demand:
    """Functionality the project needs and no wired provider offers."""

    concept: ConceptId
    shape: OperationShape | None
    origin: str  # connection label or "project"


@dataclass(frozen=True)
class ConnectionVerdict:
    connection: Connection
    status: str  # EXACT | ADAPTABLE | INCOMPATIBLE
    op_matches: tuple[OperationMatch, ...]
    mismatches: tuple[Mismatch, ...]
    score: Fraction | None
    reason: str | None = None


@dataclass(frozen=True)
class MatchReport:
    project: str
    verdicts: tuple[ConnectionVerdict, ...]
    demand: tuple[Demand, ...]

    def all_exact(self) -> bool:
        return all(v.status == EXACT for v in self.verdicts)


def match_operation(
    required: OperationSig,
    provided: OperationSig,
    conv: ConversionTable,
    config: MatchConfig = DEFAULT_CONFIG,
) -> OperationMatch | None:
    """Best concept-driven alignment of one required op onto one
    provided op, or None when no alignment reaches the threshold."""
    hops = required.concept.hops_to(provided.concept)
    if hops is None:
        return None

    base: list[Mismatch] = []
    if hops >= 1:
        base.append(
            Mismatch(
                CONCEPT_DISTANCE,
                location=("", required.name),
                hops=hops,
                concept=provided.concept,
            )
        )
    if required.name != provided.name:
        base.append(
            Mismatch(
                RENAME,
                location=("", required.name),
                renamed_from=required.name,
                renamed_to=provided.name,
            )
        )

    best = _best_alignment(required, provided, conv, config, tuple(base))
    if best is None:
        return None
    mismatches, score = best
    if score < config.threshold:
        return None
    return OperationMatch(
        required_name=required.name,
        provided_name=provided.name,
        mismatches=mismatches,
        score=score,
    )


def _best_alignment(
    required: OperationSig,
    provided: OperationSig,
    conv: ConversionTable,
    config: MatchConfig,
    base: tuple[Mismatch, ...],
) -> tuple[tuple[Mismatch, ...], Fraction] | None:
    # Synthesized param concepts resolve against the consumer's op
    # concept on both sides; explicit annotations stay absolute.
    req_concepts = required.param_concepts()
    prov_concepts = provided.param_concepts(base=required.concept)

    groups: dict[ConceptId, tuple[list[int], list[int]]] = {}
    for i, c in enumerate(req_concepts):
        groups.setdefault(c, ([], []))[0].append(i)
    for j, c in enumerate(prov_concepts):
        groups.setdefault(c, ([], []))[1].append(j)
    for c, (req_idx, prov_idx) in groups.items():
        if len(req_idx) > len(prov_idx):
            return None  # some required parameter has nowhere to go

    # Per concept group, all injective placements of required params
    # into provider slots of the same concept.
    per_group: list[list[list[tuple[int, int]]]] = []
    for c, (req_idx, prov_idx) in sorted(groups.items(), key=lambda kv: kv[0].segments):
        placements = [
            list(zip(req_idx, chosen))
            for chosen in itertools.permutations(prov_idx, len(req_idx))
        ]
        per_group.append(placements)

    best_key: tuple | None = None
    best: tuple[tuple[Mismatch, ...], Fraction] | None = None
    for combo in itertools.product(*per_group):
        assignment: dict[int, int] = {}  # provider slot -> consumer index
        for pairs in combo:
            for req_i, prov_j in pairs:
                assignment[prov_j] = req_i
        outcome = _classify_assignment(required, provided, assignment, conv, config, base)
        if outcome is None:
            continue
        mismatches, score = outcome
        slot_key = tuple(
            (0, assignment[j]) if j in assignment else (1,)
            for j in range(len(provided.params))
        )
        key = (-score, len(mismatches), slot_key)
        if best_key is None or key < best_key:
            best_key = key
            best = (mismatches, score)
    return best


def _classify_assignment(
    required: OperationSig,
    provided: OperationSig,
    assignment: dict[int, int],
    conv: ConversionTable,
    config: MatchConfig,
    base: tuple[Mismatch, ...],
) -> tuple[tuple[Mismatch, ...], Fraction] | None:
    loc = ("", required.name)
    mismatches = list(base)

    order = tuple(
        assignment[j] for j in range(len(provided.params)) if j in assignment
    )
    if order != tuple(range(len(order))):
        mismatches.append(Mismatch(PARAM_PERMUTATION, location=loc, order=order))

    slot_mismatches: list[Mismatch] = []
    for j, prov_param in enumerate(provided.params):
        to_port = TypePort(prov_param.ty, prov_param.unit)
        if j in assignment:
            req_param = required.params[assignment[j]]
            from_port = TypePort(req_param.ty, req_param.unit)
            if from_port == to_port:
                continue
            rule = conv.lookup(from_port, to_port)
            if rule is None:
                return None
            slot_mismatches.append(
                Mismatch(
                    TYPE_CONVERSION,
                    location=loc,
                    slot=j,
                    from_port=from_port,
                    to_port=to_port,
                    rule=rule,
                )
            )
        else:
            if prov_param.default is None:
                return None
            slot_mismatches.append(
                Mismatch(
                    DEFAULT_FILL, location=loc, slot=j, fill_value=prov_param.default
                )
            )
    mismatches.extend(slot_mismatches)

    if provided.returns != required.returns:
        from_port = TypePort(provided.returns, None)
        to_port = TypePort(required.returns, None)
        rule = conv.lookup(from_port, to_port)
        if rule is None:
            return None
        mismatches.append(
            Mismatch(
                TYPE_CONVERSION,
                location=loc,
                slot=RETURN_SLOT,
                from_port=from_port,
                to_port=to_port,
                rule=rule,
            )
        )

    result = tuple(mismatches)
    return result, score_mismatches(result, config)


def analyse(
    tree: Aslt,
    project: ProjectSpec,
    components: list[ComponentSpec],
    conv: ConversionTable,
    config: MatchConfig = DEFAULT_CONFIG,
) -> MatchReport:
    """Match every connection and compute unmet demand."""
    root = tree.node(tree.root)
    if root.kind != "project" or root.label != project.name:
        raise AnalysisError(E_UNRESOLVED, "tree was not built from this project")
    resolved = resolve_components(project, components)

    verdicts = tuple(
        _judge_connection(conn, resolved, conv, config) for conn in project.connections
    )

    demands: list[Demand] = []
    for verdict in verdicts:
        consumer = resolved[verdict.connection.consumer_component]
        iface = consumer.interface(REQUIRED, verdict.connection.consumer_interface)
        assert iface is not None
        matched = {m.required_name for m in verdict.op_matches}
        for op in iface.operations:
            if op.name not in matched:
                demands.append(
                    Demand(
                        concept=op.concept,
                        shape=shape_of(op),
                        origin=verdict.connection.label(),
                    )
                )

    provided_concepts = {
        op.concept
        for spec in resolved.values()
        for iface in spec.provided
        for op in iface.operations
    }
    for wanted in project.demands:
        if not any(wanted.hops_to(have) is not None for have in provided_concepts):
            demands.append(Demand(concept=wanted, shape=None, origin="project"))

    return MatchReport(project=project.name, verdicts=verdicts, demand=tuple(demands))


def _judge_connection(
    conn: Connection,
    resolved: dict[str, ComponentSpec],
    conv: ConversionTable,
    config: MatchConfig,
) -> ConnectionVerdict:
    label = conn.label()
    required_iface = _find_interface(resolved, conn.consumer_component, REQUIRED, conn.consumer_interface)
    provided_iface = _find_interface(resolved, conn.provider_component, PROVIDED, conn.provider_interface)

    op_matches: list[OperationMatch] = []
    missing: list[Mismatch] = []
    for req_op in required_iface.operations:
        best = _best_candidate(req_op, provided_iface, conv, config)
        if best is None:
            missing.append(
                Mismatch(
                    MISSING_OPERATION,
                    location=(label, req_op.name),
                    concept=req_op.concept,
                )
            )
        else:
            relocated = replace(
                best,
                mismatches=tuple(
                    replace(m, location=(label, req_op.name)) for m in best.mismatches
                ),
            )
            op_matches.append(relocated)

    all_mismatches = tuple(
        itertools.chain(*(m.mismatches for m in op_matches), missing)
    )
    if missing:
        return ConnectionVerdict(
            connection=conn,
            status=INCOMPATIBLE,
            op_matches=tuple(op_matches),
            mismatches=all_mismatches,
            score=None,
            reason=f"{len(missing)} required operation(s) have no candidate",
        )
    if not op_matches:
        # Interface with no operations: nothing to bridge.
        return ConnectionVerdict(conn, EXACT, (), (), Fraction(1))
    mean = sum((m.score for m in op_matches), Fraction(0)) / len(op_matches)
    if all(not m.mismatches for m in op_matches):
        return ConnectionVerdict(conn, EXACT, tuple(op_matches), (), Fraction(1))
    if mean >= config.threshold:
        return ConnectionVerdict(conn, ADAPTABLE, tuple(op_matches), all_mismatches, mean)
    return ConnectionVerdict(
        connection=conn,
        status=INCOMPATIBLE,
        op_matches=tuple(op_matches),
        mismatches=all_mismatches,
        score=mean,
        reason=f"aggregate score {mean} below threshold {config.threshold}",
    )


def _find_interface(
    resolved: dict[str, ComponentSpec], component: str, direction: str, name: str
) -> InterfaceSpec:
    spec = resolved.get(component)
    if spec is None:
        raise AnalysisError(E_UNRESOLVED, f"connection references unknown component {component!r}")
    iface = spec.interface(direction, name)
    if iface is None:
        raise AnalysisError(
            E_UNRESOLVED,
            f"component {component!r} has no {direction} interface {name!r}",
        )
    return iface


def _best_candidate(
    req_op: OperationSig,
    provided_iface: InterfaceSpec,
    conv: ConversionTable,
    config: MatchConfig,
) -> OperationMatch | None:
    best: OperationMatch | None = None
    best_key: tuple | None = None
    for prov_op in provided_iface.operations:
        match = match_operation(req_op, prov_op, conv, config)
        if match is None:
            continue
        key = (-match.score, len(match.mismatches), match.provided_name)
        if best_key is None or key < best_key:
            best_key = key
            best = match
    return best


def verify(
    tree: Aslt,
    project: ProjectSpec,
    components: list[ComponentSpec],
    conv: ConversionTable,
    config: MatchConfig = DEFAULT_CONFIG,
) -> bool:
    """Re-run analysis; true iff every connection is EXACT."""
    return analyse(tree, project, components, conv, config).all_exact()
