"""Hypothesis strategies generating valid specs for property tests."""

from __future__ import annotations

import string

import hypothesis.strategies as st

from adapterforge.speclang import (
    ComponentSpec,
    ConceptId,
    Connection,
    InterfaceSpec,
    Literal,
    MetaEntry,
    OperationSig,
    ParamSig,
    ProjectSpec,
    SemType,
    UseDecl,
    VersionConstraint,
)

_LOWER = string.ascii_lowercase

identifiers = st.text(alphabet=_LOWER + "_", min_size=1, max_size=8).filter(
    lambda s: s[0] != "_" or len(s) > 1
)
concept_segments = st.text(alphabet=_LOWER, min_size=1, max_size=6)
concepts = st.lists(concept_segments, min_size=1, max_size=4).map(
    lambda segs: ConceptId(tuple(segs))
)
units = st.sampled_from(["ms", "s", "kg", "m", "km"])
versions = st.tuples(
    st.integers(0, 99), st.integers(0, 99), st.integers(0, 99)
)

scalar_types = st.sampled_from(
    [SemType(k) for k in ("i32", "i64", "f64", "bool", "string", "bytes", "unit")]
)
sem_types = st.recursive(
    scalar_types, lambda inner: inner.map(lambda t: SemType("list", t)), max_leaves=3
).filter(lambda t: t.nesting_depth() <= 3)


def _literal_for(ty: SemType) -> st.SearchStrategy[Literal] | None:
    if ty.kind in ("i32", "i64"):
        bound = 2**31 - 1 if ty.kind == "i32" else 2**63 - 1
        return st.integers(-bound, bound).map(lambda v: Literal("int", v))
    if ty.kind == "f64":
        return st.floats(allow_nan=False, allow_infinity=False).map(
            lambda v: Literal("float", v)
        )
    if ty.kind == "bool":
        return st.booleans().map(lambda v: Literal("bool", v))
    if ty.kind == "string":
        return st.text(max_size=10).map(lambda v: Literal("string", v))
    return None


@st.composite
def param_sigs(draw: st.DrawFn, name: str) -> ParamSig:
    ty = draw(sem_types)
    default = None
    lit = _literal_for(ty)
    if lit is not None and draw(st.booleans()):
        default = draw(lit)
    unit = draw(st.none() | units) if ty.is_numeric else None
    concept = draw(st.none() | concepts)
    return ParamSig(name=name, ty=ty, concept=concept, unit=unit, default=default)


@st.composite
def operation_sigs(draw: st.DrawFn, name: str) -> OperationSig:
    n_params = draw(st.integers(0, 4))
    names = draw(
        st.lists(identifiers, min_size=n_params, max_size=n_params, unique=True)
    )
    params = tuple(draw(param_sigs(p)) for p in names)
    return OperationSig(
        name=name,
        params=params,
        returns=draw(sem_types),
        concept=draw(concepts),
    )


@st.composite
def interface_specs(draw: st.DrawFn, name: str, direction: str) -> InterfaceSpec:
    op_names = draw(st.lists(identifiers, min_size=0, max_size=3, unique=True))
    ops = tuple(draw(operation_sigs(n)) for n in op_names)
    return InterfaceSpec(name, direction, ops)


@st.composite
def component_specs(draw: st.DrawFn) -> ComponentSpec:
    provided_names = draw(st.lists(identifiers, min_size=0, max_size=2, unique=True))
    required_names = draw(st.lists(identifiers, min_size=0, max_size=2, unique=True))
    meta = draw(
        st.lists(
            st.tuples(identifiers, st.text(max_size=12)).map(
                lambda kv: MetaEntry(*kv)
            ),
            max_size=3,
        )
    )
    return ComponentSpec(
        name=draw(identifiers),
        version=draw(versions),
        provided=tuple(draw(interface_specs(n, "provided")) for n in provided_names),
        required=tuple(draw(interface_specs(n, "required")) for n in required_names),
        meta=tuple(meta),
    )


@st.composite
def project_specs(draw: st.DrawFn) -> ProjectSpec:
    use_names = draw(st.lists(identifiers, min_size=0, max_size=4, unique=True))
    uses = tuple(
        UseDecl(
            n,
            draw(
                st.sampled_from(["*", "=", ">="]).flatmap(
                    lambda op: st.just(VersionConstraint("*"))
                    if op == "*"
                    else versions.map(lambda v, op=op: VersionConstraint(op, v))
                )
            ),
        )
        for n in use_names
    )
    connections: tuple[Connection, ...] = ()
    if len(use_names) >= 2:
        n_conns = draw(st.integers(0, 2))
        conns = []
        for _ in range(n_conns):
            a = draw(st.sampled_from(use_names))
            b = draw(st.sampled_from(use_names))
            conns.append(
                Connection(a, draw(identifiers), b, draw(identifiers))
            )
        connections = tuple(conns)
    demands = tuple(draw(st.lists(concepts, max_size=3)))
    return ProjectSpec(
        name=draw(identifiers),
        uses=uses,
        connections=connections,
        demands=demands,
    )
