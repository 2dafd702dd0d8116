"""Specification language: model, parser, canonical serializer, validator."""

from .errors import (
    E_BAD_CONSTRAINT,
    E_BAD_VERSION,
    E_DUP_NAME,
    E_DUP_USE,
    E_NO_CONCEPT,
    E_SYNTAX,
    AdapterForgeError,
    ParseError,
    Violation,
)
from .model import (
    ANY_VERSION,
    BOOL,
    BYTES,
    F64,
    I32,
    I64,
    PROVIDED,
    REQUIRED,
    STRING,
    UNIT,
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
    format_float,
    format_version,
    list_of,
    parse_version,
)
from .parser import parse_any, parse_component, parse_project
from .serializer import serialize, serialize_with_positions
from .validate import validate

__all__ = [
    "ANY_VERSION",
    "AdapterForgeError",
    "BOOL",
    "BYTES",
    "ComponentSpec",
    "ConceptId",
    "Connection",
    "E_BAD_CONSTRAINT",
    "E_BAD_VERSION",
    "E_DUP_NAME",
    "E_DUP_USE",
    "E_NO_CONCEPT",
    "E_SYNTAX",
    "F64",
    "I32",
    "I64",
    "InterfaceSpec",
    "Literal",
    "MetaEntry",
    "OperationSig",
    "PROVIDED",
    "ParamSig",
    "ParseError",
    "ProjectSpec",
    "REQUIRED",
    "STRING",
    "SemType",
    "UNIT",
    "UseDecl",
    "VersionConstraint",
    "Violation",
    "format_float",
    "format_version",
    "list_of",
    "parse_any",
    "parse_component",
    "parse_project",
    "parse_version",
    "serialize",
    "serialize_with_positions",
    "validate",
]
