"""Content-addressed store for component specs and adapter descriptors.

Artifacts live under `components/` and `adapters/`, named by the
SHA-256 of their canonical bytes, so equal canonical content always
lands on the same path and identity is the hash. A single canonical
JSON index document is rewritten whole under an advisory lockfile on
every mutation; files are immutable once named, readers never lock,
and loads re-hash the bytes so tampering cannot go unnoticed.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterator

from . import canonjson
from .adapters import AdapterSpec, emit_descriptor, parse_descriptor
from .analyser import Demand, match_operation, shape_as_operation
from .conversions import DEFAULT_CONFIG, ConversionTable, MatchConfig
from .speclang import (
    ComponentSpec,
    ConceptId,
    ParseError,
    VersionConstraint,
    format_version,
    parse_component,
    parse_version,
    serialize,
    validate,
)
from .speclang.errors import AdapterForgeError

E_IO = "E_IO"
E_INVALID_SPEC = "E_INVALID_SPEC"
E_LOCK = "E_LOCK"
E_NO_ENTRY = "E_NO_ENTRY"
E_CORRUPT = "E_CORRUPT"

LOCK_TIMEOUT = 5.0
_LOCK_POLL = 0.01

KIND_COMPONENT = "component"
KIND_ADAPTER = "adapter"


class PoolError(AdapterForgeError):
    pass


def fingerprint_of(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class IndexEntry:
    kind: str  # component | adapter
    name: str
    version: str
    provided_concepts: tuple[str, ...]
    path: str  # relative to the pool root
    stored_at: str


@dataclass(frozen=True)
class PoolQuery:
    demand: Demand
    constraint: VersionConstraint | None = None


def init_pool(root: str | Path) -> Path:
    """Create the pool layout if absent; idempotent."""
    root = Path(root)
    try:
        (root / "components").mkdir(parents=True, exist_ok=True)
        (root / "adapters").mkdir(parents=True, exist_ok=True)
        index = root / "index"
        if not index.exists():
            _write_atomic(index, canonjson.dump_bytes({"entries": {}, "format": "pool/1"}))
    except OSError as err:
        raise PoolError(E_IO, f"cannot initialize pool at {root}: {err}") from None
    return root


def _load_index(root: Path) -> dict[str, IndexEntry]:
    index_path = root / "index"
    try:
        doc = canonjson.loads(index_path.read_bytes())
    except FileNotFoundError:
        raise PoolError(E_IO, f"{index_path} does not exist (pool not initialized?)") from None
    except (OSError, json.JSONDecodeError) as err:
        raise PoolError(E_IO, f"cannot read pool index: {err}") from None
    entries: dict[str, IndexEntry] = {}
    for fp, entry in doc.get("entries", {}).items():
        entries[fp] = IndexEntry(
            kind=entry["kind"],
            name=entry["name"],
            version=entry["version"],
            provided_concepts=tuple(entry["provided_concepts"]),
            path=entry["path"],
            stored_at=entry["stored_at"],
        )
    return entries


def _store_index(root: Path, entries: dict[str, IndexEntry]) -> None:
    doc = {
        "format": "pool/1",
        "entries": {
            fp: {
                "kind": e.kind,
                "name": e.name,
                "version": e.version,
                "provided_concepts": list(e.provided_concepts),
                "path": e.path,
                "stored_at": e.stored_at,
            }
            for fp, e in entries.items()
        },
    }
    _write_atomic(root / "index", canonjson.dump_bytes(doc))


def _write_atomic(path: Path, data: bytes) -> None:
    tmp = path.parent / f".tmp-{os.getpid()}-{path.name}"
    tmp.write_bytes(data)
    os.replace(tmp, path)


@contextmanager
def _index_lock(root: Path, timeout: float) -> Iterator[None]:
    lock_path = root / "index.lock"
    deadline = time.monotonic() + timeout
    while True:
        try:
            fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
            break
        except FileExistsError:
            if time.monotonic() >= deadline:
                raise PoolError(
                    E_LOCK, f"could not acquire {lock_path} within {timeout:.1f}s"
                ) from None
            time.sleep(_LOCK_POLL)
        except OSError as err:
            raise PoolError(E_IO, f"cannot create lock file: {err}") from None
    try:
        os.write(fd, str(os.getpid()).encode("ascii"))
        os.close(fd)
        yield
    finally:
        try:
            os.unlink(lock_path)
        except OSError:
            pass


def _canonicalize(document: str) -> tuple[str, bytes, ComponentSpec | AdapterSpec]:
    """Validate a document and produce (kind, canonical bytes, value)."""
    stripped = document.lstrip()
    if stripped.startswith("{"):
        try:
            adapter = parse_descriptor(document)
        except (KeyError, ValueError, json.JSONDecodeError, AdapterForgeError) as err:
            raise PoolError(E_INVALID_SPEC, f"not a valid adapter descriptor: {err}") from None
        component_form = adapter.to_component_spec()
        if validate(component_form):
            raise PoolError(E_INVALID_SPEC, f"adapter {adapter.name} fails validation")
        return KIND_ADAPTER, emit_descriptor(adapter).encode("utf-8"), adapter
    try:
        spec = parse_component(document)
    except ParseError as err:
        raise PoolError(E_INVALID_SPEC, err.message) from None
    violations = validate(spec)
    if violations:
        raise PoolError(
            E_INVALID_SPEC,
            f"spec {spec.name} has violations: " + "; ".join(v.code for v in violations),
        )
    return KIND_COMPONENT, serialize(spec).encode("utf-8"), spec


def _entry_for(kind: str, fp: str, value: ComponentSpec | AdapterSpec) -> IndexEntry:
    component = value.to_component_spec() if isinstance(value, AdapterSpec) else value
    return IndexEntry(
        kind=kind,
        name=component.name,
        version=format_version(component.version),
        provided_concepts=tuple(str(c) for c in component.provided_concepts()),
        path=f"{'adapters' if kind == KIND_ADAPTER else 'components'}/{fp}"
        + (".adapter" if kind == KIND_ADAPTER else ".cdl"),
        stored_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
    )


def pool_add(root: str | Path, document: str, timeout: float = LOCK_TIMEOUT) -> str:
    """Store one document; returns its fingerprint. Re-adding existing
    content is a no-op."""
    root = Path(root)
    kind, data, value = _canonicalize(document)
    fp = fingerprint_of(data)
    entry = _entry_for(kind, fp, value)
    with _index_lock(root, timeout):
        entries = _load_index(root)
        if fp in entries:
            return fp
        target = root / entry.path
        try:
            _write_atomic(target, data)
        except OSError as err:
            raise PoolError(E_IO, f"cannot write {target}: {err}") from None
        entries[fp] = entry
        _store_index(root, entries)
    return fp


def pool_get(root: str | Path, fp: str) -> ComponentSpec | AdapterSpec:
    """Load and re-verify one stored artifact."""
    root = Path(root)
    entries = _load_index(root)
    entry = entries.get(fp)
    if entry is None:
        raise PoolError(E_NO_ENTRY, f"no pool entry {fp}")
    path = root / entry.path
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise PoolError(E_CORRUPT, f"index entry {fp} points at missing {entry.path}") from None
    except OSError as err:
        raise PoolError(E_IO, f"cannot read {path}: {err}") from None
    actual = fingerprint_of(data)
    if actual != fp:
        raise PoolError(E_CORRUPT, f"{entry.path} re-hashes to {actual}, expected {fp}")
    text = data.decode("utf-8")
    if entry.kind == KIND_ADAPTER:
        return parse_descriptor(text)
    return parse_component(text)


def pool_list(root: str | Path) -> list[tuple[str, IndexEntry]]:
    entries = _load_index(Path(root))
    return sorted(entries.items())


def pool_query(
    root: str | Path,
    query: PoolQuery,
    conv: ConversionTable | None = None,
    config: MatchConfig = DEFAULT_CONFIG,
) -> list[tuple[str, Fraction]]:
    """Fingerprints able to serve the demand, best first.

    Candidates provide a concept equal to or related by ancestry to the
    demanded one. With a shaped demand each candidate is priced by its
    best provided operation through the regular matcher; a bare concept
    demand is priced by concept distance alone. An empty result is the
    miss answer: nothing stored can serve the demand.
    """
    root = Path(root)
    conv = conv if conv is not None else ConversionTable()
    demand = query.demand
    results: list[tuple[str, Fraction]] = []
    for fp, entry in sorted(_load_index(root).items()):
        if query.constraint is not None and not query.constraint.satisfies(
            parse_version(entry.version)
        ):
            continue
        related_hops = [
            hops
            for concept_text in entry.provided_concepts
            if (hops := demand.concept.hops_to(_concept(concept_text))) is not None
        ]
        if not related_hops:
            continue
        if demand.shape is None:
            score = 1 - config.concept_hop_penalty * min(related_hops)
            if score >= config.threshold:
                results.append((fp, score))
            continue
        value = pool_get(root, fp)
        component = value.to_component_spec() if isinstance(value, AdapterSpec) else value
        wanted = shape_as_operation(demand.concept, demand.shape)
        best: Fraction | None = None
        for iface in component.provided:
            for op in iface.operations:
                match = match_operation(wanted, op, conv, config)
                if match is not None and (best is None or match.score > best):
                    best = match.score
        if best is not None:
            results.append((fp, best))
    results.sort(key=lambda pair: (-pair[1], pair[0]))
    return results


def _concept(text: str) -> ConceptId:
    return ConceptId(tuple(text.split(".")))


@dataclass(frozen=True)
class Finding:
    kind: str  # hash_mismatch | dangling
    fingerprint: str
    path: str
    detail: str


def pool_verify(root: str | Path) -> list[Finding]:
    """Re-hash every stored artifact; empty result means healthy."""
    root = Path(root)
    findings: list[Finding] = []
    for fp, entry in sorted(_load_index(root).items()):
        path = root / entry.path
        try:
            data = path.read_bytes()
        except FileNotFoundError:
            findings.append(
                Finding("dangling", fp, entry.path, "index entry points at a missing file")
            )
            continue
        except OSError as err:
            raise PoolError(E_IO, f"cannot read {path}: {err}") from None
        actual = fingerprint_of(data)
        if actual != fp:
            findings.append(
                Finding("hash_mismatch", fp, entry.path, f"content re-hashes to {actual}")
            )
    return findings
