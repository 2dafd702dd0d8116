from __future__ import annotations

import concurrent.futures
from fractions import Fraction
from pathlib import Path

import pytest

from testutil import concept, op, param
from adapterforge.adapters import generate_adapter, emit_descriptor
from adapterforge.analyser import Demand, analyse, match_operation, shape_as_operation, shape_of
from adapterforge.aslt import build_aslt
from adapterforge.conversions import ConversionTable, load_rules
from adapterforge.pool import (
    PoolError,
    PoolQuery,
    fingerprint_of,
    init_pool,
    pool_add,
    pool_get,
    pool_list,
    pool_query,
    pool_verify,
)
from adapterforge.speclang import (
    ComponentSpec,
    I32,
    VersionConstraint,
    parse_component,
)

CORPUS = Path(__file__).parent / "corpus"


def spec_text(name: str, version: str = "1.0.0", concept_text: str = "data.k.x") -> str:
    return (
        f'component "{name}" version "{version}" {{\n'
        "  provides interface I {\n"
        f"    op f(x: i32) -> i32 @concept {concept_text}\n"
        "  }\n"
        "}\n"
    )


@pytest.fixture()
def pool(tmp_path: Path) -> Path:
    return init_pool(tmp_path / "pool")


def test_add_is_idempotent(pool: Path):
    first = pool_add(pool, spec_text("alpha"))
    second = pool_add(pool, spec_text("alpha"))
    assert first == second
    assert len(pool_list(pool)) == 1


def test_add_canonicalizes_before_hashing(pool: Path):
    # Same spec, different formatting: one entry.
    messy = 'component "alpha"    version "1.0.0" {provides interface I{op f(x: i32) -> i32 @concept data.k.x}}'
    assert pool_add(pool, messy) == pool_add(pool, spec_text("alpha"))


def test_stored_file_rehashes_to_fingerprint(pool: Path):
    fp = pool_add(pool, spec_text("alpha"))
    stored = pool / "components" / f"{fp}.cdl"
    assert stored.exists()
    assert fingerprint_of(stored.read_bytes()) == fp


def test_get_roundtrip(pool: Path):
    fp = pool_add(pool, spec_text("alpha"))
    spec = pool_get(pool, fp)
    assert isinstance(spec, ComponentSpec)
    assert spec == parse_component(spec_text("alpha"))


def test_get_unknown_fingerprint(pool: Path):
    with pytest.raises(PoolError) as err:
        pool_get(pool, "0" * 64)
    assert err.value.code == "E_NO_ENTRY"


def test_get_detects_tampering(pool: Path):
    fp = pool_add(pool, spec_text("alpha"))
    stored = pool / "components" / f"{fp}.cdl"
    data = bytearray(stored.read_bytes())
    data[10] ^= 0xFF
    stored.write_bytes(bytes(data))
    with pytest.raises(PoolError) as err:
        pool_get(pool, fp)
    assert err.value.code == "E_CORRUPT"


def test_invalid_spec_rejected(pool: Path):
    with pytest.raises(PoolError) as err:
        pool_add(pool, "component oops {")
    assert err.value.code == "E_INVALID_SPEC"
    assert pool_list(pool) == []


def test_adapter_descriptor_roundtrip(pool: Path):
    conv, config = load_rules(CORPUS / "conversions.rules")
    consumer = parse_component((CORPUS / "figure3" / "reportgen.cdl").read_text())
    provider = parse_component((CORPUS / "figure3" / "sortkit.cdl").read_text())
    from adapterforge.speclang import parse_project

    project = parse_project((CORPUS / "figure3" / "figure3.pdl").read_text())
    tree = build_aslt(project, [consumer, provider])
    report = analyse(tree, project, [consumer, provider], conv, config)
    adapter = generate_adapter(report.verdicts[0], consumer, provider, project.name)

    fp = pool_add(pool, emit_descriptor(adapter))
    assert pool_get(pool, fp) == adapter
    ((stored_fp, entry),) = pool_list(pool)
    assert stored_fp == fp
    assert entry.kind == "adapter"
    assert entry.provided_concepts == ("data.sorting.sort",)


def test_query_empty_pool(pool: Path):
    demand = Demand(concept=concept("data.k.x"), shape=None, origin="project")
    assert pool_query(pool, PoolQuery(demand)) == []


def _shaped_demand() -> Demand:
    wanted = op("f", (param("x", I32, "data.k.x.arg.x"),), I32, "data.k.x")
    return Demand(concept=wanted.concept, shape=shape_of(wanted), origin="conn")


def test_query_exact_spec_scores_one(pool: Path):
    fp = pool_add(pool, spec_text("alpha"))
    results = pool_query(pool, PoolQuery(_shaped_demand()))
    assert results == [(fp, Fraction(1))]


def test_query_ranks_exact_above_ancestor(pool: Path):
    exact_fp = pool_add(pool, spec_text("alpha", concept_text="data.k.x"))
    ancestor_fp = pool_add(pool, spec_text("beta", concept_text="data.k"))
    results = pool_query(pool, PoolQuery(_shaped_demand()))
    assert [fp for fp, _ in results] == [exact_fp, ancestor_fp]
    # Scores are exactly what the matcher reports for the same pairs.
    demand = _shaped_demand()
    wanted = shape_as_operation(demand.concept, demand.shape)
    for fp, score in results:
        stored = pool_get(pool, fp)
        best = max(
            match_operation(wanted, op_, ConversionTable()).score
            for iface in stored.provided
            for op_ in iface.operations
            if match_operation(wanted, op_, ConversionTable()) is not None
        )
        assert score == best


def test_query_version_constraint(pool: Path):
    old = pool_add(pool, spec_text("alpha", version="1.0.0"))
    new = pool_add(pool, spec_text("alpha", version="2.0.0"))
    results = pool_query(
        pool, PoolQuery(_shaped_demand(), constraint=VersionConstraint(">=", (2, 0, 0)))
    )
    assert [fp for fp, _ in results] == [new]


def test_query_unrelated_concept_is_missed(pool: Path):
    pool_add(pool, spec_text("alpha", concept_text="data.k.x"))
    demand = Demand(concept=concept("net.http.get"), shape=None, origin="project")
    assert pool_query(pool, PoolQuery(demand)) == []


def test_verify_healthy(pool: Path):
    pool_add(pool, spec_text("alpha"))
    pool_add(pool, spec_text("beta"))
    assert pool_verify(pool) == []


def test_verify_detects_single_flip(pool: Path):
    fp = pool_add(pool, spec_text("alpha"))
    stored = pool / "components" / f"{fp}.cdl"
    data = bytearray(stored.read_bytes())
    data[0] ^= 0x01
    stored.write_bytes(bytes(data))
    findings = pool_verify(pool)
    assert len(findings) == 1
    assert findings[0].kind == "hash_mismatch"
    assert findings[0].fingerprint == fp


def test_verify_detects_dangling_entry(pool: Path):
    fp = pool_add(pool, spec_text("alpha"))
    (pool / "components" / f"{fp}.cdl").unlink()
    findings = pool_verify(pool)
    assert len(findings) == 1
    assert findings[0].kind == "dangling"


def test_temp_files_are_ignored(pool: Path):
    pool_add(pool, spec_text("alpha"))
    (pool / "components" / ".tmp-999-junk").write_bytes(b"partial write")
    assert pool_verify(pool) == []
    assert len(pool_list(pool)) == 1


def test_lock_timeout(pool: Path):
    (pool / "index.lock").write_text("held")
    with pytest.raises(PoolError) as err:
        pool_add(pool, spec_text("alpha"), timeout=0.05)
    assert err.value.code == "E_LOCK"
    (pool / "index.lock").unlink()
    pool_add(pool, spec_text("alpha"), timeout=0.05)


def _concurrent_add(args: tuple[str, str]) -> str:
    root, text = args
    return pool_add(root, text)


def test_concurrent_adds_from_processes(pool: Path):
    texts = [spec_text(f"comp{i}") for i in range(24)]
    with concurrent.futures.ProcessPoolExecutor(max_workers=4) as pool_exec:
        fps = list(pool_exec.map(_concurrent_add, [(str(pool), t) for t in texts]))
    assert len(set(fps)) == 24
    entries = pool_list(pool)
    assert len(entries) == 24
    assert pool_verify(pool) == []
    for fp, _ in entries:
        pool_get(pool, fp)
