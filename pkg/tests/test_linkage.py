from __future__ import annotations

from pathlib import Path

import pytest

from adapterforge.adapters import generate_adapter
from adapterforge.analyser import analyse, verify
from adapterforge.aslt import build_aslt
from adapterforge.conversions import load_rules
from adapterforge.linkage import (
    ADAPTED,
    ALREADY_EXACT,
    GENERATED,
    POOL_HIT,
    UNRESOLVABLE,
    LinkageError,
    WorkflowResult,
    integrate,
    report,
    run_workflow,
)
from adapterforge.pool import init_pool, pool_list
from adapterforge.report import (
    match_report_from_json,
    match_report_to_json,
    render_match_report,
    workflow_result_from_json,
    workflow_result_to_json,
)
from adapterforge.speclang import parse_component, parse_project, serialize
from adapterforge import canonjson

CORPUS = Path(__file__).parent / "corpus"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def rules():
    return load_rules(CORPUS / "conversions.rules")


def _figure3_adapter():
    conv, config = load_rules(CORPUS / "conversions.rules")
    consumer = parse_component((CORPUS / "figure3" / "reportgen.cdl").read_text())
    provider = parse_component((CORPUS / "figure3" / "sortkit.cdl").read_text())
    project = parse_project((CORPUS / "figure3" / "figure3.pdl").read_text())
    tree = build_aslt(project, [consumer, provider])
    analysis = analyse(tree, project, [consumer, provider], conv, config)
    adapter = generate_adapter(analysis.verdicts[0], consumer, provider, project.name)
    return project, consumer, provider, adapter, (conv, config)


def test_integrate_adds_one_connection():
    project, consumer, provider, adapter, _ = _figure3_adapter()
    integrated = integrate(project, project.connections[0], adapter)
    assert len(integrated.project.connections) == len(project.connections) + 1
    assert integrated.original == project
    first, second = integrated.project.connections
    assert first.consumer_component == "reportgen"
    assert first.provider_component == adapter.name
    assert second.consumer_component == adapter.name
    assert second.provider_component == "sortkit"
    # The adapter joined the uses list with an exact version pin.
    use = integrated.project.use(adapter.name)
    assert use is not None and str(use.constraint) == '= "1.0.0"'


def test_integrate_heals_the_connection(rules):
    conv, config = rules
    project, consumer, provider, adapter, _ = _figure3_adapter()
    integrated = integrate(project, project.connections[0], adapter)
    components = [consumer, provider, *integrated.added]
    tree = build_aslt(integrated.project, components)
    assert verify(tree, integrated.project, components, conv, config)


def test_integrate_serializes_to_valid_specs():
    project, consumer, provider, adapter, _ = _figure3_adapter()
    integrated = integrate(project, project.connections[0], adapter)
    reparsed = parse_project(serialize(integrated.project))
    assert reparsed == integrated.project
    for added in integrated.added:
        assert parse_component(serialize(added)) == added


def test_integrate_wrong_interface_rejected():
    project, consumer, provider, adapter, _ = _figure3_adapter()
    stranger = parse_component(
        'component "stranger" version "1.0.0" {\n'
        "  provides interface Unrelated {\n"
        "    op nope() -> unit @concept other.thing\n"
        "  }\n"
        "}"
    )
    with pytest.raises(LinkageError) as err:
        integrate(project, project.connections[0], stranger)
    assert err.value.code == "E_INTERFACE_MISMATCH"


def _run(case_dir: Path, project_file: str, pool_root: Path, rules) -> WorkflowResult:
    conv, config = rules
    return run_workflow(
        case_dir / project_file, case_dir, pool_root, conv, config
    )


def test_all_exact_project(tmp_path: Path, rules):
    pool_root = tmp_path / "pool"
    result = _run(CORPUS / "exact", "exactpair.pdl", pool_root, rules)
    assert result.outcome == ALREADY_EXACT
    assert result.integrations == ()
    assert result.adapted_project == parse_project(
        (CORPUS / "exact" / "exactpair.pdl").read_text()
    )
    assert pool_list(pool_root) == []  # nothing stored


def test_figure3_generates_then_hits(tmp_path: Path, rules):
    pool_root = tmp_path / "pool"

    first = _run(CORPUS / "figure3", "figure3.pdl", pool_root, rules)
    assert first.outcome == ADAPTED
    assert [i.source for i in first.integrations] == [GENERATED]
    assert first.final_report.all_exact()
    assert len(first.generated_adapters) == 1
    entries = pool_list(pool_root)
    assert len(entries) == 1 and entries[0][1].kind == "adapter"

    second = _run(CORPUS / "figure3", "figure3.pdl", pool_root, rules)
    assert second.outcome == ADAPTED
    assert [i.source for i in second.integrations] == [POOL_HIT]
    assert second.generated_adapters == ()
    # Byte-identical integrated project across the two runs.
    assert serialize(second.adapted_project) == serialize(first.adapted_project)
    # Pool monotonicity: nothing got removed or re-generated.
    assert pool_list(pool_root) == entries


def test_units_workflow(tmp_path: Path, rules):
    result = _run(CORPUS / "units", "unitsync.pdl", tmp_path / "pool", rules)
    assert result.outcome == ADAPTED
    assert result.final_report.all_exact()


def test_unsatisfied_demand(tmp_path: Path, rules):
    result = _run(CORPUS / "missing", "wantsign.pdl", tmp_path / "pool", rules)
    assert result.outcome == UNRESOLVABLE
    assert [str(d.concept) for d in result.unresolved] == ["data.crypto.sign"]


def test_demand_satisfied_from_pool(tmp_path: Path, rules):
    conv, config = rules
    pool_root = init_pool(tmp_path / "pool")
    from adapterforge.pool import pool_add

    signer = (
        'component "signer" version "1.0.0" {\n'
        "  provides interface Signing {\n"
        "    op sign(payload: bytes) -> bytes @concept data.crypto.sign\n"
        "  }\n"
        "}\n"
    )
    fp = pool_add(pool_root, signer)
    result = _run(CORPUS / "missing", "wantsign.pdl", pool_root, rules)
    assert result.outcome == ADAPTED
    assert result.unresolved == ()
    assert [i.source for i in result.integrations] == [POOL_HIT]
    assert result.integrations[0].fingerprint == fp
    assert result.integrations[0].connection == "demand:data.crypto.sign"
    assert result.adapted_project.use("signer") is not None


def _positions(result: WorkflowResult) -> dict[str, list[int]]:
    out: dict[str, list[int]] = {}
    for i, step in enumerate(result.steps):
        out.setdefault(step.action, []).append(i)
    return out


def test_step_trace_order(tmp_path: Path, rules):
    result = _run(CORPUS / "figure3", "figure3.pdl", tmp_path / "pool", rules)
    pos = _positions(result)
    assert pos["read"][0] == 0
    assert pos["compare"][0] == 1
    assert pos["read"][0] < pos["compare"][0] < pos["query"][0]
    assert pos["query"][0] < pos["return"][0] < pos["invite"][0]
    assert pos["invite"][0] < pos["generate"][0] < pos["store"][0]
    assert pos["store"][0] < pos["integrate"][0] < pos["verify"][-1]
    assert result.steps[-1].action == "verify"
    # Numbered actions carry the right step labels.
    numbers = {s.action: s.step for s in result.steps}
    assert (numbers["read"], numbers["compare"], numbers["query"]) == (1, 2, 3)
    assert (numbers["invite"], numbers["generate"], numbers["integrate"]) == (5, 6, 7)


def test_exact_path_trace_has_no_generation(tmp_path: Path, rules):
    result = _run(CORPUS / "exact", "exactpair.pdl", tmp_path / "pool", rules)
    actions = [s.action for s in result.steps]
    assert actions == ["read", "compare", "verify"]


def test_workflow_result_roundtrip(tmp_path: Path, rules):
    result = _run(CORPUS / "figure3", "figure3.pdl", tmp_path / "pool", rules)
    doc = canonjson.loads(canonjson.dumps(workflow_result_to_json(result)))
    assert workflow_result_from_json(doc) == result


def test_match_report_roundtrip(tmp_path: Path, rules):
    result = _run(CORPUS / "units", "unitsync.pdl", tmp_path / "pool", rules)
    doc = canonjson.loads(canonjson.dumps(match_report_to_json(result.final_report)))
    assert match_report_from_json(doc) == result.final_report


def test_human_report_contains_verdict_tokens(tmp_path: Path, rules):
    conv, config = rules
    consumer = parse_component((CORPUS / "exact" / "archiver.cdl").read_text())
    provider = parse_component((CORPUS / "exact" / "hashlibx.cdl").read_text())
    project = parse_project((CORPUS / "exact" / "exactpair.pdl").read_text())
    tree = build_aslt(project, [consumer, provider])
    analysis = analyse(tree, project, [consumer, provider], conv, config)
    text = render_match_report(analysis)
    assert "EXACT" in text
    assert text.count("connection ") == 1


def test_golden_workflow_report(tmp_path: Path, rules):
    result = _run(CORPUS / "figure3", "figure3.pdl", tmp_path / "pool", rules)
    assert report(result, "human") == (GOLDEN / "figure3_report.txt").read_text()


def test_parse_error_carries_file_context(tmp_path: Path, rules):
    conv, config = rules
    bad = tmp_path / "bad.pdl"
    bad.write_text("project oops {")
    with pytest.raises(LinkageError) as err:
        run_workflow(bad, tmp_path, tmp_path / "pool", conv, config)
    assert err.value.code == "E_PARSE"
    assert "bad.pdl" in err.value.message


def _write_case(tmp_path: Path, *specs, project) -> Path:
    case = tmp_path / "case"
    case.mkdir()
    for spec in specs:
        (case / f"{spec.name}.cdl").write_text(serialize(spec))
    project_file = case / f"{project.name}.pdl"
    project_file.write_text(serialize(project))
    return project_file


def test_incompatible_connection_does_not_block_other_heals(tmp_path: Path, rules):
    conv, config = rules
    consumer = parse_component(
        'component "app" version "1.0.0" {\n'
        "  requires interface Sorting {\n"
        "    op sortAscending(items: list<i32>) -> list<i32> @concept data.sorting.sort\n"
        "  }\n"
        "  requires interface Signing {\n"
        "    op sign(payload: bytes) -> bytes @concept data.crypto.sign\n"
        "  }\n"
        "}"
    )
    sorter = parse_component((CORPUS / "figure3" / "sortkit.cdl").read_text())
    mute = parse_component(
        'component "mute" version "1.0.0" {\n'
        "  provides interface Noop {\n"
        "    op ping() -> unit @concept infra.noop.ping\n"
        "  }\n"
        "}"
    )
    project = parse_project(
        'project "mixed" {\n'
        '  uses "app" *\n'
        '  uses "sortkit" *\n'
        '  uses "mute" *\n'
        "  connect app.requires.Sorting -> sortkit.provides.BulkSort\n"
        "  connect app.requires.Signing -> mute.provides.Noop\n"
        "}"
    )
    project_file = _write_case(tmp_path, consumer, sorter, mute, project=project)
    result = run_workflow(project_file, project_file.parent, tmp_path / "pool", conv, config)
    # Partial progress: the adaptable edge healed, the incompatible one
    # surfaced as unresolved demand without aborting the run.
    assert result.outcome == UNRESOLVABLE
    assert [i.source for i in result.integrations] == [GENERATED]
    assert [str(d.concept) for d in result.unresolved] == ["data.crypto.sign"]
    healed = [
        v for v in result.final_report.verdicts
        if v.connection.consumer_interface == "Sorting"
        or v.connection.provider_interface == "Sorting"
    ]
    assert healed and all(v.status == "EXACT" for v in healed)
    assert result.diagnostics


def test_duplicate_connections_integrate_cleanly(tmp_path: Path, rules):
    conv, config = rules
    consumer = parse_component((CORPUS / "figure3" / "reportgen.cdl").read_text())
    provider = parse_component((CORPUS / "figure3" / "sortkit.cdl").read_text())
    project = parse_project(
        'project "dup" {\n'
        '  uses "reportgen" *\n'
        '  uses "sortkit" *\n'
        "  connect reportgen.requires.Sorting -> sortkit.provides.BulkSort\n"
        "  connect reportgen.requires.Sorting -> sortkit.provides.BulkSort\n"
        "}"
    )
    project_file = _write_case(tmp_path, consumer, provider, project=project)
    result = run_workflow(project_file, project_file.parent, tmp_path / "pool", conv, config)
    assert result.outcome == ADAPTED
    # First edge generates; the identical second edge hits the store.
    assert [i.source for i in result.integrations] == [GENERATED, POOL_HIT]
    # One adapter, listed once in uses, and the output parses cleanly.
    names = [u.name for u in result.adapted_project.uses]
    assert len(names) == len(set(names))
    assert parse_project(serialize(result.adapted_project)) == result.adapted_project
    assert len(result.adapted_project.connections) == 4


def test_incompatible_connection_healed_by_stored_adapter(tmp_path: Path, rules):
    # Generation only serves adaptable connections; a hand-stored
    # adapter in the pool can still heal an incompatible one.
    conv, config = rules
    consumer = parse_component(
        'component "client" version "1.0.0" {\n'
        "  requires interface Signing {\n"
        "    op sign(payload: bytes) -> bytes @concept data.crypto.sign\n"
        "  }\n"
        "}"
    )
    provider = parse_component(
        'component "vault" version "1.0.0" {\n'
        "  provides interface Sealing {\n"
        "    op seal(blob: string) -> string @concept data.crypto.seal\n"
        "  }\n"
        "}"
    )
    bridge = parse_component(
        'component "bridge" version "1.0.0" {\n'
        "  provides interface Signing {\n"
        "    op sign(payload: bytes) -> bytes @concept data.crypto.sign\n"
        "  }\n"
        "  requires interface Sealing {\n"
        "    op seal(blob: string) -> string @concept data.crypto.seal\n"
        "  }\n"
        "}"
    )
    project = parse_project(
        'project "sealed" {\n'
        '  uses "client" *\n'
        '  uses "vault" *\n'
        "  connect client.requires.Signing -> vault.provides.Sealing\n"
        "}"
    )
    project_file = _write_case(tmp_path, consumer, provider, project=project)
    pool_root = init_pool(tmp_path / "pool")
    from adapterforge.pool import pool_add

    fp = pool_add(pool_root, serialize(bridge))

    result = run_workflow(project_file, project_file.parent, pool_root, conv, config)
    assert result.outcome == ADAPTED
    assert [(i.source, i.fingerprint) for i in result.integrations] == [("POOL_HIT", fp)]
    assert result.generated_adapters == ()
    assert result.final_report.all_exact()


def test_reports_are_byte_identical_across_runs(tmp_path: Path, rules):
    conv, config = rules
    from adapterforge.report import render_match_report

    def analyse_bytes() -> str:
        consumer = parse_component((CORPUS / "figure3" / "reportgen.cdl").read_text())
        provider = parse_component((CORPUS / "figure3" / "sortkit.cdl").read_text())
        project = parse_project((CORPUS / "figure3" / "figure3.pdl").read_text())
        tree = build_aslt(project, [consumer, provider])
        return render_match_report(
            analyse(tree, project, [consumer, provider], conv, config), "structured"
        )

    assert analyse_bytes() == analyse_bytes()
