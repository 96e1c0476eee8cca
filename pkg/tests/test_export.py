import json
import random

import pytest
from hypothesis import given, settings, strategies as st

from fedont import export
from fedont import ontology as on
from fedont.export import OwlParseError, WorkspaceError, parse_owl, to_owl
from fedont.federation import build_federation, fm_to_ontology
from fedont.ontology import (
    ComplementOf,
    DisjointClasses,
    IntersectionOf,
    Named,
    Nothing,
    Ontology,
    SubClassOf,
    Thing,
    UnionOf,
)

from helpers import DATA, FIXTURES, fixture_model, random_ontology


@pytest.fixture(scope="module")
def pair():
    return build_federation([("sym", fixture_model("symbian")), ("andr", fixture_model("android"))])


@pytest.fixture
def empty_fed():
    return build_federation([("ph", fixture_model("phone")), ("t", fixture_model("toaster"))])


# -- OWL -------------------------------------------------------------------------

def test_owl_disjoint_line():
    o = fm_to_ontology(fixture_model("os_alternative"), "os")
    assert "DisjointClasses(:Symbian :Android)" in to_owl(o).splitlines()


def test_owl_empty():
    assert to_owl(Ontology("e")) == "Prefix(:=<urn:fedont:e#>)\nOntology(\n)\n"


def test_owl_all_constructs():
    a, b = Named("A"), Named("B")
    o = Ontology("x", ("A", "B"), (
        SubClassOf(IntersectionOf((a, ComplementOf(b))), UnionOf((Thing, Nothing))),
        on.EquivalentClasses((a, b)),
        DisjointClasses((a, b, Thing)),
    ))
    text = to_owl(o)
    assert text.splitlines()[4:7] == [
        "SubClassOf(ObjectIntersectionOf(:A ObjectComplementOf(:B)) "
        "ObjectUnionOf(owl:Thing owl:Nothing))",
        "EquivalentClasses(:A :B)",
        "DisjointClasses(:A :B owl:Thing)",
    ]
    assert parse_owl(text) == o
    assert all(line == line.rstrip() for line in text.splitlines())


@pytest.mark.parametrize("path", sorted(FIXTURES.glob("*.fml")), ids=lambda p: p.stem)
def test_owl_round_trip_fixtures(path):
    o = fm_to_ontology(fixture_model(path.name), path.stem)
    assert parse_owl(to_owl(o)) == o


@pytest.mark.parametrize("name", ["chain", "cycle", "disjoint", "inconsistent"])
def test_owl_data_files_are_canonical(name):
    text = (DATA / f"{name}.ofn").read_text()
    assert to_owl(parse_owl(text)) == text


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**32))
def test_owl_round_trip_random(seed):
    o = random_ontology(random.Random(seed))
    assert parse_owl(to_owl(o)) == o


def test_owl_fragment_error():
    with pytest.raises(OwlParseError) as info:
        parse_owl((DATA / "someValues.ofn").read_text())
    err = info.value
    assert "ObjectSomeValuesFrom" in err.message
    assert "outside the supported fragment" in err.message
    assert (err.line, err.column) == (5, 15)


def test_owl_empty_file():
    with pytest.raises(OwlParseError, match="missing Ontology"):
        parse_owl("")


def test_owl_undeclared_class_is_positioned():
    text = "Prefix(:=<urn:fedont:t#>)\nOntology(\nDeclaration(Class(:A))\nSubClassOf(:A :Z)\n)\n"
    with pytest.raises(OwlParseError) as info:
        parse_owl(text)
    assert (info.value.line, info.value.column) == (4, 15)


def test_owl_truncated():
    with pytest.raises(OwlParseError):
        parse_owl("Prefix(:=<urn:fedont:t#>)\nOntology(\nDeclaration(Class(:A))\n")


# -- UML and docs ----------------------------------------------------------------

def test_uml_fixture(pair):
    lines = export.to_uml(pair).splitlines()
    assert "sym:Connectivity --|> fed:Connectivity <<subsumes>>" in lines
    andr = lines.index("class andr:Android")
    sym = lines.index("class sym:Symbian")
    assert lines[0] == "class fed:Federation" and andr < sym
    assert sum("--|>" in l for l in lines) == 8


def test_uml_no_links(empty_fed):
    assert "--|>" not in export.to_uml(empty_fed)


def test_docs_fixture(pair):
    text = export.to_docs(pair)
    assert "| fed:Bluetooth | fed:Connectivity | andr, sym |" in text
    for heading in ("## Purpose & Scope", "## Federation Classes", "## Per-Tool Ontologies",
                    "## Links", "## Warnings"):
        assert heading in text
    assert export.to_docs(pair) == text


def test_docs_empty(empty_fed):
    text = export.to_docs(empty_fed)
    assert "_No common classes: the tools share no terms._" in text
    assert "_No links._" in text


# -- workspace ---------------------------------------------------------------------

def test_workspace_round_trip(pair, tmp_path):
    export.save_workspace(pair, tmp_path)
    assert export.load_workspace(tmp_path) == pair
    links = json.loads((tmp_path / "links.json").read_text())
    assert links[0] == {"federation_class": "fed:Connectivity", "tool_id": "sym",
                        "tool_class": "sym:Connectivity", "kind": "subsumes"}
    assert sorted(p.name for p in (tmp_path / "tools").iterdir()) == [
        "andr.fml", "andr.ofn", "sym.fml", "sym.ofn"]


def test_workspace_save_is_deterministic(pair, tmp_path):
    export.save_workspace(pair, tmp_path / "a")
    export.save_workspace(export.load_workspace(tmp_path / "a"), tmp_path / "b")
    for name in ("manifest.json", "federation.ofn", "links.json", "tools/sym.ofn"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_atomic_save_replaces_existing(pair, empty_fed, tmp_path):
    ws = tmp_path / "ws"
    export.save_workspace_atomic(empty_fed, ws)
    export.save_workspace_atomic(pair, ws)
    assert export.load_workspace(ws) == pair
    assert [p.name for p in tmp_path.iterdir()] == ["ws"]


def test_workspace_missing_links(pair, tmp_path):
    export.save_workspace(pair, tmp_path)
    (tmp_path / "links.json").unlink()
    with pytest.raises(WorkspaceError, match="links.json"):
        export.load_workspace(tmp_path)


def test_workspace_version_mismatch(pair, tmp_path):
    export.save_workspace(pair, tmp_path)
    m = json.loads((tmp_path / "manifest.json").read_text())
    m["format_version"] = 2
    (tmp_path / "manifest.json").write_text(json.dumps(m))
    with pytest.raises(WorkspaceError, match="format_version 2"):
        export.load_workspace(tmp_path)


def test_workspace_corrupt_json_is_positioned(pair, tmp_path):
    export.save_workspace(pair, tmp_path)
    (tmp_path / "links.json").write_text("[\n  {\n")
    with pytest.raises(WorkspaceError) as info:
        export.load_workspace(tmp_path)
    assert info.value.line == 3


def test_workspace_tool_mismatch(pair, tmp_path):
    export.save_workspace(pair, tmp_path)
    (tmp_path / "tools" / "andr.ofn").unlink()
    with pytest.raises(WorkspaceError, match="andr.ofn"):
        export.load_workspace(tmp_path)


def test_workspace_dangling_link(pair, tmp_path):
    export.save_workspace(pair, tmp_path)
    links = json.loads((tmp_path / "links.json").read_text())
    links[0]["tool_class"] = "sym:Nope"
    (tmp_path / "links.json").write_text(json.dumps(links))
    with pytest.raises(WorkspaceError, match="Nope"):
        export.load_workspace(tmp_path)
