"""Serialisers: OWL functional-style subset, class-diagram text, Markdown
documentation, and the on-disk federation workspace."""
from __future__ import annotations

import json
import os
import re
import shutil
import tempfile
from dataclasses import dataclass
from pathlib import Path

from .federation import (
    FED_PREFIX,
    FederationLink,
    FederationOptions,
    FederationResult,
    FederationWarning,
    LinkKind,
    Manifest,
    ROOT_CLASS,
)
from .fm_text import FmParseError, parse as parse_fml, serialize as serialize_fml
from .ontology import (
    Axiom,
    ClassExpr,
    ComplementOf,
    DisjointClasses,
    EquivalentClasses,
    IntersectionOf,
    Named,
    Nothing,
    Ontology,
    SubClassOf,
    Thing,
    UnionOf,
    _Nothing,
    _Thing,
)

FORMAT_VERSION = 1
IRI_SCHEME = "urn:fedont:"


# -- OWL functional-style subset --------------------------------------------

def _owl_expr(e: ClassExpr) -> str:
    if isinstance(e, Named):
        return f":{e.name}"
    if isinstance(e, _Thing):
        return "owl:Thing"
    if isinstance(e, _Nothing):
        return "owl:Nothing"
    if isinstance(e, IntersectionOf):
        return f"ObjectIntersectionOf({' '.join(_owl_expr(o) for o in e.operands)})"
    if isinstance(e, UnionOf):
        return f"ObjectUnionOf({' '.join(_owl_expr(o) for o in e.operands)})"
    if isinstance(e, ComplementOf):
        return f"ObjectComplementOf({_owl_expr(e.operand)})"
    raise TypeError(f"not a class expression: {e!r}")


def _owl_axiom(ax: Axiom) -> str:
    if isinstance(ax, SubClassOf):
        return f"SubClassOf({_owl_expr(ax.sub)} {_owl_expr(ax.sup)})"
    head = "EquivalentClasses" if isinstance(ax, EquivalentClasses) else "DisjointClasses"
    return f"{head}({' '.join(_owl_expr(o) for o in ax.operands)})"


def to_owl(onto: Ontology) -> str:
    lines = [f"Prefix(:=<{IRI_SCHEME}{onto.iri_prefix}#>)", "Ontology("]
    lines += [f"Declaration(Class(:{c}))" for c in onto.classes]
    lines += [_owl_axiom(ax) for ax in onto.axioms]
    lines.append(")")
    return "\n".join(lines) + "\n"


class OwlParseError(ValueError):
    def __init__(self, line: int, column: int, message: str):
        self.line, self.column, self.message = line, column, message
        super().__init__(f"{line}:{column}: {message}")


# Constructs of OWL 2 that exist but lie outside the propositional fragment.
_UNSUPPORTED = frozenset({
    "ObjectSomeValuesFrom", "ObjectAllValuesFrom", "ObjectHasValue", "ObjectHasSelf",
    "ObjectMinCardinality", "ObjectMaxCardinality", "ObjectExactCardinality",
    "ObjectOneOf", "DataSomeValuesFrom", "DataAllValuesFrom", "DataHasValue",
    "DataMinCardinality", "DataMaxCardinality", "DataExactCardinality",
    "DisjointUnion", "ObjectProperty", "DataProperty", "AnnotationProperty",
    "NamedIndividual", "Datatype", "ClassAssertion", "ObjectPropertyAssertion",
    "DataPropertyAssertion", "SubObjectPropertyOf", "ObjectPropertyDomain",
    "ObjectPropertyRange", "Annotation", "AnnotationAssertion", "Import",
    "HasKey", "SameIndividual", "DifferentIndividuals",
})
_STANDARD_PREFIXES = frozenset({"owl", "rdf", "rdfs", "xsd", "xml"})

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<lpar>\()
  | (?P<rpar>\))
  | (?P<eq>=)
  | (?P<iri><[^>\s]*>)
  | (?P<pname>(?:[A-Za-z][\w-]*)?:[\w:.-]*)
  | (?P<word>[A-Za-z][\w]*)
""", re.VERBOSE)


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    column: int


def _owl_tokens(text: str) -> list[_Tok]:
    out: list[_Tok] = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise OwlParseError(line, col, f"unexpected character {text[pos]!r}")
        kind, value = m.lastgroup, m.group()
        if kind not in ("ws", "comment"):
            out.append(_Tok(kind, value, line, col))
        nl = value.count("\n")
        if nl:
            line += nl
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    out.append(_Tok("eof", "", line, col))
    return out


class _OwlParser:
    def __init__(self, text: str):
        self.toks = _owl_tokens(text)
        self.i = 0
        self.prefix: str | None = None
        self.used: dict[str, _Tok] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise OwlParseError(tok.line, tok.column, msg)

    def take(self, kind: str, text: str | None = None) -> _Tok:
        tok = self.tok
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            self.fail(f"expected {want!r}, found {found}")
        self.i += 1
        return tok

    def keyword(self) -> _Tok:
        tok = self.tok
        if tok.kind == "word" and tok.text in _UNSUPPORTED:
            self.fail(f"{tok.text} is outside the supported fragment")
        return self.take("word")

    def parse(self) -> Ontology:
        if self.tok.kind == "eof":
            self.fail("missing Ontology")
        while self.tok.kind == "word" and self.tok.text == "Prefix":
            self.parse_prefix()
        if self.tok.kind == "eof":
            self.fail("missing Ontology")
        self.take("word", "Ontology")
        self.take("lpar")
        if self.tok.kind == "iri":  # optional ontology IRI
            self.i += 1
        if self.prefix is None:
            self.fail("missing Prefix(:=<urn:fedont:...#>) declaration")
        classes: list[str] = []
        axioms: list[Axiom] = []
        while self.tok.kind != "rpar":
            head = self.keyword()
            self.take("lpar")
            if head.text == "Declaration":
                kind = self.keyword()
                if kind.text != "Class":
                    self.fail(f"{kind.text} declarations are outside the supported fragment", kind)
                self.take("lpar")
                name_tok = self.tok
                name = self.name()
                if name in classes:
                    self.fail(f"class {name!r} declared twice", name_tok)
                classes.append(name)
                self.take("rpar")
            elif head.text == "SubClassOf":
                axioms.append(SubClassOf(self.expr(), self.expr()))
            elif head.text in ("EquivalentClasses", "DisjointClasses"):
                ops = self.operands(head)
                cls = EquivalentClasses if head.text == "EquivalentClasses" else DisjointClasses
                axioms.append(cls(tuple(ops)))
            else:
                self.fail(f"{head.text} is outside the supported fragment", head)
            self.take("rpar")
        self.take("rpar")
        self.take("eof")
        declared = set(classes)
        for name, tok in self.used.items():
            if name not in declared:
                self.fail(f"undeclared class {name!r}", tok)
        return Ontology(self.prefix, tuple(classes), tuple(axioms))

    def parse_prefix(self) -> None:
        self.take("word", "Prefix")
        self.take("lpar")
        name_tok = self.take("pname")
        self.take("eq")
        iri_tok = self.take("iri")
        self.take("rpar")
        pfx = name_tok.text[:-1] if name_tok.text.endswith(":") else None
        if pfx is None:
            self.fail(f"malformed prefix name {name_tok.text!r}", name_tok)
        if pfx in _STANDARD_PREFIXES:
            return
        if pfx != "":
            self.fail(f"prefix {pfx!r} is outside the supported fragment", name_tok)
        iri = iri_tok.text[1:-1]
        if not (iri.startswith(IRI_SCHEME) and iri.endswith("#")):
            self.fail(f"default prefix must be <{IRI_SCHEME}NAME#>", iri_tok)
        self.prefix = iri[len(IRI_SCHEME):-1]

    def name(self) -> str:
        tok = self.take("pname")
        if not tok.text.startswith(":") or len(tok.text) == 1:
            self.fail(f"expected a class in the default namespace, found {tok.text!r}", tok)
        return tok.text[1:]

    def operands(self, head: _Tok) -> list[ClassExpr]:
        ops = []
        while self.tok.kind != "rpar":
            ops.append(self.expr())
        if len(ops) < 2:
            self.fail(f"{head.text} needs at least 2 operands", head)
        return ops

    def expr(self) -> ClassExpr:
        tok = self.tok
        if tok.kind == "pname":
            if tok.text == "owl:Thing":
                self.i += 1
                return Thing
            if tok.text == "owl:Nothing":
                self.i += 1
                return Nothing
            name = self.name()
            self.used.setdefault(name, tok)
            return Named(name)
        if tok.kind != "word":
            found = "end of input" if tok.kind == "eof" else repr(tok.text)
            self.fail(f"expected a class expression, found {found}")
        head = self.keyword()
        self.take("lpar")
        if head.text == "ObjectIntersectionOf":
            e: ClassExpr = IntersectionOf(tuple(self.operands(head)))
        elif head.text == "ObjectUnionOf":
            e = UnionOf(tuple(self.operands(head)))
        elif head.text == "ObjectComplementOf":
            e = ComplementOf(self.expr())
        else:
            self.fail(f"{head.text} is outside the supported fragment", head)
        self.take("rpar")
        return e


def parse_owl(text: str) -> Ontology:
    return _OwlParser(text).parse()


# -- class diagram -----------------------------------------------------------

def to_uml(result: FederationResult) -> str:
    lines = [f"class {c}" for c in result.federation_classes()]
    for tid in sorted(result.tools):
        lines += [f"class {tid}:{c}" for c in result.tools[tid].classes]
    for l in result.links:
        lines.append(f"{l.tool_class} --|> {l.federation_class} <<{l.kind.value}>>")
    return "\n".join(lines) + "\n"


# -- documentation -----------------------------------------------------------

def _cell(s: str) -> str:
    return s.replace("|", "\\|") if s else "-"


def to_docs(result: FederationResult) -> str:
    m = result.manifest
    out = ["# Federation ontology", ""]
    out += ["## Purpose & Scope", "",
            f"- Purpose: {m.purpose or '(not stated)'}",
            f"- Scope: {m.scope or '(not stated)'}",
            f"- Tools: {', '.join(m.tool_ids) if m.tool_ids else '(none)'}", ""]

    out += ["## Federation Classes", ""]
    fed_classes = [c for c in result.federation.classes if c != ROOT_CLASS]
    if not fed_classes:
        out += ["_No common classes: the tools share no terms._", ""]
    else:
        out += ["| Class | Parent | Supporting tools |", "|---|---|---|"]
        for c in fed_classes:
            parent = result.parent_of(c)
            tools = ", ".join(sorted(result.support(f"{FED_PREFIX}:{c}")))
            out.append(f"| {FED_PREFIX}:{c} | "
                       f"{_cell(f'{FED_PREFIX}:{parent}' if parent else '')} | {_cell(tools)} |")
        out.append("")

    out += ["## Per-Tool Ontologies", ""]
    for tid in sorted(result.tools):
        onto = result.tools[tid]
        out += [f"### {tid}", "",
                f"- Classes: {len(onto.classes)}",
                f"- Axioms: {len(onto.axioms)}",
                f"- Class list: {', '.join(f'{tid}:{c}' for c in onto.classes)}", ""]

    out += ["## Links", ""]
    if not result.links:
        out += ["_No links._", ""]
    else:
        out += ["| Federation class | Tool | Tool class | Kind |", "|---|---|---|---|"]
        for l in result.links:
            out.append(f"| {l.federation_class} | {l.tool_id} | {l.tool_class} | {l.kind.value} |")
        out.append("")

    out += ["## Warnings", ""]
    if not result.warnings:
        out += ["_None._"]
    else:
        for w in result.warnings:
            tools = f" ({', '.join(w.tools)})" if w.tools else ""
            out.append(f"- {w.message}{tools}")
    return "\n".join(out) + "\n"


# -- workspace ---------------------------------------------------------------

class WorkspaceError(ValueError):
    def __init__(self, path: str | Path, message: str, line: int | None = None,
                 column: int | None = None):
        self.path, self.line, self.column = str(path), line, column
        where = f"{path}:{line}:{column}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path: Path, text: str) -> None:
    path.write_text(text, encoding="utf-8", newline="\n")


def manifest_json(result: FederationResult) -> str:
    opts = result.options
    return _json_text({
        "format_version": FORMAT_VERSION,
        "purpose": result.manifest.purpose,
        "scope": result.manifest.scope,
        "tool_ids": list(result.manifest.tool_ids),
        "options": {
            "fuzzy": opts.fuzzy,
            "equivalence_on_exact": opts.equivalence_on_exact,
            "synonyms": dict(sorted(opts.synonyms.items())),
        },
        "warnings": [{"message": w.message, "tools": list(w.tools)} for w in result.warnings],
    })


def links_json(result: FederationResult) -> str:
    return _json_text([
        {"federation_class": l.federation_class, "tool_id": l.tool_id,
         "tool_class": l.tool_class, "kind": l.kind.value}
        for l in result.links])


def save_workspace(result: FederationResult, directory: str | Path) -> None:
    """Write ``result`` into ``directory`` (created if needed). Stale tool
    files from an earlier save are removed."""
    root = Path(directory)
    tools_dir = root / "tools"
    tools_dir.mkdir(parents=True, exist_ok=True)
    _write(root / "manifest.json", manifest_json(result))
    _write(root / "federation.ofn", to_owl(result.federation))
    _write(root / "links.json", links_json(result))
    keep = set()
    for tid in result.manifest.tool_ids:
        keep |= {f"{tid}.ofn", f"{tid}.fml"}
        _write(tools_dir / f"{tid}.ofn", to_owl(result.tools[tid]))
        _write(tools_dir / f"{tid}.fml", serialize_fml(result.models[tid]))
    for p in tools_dir.iterdir():
        if p.name not in keep:
            p.unlink()


def save_workspace_atomic(result: FederationResult, directory: str | Path) -> None:
    """Save into a sibling temp directory, then swap it into place."""
    target = Path(directory).resolve()
    target.parent.mkdir(parents=True, exist_ok=True)
    tmp = Path(tempfile.mkdtemp(prefix=f".{target.name}.", dir=target.parent))
    try:
        save_workspace(result, tmp)
        if target.exists():
            backup = Path(tempfile.mkdtemp(prefix=f".{target.name}.old.", dir=target.parent))
            backup.rmdir()
            os.replace(target, backup)
            os.replace(tmp, target)
            shutil.rmtree(backup)
        else:
            os.replace(tmp, target)
    except BaseException:
        shutil.rmtree(tmp, ignore_errors=True)
        raise


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise WorkspaceError(path, "missing file") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise WorkspaceError(path, f"unreadable: {exc}") from None


def _load_json(path: Path):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise WorkspaceError(path, exc.msg, exc.lineno, exc.colno) from None


def _load_owl(path: Path) -> Ontology:
    try:
        return parse_owl(_read(path))
    except OwlParseError as exc:
        raise WorkspaceError(path, exc.message, exc.line, exc.column) from None


def load_workspace(directory: str | Path) -> FederationResult:
    root = Path(directory)
    if not root.is_dir():
        raise WorkspaceError(root, "not a workspace directory")
    mpath = root / "manifest.json"
    manifest = _load_json(mpath)
    if not isinstance(manifest, dict):
        raise WorkspaceError(mpath, "manifest must be a JSON object")
    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise WorkspaceError(mpath, f"unsupported format_version {version!r} "
                                    f"(expected {FORMAT_VERSION})")
    try:
        tool_ids = tuple(manifest["tool_ids"])
        purpose, scope = manifest.get("purpose", ""), manifest.get("scope", "")
        raw_opts = manifest.get("options", {})
        options = FederationOptions(
            purpose=purpose, scope=scope,
            fuzzy=bool(raw_opts.get("fuzzy", False)),
            equivalence_on_exact=bool(raw_opts.get("equivalence_on_exact", False)),
            synonyms=dict(raw_opts.get("synonyms", {})))
        warnings = tuple(FederationWarning(w["message"], tuple(w.get("tools", ())))
                         for w in manifest.get("warnings", []))
    except (KeyError, TypeError, AttributeError) as exc:
        raise WorkspaceError(mpath, f"malformed manifest: {exc}") from None

    tools_dir = root / "tools"
    present = {p.name for p in tools_dir.iterdir()} if tools_dir.is_dir() else set()
    expected = {f"{t}.{ext}" for t in tool_ids for ext in ("ofn", "fml")}
    if present != expected:
        extra, missing = sorted(present - expected), sorted(expected - present)
        detail = "; ".join(filter(None, [
            f"missing {', '.join(missing)}" if missing else "",
            f"unexpected {', '.join(extra)}" if extra else ""]))
        raise WorkspaceError(tools_dir, f"tool files do not match manifest tool_ids: {detail}")

    tools, models = {}, {}
    for tid in tool_ids:
        tools[tid] = _load_owl(tools_dir / f"{tid}.ofn")
        fml = tools_dir / f"{tid}.fml"
        try:
            models[tid] = parse_fml(_read(fml))
        except FmParseError as exc:
            e = exc.errors[0]
            raise WorkspaceError(fml, e.message, e.span.line, e.span.column) from None

    federation = _load_owl(root / "federation.ofn")
    lpath = root / "links.json"
    raw_links = _load_json(lpath)
    if not isinstance(raw_links, list):
        raise WorkspaceError(lpath, "links.json must be a JSON array")
    links = []
    fed_names = {f"{FED_PREFIX}:{c}" for c in federation.classes}
    for i, item in enumerate(raw_links):
        try:
            link = FederationLink(item["federation_class"], item["tool_id"],
                                  item["tool_class"], LinkKind(item["kind"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise WorkspaceError(lpath, f"link #{i}: malformed entry ({exc})") from None
        tool = tools.get(link.tool_id)
        if link.federation_class not in fed_names:
            bad = link.federation_class
        elif tool is None:
            bad = link.tool_id
        elif link.tool_class not in {f"{link.tool_id}:{c}" for c in tool.classes}:
            bad = link.tool_class
        else:
            bad = None
        if bad is not None:
            raise WorkspaceError(lpath, f"link #{i}: {bad!r} does not resolve")
        links.append(link)
    return FederationResult(federation, tools, tuple(links),
                            Manifest(purpose, scope, tool_ids), models, options, warnings)
