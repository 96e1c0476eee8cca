"""Parser and canonical printer for the ``.fml`` feature-model language.

Grammar::

    model       := "model" STRING featuredef constraint*
    featuredef  := "feature" NAME block?
    block       := "{" item* "}"
    item        := ("mandatory" | "optional") NAME block?
                 | ("or" | "alternative") "group" "{" member+ "}"
    member      := NAME block?
    constraint  := "constraint" NAME ("requires" | "excludes") NAME

Line comments start with ``#``.
"""
from __future__ import annotations

from dataclasses import dataclass

from .feature_model import (
    KEYWORDS,
    ChildKind,
    ConstraintKind,
    CrossTreeConstraint,
    Feature,
    FeatureModel,
    GroupKind,
    normalize_name,
    validate,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int = 1

    def __str__(self) -> str:
        return f"{self.line}:{self.column}"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    message: str
    expected: str | None = None
    kind: str = "syntax"  # "lexical", "syntax" or "semantic"

    def __str__(self) -> str:
        return f"{self.span}: {self.kind} error: {self.message}"


class FmParseError(ValueError):
    """Raised by :func:`parse`; carries every :class:`ParseError` found."""

    def __init__(self, errors: list[ParseError]):
        self.errors = errors
        super().__init__("\n".join(str(e) for e in errors))

    @property
    def is_semantic(self) -> bool:
        return all(e.kind == "semantic" for e in self.errors)


@dataclass(frozen=True)
class _Token:
    kind: str  # keyword text, "NAME", "STRING", "{", "}", "EOF"
    text: str
    span: SourceSpan


def _describe(tok: _Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "NAME":
        return f"name {tok.text!r}"
    if tok.kind == "STRING":
        return "string literal"
    return f"{tok.text!r}"


def tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, i, n = 1, 1, 0, len(text)

    def fail(msg: str, length: int = 1):
        raise FmParseError([ParseError(SourceSpan(line, col, length), msg, kind="lexical")])

    while i < n:
        ch = text[i]
        if ch == "\n":
            i, line, col = i + 1, line + 1, 1
        elif ch in " \t\r":
            i, col = i + 1, col + 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i, col = i + 1, col + 1
        elif ch in "{}":
            tokens.append(_Token(ch, ch, SourceSpan(line, col, 1)))
            i, col = i + 1, col + 1
        elif ch.isascii() and ch.isalpha():
            j = i + 1
            while j < n and text[j].isascii() and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            kind = word if word in KEYWORDS else "NAME"
            tokens.append(_Token(kind, word, SourceSpan(line, col, j - i)))
            col += j - i
            i = j
        elif ch == '"':
            j = i + 1
            chars: list[str] = []
            while True:
                if j >= n or text[j] == "\n":
                    fail("unterminated string literal", j - i)
                if text[j] == "\\":
                    if j + 1 >= n or text[j + 1] not in '"\\':
                        fail("invalid escape in string literal", j - i + 1)
                    chars.append(text[j + 1])
                    j += 2
                elif text[j] == '"':
                    j += 1
                    break
                else:
                    chars.append(text[j])
                    j += 1
            tokens.append(_Token("STRING", "".join(chars), SourceSpan(line, col, j - i)))
            col += j - i
            i = j
        else:
            fail(f"unexpected character {ch!r}")
    tokens.append(_Token("EOF", "", SourceSpan(line, col, 0)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.semantic: list[ParseError] = []
        self.spans: dict[str, SourceSpan] = {}
        self.seen_norm: dict[str, str] = {}

    @property
    def tok(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, *kinds: str) -> _Token:
        tok = self.tok
        if tok.kind not in kinds:
            wanted = " or ".join(k if k in ("NAME", "STRING") else repr(k) for k in kinds)
            raise FmParseError([ParseError(
                tok.span, f"expected {wanted}, found {_describe(tok)}", expected=wanted)])
        return self.advance()

    def declare(self, tok: _Token) -> None:
        key = normalize_name(tok.text)
        if key in self.seen_norm:
            first = self.seen_norm[key]
            where = self.spans[first]
            if first == tok.text:
                msg = f"duplicate feature name {tok.text!r} (first declared at {where})"
            else:
                msg = (f"feature name {tok.text!r} collides with {first!r} "
                       f"(declared at {where}) after normalization")
            self.semantic.append(ParseError(tok.span, msg, kind="semantic"))
        else:
            self.seen_norm[key] = tok.text
            self.spans[tok.text] = tok.span

    def parse_model(self) -> FeatureModel:
        self.expect("model")
        name = self.expect("STRING").text
        self.expect("feature")
        root = self.parse_feature(self.expect("NAME"))
        constraints = []
        while self.tok.kind == "constraint":
            self.advance()
            a = self.expect("NAME")
            kind = self.expect("requires", "excludes")
            b = self.expect("NAME")
            for end in (a, b):
                if end.text not in self.spans:
                    self.semantic.append(ParseError(
                        end.span, f"constraint references unknown feature {end.text!r}",
                        kind="semantic"))
            if a.text == b.text:
                self.semantic.append(ParseError(
                    b.span, f"constraint relates {a.text!r} to itself", kind="semantic"))
            constraints.append(CrossTreeConstraint(ConstraintKind(kind.kind), a.text, b.text))
        self.expect("EOF", "constraint")
        return FeatureModel(name, root, tuple(constraints))

    def parse_feature(self, name_tok: _Token) -> Feature:
        self.declare(name_tok)
        children: list[tuple[ChildKind, Feature]] = []
        groups: list[tuple[GroupKind, tuple[Feature, ...]]] = []
        if self.tok.kind == "{":
            self.advance()
            while self.tok.kind != "}":
                head = self.expect("mandatory", "optional", "or", "alternative", "}")
                if head.kind in ("mandatory", "optional"):
                    child = self.parse_feature(self.expect("NAME"))
                    children.append((ChildKind(head.kind), child))
                    continue
                self.expect("group")
                self.expect("{")
                members = [self.parse_feature(self.expect("NAME"))]
                while self.tok.kind != "}":
                    members.append(self.parse_feature(self.expect("NAME", "}")))
                self.advance()
                if len(members) < 2:
                    self.semantic.append(ParseError(
                        head.span, f"{head.kind} group needs >= 2 members (group arity < 2)",
                        kind="semantic"))
                groups.append((GroupKind(head.kind), tuple(members)))
            self.advance()
        return Feature(name_tok.text, tuple(children), tuple(groups))


def parse(text: str) -> FeatureModel:
    """Parse ``.fml`` source; raise :class:`FmParseError` on any error."""
    parser = _Parser(text)
    model = parser.parse_model()
    if parser.semantic:
        raise FmParseError(parser.semantic)
    leftover = validate(model)
    if leftover:  # pragma: no cover - parser checks mirror validate()
        raise FmParseError([ParseError(SourceSpan(1, 1), d.message, kind="semantic")
                            for d in leftover])
    return model


def serialize(model: FeatureModel) -> str:
    lines = [f'model "{_escape(model.name)}"']
    _emit_feature(lines, "feature", model.root, 0)
    for c in model.canonical().constraints:
        lines.append(f"constraint {c.source} {c.kind.value} {c.target}")
    return "\n".join(lines) + "\n"


def _escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _emit_feature(lines: list[str], head: str, f: Feature, depth: int) -> None:
    pad = "  " * depth
    prefix = f"{head} " if head else ""
    if not f.children and not f.groups:
        lines.append(f"{pad}{prefix}{f.name}")
        return
    lines.append(f"{pad}{prefix}{f.name} {{")
    for kind, child in f.children:
        _emit_feature(lines, kind.value, child, depth + 1)
    for kind, members in f.groups:
        lines.append(f"{pad}  {kind.value} group {{")
        for m in members:
            _emit_feature(lines, "", m, depth + 2)
        lines.append(f"{pad}  }}")
    lines.append(f"{pad}}}")
