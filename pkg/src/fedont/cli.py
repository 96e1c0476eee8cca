"""Command-line interface.

Exit status: 0 success, 1 domain failure (invalid model, inconsistency,
false answer to a boolean query), 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import export, federation, feature_model as fm, fm_text, ontology

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class CommandError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _out(text: str = "") -> None:
    sys.stdout.write(text + "\n")


def _err(text: str) -> None:
    sys.stderr.write(text + "\n")


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CommandError(f"{path}: cannot read: {exc}") from None


def _load_model(path: str) -> fm.FeatureModel:
    try:
        return fm_text.parse(_read_text(path))
    except fm_text.FmParseError as exc:
        for e in exc.errors:
            _err(f"{path}:{e.span.line}:{e.span.column}: {e.kind} error: {e.message}")
        raise CommandError("", EXIT_FAIL if exc.is_semantic else EXIT_USAGE) from None


def _load_owl(path: str) -> ontology.Ontology:
    try:
        return export.parse_owl(_read_text(path))
    except export.OwlParseError as exc:
        raise CommandError(f"{path}:{exc.line}:{exc.column}: {exc.message}") from None


def _load_workspace(path: str) -> federation.FederationResult:
    try:
        return export.load_workspace(path)
    except export.WorkspaceError as exc:
        raise CommandError(str(exc)) from None


def cmd_validate(args) -> int:
    _load_model(args.model)
    return EXIT_OK


def cmd_analyze(args) -> int:
    model = _load_model(args.model)
    wants_any = args.count or args.list is not None or args.dead or args.core
    try:
        if args.count or not wants_any:
            _out(str(fm.count_configurations(model)))
        if args.list is not None:
            if args.list < 1:
                raise CommandError("--list needs a positive integer")
            result = fm.enumerate_configurations(model, args.list)
            for cfg in result:
                _out(",".join(sorted(cfg.selected)))
            if result.truncated:
                _err(f"(list truncated at {args.list} configurations)")
        if args.dead:
            _out(",".join(sorted(fm.dead_features(model))))
        if args.core:
            _out(",".join(sorted(fm.core_features(model))))
    except fm.FeatureModelError as exc:
        raise CommandError(str(exc), EXIT_FAIL) from None
    return EXIT_OK


def cmd_fm2onto(args) -> int:
    model = _load_model(args.model)
    try:
        onto = federation.fm_to_ontology(model, args.prefix)
    except ValueError as exc:
        raise CommandError(str(exc)) from None
    Path(args.output).write_text(export.to_owl(onto), encoding="utf-8", newline="\n")
    return EXIT_OK


def _format_hierarchy(h: ontology.Hierarchy) -> list[str]:
    lines: list[str] = []

    def show(node, depth):
        lines.append("  " * depth + " ≡ ".join(node))
        for child in sorted(h.children(node)):
            show(child, depth + 1)

    for root in h.roots():
        show(root, 0)
    lines.append("unsatisfiable:" + ("" if not h.unsatisfiable
                                     else " " + ", ".join(h.unsatisfiable)))
    return lines


def cmd_reason(args) -> int:
    onto = _load_owl(args.ontology)

    def cls(name: str) -> ontology.Named:
        if name not in onto.classes:
            raise CommandError(f"undeclared class {name!r}")
        return ontology.Named(name)

    if args.classify:
        for line in _format_hierarchy(ontology.classify(onto)):
            _out(line)
        return EXIT_OK
    if args.consistent:
        answer = ontology.is_consistent(onto)
    elif args.sat:
        answer = ontology.is_satisfiable(onto, cls(args.sat))
    else:
        sub, sup = args.subsumes
        answer = ontology.is_subsumed(onto, cls(sub), cls(sup))
    _out("true" if answer else "false")
    return EXIT_OK if answer else EXIT_FAIL


def _summary(result: federation.FederationResult) -> str:
    return (f"{len(result.federation.classes)} classes, {len(result.links)} links, "
            f"{len(result.warnings)} warnings")


def cmd_federate(args) -> int:
    ids = [i.strip() for i in args.ids.split(",")]
    if len(ids) != len(args.models):
        raise CommandError(f"--ids names {len(ids)} tools but {len(args.models)} models were given")
    models = [(tid, _load_model(path)) for tid, path in zip(ids, args.models)]
    synonyms = {}
    if args.synonyms:
        try:
            synonyms = federation.load_synonyms(args.synonyms)
        except (OSError, ValueError) as exc:
            raise CommandError(f"{args.synonyms}: {exc}") from None
    options = federation.FederationOptions(
        purpose=args.purpose, scope=args.scope, fuzzy=args.fuzzy,
        equivalence_on_exact=args.equivalence, synonyms=synonyms)
    try:
        result = federation.build_federation(models, options)
    except federation.FederationError as exc:
        raise CommandError(str(exc)) from None
    export.save_workspace_atomic(result, args.output)
    _out(_summary(result))
    return EXIT_OK


def _delta(before: federation.FederationResult, after: federation.FederationResult,
           sign: str) -> str:
    classes = abs(len(after.federation.classes) - len(before.federation.classes))
    links = abs(len(after.links) - len(before.links))
    return f"{sign}{classes} classes, {sign}{links} links"


def cmd_extend(args) -> int:
    before = _load_workspace(args.workspace)
    model = _load_model(args.model)
    try:
        after = federation.extend_federation(before, args.id, model)
    except federation.FederationError as exc:
        raise CommandError(str(exc)) from None
    export.save_workspace_atomic(after, args.workspace)
    _out(_delta(before, after, "+"))
    return EXIT_OK


def cmd_remove_tool(args) -> int:
    before = _load_workspace(args.workspace)
    try:
        after = federation.remove_tool(before, args.id)
    except federation.FederationError as exc:
        raise CommandError(str(exc)) from None
    export.save_workspace_atomic(after, args.workspace)
    _out(_delta(before, after, "-"))
    for w in after.warnings:
        if w not in before.warnings:
            _err(f"warning: {w.message}")
    return EXIT_OK


def cmd_export(args) -> int:
    result = _load_workspace(args.workspace)
    if args.docs:
        path, text = args.docs, export.to_docs(result)
    else:
        path, text = args.uml, export.to_uml(result)
    Path(path).write_text(text, encoding="utf-8", newline="\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fedont",
        description="Feature models, ontologies and ontology federation.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("validate", help="check a feature model")
    p.add_argument("model")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("analyze", help="count, list and inspect configurations")
    p.add_argument("model")
    p.add_argument("--count", action="store_true", help="print the number of configurations")
    p.add_argument("--list", type=int, metavar="N", help="print up to N configurations")
    p.add_argument("--dead", action="store_true", help="print dead features")
    p.add_argument("--core", action="store_true", help="print core features")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("fm2onto", help="map a feature model to an OWL ontology")
    p.add_argument("model")
    p.add_argument("--prefix", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_fm2onto)

    p = sub.add_parser("reason", help="query an ontology")
    p.add_argument("ontology")
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--consistent", action="store_true")
    q.add_argument("--sat", metavar="CLASS")
    q.add_argument("--subsumes", nargs=2, metavar=("SUB", "SUP"))
    q.add_argument("--classify", action="store_true")
    p.set_defaults(func=cmd_reason)

    p = sub.add_parser("federate", help="build a federation workspace")
    p.add_argument("models", nargs="+")
    p.add_argument("--ids", required=True, help="comma-separated tool ids, one per model")
    p.add_argument("-o", "--output", required=True, help="workspace directory")
    p.add_argument("--fuzzy", action="store_true", help="also match terms one edit apart")
    p.add_argument("--synonyms", help="synonym table (.syn.json)")
    p.add_argument("--purpose", default="")
    p.add_argument("--scope", default="")
    p.add_argument("--equivalence", action="store_true",
                   help="use equivalence links when raw names agree exactly")
    p.set_defaults(func=cmd_federate)

    p = sub.add_parser("extend", help="add a tool to a workspace")
    p.add_argument("workspace")
    p.add_argument("model")
    p.add_argument("--id", required=True)
    p.set_defaults(func=cmd_extend)

    p = sub.add_parser("remove-tool", help="remove a tool from a workspace")
    p.add_argument("workspace")
    p.add_argument("--id", required=True)
    p.set_defaults(func=cmd_remove_tool)

    p = sub.add_parser("export", help="write documentation or a class diagram")
    p.add_argument("workspace")
    q = p.add_mutually_exclusive_group(required=True)
    q.add_argument("--docs", metavar="OUT")
    q.add_argument("--uml", metavar="OUT")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except CommandError as exc:
        if str(exc):
            _err(f"fedont {args.command}: {exc}")
        return exc.code
    except OSError as exc:
        _err(f"fedont {args.command}: {exc}")
        return EXIT_USAGE


def run() -> None:
    if hasattr(sys.stdout, "reconfigure"):
        sys.stdout.reconfigure(encoding="utf-8")
    sys.exit(main())


if __name__ == "__main__":
    run()
