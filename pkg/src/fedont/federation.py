"""Tool ontologies from feature models, and the federation built over them.

The federation ontology holds one class per term shared by at least two
tools. Terms are matched on a normalised spelling (optionally with one-edit
fuzzy matching and a synonym table), grouped under their nearest shared
ancestor, and linked back to every tool class they came from.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .feature_model import (
    ChildKind,
    ConstraintKind,
    FeatureModel,
    GroupKind,
    check,
    normalize_name,
)
from .ontology import (
    Axiom,
    DisjointClasses,
    EquivalentClasses,
    Named,
    Ontology,
    SubClassOf,
    UnionOf,
    merge,
    qualified,
)

logger = logging.getLogger(__name__)

FED_PREFIX = "fed"
ROOT_CLASS = "Federation"
SHARED_GROUP = "shared"
MIN_SUPPORT = 2

_TOOL_ID = re.compile(r"[A-Za-z][A-Za-z0-9_-]*\Z")


class FederationError(ValueError):
    pass


class LinkKind(Enum):
    SUBSUMES = "subsumes"
    EQUIVALENT = "equivalent"


@dataclass(frozen=True)
class FederationLink:
    federation_class: str
    tool_id: str
    tool_class: str
    kind: LinkKind = LinkKind.SUBSUMES


@dataclass(frozen=True)
class Term:
    raw: str
    normalized: str
    path: tuple[str, ...]


@dataclass(frozen=True)
class TermTable:
    entries: tuple[Term, ...]

    def __iter__(self):
        return iter(self.entries)

    def __len__(self):
        return len(self.entries)

    def by_normalized(self) -> dict[str, Term]:
        """First term (canonical order) for each normalised spelling."""
        out: dict[str, Term] = {}
        for t in self.entries:
            out.setdefault(t.normalized, t)
        return out

    def by_raw(self) -> dict[str, Term]:
        return {t.raw: t for t in self.entries}


@dataclass(frozen=True)
class AffinityGroup:
    key: str
    members: tuple[str, ...]


@dataclass(frozen=True)
class Manifest:
    purpose: str = ""
    scope: str = ""
    tool_ids: tuple[str, ...] = ()


@dataclass(frozen=True)
class FederationWarning:
    message: str
    tools: tuple[str, ...] = ()


@dataclass(frozen=True)
class FederationOptions:
    purpose: str = ""
    scope: str = ""
    fuzzy: bool = False
    equivalence_on_exact: bool = False
    synonyms: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class FederationResult:
    federation: Ontology
    tools: dict[str, Ontology]
    links: tuple[FederationLink, ...]
    manifest: Manifest
    models: dict[str, FeatureModel]
    options: FederationOptions = FederationOptions()
    warnings: tuple[FederationWarning, ...] = ()

    def federation_classes(self) -> list[str]:
        """Qualified federation class names in declaration order."""
        return [f"{FED_PREFIX}:{c}" for c in self.federation.classes]

    def support(self, federation_class: str) -> list[str]:
        """Tool ids linked to ``federation_class``, in link order."""
        return list(dict.fromkeys(
            l.tool_id for l in self.links if l.federation_class == federation_class))

    def parent_of(self, name: str) -> str | None:
        for ax in self.federation.axioms:
            if isinstance(ax, SubClassOf) and ax.sub == Named(name):
                return ax.sup.name
        return None


# -- feature model -> ontology -----------------------------------------------

def fm_to_ontology(model: FeatureModel, prefix: str) -> Ontology:
    """Map a feature model to a class ontology; class ``F`` reads as "products
    containing feature F"."""
    check(model)
    axioms: list[Axiom] = []
    for f in model.features():
        parent = Named(f.name)
        for kind, child in f.children:
            axioms.append(SubClassOf(Named(child.name), parent))
            if kind is ChildKind.MANDATORY:
                axioms.append(SubClassOf(parent, Named(child.name)))
        for kind, members in f.groups:
            ms = tuple(Named(m.name) for m in members)
            axioms.extend(SubClassOf(m, parent) for m in ms)
            if kind is GroupKind.ALTERNATIVE:
                axioms.append(DisjointClasses(ms))
            axioms.append(SubClassOf(parent, UnionOf(ms)))
    for c in model.constraints:
        a, b = Named(c.source), Named(c.target)
        if c.kind is ConstraintKind.REQUIRES:
            axioms.append(SubClassOf(a, b))
        else:
            axioms.append(DisjointClasses((a, b)))
    return Ontology(prefix, tuple(model.feature_names()), tuple(axioms))


# -- terms ---------------------------------------------------------------------

def normalize_term(raw: str, synonyms: Mapping[str, str] | None = None) -> str:
    norm = normalize_name(raw)
    if synonyms:
        norm = synonyms.get(norm, norm)
    return norm


def load_synonyms(path: str | Path) -> dict[str, str]:
    """Read a ``.syn.json`` table; keys and values are re-normalised."""
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict) or not all(
            isinstance(k, str) and isinstance(v, str) for k, v in data.items()):
        raise FederationError(f"{path}: synonym table must map strings to strings")
    return {normalize_name(k): normalize_name(v) for k, v in data.items()}


def extract_terms(model: FeatureModel, synonyms: Mapping[str, str] | None = None) -> TermTable:
    check(model)
    parents = model.parents()
    entries = []
    for name in model.feature_names():
        path: list[str] = []
        cur = name
        while cur in parents:
            cur = parents[cur]
            path.append(cur)
        entries.append(Term(name, normalize_term(name, synonyms), tuple(reversed(path))))
    return TermTable(tuple(entries))


def edit_distance(a: str, b: str) -> int:
    """Levenshtein distance (unit-cost insert, delete, substitute)."""
    if len(a) < len(b):
        a, b = b, a
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _fuzzy_pairs(left: Iterable[str], right: Iterable[str]) -> list[tuple[str, str]]:
    """Greedy one-to-one pairing at edit distance 1, smallest pair first."""
    cands = sorted(
        ((min(x, y), max(x, y)), x, y)
        for x in left for y in right if edit_distance(x, y) == 1)
    used_l: set[str] = set()
    used_r: set[str] = set()
    out = []
    for _, x, y in cands:
        if x not in used_l and y not in used_r:
            used_l.add(x)
            used_r.add(y)
            out.append((x, y))
    return out


def common_terms(a: TermTable, b: TermTable, fuzzy: bool = False) -> list[tuple[str, str, str]]:
    """Shared terms as ``(normalized, raw_in_a, raw_in_b)``, sorted.

    Fuzzy pairs are keyed by the smaller of the two spellings.
    """
    ta, tb = a.by_normalized(), b.by_normalized()
    out = [(n, ta[n].raw, tb[n].raw) for n in ta if n in tb]
    if fuzzy:
        rest_a = [n for n in ta if n not in tb]
        rest_b = [n for n in tb if n not in ta]
        for x, y in _fuzzy_pairs(rest_a, rest_b):
            out.append((min(x, y), ta[x].raw, tb[y].raw))
    return sorted(out)


def _nearest_common_ancestor(term: Term, raw_to_key: Mapping[str, str], key: str) -> str | None:
    for anc in reversed(term.path):
        k = raw_to_key.get(anc)
        if k is not None and k != key:
            return k
    return None


def _place(key: str, supporters: Sequence[str], tables: Mapping[str, TermTable],
           raw_to_key: Mapping[str, Mapping[str, str]],
           key_to_raw: Mapping[str, Mapping[str, str]]) -> tuple[str | None, bool]:
    """Group key for ``key`` and whether the supporting tools disagreed."""
    votes = set()
    for tool in supporters:
        term = tables[tool].by_raw()[key_to_raw[tool][key]]
        votes.add(_nearest_common_ancestor(term, raw_to_key[tool], key))
    if len(votes) == 1:
        return votes.pop(), False
    return None, True


def _group(keys: Iterable[str], parent_of: Mapping[str, str | None]) -> list[AffinityGroup]:
    groups: dict[str, list[str]] = {}
    for k in keys:
        groups.setdefault(parent_of[k] or SHARED_GROUP, []).append(k)
    return [AffinityGroup(g, tuple(sorted(ms))) for g, ms in sorted(groups.items())]


def build_affinity(matches: Sequence[tuple[str, str, str]], a: TermTable, b: TermTable,
                   warnings: list[str] | None = None) -> list[AffinityGroup]:
    """Group common terms under their nearest common ancestor.

    A term whose models disagree on that ancestor falls back to the ``shared``
    group and a warning is appended to ``warnings``.
    """
    tables = {"a": a, "b": b}
    key_to_raw = {"a": {n: ra for n, ra, _ in matches}, "b": {n: rb for n, _, rb in matches}}
    raw_to_key = {t: {r: k for k, r in m.items()} for t, m in key_to_raw.items()}
    parent_of = {}
    for n, _, _ in matches:
        parent, conflict = _place(n, ["a", "b"], tables, raw_to_key, key_to_raw)
        parent_of[n] = parent
        if conflict and warnings is not None:
            warnings.append(f"models disagree on the grouping of {n!r}; placed in {SHARED_GROUP!r}")
    return _group(parent_of, parent_of)


# -- federation ----------------------------------------------------------------

def class_name(key: str) -> str:
    name = key[:1].upper() + key[1:]
    return name + "_" if name == ROOT_CLASS else name


def _check_tool_id(tool_id: str) -> None:
    if not _TOOL_ID.match(tool_id) or tool_id == FED_PREFIX:
        raise FederationError(f"invalid tool id {tool_id!r}")


def _match_tools(tables: Mapping[str, TermTable], fuzzy: bool) -> dict[str, dict[str, str]]:
    """Assign every term a cross-tool key; return tool -> {key: raw}.

    Exact matches share their normalised spelling. Fuzzy pairs found between
    any two tools are merged, the component keyed by its smallest spelling.
    """
    parent: dict[str, str] = {}

    def find(x: str) -> str:
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    if fuzzy:
        tools = list(tables)
        for i, ti in enumerate(tools):
            for tj in tools[i + 1:]:
                for n, ra, rb in common_terms(tables[ti], tables[tj], fuzzy=True):
                    na = tables[ti].by_raw()[ra].normalized
                    nb = tables[tj].by_raw()[rb].normalized
                    x, y = find(na), find(nb)
                    if x != y:
                        parent[max(x, y)] = min(x, y)
    out: dict[str, dict[str, str]] = {}
    for tool, table in tables.items():
        m: dict[str, str] = {}
        for term in table:
            m.setdefault(find(term.normalized), term.raw)
        out[tool] = m
    return out


def build_federation(models: Sequence[tuple[str, FeatureModel]],
                     options: FederationOptions | None = None) -> FederationResult:
    options = options or FederationOptions()
    if len(models) < 2:
        raise FederationError("a federation needs at least 2 models")
    ids = [tid for tid, _ in models]
    if len(set(ids)) != len(ids):
        raise FederationError(f"duplicate tool id in {ids}")
    for tid in ids:
        _check_tool_id(tid)

    model_map = dict(models)
    tools = {tid: fm_to_ontology(m, tid) for tid, m in models}
    tables = {tid: extract_terms(m, options.synonyms) for tid, m in models}
    key_to_raw = _match_tools(tables, options.fuzzy)
    support: dict[str, list[str]] = {}
    for tid in ids:
        for k in key_to_raw[tid]:
            support.setdefault(k, []).append(tid)
    common = {k for k, ts in support.items() if len(ts) >= MIN_SUPPORT}
    key_to_raw = {t: {k: r for k, r in m.items() if k in common} for t, m in key_to_raw.items()}
    raw_to_key = {t: {r: k for k, r in m.items()} for t, m in key_to_raw.items()}

    warnings: list[FederationWarning] = []
    parent_of: dict[str, str | None] = {}
    for k in sorted(common):
        parent, conflict = _place(k, support[k], tables, raw_to_key, key_to_raw)
        parent_of[k] = parent
        if conflict:
            warnings.append(FederationWarning(
                f"tools disagree on the grouping of {k!r}; placed under {ROOT_CLASS}",
                tuple(support[k])))

    groups = {g.key: g.members for g in _group(common, parent_of)}
    order: list[str] = []

    def visit(group_key: str) -> None:
        for member in groups.get(group_key, ()):
            order.append(member)
            visit(member)

    visit(SHARED_GROUP)

    classes = [ROOT_CLASS] + [class_name(k) for k in order]
    axioms = [SubClassOf(Named(class_name(k)),
                         Named(class_name(parent_of[k]) if parent_of[k] else ROOT_CLASS))
              for k in order]
    federation = Ontology(FED_PREFIX, tuple(classes), tuple(axioms))

    links = []
    for k in order:
        raws = [key_to_raw[t][k] for t in support[k]]
        kind = (LinkKind.EQUIVALENT if options.equivalence_on_exact and len(set(raws)) == 1
                else LinkKind.SUBSUMES)
        for t in support[k]:
            links.append(FederationLink(f"{FED_PREFIX}:{class_name(k)}", t,
                                        f"{t}:{key_to_raw[t][k]}", kind))

    for w in warnings:
        logger.info(w.message)
    manifest = Manifest(options.purpose, options.scope, tuple(ids))
    return FederationResult(federation, tools, tuple(links), manifest, model_map,
                            options, tuple(warnings))


def _local(qualified_name: str) -> str:
    return qualified_name.split(":", 1)[1]


def extend_federation(fed: FederationResult, tool_id: str,
                      model: FeatureModel) -> FederationResult:
    """Add a tool without rebuilding: existing classes and links are kept
    verbatim, new links and classes are appended."""
    _check_tool_id(tool_id)
    if tool_id in fed.tools:
        raise FederationError(f"tool id {tool_id!r} already present")
    opts = fed.options
    new_table = extract_terms(model, opts.synonyms)
    new_terms = new_table.by_normalized()
    tables = {t: extract_terms(m, opts.synonyms) for t, m in fed.models.items()}

    # tool -> {raw: federation class local name}, from the existing links
    linked: dict[str, dict[str, str]] = {t: {} for t in fed.tools}
    for l in fed.links:
        linked[l.tool_id][_local(l.tool_class)] = _local(l.federation_class)

    # (i) the new tool against existing federation classes
    spellings: dict[str, set[str]] = {}
    for t, raws in linked.items():
        by_raw = tables[t].by_raw()
        for raw, cls in raws.items():
            spellings.setdefault(cls, set()).add(by_raw[raw].normalized)
    new_linked: dict[str, str] = {}  # raw in new tool -> class
    used: set[str] = set()
    existing = [c for c in fed.federation.classes if c != ROOT_CLASS]
    for cls in existing:
        hit = sorted(n for n in spellings.get(cls, ()) if n in new_terms and n not in used)
        if hit:
            used.add(hit[0])
            new_linked[new_terms[hit[0]].raw] = cls
    if opts.fuzzy:
        pending = [c for c in existing if c not in new_linked.values()]
        for cls in pending:
            cands = sorted(
                (s, n) for s in spellings.get(cls, ()) for n in new_terms
                if n not in used and edit_distance(s, n) == 1)
            if cands:
                n = cands[0][1]
                used.add(n)
                new_linked[new_terms[n].raw] = cls

    added_links: list[FederationLink] = []
    for cls in existing:
        raw = next((r for r, c in new_linked.items() if c == cls), None)
        if raw is None:
            continue
        prior = [l for l in fed.links if _local(l.federation_class) == cls]
        same = all(_local(l.tool_class) == raw for l in prior)
        kind = (LinkKind.EQUIVALENT if opts.equivalence_on_exact and same
                else LinkKind.SUBSUMES)
        added_links.append(FederationLink(f"{FED_PREFIX}:{cls}", tool_id, f"{tool_id}:{raw}", kind))

    # (ii) remaining new terms against the unlinked terms of every existing tool
    rest_new = TermTable(tuple(t for t in new_table if t.raw not in new_linked))
    new_key_raws: dict[str, dict[str, str]] = {}  # key -> {tool: raw}
    for t in fed.tools:
        rest_old = TermTable(tuple(x for x in tables[t] if x.raw not in linked[t]))
        for n, r_new, r_old in common_terms(rest_new, rest_old, opts.fuzzy):
            key = next((k for k, m in new_key_raws.items() if m.get(tool_id) == r_new), n)
            new_key_raws.setdefault(key, {tool_id: r_new})[t] = r_old

    # Warnings without tools only report a shortage of tools.
    enough = len(fed.tools) + 1 >= MIN_SUPPORT
    warnings = [w for w in fed.warnings if w.tools or not enough]
    taken = set(fed.federation.classes)
    for key in sorted(new_key_raws):
        if class_name(key) in taken:
            warnings.append(FederationWarning(
                f"term {key!r} collides with an existing federation class; skipped", (tool_id,)))
            del new_key_raws[key]

    all_tools = list(fed.tools) + [tool_id]
    all_tables = dict(tables)
    all_tables[tool_id] = new_table
    raw_to_cls: dict[str, dict[str, str]] = {t: dict(linked[t]) for t in fed.tools}
    raw_to_cls[tool_id] = dict(new_linked)
    for key, raws in new_key_raws.items():
        for t, r in raws.items():
            raw_to_cls[t][r] = class_name(key)

    parent_of: dict[str, str | None] = {}
    for key in sorted(new_key_raws):
        cls = class_name(key)
        supporters = [t for t in all_tools if t in new_key_raws[key]]
        votes = set()
        for t in supporters:
            term = all_tables[t].by_raw()[new_key_raws[key][t]]
            votes.add(_nearest_common_ancestor(term, raw_to_cls[t], cls))
        if len(votes) > 1:
            warnings.append(FederationWarning(
                f"tools disagree on the grouping of {key!r}; placed under {ROOT_CLASS}",
                tuple(supporters)))
        parent_of[key] = votes.pop() if len(votes) == 1 else None

    # Same layout as a fresh build: parents before children, siblings sorted.
    by_class = {class_name(k): k for k in new_key_raws}
    children: dict[str | None, list[str]] = {}
    for key in sorted(new_key_raws):
        p = parent_of[key]
        children.setdefault(by_class.get(p) if p in by_class else None, []).append(key)
    order: list[str] = []

    def visit(key: str | None) -> None:
        for k in children.get(key, ()):
            order.append(k)
            visit(k)

    visit(None)

    new_axioms: list[Axiom] = []
    new_classes: list[str] = []
    for key in order:
        cls = class_name(key)
        supporters = [t for t in all_tools if t in new_key_raws[key]]
        new_classes.append(cls)
        new_axioms.append(SubClassOf(Named(cls), Named(parent_of[key] or ROOT_CLASS)))
        raws = [new_key_raws[key][t] for t in supporters]
        kind = (LinkKind.EQUIVALENT if opts.equivalence_on_exact and len(set(raws)) == 1
                else LinkKind.SUBSUMES)
        for t in supporters:
            added_links.append(FederationLink(
                f"{FED_PREFIX}:{cls}", t, f"{t}:{new_key_raws[key][t]}", kind))

    federation = Ontology(FED_PREFIX, fed.federation.classes + tuple(new_classes),
                          fed.federation.axioms + tuple(new_axioms))
    tools = dict(fed.tools)
    tools[tool_id] = fm_to_ontology(model, tool_id)
    models = dict(fed.models)
    models[tool_id] = model
    manifest = replace(fed.manifest, tool_ids=fed.manifest.tool_ids + (tool_id,))
    return replace(fed, federation=federation, tools=tools, links=fed.links + tuple(added_links),
                   manifest=manifest, models=models, warnings=tuple(warnings))


def remove_tool(fed: FederationResult, tool_id: str) -> FederationResult:
    """Drop a tool, its links, and every federation class left with fewer
    than two supporting tools (their children move under the root)."""
    if tool_id not in fed.tools:
        raise FederationError(f"unknown tool id {tool_id!r}")
    links = [l for l in fed.links if l.tool_id != tool_id]
    support: dict[str, set[str]] = {}
    for l in links:
        support.setdefault(_local(l.federation_class), set()).add(l.tool_id)
    dropped = {c for c in fed.federation.classes
               if c != ROOT_CLASS and len(support.get(c, ())) < MIN_SUPPORT}
    links = [l for l in links if _local(l.federation_class) not in dropped]
    axioms: list[Axiom] = []
    for ax in fed.federation.axioms:
        if isinstance(ax, SubClassOf) and isinstance(ax.sub, Named) and ax.sub.name in dropped:
            continue
        if isinstance(ax, SubClassOf) and isinstance(ax.sup, Named) and ax.sup.name in dropped:
            ax = SubClassOf(ax.sub, Named(ROOT_CLASS))
        axioms.append(ax)
    federation = Ontology(FED_PREFIX, tuple(c for c in fed.federation.classes if c not in dropped),
                          tuple(axioms))
    tools = {t: o for t, o in fed.tools.items() if t != tool_id}
    models = {t: m for t, m in fed.models.items() if t != tool_id}
    warnings = [w for w in fed.warnings if tool_id not in w.tools]
    if len(tools) < MIN_SUPPORT:
        msg = f"only {len(tools)} tool(s) remain after removing {tool_id!r}"
        logger.info(msg)
        warnings.append(FederationWarning(msg))
    manifest = replace(fed.manifest, tool_ids=tuple(t for t in fed.manifest.tool_ids
                                                    if t != tool_id))
    return replace(fed, federation=federation, tools=tools, links=tuple(links),
                   manifest=manifest, models=models, warnings=tuple(warnings))


def federated_ontology(fed: FederationResult) -> Ontology:
    """Federation and tool ontologies merged under qualified names, with each
    link asserted as an axiom."""
    merged = qualified(fed.federation)
    for onto in fed.tools.values():
        merged = merge(merged, onto, qualify=True)
    link_axioms = []
    for l in fed.links:
        a, b = Named(l.tool_class), Named(l.federation_class)
        link_axioms.append(SubClassOf(a, b) if l.kind is LinkKind.SUBSUMES
                           else EquivalentClasses((a, b)))
    return Ontology(merged.iri_prefix, merged.classes, merged.axioms + tuple(link_axioms))
