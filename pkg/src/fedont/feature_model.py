"""Feature models, their configuration semantics and anomaly analysis.

A feature model is a tree of features. Each feature owns solitary children
(mandatory or optional) and groups of children (alternative: exactly one
member, or: at least one member). Cross-tree constraints add ``requires`` and
``excludes`` edges. A configuration is the set of selected feature names.

Three independent views of validity live here:

* :func:`is_valid_configuration` checks the relation rules directly;
* :func:`to_formula` builds the propositional encoding;
* :func:`enumerate_configurations` / :func:`count_configurations` use a
  dynamic program over the tree, conditioned on constraint variables.
"""
from __future__ import annotations

import itertools
import os
import re
from dataclasses import dataclass, field, replace
from functools import cached_property
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .logic import Iff, Implies, Not, PropFormula, Var, conj, disj

DEFAULT_FEATURE_BUDGET = 30
BUDGET_ENV = "FEDONT_FEATURE_BUDGET"

KEYWORDS = frozenset(
    {"model", "feature", "mandatory", "optional", "or", "alternative", "group",
     "constraint", "requires", "excludes"}
)
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")


class FeatureModelError(ValueError):
    pass


class ChildKind(Enum):
    MANDATORY = "mandatory"
    OPTIONAL = "optional"


class GroupKind(Enum):
    ALTERNATIVE = "alternative"
    OR = "or"


class ConstraintKind(Enum):
    REQUIRES = "requires"
    EXCLUDES = "excludes"


@dataclass(frozen=True)
class Feature:
    name: str
    children: tuple[tuple[ChildKind, "Feature"], ...] = ()
    groups: tuple[tuple[GroupKind, tuple["Feature", ...]], ...] = ()

    def direct_children(self) -> Iterator["Feature"]:
        """Children in canonical order: solitary children, then group members."""
        for _, child in self.children:
            yield child
        for _, members in self.groups:
            yield from members


@dataclass(frozen=True)
class CrossTreeConstraint:
    kind: ConstraintKind
    source: str
    target: str


def _constraint_key(c: CrossTreeConstraint) -> tuple[str, str, str]:
    return c.kind.value, c.source, c.target


@dataclass(frozen=True)
class FeatureModel:
    name: str
    root: Feature
    constraints: tuple[CrossTreeConstraint, ...] = ()

    @cached_property
    def _preorder(self) -> tuple[Feature, ...]:
        return tuple(_walk_all(self.root))

    @cached_property
    def _errors(self) -> tuple[Diagnostic, ...]:
        return tuple(d for d in validate(self) if d.severity is Severity.ERROR)

    def canonical(self) -> "FeatureModel":
        """Same model with constraints sorted by (kind, source, target)."""
        ordered = tuple(sorted(self.constraints, key=_constraint_key))
        return replace(self, constraints=ordered)

    def features(self) -> list[Feature]:
        """All features in canonical (preorder) order."""
        return list(self._preorder)

    def feature_names(self) -> list[str]:
        return [f.name for f in self._preorder]

    def parents(self) -> dict[str, str]:
        return {c.name: f.name for f in self.features() for c in f.direct_children()}

    def path(self, name: str) -> list[str]:
        """Ancestor names of ``name`` from the root down (excluding ``name``)."""
        parents = self.parents()
        out: list[str] = []
        while name in parents:
            name = parents[name]
            out.append(name)
        return out[::-1]


@dataclass(frozen=True)
class Configuration:
    selected: frozenset[str] = field(default_factory=frozenset)

    def __iter__(self):
        return iter(self.selected)

    def __len__(self):
        return len(self.selected)

    def __contains__(self, name):
        return name in self.selected


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    message: str
    name: str | None = None


def normalize_name(name: str) -> str:
    return name.lower().replace("_", "").replace("-", "").replace(" ", "")


def validate(model: FeatureModel) -> list[Diagnostic]:
    diags: list[Diagnostic] = []

    def error(msg: str, name: str | None) -> None:
        diags.append(Diagnostic(Severity.ERROR, msg, name))

    seen: dict[str, str] = {}
    reported: set[str] = set()
    for f in _walk_all(model.root):
        if not _IDENT.match(f.name) or f.name in KEYWORDS:
            error(f"invalid feature name {f.name!r}", f.name)
        key = normalize_name(f.name)
        if key in seen and key not in reported:
            reported.add(key)
            if seen[key] == f.name:
                error(f"duplicate feature name {f.name!r}", f.name)
            else:
                error(f"feature names {seen[key]!r} and {f.name!r} collide "
                      "after normalization", f.name)
        seen.setdefault(key, f.name)
        for kind, members in f.groups:
            if len(members) < 2:
                error(f"{kind.value} group under {f.name!r}: group arity < 2", f.name)

    names = {f.name for f in _walk_all(model.root)}
    for c in model.constraints:
        for end in (c.source, c.target):
            if end not in names:
                error(f"constraint references unknown feature {end!r}", end)
        if c.source == c.target:
            error(f"constraint relates {c.source!r} to itself", c.source)
    return diags


def _walk_all(root: Feature) -> Iterator[Feature]:
    # Unlike FeatureModel.features, tolerates malformed (e.g. shared) nodes.
    stack = [root]
    while stack:
        f = stack.pop()
        yield f
        stack.extend(reversed(list(f.direct_children())))


def check(model: FeatureModel) -> None:
    errors = model._errors
    if errors:
        raise FeatureModelError("; ".join(d.message for d in errors))


def to_formula(model: FeatureModel) -> PropFormula:
    check(model)
    parts: list[PropFormula] = [Var(model.root.name)]
    for f in model.features():
        p = Var(f.name)
        for kind, child in f.children:
            c = Var(child.name)
            parts.append(Iff(p, c) if kind is ChildKind.MANDATORY else Implies(c, p))
        for kind, members in f.groups:
            ms = [Var(m.name) for m in members]
            parts.extend(Implies(m, p) for m in ms)
            parts.append(Implies(p, disj(ms)))
            if kind is GroupKind.ALTERNATIVE:
                for a, b in itertools.combinations(ms, 2):
                    parts.append(Not(conj([a, b])))
    for c in model.constraints:
        a, b = Var(c.source), Var(c.target)
        if c.kind is ConstraintKind.REQUIRES:
            parts.append(Implies(a, b))
        else:
            parts.append(Not(conj([a, b])))
    return conj(parts)


def is_valid_configuration(model: FeatureModel, config: Configuration | Iterable[str]) -> bool:
    """Check ``config`` against the relation rules, without any encoding."""
    check(model)
    selected = set(config)
    unknown = selected.difference(f.name for f in model._preorder)
    if unknown:
        raise FeatureModelError(f"unknown feature(s) in configuration: {sorted(unknown)}")
    if model.root.name not in selected:
        return False
    for f in model.features():
        on = f.name in selected
        for kind, child in f.children:
            if child.name in selected and not on:
                return False
            if kind is ChildKind.MANDATORY and on and child.name not in selected:
                return False
        for kind, members in f.groups:
            picked = sum(m.name in selected for m in members)
            if picked and not on:
                return False
            if on and picked == 0:
                return False
            if on and kind is GroupKind.ALTERNATIVE and picked > 1:
                return False
    for c in model.constraints:
        if c.kind is ConstraintKind.REQUIRES:
            if c.source in selected and c.target not in selected:
                return False
        elif c.source in selected and c.target in selected:
            return False
    return True


# -- counting and enumeration ------------------------------------------------
#
# Polynomials are coefficient lists indexed by configuration size.

def _padd(a: list[int], b: list[int]) -> list[int]:
    if len(a) < len(b):
        a, b = b, a
    out = list(a)
    for i, x in enumerate(b):
        out[i] += x
    return out


def _psub(a: list[int], b: list[int]) -> list[int]:
    return _padd(a, [-x for x in b])


def _pmul(a: list[int], b: list[int]) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _size_polynomial(model: FeatureModel, forced: Mapping[str, bool]) -> list[int]:
    """Configurations consistent with ``forced``, counted by size."""
    constraint_vars = sorted({n for c in model.constraints for n in (c.source, c.target)})
    free = [v for v in constraint_vars if v not in forced]
    total: list[int] = []
    for bits in itertools.product((False, True), repeat=len(free)):
        assign = dict(forced)
        assign.update(zip(free, bits))
        if not all(_constraint_holds(c, assign) for c in model.constraints):
            continue
        total = _padd(total, _tree_polynomial(model.root, assign)[0])
    return total


def _constraint_holds(c: CrossTreeConstraint, assign: Mapping[str, bool]) -> bool:
    a, b = assign[c.source], assign[c.target]
    if c.kind is ConstraintKind.REQUIRES:
        return not a or b
    return not (a and b)


def _tree_polynomial(f: Feature, forced: Mapping[str, bool]) -> tuple[list[int], list[int]]:
    """Return (selected, deselected) polynomials for the subtree rooted at ``f``.

    ``selected`` counts sub-configurations with ``f`` chosen; ``deselected`` is
    ``[1]`` when the whole subtree may be left out, ``[]`` otherwise.
    """
    state = forced.get(f.name)
    sel: list[int] = [0, 1] if state is not False else []
    desel_ok = state is not True
    for kind, child in f.children:
        cs, cd = _tree_polynomial(child, forced)
        desel_ok = desel_ok and bool(cd)
        sel = _pmul(sel, cs if kind is ChildKind.MANDATORY else _padd(cs, cd))
    for kind, members in f.groups:
        polys = [_tree_polynomial(m, forced) for m in members]
        desel_ok = desel_ok and all(d for _, d in polys)
        if kind is GroupKind.ALTERNATIVE:
            g: list[int] = []
            for i, (ms, _) in enumerate(polys):
                term = ms
                for j, (_, md) in enumerate(polys):
                    if j != i:
                        term = _pmul(term, md)
                g = _padd(g, term)
        else:
            any_poly: list[int] = [1]
            none_poly: list[int] = [1]
            for ms, md in polys:
                any_poly = _pmul(any_poly, _padd(ms, md))
                none_poly = _pmul(none_poly, md)
            g = _psub(any_poly, none_poly)
        sel = _pmul(sel, g)
    return sel, ([1] if desel_ok else [])


def feature_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_FEATURE_BUDGET
    try:
        value = int(raw)
    except ValueError:
        raise FeatureModelError(f"{BUDGET_ENV} must be an integer, got {raw!r}") from None
    if value < 1:
        raise FeatureModelError(f"{BUDGET_ENV} must be positive, got {value}")
    return value


def count_configurations(model: FeatureModel, budget: int | None = None) -> int:
    check(model)
    budget = feature_budget() if budget is None else budget
    n = len(model.feature_names())
    if n > budget:
        raise FeatureModelError(
            f"model has {n} features, above the counting budget of {budget}")
    return sum(_size_polynomial(model, {}))


@dataclass(frozen=True)
class Enumeration:
    configurations: tuple[Configuration, ...]
    truncated: bool

    def __iter__(self):
        return iter(self.configurations)

    def __len__(self):
        return len(self.configurations)

    def __getitem__(self, i):
        return self.configurations[i]


def iter_configurations(model: FeatureModel) -> Iterator[Configuration]:
    """Yield valid configurations ordered by size, then lexicographically by
    canonical feature positions."""
    check(model)
    order = model.feature_names()
    sizes = _size_polynomial(model, {})
    for k, count in enumerate(sizes):
        if count:
            yield from _lex_configs(model, order, k, {}, 0, [])


def _lex_configs(model, order, k, forced, start, chosen) -> Iterator[Configuration]:
    if len(chosen) == k:
        yield Configuration(frozenset(chosen))
        return
    prefix = dict(forced)
    for i in range(start, len(order)):
        trial = dict(prefix)
        trial[order[i]] = True
        poly = _size_polynomial(model, trial)
        if len(poly) > k and poly[k]:
            yield from _lex_configs(model, order, k, trial, i + 1, chosen + [order[i]])
        prefix[order[i]] = False
        poly = _size_polynomial(model, prefix)
        if len(poly) <= k or not poly[k]:
            return


def enumerate_configurations(model: FeatureModel, limit: int | None = None) -> Enumeration:
    if limit is not None and limit < 1:
        raise ValueError("limit must be positive")
    configs: list[Configuration] = []
    truncated = False
    for cfg in iter_configurations(model):
        if limit is not None and len(configs) == limit:
            truncated = True
            break
        configs.append(cfg)
    return Enumeration(tuple(configs), truncated)


def dead_features(model: FeatureModel) -> set[str]:
    check(model)
    return {n for n in model.feature_names() if not sum(_size_polynomial(model, {n: True}))}


def core_features(model: FeatureModel) -> set[str]:
    check(model)
    if not sum(_size_polynomial(model, {})):
        raise FeatureModelError("no valid configurations")
    return {n for n in model.feature_names() if not sum(_size_polynomial(model, {n: False}))}


# -- programmatic construction helpers ---------------------------------------

def mandatory(name: str, *items) -> tuple[ChildKind, Feature]:
    return ChildKind.MANDATORY, feature(name, *items)


def optional(name: str, *items) -> tuple[ChildKind, Feature]:
    return ChildKind.OPTIONAL, feature(name, *items)


def alternative(*members: Feature | str) -> tuple[GroupKind, tuple[Feature, ...]]:
    return GroupKind.ALTERNATIVE, tuple(_as_feature(m) for m in members)


def or_group(*members: Feature | str) -> tuple[GroupKind, tuple[Feature, ...]]:
    return GroupKind.OR, tuple(_as_feature(m) for m in members)


def requires(a: str, b: str) -> CrossTreeConstraint:
    return CrossTreeConstraint(ConstraintKind.REQUIRES, a, b)


def excludes(a: str, b: str) -> CrossTreeConstraint:
    return CrossTreeConstraint(ConstraintKind.EXCLUDES, a, b)


def feature(name: str, *items) -> Feature:
    """Build a feature from ``mandatory``/``optional``/group items."""
    children = tuple(i for i in items if isinstance(i[0], ChildKind))
    groups = tuple(i for i in items if isinstance(i[0], GroupKind))
    return Feature(name, children, groups)


def _as_feature(m: Feature | str) -> Feature:
    return m if isinstance(m, Feature) else Feature(m)
