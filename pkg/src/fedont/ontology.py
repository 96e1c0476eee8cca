"""Class-expression ontologies over the propositionally closed fragment and
the reasoner services built on them.

Classes are read as sets of products (individuals). Without roles or
individuals, a single individual's membership pattern is a truth assignment
over the declared names, so every reasoning task reduces to propositional
satisfiability. Two backends decide it:

``"search"``
    Tseitin-encoded CNF handed to the DPLL solver in :mod:`fedont.logic`.
``"truth-table"``
    Exhaustive evaluation over all 2**n assignments, vectorised by packing one
    assignment per bit of a Python integer. Limited to 20 names.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator, Union

from . import logic

TRUTH_TABLE_LIMIT = 20


class OntologyError(ValueError):
    pass


@dataclass(frozen=True)
class Named:
    name: str


@dataclass(frozen=True)
class _Thing:
    def __repr__(self) -> str:
        return "Thing"


@dataclass(frozen=True)
class _Nothing:
    def __repr__(self) -> str:
        return "Nothing"


Thing = _Thing()
Nothing = _Nothing()


@dataclass(frozen=True)
class IntersectionOf:
    operands: tuple["ClassExpr", ...]

    def __post_init__(self):
        _check_arity(self, self.operands)


@dataclass(frozen=True)
class UnionOf:
    operands: tuple["ClassExpr", ...]

    def __post_init__(self):
        _check_arity(self, self.operands)


@dataclass(frozen=True)
class ComplementOf:
    operand: "ClassExpr"


ClassExpr = Union[Named, _Thing, _Nothing, IntersectionOf, UnionOf, ComplementOf]


@dataclass(frozen=True)
class SubClassOf:
    sub: ClassExpr
    sup: ClassExpr


@dataclass(frozen=True)
class EquivalentClasses:
    operands: tuple[ClassExpr, ...]

    def __post_init__(self):
        _check_arity(self, self.operands)


@dataclass(frozen=True)
class DisjointClasses:
    operands: tuple[ClassExpr, ...]

    def __post_init__(self):
        _check_arity(self, self.operands)


Axiom = Union[SubClassOf, EquivalentClasses, DisjointClasses]


def _check_arity(obj, operands) -> None:
    if not isinstance(operands, tuple):
        object.__setattr__(obj, "operands", tuple(operands))
        operands = obj.operands
    if len(operands) < 2:
        raise OntologyError(f"{type(obj).__name__} needs at least 2 operands")


def names_in(expr: ClassExpr) -> Iterator[str]:
    if isinstance(expr, Named):
        yield expr.name
    elif isinstance(expr, (IntersectionOf, UnionOf)):
        for op in expr.operands:
            yield from names_in(op)
    elif isinstance(expr, ComplementOf):
        yield from names_in(expr.operand)


def axiom_operands(ax: Axiom) -> tuple[ClassExpr, ...]:
    if isinstance(ax, SubClassOf):
        return (ax.sub, ax.sup)
    return ax.operands


@dataclass(frozen=True)
class Ontology:
    iri_prefix: str
    classes: tuple[str, ...] = ()
    axioms: tuple[Axiom, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(self.classes))
        object.__setattr__(self, "axioms", tuple(self.axioms))
        if len(set(self.classes)) != len(self.classes):
            dup = next(c for c in self.classes if self.classes.count(c) > 1)
            raise OntologyError(f"class {dup!r} declared twice")
        declared = set(self.classes)
        for ax in self.axioms:
            for op in axiom_operands(ax):
                self.check_expr(op, declared)

    def check_expr(self, expr: ClassExpr, declared: set[str] | None = None) -> None:
        declared = set(self.classes) if declared is None else declared
        for name in names_in(expr):
            if name not in declared:
                raise OntologyError(f"undeclared class {name!r}")


def class_expr_formula(expr: ClassExpr) -> logic.PropFormula:
    if isinstance(expr, Named):
        return logic.Var(expr.name)
    if isinstance(expr, _Thing):
        return logic.TRUE
    if isinstance(expr, _Nothing):
        return logic.FALSE
    if isinstance(expr, IntersectionOf):
        return logic.And(tuple(class_expr_formula(o) for o in expr.operands))
    if isinstance(expr, UnionOf):
        return logic.Or(tuple(class_expr_formula(o) for o in expr.operands))
    if isinstance(expr, ComplementOf):
        return logic.Not(class_expr_formula(expr.operand))
    raise TypeError(f"not a class expression: {expr!r}")


def axiom_formula(ax: Axiom) -> logic.PropFormula:
    if isinstance(ax, SubClassOf):
        return logic.Implies(class_expr_formula(ax.sub), class_expr_formula(ax.sup))
    fs = [class_expr_formula(o) for o in ax.operands]
    if isinstance(ax, EquivalentClasses):
        return logic.conj(logic.Iff(a, b) for a, b in itertools.combinations(fs, 2))
    return logic.conj(logic.Not(logic.And((a, b))) for a, b in itertools.combinations(fs, 2))


def ontology_formula(onto: Ontology) -> logic.PropFormula:
    return logic.conj(axiom_formula(ax) for ax in onto.axioms)


# -- backends ----------------------------------------------------------------

class SearchBackend:
    def __init__(self, onto: Ontology):
        self.onto = onto
        builder = logic.CNFBuilder(onto.classes)
        for ax in onto.axioms:
            builder.assert_formula(axiom_formula(ax))
        self._builder = builder
        self._solver = logic.Solver(builder.num_vars, builder.clauses)

    def model(self, expr: ClassExpr) -> dict[str, bool] | None:
        """A witness assignment making ``expr`` true, or None."""
        lits = self._literals(expr)
        if lits is not None:
            sol = self._solver.solve(lits)
        else:
            builder = logic.CNFBuilder()
            builder.var_ids = dict(self._builder.var_ids)
            builder.num_vars = self._builder.num_vars
            builder.clauses = list(self._builder.clauses)
            builder.assert_formula(class_expr_formula(expr))
            sol = logic.Solver(builder.num_vars, builder.clauses).solve()
        if sol is None:
            return None
        return {name: sol[self._builder.var_ids[name]] for name in self.onto.classes}

    def _literals(self, expr: ClassExpr) -> list[int] | None:
        # Conjunctions of (possibly complemented) names become solver assumptions.
        ids = self._builder.var_ids
        if isinstance(expr, Named):
            return [ids[expr.name]]
        if isinstance(expr, _Thing):
            return []
        if isinstance(expr, ComplementOf) and isinstance(expr.operand, Named):
            return [-ids[expr.operand.name]]
        if isinstance(expr, IntersectionOf):
            out: list[int] = []
            for op in expr.operands:
                sub = self._literals(op)
                if sub is None:
                    return None
                out += sub
            return out
        return None

    def is_satisfiable(self, expr: ClassExpr) -> bool:
        return self.model(expr) is not None


class TruthTableBackend:
    def __init__(self, onto: Ontology):
        n = len(onto.classes)
        if n > TRUTH_TABLE_LIMIT:
            raise OntologyError(
                f"truth-table backend handles at most {TRUTH_TABLE_LIMIT} classes, got {n}")
        self.onto = onto
        rows = 1 << n
        self.full = (1 << rows) - 1
        # Bit r of columns[name] is the value of ``name`` in assignment r.
        self.columns: dict[str, int] = {}
        for i, name in enumerate(onto.classes):
            half = 1 << i
            pattern = ((1 << half) - 1) << half  # 2**i zeros then 2**i ones
            period = half << 1
            # Repeat the pattern rows/period times (base-2**period repunit).
            self.columns[name] = pattern * (self.full // ((1 << period) - 1))
        self.models = self.full
        for ax in onto.axioms:
            self.models &= self._axiom_mask(ax)

    def mask(self, expr: ClassExpr) -> int:
        if isinstance(expr, Named):
            return self.columns[expr.name]
        if isinstance(expr, _Thing):
            return self.full
        if isinstance(expr, _Nothing):
            return 0
        if isinstance(expr, IntersectionOf):
            out = self.full
            for op in expr.operands:
                out &= self.mask(op)
            return out
        if isinstance(expr, UnionOf):
            out = 0
            for op in expr.operands:
                out |= self.mask(op)
            return out
        if isinstance(expr, ComplementOf):
            return self.full ^ self.mask(expr.operand)
        raise TypeError(f"not a class expression: {expr!r}")

    def _axiom_mask(self, ax: Axiom) -> int:
        if isinstance(ax, SubClassOf):
            return (self.full ^ self.mask(ax.sub)) | self.mask(ax.sup)
        masks = [self.mask(o) for o in ax.operands]
        out = self.full
        for a, b in itertools.combinations(masks, 2):
            if isinstance(ax, EquivalentClasses):
                out &= self.full ^ (a ^ b)
            else:
                out &= self.full ^ (a & b)
        return out

    def is_satisfiable(self, expr: ClassExpr) -> bool:
        return bool(self.models & self.mask(expr))


BACKENDS = {"search": SearchBackend, "truth-table": TruthTableBackend}


@lru_cache(maxsize=64)
def _backend(onto: Ontology, kind: str):
    try:
        return BACKENDS[kind](onto)
    except KeyError:
        raise ValueError(f"unknown backend {kind!r}; choose from {sorted(BACKENDS)}") from None


# -- reasoner services -------------------------------------------------------

def is_satisfiable(onto: Ontology, expr: ClassExpr, backend: str = "search") -> bool:
    onto.check_expr(expr)
    return _backend(onto, backend).is_satisfiable(expr)


def is_subsumed(onto: Ontology, sub: ClassExpr, sup: ClassExpr, backend: str = "search") -> bool:
    onto.check_expr(sub)
    onto.check_expr(sup)
    return not is_satisfiable(onto, IntersectionOf((sub, ComplementOf(sup))), backend)


def is_consistent(onto: Ontology, backend: str = "search") -> bool:
    return is_satisfiable(onto, Thing, backend)


@dataclass(frozen=True)
class Hierarchy:
    nodes: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[tuple[str, ...], tuple[str, ...]], ...]
    unsatisfiable: tuple[str, ...] = ()

    def node_of(self, name: str) -> tuple[str, ...] | None:
        return next((n for n in self.nodes if name in n), None)

    def parents(self, node: tuple[str, ...]) -> list[tuple[str, ...]]:
        return [p for c, p in self.edges if c == node]

    def children(self, node: tuple[str, ...]) -> list[tuple[str, ...]]:
        return [c for c, p in self.edges if p == node]

    def roots(self) -> list[tuple[str, ...]]:
        has_parent = {c for c, _ in self.edges}
        return [n for n in self.nodes if n not in has_parent]


def subsumption_matrix(onto: Ontology, backend: str = "search") -> dict[tuple[str, str], bool]:
    """Pairwise ``a ⊑ b`` over declared names.

    Every satisfying assignment found along the way refutes all pairs (a, b)
    with a true and b false, which saves most solver calls.
    """
    names = onto.classes
    result: dict[tuple[str, str], bool] = {}
    be = _backend(onto, backend)

    def refute(model: dict[str, bool]) -> None:
        on = [n for n in names if model[n]]
        off = [n for n in names if not model[n]]
        for a in on:
            for b in off:
                result[(a, b)] = False

    if isinstance(be, SearchBackend):
        for a in names:
            m = be.model(Named(a))
            if m is None:
                for b in names:
                    result[(a, b)] = True
            else:
                refute(m)
        for a, b in itertools.product(names, names):
            if (a, b) in result:
                continue
            if a == b:
                result[(a, b)] = True
                continue
            m = be.model(IntersectionOf((Named(a), ComplementOf(Named(b)))))
            if m is None:
                result[(a, b)] = True
            else:
                refute(m)
    else:
        for a, b in itertools.product(names, names):
            result[(a, b)] = not be.is_satisfiable(
                IntersectionOf((Named(a), ComplementOf(Named(b)))))
    return result


def classify(onto: Ontology, backend: str = "search") -> Hierarchy:
    """Compute the inferred hierarchy: equivalence classes of satisfiable
    names, linked by the transitive reduction of subsumption."""
    sub = subsumption_matrix(onto, backend)
    unsat = sorted(n for n in onto.classes if not is_satisfiable(onto, Named(n), backend))
    unsat_set = set(unsat)
    live = [n for n in onto.classes if n not in unsat_set]

    nodes: list[tuple[str, ...]] = []
    placed: set[str] = set()
    for n in sorted(live):
        if n in placed:
            continue
        members = tuple(sorted(m for m in live if sub[(n, m)] and sub[(m, n)]))
        placed.update(members)
        nodes.append(members)
    nodes.sort()

    def below(a: tuple[str, ...], b: tuple[str, ...]) -> bool:
        return a != b and sub[(a[0], b[0])]

    edges = []
    for a in nodes:
        for b in nodes:
            if below(a, b) and not any(below(a, c) and below(c, b) for c in nodes):
                edges.append((a, b))
    return Hierarchy(tuple(nodes), tuple(sorted(edges)), tuple(unsat))


def asserted_hierarchy(onto: Ontology) -> Hierarchy:
    """Hierarchy built only from named ``SubClassOf(A, B)`` axioms, without
    reasoning (what an editor shows before classification)."""
    names = sorted(onto.classes)
    direct = {(ax.sub.name, ax.sup.name) for ax in onto.axioms
              if isinstance(ax, SubClassOf) and isinstance(ax.sub, Named)
              and isinstance(ax.sup, Named) and ax.sub != ax.sup}
    nodes = tuple((n,) for n in names)
    return Hierarchy(nodes, tuple(sorted(((a,), (b,)) for a, b in direct)))


def merge(base: Ontology, other: Ontology, qualify: bool = False) -> Ontology:
    """Union of two ontologies, base first, duplicate axioms dropped.

    Ontologies with different prefixes may only be merged unqualified when
    their local names are disjoint; ``qualify=True`` rewrites every name to
    ``prefix:Name`` instead.
    """
    if qualify:
        base, other = qualified(base), qualified(other)
    elif base.iri_prefix != other.iri_prefix:
        clash = sorted(set(base.classes) & set(other.classes))
        if clash:
            raise OntologyError(
                f"name collision between prefixes {base.iri_prefix!r} and "
                f"{other.iri_prefix!r}: {', '.join(clash)} (merge with qualify=True)")
    classes = list(dict.fromkeys(base.classes + other.classes))
    axioms = list(dict.fromkeys(base.axioms + other.axioms))
    return Ontology(base.iri_prefix, tuple(classes), tuple(axioms))


def qualified(onto: Ontology) -> Ontology:
    """Rename every class ``N`` to ``prefix:N`` (already-qualified names kept)."""
    def q(name: str) -> str:
        return name if ":" in name else f"{onto.iri_prefix}:{name}"

    return rename(onto, q)


def rename(onto: Ontology, fn) -> Ontology:
    def expr(e: ClassExpr) -> ClassExpr:
        if isinstance(e, Named):
            return Named(fn(e.name))
        if isinstance(e, IntersectionOf):
            return IntersectionOf(tuple(expr(o) for o in e.operands))
        if isinstance(e, UnionOf):
            return UnionOf(tuple(expr(o) for o in e.operands))
        if isinstance(e, ComplementOf):
            return ComplementOf(expr(e.operand))
        return e

    def axiom(ax: Axiom) -> Axiom:
        if isinstance(ax, SubClassOf):
            return SubClassOf(expr(ax.sub), expr(ax.sup))
        return type(ax)(tuple(expr(o) for o in ax.operands))

    return Ontology(onto.iri_prefix, tuple(fn(c) for c in onto.classes),
                    tuple(axiom(a) for a in onto.axioms))


def named(*names: str) -> list[Named]:
    return [Named(n) for n in names]
