"""Propositional formulas, CNF conversion and a small DPLL solver.

Both the feature-model semantics and the ontology reasoner reduce to plain
propositional logic, so they share this module.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Const:
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not:
    arg: "PropFormula"


@dataclass(frozen=True)
class And:
    args: tuple["PropFormula", ...]


@dataclass(frozen=True)
class Or:
    args: tuple["PropFormula", ...]


@dataclass(frozen=True)
class Implies:
    lhs: "PropFormula"
    rhs: "PropFormula"


@dataclass(frozen=True)
class Iff:
    lhs: "PropFormula"
    rhs: "PropFormula"


PropFormula = Union[Var, Const, Not, And, Or, Implies, Iff]


def conj(parts: Iterable[PropFormula]) -> PropFormula:
    parts = tuple(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


def disj(parts: Iterable[PropFormula]) -> PropFormula:
    parts = tuple(parts)
    if not parts:
        return FALSE
    if len(parts) == 1:
        return parts[0]
    return Or(parts)


def variables(f: PropFormula) -> set[str]:
    out: set[str] = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Var):
            out.add(g.name)
        elif isinstance(g, Not):
            stack.append(g.arg)
        elif isinstance(g, (And, Or)):
            stack.extend(g.args)
        elif isinstance(g, (Implies, Iff)):
            stack.append(g.lhs)
            stack.append(g.rhs)
    return out


def evaluate(f: PropFormula, assignment: Mapping[str, bool]) -> bool:
    """Evaluate ``f``; variables missing from ``assignment`` count as false."""
    if isinstance(f, Var):
        return bool(assignment.get(f.name, False))
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Not):
        return not evaluate(f.arg, assignment)
    if isinstance(f, And):
        return all(evaluate(a, assignment) for a in f.args)
    if isinstance(f, Or):
        return any(evaluate(a, assignment) for a in f.args)
    if isinstance(f, Implies):
        return (not evaluate(f.lhs, assignment)) or evaluate(f.rhs, assignment)
    if isinstance(f, Iff):
        return evaluate(f.lhs, assignment) == evaluate(f.rhs, assignment)
    raise TypeError(f"not a formula: {f!r}")


class CNFBuilder:
    """Tseitin encoder mapping named variables to positive integers."""

    def __init__(self, names: Iterable[str] = ()):
        self.var_ids: dict[str, int] = {}
        self.num_vars = 0
        self.clauses: list[list[int]] = []
        for name in names:
            self.var(name)

    def var(self, name: str) -> int:
        vid = self.var_ids.get(name)
        if vid is None:
            self.num_vars += 1
            vid = self.var_ids[name] = self.num_vars
        return vid

    def fresh(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def assert_formula(self, f: PropFormula) -> None:
        # Top-level conjunctions and disjunctions of literals are emitted
        # directly; everything else goes through a definitional literal.
        if isinstance(f, And):
            for a in f.args:
                self.assert_formula(a)
            return
        if isinstance(f, Const):
            if not f.value:
                self.clauses.append([])
            return
        if isinstance(f, Implies):
            self.assert_formula(Or((Not(f.lhs), f.rhs)))
            return
        if isinstance(f, Or):
            self.clauses.append([self.literal(a) for a in f.args])
            return
        self.clauses.append([self.literal(f)])

    def literal(self, f: PropFormula) -> int:
        """Return a literal equivalent to ``f``, adding defining clauses."""
        if isinstance(f, Var):
            return self.var(f.name)
        if isinstance(f, Not):
            return -self.literal(f.arg)
        if isinstance(f, Const):
            t = self.fresh()
            self.clauses.append([t] if f.value else [-t])
            return t
        if isinstance(f, Implies):
            return self.literal(Or((Not(f.lhs), f.rhs)))
        if isinstance(f, And):
            lits = [self.literal(a) for a in f.args]
            t = self.fresh()
            for lit in lits:
                self.clauses.append([-t, lit])
            self.clauses.append([t] + [-lit for lit in lits])
            return t
        if isinstance(f, Or):
            lits = [self.literal(a) for a in f.args]
            t = self.fresh()
            for lit in lits:
                self.clauses.append([t, -lit])
            self.clauses.append([-t] + lits)
            return t
        if isinstance(f, Iff):
            a = self.literal(f.lhs)
            b = self.literal(f.rhs)
            t = self.fresh()
            self.clauses += [[-t, -a, b], [-t, a, -b], [t, a, b], [t, -a, -b]]
            return t
        raise TypeError(f"not a formula: {f!r}")


class Solver:
    """DPLL with two-watched-literal unit propagation and chronological
    backtracking. Reusable across calls with different assumptions."""

    def __init__(self, num_vars: int, clauses: Iterable[Sequence[int]]):
        self.num_vars = num_vars
        self.clauses: list[list[int]] = []
        self.units: list[int] = []
        self.trivially_unsat = False
        self.watches: dict[int, list[int]] = {}
        for clause in clauses:
            lits = list(dict.fromkeys(clause))
            if any(-lit in lits for lit in lits):
                continue  # tautology
            if not lits:
                self.trivially_unsat = True
            elif len(lits) == 1:
                self.units.append(lits[0])
            else:
                idx = len(self.clauses)
                self.clauses.append(lits)
                self.watches.setdefault(lits[0], []).append(idx)
                self.watches.setdefault(lits[1], []).append(idx)

    def solve(self, assumptions: Iterable[int] = ()) -> list[bool] | None:
        """Return a model indexed by variable id (index 0 unused) or None."""
        if self.trivially_unsat:
            return None
        value = [0] * (self.num_vars + 1)
        trail: list[int] = []
        # Each decision level records (trail length before it, decision literal, flipped).
        levels: list[tuple[int, int, bool]] = []

        def enqueue(lit: int) -> bool:
            v = value[abs(lit)]
            if v:
                return (v > 0) == (lit > 0)
            value[abs(lit)] = 1 if lit > 0 else -1
            trail.append(lit)
            return True

        def lit_value(lit: int) -> int:
            v = value[abs(lit)]
            return v if lit > 0 else -v

        def propagate(start: int) -> bool:
            head = start
            clauses = self.clauses
            watches = self.watches
            while head < len(trail):
                false_lit = -trail[head]
                head += 1
                watching = watches.get(false_lit)
                if not watching:
                    continue
                i = 0
                while i < len(watching):
                    ci = watching[i]
                    clause = clauses[ci]
                    if clause[0] == false_lit:
                        clause[0], clause[1] = clause[1], clause[0]
                    other = clause[0]
                    if lit_value(other) > 0:
                        i += 1
                        continue
                    for k in range(2, len(clause)):
                        if lit_value(clause[k]) >= 0:
                            clause[1], clause[k] = clause[k], clause[1]
                            watching[i] = watching[-1]
                            watching.pop()
                            watches.setdefault(clause[1], []).append(ci)
                            break
                    else:
                        if lit_value(other) < 0:
                            return False
                        enqueue(other)
                        i += 1
            return True

        for lit in list(self.units) + list(assumptions):
            if not enqueue(lit):
                return None
        if not propagate(0):
            return None

        while True:
            var = next((v for v in range(1, self.num_vars + 1) if not value[v]), 0)
            if not var:
                return [v > 0 for v in value]
            levels.append((len(trail), var, False))
            start = len(trail)
            enqueue(var)
            while not propagate(start):
                # Backtrack to the most recent unflipped decision.
                while levels and levels[-1][2]:
                    mark, _, _ = levels.pop()
                    for lit in trail[mark:]:
                        value[abs(lit)] = 0
                    del trail[mark:]
                if not levels:
                    return None
                mark, dec, _ = levels.pop()
                for lit in trail[mark:]:
                    value[abs(lit)] = 0
                del trail[mark:]
                levels.append((mark, -dec, True))
                start = len(trail)
                enqueue(-dec)


def is_satisfiable(f: PropFormula) -> bool:
    builder = CNFBuilder()
    builder.assert_formula(f)
    return Solver(builder.num_vars, builder.clauses).solve() is not None


def iter_assignments(names: Sequence[str]) -> Iterator[dict[str, bool]]:
    """Yield every truth assignment over ``names`` (2**len(names) of them)."""
    n = len(names)
    for bits in range(1 << n):
        yield {name: bool(bits >> i & 1) for i, name in enumerate(names)}
