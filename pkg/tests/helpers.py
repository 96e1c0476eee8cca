"""Random generators and brute-force oracles shared by the test modules."""
from __future__ import annotations

import itertools
import random
from pathlib import Path

from fedont import feature_model as fm
from fedont import ontology as on

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "fedont" / "fixtures"
DATA = Path(__file__).resolve().parent / "data"
GOLDEN = Path(__file__).resolve().parent / "golden"


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


def fixture_model(name: str) -> fm.FeatureModel:
    from fedont.fm_text import parse
    return parse(fixture_text(name if name.endswith(".fml") else name + ".fml"))


def random_model(rng: random.Random, max_features: int = 12,
                 max_constraints: int = 3) -> fm.FeatureModel:
    n = rng.randint(1, max_features)
    names = [f"F{i}" for i in range(n)]
    # shape[name] = (solitary children list, groups list)
    shape: dict[str, tuple[list, list]] = {names[0]: ([], [])}
    pool = names[1:]
    while pool:
        parent = rng.choice(list(shape))
        if len(pool) >= 2 and rng.random() < 0.35:
            k = rng.randint(2, min(4, len(pool)))
            members, pool = pool[:k], pool[k:]
            kind = rng.choice(list(fm.GroupKind))
            shape[parent][1].append((kind, members))
            for m in members:
                shape[m] = ([], [])
        else:
            child, pool = pool[0], pool[1:]
            shape[parent][0].append((rng.choice(list(fm.ChildKind)), child))
            shape[child] = ([], [])

    def build(name: str) -> fm.Feature:
        kids, groups = shape[name]
        return fm.Feature(
            name,
            tuple((k, build(c)) for k, c in kids),
            tuple((k, tuple(build(m) for m in ms)) for k, ms in groups))

    constraints = []
    if n >= 2:
        for _ in range(rng.randint(0, max_constraints)):
            a, b = rng.sample(names, 2)
            constraints.append(fm.CrossTreeConstraint(rng.choice(list(fm.ConstraintKind)), a, b))
    return fm.FeatureModel(f"random{n}", build(names[0]), tuple(constraints))


def brute_force_configurations(model: fm.FeatureModel) -> list[frozenset[str]]:
    """Every valid configuration, found by testing all 2**n subsets with the
    rule checker, in (size, canonical-lexicographic) order."""
    names = model.feature_names()
    pos = {n: i for i, n in enumerate(names)}
    valid = []
    for r in range(len(names) + 1):
        for combo in itertools.combinations(names, r):
            if fm.is_valid_configuration(model, combo):
                valid.append(frozenset(combo))
    return sorted(valid, key=lambda s: (len(s), sorted(pos[x] for x in s)))


def random_expr(rng: random.Random, names: list[str], depth: int = 2) -> on.ClassExpr:
    r = rng.random()
    if depth == 0 or r < 0.55:
        x = rng.random()
        if x < 0.04:
            return on.Thing
        if x < 0.08:
            return on.Nothing
        return on.Named(rng.choice(names))
    if r < 0.7:
        return on.ComplementOf(random_expr(rng, names, depth - 1))
    ops = tuple(random_expr(rng, names, depth - 1) for _ in range(rng.randint(2, 3)))
    return on.IntersectionOf(ops) if r < 0.85 else on.UnionOf(ops)


def random_ontology(rng: random.Random, max_names: int = 12,
                    max_axioms: int = 20) -> on.Ontology:
    n = rng.randint(1, max_names)
    names = [f"C{i}" for i in range(n)]
    axioms = []
    for _ in range(rng.randint(0, max_axioms)):
        r = rng.random()
        if r < 0.5:
            # Mostly plain subclass edges so hierarchies are non-trivial.
            a, b = rng.choice(names), rng.choice(names)
            axioms.append(on.SubClassOf(on.Named(a), on.Named(b)))
        elif r < 0.75:
            axioms.append(on.SubClassOf(random_expr(rng, names), random_expr(rng, names)))
        elif r < 0.85:
            axioms.append(on.EquivalentClasses(
                tuple(random_expr(rng, names, 1) for _ in range(rng.randint(2, 3)))))
        else:
            axioms.append(on.DisjointClasses(
                tuple(random_expr(rng, names, 1) for _ in range(rng.randint(2, 3)))))
    return on.Ontology("rnd", tuple(names), tuple(axioms))


def eval_expr(expr: on.ClassExpr, row: dict[str, bool]) -> bool:
    if isinstance(expr, on.Named):
        return row[expr.name]
    if expr is on.Thing:
        return True
    if expr is on.Nothing:
        return False
    if isinstance(expr, on.ComplementOf):
        return not eval_expr(expr.operand, row)
    values = [eval_expr(o, row) for o in expr.operands]
    return all(values) if isinstance(expr, on.IntersectionOf) else any(values)


def eval_axiom(ax: on.Axiom, row: dict[str, bool]) -> bool:
    if isinstance(ax, on.SubClassOf):
        return not eval_expr(ax.sub, row) or eval_expr(ax.sup, row)
    values = [eval_expr(o, row) for o in ax.operands]
    if isinstance(ax, on.EquivalentClasses):
        return len(set(values)) == 1
    return sum(values) <= 1


def naive_satisfiable(onto: on.Ontology, expr: on.ClassExpr) -> bool:
    """Truth table evaluated row by row, straight from the set semantics."""
    names = list(onto.classes)
    for bits in itertools.product((False, True), repeat=len(names)):
        row = dict(zip(names, bits))
        if all(eval_axiom(a, row) for a in onto.axioms) and eval_expr(expr, row):
            return True
    return False
