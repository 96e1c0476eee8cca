import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from fedont import ontology as on
from fedont.ontology import (
    DisjointClasses,
    EquivalentClasses,
    IntersectionOf,
    Named,
    Nothing,
    Ontology,
    OntologyError,
    SubClassOf,
    Thing,
    UnionOf,
)

from helpers import naive_satisfiable, random_expr, random_ontology

A, B, C, X = Named("A"), Named("B"), Named("C"), Named("X")
BACKENDS = ["search", "truth-table"]
seeds = st.integers(0, 2**32)


def onto(*axioms, classes=("A", "B", "C")):
    return Ontology("t", classes, axioms)


DISJOINT = onto(SubClassOf(A, B), SubClassOf(A, C), DisjointClasses((B, C)))


@pytest.mark.parametrize("backend", BACKENDS)
def test_satisfiability_examples(backend):
    assert not on.is_satisfiable(DISJOINT, A, backend)
    empty = Ontology("t", ("X",))
    assert on.is_satisfiable(empty, X, backend)
    assert not on.is_satisfiable(empty, Nothing, backend)
    assert not on.is_satisfiable(onto(DisjointClasses((B, C))), IntersectionOf((B, C)), backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_subsumption_examples(backend):
    chain = onto(SubClassOf(A, B), SubClassOf(B, C))
    assert on.is_subsumed(chain, A, C, backend)
    assert not on.is_subsumed(chain, C, A, backend)
    for o in (chain, DISJOINT, onto()):
        for n in (A, B, C):
            assert on.is_subsumed(o, n, Thing, backend)
            assert on.is_subsumed(o, Nothing, n, backend)
    assert not on.is_subsumed(onto(), A, B, backend)


@pytest.mark.parametrize("backend", BACKENDS)
def test_consistency_examples(backend):
    contradiction = Ontology("t", ("A",), (EquivalentClasses((A, Thing)),
                                           EquivalentClasses((A, Nothing))))
    assert not on.is_consistent(contradiction, backend)
    assert on.is_consistent(Ontology("t"), backend)
    assert on.is_consistent(onto(SubClassOf(A, B)), backend)


def test_undeclared_names_are_rejected():
    with pytest.raises(OntologyError):
        on.is_satisfiable(onto(), Named("Z"))
    with pytest.raises(OntologyError):
        onto(SubClassOf(A, Named("Z")))
    with pytest.raises(OntologyError):
        Ontology("t", ("A", "A"))


def test_arity_is_enforced():
    for ctor in (IntersectionOf, UnionOf, EquivalentClasses, DisjointClasses):
        with pytest.raises(OntologyError):
            ctor((A,))


def test_truth_table_name_limit():
    big = Ontology("t", tuple(f"N{i}" for i in range(21)))
    with pytest.raises(OntologyError):
        on.is_satisfiable(big, Named("N0"), "truth-table")
    assert on.is_satisfiable(big, Named("N0"), "search")


def test_classify_cycle():
    h = on.classify(onto(SubClassOf(A, B), SubClassOf(B, A), SubClassOf(B, C)))
    assert h.nodes == (("A", "B"), ("C",))
    assert h.edges == ((("A", "B"), ("C",)),)
    assert h.unsatisfiable == ()


def test_classify_drops_transitive_edge():
    h = on.classify(onto(SubClassOf(A, B), SubClassOf(B, C), SubClassOf(A, C)))
    assert h.edges == ((("A",), ("B",)), (("B",), ("C",)))


def test_classify_unsatisfiable():
    h = on.classify(DISJOINT)
    assert h.unsatisfiable == ("A",)
    assert h.nodes == (("B",), ("C",))
    assert h.edges == ()


def test_asserted_hierarchy_keeps_redundant_edges():
    o = onto(SubClassOf(A, B), SubClassOf(B, C), SubClassOf(A, C))
    assert len(on.asserted_hierarchy(o).edges) == 3


def test_merge_identity_and_idempotence():
    o = onto(SubClassOf(A, B), DisjointClasses((B, C)))
    assert on.merge(o, Ontology("t")) == o
    assert on.merge(o, o) == o


def test_merge_two_prefixes():
    sym = Ontology("sym", ("Phone", "Bluetooth"), (SubClassOf(Named("Bluetooth"), Named("Phone")),))
    andr = Ontology("andr", ("Robot", "Bluetooth"), (SubClassOf(Named("Bluetooth"), Named("Robot")),))
    with pytest.raises(OntologyError, match="collision"):
        on.merge(sym, andr)
    merged = on.merge(sym, andr, qualify=True)
    assert len(merged.axioms) == len(sym.axioms) + len(andr.axioms)
    assert merged.classes == ("sym:Phone", "sym:Bluetooth", "andr:Robot", "andr:Bluetooth")


# -- properties ----------------------------------------------------------------

@settings(max_examples=150, deadline=None)
@given(seeds)
def test_backends_agree_with_naive_oracle(seed):
    rng = random.Random(seed)
    o = random_ontology(rng, max_names=7, max_axioms=10)
    for _ in range(4):
        e = random_expr(rng, list(o.classes))
        expected = naive_satisfiable(o, e)
        assert on.is_satisfiable(o, e, "truth-table") == expected
        assert on.is_satisfiable(o, e, "search") == expected


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_subsumption_is_a_preorder(seed):
    o = random_ontology(random.Random(seed), max_names=6, max_axioms=10)
    sub = on.subsumption_matrix(o)
    names = o.classes
    assert all(sub[(n, n)] for n in names)
    for a, b, c in itertools.product(names, repeat=3):
        if sub[(a, b)] and sub[(b, c)]:
            assert sub[(a, c)]
    assert sub == on.subsumption_matrix(o, "truth-table")


def closure(edges):
    reach = set(edges)
    while True:
        extra = {(a, d) for a, b in reach for c, d in reach if b == c} - reach
        if not extra:
            return reach
        reach |= extra


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_classification_is_transitive_reduction(seed):
    o = random_ontology(random.Random(seed), max_names=8, max_axioms=12)
    h = on.classify(o)
    order = {(a, b) for a in h.nodes for b in h.nodes
             if a != b and on.is_subsumed(o, Named(a[0]), Named(b[0]))}
    assert set(h.edges) <= order
    assert closure(h.edges) == order
    for a, b in h.edges:
        assert (a, b) not in closure(set(h.edges) - {(a, b)})
    for n in o.classes:
        unsat = not on.is_satisfiable(o, Named(n))
        assert unsat == on.is_subsumed(o, Named(n), Nothing)
        assert (n in h.unsatisfiable) == unsat
        assert (h.node_of(n) is None) == unsat


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_adding_axioms_is_monotone(seed):
    rng = random.Random(seed)
    o = random_ontology(rng, max_names=6, max_axioms=8)
    names = list(o.classes)
    bigger = Ontology(o.iri_prefix, o.classes,
                      o.axioms + (SubClassOf(random_expr(rng, names), random_expr(rng, names)),))
    before, after = on.subsumption_matrix(o), on.subsumption_matrix(bigger)
    assert all(after[k] for k, v in before.items() if v)
