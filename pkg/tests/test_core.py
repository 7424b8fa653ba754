from __future__ import annotations

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burnside.core import (
    Atom,
    AtomTable,
    BirClass,
    BurnElement,
    FactsRegistry,
    FieldLabel,
    FieldMismatchError,
    FieldMorphism,
    TPolynomial,
    UnknownAtomError,
    base_change,
    canonicalize,
    eval_T1,
    is_affine_divisible,
)
from strategies import K, POOL, bir_classes, burn_elements

L = BirClass.of(K, [Atom("L", K, 1)])
M = BirClass.of(K, [Atom("M", K, 1)])
KB = FieldLabel("K_b", "residue", point="b")
BIG = FieldLabel("K")


def gen(c, n=1):
    return BurnElement.gen(c, n)


# --- classes -----------------------------------------------------------------


def test_torus_absorbed():
    c = BirClass.of(K, [Atom("T", K, 2, torus=True)], 1)
    assert c == BirClass.affine_space(K, 3)


def test_unit_fixed():
    assert canonicalize(BirClass.point(K)) == BirClass.point(K)
    assert BirClass.point(K).is_unit


def test_field_labels():
    with pytest.raises(ValueError):
        FieldLabel("L", "extension", parent=K)
    ext = FieldLabel("L", "extension", parent=K, degree=2)
    assert ext == FieldLabel("L", "extension", parent=K, degree=2)
    assert ext != FieldLabel("L", "extension", parent=K, degree=3)
    with pytest.raises(FieldMismatchError):
        BirClass(K, (Atom("x", ext, 1),))


def test_atom_table():
    t = AtomTable.from_atoms(POOL)
    assert t.bir(K, ["Q", "P"], 1) == BirClass.of(K, [POOL[0], POOL[1]], 1)
    with pytest.raises(UnknownAtomError):
        t.bir(K, ["nope"])
    with pytest.raises(ValueError):
        AtomTable.from_atoms(POOL + POOL[:1])


@given(bir_classes())
def test_canonicalize_idempotent(c):
    assert canonicalize(canonicalize(c)) == canonicalize(c)
    assert not any(a.torus for a in c.atoms)


@given(bir_classes(), bir_classes())
def test_class_product_dimension(c, d):
    assert (c * d).dim == c.dim + d.dim
    assert c * d == d * c


# --- group and ring laws -----------------------------------------------------


def test_group_examples():
    assert gen(L) + gen(L, -1) == BurnElement.zero(K)
    assert gen(L) + gen(L) == gen(L, 2)
    assert (gen(L, 2) - gen(M)) + gen(M) == gen(L, 2)


def test_ring_examples():
    A = BirClass.affine_space
    assert gen(A(K, 2)) * gen(A(K, 3)) == gen(A(K, 5))
    assert BurnElement.one(K) * gen(L) == gen(L)
    C = BirClass.of(K, [Atom("C", K, 1)])
    assert (gen(L) + gen(M)) * gen(C) == gen(L * C) + gen(M * C)


@settings(max_examples=400)
@given(burn_elements(8), burn_elements(8), burn_elements(8))
def test_ring_axioms(x, y, z):
    zero, one = BurnElement.zero(K), BurnElement.one(K)
    assert x + y == y + x
    assert (x + y) + z == x + (y + z)
    assert x + zero == x and x - x == zero
    assert x * y == y * x
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x * one == x
    assert x * 3 == x + x + x


@settings(max_examples=300)
@given(burn_elements(), burn_elements())
def test_grading_cauchy_rule(x, y):
    p = x * y
    for n in range(0, 20):
        want = BurnElement.zero(K)
        for i in range(n + 1):
            want = want + x.degree_part(i) * y.degree_part(n - i)
        assert p.degree_part(n) == want


def test_field_mismatch():
    with pytest.raises(FieldMismatchError):
        gen(L) + gen(BirClass.point(KB))


# --- base change -------------------------------------------------------------


def test_base_change_examples():
    phi = FieldMorphism(K, KB)
    assert base_change(gen(BirClass.affine_space(K, 2)), phi) == gen(BirClass.affine_space(KB, 2))
    assert base_change(BurnElement.one(K), phi) == BurnElement.one(KB)
    (c, n), = base_change(gen(L), phi).terms
    assert c.field == KB and [a.id for a in c.atoms] == ["L"] and n == 1


@settings(max_examples=200)
@given(burn_elements(), burn_elements())
def test_base_change_is_graded_ring_map(x, y):
    phi = FieldMorphism(K, KB)
    assert base_change(x + y, phi) == base_change(x, phi) + base_change(y, phi)
    assert base_change(x * y, phi) == base_change(x, phi) * base_change(y, phi)
    assert base_change(x, phi).degrees == x.degrees


# --- T polynomials -----------------------------------------------------------


def test_eval_T1():
    p = TPolynomial(K, {1: gen(L), 3: gen(M, -2), 4: BurnElement.zero(K)})
    assert eval_T1(p) == gen(L) - gen(M, 2)
    assert 4 not in p.coeffs


# --- facts -------------------------------------------------------------------


def _orbit(c: BirClass, facts: FactsRegistry) -> set[BirClass]:
    """Exhaustive rewriting in both directions; the oracle for registry equality."""
    seen = {canonicalize(c)}
    todo = list(seen)
    while todo:
        d = todo.pop()
        for e in facts.neighbours(d):
            e = canonicalize(e)
            if e not in seen:
                seen.add(e)
                todo.append(e)
    return seen


def test_fact_example():
    A, B, C = (Atom(x, K, 1) for x in "ABC")
    C2 = Atom("C2", K, 2)
    facts = FactsRegistry.of((BirClass.of(K, [A, B]), BirClass.of(K, [C2])))
    assert facts.normalize_class(BirClass.of(K, [A, B])) == facts.normalize_class(BirClass.of(K, [C2]))
    with pytest.raises(ValueError):
        FactsRegistry.of((BirClass.of(K, [A, B]), BirClass.of(K, [C])))


FACT_POOL = [
    (BirClass.of(K, [POOL[0], POOL[1]]), BirClass.of(K, [POOL[2]])),
    (BirClass.of(K, [POOL[0]]), BirClass.affine_space(K, 1)),
    (BirClass.of(K, [POOL[3]], 1), BirClass.of(K, [POOL[1]], 1)),
    (BirClass.of(K, [POOL[2]]), BirClass.of(K, [POOL[3], POOL[3]])),
    (BirClass.of(K, [POOL[1], POOL[3]]), BirClass.affine_space(K, 2)),
]


SUBSETS = [c for k in (1, 2, 3) for c in itertools.combinations(range(len(FACT_POOL)), k)]
CLASSES = [
    c
    for n in range(0, 4)
    for atoms in itertools.combinations_with_replacement(POOL, n)
    for aff in range(2)
    if (c := BirClass.of(K, atoms, aff)).dim <= 4
]


@pytest.mark.parametrize("idx", SUBSETS)
def test_registry_matches_exhaustive_rewriting(idx):
    facts = FactsRegistry.of(*(FACT_POOL[i] for i in idx))
    nf = {c: facts.normalize_class(c) for c in CLASSES}
    component: dict[BirClass, int] = {}
    for c in CLASSES:
        if c not in component:
            for d in _orbit(c, facts):
                component[d] = id(c)
    for c in CLASSES:
        assert nf[c].dim == c.dim
        assert facts.normalize_class(nf[c]) == nf[c]
    for c, d in itertools.combinations(CLASSES, 2):
        if c.dim == d.dim:
            assert (nf[c] == nf[d]) == (component[c] == component[d])


def test_affine_divisibility_examples():
    Y = BirClass.of(K, [Atom("Y", K, 1)])
    Z = BirClass.of(K, [Atom("Z", K, 2)])
    assert is_affine_divisible(gen(Y.times_affine(1)))
    assert not is_affine_divisible(BurnElement.one(K))
    assert not is_affine_divisible(gen(Y.times_affine(1)) + gen(Z))
    facts = FactsRegistry.of((Z, Y.times_affine(1)))
    assert is_affine_divisible(gen(Y.times_affine(1)) + gen(Z), facts)


def test_homonymous_atoms_sort_totally():
    a1, a2 = Atom("Q", K, 1), Atom("Q", K, 2)
    x = BurnElement.gen(BirClass.of(K, [a1], 1)) + BurnElement.gen(BirClass.of(K, [a2]))
    y = BurnElement.gen(BirClass.of(K, [a2])) + BurnElement.gen(BirClass.of(K, [a1], 1))
    assert x == y and str(x) == str(y)
    assert sorted([a2, a1]) == sorted([a1, a2]) == [a1, a2]
