"""Graded Burnside rings of fields on symbolic birational-class generators.

A generator is a product of opaque irreducible *atoms* times an explicit power of
the affine line. Atoms flagged as split tori are rewritten to affine powers, since
a split torus is birational to affine space of the same dimension. Anything beyond
that (for instance "this quadric is rational") is declared in a
:class:`FactsRegistry` and applied by rewriting.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Mapping


class BurnsideError(Exception):
    """Base class for errors raised by this package."""


class FieldMismatchError(BurnsideError):
    pass


class UnknownAtomError(BurnsideError, KeyError):
    pass


FIELD_KINDS = ("base", "extension", "completion", "residue")


@dataclass(frozen=True)
class FieldLabel:
    """Structural label of a field: ``k``, a finite extension, a completion or a residue field."""

    name: str
    kind: str = "base"
    parent: FieldLabel | None = None
    point: str | None = None
    degree: int | None = None

    def __post_init__(self):
        if not self.name:
            raise ValueError("field label needs a nonempty name")
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        if self.kind == "extension":
            if self.parent is None or self.degree is None or self.degree < 1:
                raise ValueError("a finite extension needs a parent field and a degree >= 1")
        if self.kind == "completion" and (self.parent is None or self.point is None):
            raise ValueError("a completion needs a parent field and a point")
        if self.kind == "residue" and self.point is None:
            raise ValueError("a residue field needs a point")

    @cached_property
    def key(self) -> str:
        if self.kind == "base":
            return self.name
        parts = [self.name, self.kind]
        if self.parent is not None:
            parts.append(self.parent.key)
        if self.point is not None:
            parts.append(self.point)
        if self.degree is not None:
            parts.append(str(self.degree))
        return "(" + ",".join(parts) + ")"

    def __str__(self) -> str:
        return self.name

    def __repr__(self) -> str:
        return f"FieldLabel({self.key})"


@dataclass(frozen=True)
class Atom:
    id: str
    field: FieldLabel
    dim: int
    torus: bool = False

    def __post_init__(self):
        if self.dim < 0:
            raise ValueError(f"atom {self.id!r} has negative dimension")

    @cached_property
    def key(self) -> tuple[str, str]:
        return (self.field.key, self.id)

    @cached_property
    def order(self) -> tuple:
        # dim and torus only break ties between homonyms, keeping sorting total
        return (self.key, self.dim, self.torus)

    def __lt__(self, other: Atom) -> bool:
        return self.order < other.order

    def __repr__(self) -> str:
        return f"Atom({self.id}/{self.field.name}, dim={self.dim}{', torus' if self.torus else ''})"

    def transport(self, target: FieldLabel) -> Atom:
        return Atom(self.id, target, self.dim, self.torus)


@dataclass(frozen=True)
class BirClass:
    """Birational class ``[atom_1 * ... * atom_k * A^affine]`` over ``field``.

    Use :func:`canonicalize` (or :meth:`of`) to obtain the normal form; the raw
    constructor only checks that every atom lives over ``field``.
    """

    field: FieldLabel
    atoms: tuple[Atom, ...] = ()
    affine: int = 0

    def __post_init__(self):
        if self.affine < 0:
            raise ValueError("affine power must be nonnegative")
        for a in self.atoms:
            if a.field != self.field:
                raise FieldMismatchError(f"atom {a.id!r} lives over {a.field}, class over {self.field}")

    @classmethod
    def of(cls, field: FieldLabel, atoms: Iterable[Atom] = (), affine: int = 0) -> BirClass:
        return canonicalize(cls(field, tuple(atoms), affine))

    @classmethod
    def point(cls, field: FieldLabel) -> BirClass:
        return cls(field)

    @classmethod
    def affine_space(cls, field: FieldLabel, n: int) -> BirClass:
        return cls(field, (), n)

    @property
    def dim(self) -> int:
        return sum(a.dim for a in self.atoms) + self.affine

    @property
    def is_unit(self) -> bool:
        return not self.atoms and self.affine == 0

    @cached_property
    def sort_key(self):
        return (self.affine, tuple(a.order for a in self.atoms))

    def __lt__(self, other: BirClass) -> bool:
        return self.sort_key < other.sort_key

    def __mul__(self, other: BirClass) -> BirClass:
        if not isinstance(other, BirClass):
            return NotImplemented
        _same_field(self.field, other.field)
        return canonicalize(BirClass(self.field, self.atoms + other.atoms, self.affine + other.affine))

    def times_affine(self, n: int) -> BirClass:
        return BirClass(self.field, self.atoms, self.affine + n)

    def without_affine(self) -> BirClass:
        return BirClass(self.field, self.atoms, 0)

    def __str__(self) -> str:
        if self.atoms:
            s = "[" + "*".join(a.id for a in self.atoms) + "]"
            return s + (f"*A^{self.affine}" if self.affine else "")
        return f"[A^{self.affine}]" if self.affine else "[pt]"

    def __repr__(self) -> str:
        return f"BirClass({self} over {self.field.name})"


def _same_field(f: FieldLabel, g: FieldLabel) -> None:
    if f != g:
        raise FieldMismatchError(f"field mismatch: {f} vs {g}")


def canonicalize(c: BirClass, facts: FactsRegistry | None = None) -> BirClass:
    """Normal form: tori absorbed into the affine power, atoms sorted, facts applied."""
    affine = c.affine
    atoms = []
    for a in c.atoms:
        if a.field != c.field:
            raise FieldMismatchError(f"atom {a.id!r} lives over {a.field}, class over {c.field}")
        if a.torus:
            affine += a.dim
        else:
            atoms.append(a)
    out = BirClass(c.field, tuple(sorted(atoms)), affine)
    if facts is not None:
        out = facts.normalize_class(out)
    return out


@dataclass(frozen=True)
class AtomTable:
    """The declared atoms, looked up by (field, id)."""

    atoms: Mapping[tuple[FieldLabel, str], Atom] = field(default_factory=dict)

    @classmethod
    def from_atoms(cls, atoms: Iterable[Atom]) -> AtomTable:
        table = {}
        for a in atoms:
            if (a.field, a.id) in table:
                raise ValueError(f"duplicate atom {a.id!r} over {a.field}")
            table[(a.field, a.id)] = a
        return cls(table)

    def __getitem__(self, key: tuple[FieldLabel, str]) -> Atom:
        try:
            return self.atoms[key]
        except KeyError:
            raise UnknownAtomError(f"unknown atom {key[1]!r} over {key[0]}") from None

    def bir(self, field: FieldLabel, ids: Iterable[str] = (), affine: int = 0) -> BirClass:
        return canonicalize(BirClass(field, tuple(self[(field, i)] for i in ids), affine))


# ---------------------------------------------------------------------------
# elements


@dataclass(frozen=True)
class BurnElement:
    """Finitely supported integer combination of birational classes over one field."""

    field: FieldLabel
    terms: tuple[tuple[BirClass, int], ...] = ()

    @classmethod
    def from_terms(cls, field: FieldLabel, terms: Iterable[tuple[BirClass, int]]) -> BurnElement:
        acc: dict[BirClass, int] = {}
        for c, n in terms:
            if c.field != field:
                raise FieldMismatchError(f"class over {c.field} in element over {field}")
            c = canonicalize(c)
            acc[c] = acc.get(c, 0) + n
        return cls(field, tuple(sorted(((c, n) for c, n in acc.items() if n), key=lambda t: t[0].sort_key)))

    @classmethod
    def zero(cls, field: FieldLabel) -> BurnElement:
        return cls(field)

    @classmethod
    def one(cls, field: FieldLabel) -> BurnElement:
        return cls(field, ((BirClass(field), 1),))

    @classmethod
    def gen(cls, c: BirClass, n: int = 1) -> BurnElement:
        return cls.from_terms(c.field, [(c, n)])

    def as_dict(self) -> dict[BirClass, int]:
        return dict(self.terms)

    def __iter__(self) -> Iterator[tuple[BirClass, int]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def coefficient(self, c: BirClass) -> int:
        return self.as_dict().get(canonicalize(c), 0)

    def __add__(self, other: BurnElement) -> BurnElement:
        if not isinstance(other, BurnElement):
            return NotImplemented
        _same_field(self.field, other.field)
        return BurnElement.from_terms(self.field, self.terms + other.terms)

    def __neg__(self) -> BurnElement:
        return BurnElement(self.field, tuple((c, -n) for c, n in self.terms))

    def __sub__(self, other: BurnElement) -> BurnElement:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return BurnElement.from_terms(self.field, [(c, n * other) for c, n in self.terms])
        if isinstance(other, BirClass):
            other = BurnElement.gen(other)
        if not isinstance(other, BurnElement):
            return NotImplemented
        _same_field(self.field, other.field)
        return BurnElement.from_terms(
            self.field, [(c * d, m * n) for (c, m), (d, n) in itertools.product(self.terms, other.terms)]
        )

    __rmul__ = __mul__

    def degree_part(self, n: int) -> BurnElement:
        return BurnElement(self.field, tuple(t for t in self.terms if t[0].dim == n))

    @property
    def degrees(self) -> set[int]:
        return {c.dim for c, _ in self.terms}

    def is_homogeneous(self, n: int) -> bool:
        return self.degrees <= {n}

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " ".join(_signed(n) + str(c) for c, n in self.terms)

    def __repr__(self) -> str:
        return f"BurnElement({self} over {self.field.name})"


def _signed(n: int) -> str:
    if n == 1:
        return "+"
    if n == -1:
        return "-"
    return f"{n:+d}"


def add(x: BurnElement, y: BurnElement) -> BurnElement:
    return x + y


def mul(x: BurnElement, y: BurnElement) -> BurnElement:
    return x * y


@dataclass(frozen=True)
class FieldMorphism:
    """A declared inclusion of fields ``source -> target``."""

    source: FieldLabel
    target: FieldLabel


def base_change(x: BurnElement, phi: FieldMorphism) -> BurnElement:
    """Push an element along a field inclusion; atoms become fresh atoms over the target."""
    if x.field != phi.source:
        raise BurnsideError(f"no declared morphism from {x.field} (morphism starts at {phi.source})")
    return BurnElement.from_terms(phi.target, [(transport_class(c, phi.target), n) for c, n in x.terms])


def transport_class(c: BirClass, target: FieldLabel) -> BirClass:
    return BirClass(target, tuple(a.transport(target) for a in c.atoms), c.affine)


@dataclass
class TPolynomial:
    """Polynomial in a formal variable T with Burnside-element coefficients."""

    field: FieldLabel
    coeffs: dict[int, BurnElement] = field(default_factory=dict)

    def __post_init__(self):
        self.coeffs = {d: c for d, c in sorted(self.coeffs.items()) if c}

    def __eq__(self, other) -> bool:
        return isinstance(other, TPolynomial) and self.field == other.field and self.coeffs == other.coeffs

    def __add__(self, other: TPolynomial) -> TPolynomial:
        _same_field(self.field, other.field)
        out = dict(self.coeffs)
        for d, c in other.coeffs.items():
            out[d] = out[d] + c if d in out else c
        return TPolynomial(self.field, out)

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        return " ".join(f"({c})*T^{d}" for d, c in self.coeffs.items())


def eval_T1(p: TPolynomial) -> BurnElement:
    out = BurnElement.zero(p.field)
    for c in p.coeffs.values():
        out = out + c
    return out


# ---------------------------------------------------------------------------
# facts registry

# A monomial is a class without its field: (sorted atoms, affine power).
Monomial = tuple[tuple[Atom, ...], int]


def _weight_key(m: Monomial):
    # well-order compatible with multiplication: number of atoms first, then the
    # multiset order with the affine line below every atom
    atoms, aff = m
    desc = tuple(sorted((a.key for a in atoms), reverse=True))
    return (len(atoms), tuple((1,) + k for k in desc) + ((0,),) * aff)


def _divides(p: Monomial, m: Monomial) -> bool:
    need = Counter(p[0])
    have = Counter(m[0])
    return p[1] <= m[1] and all(have[a] >= n for a, n in need.items())


def _replace(m: Monomial, lhs: Monomial, rhs: Monomial) -> Monomial:
    have = Counter(m[0])
    have.subtract(lhs[0])
    have.update(rhs[0])
    return (tuple(sorted(have.elements())), m[1] - lhs[1] + rhs[1])


def _lcm(p: Monomial, q: Monomial) -> Monomial:
    cp, cq = Counter(p[0]), Counter(q[0])
    atoms = cp | cq
    return (tuple(sorted(atoms.elements())), max(p[1], q[1]))


def _shares_symbol(p: Monomial, q: Monomial) -> bool:
    return bool(set(p[0]) & set(q[0])) or (p[1] > 0 and q[1] > 0)


@dataclass(frozen=True)
class Fact:
    lhs: BirClass
    rhs: BirClass

    def __post_init__(self):
        _same_field(self.lhs.field, self.rhs.field)
        if self.lhs.dim != self.rhs.dim:
            raise ValueError(f"fact {self.lhs} = {self.rhs} does not preserve dimension")


@dataclass(frozen=True)
class FactsRegistry:
    """Declared equalities of classes, closed under products with arbitrary classes.

    Normal forms come from a completed (confluent) rewriting system, so two classes
    are identified by the registry exactly when their normal forms agree.
    """

    facts: tuple[Fact, ...] = ()

    @classmethod
    def of(cls, *pairs: tuple[BirClass, BirClass]) -> FactsRegistry:
        return cls(tuple(Fact(canonicalize(a), canonicalize(b)) for a, b in pairs))

    def __add__(self, other: FactsRegistry) -> FactsRegistry:
        return FactsRegistry(self.facts + other.facts)

    @cached_property
    def _rules(self) -> dict[FieldLabel, list[tuple[Monomial, Monomial]]]:
        by_field: dict[FieldLabel, list[tuple[Monomial, Monomial]]] = {}
        for f in self.facts:
            a = canonicalize(f.lhs)
            b = canonicalize(f.rhs)
            by_field.setdefault(a.field, []).append(((a.atoms, a.affine), (b.atoms, b.affine)))
        return {k: _complete(v) for k, v in by_field.items()}

    def rules(self, field: FieldLabel) -> list[tuple[Monomial, Monomial]]:
        return list(self._rules.get(field, ()))

    def normalize_class(self, c: BirClass) -> BirClass:
        rules = self._rules.get(c.field)
        c = canonicalize(c)
        if not rules:
            return c
        atoms, aff = _normal_form((c.atoms, c.affine), rules)
        return BirClass(c.field, atoms, aff)

    def normalize(self, x: BurnElement) -> BurnElement:
        return BurnElement.from_terms(x.field, [(self.normalize_class(c), n) for c, n in x.terms])

    def equal(self, x: BurnElement, y: BurnElement) -> bool:
        return self.normalize(x) == self.normalize(y)

    def neighbours(self, c: BirClass) -> Iterator[BirClass]:
        """Classes obtained from ``c`` by one application of a declared fact, either direction."""
        for f in self.facts:
            if f.lhs.field != c.field:
                continue
            a = (f.lhs.atoms, f.lhs.affine)
            b = (f.rhs.atoms, f.rhs.affine)
            m = (c.atoms, c.affine)
            for p, q in ((a, b), (b, a)):
                if _divides(p, m):
                    atoms, aff = _replace(m, p, q)
                    yield BirClass(c.field, atoms, aff)


def _orient(a: Monomial, b: Monomial) -> tuple[Monomial, Monomial] | None:
    ka, kb = _weight_key(a), _weight_key(b)
    if ka == kb:
        return None
    return (a, b) if ka > kb else (b, a)


def _normal_form(m: Monomial, rules: list[tuple[Monomial, Monomial]]) -> Monomial:
    changed = True
    while changed:
        changed = False
        for lhs, rhs in rules:
            if _divides(lhs, m):
                m = _replace(m, lhs, rhs)
                changed = True
                break
    return m


def _complete(pairs: list[tuple[Monomial, Monomial]]) -> list[tuple[Monomial, Monomial]]:
    """Knuth-Bendix completion for a commutative monoid presentation (always terminates)."""
    rules: list[tuple[Monomial, Monomial]] = []
    pending = list(pairs)
    while True:
        while pending:
            a, b = pending.pop()
            a, b = _normal_form(a, rules), _normal_form(b, rules)
            r = _orient(a, b)
            if r is None:
                continue
            rules = _interreduce(rules + [r])
        new = []
        for (l1, r1), (l2, r2) in itertools.combinations(rules, 2):
            if not _shares_symbol(l1, l2):
                continue
            top = _lcm(l1, l2)
            s1 = _normal_form(_replace(top, l1, r1), rules)
            s2 = _normal_form(_replace(top, l2, r2), rules)
            if s1 != s2:
                new.append((s1, s2))
        if not new:
            return rules
        pending = new


def _interreduce(rules: list[tuple[Monomial, Monomial]]) -> list[tuple[Monomial, Monomial]]:
    changed = True
    while changed:
        changed = False
        for i, (lhs, rhs) in enumerate(rules):
            others = rules[:i] + rules[i + 1 :]
            if any(_divides(l2, lhs) for l2, _ in others):
                rules = others
                nl = _normal_form(lhs, rules)
                nr = _normal_form(rhs, rules)
                r = _orient(nl, nr)
                if r is not None:
                    rules = rules + [r]
                changed = True
                break
            nr = _normal_form(rhs, others)
            if nr != rhs:
                rules = others + [(lhs, nr)]
                changed = True
                break
    return sorted(rules, key=lambda r: _weight_key(r[0]))


def is_affine_divisible(x: BurnElement, facts: FactsRegistry | None = None, search_limit: int = 200) -> bool:
    """Symbolic A^1-divisibility: every generator is (registry-equal to) something times A^1.

    Sound but not complete; geometric reasons invisible to the symbols are not detected.
    """
    facts = facts or FactsRegistry()
    x = facts.normalize(x)
    return all(_class_has_affine_factor(c, facts, search_limit) for c, _ in x.terms)


def _class_has_affine_factor(c: BirClass, facts: FactsRegistry, limit: int) -> bool:
    seen = {c}
    frontier = [c]
    while frontier and len(seen) < limit:
        nxt = []
        for d in frontier:
            if d.affine >= 1:
                return True
            for e in facts.neighbours(d):
                e = canonicalize(e)
                if e not in seen:
                    seen.add(e)
                    nxt.append(e)
        frontier = nxt
    return any(d.affine >= 1 for d in seen)
