"""Equivariant Burnside ring with torsor generators and the multiplicative specialization.

A generator ``[Ybar -> Y, d]`` is stored as a plain part (a class on which the
group acts trivially, including every affine factor) times a multiset of torsor
factors ``(base, order, label)``. The displayed base of a generator with two or
more factors is a canonical quotient atom of the product of the factor bases, so
products are associative and commutative by construction.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, reduce
from math import lcm
from typing import Iterable, Mapping

from .core import (
    Atom,
    BirClass,
    BurnElement,
    FieldLabel,
    TPolynomial,
    _same_field,
    canonicalize,
)
from .snc import DualComplex, _require_valid


@dataclass(frozen=True, order=True)
class TorsorFactor:
    """A ``mu_order``-torsor over a class with no affine factors, named by an opaque label."""

    base: BirClass
    order: int
    label: str

    def __post_init__(self):
        if self.order < 2:
            raise ValueError("torsor factors have order >= 2; order 1 is the trivial torsor")
        if self.base.affine:
            raise ValueError("affine factors belong to the plain part")

    @cached_property
    def key(self):
        return (self.base.sort_key, self.order, self.label)

    def __str__(self) -> str:
        return f"{self.base}/{self.order}/{self.label}"


@dataclass(frozen=True)
class TorsorClass:
    plain: BirClass
    factors: tuple[TorsorFactor, ...] = ()

    def __post_init__(self):
        for f in self.factors:
            _same_field(self.plain.field, f.base.field)

    @classmethod
    def generator(cls, base: BirClass, order: int = 1, label: str = "") -> TorsorClass:
        """``[Ybar -> base, order]``; order 1 forces the trivial torsor."""
        base = canonicalize(base)
        if order < 1:
            raise ValueError("torsor order must be >= 1")
        if order == 1:
            return cls(base)
        plain = BirClass.affine_space(base.field, base.affine)
        return cls(plain, (TorsorFactor(base.without_affine(), order, label),))

    @classmethod
    def unit(cls, field: FieldLabel) -> TorsorClass:
        return cls(BirClass.point(field))

    @property
    def field(self) -> FieldLabel:
        return self.plain.field

    @property
    def order(self) -> int:
        return reduce(lcm, (f.order for f in self.factors), 1)

    @property
    def label(self) -> tuple[str, ...]:
        return tuple(sorted(f.label for f in self.factors))

    @cached_property
    def base(self) -> BirClass:
        if not self.factors:
            return self.plain
        if len(self.factors) == 1:
            return self.plain * self.factors[0].base
        q = Atom(quotient_id(self.factors), self.field, sum(f.base.dim for f in self.factors))
        return self.plain * BirClass(self.field, (q,))

    @property
    def dim(self) -> int:
        return self.plain.dim + sum(f.base.dim for f in self.factors)

    @cached_property
    def sort_key(self):
        return (self.plain.sort_key, tuple(f.key for f in self.factors))

    def __mul__(self, other: TorsorClass) -> TorsorClass:
        if not isinstance(other, TorsorClass):
            return NotImplemented
        _same_field(self.field, other.field)
        return TorsorClass(self.plain * other.plain, tuple(sorted(self.factors + other.factors)))

    def times_affine(self, n: int) -> TorsorClass:
        return TorsorClass(self.plain.times_affine(n), self.factors)

    def __str__(self) -> str:
        if not self.factors:
            return f"<{self.base},1>"
        return f"<{self.base},{self.order},{'+'.join(self.label)}>"


def quotient_id(factors: Iterable[TorsorFactor]) -> str:
    factors = sorted(factors)
    m = reduce(lcm, (f.order for f in factors), 1)
    return "Q(" + ";".join(str(f) for f in factors) + f";mu{m})"


def total_space_id(f: TorsorFactor) -> str:
    return f"tot({f})"


@dataclass(frozen=True)
class EquivBurnElement:
    field: FieldLabel
    terms: tuple[tuple[TorsorClass, int], ...] = ()

    @classmethod
    def from_terms(cls, field: FieldLabel, terms: Iterable[tuple[TorsorClass, int]]) -> EquivBurnElement:
        acc: dict[TorsorClass, int] = {}
        for t, n in terms:
            _same_field(field, t.field)
            acc[t] = acc.get(t, 0) + n
        return cls(field, tuple(sorted(((t, n) for t, n in acc.items() if n), key=lambda p: p[0].sort_key)))

    @classmethod
    def gen(cls, t: TorsorClass, n: int = 1) -> EquivBurnElement:
        return cls.from_terms(t.field, [(t, n)])

    @classmethod
    def zero(cls, field: FieldLabel) -> EquivBurnElement:
        return cls(field)

    @classmethod
    def one(cls, field: FieldLabel) -> EquivBurnElement:
        return cls.gen(TorsorClass.unit(field))

    def __iter__(self):
        return iter(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def __add__(self, other: EquivBurnElement) -> EquivBurnElement:
        if not isinstance(other, EquivBurnElement):
            return NotImplemented
        _same_field(self.field, other.field)
        return EquivBurnElement.from_terms(self.field, self.terms + other.terms)

    def __neg__(self) -> EquivBurnElement:
        return EquivBurnElement(self.field, tuple((t, -n) for t, n in self.terms))

    def __sub__(self, other: EquivBurnElement) -> EquivBurnElement:
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, int):
            return EquivBurnElement.from_terms(self.field, [(t, n * other) for t, n in self.terms])
        if not isinstance(other, EquivBurnElement):
            return NotImplemented
        return equiv_mul(self, other)

    __rmul__ = __mul__

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " ".join(("+" if n == 1 else "-" if n == -1 else f"{n:+d}") + str(t) for t, n in self.terms)


def equiv_mul(x: EquivBurnElement, y: EquivBurnElement) -> EquivBurnElement:
    _same_field(x.field, y.field)
    return EquivBurnElement.from_terms(
        x.field, [(s * t, m * n) for (s, m), (t, n) in itertools.product(x.terms, y.terms)]
    )


def tag(tau: str, label: str) -> str:
    return f"{tau}|{label}"


def stratum_torsor(m: DualComplex, s, tau: str) -> TorsorClass:
    """``[Dbar_J -> D_J, d_J]`` for a stratum; stored torsor data takes precedence."""
    if s.torsor is not None:
        return s.torsor
    return TorsorClass.generator(s.cls, m.mult(s.J), tag(tau, m.label_of(s)))


def rho_mu(m: DualComplex, tau: str) -> EquivBurnElement:
    _require_valid(m)
    return EquivBurnElement.from_terms(
        m.field,
        [(stratum_torsor(m, s, tau).times_affine(len(s.J) - 1), (-1) ** (len(s.J) - 1)) for s in m.strata],
    )


def psi(x: EquivBurnElement) -> TPolynomial:
    coeffs: dict[int, BurnElement] = {}
    for t, n in x.terms:
        e = BurnElement.gen(t.base, n)
        coeffs[t.order] = coeffs[t.order] + e if t.order in coeffs else e
    return TPolynomial(x.field, coeffs)


@dataclass(frozen=True)
class TorsorFacts:
    """Declared total spaces of torsor factors, keyed by ``(base, order, label)``."""

    total: Mapping[TorsorFactor, BirClass]

    def __post_init__(self):
        for f, c in self.total.items():
            if c.dim != f.base.dim:
                raise ValueError(f"total space of {f} must have dimension {f.base.dim}")
            _same_field(c.field, f.base.field)


def total_space(f: TorsorFactor, facts: TorsorFacts | None = None) -> BirClass:
    if facts is not None and f in facts.total:
        return canonicalize(facts.total[f])
    return BirClass(f.base.field, (Atom(total_space_id(f), f.base.field, f.base.dim),))


def chi(x: EquivBurnElement, facts: TorsorFacts | None = None) -> BurnElement:
    """Class of the total space of each torsor generator."""
    terms = []
    for t, n in x.terms:
        c = t.plain
        for f in t.factors:
            c = c * total_space(f, facts)
        terms.append((c, n))
    return BurnElement.from_terms(x.field, terms)
