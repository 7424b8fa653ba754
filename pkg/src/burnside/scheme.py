"""Burnside groups over a base scheme, the boundary invariant of a pair, and B-rationality.

A support scheme is recorded by its points only: each point carries its residue
field and the dimension of its closure. A generator ``[Y -> S]`` with ``Y`` dominating
the closure of the point ``s`` is stored as ``(s, class of the generic fiber over
kappa(s))``; its degree is the dimension of the class plus the dimension of ``s``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

from .core import (
    Atom,
    BirClass,
    BurnElement,
    BurnsideError,
    FactsRegistry,
    FieldLabel,
    canonicalize,
    transport_class,
)
from .snc import DualComplex, fmt_set, rho


class SchemeError(BurnsideError):
    pass


class InvalidPairError(SchemeError):
    pass


class LinkageError(SchemeError):
    pass


@dataclass(frozen=True)
class SupportPoint:
    id: str
    field: FieldLabel
    dim: int

    def __post_init__(self):
        if self.dim < 0:
            raise SchemeError(f"point {self.id!r} has negative dimension")


@dataclass(frozen=True)
class SupportScheme:
    name: str
    points: tuple[SupportPoint, ...]

    def __post_init__(self):
        ids = [p.id for p in self.points]
        if len(set(ids)) != len(ids):
            raise SchemeError(f"support scheme {self.name!r} has duplicate point ids")

    @classmethod
    def of(cls, name: str, points: Iterable[SupportPoint]) -> SupportScheme:
        return cls(name, tuple(sorted(points, key=lambda p: p.id)))

    @cached_property
    def index(self) -> dict[str, SupportPoint]:
        return {p.id: p for p in self.points}

    def __getitem__(self, pid: str) -> SupportPoint:
        try:
            return self.index[pid]
        except KeyError:
            raise SchemeError(f"unknown point {pid!r} of {self.name!r}") from None


@dataclass(frozen=True)
class Morphism:
    """A map of support schemes given on points.

    ``ext[s]`` is the class, over the residue field of ``g(s)``, of the generic fiber of
    the closure of ``s`` over the closure of ``g(s)``. Missing entries default to the point
    when the dimensions agree and to an opaque atom otherwise.
    """

    name: str
    source: SupportScheme
    target: SupportScheme
    mapping: Mapping[str, str]
    ext: Mapping[str, BirClass] = field(default_factory=dict)

    def __post_init__(self):
        missing = {p.id for p in self.source.points} - set(self.mapping)
        if missing:
            raise SchemeError(f"morphism {self.name!r} is not defined on {sorted(missing)}")
        for s, t in self.mapping.items():
            src, tgt = self.source[s], self.target[t]
            if tgt.dim > src.dim:
                raise SchemeError(f"morphism {self.name!r}: {s} maps to a point of larger dimension")
            e = self.ext.get(s)
            if e is not None and (e.field != tgt.field or e.dim != src.dim - tgt.dim):
                raise SchemeError(f"morphism {self.name!r}: fiber class at {s} has the wrong field or dimension")

    @classmethod
    def identity(cls, s: SupportScheme) -> Morphism:
        return cls(f"id_{s.name}", s, s, {p.id: p.id for p in s.points})

    @classmethod
    def collapse(cls, source: SupportScheme, target: SupportScheme, ext: Mapping[str, BirClass] | None = None):
        """The map to a one-point scheme."""
        if len(target.points) != 1:
            raise SchemeError("collapse needs a one-point target")
        (b,) = target.points
        return cls(f"{source.name}->{b.id}", source, target, {p.id: b.id for p in source.points}, dict(ext or {}))

    def fiber(self, s: str) -> BirClass:
        if s in self.ext:
            return canonicalize(self.ext[s])
        src, tgt = self.source[s], self.target[self.mapping[s]]
        d = src.dim - tgt.dim
        if d == 0:
            return BirClass.point(tgt.field)
        return BirClass(tgt.field, (Atom(f"fib({self.name}:{s})", tgt.field, d),))


def compose(g: Morphism, h: Morphism) -> Morphism:
    """``g o h``; fiber classes multiply after transport to the final residue field."""
    if h.target != g.source:
        raise SchemeError(f"cannot compose {g.name!r} after {h.name!r}")
    mapping = {s: g.mapping[t] for s, t in h.mapping.items()}
    ext = {}
    for s, t in h.mapping.items():
        u = g.target[mapping[s]].field
        ext[s] = canonicalize(transport_class(h.fiber(s), u) * g.fiber(t))
    return Morphism(f"{g.name}.{h.name}", h.source, g.target, mapping, ext)


Term = tuple[str, BirClass]


@dataclass(frozen=True)
class SchemeBurnElement:
    scheme: SupportScheme
    terms: tuple[tuple[Term, int], ...] = ()

    @classmethod
    def from_terms(cls, scheme: SupportScheme, terms: Iterable[tuple[Term, int]]) -> SchemeBurnElement:
        acc: dict[Term, int] = {}
        for (pid, c), n in terms:
            pt = scheme[pid]
            if c.field != pt.field:
                raise SchemeError(f"class over {c.field} placed at {pid} with residue field {pt.field}")
            key = (pid, canonicalize(c))
            acc[key] = acc.get(key, 0) + n
        items = [(k, n) for k, n in acc.items() if n]
        items.sort(key=lambda kn: (kn[0][0], kn[0][1].sort_key))
        return cls(scheme, tuple(items))

    @classmethod
    def gen(cls, scheme: SupportScheme, pid: str, c: BirClass, n: int = 1) -> SchemeBurnElement:
        return cls.from_terms(scheme, [((pid, c), n)])

    @classmethod
    def zero(cls, scheme: SupportScheme) -> SchemeBurnElement:
        return cls(scheme)

    def _check(self, other: SchemeBurnElement) -> None:
        if self.scheme != other.scheme:
            raise SchemeError(f"elements over different schemes {self.scheme.name!r}, {other.scheme.name!r}")

    def __add__(self, other: SchemeBurnElement) -> SchemeBurnElement:
        if not isinstance(other, SchemeBurnElement):
            return NotImplemented
        self._check(other)
        return SchemeBurnElement.from_terms(self.scheme, self.terms + other.terms)

    def __neg__(self) -> SchemeBurnElement:
        return SchemeBurnElement(self.scheme, tuple((k, -n) for k, n in self.terms))

    def __sub__(self, other: SchemeBurnElement) -> SchemeBurnElement:
        return self + (-other)

    def __mul__(self, n: int) -> SchemeBurnElement:
        if not isinstance(n, int):
            return NotImplemented
        return SchemeBurnElement.from_terms(self.scheme, [(k, m * n) for k, m in self.terms])

    __rmul__ = __mul__

    def __bool__(self) -> bool:
        return bool(self.terms)

    def degree_of(self, term: Term) -> int:
        pid, c = term
        return c.dim + self.scheme[pid].dim

    @property
    def degrees(self) -> set[int]:
        return {self.degree_of(k) for k, _ in self.terms}

    def is_homogeneous(self, n: int) -> bool:
        return self.degrees <= {n}

    @property
    def support(self) -> set[str]:
        return {pid for (pid, _), _ in self.terms}

    def at(self, pid: str) -> BurnElement:
        f = self.scheme[pid].field
        return BurnElement.from_terms(f, [(c, n) for (p, c), n in self.terms if p == pid])

    def normalize(self, facts: FactsRegistry) -> SchemeBurnElement:
        """Apply facts point by point; classes at different points never merge."""
        return SchemeBurnElement.from_terms(
            self.scheme, [((pid, facts.normalize_class(c)), n) for (pid, c), n in self.terms]
        )

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " ".join(
            ("+" if n == 1 else "-" if n == -1 else f"{n:+d}") + f"{c}@{pid}" for (pid, c), n in self.terms
        )


def pushforward(g: Morphism, x: SchemeBurnElement) -> SchemeBurnElement:
    if x.scheme != g.source:
        raise SchemeError(f"morphism {g.name!r} is not declared on {x.scheme.name!r}")
    terms = []
    for (pid, c), n in x.terms:
        t = g.mapping[pid]
        terms.append(((t, transport_class(c, g.target[t].field) * g.fiber(pid)), n))
    return SchemeBurnElement.from_terms(g.target, terms)


# ---------------------------------------------------------------------------
# pairs


@dataclass(frozen=True)
class PairStratum:
    """Component ``alpha`` of ``D_J`` with its image point in the support scheme.

    ``cls`` is the generic fiber of ``D_J`` over the closure of ``point``.
    """

    J: frozenset[str]
    alpha: str
    cls: BirClass
    point: str
    parents: Mapping[str, str] = field(default_factory=dict)

    @property
    def key(self) -> tuple[frozenset[str], str]:
        return (self.J, self.alpha)

    @property
    def sort_key(self):
        return (len(self.J), sorted(self.J), self.alpha)


@dataclass(frozen=True)
class SncPair:
    """An snc presentation of a pair ``(X, Z)``.

    Strata live over ``scheme`` (the support of the snc divisor). ``push`` maps it to the
    support of ``Z``; without it the divisor is ``Z`` itself. ``generic`` is the generic
    point of ``Z`` (carrying ``[Z^smooth -> Z]``) and ``singular`` the declared points of
    ``Z^sing`` and ``X^sing``, both on the target scheme.
    """

    name: str
    ambient_dim: int
    scheme: SupportScheme
    strata: tuple[PairStratum, ...]
    generic: str
    singular: frozenset[str] = frozenset()
    push: Morphism | None = None

    @classmethod
    def build(cls, name, ambient_dim, scheme, strata, generic, singular=(), push=None) -> SncPair:
        strata = tuple(sorted(strata, key=lambda s: s.sort_key))
        return cls(name, ambient_dim, scheme, strata, generic, frozenset(singular), push)

    @property
    def target(self) -> SupportScheme:
        return self.push.target if self.push is not None else self.scheme

    @cached_property
    def index(self) -> dict[tuple[frozenset[str], str], PairStratum]:
        return {s.key: s for s in self.strata}

    @property
    def components(self) -> list[str]:
        return sorted({j for s in self.strata for j in s.J})

    def components_of(self, J: Iterable[str]) -> list[PairStratum]:
        J = frozenset(J)
        return [s for s in self.strata if s.J == J]

    def descend(self, J: frozenset[str], alpha: str, target: frozenset[str]) -> str:
        for j in sorted(J - target):
            alpha = self.index[(J, alpha)].parents[j]
            J = J - {j}
        return alpha


def validate_pair(p: SncPair) -> list[str]:
    out = []
    if p.push is not None and p.push.source != p.scheme:
        out.append("push morphism does not start at the divisor's support scheme")
    for pid in [p.generic, *sorted(p.singular)]:
        if pid not in p.target.index:
            out.append(f"point {pid!r} is not on the target scheme")
    if p.generic in p.target.index and p.target[p.generic].dim != p.ambient_dim - 1:
        out.append("the generic point of Z must have dimension ambient_dim - 1")
    seen = set()
    for s in p.strata:
        tag = f"stratum {fmt_set(s.J)}/{s.alpha}"
        if s.key in seen:
            out.append(f"{tag}: duplicate")
        seen.add(s.key)
        if not s.J:
            out.append(f"{tag}: empty index set")
            continue
        if s.point not in p.scheme.index:
            out.append(f"{tag}: maps to unknown point {s.point!r}")
            continue
        pt = p.scheme[s.point]
        if s.cls.field != pt.field:
            out.append(f"{tag}: class over {s.cls.field}, point residue field {pt.field}")
        want = p.ambient_dim - len(s.J) - pt.dim
        if s.cls.dim != want:
            out.append(f"{tag}: dimension violation (class dim {s.cls.dim}, expected {want})")
        if len(s.J) == 1:
            continue
        if set(s.parents) != set(s.J):
            out.append(f"{tag}: parent map must be given for every j in J")
            continue
        for j, beta in s.parents.items():
            if (s.J - {j}, beta) not in p.index:
                out.append(f"{tag}: downward-closure violation (missing {fmt_set(s.J - {j})}/{beta})")
    for j in p.components:
        if not p.components_of([j]):
            out.append(f"component {j}: singleton stratum missing")
    return out


def _require_valid_pair(p: SncPair) -> None:
    bad = validate_pair(p)
    if bad:
        raise InvalidPairError(f"pair {p.name!r} is invalid: " + "; ".join(bad))


def snc_boundary(p: SncPair) -> SchemeBurnElement:
    """The alternating stratum sum on the divisor's own support scheme."""
    _require_valid_pair(p)
    return SchemeBurnElement.from_terms(
        p.scheme,
        [((s.point, s.cls.times_affine(len(s.J) - 1)), (-1) ** (len(s.J) - 1)) for s in p.strata],
    )


def boundary(p: SncPair) -> SchemeBurnElement:
    """``boundary_Z(X)`` on the support of ``Z``: the snc sum pushed along ``push``."""
    x = snc_boundary(p)
    return pushforward(p.push, x) if p.push is not None else x


def smooth_locus_class(p: SncPair) -> SchemeBurnElement:
    """``[Z^smooth -> Z]``: the point of the residue field at the generic point of ``Z``."""
    pt = p.target[p.generic]
    return SchemeBurnElement.gen(p.target, p.generic, BirClass.point(pt.field))


@dataclass(frozen=True)
class BRationalVerdict:
    verdict: bool
    boundary: SchemeBurnElement
    witness: SchemeBurnElement
    singular: frozenset[str] = frozenset()

    @property
    def witness_on_singular_locus(self) -> bool:
        return self.singular >= self.witness.support


def is_B_rational(p: SncPair, facts: FactsRegistry | None = None) -> BRationalVerdict:
    facts = facts or FactsRegistry()
    b = boundary(p)
    witness = (b - smooth_locus_class(p)).normalize(facts)
    return BRationalVerdict(not witness, b, witness, p.singular)


# ---------------------------------------------------------------------------
# blowups adapted to pairs


@dataclass(frozen=True)
class PairCenterPiece:
    """Component ``alpha`` of ``C cap D_J1`` for a center ``C`` inside a component of ``D_J0``."""

    J1: frozenset[str]
    alpha: str
    cls: BirClass
    point: str
    container: str
    parents: Mapping[str, str] = field(default_factory=dict)


def blowup_pair(
    p: SncPair,
    J0: Iterable[str],
    alpha: str,
    new_id: str = "E",
    pieces: Iterable[PairCenterPiece] = (),
    name: str | None = None,
) -> SncPair:
    """Blow up a smooth center meeting the divisor with normal crossings.

    Without pieces the center is the component ``alpha`` of ``D_J0`` (needs ``#J0 >= 2``);
    with pieces it is the piece with empty ``J1``, lying inside that component. New strata
    map to the image points of the strata they fiber over, so the support scheme and the
    push morphism are unchanged.
    """
    _require_valid_pair(p)
    J0 = frozenset(J0)
    pieces = tuple(pieces)
    if (J0, alpha) not in p.index:
        raise InvalidPairError(f"center stratum {fmt_set(J0)}/{alpha} is not realized")
    if new_id in p.components:
        raise InvalidPairError(f"component id {new_id!r} already used")
    n = p.ambient_dim
    if not pieces:
        if len(J0) < 2:
            raise InvalidPairError("a stratum center needs #J0 >= 2")

        def inside(s: PairStratum) -> bool:
            return J0 <= s.J and p.descend(s.J, s.alpha, J0) == alpha

        strata = [s for s in p.strata if not inside(s)]
        for k in range(len(p.components)):
            for J in itertools.combinations(p.components, k):
                J = frozenset(J)
                if J0 <= J:
                    continue
                for st in p.components_of(J | J0):
                    if not inside(st):
                        continue
                    parents = {j: (st.alpha if j in J0 else st.parents[j]) for j in J}
                    if J:
                        parents[new_id] = p.descend(J | J0, st.alpha, J)
                    pad = len(J | J0) - len(J) - 1
                    strata.append(PairStratum(J | {new_id}, st.alpha, st.cls.times_affine(pad), st.point, parents))
    else:
        strata = list(p.strata)
        for pc in pieces:
            full = J0 | pc.J1
            for k in range(len(J0) + 1):
                for J0p in itertools.combinations(sorted(J0), k):
                    J0p = frozenset(J0p)
                    Jt = J0p | pc.J1 | {new_id}
                    pt = p.scheme[pc.point]
                    pad = n - len(Jt) - pt.dim - pc.cls.dim
                    if pad < 0:
                        raise InvalidPairError(f"piece {fmt_set(pc.J1)}/{pc.alpha} is too large for the stratum")
                    parents = {j: pc.parents[j] for j in pc.J1}
                    parents.update({j: pc.alpha for j in J0p})
                    if J0p | pc.J1:
                        parents[new_id] = p.descend(full, pc.container, J0p | pc.J1)
                    strata.append(PairStratum(Jt, pc.alpha, pc.cls.times_affine(pad), pc.point, parents))
    out = SncPair.build(name or f"{p.name}+{new_id}", n, p.scheme, strata, p.generic, p.singular, p.push)
    bad = validate_pair(out)
    if bad:
        raise InvalidPairError("blowup data inconsistent with the pair: " + "; ".join(bad))
    return out


# ---------------------------------------------------------------------------
# specialization through a singular fiber


@dataclass(frozen=True)
class SpecializationResult:
    verdict: bool
    b_rational: BRationalVerdict
    generic_rational: bool
    pushed_boundary: BurnElement
    rho: BurnElement
    fiber_class: BurnElement | None
    """``[A^n / kappa_b]`` when the verdict holds."""


def singular_specialization(
    p: SncPair,
    m: DualComplex,
    generic_class: BirClass,
    collapse: Morphism,
    facts: FactsRegistry | None = None,
) -> SpecializationResult:
    """Run the fiber-rationality argument for a degeneration with a B-rational special fiber.

    ``p`` presents the pair (total space, special fiber), ``m`` is the snc model of a
    resolution and ``collapse`` maps the support of the special fiber to ``b``. The two
    descriptions are linked by requiring that the boundary pushed to ``b`` equals
    ``rho(m)``; otherwise :class:`LinkageError` is raised.
    """
    facts = facts or FactsRegistry()
    if collapse.source != p.target or len(collapse.target.points) != 1:
        raise LinkageError("collapse must map the special fiber's support to a single point")
    (b,) = collapse.target.points
    if b.field != m.field:
        raise LinkageError(f"model is over {m.field}, the point b has residue field {b.field}")
    verdict = is_B_rational(p, facts)
    pushed = pushforward(collapse, verdict.boundary).at(b.id)
    r = rho(m)
    if not facts.equal(pushed, r):
        raise LinkageError(f"pushed boundary {pushed} does not match rho of the model {r}")
    n = m.rel_dim
    g = canonicalize(generic_class)
    generic_rational = g == BirClass.affine_space(g.field, n) or facts.normalize_class(g) == BirClass.affine_space(
        g.field, n
    )
    ok = verdict.verdict and generic_rational
    fiber = BurnElement.gen(BirClass.affine_space(m.field, n)) if ok else None
    return SpecializationResult(ok, verdict, generic_rational, pushed, r, fiber)
