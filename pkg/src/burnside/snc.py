"""Dual complexes of snc models over a complete dvr and the specialization maps.

A :class:`DualComplex` records the components ``D_i`` of the special fiber with
their multiplicities and, for every realized ``J``, the connected components of
``D_J`` together with a birational class and the parent maps to ``D_{J - j}``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace
from functools import cached_property, reduce
from math import gcd
from typing import TYPE_CHECKING, Iterable, Mapping

from .core import (
    BirClass,
    BurnElement,
    BurnsideError,
    FactsRegistry,
    FieldLabel,
    TPolynomial,
    canonicalize,
)

if TYPE_CHECKING:
    from .equivariant import TorsorClass


class InvalidModelError(BurnsideError):
    pass


class BlowupError(BurnsideError):
    pass


def fmt_set(J: Iterable[str]) -> str:
    return "{" + ",".join(sorted(J)) + "}"


@dataclass(frozen=True)
class Stratum:
    """One connected component ``alpha`` of ``D_J``."""

    J: frozenset[str]
    alpha: str
    cls: BirClass
    parents: Mapping[str, str] = field(default_factory=dict)
    label: str | None = None
    torsor: TorsorClass | None = None

    @property
    def key(self) -> tuple[frozenset[str], str]:
        return (self.J, self.alpha)

    @property
    def sort_key(self):
        return (len(self.J), sorted(self.J), self.alpha)


@dataclass(frozen=True)
class DualComplex:
    name: str
    field: FieldLabel
    rel_dim: int
    components: Mapping[str, int]
    strata: tuple[Stratum, ...]

    @classmethod
    def build(cls, name, field, rel_dim, components, strata) -> DualComplex:
        strata = tuple(sorted(strata, key=lambda s: s.sort_key))
        return cls(name, field, rel_dim, dict(sorted(components.items())), strata)

    @cached_property
    def index(self) -> dict[tuple[frozenset[str], str], Stratum]:
        return {s.key: s for s in self.strata}

    def components_of(self, J: Iterable[str]) -> list[Stratum]:
        J = frozenset(J)
        return [s for s in self.strata if s.J == J]

    def mult(self, J: Iterable[str]) -> int:
        return reduce(gcd, (self.components[j] for j in J), 0)

    def label_of(self, s: Stratum) -> str:
        return s.label if s.label is not None else f"{self.name}/{fmt_set(s.J)}/{s.alpha}"

    def descend(self, J: frozenset[str], alpha: str, target: frozenset[str]) -> str:
        """Component of ``D_target`` containing component ``alpha`` of ``D_J`` (target a subset of J)."""
        for j in sorted(J - target):
            s = self.index[(J, alpha)]
            alpha = s.parents[j]
            J = J - {j}
        return alpha

    @property
    def max_mult(self) -> int:
        return max(self.components.values())


def validate(m: DualComplex) -> list[str]:
    out = []
    if m.rel_dim < 0:
        out.append("rel_dim must be nonnegative")
    for i, d in m.components.items():
        if d < 1:
            out.append(f"component {i}: multiplicity {d} < 1")
        if not m.components_of([i]):
            out.append(f"component {i}: singleton stratum missing")
    seen = set()
    for s in m.strata:
        tag = f"stratum {fmt_set(s.J)}/{s.alpha}"
        if s.key in seen:
            out.append(f"{tag}: duplicate")
        seen.add(s.key)
        if not s.J:
            out.append(f"{tag}: empty index set")
            continue
        unknown = s.J - set(m.components)
        if unknown:
            out.append(f"{tag}: unknown components {fmt_set(unknown)}")
            continue
        if s.cls.field != m.field:
            out.append(f"{tag}: class over {s.cls.field}, model over {m.field}")
        want = m.rel_dim + 1 - len(s.J)
        if s.cls.dim != want:
            out.append(f"{tag}: dimension violation (class dim {s.cls.dim}, expected {want})")
        if len(s.J) == 1:
            continue
        if set(s.parents) != set(s.J):
            out.append(f"{tag}: parent map must be given for every j in J")
        for j, beta in s.parents.items():
            if (s.J - {j}, beta) not in m.index:
                out.append(f"{tag}: downward-closure violation (missing {fmt_set(s.J - {j})}/{beta})")
    if out:
        return out
    # parent maps commute
    for s in m.strata:
        for i, j in itertools.combinations(sorted(s.J), 2):
            if len(s.J) < 3:
                break
            a = m.index[(s.J - {i}, s.parents[i])].parents[j]
            b = m.index[(s.J - {j}, s.parents[j])].parents[i]
            if a != b:
                out.append(f"stratum {fmt_set(s.J)}/{s.alpha}: parent maps do not commute on {i},{j}")
    return out


def _require_valid(m: DualComplex) -> None:
    bad = validate(m)
    if bad:
        raise InvalidModelError(f"model {m.name!r} is invalid: " + "; ".join(bad))


def stratum_term(s: Stratum) -> BirClass:
    """``[D_J x A^{#J-1}]`` for one stratum."""
    return canonicalize(s.cls.times_affine(len(s.J) - 1))


def rho(m: DualComplex) -> BurnElement:
    _require_valid(m)
    return BurnElement.from_terms(m.field, [(stratum_term(s), (-1) ** (len(s.J) - 1)) for s in m.strata])


def rho_d(m: DualComplex, d: int) -> BurnElement:
    if d < 1:
        raise ValueError("d must be >= 1")
    _require_valid(m)
    return BurnElement.from_terms(
        m.field,
        [(stratum_term(s), (-1) ** (len(s.J) - 1)) for s in m.strata if m.mult(s.J) == d],
    )


def rho_hat(m: DualComplex) -> TPolynomial:
    _require_valid(m)
    return TPolynomial(m.field, {d: rho_d(m, d) for d in range(1, m.max_mult + 1)})


def specialize_rational_check(m: DualComplex, facts: FactsRegistry | None = None) -> bool:
    facts = facts or FactsRegistry()
    target = BurnElement.gen(BirClass.affine_space(m.field, m.rel_dim))
    return facts.equal(rho(m), target)


# ---------------------------------------------------------------------------
# blowups


@dataclass(frozen=True)
class CenterPiece:
    """Connected component ``beta`` of ``Z cap D_{J1}`` for a case (a) center ``Z``.

    ``container`` is the component of ``D_{J0 cup J1}`` containing it, ``parents``
    maps ``j in J1`` to the piece of ``Z cap D_{J1 - j}`` containing it.
    """

    J1: frozenset[str]
    alpha: str
    cls: BirClass
    container: str
    parents: Mapping[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class BlowupSpec:
    case: str
    J0: frozenset[str]
    alpha: str
    pieces: tuple[CenterPiece, ...] = ()
    new_id: str = "E"
    name: str = "Z"

    @property
    def center(self) -> CenterPiece | None:
        return next((p for p in self.pieces if not p.J1), None)


def blowup(m: DualComplex, s: BlowupSpec, name: str | None = None) -> DualComplex:
    """Dual complex of the blowup of the model along the center described by ``s``."""
    _require_valid(m)
    if s.case not in ("a", "b"):
        raise BlowupError(f"unknown blowup case {s.case!r}")
    if (s.J0, s.alpha) not in m.index:
        raise BlowupError(f"center stratum {fmt_set(s.J0)}/{s.alpha} is not realized")
    if s.new_id in m.components:
        raise BlowupError(f"component id {s.new_id!r} already used")
    # labels are materialized so that old strata keep them in the new model
    old = [replace(st, label=m.label_of(st)) for st in m.strata]
    new_mult = sum(m.components[j] for j in s.J0)
    comps = dict(m.components)
    comps[s.new_id] = new_mult
    if s.case == "a":
        strata = old + _case_a(m, s)
    else:
        strata = _case_b(m, s, old)
    out = DualComplex.build(name or f"{m.name}+{s.name}", m.field, m.rel_dim, comps, strata)
    bad = validate(out)
    if bad:
        raise BlowupError("blowup spec inconsistent with model: " + "; ".join(bad))
    return out


def _case_a(m: DualComplex, s: BlowupSpec) -> list[Stratum]:
    center = s.center
    if center is None:
        raise BlowupError("case (a) needs the center itself as a piece with empty J1")
    if center.container != s.alpha:
        raise BlowupError("center piece must lie in the chosen component of D_J0")
    n = m.rel_dim
    if center.cls.dim >= n + 1 - len(s.J0):
        raise BlowupError("case (a) requires dim(Z) < dim(D_J0)")
    if center.cls.dim > n - 1:
        raise BlowupError("center has codimension < 2 in the model")
    iz = s.new_id
    pieces = {(p.J1, p.alpha): p for p in s.pieces}
    out = []
    for p in s.pieces:
        if p.J1 & s.J0:
            raise BlowupError("piece index sets must avoid J0")
        if p.cls.dim != center.cls.dim - len(p.J1):
            raise BlowupError(f"piece {fmt_set(p.J1)}/{p.alpha}: wrong dimension")
        full = s.J0 | p.J1
        if (full, p.container) not in m.index:
            raise BlowupError(f"piece {fmt_set(p.J1)}/{p.alpha}: container not realized")
        if m.descend(full, p.container, s.J0) != s.alpha:
            raise BlowupError(f"piece {fmt_set(p.J1)}/{p.alpha}: container not in the center component")
        for j, beta in p.parents.items():
            par = pieces.get((p.J1 - {j}, beta))
            if par is None:
                raise BlowupError(f"piece {fmt_set(p.J1)}/{p.alpha}: missing parent piece")
            if m.descend(full, p.container, full - {j}) != par.container:
                raise BlowupError(f"piece {fmt_set(p.J1)}/{p.alpha}: containers inconsistent")
        if set(p.parents) != set(p.J1):
            raise BlowupError(f"piece {fmt_set(p.J1)}/{p.alpha}: parent map incomplete")
        label = f"{s.name}/{fmt_set(p.J1)}/{p.alpha}"
        for k in range(len(s.J0) + 1):
            for J0p in itertools.combinations(sorted(s.J0), k):
                J0p = frozenset(J0p)
                Jt = J0p | p.J1 | {iz}
                pad = n + 1 - len(Jt) - p.cls.dim
                parents = {}
                base = J0p | p.J1
                if base:
                    parents[iz] = m.descend(s.J0 | p.J1, p.container, base)
                for j in p.J1:
                    parents[j] = p.parents[j]
                for j in J0p:
                    parents[j] = p.alpha
                out.append(Stratum(Jt, p.alpha, canonicalize(p.cls.times_affine(pad)), parents, label))
    return out


def _case_b(m: DualComplex, s: BlowupSpec, old: list[Stratum]) -> list[Stratum]:
    if len(s.J0) < 2:
        raise BlowupError("case (b) requires #J0 >= 2")
    iz = s.new_id

    def in_center(st: Stratum) -> bool:
        return s.J0 <= st.J and m.descend(st.J, st.alpha, s.J0) == s.alpha

    kept = [st for st in old if not in_center(st)]
    out = list(kept)
    labels = {st.key: st.label for st in old}
    for k in range(len(m.components)):
        for J in _subsets_not_containing(sorted(m.components), s.J0, k):
            full = J | s.J0
            for st in m.components_of(full):
                if not in_center(st):
                    continue
                gamma = st.alpha
                pad = len(full) - len(J) - 1
                parents = {}
                if J:
                    parents[iz] = m.descend(full, gamma, J)
                for j in J:
                    parents[j] = gamma if j in s.J0 else st.parents[j]
                out.append(
                    Stratum(J | {iz}, gamma, canonicalize(st.cls.times_affine(pad)), parents, labels[st.key])
                )
    return out


def _subsets_not_containing(ids: list[str], J0: frozenset[str], k: int):
    for J in itertools.combinations(ids, k):
        J = frozenset(J)
        if not J0 <= J:
            yield J
