"""Worked pairs and degenerations used by the tests, the acceptance suite and the CLI."""

from __future__ import annotations

from dataclasses import dataclass

from .core import Atom, BirClass, FactsRegistry, FieldLabel
from .scheme import Morphism, PairStratum, SncPair, SupportPoint, SupportScheme
from .snc import DualComplex, Stratum

K_BASE = FieldLabel("k")


def _residue(name: str, point: str) -> FieldLabel:
    return FieldLabel(name, "residue", point=point)


def _atom(name: str, field: FieldLabel, dim: int) -> BirClass:
    return BirClass(field, (Atom(name, field, dim),))


def _pt(field: FieldLabel) -> BirClass:
    return BirClass.point(field)


def _A(field: FieldLabel, n: int) -> BirClass:
    return BirClass.affine_space(field, n)


@dataclass(frozen=True)
class PairFixture:
    pair: SncPair
    facts: FactsRegistry
    expected: bool


def smooth_pair_fixture(dim_x: int = 2) -> PairFixture:
    """``Z`` smooth and irreducible: a single component."""
    kz = _residue("k(Z)", "eta")
    scheme = SupportScheme.of("Z", [SupportPoint("eta", kz, dim_x - 1)])
    strata = [PairStratum(frozenset({"Z"}), "0", _pt(kz), "eta")]
    return PairFixture(SncPair.build("smooth", dim_x, scheme, strata, "eta"), FactsRegistry(), True)


def _cone_pair(dim_x: int, link: str, facts: FactsRegistry, expected: bool, name: str) -> PairFixture:
    """Divisor with one singular point ``z`` resolved by a single point blowup.

    ``link`` names the class of ``E cap Z'`` over ``k`` (dimension ``dim_x - 2``).
    """
    k = K_BASE
    kz = _residue("k(Z)", "eta")
    ke = _residue("k(E)", "e")
    kw = _residue("k(E.Z')", "w")
    target = SupportScheme.of("Z", [SupportPoint("eta", kz, dim_x - 1), SupportPoint("z", k, 0)])
    source = SupportScheme.of(
        "Z~",
        [SupportPoint("eta", kz, dim_x - 1), SupportPoint("e", ke, dim_x - 1), SupportPoint("w", kw, dim_x - 2)],
    )
    beta = Morphism(
        "beta",
        source,
        target,
        {"eta": "eta", "e": "z", "w": "z"},
        {"e": _A(k, dim_x - 1), "w": _atom(link, k, dim_x - 2)},
    )
    strata = [
        PairStratum(frozenset({"E"}), "0", _pt(ke), "e"),
        PairStratum(frozenset({"Z'"}), "0", _pt(kz), "eta"),
        PairStratum(frozenset({"E", "Z'"}), "0", _pt(kw), "w", {"E": "0", "Z'": "0"}),
    ]
    return PairFixture(SncPair.build(name, dim_x, source, strata, "eta", {"z"}, beta), facts, expected)


def isolated_singularity_fixture(dim_x: int = 3, with_fact: bool = True) -> PairFixture:
    """Blowup of an isolated singular point; the cone over ``E cap Z'`` is rational when ``with_fact``."""
    k = K_BASE
    facts = FactsRegistry()
    if with_fact:
        facts = FactsRegistry.of((_atom("EZ", k, dim_x - 2).times_affine(1), _A(k, dim_x - 1)))
    return _cone_pair(dim_x, "EZ", facts, with_fact, "isolated")


def odp_fixture(dim_x: int = 3, with_fact: bool = True) -> PairFixture:
    """Ordinary double point: ``E cap Z'`` is a smooth quadric, rational when it has a rational point."""
    k = K_BASE
    facts = FactsRegistry()
    if with_fact:
        facts = FactsRegistry.of((_atom("Q", k, dim_x - 2), _A(k, dim_x - 2)))
    return _cone_pair(dim_x, "Q", facts, with_fact, "odp")


def unibranched_curve_fixture() -> tuple[SncPair, bool]:
    """Cusp ``y^2 = x^3`` in the plane: three blowups, ``Z'`` meets only the last exceptional curve."""
    k = K_BASE
    kz = _residue("k(Z)", "eta")
    target = SupportScheme.of("Z", [SupportPoint("eta", kz, 1), SupportPoint("z", k, 0)])
    points = [SupportPoint("eta", kz, 1)]
    points += [SupportPoint(f"e{i}", _residue(f"k(E{i})", f"e{i}"), 1) for i in (1, 2, 3)]
    points += [SupportPoint(p, k, 0) for p in ("p13", "p23", "p3z")]
    source = SupportScheme.of("Z~", points)
    mapping = {p.id: ("eta" if p.id == "eta" else "z") for p in points}
    ext = {f"e{i}": _A(k, 1) for i in (1, 2, 3)}
    beta = Morphism("beta", source, target, mapping, ext)
    strata = [PairStratum(frozenset({"Z'"}), "0", _pt(kz), "eta")]
    for i in (1, 2, 3):
        strata.append(PairStratum(frozenset({f"E{i}"}), "0", _pt(source[f"e{i}"].field), f"e{i}"))
    for J, p in ((("E1", "E3"), "p13"), (("E2", "E3"), "p23"), (("E3", "Z'"), "p3z")):
        strata.append(PairStratum(frozenset(J), "0", _pt(k), p, {j: "0" for j in J}))
    return SncPair.build("cusp", 2, source, strata, "eta", {"z"}, beta), True


def node_curve_fixture() -> PairFixture:
    """Negative control: a node, where ``Z'`` meets ``E`` in two rational points."""
    k = K_BASE
    kz = _residue("k(Z)", "eta")
    ke = _residue("k(E)", "e")
    target = SupportScheme.of("Z", [SupportPoint("eta", kz, 1), SupportPoint("z", k, 0)])
    source = SupportScheme.of(
        "Z~", [SupportPoint("eta", kz, 1), SupportPoint("e", ke, 1), SupportPoint("q1", k, 0), SupportPoint("q2", k, 0)]
    )
    beta = Morphism("beta", source, target, {"eta": "eta", "e": "z", "q1": "z", "q2": "z"}, {"e": _A(k, 1)})
    strata = [
        PairStratum(frozenset({"E"}), "0", _pt(ke), "e"),
        PairStratum(frozenset({"Z'"}), "0", _pt(kz), "eta"),
        PairStratum(frozenset({"E", "Z'"}), "1", _pt(k), "q1", {"E": "0", "Z'": "0"}),
        PairStratum(frozenset({"E", "Z'"}), "2", _pt(k), "q2", {"E": "0", "Z'": "0"}),
    ]
    return PairFixture(SncPair.build("node", 2, source, strata, "eta", {"z"}, beta), FactsRegistry(), False)


@dataclass(frozen=True)
class DegenerationFixture:
    """A family over a curve whose special fiber has one ordinary double point."""

    pair: SncPair
    model: DualComplex
    generic_class: BirClass
    collapse: Morphism
    facts: FactsRegistry


def odp_degeneration_fixture(n: int = 2, rational_generic: bool = True, with_fact: bool = True) -> DegenerationFixture:
    """Special fiber ``X_b`` of dimension ``n`` with an ODP at ``z``; one blowup resolves it.

    The resolved special fiber is ``Z' + 2E`` with ``E = P^n`` and ``E cap Z'`` a quadric ``Q``.
    """
    kb = _residue("kappa_b", "b")
    big_k = FieldLabel("K")
    kx = _residue("k(X_b)", "eta")
    scheme = SupportScheme.of("X_b", [SupportPoint("eta", kx, n), SupportPoint("z", kb, 0)])
    strata = [
        PairStratum(frozenset({"Z'"}), "0", _pt(kx), "eta"),
        PairStratum(frozenset({"E"}), "0", _A(kb, n), "z"),
        PairStratum(frozenset({"E", "Z'"}), "0", _atom("Q", kb, n - 1), "z", {"E": "0", "Z'": "0"}),
    ]
    pair = SncPair.build("family", n + 1, scheme, strata, "eta", {"z"})
    b = SupportScheme.of("b", [SupportPoint("b", kb, 0)])
    collapse = Morphism.collapse(scheme, b, {"eta": _atom("X_b", kb, n)})
    model = DualComplex.build(
        "family",
        kb,
        n,
        {"Z'": 1, "E": 2},
        [
            Stratum(frozenset({"Z'"}), "0", _atom("X_b", kb, n)),
            Stratum(frozenset({"E"}), "0", _A(kb, n)),
            Stratum(frozenset({"E", "Z'"}), "0", _atom("Q", kb, n - 1), {"E": "0", "Z'": "0"}),
        ],
    )
    generic = _A(big_k, n) if rational_generic else _atom("X", big_k, n)
    facts = FactsRegistry.of((_atom("Q", kb, n - 1), _A(kb, n - 1))) if with_fact else FactsRegistry()
    return DegenerationFixture(pair, model, generic, collapse, facts)


def smooth_degeneration_fixture(n: int = 2) -> DegenerationFixture:
    kb = _residue("kappa_b", "b")
    kx = _residue("k(X_b)", "eta")
    scheme = SupportScheme.of("X_b", [SupportPoint("eta", kx, n)])
    pair = SncPair.build("smooth-family", n + 1, scheme, [PairStratum(frozenset({"X_b"}), "0", _pt(kx), "eta")], "eta")
    b = SupportScheme.of("b", [SupportPoint("b", kb, 0)])
    collapse = Morphism.collapse(scheme, b, {"eta": _atom("X_b", kb, n)})
    model = DualComplex.build(
        "smooth-family", kb, n, {"X_b": 1}, [Stratum(frozenset({"X_b"}), "0", _atom("X_b", kb, n))]
    )
    return DegenerationFixture(pair, model, _A(FieldLabel("K"), n), collapse, FactsRegistry())


# ---------------------------------------------------------------------------
# models over k


def _stratum(J: str, cls: BirClass, alpha: str = "0", parents: dict | None = None) -> Stratum:
    ids = frozenset(J.split(","))
    if parents is None:
        parents = {j: "0" for j in ids} if len(ids) > 1 else {}
    return Stratum(ids, alpha, cls, parents)


def smooth_model(n: int = 1, cls: BirClass | None = None, d: int = 1, name: str = "smooth") -> DualComplex:
    k = K_BASE
    cls = cls if cls is not None else _atom("X0", k, n)
    return DualComplex.build(name, k, n, {"1": d}, [_stratum("1", cls)])


def two_component_model(d1: int = 1, d2: int = 1, n: int = 1, name: str = "two") -> DualComplex:
    """``D1 + D2`` meeting along a single stratum ``D12``."""
    k = K_BASE
    return DualComplex.build(
        name,
        k,
        n,
        {"1": d1, "2": d2},
        [_stratum("1", _atom("D1", k, n)), _stratum("2", _atom("D2", k, n)), _stratum("1,2", _atom("D12", k, n - 1))],
    )


def chain_model(n: int = 1) -> DualComplex:
    k = K_BASE
    strata = [_stratum(str(i), _atom(f"D{i}", k, n)) for i in (1, 2, 3)]
    strata += [_stratum("1,2", _atom("D12", k, n - 1)), _stratum("2,3", _atom("D23", k, n - 1))]
    return DualComplex.build("chain", k, n, {"1": 1, "2": 1, "3": 1}, strata)


def triangle_model(mults=(1, 2, 3)) -> DualComplex:
    """Three surfaces meeting pairwise in curves and all together in a point."""
    k = K_BASE
    strata = [_stratum(str(i), _atom(f"S{i}", k, 2)) for i in (1, 2, 3)]
    strata += [_stratum(J, _atom("C" + J.replace(",", ""), k, 1)) for J in ("1,2", "1,3", "2,3")]
    strata.append(_stratum("1,2,3", _pt(k)))
    return DualComplex.build("triangle", k, 2, dict(zip("123", mults)), strata)


def double_intersection_model() -> DualComplex:
    """Two curves meeting in two points (two components of ``D12``)."""
    k = K_BASE
    strata = [_stratum("1", _atom("D1", k, 1)), _stratum("2", _atom("D2", k, 1))]
    strata += [_stratum("1,2", _pt(k), "0"), _stratum("1,2", _pt(k), "1")]
    return DualComplex.build("double", k, 1, {"1": 2, "2": 2}, strata)


def telescoping_model(n: int = 1) -> tuple[DualComplex, FactsRegistry]:
    """Two components whose expansion reduces to ``[A^n]`` under two declared facts."""
    k = K_BASE
    m = two_component_model(1, 1, n, name="telescoping")
    facts = FactsRegistry.of(
        (_atom("D1", k, n), _A(k, n)),
        (_atom("D2", k, n), _atom("D12", k, n - 1).times_affine(1)),
    )
    return m, facts


def corpus_models() -> list[DualComplex]:
    return [
        smooth_model(),
        smooth_model(2, _A(K_BASE, 2), name="rational"),
        two_component_model(),
        two_component_model(2, 3, name="mult23"),
        chain_model(),
        triangle_model(),
        double_intersection_model(),
        telescoping_model()[0],
    ]


def corpus_blowups() -> dict[str, tuple[str, "BlowupSpec"]]:
    from .snc import BlowupSpec, CenterPiece

    k = K_BASE
    return {
        "mult23-b": ("mult23", BlowupSpec("b", frozenset({"1", "2"}), "0", (), "E", "P")),
        "two-a": (
            "two",
            BlowupSpec("a", frozenset({"1"}), "0", (CenterPiece(frozenset(), "0", _pt(k), "0"),), "E", "Q"),
        ),
        "triangle-b": ("triangle", BlowupSpec("b", frozenset({"1", "2", "3"}), "0", (), "E", "P")),
    }


def _prefixed(p: SncPair) -> SncPair:
    """The same pair with its schemes and push renamed after the pair, so fixtures can share a file."""

    def scheme(x: SupportScheme) -> SupportScheme:
        return SupportScheme(f"{p.name}:{x.name}", x.points)

    push = None
    if p.push is not None:
        g = p.push
        push = Morphism(f"{p.name}:{g.name}", scheme(g.source), scheme(g.target), g.mapping, g.ext)
    return SncPair.build(p.name, p.ambient_dim, scheme(p.scheme), p.strata, p.generic, p.singular, push)


def corpus_document():
    """Every fixture of this module as one model-file document."""
    from .modelfile import Degeneration, Document

    iso = isolated_singularity_fixture()
    odp = odp_fixture()
    cusp, _ = unibranched_curve_fixture()
    node = node_curve_fixture()
    smooth = smooth_pair_fixture()
    fam = odp_degeneration_fixture()
    tele_facts = telescoping_model()[1]
    facts = iso.facts + odp.facts + fam.facts + tele_facts
    pairs = [_prefixed(p) for p in (smooth.pair, iso.pair, odp.pair, cusp, node.pair)] + [fam.pair]
    degen = {"family": Degeneration("family", "family", fam.collapse.name, fam.generic_class)}
    return Document.collect(
        facts=facts,
        models=corpus_models() + [fam.model],
        blowups=corpus_blowups(),
        morphisms=[fam.collapse],
        pairs=pairs,
        degenerations=degen,
    )
