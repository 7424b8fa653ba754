from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burnside.core import Atom, BirClass, BurnElement, FactsRegistry, FieldLabel
from burnside.fixtures import (
    K_BASE,
    _atom,
    isolated_singularity_fixture,
    node_curve_fixture,
    odp_degeneration_fixture,
    odp_fixture,
    smooth_degeneration_fixture,
    smooth_model,
    smooth_pair_fixture,
    unibranched_curve_fixture,
)
from burnside.scheme import (
    InvalidPairError,
    LinkageError,
    Morphism,
    PairCenterPiece,
    PairStratum,
    SchemeBurnElement,
    SchemeError,
    SncPair,
    SupportPoint,
    SupportScheme,
    blowup_pair,
    boundary,
    compose,
    is_B_rational,
    pushforward,
    singular_specialization,
    smooth_locus_class,
    validate_pair,
)
from burnside.snc import DualComplex, Stratum, rho

k = K_BASE


def residue(name, point):
    return FieldLabel(name, "residue", point=point)


# a chain of support schemes S2 -> S1 -> S0 with nontrivial fibers
F = {p: residue(f"k({p})", p) for p in ("x", "y", "u", "v", "w")}
S2 = SupportScheme.of("S2", [SupportPoint("x", F["x"], 2), SupportPoint("y", F["y"], 1), SupportPoint("p", k, 0)])
S1 = SupportScheme.of("S1", [SupportPoint("u", F["u"], 1), SupportPoint("q", k, 0)])
S0 = SupportScheme.of("S0", [SupportPoint("b", k, 0)])
H = Morphism("h", S2, S1, {"x": "u", "y": "u", "p": "q"}, {"y": BirClass.point(F["u"])})
G = Morphism.collapse(S1, S0, {"u": _atom("U", k, 1)})


@st.composite
def elements(draw, scheme: SupportScheme):
    terms = []
    for _ in range(draw(st.integers(0, 4))):
        pt = draw(st.sampled_from(scheme.points))
        atoms = draw(st.lists(st.sampled_from(["A", "B"]), max_size=1))
        aff = draw(st.integers(0, 2))
        c = BirClass.of(pt.field, [Atom(a, pt.field, 1) for a in atoms], aff)
        terms.append(((pt.id, c), draw(st.integers(-3, 3))))
    return SchemeBurnElement.from_terms(scheme, terms)


# --- pushforward -------------------------------------------------------------


@given(elements(S2))
def test_identity_pushforward(x):
    assert pushforward(Morphism.identity(S2), x) == x


@given(elements(S1))
def test_collapse_moves_everything_to_b(x):
    y = pushforward(G, x)
    assert y.support <= {"b"}
    assert {y.degree_of(t) for t, _ in y.terms} <= x.degrees


@settings(max_examples=200)
@given(elements(S2), elements(S2))
def test_pushforward_additive_and_graded(x, y):
    assert pushforward(H, x + y) == pushforward(H, x) + pushforward(H, y)
    assert pushforward(H, x * 3) == pushforward(H, x) * 3
    for (pid, c), _ in x.terms:
        z = pushforward(H, SchemeBurnElement.gen(S2, pid, c))
        assert z.degrees == {x.degree_of((pid, c))} or not z


@settings(max_examples=200)
@given(elements(S2))
def test_pushforward_functorial(x):
    assert pushforward(compose(G, H), x) == pushforward(G, pushforward(H, x))


def test_undeclared_morphism():
    with pytest.raises(SchemeError):
        pushforward(G, SchemeBurnElement.zero(S2))
    with pytest.raises(SchemeError):
        compose(H, G)
    with pytest.raises(SchemeError):
        SchemeBurnElement.gen(S1, "q", BirClass.point(F["u"]))


def test_default_fibers():
    assert H.fiber("p") == BirClass.point(k)
    f = H.fiber("x")
    assert f.dim == 1 and f.field == F["u"]


# --- boundary ----------------------------------------------------------------


def test_smooth_boundary():
    p = smooth_pair_fixture().pair
    assert boundary(p) == smooth_locus_class(p)
    assert is_B_rational(p).verdict


def test_isolated_singularity_three_terms():
    fx = isolated_singularity_fixture(3)
    p = fx.pair
    b = boundary(p)
    Z = p.target
    want = (
        SchemeBurnElement.gen(Z, "z", BirClass.affine_space(k, 2))
        + smooth_locus_class(p)
        - SchemeBurnElement.gen(Z, "z", _atom("EZ", k, 1).times_affine(1))
    )
    assert b == want
    assert str(b) == "+[pt]@eta -[EZ]*A^1@z +[A^2]@z"
    assert b.is_homogeneous(p.ambient_dim - 1)
    v = is_B_rational(p, fx.facts)
    assert v.verdict and not v.witness


@pytest.mark.parametrize("dim_x", [2, 3, 4])
def test_isolated_singularity_any_dimension(dim_x):
    fx = isolated_singularity_fixture(dim_x)
    assert is_B_rational(fx.pair, fx.facts).verdict
    assert boundary(fx.pair).is_homogeneous(dim_x - 1)


def test_two_components_meeting():
    kd1, kd2 = residue("k(D1)", "d1"), residue("k(D2)", "d2")
    scheme = SupportScheme.of(
        "Z", [SupportPoint("d1", kd1, 1), SupportPoint("d2", kd2, 1), SupportPoint("c", k, 0)]
    )
    strata = [
        PairStratum(frozenset({"D1"}), "0", BirClass.point(kd1), "d1"),
        PairStratum(frozenset({"D2"}), "0", BirClass.point(kd2), "d2"),
        PairStratum(frozenset({"D1", "D2"}), "0", BirClass.point(k), "c", {"D1": "0", "D2": "0"}),
    ]
    p = SncPair.build("two", 2, scheme, strata, "d1")
    assert str(boundary(p)) == "-[A^1]@c +[pt]@d1 +[pt]@d2"


@pytest.mark.parametrize(
    "fixture",
    [isolated_singularity_fixture, odp_fixture, smooth_pair_fixture, node_curve_fixture],
    ids=lambda f: f.__name__,
)
def test_pair_fixture_verdicts(fixture):
    fx = fixture()
    assert is_B_rational(fx.pair, fx.facts).verdict == fx.expected
    assert validate_pair(fx.pair) == []


def test_unibranched_curve():
    p, expected = unibranched_curve_fixture()
    assert is_B_rational(p).verdict is expected is True
    assert boundary(p) == smooth_locus_class(p)


def test_node_witness():
    fx = node_curve_fixture()
    v = is_B_rational(fx.pair, fx.facts)
    assert not v.verdict
    assert v.witness.support == {"z"} and v.witness_on_singular_locus


@pytest.mark.parametrize("fixture", [isolated_singularity_fixture, odp_fixture], ids=lambda f: f.__name__)
def test_withheld_fact_negative_control(fixture):
    fx = fixture(with_fact=False)
    v = is_B_rational(fx.pair, fx.facts)
    assert not v.verdict and v.witness
    assert v.witness.support == {"z"} and v.witness_on_singular_locus


def test_facts_apply_per_point():
    # a fact over k must not rewrite a class sitting at a point with another residue field
    kz = residue("k(Z)", "eta")
    scheme = SupportScheme.of("Z", [SupportPoint("eta", kz, 1), SupportPoint("z", k, 0)])
    x = SchemeBurnElement.gen(scheme, "eta", _atom("Q", kz, 1)) + SchemeBurnElement.gen(scheme, "z", BirClass.point(k))
    facts = FactsRegistry.of((_atom("Q", k, 1), BirClass.affine_space(k, 1)))
    assert x.normalize(facts) == x


def test_invalid_pair():
    p = smooth_pair_fixture().pair
    bad = SncPair.build("bad", 3, p.scheme, p.strata, "eta")
    assert validate_pair(bad)
    with pytest.raises(InvalidPairError):
        boundary(bad)


# --- blowups of pairs --------------------------------------------------------


@pytest.mark.parametrize(
    "pair,J0",
    [
        (isolated_singularity_fixture().pair, {"E", "Z'"}),
        (unibranched_curve_fixture()[0], {"E3", "Z'"}),
        (unibranched_curve_fixture()[0], {"E1", "E3"}),
        (node_curve_fixture().pair, {"E", "Z'"}),
    ],
    ids=["isolated", "cusp-3z", "cusp-13", "node"],
)
def test_stratum_center_keeps_boundary(pair, J0):
    alpha = pair.components_of(J0)[0].alpha
    q = blowup_pair(pair, J0, alpha, "F")
    assert boundary(q) == boundary(pair)
    assert "F" in q.components


def test_point_center_keeps_boundary():
    kz = residue("k(Z)", "eta")
    scheme = SupportScheme.of("Z", [SupportPoint("eta", kz, 1), SupportPoint("q", k, 0)])
    p = SncPair.build("curve", 2, scheme, [PairStratum(frozenset({"Z"}), "0", BirClass.point(kz), "eta")], "eta")
    piece = PairCenterPiece(frozenset(), "0", BirClass.point(k), "q", "0")
    b = blowup_pair(p, {"Z"}, "0", "E", [piece])
    assert b.index[(frozenset({"E"}), "0")].cls == BirClass.affine_space(k, 1)
    assert boundary(b) == boundary(p)


def test_blowup_pair_errors():
    p = smooth_pair_fixture().pair
    with pytest.raises(InvalidPairError):
        blowup_pair(p, {"Z"}, "0")
    with pytest.raises(InvalidPairError):
        blowup_pair(p, {"W"}, "0")


# --- specialization through a singular fiber ---------------------------------


def test_odp_degeneration_pipeline():
    fx = odp_degeneration_fixture(2)
    res = singular_specialization(fx.pair, fx.model, fx.generic_class, fx.collapse, fx.facts)
    kb = fx.model.field
    assert res.verdict and res.b_rational.verdict and res.generic_rational
    assert res.fiber_class == BurnElement.gen(BirClass.affine_space(kb, 2))
    assert res.pushed_boundary == rho(fx.model)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_smooth_degeneration(n):
    fx = smooth_degeneration_fixture(n)
    res = singular_specialization(fx.pair, fx.model, fx.generic_class, fx.collapse, fx.facts)
    assert res.verdict and res.fiber_class == BurnElement.gen(BirClass.affine_space(fx.model.field, n))


def test_withheld_quadric_fact():
    fx = odp_degeneration_fixture(2, with_fact=False)
    res = singular_specialization(fx.pair, fx.model, fx.generic_class, fx.collapse, fx.facts)
    assert not res.verdict and res.fiber_class is None
    w = res.b_rational.witness
    assert w and w.support == {"z"}


def test_irrational_generic_fiber():
    fx = odp_degeneration_fixture(2, rational_generic=False)
    res = singular_specialization(fx.pair, fx.model, fx.generic_class, fx.collapse, fx.facts)
    assert res.b_rational.verdict and not res.generic_rational and not res.verdict


def test_linkage_checked():
    fx = odp_degeneration_fixture(2)
    other = smooth_degeneration_fixture(2)
    kb = fx.model.field
    wrong = DualComplex.build("wrong", kb, 2, {"1": 1}, [Stratum(frozenset({"1"}), "0", _atom("Y", kb, 2))])
    with pytest.raises(LinkageError):
        singular_specialization(fx.pair, wrong, fx.generic_class, fx.collapse, fx.facts)
    with pytest.raises(LinkageError):
        singular_specialization(fx.pair, smooth_model(2), fx.generic_class, fx.collapse, fx.facts)
    with pytest.raises(LinkageError):
        singular_specialization(fx.pair, fx.model, fx.generic_class, other.collapse, fx.facts)
