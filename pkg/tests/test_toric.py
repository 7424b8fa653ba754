from __future__ import annotations

import itertools
import random
from functools import reduce
from math import gcd, lcm

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from burnside.core import BirClass
from burnside.equivariant import equiv_mul, rho_mu
from burnside.fixtures import K_BASE, _atom, smooth_model, two_component_model
from burnside.lattice import is_primitive, lattice_index
from burnside.snc import rho, validate
from burnside.toric import (
    ConeSpec,
    Fan,
    ToricError,
    build_fan,
    build_fan_alt,
    center_ray,
    certify,
    cone_index,
    euler_interior,
    extreme_rays,
    permute_vector,
    product_model,
    ray_multiplicity,
    verify_multiplicativity,
)
from generators import random_model

k = K_BASE


def _scan_extreme_rays(spec: ConeSpec, bound: int = 7) -> set[tuple[int, ...]]:
    """Oracle: primitive lattice points of Lambda with small coordinates that are not
    positive combinations of two other such points with smaller support."""
    pts = [v for v in itertools.product(range(bound), repeat=spec.ambient) if any(v) and spec.contains(v)]
    prim = [v for v in pts if is_primitive(v)]
    # a ray of a pointed polyhedral cone given by coordinate inequalities is extreme
    # exactly when its support is minimal among nonzero points of the cone
    supp = lambda v: frozenset(i for i, x in enumerate(v) if x)
    supports = {supp(v) for v in pts}
    return {v for v in prim if not any(s < supp(v) for s in supports)}


@pytest.mark.parametrize(
    "a,ap,want",
    [((2,), (3,), {(3, 2)}), ((1, 1), (1,), {(1, 0, 1), (0, 1, 1)}), ((1,), (1,), {(1, 1)})],
)
def test_extreme_ray_examples(a, ap, want):
    spec = ConeSpec(a, ap)
    assert set(extreme_rays(spec)) == want == _scan_extreme_rays(spec)


@settings(max_examples=60)
@given(st.lists(st.integers(1, 4), min_size=1, max_size=2), st.lists(st.integers(1, 4), min_size=1, max_size=2))
def test_extreme_rays_match_scan(a, ap):
    spec = ConeSpec(tuple(a), tuple(ap))
    assert set(extreme_rays(spec)) == _scan_extreme_rays(spec, 9)


def test_spec_validation():
    with pytest.raises(ToricError):
        ConeSpec((), (1,))
    with pytest.raises(ToricError):
        ConeSpec((0,), (1,))
    with pytest.raises(ToricError):
        ray_multiplicity((1, 2), ConeSpec((1,), (1,)))


def test_fan_example_2_11():
    spec = ConeSpec((2,), (1, 1))
    assert cone_index(frozenset(extreme_rays(spec))) == 2
    fan = build_fan(spec)
    assert set(fan.rays) == {(1, 2, 0), (1, 0, 2), (1, 1, 1)}
    assert len(fan.maximal) == 2
    assert all(c.ok for c in [certify(fan, spec)])
    assert euler_interior(fan) == 1
    assert ray_multiplicity((1, 1, 1), spec) == 2


def test_fan_example_11_1():
    spec = ConeSpec((1, 1), (1,))
    fan = build_fan(spec)
    assert set(fan.rays) == {(1, 0, 1), (0, 1, 1)}
    assert fan.maximal == ((0, 1),)
    assert euler_interior(fan) == 1
    assert ray_multiplicity((1, 0, 1), spec) == 1


def test_fan_example_single_ray():
    spec = ConeSpec((2,), (3,))
    fan = build_fan(spec)
    assert fan.rays == ((3, 2),) and fan.maximal == ((0,),)
    assert ray_multiplicity((3, 2), spec) == 6
    assert euler_interior(build_fan(ConeSpec((1,), (1,)))) == -1


def test_smoothness_negative_control():
    spec = ConeSpec((2,), (1, 1))
    bad = Fan.from_cones(spec, [frozenset({(1, 2, 0), (1, 0, 2)})])
    cert = certify(bad, spec)
    assert not cert.smooth and not cert.ok


def test_equivariance_negative_control():
    # one diagonal of the square cone Lambda(1,1; 1,1): smooth and supported, not symmetric
    spec = ConeSpec((1, 1), (1, 1))
    r = {"a": (1, 0, 1, 0), "b": (1, 0, 0, 1), "c": (0, 1, 1, 0), "d": (0, 1, 0, 1)}
    diag = Fan.from_cones(spec, [frozenset({r["a"], r["b"], r["d"]}), frozenset({r["a"], r["c"], r["d"]})])
    cert = certify(diag, spec)
    assert cert.smooth and cert.supported
    assert not cert.equivariant


def test_support_negative_control():
    spec = ConeSpec((2,), (1, 1))
    half = Fan.from_cones(spec, [frozenset({(1, 2, 0), (1, 1, 1)})])
    assert not certify(half, spec).supported


def test_permuted_spec_is_equivariant():
    f = build_fan(ConeSpec((1, 2), (1,)))
    g = build_fan(ConeSpec((2, 1), (1,)))
    swap = (1, 0, 2)
    assert {frozenset(permute_vector(v, swap) for v in c) for c in f.maximal_sets} == set(g.maximal_sets)
    assert certify(f, f.spec).equivariant


def test_build_is_deterministic():
    spec = ConeSpec((1, 2), (2, 3))
    assert build_fan(spec) == build_fan(ConeSpec((1, 2), (2, 3)))
    assert build_fan(spec).dump() == build_fan(spec).dump()


def test_center_ray_is_invariant_and_interior():
    for spec in [ConeSpec((1, 1, 2), (2, 2)), ConeSpec((3,), (1, 2)), ConeSpec((4, 4), (4, 4, 4))]:
        c = center_ray(spec)
        assert spec.contains(c) and min(c) > 0 and is_primitive(c)


def _grid(max_len: int, max_entry: int):
    vecs = [v for r in range(1, max_len + 1) for v in itertools.combinations_with_replacement(range(1, max_entry + 1), r)]
    return [ConeSpec(a, b) for a in vecs for b in vecs]


def _check_fan(spec: ConeSpec, builder=build_fan):
    fan = builder(spec)
    cert = certify(fan, spec, builder)
    assert cert.ok, cert.failures[:3]
    assert euler_interior(fan) == (-1) ** spec.dim
    want = lcm(reduce(gcd, spec.a), reduce(gcd, spec.a_prime))
    for c in fan.maximal:
        vs = fan.vectors(c)
        assert all(spec.contains(v) and is_primitive(v) for v in vs)
        assert reduce(gcd, [ray_multiplicity(v, spec) for v in vs]) == want
        assert lattice_index(vs) == 1


@pytest.mark.parametrize("spec", _grid(2, 3), ids=str)
def test_small_grid(spec):
    _check_fan(spec)


ALT_GRID = [ConeSpec(a, b) for a, b in [((1, 2), (1, 2)), ((2, 2), (1, 3)), ((1, 1, 2), (2, 3)), ((1, 2, 3), (1, 2)),
                                        ((2, 3), (2, 3)), ((1, 1), (1, 1, 1)), ((1, 2, 2), (1, 4)),
                                        ((1, 1), (3, 4)), ((1, 1), (2, 2, 3))]]


@pytest.mark.parametrize("spec", ALT_GRID, ids=str)
def test_alternative_family_certifies(spec):
    _check_fan(spec, build_fan_alt)


def test_alternative_family_differs_somewhere():
    s = ConeSpec((1, 1), (3, 4))
    assert len(build_fan(s).maximal) == 34 and len(build_fan_alt(s).maximal) == 30


def test_lower_interior_cones_can_exceed_lcm():
    # a single interior ray of Lambda(1,2; 1,2) has multiplicity 3 while lcm(1, 1) = 1
    spec = ConeSpec((1, 2), (1, 2))
    assert ray_multiplicity((1, 1, 1, 1), spec) == 3
    fan = build_fan(spec)
    assert any(
        reduce(gcd, [ray_multiplicity(v, spec) for v in fan.vectors(c)]) != 1 for c in fan.interior_cones
    )


# --- products ----------------------------------------------------------------


def test_product_of_smooth_models():
    m, mp = smooth_model(), smooth_model(name="other", cls=_atom("Y0", k, 1))
    p = product_model(m, mp)
    assert validate(p) == [] and len(p.components) == 1 and len(p.strata) == 1
    assert p.strata[0].cls == _atom("X0", k, 1) * _atom("Y0", k, 1)
    assert verify_multiplicativity(m, mp).ok


def test_product_of_multiplicity_2_and_3():
    m, mp = smooth_model(d=2), smooth_model(d=3, name="other", cls=_atom("Y0", k, 1))
    p = product_model(m, mp, "t")
    (s,) = p.strata
    assert list(p.components.values()) == [6]
    assert s.torsor.order == 6 and s.cls == s.torsor.base
    assert s.cls.atoms[0].id.startswith("Q(")
    rep = verify_multiplicativity(m, mp, "t")
    assert not rep.delta and rep.ok


def test_product_with_reduced_model_is_termwise():
    m = two_component_model()
    mp = smooth_model(name="other", cls=_atom("Y0", k, 1))
    assert rho(product_model(m, mp)) == rho(m) * rho(mp)


@settings(max_examples=8)
@given(st.integers(0, 2**32))
def test_multiplicativity_random_pairs(seed):
    rng = random.Random(seed)
    m = random_model(rng, 3, 2, 4, name="m", max_alpha=1)
    mp = random_model(rng, 3, 2, 4, name="n", max_alpha=1)
    rep = verify_multiplicativity(m, mp, "tau")
    assert not rep.delta
    assert all(p.ok for p in rep.pairs)


@pytest.mark.parametrize("seed", range(3))
def test_multiplicativity_with_alternative_family(seed):
    rng = random.Random(1000 + seed)
    m = random_model(rng, 2, 2, 3, name="m", max_alpha=1)
    mp = random_model(rng, 2, 2, 3, name="n", max_alpha=1)
    assert verify_multiplicativity(m, mp, "tau", builder=build_fan_alt).ok


def test_multiplicativity_independent_of_tie_break():
    m = two_component_model(1, 1)
    mp = two_component_model(3, 4, name="other")
    a = product_model(m, mp, builder=build_fan)
    b = product_model(m, mp, builder=build_fan_alt)
    assert len(a.components) != len(b.components)
    for builder in (build_fan, build_fan_alt):
        rep = verify_multiplicativity(m, mp, "tau", builder=builder)
        assert rep.ok and not rep.delta
    assert rho_mu(a, "tau") == rho_mu(b, "tau") == equiv_mul(rho_mu(m, "tau"), rho_mu(mp, "tau"))
