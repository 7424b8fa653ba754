"""Cones ``Lambda(a, a')``, their equivariant smooth fans, and certification.

``Lambda(a, a') = {(u, u') >= 0 : <u, a> = <u', a'>}`` lives in the lattice
``N = {v in Z^{r+r'} : <v, a (+) -a'> = 0}``. Faces of the cone are indexed by pairs
of nonempty coordinate subsets and are cones of the same kind for the restricted
vectors, which is what makes the boundary-first construction possible.

Construction of ``Sigma(a, a')`` for sorted vectors:

1. if the cone is simplicial and already smooth (``r == 1`` or ``r' == 1``), its face
   lattice is the fan and nothing else happens;
2. otherwise take the fans of all facets (recursively, transported by coordinate
   embedding) and cone them over ``center_ray``: the stabilizer-invariant interior
   lattice point of least coordinate sum, ties broken lexicographically;
3. while some cone is not unimodular, pick the orbit (under the stabilizer of the
   spec in ``S_r x S_r'``) of a minimal non-smooth cone with the smallest canonical
   key, choose the parallelepiped point of least coordinate sum (ties broken
   lexicographically) in the orbit representative, and star-subdivide the whole
   orbit at the transported points.

Rays of a common cone always have nested supports, so distinct orbit images of a
cone never share a cone and the star subdivisions of one orbit commute.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, lru_cache
from math import gcd, lcm
from typing import Iterable, Sequence

from .core import _same_field
from .equivariant import EquivBurnElement, equiv_mul, rho_mu, stratum_torsor
from .snc import DualComplex, Stratum, _require_valid, fmt_set
from .lattice import det, parallelepiped_lattice_points, primitive, saturation_index, solve_in_basis

Vector = tuple[int, ...]


class ToricError(ValueError):
    pass


@dataclass(frozen=True)
class ConeSpec:
    a: tuple[int, ...]
    a_prime: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(int(x) for x in self.a))
        object.__setattr__(self, "a_prime", tuple(int(x) for x in self.a_prime))
        if not self.a or not self.a_prime:
            raise ToricError("both vectors must be nonempty")
        if min(self.a + self.a_prime) < 1:
            raise ToricError("entries must be >= 1")

    @property
    def r(self) -> int:
        return len(self.a)

    @property
    def r_prime(self) -> int:
        return len(self.a_prime)

    @property
    def ambient(self) -> int:
        return self.r + self.r_prime

    @property
    def dim(self) -> int:
        return self.ambient - 1

    def contains(self, v: Sequence[int]) -> bool:
        return (
            len(v) == self.ambient
            and min(v) >= 0
            and sum(x * y for x, y in zip(v[: self.r], self.a))
            == sum(x * y for x, y in zip(v[self.r :], self.a_prime))
        )

    def sorted(self) -> tuple[ConeSpec, tuple[int, ...]]:
        """Sorted spec and the coordinate map ``perm`` (sorted coordinate i is original perm[i])."""
        pu = sorted(range(self.r), key=lambda i: self.a[i])
        pv = sorted(range(self.r_prime), key=lambda j: self.a_prime[j])
        perm = tuple(pu) + tuple(self.r + j for j in pv)
        return ConeSpec(tuple(self.a[i] for i in pu), tuple(self.a_prime[j] for j in pv)), perm

    def face(self, S: Sequence[int], S_prime: Sequence[int]) -> ConeSpec:
        return ConeSpec(tuple(self.a[i] for i in S), tuple(self.a_prime[j] for j in S_prime))

    def __str__(self) -> str:
        return " ".join(map(str, self.a)) + " / " + " ".join(map(str, self.a_prime))


def extreme_rays(spec: ConeSpec) -> list[Vector]:
    rays = []
    for i, j in itertools.product(range(spec.r), range(spec.r_prime)):
        ai, aj = spec.a[i], spec.a_prime[j]
        g = gcd(ai, aj)
        v = [0] * spec.ambient
        v[i] = aj // g
        v[spec.r + j] = ai // g
        rays.append(tuple(v))
    return rays


def ray_multiplicity(v: Sequence[int], spec: ConeSpec) -> int:
    if not spec.contains(v):
        raise ToricError(f"{tuple(v)} is not in Lambda({spec})")
    return sum(x * y for x, y in zip(v[: spec.r], spec.a))


def support(v: Sequence[int], r: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    return (
        tuple(i for i in range(r) if v[i]),
        tuple(j - r for j in range(r, len(v)) if v[j]),
    )


# ---------------------------------------------------------------------------
# fans

Cone = frozenset  # of ray vectors


@dataclass(frozen=True)
class Fan:
    """Simplicial fan: rays in a fixed order, maximal cones as sorted index tuples."""

    spec: ConeSpec
    rays: tuple[Vector, ...]
    maximal: tuple[tuple[int, ...], ...]

    @classmethod
    def from_cones(cls, spec: ConeSpec, cones: Iterable[Cone]) -> Fan:
        cones = [c for c in cones]
        rays = sorted({v for c in cones for v in c})
        pos = {v: i for i, v in enumerate(rays)}
        maximal = sorted(tuple(sorted(pos[v] for v in c)) for c in cones)
        return cls(spec, tuple(rays), tuple(maximal))

    @cached_property
    def cones(self) -> list[tuple[int, ...]]:
        """All nonzero cones (faces of maximal cones), sorted by dimension then indices."""
        out = set()
        for m in self.maximal:
            for k in range(1, len(m) + 1):
                out.update(itertools.combinations(m, k))
        return sorted(out, key=lambda c: (len(c), c))

    def vectors(self, cone: Iterable[int]) -> list[Vector]:
        return [self.rays[i] for i in cone]

    def is_interior(self, cone: Iterable[int]) -> bool:
        s = [sum(col) for col in zip(*self.vectors(cone))]
        return bool(s) and min(s) > 0

    @cached_property
    def interior_cones(self) -> list[tuple[int, ...]]:
        return [c for c in self.cones if self.is_interior(c)]

    def cone_sets(self) -> set[Cone]:
        return {frozenset(self.vectors(c)) for c in self.cones}

    @cached_property
    def maximal_sets(self) -> frozenset[Cone]:
        return frozenset(frozenset(self.vectors(c)) for c in self.maximal)

    def dump(self) -> str:
        lines = [f"fan {self.spec}", f"rays: {len(self.rays)}"]
        for i, v in enumerate(self.rays):
            lines.append(f"  r{i} = ({', '.join(map(str, v))})")
        lines.append(f"maximal cones: {len(self.maximal)}")
        for c in self.maximal:
            lines.append("  {" + ", ".join(f"r{i}" for i in c) + "}")
        lines.append(f"cones: {len(self.cones)}")
        for c in self.cones:
            flag = "interior" if self.is_interior(c) else "boundary"
            lines.append(f"  dim {len(c)} {{" + ", ".join(f"r{i}" for i in c) + f"}} {flag}")
        return "\n".join(lines)


def permute_vector(v: Sequence[int], perm: Sequence[int]) -> Vector:
    """Vector w with ``w[perm[i]] = v[i]``."""
    w = [0] * len(v)
    for i, p in enumerate(perm):
        w[p] = v[i]
    return tuple(w)


def embed(v: Sequence[int], coords: Sequence[int], n: int) -> Vector:
    w = [0] * n
    for x, c in zip(v, coords):
        w[c] = x
    return tuple(w)


@lru_cache(maxsize=None)
def cone_index(cone: Cone) -> int:
    return saturation_index(sorted(cone))


def build_fan(spec: ConeSpec) -> Fan:
    s, perm = spec.sorted()
    base = _build_sorted(s)
    cones = [frozenset(permute_vector(v, perm) for v in base.vectors(c)) for c in base.maximal]
    return Fan.from_cones(spec, cones)


def stabilizer(spec: ConeSpec) -> list[tuple[int, ...]]:
    """Coordinate permutations in ``S_r x S_r'`` fixing the spec."""
    out = []
    for pu in itertools.permutations(range(spec.r)):
        if any(spec.a[pu[i]] != spec.a[i] for i in range(spec.r)):
            continue
        for pv in itertools.permutations(range(spec.r_prime)):
            if any(spec.a_prime[pv[j]] != spec.a_prime[j] for j in range(spec.r_prime)):
                continue
            out.append(tuple(pu) + tuple(spec.r + j for j in pv))
    return out


def facets(spec: ConeSpec) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    out = []
    U, V = tuple(range(spec.r)), tuple(range(spec.r_prime))
    if spec.r >= 2:
        out += [(tuple(x for x in U if x != i), V) for i in U]
    if spec.r_prime >= 2:
        out += [(U, tuple(x for x in V if x != j)) for j in V]
    return out


def face_cones(spec: ConeSpec, S: Sequence[int], S_prime: Sequence[int]) -> set[Cone]:
    """All nonzero cones of the face fan, embedded in the ambient coordinates."""
    sub = build_fan(spec.face(S, S_prime))
    coords = tuple(S) + tuple(spec.r + j for j in S_prime)
    return {frozenset(embed(v, coords, spec.ambient) for v in sub.vectors(c)) for c in sub.cones}


@lru_cache(maxsize=None)
def _build_sorted(spec: ConeSpec, tie_break: str = "lex") -> Fan:
    if _smooth_simplicial(spec):
        return Fan.from_cones(spec, [frozenset(extreme_rays(spec))])
    boundary: set[Cone] = set()
    for S, Sp in facets(spec):
        boundary |= face_cones(spec, S, Sp)
    top = spec.dim - 1
    b = center_ray(spec)
    maximal = {c | {b} for c in boundary if len(c) == top}
    maximal = _resolve(spec, maximal, tie_break)
    return Fan.from_cones(spec, maximal)


def _smooth_simplicial(spec: ConeSpec) -> bool:
    # Lambda is simplicial iff r == 1 or r' == 1; then a smooth Lambda is its own fan
    return min(spec.r, spec.r_prime) == 1 and cone_index(frozenset(extreme_rays(spec))) == 1


def center_ray(spec: ConeSpec) -> Vector:
    """Interior lattice point of least coordinate sum (then lexicographically least) fixed by the stabilizer.

    Coning facet fans over it gives cones whose index is the lattice distance of the
    point to the facet, so a low point keeps the later resolution small.
    """
    blocks = [[i for i in range(spec.r) if spec.a[i] == x] for x in sorted(set(spec.a))]
    blocks += [[spec.r + j for j in range(spec.r_prime) if spec.a_prime[j] == x] for x in sorted(set(spec.a_prime))]
    sizes = [len(b) for b in blocks]
    total = len(blocks)
    for s in itertools.count(spec.ambient):
        found = []
        for vals in _weighted_compositions(s, sizes):
            v = [0] * spec.ambient
            for blk, x in zip(blocks, vals):
                for c in blk:
                    v[c] = x
            if spec.contains(v):
                found.append(tuple(v))
        if found:
            return min(found)
        if s > 10**6 or total == 0:  # pragma: no cover
            raise ToricError("no interior lattice point found")


def _weighted_compositions(s: int, sizes: Sequence[int]):
    """Tuples of positive ints x with sum(size_k * x_k) == s."""
    if not sizes:
        if s == 0:
            yield ()
        return
    head, rest = sizes[0], sizes[1:]
    floor = sum(rest)
    for x in range(1, (s - floor) // head + 1):
        for tail in _weighted_compositions(s - head * x, rest):
            yield (x,) + tail


def _faces(cones: Iterable[Cone]) -> set[Cone]:
    out = set()
    for c in cones:
        items = sorted(c)
        for k in range(2, len(items) + 1):
            out.update(frozenset(x) for x in itertools.combinations(items, k))
    return out


def _resolve(spec: ConeSpec, maximal: set[Cone], tie_break: str) -> set[Cone]:
    # Bad cones of least dimension are automatically minimal, so the orbit to treat
    # next is the least (dim, orbit key) among all bad faces. Faces removed by a star
    # subdivision never come back (new cones all contain the new ray), which makes
    # lazy deletion from the heap sound.
    group = stabilizer(spec)
    fan = _IndexedFan(maximal)
    heap: list = []

    def push(c: Cone) -> None:
        if cone_index(c) > 1:
            heapq.heappush(heap, (len(c), _orbit_key(c, group), tuple(sorted(c))))

    for c in _faces(maximal):
        push(c)
    while heap:
        n, key, c = heapq.heappop(heap)
        if not fan.has_face(frozenset(c)):
            continue
        rep = frozenset(key)
        p = _subdivision_point(rep, tie_break)
        targets = {}
        for g in group:
            targets[frozenset(permute_vector(v, g) for v in rep)] = permute_vector(p, g)
        for cone, pt in targets.items():
            for sigma in fan.star(cone, pt):
                others = sorted(sigma - {pt})
                for k in range(1, len(others) + 1):
                    for sub in itertools.combinations(others, k):
                        push(frozenset(sub) | {pt})
    return fan.cones


class _IndexedFan:
    """Maximal cones with a ray -> cones index for fast face queries and star subdivisions."""

    def __init__(self, maximal: Iterable[Cone]):
        self.cones: set[Cone] = set()
        self.by_ray: dict[Vector, set[Cone]] = {}
        for c in maximal:
            self._add(c)

    def _add(self, c: Cone) -> None:
        self.cones.add(c)
        for v in c:
            self.by_ray.setdefault(v, set()).add(c)

    def _remove(self, c: Cone) -> None:
        self.cones.discard(c)
        for v in c:
            self.by_ray[v].discard(c)

    def containing(self, cone: Cone) -> set[Cone]:
        rays = sorted(cone, key=lambda v: len(self.by_ray.get(v, ())))
        out = set(self.by_ray.get(rays[0], ()))
        for v in rays[1:]:
            out &= self.by_ray.get(v, set())
        return out

    def has_face(self, cone: Cone) -> bool:
        return bool(self.containing(cone))

    def star(self, cone: Cone, p: Vector) -> list[Cone]:
        added = []
        for sigma in self.containing(cone):
            self._remove(sigma)
            for v in cone:
                added.append((sigma - {v}) | {p})
        for c in added:
            self._add(c)
        return added


def _orbit_key(c: Cone, group) -> tuple[Vector, ...]:
    return min(tuple(sorted(permute_vector(v, g) for v in c)) for g in group)


def _subdivision_point(cone: Cone, tie_break: str) -> Vector:
    rays = sorted(cone)
    pts = [p for p in parallelepiped_lattice_points(rays) if any(p)]
    if tie_break == "lex":
        return min(pts, key=lambda p: (sum(p), p))
    if tie_break == "revlex":
        return min(pts, key=lambda p: (sum(p), tuple(-x for x in p)))
    raise ToricError(f"unknown tie-break rule {tie_break!r}")


def build_fan_alt(spec: ConeSpec) -> Fan:
    """Same construction with the reverse-lexicographic tie-break (for independence checks)."""
    s, perm = spec.sorted()
    base = _build_sorted_alt(s)
    cones = [frozenset(permute_vector(v, perm) for v in base.vectors(c)) for c in base.maximal]
    return Fan.from_cones(spec, cones)


@lru_cache(maxsize=None)
def _build_sorted_alt(spec: ConeSpec) -> Fan:
    # facets come from the alternative family too, so the family stays boundary-compatible
    if _smooth_simplicial(spec):
        return Fan.from_cones(spec, [frozenset(extreme_rays(spec))])
    boundary: set[Cone] = set()
    for S, Sp in facets(spec):
        sub = build_fan_alt(spec.face(S, Sp))
        coords = tuple(S) + tuple(spec.r + j for j in Sp)
        boundary |= {frozenset(embed(v, coords, spec.ambient) for v in sub.vectors(c)) for c in sub.cones}
    b = center_ray(spec)
    maximal = {c | {b} for c in boundary if len(c) == spec.dim - 1}
    return Fan.from_cones(spec, _resolve(spec, maximal, "revlex"))


# ---------------------------------------------------------------------------
# certification


@dataclass
class Certificate:
    smooth: bool
    supported: bool
    equivariant: bool
    boundary_compatible: bool
    failures: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.smooth and self.supported and self.equivariant and self.boundary_compatible


def certify(fan: Fan, spec: ConeSpec, builder=build_fan) -> Certificate:
    failures: list[str] = []
    smooth = _check_smooth(fan, failures)
    supported = _check_support(fan, spec, failures)
    equivariant = _check_equivariant(fan, spec, builder, failures)
    boundary = _check_boundary(fan, spec, builder, failures)
    return Certificate(smooth, supported, equivariant, boundary, failures)


def _check_smooth(fan: Fan, failures: list[str]) -> bool:
    # a subset of a lattice basis is part of a basis, so maximal cones suffice
    ok = True
    for c in fan.maximal:
        idx = cone_index(frozenset(fan.vectors(c)))
        if idx != 1:
            failures.append(f"cone {c} has index {idx}")
            ok = False
    return ok


def _proj(v: Sequence[int]) -> list[int]:
    # the last coordinate is determined on N since a'_{r'} >= 1
    return list(v[:-1])


def _normalized_volume(rays: Sequence[Vector]) -> Fraction:
    d = abs(det([_proj(v) for v in rays]))
    denom = 1
    for v in rays:
        denom *= sum(v)
    return Fraction(d, denom)


def staircase(spec: ConeSpec) -> list[list[Vector]]:
    """Staircase triangulation of ``Lambda(a, a')`` (an independent reference subdivision)."""
    rays = extreme_rays(spec)

    def ray(i, j):
        return rays[i * spec.r_prime + j]

    out = []
    for steps in itertools.combinations(range(spec.dim - 1), spec.r - 1):
        i = j = 0
        cone = [ray(0, 0)]
        for t in range(spec.dim - 1):
            if t in steps:
                i += 1
            else:
                j += 1
            cone.append(ray(i, j))
        out.append(cone)
    return out


def _check_support(fan: Fan, spec: ConeSpec, failures: list[str]) -> bool:
    ok = True
    for v in fan.rays:
        if not spec.contains(v) or gcd(*v) != 1:
            failures.append(f"ray {v} is not a primitive vector of Lambda")
            ok = False
    k = spec.dim
    for m in fan.maximal:
        if len(m) != k or det([_proj(v) for v in fan.vectors(m)]) == 0:
            failures.append(f"maximal cone {m} is not full-dimensional simplicial")
            ok = False
    if not ok:
        return False
    if k == 1:
        return len(fan.maximal) == 1
    # facet adjacency: interior facets shared by two cones lying on opposite sides,
    # boundary facets by exactly one
    owners: dict[tuple[int, ...], list[tuple[int, ...]]] = {}
    for m in fan.maximal:
        for f in itertools.combinations(m, k - 1):
            owners.setdefault(f, []).append(m)
    for f, ms in owners.items():
        inside = fan.is_interior(f)
        if (inside and len(ms) != 2) or (not inside and len(ms) != 1):
            failures.append(f"facet {f} lies in {len(ms)} maximal cones")
            ok = False
            continue
        if inside:
            signs = []
            for m in ms:
                (x,) = set(m) - set(f)
                signs.append(det([_proj(v) for v in fan.vectors(f)] + [_proj(fan.rays[x])]) > 0)
            if signs[0] == signs[1]:
                failures.append(f"cones on facet {f} overlap")
                ok = False
    vol = sum(_normalized_volume(fan.vectors(m)) for m in fan.maximal)
    ref = sum(_normalized_volume(c) for c in staircase(spec))
    if vol != ref:
        failures.append(f"volume {vol} differs from the volume of Lambda {ref}")
        ok = False
    tests = [_cone_test(fan.vectors(m)) for m in fan.maximal]
    for pt in _sample_points(spec):
        p = _proj(pt)
        if not any(_covers(t, p) for t in tests):
            failures.append(f"point {pt} of Lambda is not covered")
            ok = False
            break
    return ok


def _sample_points(spec: ConeSpec, bound: int = 3) -> list[Vector]:
    pts = []
    for u in itertools.product(range(bound + 1), repeat=spec.r):
        lhs = sum(x * y for x, y in zip(u, spec.a))
        for w in itertools.product(range(bound + 1), repeat=spec.r_prime - 1):
            rest = lhs - sum(x * y for x, y in zip(w, spec.a_prime))
            if rest >= 0 and rest % spec.a_prime[-1] == 0:
                pt = tuple(u) + tuple(w) + (rest // spec.a_prime[-1],)
                if any(pt):
                    pts.append(pt)
    return pts[:400]


def _in_cone(rays: Sequence[Vector], pt: Vector) -> bool:
    lam = solve_in_basis(rays, pt)
    return lam is not None and min(lam) >= 0


def _cone_test(rays: Sequence[Vector]) -> tuple[list[list[int]], int]:
    """Integer matrix ``adj`` and ``det`` so that ``p @ adj / det`` are the cone coordinates of ``p``."""
    m = [_proj(v) for v in rays]
    n = len(m)
    adj = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:i] + row[i + 1 :] for k, row in enumerate(m) if k != j]
            adj[i][j] = (-1) ** (i + j) * det(minor) if n > 1 else 1
    return adj, det(m)


def _covers(test: tuple[list[list[int]], int], p: Sequence[int]) -> bool:
    adj, d = test
    n = len(adj)
    for j in range(n):
        if sum(p[i] * adj[i][j] for i in range(n)) * d < 0:
            return False
    return True


def _check_equivariant(fan: Fan, spec: ConeSpec, builder, failures: list[str]) -> bool:
    ok = True
    # a simplicial fan is determined by its maximal cones
    mine = fan.maximal_sets
    for pu in itertools.permutations(range(spec.r)):
        for pv in itertools.permutations(range(spec.r_prime)):
            # coordinate i of the permuted spec is coordinate pu[i] of the original
            permuted = ConeSpec(tuple(spec.a[i] for i in pu), tuple(spec.a_prime[j] for j in pv))
            perm = tuple(pu) + tuple(spec.r + j for j in pv)
            other = builder(permuted).maximal_sets
            moved = {frozenset(_pull(v, perm) for v in c) for c in mine}
            if moved != other:
                failures.append(f"fan is not covariant under {perm}")
                ok = False
    return ok


def _pull(v: Sequence[int], perm: Sequence[int]) -> Vector:
    return tuple(v[p] for p in perm)


def _check_boundary(fan: Fan, spec: ConeSpec, builder, failures: list[str]) -> bool:
    ok = True
    all_cones = fan.cone_sets()
    for S, Sp in facets(spec):
        coords = tuple(S) + tuple(spec.r + j for j in Sp)
        dropped = [c for c in range(spec.ambient) if c not in coords]
        induced = {c for c in all_cones if all(v[x] == 0 for v in c for x in dropped)}
        sub = builder(spec.face(S, Sp))
        expected = {frozenset(embed(v, coords, spec.ambient) for v in sub.vectors(c)) for c in sub.cones}
        if induced != expected:
            failures.append(f"induced fan on facet {S}/{Sp} differs from the facet fan")
            ok = False
    return ok


def euler_interior(fan: Fan) -> int:
    return sum((-1) ** len(c) for c in fan.interior_cones)


# ---------------------------------------------------------------------------
# products of models


def _pair_spec(m: DualComplex, J, mp: DualComplex, Jp) -> ConeSpec:
    return ConeSpec(tuple(m.components[j] for j in sorted(J)), tuple(mp.components[j] for j in sorted(Jp)))


def _component_id(J, alpha, Jp, alpha_p, v) -> str:
    return f"{fmt_set(J)}/{alpha}x{fmt_set(Jp)}/{alpha_p}@({','.join(map(str, v))})"


def _restrict(v: Sequence[int], S: Sequence[int], Sp: Sequence[int], r: int) -> Vector:
    return tuple(v[i] for i in S) + tuple(v[r + j] for j in Sp)


def product_model(
    m: DualComplex, mp: DualComplex, tau: str = "tau", name: str | None = None, builder=None
) -> DualComplex:
    """Dual complex of the product of two snc models, resolved by the fans ``Sigma(d_J, d_J')``.

    Every stratum stores its torsor: the product of the two stratum torsors (order
    ``lcm(d_J, d_J')``) times the split torus ``T_sigma``, written as an affine power.
    ``builder`` picks the fan family (default ``build_fan``).
    """
    builder = builder or build_fan
    _require_valid(m)
    _require_valid(mp)
    _same_field(m.field, mp.field)
    components: dict[str, int] = {}
    strata: list[Stratum] = []
    for s, sp in itertools.product(m.strata, mp.strata):
        spec = _pair_spec(m, s.J, mp, sp.J)
        fan = builder(spec)
        J, Jp = sorted(s.J), sorted(sp.J)
        torsor = stratum_torsor(m, s, tau) * stratum_torsor(mp, sp, tau)

        def locate(vectors):
            # (J_S, alpha_S, J'_S', alpha'_S', restricted vectors) of the face containing the cone
            S = sorted({i for v in vectors for i in support(v, spec.r)[0]})
            Sp = sorted({j for v in vectors for j in support(v, spec.r)[1]})
            JS, JSp = frozenset(J[i] for i in S), frozenset(Jp[j] for j in Sp)
            a = m.descend(s.J, s.alpha, JS)
            ap = mp.descend(sp.J, sp.alpha, JSp)
            return JS, a, JSp, ap, [_restrict(v, S, Sp, spec.r) for v in vectors]

        def ray_id(v):
            JS, a, JSp, ap, (w,) = locate([v])
            return _component_id(JS, a, JSp, ap, w)

        for c in fan.interior_cones:
            vectors = fan.vectors(c)
            if len(vectors) == 1:
                components[ray_id(vectors[0])] = ray_multiplicity(vectors[0], spec)
            parents = {}
            if len(vectors) > 1:
                for v in vectors:
                    _, a, _, ap, _ = locate([w for w in vectors if w != v])
                    parents[ray_id(v)] = f"{a}*{ap}"
            st_torsor = torsor.times_affine(spec.dim - len(vectors))
            ids = frozenset(ray_id(v) for v in vectors)
            strata.append(Stratum(ids, f"{s.alpha}*{sp.alpha}", st_torsor.base, parents, torsor=st_torsor))
    out = DualComplex.build(name or f"{m.name}x{mp.name}", m.field, m.rel_dim + mp.rel_dim, components, strata)
    _require_valid(out)
    return out


@dataclass(frozen=True)
class PairCollapse:
    """Alternating sum over the interior cones of one ``(J, alpha) x (J', alpha')`` pair."""

    J: frozenset[str]
    alpha: str
    J_prime: frozenset[str]
    alpha_prime: str
    sigma_sum: int
    expected: int

    @property
    def ok(self) -> bool:
        return self.sigma_sum == self.expected


@dataclass(frozen=True)
class MultiplicativityReport:
    delta: EquivBurnElement
    pairs: tuple[PairCollapse, ...]
    # strata whose ray multiplicities have gcd different from lcm(d_J, d_J'); diagnostic only
    gcd_mismatches: int

    @property
    def ok(self) -> bool:
        return not self.delta and all(p.ok for p in self.pairs)


def verify_multiplicativity(m: DualComplex, mp: DualComplex, tau: str = "tau", builder=None) -> MultiplicativityReport:
    builder = builder or build_fan
    prod = product_model(m, mp, tau, builder=builder)
    delta = rho_mu(prod, tau) - equiv_mul(rho_mu(m, tau), rho_mu(mp, tau))
    pairs = []
    mismatches = 0
    for s, sp in itertools.product(m.strata, mp.strata):
        spec = _pair_spec(m, s.J, mp, sp.J)
        fan = builder(spec)
        want = lcm(m.mult(s.J), mp.mult(sp.J))
        total = 0
        for c in fan.interior_cones:
            total += (-1) ** len(c)
            g = 0
            for v in fan.vectors(c):
                g = gcd(g, ray_multiplicity(v, spec))
            mismatches += g != want
        pairs.append(PairCollapse(s.J, s.alpha, sp.J, sp.alpha, total, (-1) ** (len(s.J) + len(sp.J) - 1)))
    return MultiplicativityReport(delta, tuple(pairs), mismatches)
