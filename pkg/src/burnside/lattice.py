"""Exact integer linear algebra: Smith normal form, lattice index, fundamental parallelepipeds.

Matrices are lists of rows of Python ints. Nothing here touches floating point.
"""

from __future__ import annotations

import itertools
from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Sequence

Vector = tuple[int, ...]
Matrix = list[list[int]]


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def primitive(v: Sequence[int]) -> Vector:
    g = reduce(gcd, v, 0)
    if g == 0:
        raise ValueError("zero vector has no primitive generator")
    return tuple(x // g for x in v)


def is_primitive(v: Sequence[int]) -> bool:
    return reduce(gcd, v, 0) == 1


def smith_normal_form(a: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, Matrix]:
    """Return ``(U, D, V)`` with ``U @ a @ V == D`` and U, V unimodular.

    D is diagonal with nonnegative entries d_1 | d_2 | ... (elementary divisors).
    """
    m = len(a)
    n = len(a[0]) if m else 0
    d = [list(row) for row in a]
    u = identity(m)
    v = identity(n)

    def swap_rows(i, j):
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for row in d:
            row[i], row[j] = row[j], row[i]
        for row in v:
            row[i], row[j] = row[j], row[i]

    def add_row(src, dst, c):  # row dst += c * row src
        d[dst] = [x + c * y for x, y in zip(d[dst], d[src])]
        u[dst] = [x + c * y for x, y in zip(u[dst], u[src])]

    def add_col(src, dst, c):
        for row in d:
            row[dst] += c * row[src]
        for row in v:
            row[dst] += c * row[src]

    for t in range(min(m, n)):
        # pivot: smallest nonzero |entry| in the trailing block
        while True:
            best = None
            for i in range(t, m):
                for j in range(t, n):
                    if d[i][j] and (best is None or abs(d[i][j]) < abs(d[best[0]][best[1]])):
                        best = (i, j)
            if best is None:
                return u, d, v
            swap_rows(t, best[0])
            swap_cols(t, best[1])
            p = d[t][t]
            dirty = False
            for i in range(t + 1, m):
                q = d[i][t] // p
                if q:
                    add_row(t, i, -q)
                if d[i][t]:
                    dirty = True
            for j in range(t + 1, n):
                q = d[t][j] // p
                if q:
                    add_col(t, j, -q)
                if d[t][j]:
                    dirty = True
            if dirty:
                continue
            # divisibility condition on the rest of the block
            bad = next(
                ((i, j) for i in range(t + 1, m) for j in range(t + 1, n) if d[i][j] % p),
                None,
            )
            if bad is None:
                break
            add_row(bad[0], t, 1)
        if d[t][t] < 0:
            d[t] = [-x for x in d[t]]
            u[t] = [-x for x in u[t]]
    return u, d, v


def elementary_divisors(a: Sequence[Sequence[int]]) -> list[int]:
    _, d, _ = smith_normal_form(a)
    return [d[i][i] for i in range(min(len(d), len(d[0]) if d else 0))]


def lattice_index(rays: Sequence[Sequence[int]]) -> int:
    """Index of the lattice spanned by ``rays`` inside its saturation; 0 if dependent."""
    divs = elementary_divisors(rays)
    return reduce(lambda x, y: x * y, divs, 1)


def saturation_index(rows: Sequence[Sequence[int]]) -> int:
    """Same value as :func:`lattice_index`, as the gcd of the maximal minors.

    Stops as soon as the running gcd reaches 1, which is the common case for smooth cones.
    """
    k = len(rows)
    if k == 0:
        return 1
    n = len(rows[0])
    g = 0
    for cols in itertools.combinations(range(n), k):
        g = gcd(g, det([[row[c] for c in cols] for row in rows]))
        if g == 1:
            return 1
    return g


def inverse(u: Sequence[Sequence[int]]) -> Matrix:
    """Inverse of a unimodular integer matrix."""
    n = len(u)
    aug = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(u)]
    for c in range(n):
        piv = next(r for r in range(c, n) if aug[r][c] != 0)
        aug[c], aug[piv] = aug[piv], aug[c]
        pv = aug[c][c]
        aug[c] = [x / pv for x in aug[c]]
        for r in range(n):
            if r != c and aug[r][c] != 0:
                f = aug[r][c]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[c])]
    out = [[aug[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return [[int(x) for x in row] for row in out]


def parallelepiped_points(rays: Sequence[Sequence[int]]) -> list[tuple[Vector, tuple[Fraction, ...]]]:
    """Lattice points ``sum(l_i * r_i)`` with every ``l_i`` in [0, 1), including 0.

    The ambient lattice is Z^n; points are returned with their coefficient vectors.
    """
    return [(pt, tuple(Fraction(x, big) for x in num)) for pt, num, big in _parallelepiped(rays)]


def parallelepiped_lattice_points(rays: Sequence[Sequence[int]]) -> list[Vector]:
    return [pt for pt, _, _ in _parallelepiped(rays)]


def _parallelepiped(rays):
    k = len(rays)
    u, d, v = smith_normal_form(rays)  # rays as rows: U R V = D
    divs = [d[i][i] for i in range(k)]
    if any(x == 0 for x in divs):
        raise ValueError("rays are linearly dependent")
    ut = [[u[j][i] for j in range(k)] for i in range(k)]
    big = divs[-1]  # every elementary divisor divides the last one
    scale = [big // x for x in divs]
    n = len(rays[0])
    for y in _box(divs):
        num = [sum(ut[i][j] * y[j] * scale[j] for j in range(k)) % big for i in range(k)]
        pt = []
        for c in range(n):
            q, r = divmod(sum(num[i] * rays[i][c] for i in range(k)), big)
            assert r == 0
            pt.append(q)
        yield tuple(pt), num, big


def _frac(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def _box(bounds: Sequence[int]):
    if not bounds:
        yield ()
        return
    for head in range(bounds[0]):
        for tail in _box(bounds[1:]):
            yield (head,) + tail


def solve_in_basis(basis: Sequence[Sequence[int]], x: Sequence[int]) -> tuple[Fraction, ...] | None:
    """Coefficients ``c`` with ``sum(c_i * basis_i) == x``, or None if x is outside the span."""
    k = len(basis)
    n = len(x)
    # columns are basis vectors; augmented system n x (k+1)
    rows = [[Fraction(basis[j][i]) for j in range(k)] + [Fraction(x[i])] for i in range(n)]
    piv_cols = []
    r = 0
    for c in range(k):
        piv = next((i for i in range(r, n) if rows[i][c] != 0), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        rows[r] = [e / pv for e in rows[r]]
        for i in range(n):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [e - f * g for e, g in zip(rows[i], rows[r])]
        piv_cols.append(c)
        r += 1
    if any(rows[i][k] != 0 for i in range(r, n)):
        return None
    if len(piv_cols) < k:
        raise ValueError("basis is linearly dependent")
    return tuple(rows[i][k] for i in range(k))


def det(m: Sequence[Sequence[int]]) -> int:
    """Determinant by fraction-free Bareiss elimination."""
    a = [list(row) for row in m]
    n = len(a)
    sign = 1
    prev = 1
    for c in range(n - 1):
        if a[c][c] == 0:
            sw = next((r for r in range(c + 1, n) if a[r][c] != 0), None)
            if sw is None:
                return 0
            a[c], a[sw] = a[sw], a[c]
            sign = -sign
        for i in range(c + 1, n):
            for j in range(c + 1, n):
                a[i][j] = (a[i][j] * a[c][c] - a[i][c] * a[c][j]) // prev
        prev = a[c][c]
    return sign * a[n - 1][n - 1] if n else 1
