"""Exact integer/rational linear algebra over the ambient lattice.

Everything here works on plain tuples of ints (lattice vectors) and
tuple-of-tuple row-major matrices, with :class:`fractions.Fraction` for
intermediate rational values.  No floating point anywhere.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Optional, Sequence

Vector = tuple[int, ...]


def primitive_part(v: Sequence[int]) -> Vector:
    """Divide ``v`` by the gcd of its coordinates (sign preserved)."""
    if not any(v):
        raise ValueError("zero has no primitive part")
    g = 0
    for c in v:
        g = gcd(g, c)
    return tuple(c // g for c in v)


def is_primitive(v: Sequence[int]) -> bool:
    if not any(v):
        return False
    g = 0
    for c in v:
        g = gcd(g, c)
    return g == 1


def vec_add(a: Sequence[int], b: Sequence[int]) -> Vector:
    return tuple(x + y for x, y in zip(a, b))


def vec_neg(a: Sequence[int]) -> Vector:
    return tuple(-x for x in a)


def vec_sum(vectors: Sequence[Sequence[int]], dim: int) -> Vector:
    out = [0] * dim
    for v in vectors:
        for i, c in enumerate(v):
            out[i] += c
    return tuple(out)


def det(matrix: Sequence[Sequence[int]]) -> int:
    """Exact determinant of a square integer matrix (Bareiss, fraction-free)."""
    n = len(matrix)
    for row in matrix:
        if len(row) != n:
            raise ValueError("determinant requires a square matrix")
    if n == 0:
        return 1
    m = [list(row) for row in matrix]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k] != 0:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


def solve_rational(
    matrix: Sequence[Sequence[int | Fraction]], rhs: Sequence[int | Fraction]
) -> Optional[list[Fraction]]:
    """One exact solution of ``matrix @ x = rhs``, or None if inconsistent.

    The matrix may be rectangular; free variables are set to zero.
    """
    nrows = len(matrix)
    ncols = len(matrix[0]) if nrows else 0
    a = [[Fraction(c) for c in row] + [Fraction(rhs[i])] for i, row in enumerate(matrix)]
    pivots: list[tuple[int, int]] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append((r, c))
        r += 1
        if r == nrows:
            break
    for i in range(r, nrows):
        if a[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for row, col in pivots:
        x[col] = a[row][ncols]
    return x


def solve_in_cone_basis(
    generators: Sequence[Sequence[int]], target: Sequence[int]
) -> Optional[list[Fraction]]:
    """Exact coefficients c with target = sum c_i * generators_i.

    Returns None when the target is outside the span.  Linearly dependent
    generators are rejected with ValueError.
    """
    if not generators:
        raise ValueError("need at least one generator")
    dim = len(generators[0])
    if rank(generators) != len(generators):
        raise ValueError("generators are linearly dependent")
    matrix = [[g[i] for g in generators] for i in range(dim)]
    return solve_rational(matrix, list(target))


def rank(vectors: Sequence[Sequence[int | Fraction]]) -> int:
    if not vectors:
        return 0
    a = [[Fraction(c) for c in v] for v in vectors]
    nrows, ncols = len(a), len(a[0])
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        pv = a[r][c]
        for i in range(r + 1, nrows):
            if a[i][c] != 0:
                f = a[i][c] / pv
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        r += 1
        if r == nrows:
            break
    return r


def invert_rational(matrix: Sequence[Sequence[int]]) -> list[list[Fraction]]:
    """Exact inverse of a nonsingular square integer matrix."""
    n = len(matrix)
    a = [[Fraction(c) for c in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    for c in range(n):
        pivot = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot is None:
            raise ValueError("matrix is singular")
        a[c], a[pivot] = a[pivot], a[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return [row[n:] for row in a]


def mat_mul_vec(matrix: Sequence[Sequence[int | Fraction]], v: Sequence[int | Fraction]):
    return tuple(sum(c * x for c, x in zip(row, v)) for row in matrix)


def find_unimodular_map(
    pairs: Sequence[tuple[Sequence[int], Sequence[int]]]
) -> Optional[tuple[tuple[int, ...], ...]]:
    """A matrix U with |det U| = 1 and U*a = b for every pair (a, b), or None.

    The left-hand vectors must span the ambient space; an underdetermined
    system is rejected rather than completed to a lattice basis.
    """
    if not pairs:
        raise ValueError("need at least one pair")
    dim = len(pairs[0][0])
    for a, b in pairs:
        if len(a) != dim or len(b) != dim:
            raise ValueError("dimension mismatch among pairs")
    lefts = [tuple(a) for a, _ in pairs]
    if rank(lefts) < dim:
        raise ValueError("left-hand vectors must span the ambient space")
    # pick dim independent columns a_i, solve U = B A^{-1}, then verify all
    basis_idx: list[int] = []
    for i in range(len(pairs)):
        if rank([lefts[j] for j in basis_idx] + [lefts[i]]) > len(basis_idx):
            basis_idx.append(i)
        if len(basis_idx) == dim:
            break
    amat = [[pairs[j][0][r] for j in basis_idx] for r in range(dim)]  # columns a_i
    bmat = [[pairs[j][1][r] for j in basis_idx] for r in range(dim)]
    ainv = invert_rational(amat)
    u = [[sum(Fraction(bmat[r][k]) * ainv[k][c] for k in range(dim)) for c in range(dim)] for r in range(dim)]
    for row in u:
        for entry in row:
            if entry.denominator != 1:
                return None
    ui = tuple(tuple(int(entry) for entry in row) for row in u)
    if abs(det(ui)) != 1:
        return None
    for a, b in pairs:
        if mat_mul_vec(ui, a) != tuple(b):
            return None
    return ui


def in_nonneg_span(
    generators: Sequence[Sequence[int | Fraction]], target: Sequence[int | Fraction]
) -> bool:
    """Exact feasibility of target = sum lambda_i * g_i with lambda >= 0.

    Phase-1 simplex with Bland's rule over rationals.
    """
    if not generators:
        return not any(target)
    m = len(target)
    n = len(generators)
    # tableau rows: m constraints; columns: n real vars + m artificials + rhs
    rows: list[list[Fraction]] = []
    for i in range(m):
        coeffs = [Fraction(g[i]) for g in generators]
        rhs = Fraction(target[i])
        if rhs < 0:
            coeffs = [-c for c in coeffs]
            rhs = -rhs
        rows.append(coeffs + [Fraction(0)] * m + [rhs])
    for i in range(m):
        rows[i][n + i] = Fraction(1)
    basis = [n + i for i in range(m)]
    # objective: minimize sum of artificials -> reduced costs of the real
    # columns; artificials are basic (cost zeroed) and never re-enter
    obj = [Fraction(0)] * (n + m + 1)
    for i in range(m):
        for j in range(n):
            obj[j] -= rows[i][j]
        obj[n + m] -= rows[i][n + m]
    while True:
        enter = next((j for j in range(n) if obj[j] < 0), None)
        if enter is None:
            break
        ratios = [
            (rows[i][n + m] / rows[i][enter], basis[i], i)
            for i in range(m)
            if rows[i][enter] > 0
        ]
        if not ratios:
            break  # unbounded direction cannot happen in phase 1
        _, _, leave = min(ratios)
        pv = rows[leave][enter]
        rows[leave] = [x / pv for x in rows[leave]]
        for i in range(m):
            if i != leave and rows[i][enter] != 0:
                f = rows[i][enter]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[leave])]
        if obj[enter] != 0:
            f = obj[enter]
            obj = [x - f * y for x, y in zip(obj, rows[leave])]
        basis[leave] = enter
    return -obj[n + m] == 0
