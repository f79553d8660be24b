"""Lattice polytopes: hulls, polar duality, reflexivity, crepant resolutions.

Vertices may be rational (polar duals of non-reflexive polytopes) but the
main pipeline works with lattice polytopes around an interior origin.
A polytope is stored by vertices together with an irredundant facet list
{x : <normal, x> >= -offset} with primitive integer normals.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cmp_to_key
from itertools import combinations, product
from math import gcd
from typing import Iterable, Sequence

from .fan import Fan
from .lattice import det, in_nonneg_span, rank

Point = tuple


def _dot(a: Sequence, b: Sequence):
    return sum(x * y for x, y in zip(a, b))


def _primitive_normal(v: Sequence[Fraction]) -> tuple[int, ...]:
    denom = 1
    for c in v:
        denom = denom * c.denominator // gcd(denom, c.denominator)
    ints = [int(c * denom) for c in v]
    g = 0
    for c in ints:
        g = gcd(g, c)
    return tuple(c // g for c in ints)


def _hyperplane_normal(points: Sequence[Sequence]) -> tuple[int, ...] | None:
    """Primitive integer normal of the hyperplane through d affinely
    independent points, or None if they are affinely dependent."""
    d = len(points[0])
    diffs = [
        [Fraction(points[i][j]) - Fraction(points[0][j]) for j in range(d)]
        for i in range(1, d)
    ]
    if rank(diffs) != d - 1:
        return None
    # kernel of the (d-1) x d difference matrix via cofactor expansion
    normal = []
    for j in range(d):
        minor = [[row[k] for k in range(d) if k != j] for row in diffs]
        sign = -1 if j % 2 else 1
        normal.append(sign * _fraction_det(minor))
    return _primitive_normal(normal)


def _fraction_det(m: list[list[Fraction]]) -> Fraction:
    n = len(m)
    if n == 0:
        return Fraction(1)
    a = [row[:] for row in m]
    out = Fraction(1)
    for c in range(n):
        pivot = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != c:
            a[c], a[pivot] = a[pivot], a[c]
            out = -out
        out *= a[c][c]
        for i in range(c + 1, n):
            if a[i][c] != 0:
                f = a[i][c] / a[c][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
    return out


@dataclass(frozen=True)
class LatticePolytope:
    """Full-dimensional polytope with vertex and facet descriptions."""

    dim: int
    vertices: tuple[Point, ...]
    facets: tuple[tuple[tuple[int, ...], Fraction], ...]

    @property
    def is_lattice(self) -> bool:
        return all(Fraction(c).denominator == 1 for v in self.vertices for c in v)

    def contains(self, point: Sequence) -> bool:
        return all(_dot(n, point) >= -off for n, off in self.facets)

    def lattice_points(self) -> list[tuple[int, ...]]:
        """All integer points, in lexicographic order."""
        lo = [min(int(Fraction(v[i]).__floor__()) for v in self.vertices) for i in range(self.dim)]
        hi = [max(int(-((-Fraction(v[i])).__floor__())) for v in self.vertices) for i in range(self.dim)]
        return [
            p
            for p in product(*(range(lo[i], hi[i] + 1) for i in range(self.dim)))
            if self.contains(p)
        ]

    def boundary_lattice_points(self) -> list[tuple[int, ...]]:
        return [
            p
            for p in self.lattice_points()
            if any(_dot(n, p) == -off for n, off in self.facets)
        ]

    def interior_lattice_points(self) -> list[tuple[int, ...]]:
        return [
            p
            for p in self.lattice_points()
            if all(_dot(n, p) > -off for n, off in self.facets)
        ]

    def to_json(self) -> str:
        if not self.is_lattice:
            raise ValueError("only lattice polytopes are serializable")
        data = {
            "dim": self.dim,
            "vertices": [[int(c) for c in v] for v in self.vertices],
        }
        return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "LatticePolytope":
        data = json.loads(text)
        return convex_hull(data["vertices"])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "LatticePolytope":
        with open(path) as fh:
            return cls.from_json(fh.read())


def convex_hull(points: Iterable[Sequence]) -> LatticePolytope:
    """Exact hull; surviving vertices keep their first-appearance order."""
    pts: list[Point] = []
    for p in points:
        t = tuple(Fraction(c) if not isinstance(c, int) else c for c in p)
        if t not in pts:
            pts.append(t)
    if not pts:
        raise ValueError("no points given")
    d = len(pts[0])
    base = pts[0]
    diffs = [[Fraction(p[i]) - Fraction(base[i]) for i in range(d)] for p in pts[1:]]
    if rank(diffs) != d:
        raise ValueError("points do not span the full dimension")
    facets: dict[tuple[tuple[int, ...], Fraction], None] = {}
    for combo in combinations(pts, d):
        normal = _hyperplane_normal(combo)
        if normal is None:
            continue
        c = _dot(normal, combo[0])
        values = [_dot(normal, p) for p in pts]
        if all(v >= c for v in values):
            facets[(normal, -Fraction(c))] = None
        elif all(v <= c for v in values):
            facets[(tuple(-x for x in normal), Fraction(c))] = None
    vertices = []
    for i, p in enumerate(pts):
        others = [q + (1,) for j, q in enumerate(pts) if j != i]
        if not in_nonneg_span(others, p + (1,)):
            vertices.append(p)
    return LatticePolytope(d, tuple(vertices), tuple(sorted(facets)))


def polar_dual(p: LatticePolytope) -> LatticePolytope:
    """The polar {y : <y, x> >= -1 for all x in p}; needs 0 interior.

    Polar vertices are the facet normals scaled to offset 1; polar facets
    come from the vertices of p.  Applying it twice returns p.
    """
    if any(off <= 0 for _, off in p.facets):
        raise ValueError("polar dual requires the origin strictly inside")
    vertices = tuple(
        tuple(Fraction(c, 1) / off if off != 1 else c for c in n) for n, off in p.facets
    )
    facets = []
    for v in p.vertices:
        n = _primitive_normal([Fraction(c) for c in v])
        scale = next(Fraction(a) / b for a, b in zip(v, n) if b != 0)
        facets.append((n, 1 / scale))
    return LatticePolytope(p.dim, vertices, tuple(sorted(facets)))


@dataclass(frozen=True)
class ReflexivityCertificate:
    reflexive: bool
    # the integral polar vertices when reflexive, else one violating facet
    witness: tuple

    def __bool__(self) -> bool:
        return self.reflexive


def is_reflexive(p: LatticePolytope) -> ReflexivityCertificate:
    """Reflexive iff 0 is interior and every facet has lattice distance 1."""
    if not p.is_lattice:
        raise ValueError("reflexivity is defined for lattice polytopes")
    if any(off <= 0 for _, off in p.facets):
        raise ValueError("reflexivity requires the origin strictly inside")
    for n, off in p.facets:
        if off != 1:
            return ReflexivityCertificate(False, (n, off))
    return ReflexivityCertificate(True, tuple(n for n, _ in p.facets))


def fano_polytope_of(fan: Fan) -> LatticePolytope:
    """Convex hull of the ray generators."""
    return convex_hull(fan.rays)


def face_fan(p: LatticePolytope) -> Fan:
    """Fan of cones over the facets; requires simplicial facets.

    Ray order follows the polytope's vertex order, so constructions that
    fix a vertex ordering get the matching ray indices.
    """
    if not p.is_lattice:
        raise ValueError("face fan requires a lattice polytope")
    if any(off <= 0 for _, off in p.facets):
        raise ValueError("face fan requires the origin strictly inside")
    index = {v: i for i, v in enumerate(p.vertices)}
    cones = []
    for n, off in p.facets:
        members = [index[v] for v in p.vertices if _dot(n, v) == -off]
        if len(members) != p.dim:
            raise ValueError(
                "polytope has a non-simplicial facet; use crepant_resolution"
            )
        cones.append(tuple(sorted(members)))
    return Fan(p.dim, p.vertices, cones)


def gorenstein_class_of(fan: Fan) -> LatticePolytope:
    """The reflexive polytope Conv(G) of a weak Fano fan."""
    from .primitive import is_weak_fano

    if not is_weak_fano(fan):
        raise ValueError("Gorenstein class is defined for weak Fano fans")
    p = fano_polytope_of(fan)
    assert is_reflexive(p).reflexive
    return p


# -- crepant resolutions (d <= 3) ---------------------------------------


def _ccw_sorted(points: list[tuple[int, int]]) -> list[tuple[int, int]]:
    """Counterclockwise angular order around the origin, exact."""

    def half(p):
        return 0 if (p[1] > 0 or (p[1] == 0 and p[0] > 0)) else 1

    def cmp(a, b):
        ha, hb = half(a), half(b)
        if ha != hb:
            return ha - hb
        cross = a[0] * b[1] - a[1] * b[0]
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return sorted(points, key=cmp_to_key(cmp))


def _triangulate_facet(
    facet_points: list[tuple[int, ...]], corners: list[tuple[int, ...]]
) -> list[tuple[Point, Point, Point]]:
    """Split a convex 2-face into triangles empty of the given lattice points.

    ``corners`` are the face's vertices in cyclic order.  Fan out from the
    first corner, then recursively pull extra lattice points; a triangle
    with no extra points is emitted.
    """
    extra = [p for p in facet_points]

    def refine(tri):
        inside = [
            p
            for p in extra
            if p not in tri and _in_triangle(tri, p)
        ]
        if not inside:
            return [tri]
        q = min(inside)
        a, b, c = tri
        out = []
        for side in ((a, b, c), (b, c, a), (c, a, b)):
            u, v, w = side
            if _collinear(u, v, q):
                # q on edge uv: split that edge only
                return refine((u, q, w)) + refine((q, v, w))
        for u, v in ((a, b), (b, c), (c, a)):
            out.extend(refine((u, v, q)))
        return out

    tris = []
    anchor = corners[0]
    for i in range(1, len(corners) - 1):
        tris.extend(refine((anchor, corners[i], corners[i + 1])))
    return tris


def _collinear(a, b, p) -> bool:
    diffs = [
        [b[i] - a[i] for i in range(len(a))],
        [p[i] - a[i] for i in range(len(a))],
    ]
    return rank(diffs) < 2


def _in_triangle(tri, p) -> bool:
    a, b, c = tri
    # barycentric feasibility in the triangle's plane, exact
    return in_nonneg_span(
        [
            tuple(b[i] - a[i] for i in range(len(a))),
            tuple(c[i] - a[i] for i in range(len(a))),
        ],
        tuple(p[i] - a[i] for i in range(len(a))),
    ) and in_nonneg_span(
        [
            tuple(a[i] - b[i] for i in range(len(a))),
            tuple(c[i] - b[i] for i in range(len(a))),
        ],
        tuple(p[i] - b[i] for i in range(len(a))),
    ) and in_nonneg_span(
        [
            tuple(a[i] - c[i] for i in range(len(a))),
            tuple(b[i] - c[i] for i in range(len(a))),
        ],
        tuple(p[i] - c[i] for i in range(len(a))),
    )


def crepant_resolution(p: LatticePolytope) -> Fan:
    """Nonsingular subdivided face fan of a reflexive polytope, d <= 3.

    Every boundary lattice point becomes a ray; each facet is cut into
    unimodular triangles (segments for d=2).  The result is weak Fano with
    hull equal to p.
    """
    if not is_reflexive(p).reflexive:
        raise ValueError("crepant resolution requires a reflexive polytope")
    if p.dim == 2:
        boundary = _ccw_sorted([pt for pt in p.boundary_lattice_points()])
        n = len(boundary)
        cones = [(i, (i + 1) % n) for i in range(n)]
        return Fan(2, boundary, [tuple(sorted(c)) for c in cones])
    if p.dim != 3:
        raise ValueError("crepant resolution is implemented for d <= 3 only")
    rays = sorted(p.boundary_lattice_points())
    index = {v: i for i, v in enumerate(rays)}
    cones = []
    for n, off in p.facets:
        face_pts = [pt for pt in rays if _dot(n, pt) == -off]
        corners = [v for v in p.vertices if _dot(n, v) == -off]
        corners = _cyclic_face_order(corners, n)
        for tri in _triangulate_facet(face_pts, corners):
            cones.append(tuple(sorted(index[v] for v in tri)))
    return Fan(3, rays, cones)


def _cyclic_face_order(corners: list[Point], normal: tuple[int, ...]) -> list[Point]:
    """Order the vertices of a planar convex face cyclically, exactly."""
    k = len(corners)
    centroid = [Fraction(sum(v[i] for v in corners), k) for i in range(3)]
    # project out the normal direction by dropping its largest coordinate
    j = max(range(3), key=lambda i: abs(normal[i]))
    rel = []
    for v in corners:
        q = [Fraction(v[i]) - centroid[i] for i in range(3)]
        flat = tuple(q[i] for i in range(3) if i != j)
        rel.append((flat, v))

    def half(pq):
        x, y = pq
        return 0 if (y > 0 or (y == 0 and x > 0)) else 1

    def cmp(a, b):
        ha, hb = half(a[0]), half(b[0])
        if ha != hb:
            return ha - hb
        cross = a[0][0] * b[0][1] - a[0][1] * b[0][0]
        return -1 if cross > 0 else (1 if cross < 0 else 0)

    return [v for _, v in sorted(rel, key=cmp_to_key(cmp))]


def unimodularly_equivalent(p: LatticePolytope, q: LatticePolytope) -> bool:
    """Whether an integer |det|=1 linear map sends p's vertices onto q's.

    Both polytopes must contain the origin in their interior (so the map
    is linear, not affine).  Search: fix a spanning tuple of p's vertices
    and try every ordered tuple of q's vertices as its image.
    """
    from itertools import permutations

    from .lattice import find_unimodular_map, mat_mul_vec

    if p.dim != q.dim or len(p.vertices) != len(q.vertices):
        return False
    if any(off <= 0 for _, off in p.facets) or any(off <= 0 for _, off in q.facets):
        raise ValueError("equivalence search requires the origin strictly inside")
    d = p.dim
    span: list[Point] = []
    for v in p.vertices:
        if rank(span + [v]) > len(span):
            span.append(v)
        if len(span) == d:
            break
    targets = set(map(tuple, q.vertices))
    for image in permutations(q.vertices, d):
        try:
            u = find_unimodular_map(list(zip(span, image)))
        except ValueError:
            continue
        if u is None:
            continue
        if {tuple(mat_mul_vec(u, v)) for v in p.vertices} == targets:
            return True
    return False
