"""Primitive collections and relations of a complete simplicial fan.

A primitive collection is a minimal set of rays that does not span a cone;
its relation rewrites the sum of its generators in the unique cone whose
relative interior contains that sum.  These relations generate the Mori
cone of the associated toric variety, and their degrees detect Fano-ness.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

from .fan import Cone, Fan
from .lattice import in_nonneg_span, solve_in_cone_basis, vec_sum

Collection = tuple[int, ...]
OneCycle = tuple[int, ...]


@dataclass(frozen=True)
class PrimitiveRelation:
    """x_{i1} + ... + x_{il} = a_1 y_{j1} + ... + a_m y_{jm}.

    ``collection`` holds the left-hand ray indices, ``coefficients`` the
    (ray index, positive multiplicity) pairs on the right.  ``sigma`` is
    the cone spanned by the right-hand rays (empty when the sum is zero).
    """

    collection: Collection
    coefficients: tuple[tuple[int, int], ...]

    @property
    def sigma(self) -> Cone:
        return tuple(i for i, _ in self.coefficients)

    @property
    def degree(self) -> int:
        return len(self.collection) - sum(a for _, a in self.coefficients)

    def __str__(self) -> str:
        lhs = " + ".join(f"x{i}" for i in self.collection)
        if not self.coefficients:
            return f"{lhs} = 0"
        rhs = " + ".join(
            (f"{a}*x{j}" if a != 1 else f"x{j}") for j, a in self.coefficients
        )
        return f"{lhs} = {rhs}"


@lru_cache(maxsize=4096)
def primitive_collections(fan: Fan) -> tuple[Collection, ...]:
    """All minimal non-cone ray-index sets, sorted.

    Grown from the cone lattice: any candidate minus its largest index is
    a cone, so extending cones by one higher index finds every candidate
    exactly once.
    """
    out: list[Collection] = []
    n = fan.n_rays
    for k in range(2, fan.dim + 2):
        for base in fan.cones(k - 1):
            top = base[-1] if base else -1
            for j in range(top + 1, n):
                cand = base + (j,)
                if fan.is_cone(cand):
                    continue
                if all(
                    fan.is_cone(cand[:i] + cand[i + 1 :]) for i in range(k - 1)
                ):
                    out.append(cand)
    return tuple(sorted(out))


@lru_cache(maxsize=4096)
def primitive_relations(fan: Fan) -> tuple[PrimitiveRelation, ...]:
    return tuple(primitive_relation(fan, p) for p in primitive_collections(fan))


def primitive_relation(fan: Fan, collection: Collection) -> PrimitiveRelation:
    collection = tuple(sorted(collection))
    if collection not in primitive_collections(fan):
        raise ValueError(f"{collection} is not a primitive collection")
    total = vec_sum([fan.rays[i] for i in collection], fan.dim)
    if not any(total):
        return PrimitiveRelation(collection, ())
    sigma, coeffs = fan.minimal_cone_containing(total)
    pairs = []
    for i, c in zip(sigma, coeffs):
        if c.denominator != 1:
            raise ValueError(
                f"non-integer coefficient {c} for ray {i}: fan is not nonsingular"
            )
        pairs.append((i, int(c)))
    return PrimitiveRelation(collection, tuple(pairs))


def is_fano(fan: Fan) -> bool:
    if not fan.is_nonsingular:
        raise ValueError("Fano test requires a nonsingular fan")
    return all(r.degree > 0 for r in primitive_relations(fan))


def is_weak_fano(fan: Fan) -> bool:
    if not fan.is_nonsingular:
        raise ValueError("weak Fano test requires a nonsingular fan")
    return all(r.degree >= 0 for r in primitive_relations(fan))


def one_cycle_r(fan: Fan, rel: PrimitiveRelation) -> OneCycle:
    """Integer weights per ray: +1 on the collection, -a_j on the rhs."""
    w = [0] * fan.n_rays
    for i in rel.collection:
        w[i] += 1
    for j, a in rel.coefficients:
        w[j] -= a
    return tuple(w)


def one_cycle_v(fan: Fan, wall: Cone) -> OneCycle:
    """Weights of the relation among the d+1 rays around a wall.

    Normalized so the two rays not on the wall carry weight 1.
    """
    wall = tuple(sorted(wall))
    if len(wall) != fan.dim - 1 or not fan.is_cone(wall):
        raise ValueError(f"{wall} is not a wall of the fan")
    wall_set = set(wall)
    extra = sorted(
        {
            i
            for cone in fan.max_cones
            if wall_set <= set(cone)
            for i in cone
            if i not in wall_set
        }
    )
    if len(extra) != 2:
        raise ValueError(f"wall {wall} adjoins {len(extra)} maximal cones, expected 2")
    total = vec_sum([fan.rays[extra[0]], fan.rays[extra[1]]], fan.dim)
    coeffs = solve_in_cone_basis([fan.rays[i] for i in wall], total)
    if coeffs is None:
        raise ValueError("wall rays do not span the adjoining ray sum")
    w = [0] * fan.n_rays
    w[extra[0]] = w[extra[1]] = 1
    for i, c in zip(wall, coeffs):
        if c.denominator != 1:
            raise ValueError("wall relation has non-integer coefficients")
        w[i] -= int(c)
    return tuple(w)


@lru_cache(maxsize=4096)
def mori_extreme_rays(fan: Fan) -> tuple[OneCycle, ...]:
    """Extreme rays of the cone spanned by the relation cycles r(P)."""
    gens = sorted({one_cycle_r(fan, r) for r in primitive_relations(fan)})
    extreme = []
    for g in gens:
        others = [h for h in gens if not _parallel(g, h)]
        if not in_nonneg_span(others, g):
            extreme.append(g)
    return tuple(extreme)


def _parallel(a: OneCycle, b: OneCycle) -> bool:
    # positive-rational proportionality of nonzero integer vectors
    ia = next(i for i, c in enumerate(a) if c)
    if b[ia] == 0 or (a[ia] > 0) != (b[ia] > 0):
        return False
    return all(x * b[ia] == y * a[ia] for x, y in zip(a, b))


def is_extremal(fan: Fan, rel: PrimitiveRelation) -> bool:
    g = one_cycle_r(fan, rel)
    return any(_parallel(g, e) for e in mori_extreme_rays(fan))


def is_splitting_fan(fan: Fan) -> bool:
    """True when all primitive collections are pairwise disjoint."""
    pcs = primitive_collections(fan)
    return all(
        not (set(a) & set(b)) for a, b in combinations(pcs, 2)
    )


def is_pseudo_symmetric(fan: Fan) -> bool:
    """True when some maximal cone is the pointwise negation of another."""
    cone_sets = {
        frozenset(fan.rays[i] for i in cone): cone for cone in fan.max_cones
    }
    for rays in cone_sets:
        if frozenset(tuple(-c for c in v) for v in rays) in cone_sets:
            return True
    return False
