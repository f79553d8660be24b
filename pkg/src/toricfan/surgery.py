"""Equivariant surgery on nonsingular complete fans.

Star subdivisions (blow-ups), blow-downs along exceptional relations
x_1+...+x_l = x, flops of extremal degree-0 relations, and combinatorial
predictors that derive the primitive collections / Fano-ness of the result
without rebuilding it from scratch.

Ray bookkeeping is deterministic: a blow-up appends the new ray at the
end, and a blow-down removes one ray so the indices above it shift down
by one.  Callers that need provenance can reconstruct the relabeling from
these two rules.
"""

from __future__ import annotations

from itertools import combinations
from typing import Sequence

from .fan import Cone, Fan
from .lattice import primitive_part, solve_in_cone_basis, vec_sum
from .primitive import (
    Collection,
    PrimitiveRelation,
    is_extremal,
    is_fano,
    is_weak_fano,
    primitive_collections,
    primitive_relation,
    primitive_relations,
)


def star_subdivide(fan: Fan, sigma: Sequence[int], x: Sequence[int]) -> Fan:
    """Subdivide every cone containing sigma at the new ray x.

    x must be a primitive lattice point in the relative interior of sigma.
    The new ray is appended after the existing ones.
    """
    sigma = tuple(sorted(sigma))
    if not fan.is_cone(sigma) or not sigma:
        raise ValueError(f"{sigma} is not a cone of the fan")
    x = tuple(int(c) for c in x)
    coeffs = solve_in_cone_basis([fan.rays[i] for i in sigma], x)
    if coeffs is None or any(c <= 0 for c in coeffs):
        raise ValueError(f"{x} is not in the relative interior of cone {sigma}")
    if primitive_part(x) != x:
        raise ValueError(f"{x} is not primitive")
    sigma_set = set(sigma)
    new_index = fan.n_rays
    cones: list[Cone] = []
    for cone in fan.max_cones:
        if sigma_set <= set(cone):
            for i in sigma:
                cones.append(tuple(j for j in cone if j != i) + (new_index,))
        else:
            cones.append(cone)
    return Fan(fan.dim, fan.rays + (x,), cones)


def blow_up(fan: Fan, sigma: Sequence[int]) -> Fan:
    """Star subdivision at the sum of the cone's generators."""
    sigma = tuple(sorted(sigma))
    if len(sigma) < 2:
        raise ValueError("blow-up center must be a cone of dimension >= 2")
    x = vec_sum([fan.rays[i] for i in sigma], fan.dim)
    return star_subdivide(fan, sigma, x)


def predict_pc_after(
    pcs: Sequence[Collection], sigma: Sequence[int], x_index: int
) -> tuple[Collection, ...]:
    """Primitive collections of the subdivided fan, from those of the original.

    Three families: the subdivided cone itself, old collections not
    containing it, and minimal elements of {(P \\ sigma) + x} over old
    collections meeting sigma.
    """
    sigma_set = frozenset(sigma)
    out = {tuple(sorted(sigma))}
    out.update(p for p in pcs if not sigma_set <= set(p))
    cands = {
        frozenset(set(p) - sigma_set) | {x_index}
        for p in pcs
        if set(p) & sigma_set
    }
    for c in cands:
        if not any(other < c for other in cands):
            out.add(tuple(sorted(c)))
    return tuple(sorted(out))


def _check_blowdown_shape(rel: PrimitiveRelation) -> int:
    """The contracted ray index of an exceptional relation x_1+...+x_l = x."""
    if len(rel.coefficients) != 1 or rel.coefficients[0][1] != 1:
        raise ValueError(f"relation {rel} is not of the shape x_1+...+x_l = x")
    return rel.coefficients[0][0]


def blowdown_collection_condition(fan: Fan, rel: PrimitiveRelation) -> bool:
    """Every other collection meeting the lhs maps onto a primitive collection.

    For each P' != P* with P' ∩ P* nonempty, (P' \\ P*) + x must contain a
    primitive collection.  Equivalent to :func:`blowdown_cone_condition`.
    """
    x = _check_blowdown_shape(rel)
    pstar = set(rel.collection)
    pcs = primitive_collections(fan)
    pc_sets = [frozenset(p) for p in pcs]
    for p in pcs:
        if p == rel.collection or not set(p) & pstar:
            continue
        mapped = (set(p) - pstar) | {x}
        if not any(q <= mapped for q in pc_sets):
            return False
    return True


def blowdown_cone_condition(fan: Fan, rel: PrimitiveRelation) -> bool:
    """Cone-wise blow-down criterion, checked over maximal cones at x.

    For every maximal cone containing x and every lhs member x_i, the set
    (G(cone) ∪ P*) \\ {x_i} must span a cone of the fan.
    """
    x = _check_blowdown_shape(rel)
    pstar = set(rel.collection)
    for cone in fan.max_cones:
        if x not in cone:
            continue
        union = set(cone) | pstar
        for i in rel.collection:
            if not fan.is_cone(tuple(union - {i})):
                return False
    return True


def blow_down_candidates(fan: Fan) -> tuple[PrimitiveRelation, ...]:
    """All exceptional relations admitting a nonsingular blow-down, sorted."""
    out = []
    for rel in primitive_relations(fan):
        if len(rel.coefficients) != 1 or rel.coefficients[0][1] != 1:
            continue
        if blowdown_collection_condition(fan, rel):
            out.append(rel)
    return tuple(sorted(out, key=lambda r: r.collection))


def blow_down(fan: Fan, rel: PrimitiveRelation, *, verified: bool = False) -> Fan:
    """Contract the divisor of the rhs ray of an exceptional relation.

    Maximal cones through the contracted ray x are replaced by the cones
    spanned by (G(cone) ∪ P*) \\ {x}; the ray x is removed and all higher
    ray indices shift down by one.  ``verified=True`` skips re-checking
    that the relation is a valid blow-down candidate.
    """
    x = _check_blowdown_shape(rel)
    if rel.collection not in primitive_collections(fan):
        raise ValueError(f"{rel.collection} is not a primitive collection")
    if primitive_relation(fan, rel.collection) != rel:
        raise ValueError(f"{rel} is not a primitive relation of the fan")
    if not verified and not blowdown_collection_condition(fan, rel):
        raise ValueError(f"{rel} does not admit a nonsingular blow-down")
    pstar = set(rel.collection)
    new_cones: set[Cone] = set()
    for cone in fan.max_cones:
        if x not in cone:
            new_cones.add(cone)
            continue
        merged = (set(cone) - {x}) | pstar
        if len(merged) != fan.dim:
            raise ValueError(f"contraction of cone {cone} is not simplicial")
        new_cones.add(tuple(sorted(merged)))
    relabel = lambda i: i if i < x else i - 1
    rays = fan.rays[:x] + fan.rays[x + 1 :]
    return Fan(fan.dim, rays, [tuple(relabel(i) for i in c) for c in new_cones])


def predict_pc_after_blowdown(
    pcs: Sequence[Collection], lhs: Collection, x_index: int
) -> tuple[Collection, ...]:
    """Primitive collections of the blow-down target, from those of the source.

    ``lhs`` is the contracted relation's collection (the generators of the
    recovered cone) and ``x_index`` its rhs ray.  Indices are reported in
    the source fan's labeling, before compaction removes x_index.
    """
    lhs = tuple(sorted(lhs))
    lhs_set = set(lhs)
    pc_set = set(map(tuple, pcs))
    out = set()
    for p in pcs:
        if x_index not in p:
            if tuple(p) != lhs:
                out.add(tuple(p))
            continue
        rest = set(p) - {x_index}
        if any(
            tuple(sorted(rest | set(s))) in pc_set
            for k in range(1, len(lhs) + 1)
            for s in combinations(lhs, k)
        ):
            continue
        out.add(tuple(sorted(rest | lhs_set)))
    return tuple(sorted(out))


def predict_blowdown_fano(fan: Fan, rel: PrimitiveRelation, *, weak: bool = False) -> bool:
    """Whether the blow-down target stays (weak) Fano, without building it.

    Scans the source fan's relations for an obstructing one whose rhs uses
    the contracted ray x positively, at most l-1 of the lhs members, and
    whose degree drops below the (weak) Fano threshold once x is replaced
    by the l contracted generators.
    """
    x = _check_blowdown_shape(rel)
    if weak:
        if not is_weak_fano(fan):
            raise ValueError("predictor requires a weak Fano source fan")
    elif not is_fano(fan):
        raise ValueError("predictor requires a Fano source fan")
    pstar = set(rel.collection)
    l = len(rel.collection)
    forbidden = pstar | {x}
    for other in primitive_relations(fan):
        if set(other.collection) & forbidden:
            continue
        rhs = dict(other.coefficients)
        b = rhs.get(x, 0)
        if b <= 0:
            continue
        c_total = sum(a for j, a in rhs.items() if j in pstar)
        n_members = sum(1 for j in rhs if j in pstar)
        if n_members > l - 1:
            continue
        m = len(other.collection)
        n = sum(1 for j in rhs if j != x and j not in pstar)
        a_total = sum(a for j, a in rhs.items() if j != x and j not in pstar)
        deg = m - (a_total + b + c_total)
        deg_after = m - (a_total + b * l + c_total)
        if m + n + l > fan.dim + 1:
            continue
        if weak:
            if deg >= 0 and deg_after < 0:
                return False
        else:
            if deg > 0 and deg_after <= 0:
                return False
    return True


def flop(fan: Fan, collection: Collection) -> Fan:
    """Replace the side of an extremal degree-0 relation x_1+..+x_l = y_1+..+y_l.

    Implemented as a blow-up along the rhs cone followed by the blow-down
    of the induced exceptional relation; the ray set is unchanged and the
    relation flips orientation.  Applying it twice restores the fan.
    """
    rel = primitive_relation(fan, collection)
    if (
        rel.degree != 0
        or not rel.coefficients
        or any(a != 1 for _, a in rel.coefficients)
        or len(rel.coefficients) != len(rel.collection)
    ):
        raise ValueError(f"relation {rel} is not of the shape x_1+..+x_l = y_1+..+y_l")
    if not is_extremal(fan, rel):
        raise ValueError(f"relation {rel} is not extremal in the Mori cone")
    up = blow_up(fan, rel.sigma)
    z = up.n_rays - 1
    mid = primitive_relation(up, rel.collection)
    if mid.coefficients != ((z, 1),):
        raise ValueError("flop center did not produce an exceptional relation")
    return blow_down(up, mid)
