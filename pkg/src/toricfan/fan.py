"""Complete simplicial fans over the integer lattice.

A :class:`Fan` is immutable: rays are primitive integer vectors, maximal
cones are index tuples into the ray list.  Construction performs cheap
structural sanity checks; :meth:`Fan.validate` runs the full (more
expensive) completeness/intersection audit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .lattice import det, invert_rational, is_primitive, mat_mul_vec

Cone = tuple[int, ...]


def _normalize_cones(cones: Iterable[Sequence[int]]) -> tuple[Cone, ...]:
    return tuple(sorted({tuple(sorted(c)) for c in cones}))


@dataclass(frozen=True)
class Fan:
    dim: int
    rays: tuple[tuple[int, ...], ...]
    max_cones: tuple[Cone, ...]

    def __init__(self, dim: int, rays: Iterable[Sequence[int]], max_cones: Iterable[Sequence[int]]):
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "rays", tuple(tuple(int(c) for c in r) for r in rays))
        object.__setattr__(self, "max_cones", _normalize_cones(max_cones))
        self._check_structure()

    def _check_structure(self) -> None:
        for r in self.rays:
            if len(r) != self.dim:
                raise ValueError(f"ray {r} has wrong dimension")
            if not is_primitive(r):
                raise ValueError(f"ray {r} is not a primitive vector")
        if len(set(self.rays)) != len(self.rays):
            raise ValueError("duplicate rays")
        used: set[int] = set()
        for cone in self.max_cones:
            if len(cone) != self.dim:
                raise ValueError(f"maximal cone {cone} is not full-dimensional")
            if any(i < 0 or i >= len(self.rays) for i in cone):
                raise ValueError(f"cone {cone} references a missing ray")
            if det([self.rays[i] for i in cone]) == 0:
                raise ValueError(f"cone {cone} is degenerate")
            used.update(cone)
        if self.max_cones and used != set(range(len(self.rays))):
            raise ValueError("some rays belong to no maximal cone")
        # every wall (facet of a max cone) must be shared by exactly two
        # max cones in a complete fan
        walls: dict[Cone, int] = {}
        for cone in self.max_cones:
            for wall in combinations(cone, self.dim - 1):
                walls[wall] = walls.get(wall, 0) + 1
        for wall, count in walls.items():
            if count != 2:
                raise ValueError(f"wall {wall} lies in {count} maximal cones, expected 2")

    # -- basic queries -------------------------------------------------

    @cached_property
    def _face_set(self) -> frozenset[Cone]:
        faces: set[Cone] = {()}
        for cone in self.max_cones:
            for k in range(1, self.dim + 1):
                faces.update(combinations(cone, k))
        return frozenset(faces)

    @cached_property
    def _cone_inverses(self) -> tuple[tuple[tuple[Fraction, ...], ...], ...]:
        out = []
        for cone in self.max_cones:
            mat = [[self.rays[i][r] for i in cone] for r in range(self.dim)]
            out.append(tuple(tuple(row) for row in invert_rational(mat)))
        return tuple(out)

    def is_cone(self, indices: Sequence[int]) -> bool:
        """Whether the given ray indices span a cone of the fan."""
        return tuple(sorted(indices)) in self._face_set

    def cones(self, k: int) -> list[Cone]:
        """All k-dimensional cones, as sorted ray-index tuples."""
        return sorted(c for c in self._face_set if len(c) == k)

    @property
    def n_rays(self) -> int:
        return len(self.rays)

    @cached_property
    def picard_number(self) -> int:
        return self.n_rays - self.dim

    @cached_property
    def is_nonsingular(self) -> bool:
        return all(
            abs(det([self.rays[i] for i in cone])) == 1 for cone in self.max_cones
        )

    # -- point location ------------------------------------------------

    def locate(self, point: Sequence[int]) -> tuple[Cone, tuple[Fraction, ...]]:
        """Maximal cone containing ``point`` plus its barycentric coefficients.

        Returns the first maximal cone (in sorted order) whose coefficients
        are all nonnegative.
        """
        for cone, inv in zip(self.max_cones, self._cone_inverses):
            coeffs = mat_mul_vec(inv, point)
            if all(c >= 0 for c in coeffs):
                return cone, tuple(coeffs)
        raise ValueError(f"point {tuple(point)} is outside the fan support")

    def minimal_cone_containing(self, point: Sequence[int]) -> tuple[Cone, tuple[Fraction, ...]]:
        """Smallest cone whose relative interior contains ``point``.

        Returns the cone (ray indices with strictly positive coefficient)
        and the positive coefficients in matching order.
        """
        cone, coeffs = self.locate(point)
        kept = [(i, c) for i, c in zip(cone, coeffs) if c > 0]
        return tuple(i for i, _ in kept), tuple(c for _, c in kept)

    # -- full validation ------------------------------------------------

    def validate(self) -> list[str]:
        """Full audit; returns a list of problems (empty means valid).

        Beyond the constructor checks this verifies that any two maximal
        cones intersect in a common face, and that the two cones on each
        wall lie on opposite sides of it.
        """
        problems: list[str] = []
        from .lattice import in_nonneg_span

        for a, b in combinations(self.max_cones, 2):
            shared = tuple(sorted(set(a) & set(b)))
            if shared and not self.is_cone(shared):
                problems.append(f"intersection {shared} of {a} and {b} is not a face")
                continue
            # each non-shared generator of one cone must lie outside the other
            for cone, other in ((a, b), (b, a)):
                gens = [self.rays[i] for i in other]
                for i in cone:
                    if i not in shared and in_nonneg_span(gens, self.rays[i]):
                        problems.append(
                            f"cones {a} and {b} overlap beyond their shared face {shared}"
                        )
                        break
        return problems

    # -- serialization ---------------------------------------------------

    def to_json(self) -> str:
        data = {
            "dim": self.dim,
            "rays": [list(r) for r in self.rays],
            "max_cones": [list(c) for c in self.max_cones],
        }
        return json.dumps(data, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Fan":
        data = json.loads(text)
        return cls(data["dim"], data["rays"], data["max_cones"])

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Fan":
        with open(path) as fh:
            return cls.from_json(fh.read())

    def __hash__(self) -> int:
        return hash((self.dim, self.rays, self.max_cones))


def projective_space_fan(d: int) -> Fan:
    """Fan of d-dimensional projective space: rays e_1..e_d and -(e_1+..+e_d)."""
    rays = [tuple(int(i == j) for j in range(d)) for i in range(d)]
    rays.append(tuple(-1 for _ in range(d)))
    cones = list(combinations(range(d + 1), d))
    return Fan(d, rays, cones)


def product_fan(a: Fan, b: Fan) -> Fan:
    """Fan of the product variety: rays are padded copies, cones are joins."""
    dim = a.dim + b.dim
    rays = [r + (0,) * b.dim for r in a.rays] + [(0,) * a.dim + r for r in b.rays]
    off = a.n_rays
    cones = [
        tuple(ca) + tuple(off + i for i in cb)
        for ca in a.max_cones
        for cb in b.max_cones
    ]
    return Fan(dim, rays, cones)
