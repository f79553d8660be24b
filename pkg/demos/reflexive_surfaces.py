#!/usr/bin/env python3
"""The weak Fano surface / reflexive polygon correspondence.

Enumerates the 16 Gorenstein toric del Pezzo surfaces through the weak
closure of the plane, prints each reflexive polygon with its polar dual,
and checks the boundary-point identity b(P) + b(P*) = 12.
"""

from toricfan import (
    convex_hull,
    crepant_resolution,
    f_closure,
    gorenstein_class_of,
    is_reflexive,
    polar_dual,
    projective_space_fan,
    unimodularly_equivalent,
)


def main() -> None:
    graph = f_closure([projective_space_fan(2)], 2, "weak")
    print(f"weak Fano surface classes found: {len(graph.nodes)}")

    classes = []
    for key in graph.sorted_keys():
        p = gorenstein_class_of(graph.nodes[key].fan)
        if not any(unimodularly_equivalent(p, q) for q in classes):
            classes.append(p)
    classes.sort(key=lambda p: (len(p.vertices), sorted(p.vertices)))
    print(f"reflexive polygons up to unimodular equivalence: {len(classes)}\n")

    for i, p in enumerate(classes, 1):
        assert is_reflexive(p).reflexive
        dual = convex_hull(polar_dual(p).vertices)
        b, b_dual = len(p.boundary_lattice_points()), len(dual.boundary_lattice_points())
        assert b + b_dual == 12
        res = crepant_resolution(p)
        print(
            f"({i:2d}) vertices {sorted(p.vertices)}"
            f"\n     polar {sorted(map(tuple, dual.vertices))}"
            f"\n     boundary points {b} + {b_dual} = 12, "
            f"crepant resolution has {res.n_rays} rays"
        )


if __name__ == "__main__":
    main()
